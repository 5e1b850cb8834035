//! Text renderings of spectra, pathloss sweeps and window lists.

use std::fmt::Write as _;

use serde::Serialize;

use crate::channel::{PathlossPoint, TransmissionWindow};
use crate::error::{Error, Result};
use crate::spectra::Spectrum;

pub const DEFAULT_PRECISION: usize = 6;

pub const SPECTRUM_HEADER: &str = "wavelength_nm,mu_a_cm1";
pub const PATHLOSS_HEADER: &str = "wavelength_nm,mu_a_cm1,loss_linear,loss_db";
pub const WINDOWS_HEADER: &str = "lo_nm,hi_nm,threshold_db";

/// Precision that reproduces every `f64` exactly.
pub const ROUND_TRIP_PRECISION: usize = 17;

/// Formats `x` rounded to `digits` significant digits, trailing zeros
/// dropped. Plain notation for `1e-5 <= |x| < 1e15`, exponent form outside.
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded = round_sig(x, digits);
    let magnitude = rounded.abs();
    if (1e-5..1e15).contains(&magnitude) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// `x` rounded to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.clamp(1, ROUND_TRIP_PRECISION) - 1, x)
        .parse()
        .expect("formatted float parses")
}

pub fn spectrum_csv(spectrum: &Spectrum, digits: usize) -> String {
    let mut out = format!("{SPECTRUM_HEADER}\n");
    for &(l, v) in &spectrum.samples {
        let _ = writeln!(out, "{},{}", format_sig(l, digits), format_sig(v, digits));
    }
    out
}

pub fn pathloss_csv(points: &[PathlossPoint], digits: usize) -> String {
    let mut out = format!("{PATHLOSS_HEADER}\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            format_sig(p.lambda, digits),
            format_sig(p.mu_a, digits),
            format_sig(p.loss_linear, digits),
            format_sig(p.loss_db, digits)
        );
    }
    out
}

pub fn windows_csv(windows: &[TransmissionWindow], digits: usize) -> String {
    let mut out = format!("{WINDOWS_HEADER}\n");
    for w in windows {
        let _ = writeln!(
            out,
            "{},{},{}",
            format_sig(w.lo, digits),
            format_sig(w.hi, digits),
            format_sig(w.threshold_db, digits)
        );
    }
    out
}

/// Named-field rendering of a window list.
pub fn windows_text(windows: &[TransmissionWindow], threshold_db: f64) -> Result<String> {
    #[derive(Serialize)]
    struct Row {
        lo_nm: f64,
        hi_nm: f64,
    }
    #[derive(Serialize)]
    struct Doc {
        threshold_db: f64,
        count: usize,
        window: Vec<Row>,
    }
    let doc = Doc {
        threshold_db,
        count: windows.len(),
        window: windows.iter().map(|w| Row { lo_nm: w.lo, hi_nm: w.hi }).collect(),
    };
    toml::to_string(&doc).map_err(|e| Error::Record(e.to_string()))
}
