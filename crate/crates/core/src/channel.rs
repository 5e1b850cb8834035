//! Absorption-only link quantities for a homogeneous tissue slab.
//!
//! Pathloss over a distance δ is `L = exp(μ_a δ)` and transmittance its
//! reciprocal. Geometric spreading, misalignment and scattering losses are
//! not modelled.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tissue::Absorber;
use crate::units::{Band, Distance, Wavelength};

/// dB per neper of intensity loss, 10·log10(e).
pub const DB_PER_NEPER: f64 = 10.0 * std::f64::consts::LOG10_E;

/// Optical depths (μ_a·δ) above this are reported as saturated "opaque".
pub const OPAQUE_OPTICAL_DEPTH: f64 = 700.0;

/// Default window threshold, dB.
pub const DEFAULT_THRESHOLD_DB: f64 = 6.0;

/// Window endpoints are refined until the bracketing interval is at most
/// this wide, nm.
pub const ENDPOINT_RESOLUTION_NM: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Loss {
    /// `exp(μ_a δ)`, saturated at `exp(700)` when opaque.
    pub linear: f64,
    /// Exact `10·log10(e)·μ_a·δ`; never saturated.
    pub db: f64,
    pub opaque: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmittance {
    /// `exp(−μ_a δ)`, saturated at `exp(−700)` when opaque.
    pub value: f64,
    pub opaque: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathlossPoint {
    pub lambda: f64,
    pub mu_a: f64,
    pub loss_linear: f64,
    pub loss_db: f64,
    pub opaque: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionWindow {
    pub lo: f64,
    pub hi: f64,
    pub threshold_db: f64,
}

/// Thickness at which the loss reaches a threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PenetrationDepth {
    Finite { cm: f64 },
    /// μ_a = 0: no thickness ever reaches the threshold.
    Unbounded,
}

impl PenetrationDepth {
    pub fn cm(&self) -> Option<f64> {
        match *self {
            Self::Finite { cm } => Some(cm),
            Self::Unbounded => None,
        }
    }
}

fn check_mu(mu_a: f64) -> Result<()> {
    if mu_a.is_finite() && mu_a >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!(
            "absorption coefficient must be finite and >= 0, got {mu_a}"
        )))
    }
}

fn check_threshold(threshold_db: f64) -> Result<()> {
    if threshold_db.is_finite() && threshold_db >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!(
            "threshold must be finite and >= 0 dB, got {threshold_db}"
        )))
    }
}

#[inline]
fn loss_db(mu_a: f64, delta: Distance) -> f64 {
    DB_PER_NEPER * mu_a * delta.cm()
}

pub fn pathloss(mu_a: f64, delta: Distance) -> Result<Loss> {
    check_mu(mu_a)?;
    let depth = mu_a * delta.cm();
    let opaque = depth > OPAQUE_OPTICAL_DEPTH;
    Ok(Loss {
        linear: depth.min(OPAQUE_OPTICAL_DEPTH).exp(),
        db: loss_db(mu_a, delta),
        opaque,
    })
}

pub fn transmittance(mu_a: f64, delta: Distance) -> Result<Transmittance> {
    check_mu(mu_a)?;
    let depth = mu_a * delta.cm();
    Ok(Transmittance {
        value: (-depth.min(OPAQUE_OPTICAL_DEPTH)).exp(),
        opaque: depth > OPAQUE_OPTICAL_DEPTH,
    })
}

pub fn pathloss_point(absorber: &impl Absorber, lambda: Wavelength, delta: Distance) -> Result<PathlossPoint> {
    let mu_a = absorber.mu_a(lambda)?;
    let loss = pathloss(mu_a, delta)?;
    Ok(PathlossPoint {
        lambda: lambda.nm(),
        mu_a,
        loss_linear: loss.linear,
        loss_db: loss.db,
        opaque: loss.opaque,
    })
}

/// Pathloss on every grid point, in grid order.
pub fn pathloss_spectrum(absorber: &impl Absorber, delta: Distance, band: &Band) -> Result<Vec<PathlossPoint>> {
    (0..band.len())
        .into_par_iter()
        .map(|k| pathloss_point(absorber, Wavelength::new(band.at(k))?, delta))
        .collect()
}

/// Maximal sub-bands where the loss stays at or below `threshold_db`.
///
/// Runs of passing grid points form windows; each interior edge is then
/// bisected against its failing neighbour until the bracket is at most
/// [`ENDPOINT_RESOLUTION_NM`] wide, and the passing side is reported.
pub fn transmission_windows(
    absorber: &impl Absorber,
    delta: Distance,
    band: &Band,
    threshold_db: f64,
) -> Result<Vec<TransmissionWindow>> {
    check_threshold(threshold_db)?;
    let points = pathloss_spectrum(absorber, delta, band)?;
    let passes = |db: f64| db <= threshold_db;
    let loss_at = |nm: f64| -> Result<f64> { Ok(loss_db(absorber.mu_a(Wavelength::new(nm)?)?, delta)) };

    // bisect between a passing and a failing wavelength
    let refine = |mut good: f64, mut bad: f64| -> Result<f64> {
        while (bad - good).abs() > ENDPOINT_RESOLUTION_NM {
            let mid = 0.5 * (good + bad);
            if passes(loss_at(mid)?) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        Ok(good)
    };

    let mut windows = Vec::new();
    let mut k = 0;
    while k < points.len() {
        if !passes(points[k].loss_db) {
            k += 1;
            continue;
        }
        let start = k;
        while k + 1 < points.len() && passes(points[k + 1].loss_db) {
            k += 1;
        }
        let end = k;
        let lo = if start == 0 {
            points[0].lambda
        } else {
            refine(points[start].lambda, points[start - 1].lambda)?
        };
        let hi = if end + 1 == points.len() {
            points[end].lambda
        } else {
            refine(points[end].lambda, points[end + 1].lambda)?
        };
        if lo < hi {
            windows.push(TransmissionWindow {
                lo,
                hi,
                threshold_db,
            });
        }
        k += 1;
    }
    Ok(windows)
}

/// Thickness at which the loss at `lambda` equals `threshold_db`:
/// `threshold / (10·log10(e)·μ_a)`.
pub fn penetration_depth(absorber: &impl Absorber, lambda: Wavelength, threshold_db: f64) -> Result<PenetrationDepth> {
    depth_for_mu(absorber.mu_a(lambda)?, threshold_db)
}

pub fn depth_for_mu(mu_a: f64, threshold_db: f64) -> Result<PenetrationDepth> {
    check_mu(mu_a)?;
    check_threshold(threshold_db)?;
    if mu_a == 0.0 {
        return Ok(PenetrationDepth::Unbounded);
    }
    Ok(PenetrationDepth::Finite {
        cm: threshold_db / (DB_PER_NEPER * mu_a),
    })
}

/// Grid wavelength with the lowest loss; ties go to the smallest λ.
pub fn optimal_wavelength(absorber: &impl Absorber, delta: Distance, band: &Band) -> Result<PathlossPoint> {
    let points = pathloss_spectrum(absorber, delta, band)?;
    let mut best = points[0];
    for p in &points[1..] {
        if p.loss_db < best.loss_db {
            best = *p;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tissue::Uniform;

    fn mm(v: f64) -> Distance {
        Distance::from_mm(v).unwrap()
    }

    fn cm(v: f64) -> Distance {
        Distance::from_cm(v).unwrap()
    }

    #[test]
    fn transparent_medium() {
        let l = pathloss(0.0, cm(3.0)).unwrap();
        assert_eq!((l.linear, l.db, l.opaque), (1.0, 0.0, false));
        assert_eq!(transmittance(0.0, cm(3.0)).unwrap().value, 1.0);
    }

    #[test]
    fn one_neper() {
        let l = pathloss(10.0, mm(1.0)).unwrap();
        assert!((l.linear - std::f64::consts::E).abs() < 1e-15);
        assert!((l.db - 4.342944819032518).abs() < 1e-12);
        assert!((l.db - 4.3429).abs() < 1e-4);
        let t = transmittance(10.0, mm(1.0)).unwrap();
        assert!((t.value - 0.367879).abs() < 1e-6);
    }

    #[test]
    fn quarter_power_boundary() {
        let mu = 4f64.ln();
        let t = transmittance(mu, cm(1.0)).unwrap();
        assert!((t.value - 0.25).abs() < 1e-15);
        let db = pathloss(mu, cm(1.0)).unwrap().db;
        assert!((db - 6.0206).abs() < 1e-4);
    }

    #[test]
    fn multiplicative_over_distance() {
        let l2 = pathloss(1.0, cm(2.0)).unwrap().linear;
        let l1 = pathloss(1.0, cm(1.0)).unwrap().linear;
        assert!((l2 - l1 * l1).abs() <= 1e-12 * l2);
    }

    #[test]
    fn opaque_saturation() {
        let l = pathloss(1e4, cm(1.0)).unwrap();
        assert!(l.opaque);
        assert!(l.linear.is_finite());
        assert_eq!(l.db, DB_PER_NEPER * 1e4);
        let t = transmittance(1e4, cm(1.0)).unwrap();
        assert!(t.opaque && t.value > 0.0);
        assert!(pathloss(f64::NAN, cm(1.0)).is_err());
        assert!(pathloss(-1.0, cm(1.0)).is_err());
    }

    #[test]
    fn depth_closed_form() {
        let d = depth_for_mu(1.0, 6.0).unwrap().cm().unwrap();
        assert!((d - 1.381551).abs() < 1e-6);
        assert!((d - 10f64.powf(0.6).ln()).abs() < 1e-14);
        let half = depth_for_mu(2.0, 6.0).unwrap().cm().unwrap();
        assert_eq!(half, d / 2.0);
        assert_eq!(depth_for_mu(0.0, 6.0).unwrap(), PenetrationDepth::Unbounded);
        let back = pathloss(1.0, cm(d)).unwrap().db;
        assert!((back - 6.0).abs() <= 6.0 * 1e-9);
    }

    #[test]
    fn zero_threshold_gives_no_windows() {
        let w = transmission_windows(&Uniform(0.5), mm(1.0), &Band::visible_nir(), 0.0).unwrap();
        assert!(w.is_empty());
        assert!(transmission_windows(&Uniform(0.5), mm(1.0), &Band::visible_nir(), -1.0).is_err());
    }

    #[test]
    fn uniform_medium_is_one_full_window_or_none() {
        let b = Band::visible_nir();
        let w = transmission_windows(&Uniform(1.0), mm(1.0), &b, 6.0).unwrap();
        assert_eq!(w, vec![TransmissionWindow { lo: 400.0, hi: 1000.0, threshold_db: 6.0 }]);
        let w = transmission_windows(&Uniform(100.0), mm(1.0), &b, 6.0).unwrap();
        assert!(w.is_empty());
    }

    #[test]
    fn ties_break_towards_band_start() {
        let p = optimal_wavelength(&Uniform(3.0), mm(1.0), &Band::visible_nir()).unwrap();
        assert_eq!(p.lambda, 400.0);
    }

    /// A V-shaped absorber with known crossing points.
    struct Vee;

    impl Absorber for Vee {
        fn absorption(&self, lambda: Wavelength) -> Result<(f64, bool)> {
            Ok(((lambda.nm() - 700.0).abs() / 10.0, false))
        }
    }

    #[test]
    fn endpoints_are_bisected() {
        // loss_db = 4.3429 * |λ-700|/10 * 1 cm ≤ 6  ⇔  |λ-700| ≤ 13.8155...
        let half_width = 60.0 / DB_PER_NEPER;
        let w = transmission_windows(&Vee, cm(1.0), &Band::visible_nir(), 6.0).unwrap();
        assert_eq!(w.len(), 1);
        assert!((w[0].lo - (700.0 - half_width)).abs() <= ENDPOINT_RESOLUTION_NM);
        assert!((w[0].hi - (700.0 + half_width)).abs() <= ENDPOINT_RESOLUTION_NM);
        assert!(w[0].lo >= 700.0 - half_width && w[0].hi <= 700.0 + half_width);
        let p = optimal_wavelength(&Vee, cm(1.0), &Band::visible_nir()).unwrap();
        assert_eq!(p.lambda, 700.0);
    }
}
