//! Unit-tagged scalar quantities.
//!
//! Wavelengths are nanometres, absorption coefficients reciprocal
//! centimetres, and distances are stored in centimetres after conversion
//! from an explicit `mm` or `cm` tag.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Default validity domain of the fitted constituent models, in nm.
pub const DEFAULT_DOMAIN: Domain = Domain {
    lo: 400.0,
    hi: 1000.0,
};

/// A strictly positive, finite wavelength in nanometres.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Wavelength(f64);

impl Wavelength {
    pub fn new(nm: f64) -> Result<Self> {
        if nm.is_finite() && nm > 0.0 {
            Ok(Self(nm))
        } else {
            Err(Error::InvalidWavelength(nm))
        }
    }

    #[inline]
    pub fn nm(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Wavelength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} nm", self.0)
    }
}

/// Closed wavelength interval over which a fitted model is trusted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Domain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return Err(Error::Band(format!("invalid domain [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, lambda: Wavelength) -> bool {
        (self.lo..=self.hi).contains(&lambda.nm())
    }

    pub(crate) fn check(&self, lambda: Wavelength, policy: Extrapolation) -> Result<()> {
        if policy == Extrapolation::Allow || self.contains(lambda) {
            Ok(())
        } else {
            Err(Error::Domain {
                lambda: lambda.nm(),
                lo: self.lo,
                hi: self.hi,
            })
        }
    }
}

impl Default for Domain {
    fn default() -> Self {
        DEFAULT_DOMAIN
    }
}

/// Whether evaluation outside a model's validity domain is permitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Extrapolation {
    #[default]
    Forbid,
    Allow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthUnit {
    Millimetre,
    Centimetre,
}

/// A strictly positive path length, stored in centimetres.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Distance {
    cm: f64,
}

impl Distance {
    pub fn new(value: f64, unit: LengthUnit) -> Result<Self> {
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::InvalidDistance(format!(
                "distance must be finite and > 0, got {value}"
            )));
        }
        let cm = match unit {
            LengthUnit::Millimetre => value / 10.0,
            LengthUnit::Centimetre => value,
        };
        Ok(Self { cm })
    }

    pub fn from_mm(mm: f64) -> Result<Self> {
        Self::new(mm, LengthUnit::Millimetre)
    }

    pub fn from_cm(cm: f64) -> Result<Self> {
        Self::new(cm, LengthUnit::Centimetre)
    }

    #[inline]
    pub fn cm(self) -> f64 {
        self.cm
    }

    #[inline]
    pub fn mm(self) -> f64 {
        self.cm * 10.0
    }
}

/// Parses `1mm`, `0.5 cm`, ... A unit suffix is mandatory.
impl FromStr for Distance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (number, unit) = if let Some(n) = s.strip_suffix("mm") {
            (n, LengthUnit::Millimetre)
        } else if let Some(n) = s.strip_suffix("cm") {
            (n, LengthUnit::Centimetre)
        } else {
            return Err(Error::InvalidDistance(format!(
                "`{s}` lacks a unit suffix (expected `mm` or `cm`)"
            )));
        };
        let value: f64 = number
            .trim()
            .parse()
            .map_err(|_| Error::InvalidDistance(format!("`{s}` is not a number with a unit")))?;
        Self::new(value, unit)
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}cm", self.cm)
    }
}

/// A sampling grid `lo, lo + step, ...` whose last sample is the largest
/// `lo + k * step <= hi`. Samples are generated from the index, never by
/// accumulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    lo: f64,
    hi: f64,
    step: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
            return Err(Error::Band("band limits and step must be finite".into()));
        }
        if step <= 0.0 {
            return Err(Error::Band(format!("step must be > 0, got {step}")));
        }
        if lo <= 0.0 {
            return Err(Error::Band(format!("band start must be > 0 nm, got {lo}")));
        }
        if hi < lo {
            return Err(Error::Band(format!("empty band {lo}:{hi}")));
        }
        Ok(Self { lo, hi, step })
    }

    /// The 400–1000 nm, 1 nm grid.
    pub fn visible_nir() -> Self {
        Self {
            lo: DEFAULT_DOMAIN.lo,
            hi: DEFAULT_DOMAIN.hi,
            step: 1.0,
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        // relative slack so that e.g. 400:1000:0.1 keeps its last sample
        let spans = (self.hi - self.lo) / self.step;
        (spans * (1.0 + 1e-12) + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn at(&self, index: usize) -> f64 {
        self.lo + index as f64 * self.step
    }

    pub fn wavelengths(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.len()).map(|k| self.at(k))
    }
}

/// Parses `lo:hi:step` (nm).
impl FromStr for Band {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Band(format!("expected `lo:hi:step`, got `{s}`")));
        }
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Band(format!("`{p}` is not a number in `{s}`")))
        };
        Band::new(num(parts[0])?, num(parts[1])?, num(parts[2])?)
    }
}
