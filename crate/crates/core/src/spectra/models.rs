//! Analytical absorption model families: Gaussian sums, truncated Fourier
//! series and power laws.

use crate::error::{Error, Result};
use crate::units::{Domain, Extrapolation, Wavelength};

/// Result of evaluating a model at one wavelength.
///
/// `raw` is the fitted functional form as written; `value` is the published
/// coefficient with negative excursions clamped to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub raw: f64,
    pub value: f64,
}

impl Evaluation {
    pub(crate) fn from_raw(raw: f64) -> Self {
        Self {
            raw,
            value: raw.max(0.0),
        }
    }

    /// True when the raw value was negative and has been clamped.
    pub fn clamped(&self) -> bool {
        self.raw < 0.0
    }
}

/// One `a * exp(-((λ - b) / c)^2)` term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTerm {
    /// amplitude, cm⁻¹
    pub a: f64,
    /// centre, nm
    pub b: f64,
    /// width, nm
    pub c: f64,
}

impl GaussianTerm {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    #[inline]
    pub fn eval(&self, lambda: f64) -> f64 {
        let z = (lambda - self.b) / self.c;
        self.a * (-z * z).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSumModel {
    terms: Vec<GaussianTerm>,
    domain: Domain,
}

impl GaussianSumModel {
    pub fn new(terms: Vec<GaussianTerm>, domain: Domain) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidModel("gaussian sum needs at least one term".into()));
        }
        for (i, t) in terms.iter().enumerate() {
            if !(t.a.is_finite() && t.b.is_finite() && t.c.is_finite()) {
                return Err(Error::InvalidModel(format!("term {} has non-finite parameters", i + 1)));
            }
            if t.c == 0.0 {
                return Err(Error::InvalidModel(format!("term {} has zero width", i + 1)));
            }
        }
        Ok(Self { terms, domain })
    }

    pub fn terms(&self) -> &[GaussianTerm] {
        &self.terms
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn raw(&self, lambda: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(lambda)).sum()
    }

    pub fn evaluate(&self, lambda: Wavelength, policy: Extrapolation) -> Result<Evaluation> {
        self.domain.check(lambda, policy)?;
        finite("gaussian-sum", lambda, self.raw(lambda.nm()))
    }
}

/// `a0 + Σ_k (a_k cos(k w λ) + b_k sin(k w λ))`, k = 1..=order.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeriesModel {
    a0: f64,
    harmonics: Vec<(f64, f64)>,
    w: f64,
    domain: Domain,
}

impl FourierSeriesModel {
    pub fn new(a0: f64, harmonics: Vec<(f64, f64)>, w: f64, domain: Domain) -> Result<Self> {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::InvalidModel(format!("fundamental w must be > 0, got {w}")));
        }
        if !a0.is_finite() || harmonics.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidModel("fourier coefficients must be finite".into()));
        }
        Ok(Self {
            a0,
            harmonics,
            w,
            domain,
        })
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn harmonics(&self) -> &[(f64, f64)] {
        &self.harmonics
    }

    pub fn order(&self) -> usize {
        self.harmonics.len()
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.w
    }

    pub fn raw(&self, lambda: f64) -> f64 {
        self.harmonics
            .iter()
            .enumerate()
            .fold(self.a0, |acc, (i, &(a, b))| {
                let phase = (i + 1) as f64 * self.w * lambda;
                acc + a * phase.cos() + b * phase.sin()
            })
    }

    pub fn evaluate(&self, lambda: Wavelength, policy: Extrapolation) -> Result<Evaluation> {
        self.domain.check(lambda, policy)?;
        finite("fourier-series", lambda, self.raw(lambda.nm()))
    }
}

/// `mu_ref * (λ / lambda_ref)^exponent`; defined for every λ > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawModel {
    mu_ref: f64,
    lambda_ref: f64,
    exponent: f64,
}

impl PowerLawModel {
    pub fn new(mu_ref: f64, lambda_ref: f64, exponent: f64) -> Result<Self> {
        if !(lambda_ref.is_finite() && lambda_ref > 0.0) {
            return Err(Error::InvalidModel(format!("lambda_ref must be > 0, got {lambda_ref}")));
        }
        if !(mu_ref.is_finite() && mu_ref >= 0.0) {
            return Err(Error::InvalidModel(format!("mu_ref must be >= 0, got {mu_ref}")));
        }
        if !exponent.is_finite() {
            return Err(Error::InvalidModel("exponent must be finite".into()));
        }
        Ok(Self {
            mu_ref,
            lambda_ref,
            exponent,
        })
    }

    pub fn mu_ref(&self) -> f64 {
        self.mu_ref
    }

    pub fn lambda_ref(&self) -> f64 {
        self.lambda_ref
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn raw(&self, lambda: f64) -> f64 {
        let ratio = lambda / self.lambda_ref;
        // integral exponents go through powi so that e.g. (1/2)^-3 is exact
        if self.exponent.fract() == 0.0 && self.exponent.abs() <= i32::MAX as f64 {
            self.mu_ref * ratio.powi(self.exponent as i32)
        } else {
            self.mu_ref * ratio.powf(self.exponent)
        }
    }

    pub fn evaluate(&self, lambda: Wavelength) -> Result<Evaluation> {
        finite("power-law", lambda, self.raw(lambda.nm()))
    }
}

fn finite(model: &str, lambda: Wavelength, raw: f64) -> Result<Evaluation> {
    if raw.is_finite() {
        Ok(Evaluation::from_raw(raw))
    } else {
        Err(Error::NonFinite {
            model: model.to_string(),
            lambda: lambda.nm(),
        })
    }
}

/// Any of the three model families.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstituentModel {
    GaussianSum(GaussianSumModel),
    FourierSeries(FourierSeriesModel),
    PowerLaw(PowerLawModel),
}

impl ConstituentModel {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::GaussianSum(_) => "gaussian-sum",
            Self::FourierSeries(_) => "fourier-series",
            Self::PowerLaw(_) => "power-law",
        }
    }

    /// The validity domain; `None` for globally defined forms.
    pub fn domain(&self) -> Option<Domain> {
        match self {
            Self::GaussianSum(m) => Some(m.domain()),
            Self::FourierSeries(m) => Some(m.domain()),
            Self::PowerLaw(_) => None,
        }
    }

    /// Evaluates the functional form without domain checks or clamping.
    pub fn raw(&self, lambda: f64) -> f64 {
        match self {
            Self::GaussianSum(m) => m.raw(lambda),
            Self::FourierSeries(m) => m.raw(lambda),
            Self::PowerLaw(m) => m.raw(lambda),
        }
    }

    pub fn evaluate(&self, lambda: Wavelength, policy: Extrapolation) -> Result<Evaluation> {
        match self {
            Self::GaussianSum(m) => m.evaluate(lambda, policy),
            Self::FourierSeries(m) => m.evaluate(lambda, policy),
            Self::PowerLaw(m) => m.evaluate(lambda),
        }
    }
}

impl From<GaussianSumModel> for ConstituentModel {
    fn from(m: GaussianSumModel) -> Self {
        Self::GaussianSum(m)
    }
}

impl From<FourierSeriesModel> for ConstituentModel {
    fn from(m: FourierSeriesModel) -> Self {
        Self::FourierSeries(m)
    }
}

impl From<PowerLawModel> for ConstituentModel {
    fn from(m: PowerLawModel) -> Self {
        Self::PowerLaw(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::DEFAULT_DOMAIN;

    fn wl(nm: f64) -> Wavelength {
        Wavelength::new(nm).unwrap()
    }

    fn single(a: f64, b: f64, c: f64) -> GaussianSumModel {
        GaussianSumModel::new(vec![GaussianTerm::new(a, b, c)], DEFAULT_DOMAIN).unwrap()
    }

    #[test]
    fn gaussian_peak_and_unit_offset() {
        let m = single(5.0, 500.0, 50.0);
        assert_eq!(m.evaluate(wl(500.0), Extrapolation::Forbid).unwrap().value, 5.0);
        let v = m.evaluate(wl(550.0), Extrapolation::Forbid).unwrap().value;
        assert!((v - 5.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert!((v - 1.83940).abs() < 1e-5);
    }

    #[test]
    fn gaussian_rejects_zero_width_and_empty() {
        assert!(GaussianSumModel::new(vec![GaussianTerm::new(1.0, 500.0, 0.0)], DEFAULT_DOMAIN).is_err());
        assert!(GaussianSumModel::new(vec![], DEFAULT_DOMAIN).is_err());
    }

    #[test]
    fn gaussian_domain_is_enforced() {
        let m = single(5.0, 500.0, 50.0);
        assert!(matches!(
            m.evaluate(wl(350.0), Extrapolation::Forbid),
            Err(Error::Domain { .. })
        ));
        assert!(m.evaluate(wl(350.0), Extrapolation::Allow).is_ok());
    }

    #[test]
    fn gaussian_non_finite_is_an_error() {
        let m = GaussianSumModel::new(
            vec![GaussianTerm::new(f64::MAX, 500.0, 1.0), GaussianTerm::new(f64::MAX, 500.0, 1.0)],
            DEFAULT_DOMAIN,
        )
        .unwrap();
        assert!(matches!(
            m.evaluate(wl(500.0), Extrapolation::Forbid),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn constant_fourier_series() {
        let m = FourierSeriesModel::new(7.0, vec![(0.0, 0.0); 7], 0.006663, DEFAULT_DOMAIN).unwrap();
        for l in [400.0, 555.5, 1000.0] {
            assert_eq!(m.evaluate(wl(l), Extrapolation::Forbid).unwrap().value, 7.0);
        }
    }

    #[test]
    fn fourier_rejects_bad_fundamental() {
        assert!(FourierSeriesModel::new(0.0, vec![], 0.0, DEFAULT_DOMAIN).is_err());
        assert!(FourierSeriesModel::new(0.0, vec![], -1.0, DEFAULT_DOMAIN).is_err());
    }

    #[test]
    fn negative_raw_is_clamped() {
        let m = FourierSeriesModel::new(-2.0, vec![], 1.0, DEFAULT_DOMAIN).unwrap();
        let e = m.evaluate(wl(500.0), Extrapolation::Forbid).unwrap();
        assert_eq!(e.raw, -2.0);
        assert_eq!(e.value, 0.0);
        assert!(e.clamped());
    }

    #[test]
    fn power_law_identity_and_cube() {
        let m = PowerLawModel::new(1.0, 1.0, -3.0).unwrap();
        assert_eq!(m.evaluate(wl(1.0)).unwrap().value, 1.0);
        let mel = PowerLawModel::new(519.0, 550.0, -3.0).unwrap();
        assert_eq!(mel.evaluate(wl(1100.0)).unwrap().value, 64.875);
        assert!(PowerLawModel::new(1.0, 0.0, -3.0).is_err());
        assert!(PowerLawModel::new(-1.0, 550.0, -3.0).is_err());
    }

    #[test]
    fn power_law_non_integer_exponent() {
        let m = PowerLawModel::new(2.0, 100.0, -0.5).unwrap();
        assert!((m.raw(400.0) - 1.0).abs() < 1e-15);
    }
}
