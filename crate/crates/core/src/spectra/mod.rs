//! Constituent absorption spectra.
//!
//! Five absorbers make up a generic tissue: oxygenated and deoxygenated
//! blood, water, fat and melanin. Each is described by a fitted analytical
//! model (see [`models`]); the [`Registry`] binds every constituent to its
//! model and evaluates μ_a(λ) in cm⁻¹.
//!
//! Gaussian-sum and Fourier-series models are only trusted inside their
//! validity domain (400–1000 nm for the built-ins) and refuse to evaluate
//! outside it unless [`Extrapolation::Allow`] is passed. The water Fourier
//! series in particular is periodic with period 2π/w ≈ 943 nm and is
//! meaningless away from its fitted band. The melanin power law is defined
//! for every λ > 0.
//!
//! Published values are clamped at zero; the unclamped value is kept in
//! [`Evaluation::raw`] and the number of clamped samples is reported by
//! [`Spectrum::clamped_count`].

pub mod models;
pub mod record;
pub mod table;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

pub use models::{
    ConstituentModel, Evaluation, FourierSeriesModel, GaussianSumModel, GaussianTerm,
    PowerLawModel,
};
pub use record::{ModelFile, ModelRecord, ModelKind};

use crate::error::{Error, Result};
use crate::units::{Band, Extrapolation, Wavelength};

/// The five absorbing constituents of a generic tissue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constituent {
    DeoxyBlood,
    OxyBlood,
    Water,
    Fat,
    Melanin,
}

impl Constituent {
    pub const ALL: [Constituent; 5] = [
        Constituent::DeoxyBlood,
        Constituent::OxyBlood,
        Constituent::Water,
        Constituent::Fat,
        Constituent::Melanin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Constituent::DeoxyBlood => "deoxy-blood",
            Constituent::OxyBlood => "oxy-blood",
            Constituent::Water => "water",
            Constituent::Fat => "fat",
            Constituent::Melanin => "melanin",
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    pub fn valid_names() -> String {
        Self::ALL.map(Constituent::name).join(", ")
    }
}

impl fmt::Display for Constituent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Constituent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownConstituent {
                name: s.to_string(),
                valid: Self::valid_names(),
            })
    }
}

/// A sampled `(wavelength nm, value)` series.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Spectrum {
    pub samples: Vec<(f64, f64)>,
    /// Number of samples whose raw model value was negative and clamped.
    pub clamped_count: usize,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn wavelengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.0)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.1)
    }

    /// Evaluates `f` on every grid point; `f` returns the published value
    /// and whether clamping was applied. Work may run in parallel; the
    /// output is always in grid order.
    pub fn sample<F>(band: &Band, f: F) -> Result<Self>
    where
        F: Fn(Wavelength) -> Result<(f64, bool)> + Sync,
    {
        let evals: Vec<(f64, (f64, bool))> = (0..band.len())
            .into_par_iter()
            .map(|k| {
                let nm = band.at(k);
                f(Wavelength::new(nm)?).map(|e| (nm, e))
            })
            .collect::<Result<_>>()?;
        let clamped_count = evals.iter().filter(|(_, (_, c))| *c).count();
        Ok(Self {
            samples: evals.into_iter().map(|(nm, (v, _))| (nm, v)).collect(),
            clamped_count,
        })
    }
}

/// Immutable binding of each constituent to its absorption model.
#[derive(Debug, Clone, PartialEq)]
pub struct Registry {
    models: [ConstituentModel; 5],
}

impl Default for Registry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl Registry {
    /// The published fits: Gaussian sums for both bloods and fat, a
    /// 7-harmonic Fourier series for water and a cube law for melanin.
    pub fn builtin() -> Self {
        Self {
            models: [
                table::deoxy_blood(),
                table::oxy_blood(),
                table::water(),
                table::fat(),
                table::melanin(),
            ],
        }
    }

    /// Returns a copy with one constituent's model replaced.
    pub fn with_model(mut self, constituent: Constituent, model: ConstituentModel) -> Self {
        self.models[constituent.index()] = model;
        self
    }

    /// Builds a registry from a model file. Constituents missing from the
    /// file keep their built-in model.
    pub fn from_model_file(file: &ModelFile) -> Result<Self> {
        let mut reg = Self::builtin();
        for rec in &file.constituent {
            let c: Constituent = rec.name.parse()?;
            reg = reg.with_model(c, rec.to_model()?);
        }
        Ok(reg)
    }

    pub fn model(&self, constituent: Constituent) -> &ConstituentModel {
        &self.models[constituent.index()]
    }

    pub fn evaluate(
        &self,
        constituent: Constituent,
        lambda: Wavelength,
        policy: Extrapolation,
    ) -> Result<Evaluation> {
        self.model(constituent).evaluate(lambda, policy)
    }

    /// Published (clamped) μ_a of one constituent, cm⁻¹.
    pub fn mu_a(&self, constituent: Constituent, lambda: Wavelength) -> Result<f64> {
        self.evaluate(constituent, lambda, Extrapolation::Forbid)
            .map(|e| e.value)
    }

    pub fn spectrum(
        &self,
        constituent: Constituent,
        band: &Band,
        policy: Extrapolation,
    ) -> Result<Spectrum> {
        let model = self.model(constituent);
        Spectrum::sample(band, |l| model.evaluate(l, policy).map(|e| (e.value, e.clamped())))
    }
}

/// Evaluates any standalone model over a band.
pub fn model_spectrum(model: &ConstituentModel, band: &Band, policy: Extrapolation) -> Result<Spectrum> {
    Spectrum::sample(band, |l| model.evaluate(l, policy).map(|e| (e.value, e.clamped())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wl(nm: f64) -> Wavelength {
        Wavelength::new(nm).unwrap()
    }

    #[test]
    fn constituent_names_round_trip() {
        for c in Constituent::ALL {
            assert_eq!(c.name().parse::<Constituent>().unwrap(), c);
        }
        let err = "blood".parse::<Constituent>().unwrap_err();
        assert!(err.to_string().contains("oxy-blood"));
    }

    #[test]
    fn registry_binds_model_families() {
        let reg = Registry::builtin();
        let kinds: Vec<_> = Constituent::ALL.iter().map(|&c| reg.model(c).kind()).collect();
        assert_eq!(
            kinds,
            ["gaussian-sum", "gaussian-sum", "fourier-series", "gaussian-sum", "power-law"]
        );
        let terms = |c| match reg.model(c) {
            ConstituentModel::GaussianSum(m) => m.terms().len(),
            _ => 0,
        };
        assert_eq!(terms(Constituent::DeoxyBlood), 4);
        assert_eq!(terms(Constituent::OxyBlood), 5);
        assert_eq!(terms(Constituent::Fat), 5);
        match reg.model(Constituent::Water) {
            ConstituentModel::FourierSeries(m) => assert_eq!(m.order(), 7),
            _ => unreachable!(),
        }
    }

    #[test]
    fn melanin_anchor() {
        let reg = Registry::builtin();
        assert_eq!(reg.mu_a(Constituent::Melanin, wl(550.0)).unwrap(), 519.0);
        // globally defined, no opt-in needed
        assert_eq!(reg.mu_a(Constituent::Melanin, wl(1100.0)).unwrap(), 64.875);
    }

    #[test]
    fn water_outside_domain_errors() {
        let reg = Registry::builtin();
        assert!(matches!(
            reg.mu_a(Constituent::Water, wl(350.0)),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn water_periodicity_under_extrapolation() {
        let reg = Registry::builtin();
        let m = reg.model(Constituent::Water);
        let period = std::f64::consts::TAU / table::WATER_W;
        let a = reg.evaluate(Constituent::Water, wl(550.0), Extrapolation::Forbid).unwrap();
        let b = reg
            .evaluate(Constituent::Water, wl(550.0 + period), Extrapolation::Allow)
            .unwrap();
        assert!((a.raw - b.raw).abs() <= 1e-9 * a.raw.abs());
        assert!(reg
            .evaluate(Constituent::Water, wl(550.0 + period), Extrapolation::Forbid)
            .is_err());
        assert_eq!(m.raw(550.0), a.raw);
    }

    #[test]
    fn melanin_spectrum_single_and_coarse() {
        let reg = Registry::builtin();
        let s = reg
            .spectrum(Constituent::Melanin, &Band::new(550.0, 550.0, 1.0).unwrap(), Extrapolation::Forbid)
            .unwrap();
        assert_eq!(s.samples, vec![(550.0, 519.0)]);
        let s = reg
            .spectrum(Constituent::Melanin, &Band::new(400.0, 1000.0, 200.0).unwrap(), Extrapolation::Forbid)
            .unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.samples.windows(2).all(|w| w[1].1 < w[0].1));
    }

    #[test]
    fn spectrum_matches_pointwise() {
        let reg = Registry::builtin();
        let s = reg
            .spectrum(Constituent::Fat, &Band::visible_nir(), Extrapolation::Forbid)
            .unwrap();
        assert_eq!(s.len(), 601);
        for &(l, v) in &s.samples {
            assert_eq!(v, reg.mu_a(Constituent::Fat, wl(l)).unwrap());
        }
    }

    #[test]
    fn water_is_clamped_across_the_band() {
        // the published water series is negative over the whole default band
        let reg = Registry::builtin();
        let s = reg
            .spectrum(Constituent::Water, &Band::visible_nir(), Extrapolation::Forbid)
            .unwrap();
        assert_eq!(s.clamped_count, 601);
        assert!(s.values().all(|v| v == 0.0));
    }

    #[test]
    fn replaced_model_is_used() {
        let constant = FourierSeriesModel::new(3.0, vec![], 1.0, crate::units::DEFAULT_DOMAIN).unwrap();
        let reg = Registry::builtin().with_model(Constituent::Water, constant.into());
        assert_eq!(reg.mu_a(Constituent::Water, wl(700.0)).unwrap(), 3.0);
    }
}
