//! Nonlinear least-squares fitting of absorption models to measured spectra.
//!
//! Given a [`Dataset`] of `(λ, μ_a)` samples and a [`ModelSpec`] naming the
//! family (Gaussian sum, Fourier series or power law), [`fit`] produces the
//! parameter set minimising the (optionally weighted) sum of squared
//! residuals together with convergence diagnostics. Results export to the
//! same record format as the built-in constituent parameters, so a fitted
//! model can be loaded back as a custom constituent.
//!
//! Fourier fits with a free fundamental first scan candidate fundamentals,
//! solving the (linear) coefficient problem at each, and refine the best one.
//! Optional restarts perturb the starting point with a seeded ChaCha8
//! stream per restart; the best objective wins, ties going to the lowest
//! restart index, so results do not depend on thread scheduling.

pub mod dataset;
pub mod family;
pub mod init;
pub mod lm;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use dataset::{Dataset, Point};
pub use family::Family;
pub use init::{InitStrategy, Initialization};
pub use lm::StopReason;

use crate::error::{Error, Result};
use crate::spectra::{ConstituentModel, ModelRecord};
use crate::units::Domain;

/// Model family to fit, with fixed/free choices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelForm {
    GaussianSum { terms: usize },
    /// `w: Some(_)` holds the fundamental fixed.
    Fourier { order: usize, w: Option<f64> },
    /// `exponent: Some(_)` holds the exponent fixed.
    PowerLaw { lambda_ref: f64, exponent: Option<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub form: ModelForm,
    /// Per-parameter `[lo, hi]`, in full parameter order; empty means defaults.
    pub bounds: Vec<Option<(f64, f64)>>,
    /// Explicit starting point in full parameter order.
    pub init: Option<Vec<f64>>,
    /// Extra jittered starts beyond the first.
    pub restarts: usize,
    pub seed: u64,
}

/// The melanin cube law's exponent, the default when fitting power laws.
pub const DEFAULT_EXPONENT: f64 = -3.0;

impl ModelSpec {
    pub fn new(form: ModelForm) -> Self {
        Self {
            form,
            bounds: Vec::new(),
            init: None,
            restarts: 0,
            seed: 0,
        }
    }

    pub fn gaussian_sum(terms: usize) -> Self {
        Self::new(ModelForm::GaussianSum { terms })
    }

    pub fn fourier(order: usize) -> Self {
        Self::new(ModelForm::Fourier { order, w: None })
    }

    pub fn fourier_fixed_w(order: usize, w: f64) -> Self {
        Self::new(ModelForm::Fourier { order, w: Some(w) })
    }

    /// Power law with the exponent fixed at −3.
    pub fn power_law(lambda_ref: f64) -> Self {
        Self::new(ModelForm::PowerLaw {
            lambda_ref,
            exponent: Some(DEFAULT_EXPONENT),
        })
    }

    pub fn power_law_free_exponent(lambda_ref: f64) -> Self {
        Self::new(ModelForm::PowerLaw {
            lambda_ref,
            exponent: None,
        })
    }

    pub fn with_bounds(mut self, bounds: Vec<Option<(f64, f64)>>) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn with_init(mut self, init: Vec<f64>) -> Self {
        self.init = Some(init);
        self
    }

    pub fn with_restarts(mut self, restarts: usize, seed: u64) -> Self {
        self.restarts = restarts;
        self.seed = seed;
        self
    }

    pub fn family(&self) -> Family {
        match self.form {
            ModelForm::GaussianSum { terms } => Family::GaussianSum { terms },
            ModelForm::Fourier { order, .. } => Family::Fourier { order },
            ModelForm::PowerLaw { lambda_ref, .. } => Family::PowerLaw { lambda_ref },
        }
    }

    /// Which parameters the optimiser may move.
    pub fn free_mask(&self) -> Vec<bool> {
        let n = self.family().param_count();
        let mut free = vec![true; n];
        match self.form {
            // order 0 has no harmonics for w to act on
            ModelForm::Fourier { order, w } if w.is_some() || order == 0 => free[n - 1] = false,
            ModelForm::PowerLaw { exponent: Some(_), .. } => free[1] = false,
            _ => {}
        }
        free
    }

    pub fn free_count(&self) -> usize {
        self.free_mask().iter().filter(|&&f| f).count()
    }

    fn effective_bounds(&self) -> Vec<Option<(f64, f64)>> {
        if !self.bounds.is_empty() {
            return self.bounds.clone();
        }
        let mut b = vec![None; self.family().param_count()];
        if let ModelForm::PowerLaw { .. } = self.form {
            b[0] = Some((0.0, f64::INFINITY));
        }
        b
    }

    pub fn validate(&self) -> Result<()> {
        match self.form {
            ModelForm::GaussianSum { terms: 0 } => {
                return Err(Error::Spec("a gaussian sum needs at least one term".into()))
            }
            ModelForm::Fourier { w: Some(w), .. } if !(w.is_finite() && w > 0.0) => {
                return Err(Error::Spec(format!("fixed fundamental must be > 0, got {w}")))
            }
            ModelForm::PowerLaw { lambda_ref, .. } if !(lambda_ref.is_finite() && lambda_ref > 0.0) => {
                return Err(Error::Spec(format!("lambda_ref must be > 0, got {lambda_ref}")))
            }
            ModelForm::PowerLaw { exponent: Some(e), .. } if !e.is_finite() => {
                return Err(Error::Spec("fixed exponent must be finite".into()))
            }
            _ => {}
        }
        let n = self.family().param_count();
        if !self.bounds.is_empty() && self.bounds.len() != n {
            return Err(Error::Spec(format!(
                "expected {n} bounds entries, got {}",
                self.bounds.len()
            )));
        }
        for (name, b) in self.family().param_names().iter().zip(&self.bounds) {
            if let Some((lo, hi)) = *b {
                if lo.is_nan() || hi.is_nan() || lo > hi {
                    return Err(Error::Spec(format!("bounds for `{name}` are not ordered: [{lo}, {hi}]")));
                }
            }
        }
        if let Some(init) = &self.init {
            if init.len() != n {
                return Err(Error::Spec(format!("expected {n} initial values, got {}", init.len())));
            }
            if init.iter().any(|v| !v.is_finite()) {
                return Err(Error::Spec("initial values must be finite".into()));
            }
        }
        Ok(())
    }
}

/// Goodness-of-fit summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub rmse: f64,
    pub r_squared: f64,
    pub max_abs_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub family: Family,
    pub model: ConstituentModel,
    /// Full parameter vector, canonical order.
    pub params: Vec<f64>,
    pub rmse: f64,
    pub r_squared: f64,
    pub max_abs_residual: f64,
    /// `observed − fitted`, in dataset order.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub stop: StopReason,
    /// Objective at the start and after every accepted step of the winning run.
    pub objective_trace: Vec<f64>,
    pub init: InitStrategy,
    /// Index of the winning start (0 is the unperturbed one).
    pub start_index: usize,
    pub starts: usize,
    pub seed: u64,
    pub provenance: String,
}

impl FitResult {
    pub fn diagnostics(&self) -> Diagnostics {
        Diagnostics {
            rmse: self.rmse,
            r_squared: self.r_squared,
            max_abs_residual: self.max_abs_residual,
        }
    }

    /// Structured text export: one `[[constituent]]` record followed by a
    /// `[fit]` table. Loadable with [`crate::spectra::ModelFile::from_toml`].
    pub fn to_document(&self, name: &str) -> Result<String> {
        #[derive(Serialize)]
        struct Summary<'a> {
            kind: &'a str,
            parameters: Vec<String>,
            points: usize,
            rmse: f64,
            r_squared: f64,
            max_abs_residual: f64,
            iterations: usize,
            converged: bool,
            stop_reason: &'a str,
            init: &'a str,
            starts: usize,
            start_index: usize,
            seed: u64,
        }
        #[derive(Serialize)]
        struct Document<'a> {
            constituent: Vec<ModelRecord>,
            fit: Summary<'a>,
        }
        let mut record = ModelRecord::from_model(name, &self.model);
        if !self.provenance.is_empty() {
            record.provenance = Some(self.provenance.clone());
        }
        let doc = Document {
            constituent: vec![record],
            fit: Summary {
                kind: self.model.kind(),
                parameters: self.family.param_names(),
                points: self.residuals.len(),
                rmse: self.rmse,
                r_squared: self.r_squared,
                max_abs_residual: self.max_abs_residual,
                iterations: self.iterations,
                converged: self.converged,
                stop_reason: self.stop.as_str(),
                init: self.init.as_str(),
                starts: self.starts,
                start_index: self.start_index,
                seed: self.seed,
            },
        };
        toml::to_string(&doc).map_err(|e| Error::Record(e.to_string()))
    }
}

/// Starting point for `spec` on `dataset`.
pub fn initialize(dataset: &Dataset, spec: &ModelSpec) -> Result<Initialization> {
    spec.validate()?;
    if dataset.is_empty() {
        return Err(Error::Dataset("dataset is empty".into()));
    }
    if let Some(init) = &spec.init {
        return Ok(Initialization {
            params: init.clone(),
            strategy: InitStrategy::Explicit,
        });
    }
    Ok(match spec.form {
        ModelForm::GaussianSum { terms } => init::gaussian_sum(dataset, terms),
        ModelForm::Fourier { order, w } => init::fourier(dataset, order, w),
        ModelForm::PowerLaw { lambda_ref, exponent } => {
            init::power_law(dataset, lambda_ref, exponent.unwrap_or(DEFAULT_EXPONENT))
        }
    })
}

/// rmse, r² and max |residual| of `model` on `dataset` (unweighted, raw
/// model values). r² is 1 when both sums of squares vanish.
pub fn diagnostics(model: &ConstituentModel, dataset: &Dataset) -> Result<Diagnostics> {
    if dataset.is_empty() {
        return Err(Error::Dataset("cannot evaluate a fit on an empty dataset".into()));
    }
    let residuals: Vec<f64> = dataset.points().iter().map(|p| p.mu_a - model.raw(p.lambda)).collect();
    if residuals.iter().any(|r| !r.is_finite()) {
        return Err(Error::Dataset("model is not finite on the dataset wavelengths".into()));
    }
    Ok(summarize(dataset, &residuals))
}

pub fn evaluate_fit(result: &FitResult, dataset: &Dataset) -> Result<Diagnostics> {
    diagnostics(&result.model, dataset)
}

fn summarize(dataset: &Dataset, residuals: &[f64]) -> Diagnostics {
    let n = residuals.len() as f64;
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let mean = dataset.values().sum::<f64>() / n;
    let ss_tot: f64 = dataset.values().map(|y| (y - mean).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    Diagnostics {
        rmse: (ss_res / n).sqrt(),
        r_squared,
        max_abs_residual: residuals.iter().fold(0.0, |m: f64, r| m.max(r.abs())),
    }
}

struct Run {
    solution: lm::Solution,
    index: usize,
}

/// Fits `spec` to `dataset`.
pub fn fit(dataset: &Dataset, spec: &ModelSpec) -> Result<FitResult> {
    spec.validate()?;
    let family = spec.family();
    let needed = 2 * spec.free_count();
    if dataset.len() < needed {
        return Err(Error::Dataset(format!(
            "{} points given, at least {needed} needed for {} free parameters",
            dataset.len(),
            spec.free_count()
        )));
    }
    let initial = initialize(dataset, spec)?;
    let free = spec.free_mask();
    let bounds = spec.effective_bounds();

    let lambdas: Vec<f64> = dataset.lambdas().collect();
    let values: Vec<f64> = dataset.values().collect();
    let sqrt_weights: Vec<f64> = dataset.points().iter().map(|p| p.weight.sqrt()).collect();
    let problem = lm::Problem {
        family,
        lambdas: &lambdas,
        values: &values,
        sqrt_weights: &sqrt_weights,
        free: &free,
        bounds: &bounds,
    };

    let explicit = initial.strategy == InitStrategy::Explicit;
    let prepare = |start: Vec<f64>, scan: bool| -> Result<Vec<f64>> {
        match spec.form {
            ModelForm::Fourier { order, w } if !explicit && order > 0 => {
                let w0 = start[2 * order + 1];
                if scan && w.is_none() {
                    init::fourier_scan(dataset, order, w0)
                } else {
                    init::fourier_linear(dataset, order, w0).map(|(p, _)| p)
                }
            }
            _ => Ok(start),
        }
    };

    let runs: Vec<Result<Run>> = (0..=spec.restarts)
        .into_par_iter()
        .map(|index| {
            let start = if index == 0 {
                prepare(initial.params.clone(), true)?
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                rng.set_stream(index as u64);
                let base = prepare(initial.params.clone(), true)?;
                prepare(init::jitter(family, &base, &mut rng), false)?
            };
            lm::solve(&problem, &start).map(|solution| Run { solution, index })
        })
        .collect();

    let mut best: Option<Run> = None;
    let mut first_error = None;
    for run in runs {
        match run {
            Ok(run) => {
                if best.as_ref().is_none_or(|b| run.solution.cost < b.solution.cost) {
                    best = Some(run);
                }
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    let Some(best) = best else {
        return Err(first_error.expect("at least one start ran"));
    };

    let mut params = best.solution.params.clone();
    let mut canonical = params.clone();
    family.canonicalize(&mut canonical);
    let in_bounds = canonical.iter().zip(&bounds).all(|(v, b)| match b {
        Some((lo, hi)) => (*lo..=*hi).contains(v),
        None => true,
    });
    if in_bounds {
        params = canonical;
    }

    let (lo, hi) = dataset.span().expect("dataset is non-empty");
    let model = family.to_model(&params, Domain::new(lo, hi)?)?;
    let residuals: Vec<f64> = dataset
        .points()
        .iter()
        .map(|p| p.mu_a - family.value(&params, p.lambda))
        .collect();
    let diag = summarize(dataset, &residuals);

    Ok(FitResult {
        family,
        model,
        params,
        rmse: diag.rmse,
        r_squared: diag.r_squared,
        max_abs_residual: diag.max_abs_residual,
        residuals,
        iterations: best.solution.iterations,
        converged: best.solution.stop.converged(),
        stop: best.solution.stop,
        objective_trace: best.solution.trace,
        init: initial.strategy,
        start_index: best.index,
        starts: spec.restarts + 1,
        seed: spec.seed,
        provenance: dataset.provenance.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{GaussianSumModel, GaussianTerm, ModelFile, Registry};
    use crate::units::DEFAULT_DOMAIN;

    fn gaussian_data() -> Dataset {
        Dataset::new((0..=40).map(|k| {
            let l = 400.0 + 5.0 * k as f64;
            (l, (-((l - 500.0) / 50.0f64).powi(2)).exp())
        }))
        .unwrap()
    }

    #[test]
    fn single_gaussian_recovery() {
        let r = fit(&gaussian_data(), &ModelSpec::gaussian_sum(1)).unwrap();
        let expected = [1.0, 500.0, 50.0];
        for (got, want) in r.params.iter().zip(expected) {
            assert!(((got - want) / want).abs() < 1e-6, "{:?}", r.params);
        }
        assert!(r.rmse < 1e-9);
        assert!(r.converged, "{:?}", r.stop);
        assert!(r.objective_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn constant_data_order_zero_fourier() {
        let d = Dataset::new((0..10).map(|k| (400.0 + 10.0 * k as f64, 7.0))).unwrap();
        let r = fit(&d, &ModelSpec::fourier(0)).unwrap();
        assert_eq!(r.params[0], 7.0);
        assert_eq!(r.rmse, 0.0);
        assert_eq!(r.r_squared, 1.0);
    }

    #[test]
    fn melanin_reference_recovered() {
        let reg = Registry::builtin();
        let m = reg.model(crate::spectra::Constituent::Melanin);
        let d = Dataset::new((0..=60).map(|k| {
            let l = 400.0 + 10.0 * k as f64;
            (l, m.raw(l))
        }))
        .unwrap();
        let r = fit(&d, &ModelSpec::power_law(550.0)).unwrap();
        assert!((r.params[0] - 519.0).abs() / 519.0 < 1e-6);
        assert_eq!(r.params[1], -3.0);
    }

    #[test]
    fn too_few_points() {
        let d = Dataset::new([(400.0, 1.0), (500.0, 2.0), (600.0, 1.0)]).unwrap();
        assert!(matches!(fit(&d, &ModelSpec::gaussian_sum(1)), Err(Error::Dataset(_))));
    }

    #[test]
    fn invalid_specs() {
        let d = gaussian_data();
        assert!(fit(&d, &ModelSpec::gaussian_sum(0)).is_err());
        assert!(fit(&d, &ModelSpec::gaussian_sum(1).with_bounds(vec![None])).is_err());
        assert!(fit(
            &d,
            &ModelSpec::gaussian_sum(1).with_bounds(vec![Some((2.0, 1.0)), None, None])
        )
        .is_err());
        assert!(fit(&d, &ModelSpec::gaussian_sum(1).with_init(vec![1.0])).is_err());
        assert!(fit(&d, &ModelSpec::fourier_fixed_w(2, 0.0)).is_err());
    }

    #[test]
    fn zero_influence_parameter_is_a_conditioning_error() {
        // amplitude 0 leaves centre and width without any effect
        let spec = ModelSpec::gaussian_sum(1).with_init(vec![0.0, 500.0, 50.0]);
        let bounded = spec.with_bounds(vec![Some((0.0, 0.0)), None, None]);
        assert!(matches!(fit(&gaussian_data(), &bounded), Err(Error::Conditioning(_))));
    }

    #[test]
    fn bounds_are_respected() {
        let spec = ModelSpec::gaussian_sum(1).with_bounds(vec![
            Some((0.0, 0.8)),
            Some((450.0, 550.0)),
            Some((10.0, 100.0)),
        ]);
        let r = fit(&gaussian_data(), &spec).unwrap();
        assert!(r.params[0] <= 0.8 && r.params[0] >= 0.0);
        assert!((450.0..=550.0).contains(&r.params[1]));
        assert!((10.0..=100.0).contains(&r.params[2]));
    }

    #[test]
    fn perfect_and_degenerate_diagnostics() {
        let d = gaussian_data();
        let m: ConstituentModel =
            GaussianSumModel::new(vec![GaussianTerm::new(1.0, 500.0, 50.0)], DEFAULT_DOMAIN)
                .unwrap()
                .into();
        let diag = diagnostics(&m, &d).unwrap();
        assert_eq!(diag.rmse, 0.0);
        assert_eq!(diag.r_squared, 1.0);

        let flat = Dataset::new((0..5).map(|k| (500.0 + k as f64, 3.0))).unwrap();
        let c = crate::spectra::FourierSeriesModel::new(3.0, vec![], 1.0, DEFAULT_DOMAIN).unwrap();
        let diag = diagnostics(&c.into(), &flat).unwrap();
        assert_eq!((diag.rmse, diag.r_squared), (0.0, 1.0));
        assert!(diagnostics(&m, &Dataset::default()).is_err());
    }

    #[test]
    fn offset_against_zero_model() {
        // residual_i = g(λ_i) + 1, so rmse = sqrt(mean((g+1)^2))
        let d = Dataset::new((0..=40).map(|k| {
            let l = 400.0 + 5.0 * k as f64;
            (l, (-((l - 500.0) / 50.0f64).powi(2)).exp() + 1.0)
        }))
        .unwrap();
        let zero = crate::spectra::FourierSeriesModel::new(0.0, vec![], 1.0, DEFAULT_DOMAIN).unwrap();
        let diag = diagnostics(&zero.into(), &d).unwrap();
        let mut sum = 0.0;
        let mut max: f64 = 0.0;
        for k in 0..=40 {
            let l = 400.0 + 5.0 * k as f64;
            let r = (-((l - 500.0) / 50.0f64).powi(2)).exp() + 1.0;
            sum += r * r;
            max = max.max(r);
        }
        assert!((diag.rmse - (sum / 41.0).sqrt()).abs() < 1e-14);
        assert_eq!(diag.max_abs_residual, max);
        assert!(diag.r_squared < 0.0);
    }

    #[test]
    fn export_loads_back_as_constituent_model() {
        let r = fit(&gaussian_data().with_provenance("synthetic"), &ModelSpec::gaussian_sum(1)).unwrap();
        let text = r.to_document("fat").unwrap();
        assert!(text.contains("[fit]"));
        let file = ModelFile::from_toml(&text).unwrap();
        let rec = file.get("fat").unwrap();
        assert_eq!(rec.provenance.as_deref(), Some("synthetic"));
        assert_eq!(rec.to_model().unwrap(), r.model);
        let reg = Registry::from_model_file(&file).unwrap();
        assert_eq!(reg.model(crate::spectra::Constituent::Fat), &r.model);
    }

    #[test]
    fn restarts_are_deterministic() {
        let spec = ModelSpec::gaussian_sum(1).with_restarts(4, 42);
        let a = fit(&gaussian_data(), &spec).unwrap();
        let b = fit(&gaussian_data(), &spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.starts, 5);
    }
}
