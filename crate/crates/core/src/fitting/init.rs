//! Starting points for the nonlinear fits.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::dataset::Dataset;
use super::family::Family;
use crate::error::{Error, Result};

/// Width of the moving average used before peak picking.
pub const SMOOTHING_WINDOW: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitStrategy {
    /// Caller-supplied parameter vector.
    Explicit,
    /// Gaussian centres at the largest local maxima of the smoothed data.
    PeakPicking,
    /// Too few local maxima: Gaussian centres spread uniformly over the band.
    UniformFallback,
    /// Fourier: constant term at the data mean, harmonics zero.
    Mean,
    /// Power law: reference value read off the sample nearest λ_ref.
    NearestReference,
}

impl InitStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            InitStrategy::Explicit => "explicit",
            InitStrategy::PeakPicking => "peak-picking",
            InitStrategy::UniformFallback => "uniform-fallback",
            InitStrategy::Mean => "mean",
            InitStrategy::NearestReference => "nearest-reference",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Initialization {
    pub params: Vec<f64>,
    pub strategy: InitStrategy,
}

/// Centred moving average, truncated at the ends.
pub fn smooth(values: &[f64]) -> Vec<f64> {
    let half = SMOOTHING_WINDOW / 2;
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(values.len() - 1);
            values[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// Interior local maxima of `values`, strongest first.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    let mut peaks: Vec<usize> = (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1])
        .collect();
    peaks.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    peaks
}

pub(crate) fn gaussian_sum(dataset: &Dataset, terms: usize) -> Initialization {
    let lambdas: Vec<f64> = dataset.lambdas().collect();
    let values: Vec<f64> = dataset.values().collect();
    let (lo, hi) = dataset.span().expect("dataset is non-empty");
    let smoothed = smooth(&values);
    let peaks = local_maxima(&smoothed);

    if peaks.len() >= terms {
        let mut chosen: Vec<usize> = peaks[..terms].to_vec();
        chosen.sort_unstable();
        let centres: Vec<f64> = chosen.iter().map(|&i| lambdas[i]).collect();
        let mut params = Vec::with_capacity(3 * terms);
        for (k, &i) in chosen.iter().enumerate() {
            let b = lambdas[i];
            let mut gap = (b - lo).min(hi - b);
            for (m, &other) in centres.iter().enumerate() {
                if m != k {
                    gap = gap.min((b - other).abs());
                }
            }
            let width = match e_folding_width(&lambdas, &smoothed, i) {
                Some(w) => w.min(0.5 * gap),
                None => 0.5 * gap,
            };
            params.extend([values[i], b, width]);
        }
        return Initialization {
            params,
            strategy: InitStrategy::PeakPicking,
        };
    }

    let span = hi - lo;
    let mut params = Vec::with_capacity(3 * terms);
    for k in 0..terms {
        let b = lo + (k as f64 + 0.5) * span / terms as f64;
        let nearest = nearest_index(&lambdas, b);
        params.extend([values[nearest], b, span / (2.0 * terms as f64)]);
    }
    Initialization {
        params,
        strategy: InitStrategy::UniformFallback,
    }
}

pub(crate) fn fourier(dataset: &Dataset, order: usize, fixed_w: Option<f64>) -> Initialization {
    let (lo, hi) = dataset.span().expect("dataset is non-empty");
    let mean = dataset.values().sum::<f64>() / dataset.len() as f64;
    let mut params = vec![0.0; 2 * order + 2];
    params[0] = mean;
    params[2 * order + 1] = fixed_w.unwrap_or(TAU / (hi - lo));
    Initialization {
        params,
        strategy: InitStrategy::Mean,
    }
}

pub(crate) fn power_law(dataset: &Dataset, lambda_ref: f64, exponent: f64) -> Initialization {
    let lambdas: Vec<f64> = dataset.lambdas().collect();
    let i = nearest_index(&lambdas, lambda_ref);
    Initialization {
        params: vec![dataset.points()[i].mu_a.max(0.0), exponent],
        strategy: InitStrategy::NearestReference,
    }
}

/// Mean distance from the peak at `i` to where the data first falls below
/// `peak / e` on either side, which is the width `c` of a lone Gaussian.
fn e_folding_width(lambdas: &[f64], values: &[f64], i: usize) -> Option<f64> {
    let level = values[i] / std::f64::consts::E;
    if values[i].is_nan() || values[i] <= 0.0 {
        return None;
    }
    let crossing = |j: usize, k: usize| {
        // linear interpolation between the last sample above and the first below
        let t = (values[j] - level) / (values[j] - values[k]);
        lambdas[j] + t * (lambdas[k] - lambdas[j])
    };
    let right = (i + 1..values.len())
        .find(|&k| values[k] < level)
        .map(|k| crossing(k - 1, k) - lambdas[i]);
    let left = (0..i)
        .rev()
        .find(|&k| values[k] < level)
        .map(|k| lambdas[i] - crossing(k + 1, k));
    match (left, right) {
        (Some(l), Some(r)) => Some(0.5 * (l + r)),
        (Some(w), None) | (None, Some(w)) => Some(w),
        (None, None) => None,
    }
}

fn nearest_index(sorted: &[f64], x: f64) -> usize {
    let mut best = 0;
    for (i, &v) in sorted.iter().enumerate() {
        if (v - x).abs() < (sorted[best] - x).abs() {
            best = i;
        }
    }
    best
}

/// Weighted linear least squares for the Fourier coefficients at a fixed
/// fundamental `w`. Returns the full parameter vector and its cost.
pub(crate) fn fourier_linear(dataset: &Dataset, order: usize, w: f64) -> Result<(Vec<f64>, f64)> {
    let n = dataset.len();
    let cols = 2 * order + 1;
    let mut design = DMatrix::zeros(n, cols);
    let mut rhs = DVector::zeros(n);
    for (i, p) in dataset.points().iter().enumerate() {
        let sw = p.weight.sqrt();
        design[(i, 0)] = sw;
        for k in 1..=order {
            let (s, c) = (k as f64 * w * p.lambda).sin_cos();
            design[(i, 2 * k - 1)] = sw * c;
            design[(i, 2 * k)] = sw * s;
        }
        rhs[i] = sw * p.mu_a;
    }
    let svd = design.clone().svd(true, true);
    let tol = f64::EPSILON * n.max(cols) as f64 * svd.singular_values.amax();
    let coef = svd
        .solve(&rhs, tol)
        .map_err(|e| Error::Conditioning(format!("fourier basis at w = {w}: {e}")))?;
    let cost = (&design * &coef - &rhs).norm_squared();
    let mut params: Vec<f64> = coef.iter().copied().collect();
    params.push(w);
    Ok((params, cost))
}

/// Residual cost of the linear Fourier solve at `w` via the normal
/// equations. Cheap screening only; `None` if the basis is degenerate.
fn fourier_screen(dataset: &Dataset, order: usize, w: f64) -> Option<f64> {
    let cols = 2 * order + 1;
    let mut normal = DMatrix::<f64>::zeros(cols, cols);
    let mut rhs = DVector::<f64>::zeros(cols);
    let mut row = vec![0.0; cols];
    let fill = |row: &mut [f64], lambda: f64| {
        row[0] = 1.0;
        for k in 1..=order {
            let (s, c) = (k as f64 * w * lambda).sin_cos();
            row[2 * k - 1] = c;
            row[2 * k] = s;
        }
    };
    for p in dataset.points() {
        fill(&mut row, p.lambda);
        for i in 0..cols {
            rhs[i] += p.weight * row[i] * p.mu_a;
            for j in 0..=i {
                normal[(i, j)] += p.weight * row[i] * row[j];
            }
        }
    }
    for i in 0..cols {
        for j in 0..i {
            normal[(j, i)] = normal[(i, j)];
        }
    }
    let coef = normal.cholesky()?.solve(&rhs);
    let mut cost = 0.0;
    for p in dataset.points() {
        fill(&mut row, p.lambda);
        let fitted: f64 = row.iter().zip(coef.iter()).map(|(a, b)| a * b).sum();
        cost += p.weight * (fitted - p.mu_a).powi(2);
    }
    cost.is_finite().then_some(cost)
}

/// Scans fundamentals between 0.2 and 2 times `w0` (log-spaced) and returns
/// the linear solution at the candidate with the lowest cost.
pub(crate) fn fourier_scan(dataset: &Dataset, order: usize, w0: f64) -> Result<Vec<f64>> {
    const CANDIDATES: usize = 600;
    let (lo, hi) = (0.2f64.ln(), 2.0f64.ln());
    let screened: Vec<(f64, Option<f64>)> = (0..CANDIDATES)
        .into_par_iter()
        .map(|k| {
            let w = w0 * (lo + (hi - lo) * k as f64 / (CANDIDATES - 1) as f64).exp();
            (w, fourier_screen(dataset, order, w))
        })
        .collect();
    let mut best: Option<(f64, f64)> = None;
    for (w, cost) in screened {
        let Some(cost) = cost else { continue };
        if best.is_none_or(|(_, c)| cost < c) {
            best = Some((w, cost));
        }
    }
    let (w, _) = best.ok_or_else(|| Error::Conditioning("no admissible fundamental frequency".into()))?;
    fourier_linear(dataset, order, w).map(|(p, _)| p)
}

/// Family-aware perturbation of a starting point, used for restarts.
pub(crate) fn jitter(family: Family, params: &[f64], rng: &mut impl rand::Rng) -> Vec<f64> {
    let mut u = || rng.random_range(-1.0..=1.0);
    let mut p = params.to_vec();
    match family {
        Family::GaussianSum { .. } => {
            for t in p.chunks_exact_mut(3) {
                let width = t[2].abs();
                t[0] *= 1.0 + 0.3 * u();
                t[1] += 0.5 * width * u();
                t[2] = width * (1.0 + 0.3 * u());
            }
        }
        Family::Fourier { order } => {
            p[2 * order + 1] *= 1.0 + 0.1 * u();
        }
        Family::PowerLaw { .. } => {
            p[0] *= 1.0 + 0.2 * u();
            p[1] += 0.5 * u();
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothing_window() {
        let s = smooth(&[0.0, 0.0, 5.0, 0.0, 0.0, 0.0]);
        assert_eq!(s[2], 1.0);
        assert_eq!(s[0], 5.0 / 3.0);
        assert_eq!(s[5], 0.0);
    }

    #[test]
    fn maxima_ordering() {
        let v = [0.0, 1.0, 0.0, 3.0, 0.0, 2.0, 0.0];
        assert_eq!(local_maxima(&v), vec![3, 5, 1]);
        assert!(local_maxima(&[1.0, 2.0, 3.0]).is_empty());
    }

    #[test]
    fn single_peak_init_is_near_truth() {
        let d = Dataset::new((0..=40).map(|k| {
            let l = 400.0 + 5.0 * k as f64;
            (l, (-((l - 500.0) / 50.0f64).powi(2)).exp())
        }))
        .unwrap();
        let init = gaussian_sum(&d, 1);
        assert_eq!(init.strategy, InitStrategy::PeakPicking);
        assert!((init.params[1] - 500.0).abs() <= 5.0);
        assert_eq!(init.params[0], 1.0);
        assert!((init.params[2] - 50.0).abs() < 2.5, "{:?}", init.params);
    }

    #[test]
    fn monotone_data_falls_back_to_uniform_centres() {
        let d = Dataset::new((0..20).map(|k| (400.0 + 10.0 * k as f64, k as f64))).unwrap();
        let init = gaussian_sum(&d, 2);
        assert_eq!(init.strategy, InitStrategy::UniformFallback);
        assert_eq!(init.params[1], 400.0 + 0.25 * 190.0);
        assert_eq!(init.params[4], 400.0 + 0.75 * 190.0);
    }

    #[test]
    fn constant_fourier_init() {
        let d = Dataset::new((0..10).map(|k| (400.0 + k as f64, 7.0))).unwrap();
        let init = fourier(&d, 3, None);
        assert_eq!(init.params[0], 7.0);
        assert!(init.params[1..7].iter().all(|&v| v == 0.0));
        assert_eq!(init.params[7], TAU / 9.0);
        assert_eq!(fourier(&d, 0, Some(0.5)).params, vec![7.0, 0.5]);
    }

    #[test]
    fn power_law_reads_nearest_sample() {
        let d = Dataset::new([(500.0, 3.0), (548.0, 5.0), (600.0, 9.0)]).unwrap();
        assert_eq!(power_law(&d, 550.0, -3.0).params, vec![5.0, -3.0]);
    }
}
