//! Parameter layouts and analytic Jacobians of the three model families.
//!
//! Full parameter vectors:
//! - Gaussian sum of n terms: `[a1, b1, c1, a2, b2, c2, ...]`
//! - Fourier series of order k: `[a0, a1, b1, ..., ak, bk, w]`
//! - power law: `[mu_ref, exponent]` (the reference wavelength is a constant)

use crate::error::{Error, Result};
use crate::spectra::{
    ConstituentModel, FourierSeriesModel, GaussianSumModel, GaussianTerm, PowerLawModel,
};
use crate::units::Domain;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    GaussianSum { terms: usize },
    Fourier { order: usize },
    PowerLaw { lambda_ref: f64 },
}

impl Family {
    pub fn param_count(&self) -> usize {
        match *self {
            Family::GaussianSum { terms } => 3 * terms,
            Family::Fourier { order } => 2 * order + 2,
            Family::PowerLaw { .. } => 2,
        }
    }

    pub fn param_names(&self) -> Vec<String> {
        match *self {
            Family::GaussianSum { terms } => (1..=terms)
                .flat_map(|i| [format!("a{i}"), format!("b{i}"), format!("c{i}")])
                .collect(),
            Family::Fourier { order } => std::iter::once("a0".to_string())
                .chain((1..=order).flat_map(|i| [format!("a{i}"), format!("b{i}")]))
                .chain(std::iter::once("w".to_string()))
                .collect(),
            Family::PowerLaw { .. } => vec!["mu_ref".into(), "exponent".into()],
        }
    }

    /// Model value at `lambda`.
    pub fn value(&self, p: &[f64], lambda: f64) -> f64 {
        match *self {
            Family::GaussianSum { .. } => p
                .chunks_exact(3)
                .map(|t| {
                    let z = (lambda - t[1]) / t[2];
                    t[0] * (-z * z).exp()
                })
                .sum(),
            Family::Fourier { order } => {
                let w = p[2 * order + 1];
                (1..=order).fold(p[0], |acc, k| {
                    let phase = k as f64 * w * lambda;
                    acc + p[2 * k - 1] * phase.cos() + p[2 * k] * phase.sin()
                })
            }
            Family::PowerLaw { lambda_ref } => p[0] * (lambda / lambda_ref).powf(p[1]),
        }
    }

    /// Writes ∂value/∂p_j into `row`.
    pub fn gradient(&self, p: &[f64], lambda: f64, row: &mut [f64]) {
        match *self {
            Family::GaussianSum { .. } => {
                for (t, g) in p.chunks_exact(3).zip(row.chunks_exact_mut(3)) {
                    let (a, b, c) = (t[0], t[1], t[2]);
                    let z = (lambda - b) / c;
                    let e = (-z * z).exp();
                    g[0] = e;
                    g[1] = a * e * 2.0 * z / c;
                    g[2] = a * e * 2.0 * z * z / c;
                }
            }
            Family::Fourier { order } => {
                let w = p[2 * order + 1];
                row[0] = 1.0;
                let mut dw = 0.0;
                for k in 1..=order {
                    let kf = k as f64;
                    let (s, c) = (kf * w * lambda).sin_cos();
                    row[2 * k - 1] = c;
                    row[2 * k] = s;
                    dw += kf * lambda * (-p[2 * k - 1] * s + p[2 * k] * c);
                }
                row[2 * order + 1] = dw;
            }
            Family::PowerLaw { lambda_ref } => {
                let r = lambda / lambda_ref;
                let rp = r.powf(p[1]);
                row[0] = rp;
                row[1] = p[0] * rp * r.ln();
            }
        }
    }

    /// Puts parameters into canonical form: Gaussian widths positive and
    /// terms sorted by centre, Fourier fundamental positive.
    pub fn canonicalize(&self, p: &mut [f64]) {
        match *self {
            Family::GaussianSum { .. } => {
                let mut terms: Vec<[f64; 3]> = p
                    .chunks_exact(3)
                    .map(|t| [t[0], t[1], t[2].abs()])
                    .collect();
                terms.sort_by(|x, y| x[1].total_cmp(&y[1]));
                for (dst, t) in p.chunks_exact_mut(3).zip(terms) {
                    dst.copy_from_slice(&t);
                }
            }
            Family::Fourier { order } => {
                let wi = 2 * order + 1;
                if p[wi] < 0.0 {
                    p[wi] = -p[wi];
                    for k in 1..=order {
                        p[2 * k] = -p[2 * k];
                    }
                }
            }
            Family::PowerLaw { .. } => {}
        }
    }

    pub fn to_model(&self, p: &[f64], domain: Domain) -> Result<ConstituentModel> {
        Ok(match *self {
            Family::GaussianSum { .. } => GaussianSumModel::new(
                p.chunks_exact(3)
                    .map(|t| GaussianTerm::new(t[0], t[1], t[2]))
                    .collect(),
                domain,
            )?
            .into(),
            Family::Fourier { order } => FourierSeriesModel::new(
                p[0],
                (1..=order).map(|k| (p[2 * k - 1], p[2 * k])).collect(),
                p[2 * order + 1],
                domain,
            )?
            .into(),
            Family::PowerLaw { lambda_ref } => {
                if p[0] < 0.0 {
                    return Err(Error::InvalidModel(format!(
                        "fitted mu_ref {} is negative",
                        p[0]
                    )));
                }
                PowerLawModel::new(p[0], lambda_ref, p[1])?.into()
            }
        })
    }

    /// Full parameter vector of an existing model, if it belongs to this
    /// family with matching shape.
    pub fn params_of(&self, model: &ConstituentModel) -> Option<Vec<f64>> {
        match (*self, model) {
            (Family::GaussianSum { terms }, ConstituentModel::GaussianSum(m)) if m.terms().len() == terms => {
                Some(m.terms().iter().flat_map(|t| [t.a, t.b, t.c]).collect())
            }
            (Family::Fourier { order }, ConstituentModel::FourierSeries(m)) if m.order() == order => {
                let mut p = vec![m.a0()];
                p.extend(m.harmonics().iter().flat_map(|&(a, b)| [a, b]));
                p.push(m.w());
                Some(p)
            }
            (Family::PowerLaw { lambda_ref }, ConstituentModel::PowerLaw(m)) if m.lambda_ref() == lambda_ref => {
                Some(vec![m.mu_ref(), m.exponent()])
            }
            _ => None,
        }
    }
}
