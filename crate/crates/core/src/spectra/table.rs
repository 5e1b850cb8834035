//! Built-in fitted parameters for the five tissue constituents.
//!
//! Values are stored exactly as published; `data/constituents.toml` carries
//! the same numbers in a human-diffable form and a test keeps the two in sync.

use super::models::{
    ConstituentModel, FourierSeriesModel, GaussianSumModel, GaussianTerm, PowerLawModel,
};
use crate::units::DEFAULT_DOMAIN;

/// (a, b, c) per term.
pub const DEOXY_BLOOD: [(f64, f64, f64); 4] = [
    (38.63, 423.9, 33.06),
    (60.18, 31.57, 660.8),
    (25.11, 559.3, 59.08),
    (2.988, 664.7, 28.53),
];

/// Term 4 is a far-off-band baseline (huge amplitude, centre at -25880 nm);
/// it evaluates to a few tens of cm⁻¹ inside the band without overflow.
pub const OXY_BLOOD: [(f64, f64, f64); 5] = [
    (14.0, 419.7, 16.97),
    (13.75, 581.5, 11.68),
    (29.69, 559.9, 46.71),
    (4.317e15, -25880.0, 4668.0),
    (-34.3, 642.6, 162.5),
];

pub const FAT: [(f64, f64, f64); 5] = [
    (33.53, 411.5, 38.38),
    (50.09, 968.7, 525.9),
    (3.66, 742.9, 80.22),
    (2.5, 671.2, 32.97),
    (19.86, 513.8, 119.2),
];

pub const WATER_A0: f64 = 324.1;

/// (a_i, b_i) for i = 1..=7.
pub const WATER_HARMONICS: [(f64, f64); 7] = [
    (102.2, 697.9),
    (-568.0, 121.7),
    (-126.6, -395.3),
    (236.8, -107.1),
    (73.0, 115.6),
    (-40.53, 35.46),
    (-12.92, -8.373),
];

/// rad/nm
pub const WATER_W: f64 = 0.006663;

/// Melanin absorption at the 550 nm reference, cm⁻¹.
pub const MELANIN_MU_550: f64 = 519.0;
pub const MELANIN_LAMBDA_REF: f64 = 550.0;
pub const MELANIN_EXPONENT: f64 = -3.0;

fn gaussian_sum(params: &[(f64, f64, f64)]) -> ConstituentModel {
    let terms = params
        .iter()
        .map(|&(a, b, c)| GaussianTerm::new(a, b, c))
        .collect();
    GaussianSumModel::new(terms, DEFAULT_DOMAIN)
        .expect("built-in gaussian parameters are valid")
        .into()
}

pub fn deoxy_blood() -> ConstituentModel {
    gaussian_sum(&DEOXY_BLOOD)
}

pub fn oxy_blood() -> ConstituentModel {
    gaussian_sum(&OXY_BLOOD)
}

pub fn fat() -> ConstituentModel {
    gaussian_sum(&FAT)
}

pub fn water() -> ConstituentModel {
    FourierSeriesModel::new(WATER_A0, WATER_HARMONICS.to_vec(), WATER_W, DEFAULT_DOMAIN)
        .expect("built-in fourier parameters are valid")
        .into()
}

pub fn melanin() -> ConstituentModel {
    PowerLawModel::new(MELANIN_MU_550, MELANIN_LAMBDA_REF, MELANIN_EXPONENT)
        .expect("built-in power-law parameters are valid")
        .into()
}
