//! Absorption spectra of tissue constituents, composite tissue absorption
//! and absorption-limited optical link budgets, with least-squares fitting
//! of the spectral models to measured data.

pub mod channel;
pub mod error;
pub mod fitting;
pub mod output;
pub mod spectra;
pub mod tissue;
pub mod units;

pub use error::{Error, Result};
pub use spectra::{Constituent, ConstituentModel, Registry, Spectrum};
pub use tissue::{Absorber, TissueComposition, TissuePreset};
pub use units::{Band, Distance, Domain, Extrapolation, Wavelength};
