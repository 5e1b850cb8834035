//! Plain-text (TOML) records for constituent models.
//!
//! The same record layout is used for the shipped parameter file and for
//! exported fit results, so a fit can be loaded back as a custom
//! constituent. Parameter arrays follow the a_i / b_i / c_i / w naming of the
//! published table: `a[0]` is a_1, and so on.
//!
//! ```toml
//! [[constituent]]
//! name = "melanin"
//! kind = "power-law"
//! mu_ref = 519.0
//! lambda_ref = 550.0
//! exponent = -3.0
//! ```

use serde::{Deserialize, Serialize};

use super::models::{
    ConstituentModel, FourierSeriesModel, GaussianSumModel, GaussianTerm, PowerLawModel,
};
use crate::error::{Error, Result};
use crate::units::{Domain, DEFAULT_DOMAIN};

/// The shipped parameter file.
pub const BUILTIN_PARAMETERS: &str = include_str!("../../data/constituents.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    GaussianSum,
    FourierSeries,
    PowerLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelRecord {
    pub name: String,
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub a: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub c: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_ref: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_ref: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    /// [lo, hi] in nm; defaults to 400–1000 nm for domain-bound families.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_nm: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

impl ModelRecord {
    pub fn from_model(name: impl Into<String>, model: &ConstituentModel) -> Self {
        let mut rec = Self {
            name: name.into(),
            kind: ModelKind::PowerLaw,
            a0: None,
            a: vec![],
            b: vec![],
            c: vec![],
            w: None,
            mu_ref: None,
            lambda_ref: None,
            exponent: None,
            domain_nm: None,
            provenance: None,
        };
        match model {
            ConstituentModel::GaussianSum(m) => {
                rec.kind = ModelKind::GaussianSum;
                rec.a = m.terms().iter().map(|t| t.a).collect();
                rec.b = m.terms().iter().map(|t| t.b).collect();
                rec.c = m.terms().iter().map(|t| t.c).collect();
                rec.domain_nm = Some([m.domain().lo, m.domain().hi]);
            }
            ConstituentModel::FourierSeries(m) => {
                rec.kind = ModelKind::FourierSeries;
                rec.a0 = Some(m.a0());
                rec.a = m.harmonics().iter().map(|h| h.0).collect();
                rec.b = m.harmonics().iter().map(|h| h.1).collect();
                rec.w = Some(m.w());
                rec.domain_nm = Some([m.domain().lo, m.domain().hi]);
            }
            ConstituentModel::PowerLaw(m) => {
                rec.mu_ref = Some(m.mu_ref());
                rec.lambda_ref = Some(m.lambda_ref());
                rec.exponent = Some(m.exponent());
            }
        }
        rec
    }

    fn field(&self, name: &str, v: Option<f64>) -> Result<f64> {
        v.ok_or_else(|| Error::Record(format!("`{}`: missing `{name}`", self.name)))
    }

    fn domain(&self) -> Result<Domain> {
        match self.domain_nm {
            Some([lo, hi]) => Domain::new(lo, hi),
            None => Ok(DEFAULT_DOMAIN),
        }
    }

    pub fn to_model(&self) -> Result<ConstituentModel> {
        let unexpected = |what: &str| {
            Error::Record(format!("`{}`: `{what}` is not a {:?} parameter", self.name, self.kind))
        };
        let model: ConstituentModel = match self.kind {
            ModelKind::GaussianSum => {
                if self.a.len() != self.b.len() || self.a.len() != self.c.len() {
                    return Err(Error::Record(format!(
                        "`{}`: a, b, c must have equal length ({}, {}, {})",
                        self.name,
                        self.a.len(),
                        self.b.len(),
                        self.c.len()
                    )));
                }
                if self.a0.is_some() || self.w.is_some() {
                    return Err(unexpected("a0/w"));
                }
                let terms = (0..self.a.len())
                    .map(|i| GaussianTerm::new(self.a[i], self.b[i], self.c[i]))
                    .collect();
                GaussianSumModel::new(terms, self.domain()?)?.into()
            }
            ModelKind::FourierSeries => {
                if self.a.len() != self.b.len() {
                    return Err(Error::Record(format!(
                        "`{}`: a and b must have equal length",
                        self.name
                    )));
                }
                if !self.c.is_empty() {
                    return Err(unexpected("c"));
                }
                let harmonics = self.a.iter().copied().zip(self.b.iter().copied()).collect();
                FourierSeriesModel::new(
                    self.field("a0", self.a0)?,
                    harmonics,
                    self.field("w", self.w)?,
                    self.domain()?,
                )?
                .into()
            }
            ModelKind::PowerLaw => {
                if !(self.a.is_empty() && self.b.is_empty() && self.c.is_empty()) {
                    return Err(unexpected("a/b/c"));
                }
                PowerLawModel::new(
                    self.field("mu_ref", self.mu_ref)?,
                    self.field("lambda_ref", self.lambda_ref)?,
                    self.field("exponent", self.exponent)?,
                )?
                .into()
            }
        };
        Ok(model)
    }
}

/// A document holding one or more `[[constituent]]` records. Other
/// top-level tables (e.g. fit diagnostics) are ignored on load.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelFile {
    pub constituent: Vec<ModelRecord>,
}

impl ModelFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Record(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Record(e.to_string()))
    }

    pub fn builtin() -> Self {
        Self::from_toml(BUILTIN_PARAMETERS).expect("shipped parameter file parses")
    }

    /// Looks up a record by name.
    pub fn get(&self, name: &str) -> Option<&ModelRecord> {
        self.constituent.iter().find(|r| r.name == name)
    }
}
