//! Tissue composition and the composite absorption coefficient.
//!
//! A homogeneous tissue is described by the volume fractions of blood (B),
//! water (W), fat (F) and melanin (M) plus the hemoglobin oxygen saturation
//! (S). Its absorption coefficient is the fraction-weighted sum
//!
//! ```text
//! μ_a(λ) = B·S·μ_oxy(λ) + B·(1−S)·μ_deoxy(λ) + W·μ_water(λ) + F·μ_fat(λ) + M·μ_mel(λ)
//! ```
//!
//! The volume left over after B + W + F + M is treated as optically inert.
//! All fractions are stored in [0, 1]; percentages are accepted only by the
//! text parser, with an explicit `%` suffix.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::spectra::{Constituent, Registry, Spectrum};
use crate::units::{Band, Extrapolation, Wavelength};

/// Anything with a wavelength-dependent absorption coefficient in cm⁻¹.
pub trait Absorber: Sync {
    /// Returns μ_a and whether any contribution was clamped at zero.
    fn absorption(&self, lambda: Wavelength) -> Result<(f64, bool)>;

    fn mu_a(&self, lambda: Wavelength) -> Result<f64> {
        self.absorption(lambda).map(|(v, _)| v)
    }

    fn spectrum(&self, band: &Band) -> Result<Spectrum> {
        Spectrum::sample(band, |l| self.absorption(l))
    }
}

/// A medium with the same absorption at every wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uniform(pub f64);

impl Absorber for Uniform {
    fn absorption(&self, _lambda: Wavelength) -> Result<(f64, bool)> {
        Ok((self.0, false))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TissueComposition {
    name: String,
    blood: f64,
    saturation: f64,
    water: f64,
    fat: f64,
    melanin: f64,
}

// slack on the volume budget for decimal inputs such as 0.1 + 0.2 + 0.7
const BUDGET_SLACK: f64 = 1e-12;

impl TissueComposition {
    pub fn new(
        name: impl Into<String>,
        blood: f64,
        saturation: f64,
        water: f64,
        fat: f64,
        melanin: f64,
    ) -> Result<Self> {
        for (field, v) in [
            ("B", blood),
            ("S", saturation),
            ("W", water),
            ("F", fat),
            ("M", melanin),
        ] {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::Composition {
                    field: field.into(),
                    message: format!("value {v} is outside [0, 1]"),
                });
            }
        }
        let total = blood + water + fat + melanin;
        if total > 1.0 + BUDGET_SLACK {
            return Err(Error::Composition {
                field: "B+W+F+M".into(),
                message: format!("volume fractions sum to {total}, which exceeds 1"),
            });
        }
        Ok(Self {
            name: name.into(),
            blood,
            saturation,
            water,
            fat,
            melanin,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn blood(&self) -> f64 {
        self.blood
    }

    pub fn saturation(&self) -> f64 {
        self.saturation
    }

    pub fn water(&self) -> f64 {
        self.water
    }

    pub fn fat(&self) -> f64 {
        self.fat
    }

    pub fn melanin(&self) -> f64 {
        self.melanin
    }

    /// Per-constituent weights in [`Constituent::ALL`] order:
    /// (B·(1−S), B·S, W, F, M).
    pub fn weights(&self) -> [f64; 5] {
        [
            self.blood * (1.0 - self.saturation),
            self.blood * self.saturation,
            self.water,
            self.fat,
            self.melanin,
        ]
    }

    /// Binds this composition to a set of constituent models.
    pub fn with<'a>(&'a self, registry: &'a Registry) -> Tissue<'a> {
        Tissue {
            registry,
            composition: self,
            policy: Extrapolation::Forbid,
        }
    }
}

/// A composition evaluated against a particular registry.
#[derive(Debug, Clone, Copy)]
pub struct Tissue<'a> {
    registry: &'a Registry,
    composition: &'a TissueComposition,
    policy: Extrapolation,
}

impl<'a> Tissue<'a> {
    pub fn extrapolate(mut self, policy: Extrapolation) -> Self {
        self.policy = policy;
        self
    }

    pub fn composition(&self) -> &TissueComposition {
        self.composition
    }
}

impl Absorber for Tissue<'_> {
    fn absorption(&self, lambda: Wavelength) -> Result<(f64, bool)> {
        let c = self.composition;
        let eval = |k| self.registry.evaluate(k, lambda, self.policy);
        let oxy = eval(Constituent::OxyBlood)?;
        let deoxy = eval(Constituent::DeoxyBlood)?;
        let water = eval(Constituent::Water)?;
        let fat = eval(Constituent::Fat)?;
        let mel = eval(Constituent::Melanin)?;
        let terms = [
            (c.blood * c.saturation, oxy),
            (c.blood * (1.0 - c.saturation), deoxy),
            (c.water, water),
            (c.fat, fat),
            (c.melanin, mel),
        ];
        let mu = terms.iter().fold(0.0, |acc, (w, e)| acc + w * e.value);
        let clamped = terms.iter().any(|(w, e)| *w > 0.0 && e.clamped());
        Ok((mu, clamped))
    }
}

/// μ_a of a composition under the given registry, cm⁻¹.
pub fn tissue_mu_a(registry: &Registry, composition: &TissueComposition, lambda: Wavelength) -> Result<f64> {
    composition.with(registry).mu_a(lambda)
}

pub fn tissue_spectrum(registry: &Registry, composition: &TissueComposition, band: &Band) -> Result<Spectrum> {
    composition.with(registry).spectrum(band)
}

/// A shipped composition together with the literature it was compiled from.
#[derive(Debug, Clone, PartialEq)]
pub struct TissuePreset {
    pub composition: TissueComposition,
    pub provenance: &'static str,
}

const PRESET_NAMES: [&str; 4] = ["skin", "breast", "bone", "brain"];

impl TissuePreset {
    pub fn all() -> Vec<TissuePreset> {
        PRESET_NAMES
            .iter()
            .map(|n| Self::get(n).expect("preset table is complete"))
            .collect()
    }

    pub fn names() -> &'static [&'static str] {
        &PRESET_NAMES
    }

    pub fn get(name: &str) -> Result<TissuePreset> {
        // fractions, i.e. the tabulated percentages divided by 100
        let (b, s, w, f, m, provenance) = match name.trim().to_ascii_lowercase().as_str() {
            "skin" => (
                0.0041,
                0.992,
                0.261,
                0.225,
                0.0115,
                "Tseng et al. 2011; Salomatina et al. 2006; Sandell & Zhu 2011; Shimojo et al. 2020",
            ),
            "breast" => (
                0.005,
                0.52,
                0.50,
                0.13,
                0.0,
                "Pifferi et al. 2004; Sandell & Zhu 2011; Spinelli et al. 2004",
            ),
            "bone" => (
                0.0015,
                0.30,
                0.30,
                0.07,
                0.0,
                "Sandell & Zhu 2011; Bashkatov et al. 2006; Ugryumova et al. 2004",
            ),
            "brain" => (
                0.0171,
                0.587,
                0.50,
                0.20,
                0.0,
                "Zhao et al. 2005; Yaroslavsky et al. 2002; van der Zee et al. 1993",
            ),
            _ => {
                return Err(Error::UnknownPreset {
                    name: name.to_string(),
                    valid: PRESET_NAMES.join(", "),
                })
            }
        };
        let canonical = name.trim().to_ascii_lowercase();
        Ok(TissuePreset {
            composition: TissueComposition::new(canonical, b, s, w, f, m)?,
            provenance,
        })
    }
}

/// Parses a single numeric value, converting `x%` to `x / 100` by decimal
/// shift so that `0.41%` and `0.0041` give the same double.
fn parse_fraction(field: &str, text: &str) -> Result<f64> {
    let err = |message: String| Error::Composition {
        field: field.to_string(),
        message,
    };
    let text = text.trim();
    let (number, percent) = match text.strip_suffix('%') {
        Some(n) => (n.trim(), true),
        None => (text, false),
    };
    let raw: f64 = number
        .parse()
        .map_err(|_| err(format!("`{text}` is not a number")))?;
    if !raw.is_finite() {
        return Err(err(format!("`{text}` is not finite")));
    }
    if percent {
        if !(0.0..=100.0).contains(&raw) {
            return Err(err(format!("{raw}% is outside [0%, 100%]")));
        }
        if number.contains(['e', 'E']) {
            Ok(raw / 100.0)
        } else {
            format!("{number}e-2")
                .parse()
                .map_err(|_| err(format!("`{text}` is not a number")))
        }
    } else {
        if !(0.0..=1.0).contains(&raw) {
            return Err(err(format!("{raw} is outside [0, 1] (use a `%` suffix for percentages)")));
        }
        Ok(raw)
    }
}

/// Parses a composition document.
///
/// Entries are `key = value` (or `key: value`) pairs separated by newlines
/// or commas; `#` starts a comment. Keys are `B`, `S`, `W`, `F`, `M` (all
/// required) and an optional `name`. Values may carry a `%` suffix.
///
/// ```text
/// name = breast
/// B = 0.5%
/// S = 52%
/// W = 50%, F = 13%, M = 0%
/// ```
impl FromStr for TissueComposition {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut name: Option<String> = None;
        let mut values: [Option<f64>; 5] = [None; 5];
        const KEYS: [&str; 5] = ["B", "S", "W", "F", "M"];

        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            for entry in line.split(',') {
                let entry = entry.trim();
                if entry.is_empty() {
                    continue;
                }
                let (key, value) = entry
                    .split_once(['=', ':'])
                    .ok_or_else(|| Error::Composition {
                        field: entry.to_string(),
                        message: "expected `key = value`".into(),
                    })?;
                let key = key.trim();
                if key.eq_ignore_ascii_case("name") {
                    name = Some(value.trim().to_string());
                    continue;
                }
                let idx = KEYS
                    .iter()
                    .position(|k| k.eq_ignore_ascii_case(key))
                    .ok_or_else(|| Error::Composition {
                        field: key.to_string(),
                        message: "unknown key (expected B, S, W, F, M or name)".into(),
                    })?;
                if values[idx].is_some() {
                    return Err(Error::Composition {
                        field: KEYS[idx].into(),
                        message: "specified more than once".into(),
                    });
                }
                values[idx] = Some(parse_fraction(KEYS[idx], value)?);
            }
        }

        let mut v = [0.0; 5];
        for (i, slot) in values.iter().enumerate() {
            v[i] = slot.ok_or_else(|| Error::Composition {
                field: KEYS[i].into(),
                message: "missing (B, S, W, F and M are all required)".into(),
            })?;
        }
        TissueComposition::new(name.unwrap_or_else(|| "custom".into()), v[0], v[1], v[2], v[3], v[4])
    }
}

/// Serializes to the document format accepted by [`FromStr`], using
/// fractions written with round-trip precision.
impl fmt::Display for TissueComposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "name = {}", self.name)?;
        writeln!(f, "B = {}", self.blood)?;
        writeln!(f, "S = {}", self.saturation)?;
        writeln!(f, "W = {}", self.water)?;
        writeln!(f, "F = {}", self.fat)?;
        writeln!(f, "M = {}", self.melanin)
    }
}

/// Resolves a preset name or an inline/document composition.
pub fn resolve(preset_or_document: &str) -> Result<TissueComposition> {
    match TissuePreset::get(preset_or_document) {
        Ok(p) => Ok(p.composition),
        Err(e) if !preset_or_document.contains(['=', ':']) => Err(e),
        Err(_) => preset_or_document.parse(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wl(nm: f64) -> Wavelength {
        Wavelength::new(nm).unwrap()
    }

    #[test]
    fn zero_composition_is_transparent() {
        let reg = Registry::builtin();
        let c = TissueComposition::new("void", 0.0, 0.5, 0.0, 0.0, 0.0).unwrap();
        for l in [400.0, 550.0, 1000.0] {
            assert_eq!(tissue_mu_a(&reg, &c, wl(l)).unwrap(), 0.0);
        }
    }

    #[test]
    fn pure_water_projects_onto_constituent() {
        let reg = Registry::builtin();
        let c = TissueComposition::new("water", 0.0, 0.0, 1.0, 0.0, 0.0).unwrap();
        for l in [400.0, 550.0, 977.0] {
            assert_eq!(
                tissue_mu_a(&reg, &c, wl(l)).unwrap(),
                reg.mu_a(Constituent::Water, wl(l)).unwrap()
            );
        }
    }

    #[test]
    fn skin_melanin_term() {
        let skin = TissuePreset::get("skin").unwrap().composition;
        assert!((skin.melanin() * 519.0 - 5.9685).abs() < 1e-12);
    }

    #[test]
    fn presets_are_stored_as_fractions() {
        let p = |n| TissuePreset::get(n).unwrap().composition;
        let skin = p("skin");
        assert_eq!(
            (skin.blood(), skin.saturation(), skin.water(), skin.fat(), skin.melanin()),
            (0.0041, 0.992, 0.261, 0.225, 0.0115)
        );
        let brain = p("brain");
        assert_eq!(
            (brain.blood(), brain.saturation(), brain.water(), brain.fat(), brain.melanin()),
            (0.0171, 0.587, 0.5, 0.2, 0.0)
        );
        assert_eq!(TissuePreset::all().len(), 4);
        assert!(matches!(TissuePreset::get("liver"), Err(Error::UnknownPreset { .. })));
    }

    #[test]
    fn validation_errors() {
        assert!(TissueComposition::new("x", 1.2, 0.5, 0.0, 0.0, 0.0).is_err());
        assert!(TissueComposition::new("x", 0.0, -0.1, 0.0, 0.0, 0.0).is_err());
        let err = TissueComposition::new("x", 0.5, 1.0, 0.4, 0.2, 0.0).unwrap_err();
        assert!(err.to_string().contains("B+W+F+M"));
        // saturation does not count towards the volume budget
        assert!(TissueComposition::new("x", 0.5, 1.0, 0.5, 0.0, 0.0).is_ok());
    }

    #[test]
    fn parse_breast_document() {
        let doc = "B=0.5%\nS=52%\nW=50%\nF=13%\nM=0%\n";
        let c: TissueComposition = doc.parse().unwrap();
        let breast = TissuePreset::get("breast").unwrap().composition;
        assert_eq!(c.weights(), breast.weights());
        assert_eq!(c.blood(), breast.blood());
    }

    #[test]
    fn parse_inline_skin_matches_preset_bit_exactly() {
        let c: TissueComposition = "name=skin,B=0.41%,S=99.2%,W=26.1%,F=22.5%,M=1.15%".parse().unwrap();
        assert_eq!(c, TissuePreset::get("skin").unwrap().composition);
    }

    #[test]
    fn parse_errors_are_field_level() {
        let err = "".parse::<TissueComposition>().unwrap_err();
        assert!(matches!(err, Error::Composition { ref field, .. } if field == "B"));
        let err = "B=0,S=0,W=1.2,F=0,M=0".parse::<TissueComposition>().unwrap_err();
        assert!(matches!(err, Error::Composition { ref field, .. } if field == "W"));
        let err = "B=0,S=0,W=0,F=0,M=0,X=1".parse::<TissueComposition>().unwrap_err();
        assert!(matches!(err, Error::Composition { ref field, .. } if field == "X"));
        let err = "B=0,S=0,W=150%,F=0,M=0".parse::<TissueComposition>().unwrap_err();
        assert!(matches!(err, Error::Composition { ref field, .. } if field == "W"));
        let err = "B=50%,S=0,W=50%,F=10%,M=0".parse::<TissueComposition>().unwrap_err();
        assert!(matches!(err, Error::Composition { ref field, .. } if field == "B+W+F+M"));
        assert!("B=0,B=0,S=0,W=0,F=0,M=0".parse::<TissueComposition>().is_err());
        assert!("B 0".parse::<TissueComposition>().is_err());
    }

    #[test]
    fn document_round_trip() {
        for p in TissuePreset::all() {
            let text = p.composition.to_string();
            assert_eq!(text.parse::<TissueComposition>().unwrap(), p.composition);
        }
    }

    #[test]
    fn resolve_accepts_presets_and_documents() {
        assert_eq!(resolve("bone").unwrap().name(), "bone");
        assert_eq!(resolve("B=0,S=0,W=1,F=0,M=0").unwrap().water(), 1.0);
        assert!(matches!(resolve("unknown"), Err(Error::UnknownPreset { .. })));
    }

    #[test]
    fn clamping_is_reported_only_for_contributing_constituents() {
        let reg = Registry::builtin();
        let dry = TissueComposition::new("dry", 0.0, 0.0, 0.0, 1.0, 0.0).unwrap();
        let wet = TissueComposition::new("wet", 0.0, 0.0, 1.0, 0.0, 0.0).unwrap();
        assert!(!dry.with(&reg).absorption(wl(550.0)).unwrap().1);
        assert!(wet.with(&reg).absorption(wl(550.0)).unwrap().1);
    }
}
