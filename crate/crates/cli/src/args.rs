use std::path::PathBuf;

use clap::builder::TypedValueParser;
use clap::{Args, Parser, Subcommand, ValueEnum};
use tissue_owc::output::{DEFAULT_PRECISION, ROUND_TRIP_PRECISION};
use tissue_owc::spectra::Constituent;
use tissue_owc::{Band, Distance};

#[derive(Debug, Parser)]
#[command(
    name = "tissue-owc",
    version,
    about = "Absorption spectra, pathloss and transmission windows of in-body optical links"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Absorption spectrum of one constituent.
    Constituent(ConstituentArgs),
    /// Composite absorption spectrum of a tissue.
    Tissue(TissueArgs),
    /// Absorption pathloss over a band for a tissue slab.
    Pathloss(PathlossArgs),
    /// Sub-bands where the pathloss stays within a threshold.
    Windows(WindowsArgs),
    /// Thickness at which the pathloss reaches a threshold.
    Depth(DepthArgs),
    /// Fit a spectral model to a measured dataset.
    Fit(FitArgs),
    /// List the built-in tissue presets.
    Presets(OutputArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    /// Named-field TOML document.
    Text,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,

    /// Significant digits in numeric output.
    #[arg(long, default_value_t = DEFAULT_PRECISION,
          value_parser = clap::value_parser!(u32).range(1..=ROUND_TRIP_PRECISION as i64).map(|v| v as usize))]
    pub precision: usize,

    /// Write to a file instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Wavelength grid `lo:hi:step` in nm.
    #[arg(long, default_value = "400:1000:1")]
    pub band: Band,

    /// Replacement constituent models (TOML `[[constituent]]` records).
    #[arg(long, value_name = "PATH")]
    pub models: Option<PathBuf>,

    /// Evaluate outside the models' fitted wavelength range.
    #[arg(long)]
    pub extrapolate: bool,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct TissueSource {
    /// Built-in preset: skin, breast, bone or brain.
    #[arg(long)]
    pub preset: Option<String>,

    /// Inline composition, e.g. `B=0.41%,S=99.2%,W=26.1%,F=22.5%,M=1.15%`.
    #[arg(long, value_name = "DOC")]
    pub set: Option<String>,

    /// Composition document file.
    #[arg(long, value_name = "PATH")]
    pub composition: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConstituentArgs {
    /// deoxy-blood, oxy-blood, water, fat or melanin.
    pub constituent: Constituent,

    #[command(flatten)]
    pub sweep: SweepArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TissueArgs {
    #[command(flatten)]
    pub source: TissueSource,

    #[command(flatten)]
    pub sweep: SweepArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PathlossArgs {
    #[command(flatten)]
    pub source: TissueSource,

    /// Slab thickness with unit, e.g. `1mm` or `0.5cm`.
    #[arg(long)]
    pub delta: Distance,

    /// Emit only the dB loss column.
    #[arg(long)]
    pub db: bool,

    #[command(flatten)]
    pub sweep: SweepArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct WindowsArgs {
    #[command(flatten)]
    pub source: TissueSource,

    /// Slab thickness with unit, e.g. `5mm`.
    #[arg(long)]
    pub delta: Distance,

    /// Maximum pathloss inside a window, dB.
    #[arg(long, default_value_t = tissue_owc::channel::DEFAULT_THRESHOLD_DB)]
    pub threshold: f64,

    #[command(flatten)]
    pub sweep: SweepArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
#[group(id = "medium", required = true, multiple = false, args = ["preset", "set", "composition", "mu_a"])]
pub struct DepthArgs {
    /// Built-in preset: skin, breast, bone or brain.
    #[arg(long)]
    pub preset: Option<String>,

    /// Inline composition document.
    #[arg(long, value_name = "DOC")]
    pub set: Option<String>,

    /// Composition document file.
    #[arg(long, value_name = "PATH")]
    pub composition: Option<PathBuf>,

    /// Wavelength-independent absorption coefficient, cm⁻¹.
    #[arg(long, value_name = "CM1")]
    pub mu_a: Option<f64>,

    /// Wavelength, nm.
    #[arg(long)]
    pub lambda: f64,

    /// Pathloss budget, dB.
    #[arg(long, default_value_t = tissue_owc::channel::DEFAULT_THRESHOLD_DB)]
    pub threshold: f64,

    /// Replacement constituent models (TOML `[[constituent]]` records).
    #[arg(long, value_name = "PATH")]
    pub models: Option<PathBuf>,

    /// Evaluate outside the models' fitted wavelength range.
    #[arg(long)]
    pub extrapolate: bool,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
#[group(id = "family", required = true, multiple = false, args = ["gaussian", "fourier", "power_law"])]
pub struct FitArgs {
    /// CSV with header `wavelength_nm,mu_a_cm1[,weight]`.
    pub dataset: PathBuf,

    /// Sum of N Gaussian terms.
    #[arg(long, value_name = "N")]
    pub gaussian: Option<usize>,

    /// Fourier series of order K.
    #[arg(long, value_name = "K")]
    pub fourier: Option<usize>,

    /// Power law mu_ref·(λ/λ_ref)^exponent.
    #[arg(long)]
    pub power_law: bool,

    /// Hold the Fourier fundamental fixed at this value, rad/nm.
    #[arg(long, requires = "fourier")]
    pub w: Option<f64>,

    /// Power-law reference wavelength, nm.
    #[arg(long, default_value_t = 550.0)]
    pub lambda_ref: f64,

    /// Fixed power-law exponent.
    #[arg(long, default_value_t = tissue_owc::fitting::DEFAULT_EXPONENT, allow_hyphen_values = true,
          conflicts_with = "free_exponent")]
    pub exponent: f64,

    /// Fit the power-law exponent too.
    #[arg(long)]
    pub free_exponent: bool,

    /// Explicit starting point, comma-separated in parameter order.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub init: Option<Vec<f64>>,

    /// Additional jittered starts.
    #[arg(long, default_value_t = 0)]
    pub restarts: usize,

    /// Seed for the restart jitter.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Constituent name recorded in the exported model.
    #[arg(long, default_value = "fitted")]
    pub name: String,

    #[command(flatten)]
    pub output: OutputArgs,
}
