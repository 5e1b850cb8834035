mod args;

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;
use tissue_owc::channel::{self, PenetrationDepth};
use tissue_owc::fitting::{self, Dataset, ModelForm, ModelSpec};
use tissue_owc::output::{self, format_sig, round_sig, ROUND_TRIP_PRECISION};
use tissue_owc::spectra::{ModelFile, Registry, Spectrum};
use tissue_owc::tissue::{self, Absorber, Uniform};
use tissue_owc::{Error, Extrapolation, TissueComposition, TissuePreset, Wavelength};

use args::{Cli, Command, DepthArgs, FitArgs, Format, OutputArgs, SweepArgs, TissueSource};

enum Failure {
    /// Invalid input: exit 2.
    Usage(String),
    /// Runtime or numerical failure: exit 1.
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonFinite { .. } | Error::Conditioning(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Constituent(a) => constituent(a),
        Command::Tissue(a) => tissue_cmd(a),
        Command::Pathloss(a) => pathloss(a),
        Command::Windows(a) => windows(a),
        Command::Depth(a) => depth(a),
        Command::Fit(a) => fit(a),
        Command::Presets(o) => presets(o),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn emit(out: &OutputArgs, text: &str) -> Outcome {
    match &out.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Runtime(format!("cannot write output: {e}")))
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn to_toml<T: Serialize>(value: &T) -> Result<String, Failure> {
    toml::to_string(value).map_err(|e| Failure::Runtime(e.to_string()))
}

fn registry(models: Option<&Path>) -> Result<Registry, Failure> {
    match models {
        Some(path) => Ok(Registry::from_model_file(&ModelFile::from_toml(&read(path)?)?)?),
        None => Ok(Registry::builtin()),
    }
}

fn policy(extrapolate: bool) -> Extrapolation {
    if extrapolate {
        Extrapolation::Allow
    } else {
        Extrapolation::Forbid
    }
}

fn composition(
    preset: Option<&str>,
    set: Option<&str>,
    file: Option<&Path>,
) -> Result<TissueComposition, Failure> {
    Ok(match (preset, set, file) {
        (Some(name), _, _) => TissuePreset::get(name)?.composition,
        (_, Some(doc), _) => doc.parse()?,
        (_, _, Some(path)) => read(path)?.parse()?,
        _ => return Err(Failure::Usage("no tissue composition given".into())),
    })
}

fn source(s: &TissueSource) -> Result<TissueComposition, Failure> {
    composition(s.preset.as_deref(), s.set.as_deref(), s.composition.as_deref())
}

fn warn_clamped(spectrum: &Spectrum) {
    if spectrum.clamped_count > 0 {
        eprintln!(
            "note: {} of {} samples had a negative fitted value clamped to 0",
            spectrum.clamped_count,
            spectrum.len()
        );
    }
}

#[derive(Serialize)]
struct SpectrumDoc {
    clamped: usize,
    sample: Vec<SpectrumRow>,
}

#[derive(Serialize)]
struct SpectrumRow {
    wavelength_nm: f64,
    mu_a_cm1: f64,
}

fn render_spectrum(spectrum: &Spectrum, out: &OutputArgs) -> Result<String, Failure> {
    match out.format {
        Format::Csv => Ok(output::spectrum_csv(spectrum, out.precision)),
        Format::Text => to_toml(&SpectrumDoc {
            clamped: spectrum.clamped_count,
            sample: spectrum
                .samples
                .iter()
                .map(|&(l, v)| SpectrumRow {
                    wavelength_nm: round_sig(l, out.precision),
                    mu_a_cm1: round_sig(v, out.precision),
                })
                .collect(),
        }),
    }
}

fn constituent(a: args::ConstituentArgs) -> Outcome {
    let reg = registry(a.sweep.models.as_deref())?;
    let spectrum = reg.spectrum(a.constituent, &a.sweep.band, policy(a.sweep.extrapolate))?;
    warn_clamped(&spectrum);
    emit(&a.output, &render_spectrum(&spectrum, &a.output)?)
}

fn tissue_cmd(a: args::TissueArgs) -> Outcome {
    let comp = source(&a.source)?;
    let reg = registry(a.sweep.models.as_deref())?;
    let spectrum = comp
        .with(&reg)
        .extrapolate(policy(a.sweep.extrapolate))
        .spectrum(&a.sweep.band)?;
    warn_clamped(&spectrum);
    emit(&a.output, &render_spectrum(&spectrum, &a.output)?)
}

fn sweep_tissue<'a>(
    comp: &'a TissueComposition,
    reg: &'a Registry,
    sweep: &SweepArgs,
) -> tissue::Tissue<'a> {
    comp.with(reg).extrapolate(policy(sweep.extrapolate))
}

fn pathloss(a: args::PathlossArgs) -> Outcome {
    let comp = source(&a.source)?;
    let reg = registry(a.sweep.models.as_deref())?;
    let absorber = sweep_tissue(&comp, &reg, &a.sweep);
    let points = channel::pathloss_spectrum(&absorber, a.delta, &a.sweep.band)?;
    let opaque = points.iter().filter(|p| p.opaque).count();
    if opaque > 0 {
        eprintln!("note: {opaque} samples exceed optical depth {}; linear loss saturated", channel::OPAQUE_OPTICAL_DEPTH);
    }
    let p = a.output.precision;
    let text = match (a.output.format, a.db) {
        (Format::Csv, false) => output::pathloss_csv(&points, p),
        (Format::Csv, true) => {
            let mut s = String::from("wavelength_nm,loss_db\n");
            for pt in &points {
                s.push_str(&format!("{},{}\n", format_sig(pt.lambda, p), format_sig(pt.loss_db, p)));
            }
            s
        }
        (Format::Text, db_only) => {
            #[derive(Serialize)]
            struct Row {
                wavelength_nm: f64,
                #[serde(skip_serializing_if = "Option::is_none")]
                mu_a_cm1: Option<f64>,
                #[serde(skip_serializing_if = "Option::is_none")]
                loss_linear: Option<f64>,
                loss_db: f64,
                opaque: bool,
            }
            #[derive(Serialize)]
            struct Doc {
                delta_cm: f64,
                sample: Vec<Row>,
            }
            to_toml(&Doc {
                delta_cm: a.delta.cm(),
                sample: points
                    .iter()
                    .map(|pt| Row {
                        wavelength_nm: round_sig(pt.lambda, p),
                        mu_a_cm1: (!db_only).then(|| round_sig(pt.mu_a, p)),
                        loss_linear: (!db_only).then(|| round_sig(pt.loss_linear, p)),
                        loss_db: round_sig(pt.loss_db, p),
                        opaque: pt.opaque,
                    })
                    .collect(),
            })?
        }
    };
    emit(&a.output, &text)
}

fn windows(a: args::WindowsArgs) -> Outcome {
    let comp = source(&a.source)?;
    let reg = registry(a.sweep.models.as_deref())?;
    let absorber = sweep_tissue(&comp, &reg, &a.sweep);
    let found = channel::transmission_windows(&absorber, a.delta, &a.sweep.band, a.threshold)?;
    let text = match a.output.format {
        Format::Csv => output::windows_csv(&found, a.output.precision),
        Format::Text => output::windows_text(&found, a.threshold)?,
    };
    emit(&a.output, &text)
}

fn depth(a: DepthArgs) -> Outcome {
    let lambda = Wavelength::new(a.lambda)?;
    let mu_a = match a.mu_a {
        Some(mu) => Uniform(mu).mu_a(lambda)?,
        None => {
            let comp = composition(a.preset.as_deref(), a.set.as_deref(), a.composition.as_deref())?;
            let reg = registry(a.models.as_deref())?;
            comp.with(&reg).extrapolate(policy(a.extrapolate)).mu_a(lambda)?
        }
    };
    let depth = channel::depth_for_mu(mu_a, a.threshold)?;
    let p = a.output.precision;
    let text = match a.output.format {
        Format::Csv => {
            let d = match depth {
                PenetrationDepth::Finite { cm } => format_sig(cm, p),
                PenetrationDepth::Unbounded => "unbounded".into(),
            };
            format!(
                "wavelength_nm,mu_a_cm1,threshold_db,depth_cm\n{},{},{},{d}\n",
                format_sig(a.lambda, p),
                format_sig(mu_a, p),
                format_sig(a.threshold, p)
            )
        }
        Format::Text => {
            #[derive(Serialize)]
            struct Doc {
                wavelength_nm: f64,
                mu_a_cm1: f64,
                threshold_db: f64,
                unbounded: bool,
                #[serde(skip_serializing_if = "Option::is_none")]
                depth_cm: Option<f64>,
            }
            to_toml(&Doc {
                wavelength_nm: a.lambda,
                mu_a_cm1: round_sig(mu_a, p),
                threshold_db: a.threshold,
                unbounded: depth == PenetrationDepth::Unbounded,
                depth_cm: depth.cm().map(|cm| round_sig(cm, p)),
            })?
        }
    };
    emit(&a.output, &text)
}

fn fit(a: FitArgs) -> Outcome {
    let file = fs::File::open(&a.dataset)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", a.dataset.display())))?;
    let data = Dataset::from_csv(file)?.with_provenance(a.dataset.display().to_string());

    let form = if let Some(terms) = a.gaussian {
        ModelForm::GaussianSum { terms }
    } else if let Some(order) = a.fourier {
        ModelForm::Fourier { order, w: a.w }
    } else {
        ModelForm::PowerLaw {
            lambda_ref: a.lambda_ref,
            exponent: (!a.free_exponent).then_some(a.exponent),
        }
    };
    let mut spec = ModelSpec::new(form).with_restarts(a.restarts, a.seed);
    if let Some(init) = a.init {
        spec = spec.with_init(init);
    }
    let result = fitting::fit(&data, &spec)?;

    let p = a.output.precision;
    let text = match a.output.format {
        Format::Text => result.to_document(&a.name)?,
        Format::Csv => {
            // parameters always at full precision so the fit can be reused
            let mut s = String::from("parameter,value\n");
            for (name, v) in result.family.param_names().iter().zip(&result.params) {
                s.push_str(&format!("{name},{}\n", format_sig(*v, ROUND_TRIP_PRECISION)));
            }
            s.push_str(&format!("rmse,{}\n", format_sig(result.rmse, p)));
            s.push_str(&format!("r_squared,{}\n", format_sig(result.r_squared, p)));
            s.push_str(&format!("max_abs_residual,{}\n", format_sig(result.max_abs_residual, p)));
            s.push_str(&format!("iterations,{}\n", result.iterations));
            s.push_str(&format!("converged,{}\n", result.converged));
            s
        }
    };
    emit(&a.output, &text)?;
    if result.converged {
        Ok(())
    } else {
        Err(Failure::Runtime(format!(
            "fit did not converge ({})",
            result.stop.as_str()
        )))
    }
}

fn presets(out: OutputArgs) -> Outcome {
    let all = TissuePreset::all();
    let p = out.precision;
    let text = match out.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut write = || -> csv::Result<()> {
                w.write_record(["name", "B", "S", "W", "F", "M", "provenance"])?;
                for preset in &all {
                    let c = &preset.composition;
                    w.write_record([
                        c.name().to_string(),
                        format_sig(c.blood(), p),
                        format_sig(c.saturation(), p),
                        format_sig(c.water(), p),
                        format_sig(c.fat(), p),
                        format_sig(c.melanin(), p),
                        preset.provenance.to_string(),
                    ])?;
                }
                w.flush()?;
                Ok(())
            };
            write().map_err(|e| Failure::Runtime(e.to_string()))?;
            String::from_utf8(w.into_inner().map_err(|e| Failure::Runtime(e.to_string()))?)
                .expect("csv output is utf-8")
        }
        Format::Text => {
            #[derive(Serialize)]
            struct Row<'a> {
                name: &'a str,
                #[serde(rename = "B")]
                b: f64,
                #[serde(rename = "S")]
                s: f64,
                #[serde(rename = "W")]
                w: f64,
                #[serde(rename = "F")]
                f: f64,
                #[serde(rename = "M")]
                m: f64,
                provenance: &'a str,
            }
            #[derive(Serialize)]
            struct Doc<'a> {
                preset: Vec<Row<'a>>,
            }
            to_toml(&Doc {
                preset: all
                    .iter()
                    .map(|pr| {
                        let c = &pr.composition;
                        Row {
                            name: c.name(),
                            b: c.blood(),
                            s: c.saturation(),
                            w: c.water(),
                            f: c.fat(),
                            m: c.melanin(),
                            provenance: pr.provenance,
                        }
                    })
                    .collect(),
            })?
        }
    };
    emit(&out, &text)
}
