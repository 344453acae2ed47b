//! `polynet`: train bias-free `|z|^p` networks on the unit sphere and extract,
//! analyse and export the polytopes their level sets `f(x) = 1` cut out.
//!
//! Exit status: 0 on success, 1 on runtime failure (divergence, degenerate
//! level set, I/O), 2 on usage errors.

mod manifest;
mod pipeline;
mod reproduce;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use polynet::levelset::{
    slice_section, SliceSpec, DEFAULT_POLYLINE_SAMPLES, DEFAULT_SUBDIVISIONS,
};
use polynet::train::TrainConfig;
use serde_json::json;

use manifest::Recorder;
use pipeline::{usage, Resolution, UsageError};
use reproduce::Figure;

const DEFAULT_OUT_DIR: &str = "polynet-out";

#[derive(Parser, Debug)]
#[command(name = "polynet", version, about = "Neural polytopes from bias-free |z|^p networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct TrainArgs {
    /// TOML or JSON file with training settings (fields of TrainConfig).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Args, Debug, Clone, Copy)]
struct ResolutionArgs {
    /// Angular samples for 2D curves.
    #[arg(long, default_value_t = DEFAULT_POLYLINE_SAMPLES)]
    samples: usize,
    /// Icosphere subdivision level for 3D meshes.
    #[arg(long, default_value_t = DEFAULT_SUBDIVISIONS)]
    subdiv: usize,
}

impl From<ResolutionArgs> for Resolution {
    fn from(a: ResolutionArgs) -> Self {
        Resolution {
            samples: a.samples,
            subdivisions: a.subdiv,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a network (best of several restarts) and save it.
    Train {
        #[arg(long)]
        dim: usize,
        /// Layer widths, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        widths: Vec<usize>,
        /// Activation powers, comma separated; a single value applies to every layer.
        #[arg(long, value_delimiter = ',', required = true)]
        powers: Vec<f64>,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long, env = "POLYNET_OUT_DIR", default_value = DEFAULT_OUT_DIR)]
        out: PathBuf,
    },
    /// Write the level set of a saved model (SVG in 2D, OBJ in 3D, plus radial CSV).
    Extract {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        resolution: ResolutionArgs,
        #[arg(long, env = "POLYNET_OUT_DIR", default_value = DEFAULT_OUT_DIR)]
        out: PathBuf,
    },
    /// Identify the level set of a saved model and write a JSON report.
    Analyze {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        resolution: ResolutionArgs,
        #[arg(long, env = "POLYNET_OUT_DIR", default_value = DEFAULT_OUT_DIR)]
        out: PathBuf,
    },
    /// Train and extract one network per activation power.
    Sweep {
        #[arg(long)]
        dim: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        widths: Vec<usize>,
        /// Powers to sweep; each run uses the same power on every layer.
        #[arg(long = "p-list", value_delimiter = ',', required = true)]
        p_list: Vec<f64>,
        #[command(flatten)]
        train: TrainArgs,
        #[command(flatten)]
        resolution: ResolutionArgs,
        #[arg(long = "out-dir", env = "POLYNET_OUT_DIR", default_value = DEFAULT_OUT_DIR)]
        out_dir: PathBuf,
    },
    /// Write 3D slices (x3 = 0, x4 = x5 tan θ) of a model with d >= 5.
    Slice {
        #[arg(long)]
        model: PathBuf,
        /// Slice angles θ = kπ/steps for k = 0..steps.
        #[arg(long = "theta-steps", default_value_t = 10)]
        theta_steps: usize,
        #[arg(long, default_value_t = DEFAULT_SUBDIVISIONS)]
        subdiv: usize,
        #[arg(long = "out-dir", env = "POLYNET_OUT_DIR", default_value = DEFAULT_OUT_DIR)]
        out_dir: PathBuf,
    },
    /// Run a figure preset end to end and write a summary table.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
        /// Override the preset's unit counts n.
        #[arg(long = "n-list", value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        /// Override the preset's powers (fig5).
        #[arg(long = "p-list", value_delimiter = ',')]
        p_list: Option<Vec<f64>>,
        /// Finite stand-in for p = infinity, appended to the fig5 powers.
        #[arg(long = "p-max", default_value_t = reproduce::DEFAULT_P_MAX)]
        p_max: f64,
        #[command(flatten)]
        train: TrainArgs,
        #[command(flatten)]
        resolution: ResolutionArgs,
        #[arg(long = "out-dir", env = "POLYNET_OUT_DIR", default_value = DEFAULT_OUT_DIR)]
        out_dir: PathBuf,
    },
}

fn read_config_file(path: &Path) -> Result<TrainConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    match ext {
        "toml" => toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display()))),
        "json" => serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display()))),
        _ => Err(usage(format!(
            "config {} must end in .toml or .json",
            path.display()
        ))),
    }
}

impl TrainArgs {
    /// File settings first, then flag overrides.
    fn resolve(&self) -> Result<TrainConfig> {
        let mut config = match &self.config {
            Some(path) => read_config_file(path)?,
            None => TrainConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(restarts) = self.restarts {
            config.restarts = restarts;
        }
        if let Some(epochs) = self.epochs {
            config.epochs = epochs;
        }
        config.validate().map_err(|e| usage(e.to_string()))?;
        Ok(config)
    }
}

fn cmd_train(dim: usize, widths: &[usize], powers: &[f64], train: &TrainArgs, out: &Path) -> Result<()> {
    let spec = pipeline::build_spec(dim, widths, powers)?;
    let config = train.resolve()?;
    let mut rec = Recorder::new(out, "train", json!({ "spec": spec, "train": config }))?;
    let stem = pipeline::stem(&spec);
    let result = pipeline::train_and_save(&spec, &config, &mut rec, &stem)?;
    rec.finish()?;
    println!(
        "trained {} : final loss {:.3e} (restart {}, seed {}) -> {}",
        spec.type_label(),
        result.final_loss,
        result.restart_index,
        result.seed_used,
        rec_path(out, &format!("{stem}.model.json"))
    );
    Ok(())
}

fn rec_path(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

fn model_stem(path: &Path) -> String {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("model");
    name.strip_suffix(".model.json")
        .or_else(|| name.strip_suffix(".json"))
        .unwrap_or(name)
        .to_string()
}

fn cmd_extract(model: &Path, res: Resolution, out: &Path) -> Result<()> {
    let (net, doc) = pipeline::load_model(model)?;
    let mut rec = Recorder::new(
        out,
        "extract",
        json!({ "model": model, "samples": res.samples, "subdiv": res.subdivisions }),
    )?;
    doc.seed.into_iter().for_each(|s| rec.seed(s));
    let stem = model_stem(model);
    pipeline::extract_and_save(&net, res, &mut rec, &stem)?;
    rec.finish()?;
    println!("extracted {} -> {}", net.spec().type_label(), out.display());
    Ok(())
}

fn cmd_analyze(model: &Path, res: Resolution, out: &Path) -> Result<()> {
    let (net, doc) = pipeline::load_model(model)?;
    let report = pipeline::analyze(&net, res)?;
    let mut rec = Recorder::new(
        out,
        "analyze",
        json!({ "model": model, "samples": res.samples, "subdiv": res.subdivisions }),
    )?;
    doc.seed.into_iter().for_each(|s| rec.seed(s));
    pipeline::save_report(&report, &mut rec, &model_stem(model))?;
    rec.finish()?;
    println!("{} {}", net.spec().type_label(), pipeline::describe(&report));
    Ok(())
}

fn cmd_slice(model: &Path, steps: usize, subdiv: usize, out: &Path) -> Result<()> {
    let (net, doc) = pipeline::load_model(model)?;
    if net.input_dim() < 5 {
        return Err(usage(format!(
            "slicing needs a model with d >= 5, got d = {}",
            net.input_dim()
        )));
    }
    if steps == 0 {
        return Err(usage("--theta-steps must be positive"));
    }
    let family = SliceSpec::tilted_family(net.input_dim(), steps)?;
    let mut rec = Recorder::new(
        out,
        "slice",
        json!({ "model": model, "theta_steps": steps, "subdiv": subdiv }),
    )?;
    doc.seed.into_iter().for_each(|s| rec.seed(s));
    let stem = model_stem(model);
    for (k, (theta, slice)) in family.iter().enumerate() {
        let mesh = slice_section(&net, slice, subdiv)
            .with_context(|| format!("slice at theta = {theta}"))?;
        let name = format!("{stem}.slice{k:02}.obj");
        polynet::export::write_obj(&mesh, rec.path(&name))?;
        rec.record(&name)?;
        println!("theta = {theta:.4} -> {name}");
    }
    rec.finish()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train {
            dim,
            widths,
            powers,
            train,
            out,
        } => cmd_train(dim, &widths, &powers, &train, &out),
        Command::Extract {
            model,
            resolution,
            out,
        } => cmd_extract(&model, resolution.into(), &out),
        Command::Analyze {
            model,
            resolution,
            out,
        } => cmd_analyze(&model, resolution.into(), &out),
        Command::Sweep {
            dim,
            widths,
            p_list,
            train,
            resolution,
            out_dir,
        } => {
            let config = train.resolve()?;
            reproduce::sweep(dim, &widths, &p_list, &config, resolution.into(), &out_dir)
        }
        Command::Slice {
            model,
            theta_steps,
            subdiv,
            out_dir,
        } => cmd_slice(&model, theta_steps, subdiv, &out_dir),
        Command::Reproduce {
            figure,
            n_list,
            p_list,
            p_max,
            train,
            resolution,
            out_dir,
        } => {
            let config = train.resolve()?;
            let presets = reproduce::Overrides { n_list, p_list, p_max };
            reproduce::reproduce(figure, presets, &config, resolution.into(), &out_dir)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap reports --help/--version through this path with status 0.
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
