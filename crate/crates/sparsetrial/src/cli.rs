//! Command-line interface.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sparsetrial_core::pipeline::{
    cross_validate_with_clock, fit_weights, CvReport, MethodVariant, PipelineConfig,
};
use sparsetrial_core::synth::{random_mixing, synth_mixture, MixingModel, Synthesis};
use sparsetrial_core::{ffdiag, preprocess, trial_covariance_set, Label};

use crate::bundle::{read_bundle, write_bundle};
use crate::clock::WallClock;
use crate::config::{parse_variant, FileConfig};
use crate::dump::{cost_trace_csv, residue_csv, weights_csv, write_covariance_csv};
use crate::error::{Error, Result};
use crate::report::{emit_comparison, emit_report, Format};

#[derive(Debug, Parser)]
#[command(
    name = "sparsetrial",
    version,
    about = "Sparse trial weighting for multichannel trial classification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic bundle.
    Synth(SynthArgs),
    /// Cross-validate one method variant.
    Run(RunArgs),
    /// Write the joint-diagonalization cost trace and per-trial residues.
    Diag(DiagArgs),
    /// Print per-class trial weights fitted on the whole bundle.
    Weights(WeightsArgs),
    /// Cross-validate all four variants into one table.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 8)]
    pub channels: usize,
    #[arg(long, default_value_t = 40)]
    pub trials_per_class: usize,
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.25)]
    pub contamination: f64,
    #[arg(long, default_value_t = 20.0)]
    pub artifact_gain: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub classes: usize,
    /// Condition-number cap of the random mixing matrix.
    #[arg(long, default_value_t = 10.0)]
    pub condition: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    /// JSON file with pipeline settings; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// RBF kernel width.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub folds: Option<usize>,
    /// CSP filter pairs.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Restrict to two classes, e.g. `1,2`.
    #[arg(long, value_parser = parse_pair)]
    pub class_pair: Option<(Label, Label)>,
    /// Exit with status 4 if any solver did not converge.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long, default_value_t = Format::Csv)]
    pub report: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long, default_value_t = Format::Table)]
    pub report: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WeightsArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for `cost_trace.csv` and `residues.csv`.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write every covariance matrix as `cov_k{K}_tau{T}.csv`.
    #[arg(long)]
    pub dump_covariances: bool,
}

fn parse_pair(s: &str) -> std::result::Result<(Label, Label), String> {
    let (a, b) = s.split_once(',').ok_or("expected A,B")?;
    let p = |x: &str| x.trim().parse::<Label>().map_err(|e| format!("{x}: {e}"));
    Ok((p(a)?, p(b)?))
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(a) => synth(&a),
        Command::Run(a) => run(&a),
        Command::Diag(a) => diag(&a),
        Command::Weights(a) => weights(&a),
        Command::Compare(a) => compare(&a),
    }
}

/// Seed of the mixing matrix, kept apart from the trial stream.
pub fn mixing_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

/// Synthetic data exactly as `synth` writes it. Classes are labelled `1..=classes`.
pub fn synthesize(a: &SynthArgs) -> Result<Synthesis> {
    if a.channels == 0 || a.classes < 2 || a.trials_per_class == 0 {
        return Err(Error::Config(
            "need channels ≥ 1, classes ≥ 2 and trials per class ≥ 1".into(),
        ));
    }
    if a.condition.is_nan() || a.condition < 1.0 {
        return Err(Error::Config("condition cap must be ≥ 1".into()));
    }
    let mixing = random_mixing(a.channels, a.condition, mixing_seed(a.seed));
    let mut model = MixingModel::motor_imagery(mixing, a.classes)
        .with_contamination(a.contamination, a.artifact_gain);
    model.condition_cap = a.condition;
    let labels: Vec<Label> = (1..=a.classes as Label).collect();
    synth_mixture(&model, &labels, a.trials_per_class, a.samples, a.seed)
        .map_err(|e| Error::Config(e.to_string()))
}

fn synth(a: &SynthArgs) -> Result<()> {
    write_bundle(&synthesize(a)?.mixtures, &a.out)
}

impl PipelineArgs {
    pub fn config(&self, variant: Option<&str>) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::default();
        if let Some(path) = &self.config {
            FileConfig::load(path)?.apply(&mut cfg)?;
        }
        if let Some(v) = variant {
            cfg.variant = parse_variant(v)?;
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = self.gamma {
            cfg.svm.gamma = v;
        }
        if let Some(v) = self.c {
            cfg.svm.c = v;
        }
        if let Some(v) = self.folds {
            cfg.folds = v;
        }
        if let Some(v) = self.m {
            cfg.m = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(p) = self.class_pair {
            cfg.class_pair = Some(p);
        }
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn check_converged(strict: bool, reports: &[CvReport]) -> Result<()> {
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.converged())
        .map(|r| r.variant.name())
        .collect();
    if strict && !failed.is_empty() {
        return Err(Error::NonConvergence(failed.join(", ")));
    }
    Ok(())
}

fn run(a: &RunArgs) -> Result<()> {
    let cfg = a.pipeline.config(a.variant.as_deref())?;
    let set = read_bundle(&a.pipeline.bundle)?;
    let report = cross_validate_with_clock(&set, &cfg, &WallClock::start())?;
    emit(a.out.as_deref(), &emit_report(&report, a.report))?;
    check_converged(a.pipeline.strict, std::slice::from_ref(&report))
}

/// Reports for all four variants under one base configuration.
pub fn compare_reports(
    set: &sparsetrial_core::TrialSet,
    base: &PipelineConfig,
) -> Result<Vec<CvReport>> {
    MethodVariant::ALL
        .iter()
        .map(|&variant| {
            let cfg = PipelineConfig {
                variant,
                ..base.clone()
            };
            Ok(cross_validate_with_clock(set, &cfg, &WallClock::start())?)
        })
        .collect()
}

fn compare(a: &CompareArgs) -> Result<()> {
    let cfg = a.pipeline.config(None)?;
    let set = read_bundle(&a.pipeline.bundle)?;
    let reports = compare_reports(&set, &cfg)?;
    emit(a.out.as_deref(), &emit_comparison(&reports, a.report))?;
    check_converged(a.pipeline.strict, &reports)
}

fn weights(a: &WeightsArgs) -> Result<()> {
    let cfg = a.pipeline.config(a.variant.as_deref())?;
    let set = read_bundle(&a.pipeline.bundle)?;
    let w = fit_weights(&set, &cfg)?;
    emit(a.out.as_deref(), &weights_csv(&w))?;
    let stalled = w.iter().any(|cw| cw.admm.is_some_and(|s| !s.converged));
    if a.pipeline.strict && stalled {
        return Err(Error::NonConvergence("weight solver".into()));
    }
    Ok(())
}

fn diag(a: &DiagArgs) -> Result<()> {
    let mut cfg = PipelineConfig::default();
    if let Some(path) = &a.config {
        FileConfig::load(path)?.apply(&mut cfg)?;
    }
    cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
    let set = preprocess(&read_bundle(&a.bundle)?, &cfg.preprocess)?;
    let cov = trial_covariance_set(&set, &cfg.taus)?;
    let result = ffdiag(&cov, &cfg.ffdiag)?;
    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let trace = a.out.join("cost_trace.csv");
    fs::write(&trace, cost_trace_csv(&result)).map_err(|e| Error::io(&trace, e))?;
    let residues = a.out.join("residues.csv");
    fs::write(&residues, residue_csv(&set, &result)).map_err(|e| Error::io(&residues, e))?;
    if a.dump_covariances {
        write_covariance_csv(&cov, &a.out)?;
    }
    Ok(())
}
