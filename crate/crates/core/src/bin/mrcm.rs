use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use mrcm::driver::{reference_solution, Experiment, IterationReport, ProblemSpec};
use mrcm::io::{load_config_over, write_reports, ExperimentConfig};

#[derive(Parser)]
#[command(name = "mrcm", version, about = "Iterative multiscale Robin coupled solver for 2D Darcy flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single run (first value of every list).
    Run(Flags),
    /// Iterations against alpha; defaults to 1e-8..1e8 with both methods.
    AlphaSweep(Flags),
    /// Extended method with (l, k) = (2, 4) and (4, 8).
    Converge(Flags),
    /// Extended method, k = 2, l = 2 and 4.
    OversamplingStudy(Flags),
    /// Extended method, l = 2, k = 2, 4 and 8.
    SmoothingStudy(Flags),
    /// Built-in homogeneous dipole on 64x64 with 4x4 subdomains.
    CompareImsfv(Flags),
}

#[derive(Args, Clone, Default)]
struct Flags {
    /// key = value file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// spe10 | dipole | homogeneous | synthetic
    #[arg(long)]
    problem: Option<String>,
    /// Robin parameter: value, comma list, or decade range like 1e-8..1e8
    #[arg(long)]
    alpha: Option<String>,
    /// oversampling layers (comma list)
    #[arg(long)]
    oversampling: Option<String>,
    /// smoothing sweeps per iteration (comma list)
    #[arg(long)]
    smoothing_steps: Option<String>,
    /// rm | em | both
    #[arg(long)]
    method: Option<String>,
    /// 1-based SPE10 layer
    #[arg(long)]
    layer: Option<String>,
    /// SPE10 permeability dump
    #[arg(long)]
    perm_file: Option<String>,
    #[arg(long)]
    threshold: Option<String>,
    #[arg(long)]
    max_iters: Option<String>,
    /// l2-pressure | l2-flux | linf-pressure | l2-both | coefficient-change
    #[arg(long)]
    metric: Option<String>,
    /// CSV destination (stdout when absent)
    #[arg(long)]
    out: Option<String>,
}

impl Flags {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        [
            ("problem", &self.problem),
            ("perm_file", &self.perm_file),
            ("layer", &self.layer),
            ("alpha", &self.alpha),
            ("oversampling", &self.oversampling),
            ("smoothing_steps", &self.smoothing_steps),
            ("method", &self.method),
            ("threshold", &self.threshold),
            ("max_iters", &self.max_iters),
            ("metric", &self.metric),
            ("out", &self.out),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
        .collect()
    }
}

fn preset(command: &Command) -> Result<(ExperimentConfig, &Flags)> {
    let mut cfg = ExperimentConfig::default();
    let (lines, flags) = match command {
        Command::Run(f) => ("", f),
        Command::AlphaSweep(f) => ("alpha = 1e-8..1e8\nmethod = both\nmetric = l2-both", f),
        Command::Converge(f) => ("oversampling = 2,4\nsmoothing_steps = 4,8\nmetric = l2-both", f),
        Command::OversamplingStudy(f) => ("oversampling = 2,4\nsmoothing_steps = 2\nmetric = l2-both", f),
        Command::SmoothingStudy(f) => ("oversampling = 2\nsmoothing_steps = 2,4,8\nmetric = l2-both", f),
        Command::CompareImsfv(f) => (
            "problem = dipole\nsmoothing_steps = 2,4\nmetric = linf-pressure\nthreshold = 1e-12\nmax_iters = 20",
            f,
        ),
    };
    cfg.apply_str(lines)?;
    Ok((cfg, flags))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let (base, flags) = preset(&cli.command)?;
    let mut cfg = load_config_over(base, flags.config.as_deref(), &flags.overrides())?;
    if matches!(cli.command, Command::Run(_)) {
        cfg.alpha.truncate(1);
        cfg.oversampling.truncate(1);
        cfg.smoothing_steps.truncate(1);
    }
    let (problem, (mx, my)) = cfg.build_problem().context("building problem")?;
    let reference = reference_solution(&problem).context("fine reference solve")?;

    let mut reports: Vec<IterationReport> = Vec::new();
    for &alpha in &cfg.alpha {
        for &l in &cfg.oversampling {
            for &k in &cfg.smoothing_steps {
                let mut spec = ProblemSpec::new(problem.clone(), mx, my);
                spec.alpha = alpha;
                spec.oversampling = l;
                spec.smoothing_steps = k;
                spec.threshold = cfg.threshold;
                spec.max_iters = cfg.max_iters;
                spec.metric = cfg.metric;
                let exp = Experiment::new(spec, Some(reference.clone()))
                    .with_context(|| format!("setting up alpha={alpha:e} l={l} k={k}"))?;
                for method in cfg.method.methods() {
                    let r = exp.run(method)?;
                    let last = r.records.last().expect("offline record");
                    eprintln!(
                        "{} alpha={:e} l={} k={}: {} after {} iterations ({} = {:.3e})",
                        method.name(),
                        alpha,
                        l,
                        k,
                        r.status.name(),
                        last.iteration,
                        cfg.metric.name(),
                        last.metric(cfg.metric)
                    );
                    reports.push(r);
                }
            }
        }
    }

    match &cfg.out {
        Some(path) => {
            mrcm::io::write_report(&reports, path).with_context(|| format!("writing {}", path.display()))?
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_reports(&reports, &mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}
