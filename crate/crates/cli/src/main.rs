use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use axiform::experiments::{
    run_axis, run_critfn, run_flow, run_gh, run_perturb, run_sweep_alpha, run_sweep_lambda, ExperimentConfig,
    ExperimentOutput, SceneSource,
};
use axiform::AxisError;
use clap::{Args, Parser, Subcommand};

const EXIT_ASSERTION: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_NUMERIC: u8 = 1;

/// Filtered medial axes of point sites and their stability experiments.
#[derive(Parser, Debug)]
#[command(name = "axiform", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Filtered axis at every (lambda, alpha) grid point, as JSON and SVG
    Axis(Common),
    /// Critical function estimate, as CSV and SVG
    Critfn(Common),
    /// One gradient-flow trajectory, as CSV and SVG
    Flow(FlowArgs),
    /// Hausdorff and GH change between consecutive lambda grid points
    SweepLambda(Common),
    /// Hausdorff and GH change between consecutive alpha grid points
    SweepAlpha(Common),
    /// Hausdorff change of the axis under site perturbations
    Perturb(Common),
    /// GH distortion of the axis under site perturbations
    Gh(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// experiment configuration (JSON)
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// overrides the configured seed
    #[arg(long)]
    seed: Option<u64>,
    /// output directory (default: the configured one, else `out`)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FlowArgs {
    #[arg(long, required_unless_present = "scene")]
    config: Option<PathBuf>,
    /// scene JSON, used instead of the configured scene
    #[arg(long)]
    scene: Option<PathBuf>,
    /// start point as `x,y`
    #[arg(long, value_delimiter = ',')]
    start: Option<Vec<f64>>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[command(flatten)]
    run: RunArgs,
}

fn load_config(path: &Path) -> Result<(ExperimentConfig, Option<PathBuf>), AxisError> {
    let cfg = ExperimentConfig::load(path)?;
    Ok((cfg, path.parent().map(Path::to_path_buf)))
}

type Runner = fn(&ExperimentConfig, Option<&Path>) -> axiform::Result<ExperimentOutput>;

fn run(cli: Cli) -> Result<(ExperimentOutput, PathBuf), AxisError> {
    let (runner, (mut cfg, base), run): (Runner, _, RunArgs) = match cli.command {
        Command::Axis(c) => (run_axis, load_config(&c.config)?, c.run),
        Command::Critfn(c) => (run_critfn, load_config(&c.config)?, c.run),
        Command::SweepLambda(c) => (run_sweep_lambda, load_config(&c.config)?, c.run),
        Command::SweepAlpha(c) => (run_sweep_alpha, load_config(&c.config)?, c.run),
        Command::Perturb(c) => (run_perturb, load_config(&c.config)?, c.run),
        Command::Gh(c) => (run_gh, load_config(&c.config)?, c.run),
        Command::Flow(f) => {
            let (mut cfg, base) = match (&f.config, &f.scene) {
                (Some(p), _) => load_config(p)?,
                (None, Some(s)) => {
                    let scene = axiform::SiteScene::load(s)?;
                    (ExperimentConfig::new(SceneSource::Inline(scene)), None)
                }
                (None, None) => unreachable!("clap requires one of them"),
            };
            if let (Some(_), Some(s)) = (&f.config, &f.scene) {
                cfg.scene = SceneSource::Inline(axiform::SiteScene::load(s)?);
            }
            if f.start.is_some() {
                cfg.start = f.start;
            }
            if f.alpha.is_some() {
                cfg.alpha = f.alpha;
            }
            if f.horizon.is_some() {
                cfg.horizon = f.horizon;
            }
            (run_flow as Runner, (cfg, base), f.run)
        }
    };
    if let Some(seed) = run.seed {
        cfg.seed = seed;
    }
    let out_dir = run.out.or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let output = runner(&cfg, base.as_deref())?;
    Ok((output, out_dir))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (output, dir) = match run(cli) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            let code = if matches!(e, AxisError::Stall { .. }) { EXIT_NUMERIC } else { EXIT_INPUT };
            return ExitCode::from(code);
        }
    };
    if let Err(e) = output.write_to(&dir).with_context(|| format!("writing results to {}", dir.display())) {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_INPUT);
    }
    let report = &output.report;
    for a in report.failed() {
        println!("FAIL {}: {} > {} ({})", a.name, a.lhs, a.rhs, a.source);
    }
    for f in &report.flags {
        println!("flag: {f}");
    }
    let enforced = report.assertions.iter().filter(|a| a.enforced).count();
    println!(
        "{}: {} of {enforced} enforced assertions passed, {} skipped; results in {}",
        report.kind,
        enforced - report.failed().len(),
        report.skipped,
        dir.display()
    );
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_ASSERTION)
    }
}
