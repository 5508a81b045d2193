//! Subcommand dispatch.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::Rng;

use netctl_core::objective::check_gradient;
use netctl_core::optim::{binomial, BudgetMode, MinoResult};
use netctl_core::pipelines::{
    algorithm1, error_vs_steps, exhaustive_baseline, random_baseline, relax_round_pipeline, uncontrolled_response,
    BaselineDistribution, Experiment,
};
use netctl_core::rng::{stream_rng, Stream};
use netctl_core::sim::SchemeKind;
use netctl_core::{Actuation, ControlSequence};

use crate::bundle::Bundle;
use crate::config::{load_config, RunSettings};
use crate::error::CliError;
use crate::svg::{emit_histogram, HistogramSpec, Marker, MarkerRole};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  usage error
  3  configuration error (message cites the line)
  4  output directory exists (pass --force)
  5  I/O failure
  6  infeasible budget or enumeration cap exceeded
  7  solver or simulation failure
  8  gradient check above tolerance

On failure a JSON error record is printed to stderr.
Set NETCTL_LOG (error, warn, info, debug) for progress messages.";

#[derive(Debug, Parser)]
#[command(name = "netctl", version, about = "Control node selection for nonlinear networks", after_help = EXIT_CODES)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the `seed` key of the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Results directory to create.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for baseline evaluations (default: logical cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Replace an existing results directory.
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Free response of the network before control.
    Simulate,
    /// Selection search with control design.
    Select,
    /// Relax-and-round comparison method.
    Compare,
    /// Every selection of the budgeted size.
    Exhaustive,
    /// Randomly drawn selections of the budgeted size.
    Random,
    /// Adjoint gradient against finite differences, both schemes.
    Gradcheck,
    /// Selection search, comparison method, baseline and histogram.
    Figure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub command: Command,
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub workers: Option<usize>,
    pub force: bool,
}

impl Cli {
    pub fn into_run_config(self) -> Result<RunConfig, String> {
        Ok(RunConfig {
            command: self.command,
            config: self.config.ok_or("--config is required")?,
            seed: self.seed,
            out: self.out.ok_or("--out is required")?,
            workers: self.workers,
            force: self.force,
        })
    }
}

/// Executes one subcommand and returns the results directory.
pub fn run(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let mut settings = load_config(&cfg.config)?;
    if let Some(seed) = cfg.seed {
        settings.spec.seed = seed;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::io("starting worker pool", std::io::Error::other(e)))?;
    let mut bundle = Bundle::create(&cfg.out, cfg.force)?;
    let config_text = settings.to_string();
    bundle.write("spec.cfg", |w| w.write_all(config_text.as_bytes()))?;
    pool.install(|| dispatch(cfg.command, &settings, &mut bundle))?;
    bundle.commit()
}

fn dispatch(command: Command, settings: &RunSettings, bundle: &mut Bundle) -> Result<(), CliError> {
    if command == Command::Simulate {
        let traj = uncontrolled_response(&settings.spec, &settings.simulate.scheme, settings.simulate.steps)?;
        return bundle.write("trajectory.csv", |w| traj.write_csv(w));
    }
    let exp = settings.spec.resolve()?;
    if !exp.settled {
        bundle.warn(format!(
            "initial state did not settle within {} steps",
            settings.spec.settle.max_steps
        ));
    }
    match command {
        Command::Simulate => unreachable!("handled above"),
        Command::Select => {
            let result = algorithm1(&exp)?;
            write_results(bundle, &[("algorithm1", &result)])?;
            write_method_details(bundle, &exp, &result)?;
            bundle.write("trace.csv", |w| result.write_trace(w))
        }
        Command::Compare => {
            let result = relax_round_pipeline(&exp)?;
            write_results(bundle, &[("relax_round", &result)])?;
            write_method_details(bundle, &exp, &result)
        }
        Command::Exhaustive => {
            let dist = exhaustive_baseline(&exp, settings.spec.budget.max)?;
            bundle.write("baseline.csv", |w| dist.write_csv(w))
        }
        Command::Random => {
            let dist = random_baseline(&exp, settings.spec.budget.max, settings.spec.baseline_count)?;
            bundle.write("baseline.csv", |w| dist.write_csv(w))
        }
        Command::Gradcheck => gradcheck(settings, &exp, bundle),
        Command::Figure => figure(settings, &exp, bundle),
    }
}

fn write_results(bundle: &Bundle, rows: &[(&str, &MinoResult)]) -> Result<(), CliError> {
    bundle.write("result.csv", |w| {
        writeln!(w, "method,pi,J,e")?;
        for (method, r) in rows {
            writeln!(w, "{method},{},{:.16e},{:.16e}", r.selection, r.objective, r.error)?;
        }
        Ok(())
    })
}

/// `error_steps.csv` and `controls.csv` for one result.
fn write_method_details(bundle: &Bundle, exp: &Experiment, result: &MinoResult) -> Result<(), CliError> {
    let curve = error_vs_steps(result, exp)?;
    bundle.write("error_steps.csv", |w| {
        writeln!(w, "k,e")?;
        for (k, e) in curve.iter().enumerate() {
            writeln!(w, "{k},{e:.16e}")?;
        }
        Ok(())
    })?;
    let nodes = result.selection.active_nodes();
    bundle.write("controls.csv", |w| {
        write!(w, "k")?;
        for node in &nodes {
            write!(w, ",u_{}", node + 1)?;
        }
        writeln!(w)?;
        for k in 0..result.controls.len() {
            write!(w, "{k}")?;
            for v in result.controls.row(k) {
                write!(w, ",{v:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    })
}

fn gradcheck(settings: &RunSettings, exp: &Experiment, bundle: &Bundle) -> Result<(), CliError> {
    let n = exp.node_count();
    let horizon = settings.spec.horizon;
    let mut rng = stream_rng(settings.spec.seed, Stream::Noise);
    let pi: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
    let mut worst = Vec::new();
    for kind in [SchemeKind::ForwardEuler, SchemeKind::Trapezoidal] {
        let scheme = settings.spec.scheme.with_kind(kind);
        // Inputs sized to move the state by O(1) over the horizon.
        let scale = 1.0 / (scheme.h * horizon as f64);
        let data = (0..(horizon + 1) * n).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
        let controls = ControlSequence::from_flat(horizon, n, data)?;
        let report = check_gradient(
            exp.model.as_ref(),
            &scheme,
            &exp.x0,
            &controls,
            &Actuation::selection(&pi),
            &exp.cost,
            settings.fd_step * scale,
        )?;
        log::info!("{} gradient check: max relative error {:.3e}", kind.short_name(), report.max_rel_error);
        bundle.write(&format!("gradcheck_{}.csv", kind.short_name()), |w| report.write_csv(w))?;
        worst.push((kind.short_name(), report.max_rel_error));
    }
    bundle.write("gradcheck.csv", |w| {
        writeln!(w, "scheme,max_rel_error")?;
        for (name, err) in &worst {
            writeln!(w, "{name},{err:.16e}")?;
        }
        Ok(())
    })?;
    match worst.iter().find(|(_, e)| !(*e < 1e-5)) {
        Some((name, e)) => Err(CliError::CheckFailed(format!("{name} max relative error {e:.3e} >= 1e-5"))),
        None => Ok(()),
    }
}

fn figure(settings: &RunSettings, exp: &Experiment, bundle: &mut Bundle) -> Result<(), CliError> {
    let spec = &settings.spec;
    let primary = algorithm1(exp)?;
    let comparison = relax_round_pipeline(exp)?;
    write_results(bundle, &[("algorithm1", &primary), ("relax_round", &comparison)])?;
    write_method_details(bundle, exp, &primary)?;
    bundle.write("trace.csv", |w| primary.write_trace(w))?;

    let cardinality = match spec.budget.mode {
        BudgetMode::Exactly => spec.budget.max,
        BudgetMode::AtMost => primary.selection.count(),
    };
    let total = binomial(exp.node_count(), cardinality);
    let dist = if total <= spec.exhaustive_cap {
        exhaustive_baseline(exp, cardinality)?
    } else {
        bundle.warn(format!(
            "{total} selections exceed the enumeration cap of {}; using {} random selections",
            spec.exhaustive_cap, spec.baseline_count
        ));
        random_baseline(exp, cardinality, spec.baseline_count)?
    };
    bundle.write("baseline.csv", |w| dist.write_csv(w))?;
    write_histogram(bundle, settings, &dist, &primary, &comparison, cardinality)
}

fn write_histogram(
    bundle: &Bundle,
    settings: &RunSettings,
    dist: &BaselineDistribution,
    primary: &MinoResult,
    comparison: &MinoResult,
    cardinality: usize,
) -> Result<(), CliError> {
    let hist = HistogramSpec {
        bins: settings.bins,
        title: format!(
            "{} baseline, {} of {} nodes",
            dist.method.name(),
            cardinality,
            primary.selection.node_count()
        ),
        markers: vec![
            Marker {
                label: "selection search".into(),
                value: primary.error,
                role: MarkerRole::Primary,
            },
            Marker {
                label: "relax and round".into(),
                value: comparison.error,
                role: MarkerRole::Comparison,
            },
        ],
    };
    let path = bundle.staged_path("histogram.svg");
    emit_histogram(dist, &hist, &path).map_err(|e| CliError::io("writing histogram.svg", e))
}

/// Convenience for callers that already hold a parsed configuration path.
pub fn run_command(command: Command, config: &Path, seed: Option<u64>, out: &Path, force: bool) -> Result<PathBuf, CliError> {
    run(&RunConfig {
        command,
        config: config.to_path_buf(),
        seed,
        out: out.to_path_buf(),
        workers: None,
        force,
    })
}
