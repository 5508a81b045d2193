//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line to stdout
//! (bypassing output capture) before asserting.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use netctl::{run, Command, RunConfig};
use netctl_core::models::{duffing_model, grg_graph, letter_patterns, memory_model, sample_duffing, MemoryParams, NetworkModel};
use netctl_core::objective::{check_gradient, CostSpec};
use netctl_core::optim::{round_selection, Budget, MinoResult};
use netctl_core::pipelines::{
    algorithm1, error_vs_steps, exhaustive_baseline, random_baseline, relax_round_pipeline, uncontrolled_response,
    BaselineDistribution, ExperimentSpec, ModelSpec,
};
use netctl_core::sim::{reference_solve, simulate, Scheme, SchemeKind};
use netctl_core::{Actuation, ControlSequence, Error, StepError};

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let line = format!(
        "ACCEPTANCE [{id:02}] {} {name}: {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(pass, "criterion {id} failed: {detail}");
}

fn no_controls(horizon: usize) -> (ControlSequence, Actuation) {
    (ControlSequence::zeros(horizon, 0), Actuation::reduced(Vec::new()))
}

#[test]
fn criterion_01_trapezoidal_accuracy() {
    let start = Instant::now();
    let spec = ExperimentSpec::duffing_n10();
    let model = spec.build_model().unwrap();
    let x0 = spec.initial_start().unwrap();
    let (c, a) = no_controls(10);
    let ti = simulate(model.as_ref(), &Scheme::trapezoidal(1e-4), &x0, &c, &a).unwrap();
    let reference = reference_solve(model.as_ref(), &x0, &c, &a, 1e-4, 1e-5).unwrap();
    let err = ti.relative_sup_error(&reference);
    let elapsed = start.elapsed();
    report(
        1,
        "trapezoidal accuracy, Duffing N=10, h=1e-4, T=10",
        err < 1e-4 && elapsed < Duration::from_secs(10),
        &format!("relative sup error {err:.3e} (< 1e-4), {:.2}s (< 10s)", elapsed.as_secs_f64()),
    );
}

#[test]
fn criterion_02_forward_euler_on_memory() {
    let start = Instant::now();
    let spec = ExperimentSpec::memory_n25();
    let model = spec.build_model().unwrap();
    let x0 = spec.initial_start().unwrap();
    let (c, a) = no_controls(spec.horizon);
    let fe = simulate(model.as_ref(), &Scheme::forward_euler(1e-2), &x0, &c, &a).unwrap();
    let reference = reference_solve(model.as_ref(), &x0, &c, &a, 1e-2, 1e-4).unwrap();
    let err = fe.relative_sup_error(&reference);
    let elapsed = start.elapsed();
    report(
        2,
        "forward Euler accuracy, memory N=25, h=1e-2",
        err < 1e-3 && elapsed < Duration::from_secs(5),
        &format!("relative sup error {err:.3e} (< 1e-3), {:.2}s (< 5s)", elapsed.as_secs_f64()),
    );
}

#[test]
fn criterion_03_forward_euler_instability() {
    let spec = ExperimentSpec::duffing_n10();
    let outcome = uncontrolled_response(&spec, &Scheme::forward_euler(1e-2), 1500);
    let (pass, detail) = match outcome {
        Err(Error::Step {
            step,
            kind: StepError::NonFinite,
        }) => (true, format!("non-finite state at step {step}")),
        Err(e) => (false, format!("unexpected error: {e}")),
        Ok(traj) => (
            false,
            format!(
                "no instability within 1500 steps; final sup norm {:.3e}",
                traj.final_state().amax()
            ),
        ),
    };
    report(3, "forward Euler instability on Duffing N=10, h=1e-2", pass, &detail);
}

fn gradient_instances(model: &dyn NetworkModel, scheme: Scheme, rng: &mut ChaCha8Rng) -> f64 {
    let horizon = 10;
    let n = model.node_count();
    let dim = model.state_dim();
    let x0 = DVector::from_fn(dim, |_, _| rng.random_range(0.0..0.5));
    let target = DVector::from_fn(dim, |_, _| rng.random_range(0.0..0.5));
    let pi: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
    let scale = 1.0 / (scheme.h * horizon as f64);
    let data = (0..(horizon + 1) * n).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
    let controls = ControlSequence::from_flat(horizon, n, data).unwrap();
    check_gradient(
        model,
        &scheme,
        &x0,
        &controls,
        &Actuation::selection(&pi),
        &CostSpec::tracking(target, horizon),
        1e-6 * scale,
    )
    .unwrap()
    .max_rel_error
}

#[test]
fn criterion_04_gradient_exactness() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let memory = memory_model(&MemoryParams::new(letter_patterns().to_vec(), 0.8).unwrap()).unwrap();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for kind in [SchemeKind::ForwardEuler, SchemeKind::Trapezoidal] {
        for i in 0..20u64 {
            let graph = grg_graph(10, 1000 + i).unwrap();
            let duffing = duffing_model(sample_duffing(&graph, 2000 + i)).unwrap();
            worst = worst.max(gradient_instances(&duffing, Scheme::trapezoidal(1e-4).with_kind(kind), &mut rng));
            worst = worst.max(gradient_instances(&memory, Scheme::trapezoidal(1e-2).with_kind(kind), &mut rng));
            cases += 2;
        }
    }
    report(
        4,
        "adjoint gradient vs finite differences",
        worst < 1e-5,
        &format!("{cases} instances, max relative error {worst:.3e} (< 1e-5)"),
    );
}

fn enumerate_best(alpha: &[f64], budget: &Budget) -> f64 {
    let n = alpha.len();
    let mut best = f64::INFINITY;
    for mask in 0u32..1 << n {
        if !budget.admits(mask.count_ones() as usize) {
            continue;
        }
        let d: f64 = (0..n)
            .map(|i| if mask >> i & 1 == 1 { 1.0 - alpha[i] } else { alpha[i] })
            .sum();
        best = best.min(d);
    }
    best
}

#[test]
fn criterion_05_rounding_optimality() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut mismatches = 0;
    let mut cases = 0;
    for n in 4..=12 {
        for _ in 0..1000 {
            let alpha: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=1.0)).collect();
            let m = rng.random_range(1..=n);
            for budget in [Budget::at_most(m), Budget::exactly(m)] {
                let s = round_selection(&alpha, &budget).unwrap();
                let best = enumerate_best(&alpha, &budget);
                if !s.is_feasible(&budget) || (s.l1_distance(&alpha) - best).abs() > 1e-12 {
                    mismatches += 1;
                }
                cases += 1;
            }
        }
    }
    report(
        5,
        "rounding equals enumeration, N=4..12, both modes",
        mismatches == 0,
        &format!("{mismatches} mismatches in {cases} cases"),
    );
}

struct ExhaustiveRow {
    m: usize,
    primary: MinoResult,
    comparison: MinoResult,
    dist: BaselineDistribution,
}

struct DuffingRuns {
    rows: Vec<ExhaustiveRow>,
    elapsed: Duration,
}

fn duffing_runs() -> &'static DuffingRuns {
    static RUNS: OnceLock<DuffingRuns> = OnceLock::new();
    RUNS.get_or_init(|| {
        let start = Instant::now();
        let rows = [2, 4, 6, 8]
            .into_iter()
            .map(|m| {
                let exp = ExperimentSpec::duffing_n10().with_budget(Budget::exactly(m)).resolve().unwrap();
                ExhaustiveRow {
                    m,
                    primary: algorithm1(&exp).unwrap(),
                    comparison: relax_round_pipeline(&exp).unwrap(),
                    dist: exhaustive_baseline(&exp, m).unwrap(),
                }
            })
            .collect();
        DuffingRuns {
            rows,
            elapsed: start.elapsed(),
        }
    })
}

#[test]
fn criterion_06_near_optimal_against_exhaustive() {
    let runs = duffing_runs();
    let mut in_decile = 0;
    let mut never_above_median = true;
    let mut parts = Vec::new();
    for row in &runs.rows {
        let e = row.primary.error;
        let q10 = row.dist.quantile(0.1);
        let median = row.dist.quantile(0.5);
        if e <= q10 {
            in_decile += 1;
        }
        never_above_median &= e <= median;
        parts.push(format!("M={} e={:.4e} q10={:.4e} med={:.4e}", row.m, e, q10, median));
    }
    let pass = in_decile >= 3 && never_above_median && runs.elapsed < Duration::from_secs(30 * 60);
    report(
        6,
        "near-optimal selections vs exhaustive search, Duffing N=10",
        pass,
        &format!(
            "{in_decile}/4 in lowest decile, never above median: {never_above_median}; {}; {:.0}s",
            parts.join("; "),
            runs.elapsed.as_secs_f64()
        ),
    );
}

struct MemoryRow {
    m: usize,
    primary: MinoResult,
    dist: BaselineDistribution,
}

fn memory_runs() -> &'static (Vec<MemoryRow>, Duration) {
    static RUNS: OnceLock<(Vec<MemoryRow>, Duration)> = OnceLock::new();
    RUNS.get_or_init(|| {
        let start = Instant::now();
        let rows = [10, 15, 20]
            .into_iter()
            .map(|m| {
                let exp = ExperimentSpec::memory_n25().with_budget(Budget::exactly(m)).resolve().unwrap();
                MemoryRow {
                    m,
                    primary: algorithm1(&exp).unwrap(),
                    dist: random_baseline(&exp, m, 1000).unwrap(),
                }
            })
            .collect();
        (rows, start.elapsed())
    })
}

#[test]
fn criterion_07_dominates_random_selection() {
    let (rows, elapsed) = memory_runs();
    let mut pass = *elapsed < Duration::from_secs(15 * 60);
    let mut parts = Vec::new();
    for row in rows {
        let q10 = row.dist.quantile(0.1);
        pass &= row.primary.error < q10;
        parts.push(format!("M={} e={:.4e} q10={:.4e}", row.m, row.primary.error, q10));
    }
    report(
        7,
        "beats 90% of 1000 random selections, memory N=25",
        pass,
        &format!("{}; {:.0}s", parts.join("; "), elapsed.as_secs_f64()),
    );
}

#[test]
fn criterion_08_one_step_settling() {
    let exp = ExperimentSpec::memory_n25().resolve().unwrap();
    let result = algorithm1(&exp).unwrap();
    let curve = error_vs_steps(&result, &exp).unwrap();
    let (e2, et) = (curve[2], curve[exp.spec.horizon]);
    let rel = (e2 - et).abs() / et;
    report(
        8,
        "error settles after one step, memory N=25",
        rel <= 0.05,
        &format!("e_2={e2:.4e}, e_T={et:.4e}, relative gap {rel:.3e} (<= 0.05)"),
    );
}

fn slack_run(nodes: usize, max: usize, count: usize, limit: Duration, id: u32, name: &str) {
    let start = Instant::now();
    let mut spec = ExperimentSpec::duffing_n60().with_budget(Budget::at_most(max));
    spec.model = ModelSpec::Duffing { nodes };
    let exp = spec.resolve().unwrap();
    let result = algorithm1(&exp).unwrap();
    let m = result.selection.count();
    let dist = random_baseline(&exp, m, count).unwrap();
    let q05 = dist.quantile(0.05);
    let elapsed = start.elapsed();
    report(
        id,
        name,
        m <= max && result.error < q05 && elapsed < limit,
        &format!(
            "selected {m} of at most {max}, e={:.4e}, random q05={q05:.4e}, {:.0}s",
            result.error,
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_09_budget_slack_reduced() {
    slack_run(
        20,
        10,
        100,
        Duration::from_secs(20 * 60),
        9,
        "at-most budget, Duffing N=20, M_max=10, 100 random",
    );
}

#[test]
#[ignore = "several hours on one core; run with --ignored"]
fn criterion_09_budget_slack_full() {
    slack_run(
        60,
        30,
        500,
        Duration::from_secs(4 * 3600),
        9,
        "at-most budget, Duffing N=60, M_max=30, 500 random",
    );
}

#[test]
fn criterion_10_exhaustive_lower_bound() {
    let runs = duffing_runs();
    let mut pass = true;
    let mut parts = Vec::new();
    for row in &runs.rows {
        let min = row.dist.min_error();
        pass &= min <= row.primary.error + 1e-9 && min <= row.comparison.error + 1e-9;
        parts.push(format!(
            "M={} min={:.6e} search={:.6e} relax={:.6e}",
            row.m, min, row.primary.error, row.comparison.error
        ));
    }
    report(10, "exhaustive minimum bounds both methods", pass, &parts.join("; "));
}

fn bundle_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_11_end_to_end_determinism() {
    let config = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/duffing-n10.cfg");
    let tmp = tempfile::tempdir().unwrap();
    let mut bundles = Vec::new();
    for name in ["first", "second"] {
        let out = tmp.path().join(name);
        run(&RunConfig {
            command: Command::Figure,
            config: config.clone(),
            seed: Some(1),
            out: out.clone(),
            workers: None,
            force: false,
        })
        .unwrap();
        bundles.push(bundle_files(&out));
    }
    let names: Vec<&str> = bundles[0].iter().map(|(n, _)| n.as_str()).collect();
    let identical = bundles[0] == bundles[1];
    let has_csv = names.iter().filter(|n| n.ends_with(".csv")).count() >= 5;
    report(
        11,
        "identical bundles from identical config and seed",
        identical && has_csv,
        &format!("files {names:?}, byte-identical: {identical}"),
    );
}
