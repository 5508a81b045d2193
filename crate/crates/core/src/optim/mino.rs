//! Mixed-variable local search over selections.
//!
//! The discrete variable is polled without derivatives: every neighbor of
//! the incumbent selection (single flips that respect the budget, and swaps
//! of one active for one inactive node) is scored by solving the control
//! NLP for that selection, warm-started from the incumbent controls. The
//! best neighbor is accepted when it lowers `J` by more than a relative
//! threshold. Candidates within a round are solved in parallel and compared
//! in a fixed order, so results do not depend on scheduling.
//!
//! A start that violates the budget (typically all nodes on) first goes
//! through a reduction phase: the best single deactivation is accepted each
//! round, improving or not, until the budget holds.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::controls::{Actuation, ControlSequence};
use crate::error::{Error, Result};

use super::control::{ControlProblem, ControlSolution};
use super::lbfgs::NlpOptions;
use super::selection::{Budget, BudgetMode, Selection};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinoOptions {
    pub max_poll_rounds: usize,
    /// Inner solver settings for candidate scoring.
    pub inner: NlpOptions,
    /// Settings of the closing solve at the returned selection.
    pub polish: NlpOptions,
    /// Relative decrease of `J` a neighbor must achieve to be accepted.
    pub min_improvement: f64,
}

impl Default for MinoOptions {
    fn default() -> Self {
        Self {
            max_poll_rounds: 50,
            inner: NlpOptions::default().with_tolerance(1e-6, 100),
            polish: NlpOptions::default().with_tolerance(1e-10, 2000),
            min_improvement: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub round: usize,
    pub selection: Selection,
    /// `+∞` when the inner solve failed.
    pub objective: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinoResult {
    pub selection: Selection,
    /// Controls of the active nodes only, in node order.
    pub controls: ControlSequence,
    pub objective: f64,
    pub error: f64,
    /// Objective evaluations summed over all inner solves.
    pub evaluations: usize,
    pub poll_rounds: usize,
    pub trace: Vec<TraceEntry>,
}

impl MinoResult {
    /// Actuation matching `controls`.
    pub fn actuation(&self) -> Actuation {
        Actuation::reduced(self.selection.active_nodes())
    }

    /// CSV `poll_round,candidate_pi_bitstring,inner_J,accepted`.
    pub fn write_trace<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "poll_round,candidate_pi_bitstring,inner_J,accepted")?;
        for t in &self.trace {
            writeln!(out, "{},{},{:.16e},{}", t.round, t.selection, t.objective, u8::from(t.accepted))?;
        }
        Ok(())
    }
}

struct Scored {
    selection: Selection,
    solution: Option<ControlSolution>,
}

impl Scored {
    fn objective(&self) -> f64 {
        self.solution.as_ref().map_or(f64::INFINITY, |s| s.objective)
    }
}

/// Full-width warm start mapped onto `selection`: shared columns are kept,
/// newly active ones start at zero.
fn warm_start(full: &ControlSequence, selection: &Selection) -> ControlSequence {
    full.restrict(&selection.active_nodes())
}

fn score(problem: &ControlProblem<'_>, selection: Selection, full: &ControlSequence, options: &NlpOptions) -> Scored {
    let init = warm_start(full, &selection);
    let actuation = Actuation::reduced(selection.active_nodes());
    let solution = problem
        .solve(&actuation, &init, options)
        .ok()
        .filter(|s| s.objective.is_finite());
    Scored { selection, solution }
}

fn neighbors(current: &Selection, budget: &Budget, reducing: bool) -> Vec<Selection> {
    let n = current.node_count();
    let count = current.count();
    let active = current.active_nodes();
    if reducing {
        return active.iter().map(|&i| current.toggled(i)).collect();
    }
    let mut out = Vec::new();
    if budget.mode == BudgetMode::AtMost {
        for i in 0..n {
            let flipped = current.toggled(i);
            if flipped.count() > 0 && flipped.is_feasible(budget) {
                out.push(flipped);
            }
        }
    }
    let inactive: Vec<usize> = (0..n).filter(|&i| !current.pi()[i]).collect();
    if count > 0 {
        for &off in &active {
            for &on in &inactive {
                out.push(current.swapped(off, on));
            }
        }
    }
    out
}

/// Searches for a selection within `budget` with low optimal cost.
///
/// `init_controls` is full width (one column per node); entries of inactive
/// nodes are ignored.
pub fn mino_search(
    problem: &ControlProblem<'_>,
    budget: &Budget,
    init_selection: &Selection,
    init_controls: &ControlSequence,
    options: &MinoOptions,
) -> Result<MinoResult> {
    let n = problem.node_count();
    budget.validate(n)?;
    if init_selection.node_count() != n {
        return Err(Error::invalid("initial selection has the wrong length"));
    }
    if init_controls.width() != n || init_controls.horizon() != problem.horizon() {
        return Err(Error::invalid("initial controls must be full width over the horizon"));
    }
    let feasible_start = init_selection.is_feasible(budget);
    if !feasible_start && init_selection.count() < budget.max {
        return Err(Error::InfeasibleBudget(format!(
            "initial selection has {} nodes, budget requires {}",
            init_selection.count(),
            budget.max
        )));
    }

    let mut trace = Vec::new();
    let mut evaluations = 0;
    let mut incumbent = score(problem, init_selection.clone(), init_controls, &options.inner);
    evaluations += incumbent.solution.as_ref().map_or(0, |s| s.nlp.evaluations);
    trace.push(TraceEntry {
        round: 0,
        selection: incumbent.selection.clone(),
        objective: incumbent.objective(),
        accepted: true,
    });
    let mut full = expand_incumbent(&incumbent, init_controls, n);

    let mut rounds = 0;
    while rounds < options.max_poll_rounds || !incumbent.selection.is_feasible(budget) {
        rounds += 1;
        let reducing = !incumbent.selection.is_feasible(budget);
        let candidates = neighbors(&incumbent.selection, budget, reducing);
        let scored: Vec<Scored> = candidates
            .into_par_iter()
            .map(|s| score(problem, s, &full, &options.inner))
            .collect();
        evaluations += scored
            .iter()
            .filter_map(|s| s.solution.as_ref())
            .map(|s| s.nlp.evaluations)
            .sum::<usize>();

        let best = scored
            .iter()
            .enumerate()
            .fold(None, |best: Option<(usize, f64)>, (i, s)| match best {
                Some((_, b)) if s.objective() >= b => best,
                _ => Some((i, s.objective())),
            });
        let threshold = incumbent.objective() - options.min_improvement * incumbent.objective().abs();
        let accept = match best {
            Some(_) if reducing => true,
            Some((_, j)) => j < threshold,
            None => false,
        };
        let accepted_index = if accept { best.map(|(i, _)| i) } else { None };
        for (i, s) in scored.iter().enumerate() {
            trace.push(TraceEntry {
                round: rounds,
                selection: s.selection.clone(),
                objective: s.objective(),
                accepted: Some(i) == accepted_index,
            });
        }
        match accepted_index {
            Some(i) => {
                incumbent = scored.into_iter().nth(i).expect("index from the same list");
                full = expand_incumbent(&incumbent, &full, n);
            }
            None => break,
        }
    }

    let selection = incumbent.selection.clone();
    let actuation = Actuation::reduced(selection.active_nodes());
    let init = warm_start(&full, &selection);
    let polished = problem.solve(&actuation, &init, &options.polish)?;
    evaluations += polished.nlp.evaluations;
    Ok(MinoResult {
        selection,
        controls: polished.controls,
        objective: polished.objective,
        error: polished.error,
        evaluations,
        poll_rounds: rounds,
        trace,
    })
}

fn expand_incumbent(incumbent: &Scored, fallback: &ControlSequence, n: usize) -> ControlSequence {
    match &incumbent.solution {
        Some(s) => s.controls.expand(&incumbent.selection.active_nodes(), n),
        None => fallback.restrict(&incumbent.selection.active_nodes()).expand(&incumbent.selection.active_nodes(), n),
    }
}
