use std::collections::HashSet;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::controls::{Actuation, ControlSequence};
use crate::error::{Error, Result};
use crate::optim::{binomial, Selection};
use crate::rng::{stream_rng, Stream};

use super::spec::Experiment;

/// Largest number of selections [`exhaustive_baseline`] will enumerate.
pub const DEFAULT_EXHAUSTIVE_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMethod {
    Exhaustive,
    Random,
}

impl BaselineMethod {
    pub fn name(self) -> &'static str {
        match self {
            BaselineMethod::Exhaustive => "exhaustive",
            BaselineMethod::Random => "random",
        }
    }
}

/// Final control errors over a set of fixed selections.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineDistribution {
    pub method: BaselineMethod,
    pub selections: Vec<Selection>,
    pub objectives: Vec<f64>,
    /// `+∞` marks a selection whose control solve failed.
    pub errors: Vec<f64>,
}

impl BaselineDistribution {
    pub fn len(&self) -> usize {
        self.errors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn min_error(&self) -> f64 {
        self.errors.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Empirical quantile with linear interpolation between order statistics
    /// (`p = 0` is the minimum, `p = 1` the maximum).
    pub fn quantile(&self, p: f64) -> f64 {
        assert!(!self.is_empty(), "quantile of an empty distribution");
        let mut sorted = self.errors.clone();
        sorted.sort_by(f64::total_cmp);
        let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        if lo == hi {
            sorted[lo]
        } else {
            sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }

    /// Share of entries strictly below `value`.
    pub fn fraction_below(&self, value: f64) -> f64 {
        self.errors.iter().filter(|&&e| e < value).count() as f64 / self.len() as f64
    }

    /// CSV `index,pi,J,e`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "index,pi,J,e")?;
        for (i, ((s, j), e)) in self.selections.iter().zip(&self.objectives).zip(&self.errors).enumerate() {
            writeln!(out, "{i},{s},{j:.16e},{e:.16e}")?;
        }
        Ok(())
    }
}

fn evaluate_all(exp: &Experiment, method: BaselineMethod, node_sets: Vec<Vec<usize>>) -> BaselineDistribution {
    let problem = exp.problem();
    let options = exp.spec.solver.polish();
    let horizon = exp.spec.horizon;
    let n = exp.node_count();
    let scored: Vec<(Selection, f64, f64)> = node_sets
        .into_par_iter()
        .map(|nodes| {
            let selection = Selection::from_nodes(n, &nodes).expect("nodes in range");
            let init = ControlSequence::zeros(horizon, nodes.len());
            match problem.solve(&Actuation::reduced(nodes), &init, &options) {
                Ok(sol) => (selection, sol.objective, sol.error),
                Err(err) => {
                    log::warn!("control solve failed for {selection}: {err}");
                    (selection, f64::INFINITY, f64::INFINITY)
                }
            }
        })
        .collect();
    let mut dist = BaselineDistribution {
        method,
        selections: Vec::with_capacity(scored.len()),
        objectives: Vec::with_capacity(scored.len()),
        errors: Vec::with_capacity(scored.len()),
    };
    for (s, j, e) in scored {
        dist.selections.push(s);
        dist.objectives.push(j);
        dist.errors.push(e);
    }
    dist
}

/// Next `k`-subset of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let Some(i) = (0..k).rev().find(|&i| c[i] < n - k + i) else {
        return false;
    };
    c[i] += 1;
    for j in i + 1..k {
        c[j] = c[j - 1] + 1;
    }
    true
}

/// Solves the control problem for every selection of exactly `cardinality`
/// nodes, in lexicographic order of the node sets.
pub fn exhaustive_baseline(exp: &Experiment, cardinality: usize) -> Result<BaselineDistribution> {
    let n = exp.node_count();
    if cardinality == 0 || cardinality > n {
        return Err(Error::InfeasibleBudget(format!("cannot choose {cardinality} of {n} nodes")));
    }
    let total = binomial(n, cardinality);
    if total > exp.spec.exhaustive_cap {
        return Err(Error::CombinatorialCap {
            count: total,
            cap: exp.spec.exhaustive_cap,
        });
    }
    let mut sets = Vec::with_capacity(total as usize);
    let mut c: Vec<usize> = (0..cardinality).collect();
    loop {
        sets.push(c.clone());
        if !next_combination(&mut c, n) {
            break;
        }
    }
    Ok(evaluate_all(exp, BaselineMethod::Exhaustive, sets))
}

/// Solves the control problem for `count` uniformly drawn selections of
/// `cardinality` nodes. Draws are distinct while enough distinct selections
/// exist.
pub fn random_baseline(exp: &Experiment, cardinality: usize, count: usize) -> Result<BaselineDistribution> {
    let n = exp.node_count();
    if cardinality == 0 || cardinality > n {
        return Err(Error::InfeasibleBudget(format!("cannot choose {cardinality} of {n} nodes")));
    }
    if count == 0 {
        return Err(Error::invalid("random baseline needs at least one sample"));
    }
    let distinct = binomial(n, cardinality).min(count as u128) as usize;
    let mut rng = stream_rng(exp.spec.seed, Stream::Baseline);
    let mut seen = HashSet::with_capacity(distinct);
    let mut sets = Vec::with_capacity(count);
    while sets.len() < count {
        let mut nodes = rand::seq::index::sample(&mut rng, n, cardinality).into_vec();
        nodes.sort_unstable();
        if seen.len() < distinct {
            if seen.insert(nodes.clone()) {
                sets.push(nodes);
            }
        } else {
            sets.push(nodes);
        }
    }
    Ok(evaluate_all(exp, BaselineMethod::Random, sets))
}
