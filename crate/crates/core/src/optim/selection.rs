//! Binary selections, budgets and exact L1 rounding of relaxed selections.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BudgetMode {
    /// `Σπ ≤ M_max`.
    AtMost,
    /// `Σπ = M_max`.
    Exactly,
}

impl BudgetMode {
    pub fn name(self) -> &'static str {
        match self {
            BudgetMode::AtMost => "at_most",
            BudgetMode::Exactly => "exactly",
        }
    }
}

impl std::str::FromStr for BudgetMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "at_most" | "atmost" => Ok(BudgetMode::AtMost),
            "exactly" => Ok(BudgetMode::Exactly),
            other => Err(Error::invalid(format!("unknown budget mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Budget {
    pub max: usize,
    pub mode: BudgetMode,
}

impl Budget {
    pub fn at_most(max: usize) -> Self {
        Self {
            max,
            mode: BudgetMode::AtMost,
        }
    }

    pub fn exactly(count: usize) -> Self {
        Self {
            max: count,
            mode: BudgetMode::Exactly,
        }
    }

    pub fn admits(&self, active: usize) -> bool {
        match self.mode {
            BudgetMode::AtMost => active <= self.max,
            BudgetMode::Exactly => active == self.max,
        }
    }

    pub fn validate(&self, node_count: usize) -> Result<()> {
        if self.max > node_count {
            return Err(Error::InfeasibleBudget(format!(
                "budget {} exceeds the {} available nodes",
                self.max, node_count
            )));
        }
        if self.max == 0 {
            return Err(Error::InfeasibleBudget("budget must allow at least one node".into()));
        }
        Ok(())
    }
}

/// Which nodes receive an input.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Selection {
    pi: Vec<bool>,
}

impl Selection {
    pub fn new(pi: Vec<bool>) -> Self {
        Self { pi }
    }

    pub fn all(node_count: usize) -> Self {
        Self {
            pi: vec![true; node_count],
        }
    }

    pub fn from_nodes(node_count: usize, nodes: &[usize]) -> Result<Self> {
        let mut pi = vec![false; node_count];
        for &i in nodes {
            if i >= node_count {
                return Err(Error::invalid(format!("node {i} out of range for {node_count} nodes")));
            }
            pi[i] = true;
        }
        Ok(Self { pi })
    }

    /// Parses a `0`/`1` string such as `0110`.
    pub fn parse_bits(bits: &str) -> Result<Self> {
        bits.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::invalid(format!("invalid selection character `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn pi(&self) -> &[bool] {
        &self.pi
    }

    pub fn node_count(&self) -> usize {
        self.pi.len()
    }

    pub fn count(&self) -> usize {
        self.pi.iter().filter(|&&p| p).count()
    }

    pub fn active_nodes(&self) -> Vec<usize> {
        (0..self.pi.len()).filter(|&i| self.pi[i]).collect()
    }

    pub fn bitstring(&self) -> String {
        self.pi.iter().map(|&p| if p { '1' } else { '0' }).collect()
    }

    pub fn toggled(&self, i: usize) -> Self {
        let mut pi = self.pi.clone();
        pi[i] = !pi[i];
        Self { pi }
    }

    pub fn swapped(&self, off: usize, on: usize) -> Self {
        let mut pi = self.pi.clone();
        pi[off] = false;
        pi[on] = true;
        Self { pi }
    }

    pub fn is_feasible(&self, budget: &Budget) -> bool {
        budget.admits(self.count())
    }

    /// `Σ |π_i − α_i|`.
    pub fn l1_distance(&self, alpha: &[f64]) -> f64 {
        self.pi
            .iter()
            .zip(alpha)
            .map(|(&p, &a)| (if p { 1.0 } else { 0.0 } - a).abs())
            .sum()
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.bitstring())
    }
}

/// Closest feasible selection to `alpha` in the L1 sense.
///
/// Switching node `i` on changes the distance by `1 − 2α_i`, so the optimum
/// takes the largest entries: all of the top `M_max` with `α_i > 0.5`
/// under `AtMost`, exactly the top `M_max` under `Exactly`. Equal entries
/// are ordered by index.
pub fn round_selection(alpha: &[f64], budget: &Budget) -> Result<Selection> {
    if alpha.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return Err(Error::invalid("relaxed selection must lie in [0, 1]"));
    }
    if budget.max > alpha.len() {
        return Err(Error::InfeasibleBudget(format!(
            "budget {} exceeds the {} available nodes",
            budget.max,
            alpha.len()
        )));
    }
    let mut order: Vec<usize> = (0..alpha.len()).collect();
    order.sort_by(|&a, &b| alpha[b].total_cmp(&alpha[a]).then(a.cmp(&b)));
    let mut pi = vec![false; alpha.len()];
    for &i in order.iter().take(budget.max) {
        if budget.mode == BudgetMode::Exactly || alpha[i] > 0.5 {
            pi[i] = true;
        }
    }
    Ok(Selection::new(pi))
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(alpha: &[f64], budget: &Budget) -> f64 {
        let n = alpha.len();
        (0u32..1 << n)
            .map(|mask| Selection::new((0..n).map(|i| mask >> i & 1 == 1).collect()))
            .filter(|s| s.is_feasible(budget))
            .map(|s| s.l1_distance(alpha))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn at_most_picks_largest_above_half() {
        let s = round_selection(&[0.9, 0.2, 0.6], &Budget::at_most(1)).unwrap();
        assert_eq!(s.pi(), &[true, false, false]);
        assert!((s.l1_distance(&[0.9, 0.2, 0.6]) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn at_most_may_select_nothing() {
        let s = round_selection(&[0.4, 0.3], &Budget::at_most(2)).unwrap();
        assert_eq!(s.count(), 0);
    }

    #[test]
    fn exactly_ignores_threshold() {
        let s = round_selection(&[0.4, 0.3], &Budget::exactly(1)).unwrap();
        assert_eq!(s.pi(), &[true, false]);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let s = round_selection(&[0.7, 0.7, 0.7], &Budget::exactly(2)).unwrap();
        assert_eq!(s.bitstring(), "110");
        let s = round_selection(&[0.5, 0.5], &Budget::at_most(2)).unwrap();
        assert_eq!(s.count(), 0);
    }

    #[test]
    fn binary_alpha_rounds_to_itself() {
        let alpha = [1.0, 0.0, 1.0, 0.0];
        let s = round_selection(&alpha, &Budget::at_most(2)).unwrap();
        assert_eq!(s.bitstring(), "1010");
    }

    #[test]
    fn rejects_out_of_box() {
        assert!(round_selection(&[1.5], &Budget::at_most(1)).is_err());
        assert!(round_selection(&[0.5], &Budget::exactly(2)).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 2), 45);
        assert_eq!(binomial(10, 4), 210);
        assert_eq!(binomial(10, 8), 45);
        assert_eq!(binomial(60, 30), 118264581564861424);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(0, 0), 1);
    }

    #[test]
    fn bit_roundtrip() {
        let s = Selection::parse_bits("10011").unwrap();
        assert_eq!(s.active_nodes(), vec![0, 3, 4]);
        assert_eq!(s.to_string(), "10011");
        assert!(Selection::parse_bits("10a").is_err());
        assert_eq!(s.swapped(0, 1).bitstring(), "01011");
        assert_eq!(s.toggled(2).bitstring(), "10111");
    }

    #[test]
    fn budget_validation() {
        assert!(Budget::exactly(11).validate(10).is_err());
        assert!(Budget::at_most(0).validate(10).is_err());
        assert!(Budget::at_most(10).validate(10).is_ok());
        assert_eq!("exactly".parse::<BudgetMode>().unwrap(), BudgetMode::Exactly);
        assert!("some".parse::<BudgetMode>().is_err());
    }

    proptest! {
        #[test]
        fn rounding_matches_enumeration(
            alpha in prop::collection::vec(0.0f64..=1.0, 1..=10),
            m in 0usize..=10,
            exact in any::<bool>(),
        ) {
            let m = m.min(alpha.len());
            let budget = if exact { Budget::exactly(m) } else { Budget::at_most(m) };
            let s = round_selection(&alpha, &budget).unwrap();
            prop_assert!(s.is_feasible(&budget));
            let best = brute_force(&alpha, &budget);
            prop_assert!((s.l1_distance(&alpha) - best).abs() < 1e-12);
        }
    }
}
