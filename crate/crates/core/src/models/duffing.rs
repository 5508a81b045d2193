//! Duffing oscillators joined by nonlinear spring-damper links.
//!
//! Node `i` has position `x[2i]` and velocity `x[2i + 1]`:
//!
//! ```text
//! ẋ_i1 = x_i2
//! ẋ_i2 = −α_ii x_i1 + β_ii x_i1³ − γ_ii x_i2
//!        − Σ_j α_ij (x_i1 − x_j1) + Σ_j β_ij (x_i1 − x_j1)³ − Σ_j γ_ij (x_i2 − x_j2)
//! ```
//!
//! The cubic terms make the springs softening.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::graph::Graph;
use super::NetworkModel;
use crate::error::{Error, Result};
use crate::rng::indexed_rng;

/// Sampling intervals for the spring, cubic spring and damping constants.
///
/// The same intervals are used for the self terms and the couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamRanges {
    pub alpha: (f64, f64),
    pub beta: (f64, f64),
    pub gamma: (f64, f64),
}

impl Default for ParamRanges {
    fn default() -> Self {
        Self {
            alpha: (10.0, 20.0),
            beta: (1.0, 2.0),
            gamma: (1.0, 2.0),
        }
    }
}

impl ParamRanges {
    fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::invalid(format!("bad {name} range [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

/// Symmetric link between nodes `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DuffingParams {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub couplings: Vec<Coupling>,
}

impl DuffingParams {
    pub fn node_count(&self) -> usize {
        self.alpha.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.node_count();
        if n == 0 || self.beta.len() != n || self.gamma.len() != n {
            return Err(Error::invalid("self-parameter vectors must share a nonzero length"));
        }
        for c in &self.couplings {
            if c.i == c.j || c.i >= n || c.j >= n {
                return Err(Error::invalid(format!("bad coupling ({}, {})", c.i, c.j)));
            }
        }
        Ok(())
    }

    /// Relabels node `i` as `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.node_count();
        let mut check = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut check[p], true)) {
            return Err(Error::invalid("not a permutation"));
        }
        let mut out = self.clone();
        for i in 0..n {
            out.alpha[perm[i]] = self.alpha[i];
            out.beta[perm[i]] = self.beta[i];
            out.gamma[perm[i]] = self.gamma[i];
        }
        for c in &mut out.couplings {
            let (a, b) = (perm[c.i], perm[c.j]);
            c.i = a.min(b);
            c.j = a.max(b);
        }
        Ok(out)
    }
}

/// Draws all constants uniformly from the default [`ParamRanges`].
pub fn sample_duffing(graph: &Graph, seed: u64) -> DuffingParams {
    sample_duffing_with(graph, &ParamRanges::default(), seed)
        .expect("default ranges are valid")
}

/// Draws self terms node by node, then one set of coupling constants per
/// undirected edge in edge-list order.
pub fn sample_duffing_with(graph: &Graph, ranges: &ParamRanges, seed: u64) -> Result<DuffingParams> {
    ranges.validate()?;
    let mut rng = indexed_rng(seed, 0);
    let mut draw = |(lo, hi): (f64, f64)| lo + (hi - lo) * rng.random::<f64>();
    let n = graph.node_count();
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    let mut gamma = Vec::with_capacity(n);
    for _ in 0..n {
        alpha.push(draw(ranges.alpha));
        beta.push(draw(ranges.beta));
        gamma.push(draw(ranges.gamma));
    }
    let couplings = graph
        .edges()
        .iter()
        .map(|&(i, j)| Coupling {
            i: i.min(j),
            j: i.max(j),
            alpha: draw(ranges.alpha),
            beta: draw(ranges.beta),
            gamma: draw(ranges.gamma),
        })
        .collect();
    Ok(DuffingParams {
        alpha,
        beta,
        gamma,
        couplings,
    })
}

#[derive(Debug, Clone)]
pub struct DuffingNetwork {
    params: DuffingParams,
}

pub fn duffing_model(params: DuffingParams) -> Result<DuffingNetwork> {
    params.validate()?;
    Ok(DuffingNetwork { params })
}

impl DuffingNetwork {
    pub fn params(&self) -> &DuffingParams {
        &self.params
    }
}

impl NetworkModel for DuffingNetwork {
    fn node_count(&self) -> usize {
        self.params.node_count()
    }

    fn node_dim(&self) -> usize {
        2
    }

    fn drift_into(&self, x: &DVector<f64>, out: &mut DVector<f64>) {
        let p = &self.params;
        for i in 0..p.node_count() {
            let (pos, vel) = (x[2 * i], x[2 * i + 1]);
            out[2 * i] = vel;
            out[2 * i + 1] = -p.alpha[i] * pos + p.beta[i] * pos.powi(3) - p.gamma[i] * vel;
        }
        for c in &p.couplings {
            let d = x[2 * c.i] - x[2 * c.j];
            let dv = x[2 * c.i + 1] - x[2 * c.j + 1];
            let force = -c.alpha * d + c.beta * d.powi(3) - c.gamma * dv;
            out[2 * c.i + 1] += force;
            out[2 * c.j + 1] -= force;
        }
    }

    fn jacobian_into(&self, x: &DVector<f64>, out: &mut DMatrix<f64>) {
        let p = &self.params;
        out.fill(0.0);
        for i in 0..p.node_count() {
            let pos = x[2 * i];
            out[(2 * i, 2 * i + 1)] = 1.0;
            out[(2 * i + 1, 2 * i)] = -p.alpha[i] + 3.0 * p.beta[i] * pos * pos;
            out[(2 * i + 1, 2 * i + 1)] = -p.gamma[i];
        }
        for c in &p.couplings {
            let d = x[2 * c.i] - x[2 * c.j];
            let k = -c.alpha + 3.0 * c.beta * d * d;
            let (ri, rj) = (2 * c.i + 1, 2 * c.j + 1);
            let (pi, pj) = (2 * c.i, 2 * c.j);
            out[(ri, pi)] += k;
            out[(ri, pj)] -= k;
            out[(ri, ri)] -= c.gamma;
            out[(ri, rj)] += c.gamma;
            out[(rj, pi)] -= k;
            out[(rj, pj)] += k;
            out[(rj, ri)] += c.gamma;
            out[(rj, rj)] -= c.gamma;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::graph::grg_graph;
    use crate::models::testing::{fd_jacobian, max_rel_error};
    use rand::SeedableRng;

    fn network(seed: u64) -> DuffingNetwork {
        let g = grg_graph(10, seed).unwrap();
        duffing_model(sample_duffing(&g, seed)).unwrap()
    }

    #[test]
    fn origin_is_equilibrium() {
        let m = network(1);
        assert!(m.drift(&DVector::zeros(20)).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_linear_spring() {
        let params = DuffingParams {
            alpha: vec![1.0],
            beta: vec![0.0],
            gamma: vec![0.0],
            couplings: vec![],
        };
        let m = duffing_model(params).unwrap();
        let f = m.drift(&DVector::from_vec(vec![1.0, 0.0]));
        assert_eq!(f.as_slice(), &[0.0, -1.0]);
    }

    #[test]
    fn samples_stay_in_ranges() {
        for seed in 0..20 {
            let g = grg_graph(12, seed).unwrap();
            let p = sample_duffing(&g, seed);
            let all_alpha = p.alpha.iter().chain(p.couplings.iter().map(|c| &c.alpha));
            assert!(all_alpha.into_iter().all(|&a| (10.0..=20.0).contains(&a)));
            let rest = p
                .beta
                .iter()
                .chain(&p.gamma)
                .copied()
                .chain(p.couplings.iter().flat_map(|c| [c.beta, c.gamma]));
            assert!(rest.into_iter().all(|b| (1.0..=2.0).contains(&b)));
            assert_eq!(p.couplings.len(), g.edges().len());
        }
    }

    #[test]
    fn empty_graph_has_only_self_terms() {
        let g = Graph::from_coords(vec![[0.0, 0.0], [1.0, 1.0]], 0.1);
        let p = sample_duffing(&g, 3);
        assert!(p.couplings.is_empty());
        assert_eq!(p.alpha.len(), 2);
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = grg_graph(10, 7).unwrap();
        assert_eq!(sample_duffing(&g, 7), sample_duffing(&g, 7));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let m = network(3);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = DVector::from_fn(20, |_, _| rng.random_range(-1.0..1.0));
            let err = max_rel_error(&m.jacobian(&x), &fd_jacobian(&m, &x, 1e-6));
            assert!(err < 1e-6, "{err}");
        }
    }

    #[test]
    fn odd_without_cubic_terms() {
        let g = grg_graph(10, 5).unwrap();
        let mut p = sample_duffing(&g, 5);
        p.beta.iter_mut().for_each(|b| *b = 0.0);
        p.couplings.iter_mut().for_each(|c| c.beta = 0.0);
        let m = duffing_model(p).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let x = DVector::from_fn(20, |_, _| rng.random_range(-1.0..1.0));
        let fp = m.drift(&x);
        let fm = m.drift(&(-&x));
        assert!((fp + fm).amax() < 1e-12);
    }

    #[test]
    fn permutation_relabels_dynamics() {
        let m = network(11);
        let perm: Vec<usize> = (0..10).rev().collect();
        let pm = duffing_model(m.params().permuted(&perm).unwrap()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let x = DVector::from_fn(20, |_, _| rng.random_range(-1.0..1.0));
        let mut xp = DVector::zeros(20);
        for i in 0..10 {
            xp[2 * perm[i]] = x[2 * i];
            xp[2 * perm[i] + 1] = x[2 * i + 1];
        }
        let f = m.drift(&x);
        let fp = pm.drift(&xp);
        for i in 0..10 {
            assert!((f[2 * i + 1] - fp[2 * perm[i] + 1]).abs() < 1e-12);
        }
    }
}
