//! Network dynamics `ẋ = f(x) + B(π) z` and the benchmark networks.

use nalgebra::{DMatrix, DVector};

use crate::controls::Actuation;

mod duffing;
mod graph;
mod linear;
mod memory;
mod patterns;

pub use duffing::{duffing_model, sample_duffing, Coupling, DuffingNetwork, DuffingParams, ParamRanges};
pub use graph::{grg_graph, grg_radius, Graph, MAX_GRAPH_ATTEMPTS};
pub use linear::LinearNetwork;
pub use memory::{hebb_weights, memory_model, MemoryNetwork, MemoryParams, DEFAULT_EPSILON};
pub use patterns::{letter_pattern, letter_patterns, phase_encoding, PATTERN_SIDE};

/// Drift and Jacobian of a network of `N` nodes with `n` states each.
///
/// Implementations are pure functions of the state, so a model can be shared
/// read-only between threads. Each node receives one scalar input on its last
/// state coordinate.
pub trait NetworkModel: Send + Sync + std::fmt::Debug {
    fn node_count(&self) -> usize;

    fn node_dim(&self) -> usize;

    fn state_dim(&self) -> usize {
        self.node_count() * self.node_dim()
    }

    /// Writes `f(x)` into `out`.
    fn drift_into(&self, x: &DVector<f64>, out: &mut DVector<f64>);

    /// Writes `∂f/∂x` evaluated at `x` into `out` (every entry is overwritten).
    fn jacobian_into(&self, x: &DVector<f64>, out: &mut DMatrix<f64>);

    fn drift(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.state_dim());
        self.drift_into(x, &mut out);
        out
    }

    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let d = self.state_dim();
        let mut out = DMatrix::zeros(d, d);
        self.jacobian_into(x, &mut out);
        out
    }

    /// `B(π)`: block diagonal, block `i` is `col(0, …, 0, π_i)`.
    fn actuation_matrix(&self, pi: &[bool]) -> DMatrix<f64> {
        Actuation::selection(pi).matrix(self.node_count(), self.node_dim())
    }
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;

    /// Central finite-difference Jacobian.
    pub fn fd_jacobian(model: &dyn NetworkModel, x: &DVector<f64>, step: f64) -> DMatrix<f64> {
        let d = model.state_dim();
        let mut jac = DMatrix::zeros(d, d);
        for col in 0..d {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[col] += step;
            xm[col] -= step;
            let diff = (model.drift(&xp) - model.drift(&xm)) / (2.0 * step);
            jac.set_column(col, &diff);
        }
        jac
    }

    /// Largest entry-wise error with denominator `max(1, |fd|)`.
    pub fn max_rel_error(analytic: &DMatrix<f64>, fd: &DMatrix<f64>) -> f64 {
        analytic
            .iter()
            .zip(fd.iter())
            .map(|(a, f)| (a - f).abs() / f.abs().max(1.0))
            .fold(0.0, f64::max)
    }
}
