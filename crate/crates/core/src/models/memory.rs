//! Oscillator associative memory:
//! `ẋ_i = Σ_j C_ij sin(x_j − x_i) + (ε/N) Σ_j sin 2(x_j − x_i)`.

use nalgebra::{DMatrix, DVector};

use super::NetworkModel;
use crate::error::{Error, Result};

/// Second-harmonic coupling strength used in the benchmark.
pub const DEFAULT_EPSILON: f64 = 0.8;

/// Hebb's rule `C_ij = (1/N) Σ_μ ξ_i^μ ξ_j^μ`.
pub fn hebb_weights(patterns: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = patterns
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::invalid("at least one pattern is required"))?;
    for (mu, p) in patterns.iter().enumerate() {
        if p.len() != n {
            return Err(Error::invalid(format!("pattern {mu} has length {}, expected {n}", p.len())));
        }
        if let Some(v) = p.iter().find(|&&v| v != 1.0 && v != -1.0) {
            return Err(Error::invalid(format!("pattern {mu} has non-±1 entry {v}")));
        }
    }
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let s: f64 = patterns.iter().map(|p| p[i] * p[j]).sum();
            c[(i, j)] = s / n as f64;
            c[(j, i)] = c[(i, j)];
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryParams {
    pub patterns: Vec<Vec<f64>>,
    pub coupling: DMatrix<f64>,
    pub epsilon: f64,
}

impl MemoryParams {
    /// Stores `patterns` with Hebbian couplings.
    pub fn new(patterns: Vec<Vec<f64>>, epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() {
            return Err(Error::invalid("epsilon must be finite"));
        }
        let coupling = hebb_weights(&patterns)?;
        Ok(Self {
            patterns,
            coupling,
            epsilon,
        })
    }
}

#[derive(Debug, Clone)]
pub struct MemoryNetwork {
    coupling: DMatrix<f64>,
    epsilon: f64,
}

pub fn memory_model(params: &MemoryParams) -> Result<MemoryNetwork> {
    MemoryNetwork::from_coupling(params.coupling.clone(), params.epsilon)
}

impl MemoryNetwork {
    /// Network with an arbitrary square coupling matrix.
    pub fn from_coupling(coupling: DMatrix<f64>, epsilon: f64) -> Result<Self> {
        if !coupling.is_square() || coupling.nrows() == 0 {
            return Err(Error::invalid("coupling matrix must be square and nonempty"));
        }
        Ok(Self { coupling, epsilon })
    }

    pub fn coupling(&self) -> &DMatrix<f64> {
        &self.coupling
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

impl NetworkModel for MemoryNetwork {
    fn node_count(&self) -> usize {
        self.coupling.nrows()
    }

    fn node_dim(&self) -> usize {
        1
    }

    fn drift_into(&self, x: &DVector<f64>, out: &mut DVector<f64>) {
        let n = self.node_count();
        let k2 = self.epsilon / n as f64;
        out.fill(0.0);
        for i in 0..n {
            for j in i + 1..n {
                let (s, c) = (x[j] - x[i]).sin_cos();
                let s2 = 2.0 * s * c;
                out[i] += self.coupling[(i, j)] * s + k2 * s2;
                out[j] -= self.coupling[(j, i)] * s + k2 * s2;
            }
        }
    }

    fn jacobian_into(&self, x: &DVector<f64>, out: &mut DMatrix<f64>) {
        let n = self.node_count();
        let k2 = 2.0 * self.epsilon / n as f64;
        out.fill(0.0);
        for i in 0..n {
            for j in i + 1..n {
                let (s, c) = (x[j] - x[i]).sin_cos();
                let c2 = 1.0 - 2.0 * s * s;
                let dij = self.coupling[(i, j)] * c + k2 * c2;
                let dji = self.coupling[(j, i)] * c + k2 * c2;
                out[(i, j)] = dij;
                out[(i, i)] -= dij;
                out[(j, i)] = dji;
                out[(j, j)] -= dji;
            }
        }
    }
}
