use nalgebra::{DMatrix, DVector};

use super::NetworkModel;
use crate::error::{Error, Result};

/// Linear drift `f(x) = A x`.
#[derive(Debug, Clone)]
pub struct LinearNetwork {
    a: DMatrix<f64>,
    node_dim: usize,
}

impl LinearNetwork {
    pub fn new(a: DMatrix<f64>, node_dim: usize) -> Result<Self> {
        if !a.is_square() || node_dim == 0 || a.nrows() % node_dim != 0 || a.nrows() == 0 {
            return Err(Error::invalid("A must be square with a multiple of node_dim rows"));
        }
        Ok(Self { a, node_dim })
    }

    /// Scalar nodes with `f(x) = λ x`.
    pub fn scalar(lambda: f64) -> Self {
        Self {
            a: DMatrix::from_element(1, 1, lambda),
            node_dim: 1,
        }
    }

    /// `f ≡ 0` on `nodes` nodes of dimension `node_dim`.
    pub fn zero(nodes: usize, node_dim: usize) -> Self {
        Self {
            a: DMatrix::zeros(nodes * node_dim, nodes * node_dim),
            node_dim,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }
}

impl NetworkModel for LinearNetwork {
    fn node_count(&self) -> usize {
        self.a.nrows() / self.node_dim
    }

    fn node_dim(&self) -> usize {
        self.node_dim
    }

    fn drift_into(&self, x: &DVector<f64>, out: &mut DVector<f64>) {
        self.a.mul_to(x, out);
    }

    fn jacobian_into(&self, _x: &DVector<f64>, out: &mut DMatrix<f64>) {
        out.copy_from(&self.a);
    }
}
