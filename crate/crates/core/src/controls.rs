//! Control sequences and the way they enter the network.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Stacked inputs `c_0, …, c_T` on a horizon of `T` steps, stored row-major
/// with one row per time step.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSequence {
    rows: usize,
    width: usize,
    data: Vec<f64>,
}

impl ControlSequence {
    /// All-zero sequence with `horizon + 1` rows.
    pub fn zeros(horizon: usize, width: usize) -> Self {
        Self {
            rows: horizon + 1,
            width,
            data: vec![0.0; (horizon + 1) * width],
        }
    }

    /// Builds a sequence from a flat row-major buffer of `(horizon + 1) * width`
    /// entries.
    pub fn from_flat(horizon: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != (horizon + 1) * width {
            return Err(Error::invalid(format!(
                "control buffer has {} entries, expected {}",
                data.len(),
                (horizon + 1) * width
            )));
        }
        Ok(Self {
            rows: horizon + 1,
            width,
            data,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if rows.is_empty() {
            return Err(Error::invalid("control sequence needs at least one row"));
        }
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::invalid("control rows have unequal widths"));
        }
        Ok(Self {
            rows: rows.len(),
            width,
            data: rows.concat(),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of rows, `T + 1`.
    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    /// Number of steps `T`.
    pub fn horizon(&self) -> usize {
        self.rows.saturating_sub(1)
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.width..(k + 1) * self.width]
    }

    pub fn row_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.data[k * self.width..(k + 1) * self.width]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Scatters the columns of a reduced sequence onto `nodes` of a width-`n`
    /// sequence; every other column is zero.
    pub fn expand(&self, nodes: &[usize], n: usize) -> Self {
        debug_assert_eq!(nodes.len(), self.width);
        let rows = self.rows;
        let mut out = Self::zeros(self.horizon(), n);
        for k in 0..rows {
            let src = self.row(k);
            let dst = out.row_mut(k);
            for (j, &node) in nodes.iter().enumerate() {
                dst[node] = src[j];
            }
        }
        out
    }

    /// Gathers the columns `nodes` into a reduced sequence.
    pub fn restrict(&self, nodes: &[usize]) -> Self {
        let rows = self.rows;
        let mut out = Self::zeros(self.horizon(), nodes.len());
        for k in 0..rows {
            let src = self.row(k);
            let dst = out.row_mut(k);
            for (j, &node) in nodes.iter().enumerate() {
                dst[j] = src[node];
            }
        }
        out
    }
}

/// How a control row enters the network: column `j` of the input drives the
/// last state coordinate of node `nodes[j]` with gain `weights[j]`.
///
/// The same description covers the parametrized input `B(π) z` (all nodes,
/// gains π), the relaxed input `B(α) z` (all nodes, gains α) and the reduced
/// input `B̂ u` (selected nodes, unit gains).
#[derive(Debug, Clone, PartialEq)]
pub struct Actuation {
    nodes: Vec<usize>,
    weights: Vec<f64>,
}

impl Actuation {
    /// Parametrized actuation `B(π)` over all nodes.
    pub fn selection(pi: &[bool]) -> Self {
        Self {
            nodes: (0..pi.len()).collect(),
            weights: pi.iter().map(|&p| if p { 1.0 } else { 0.0 }).collect(),
        }
    }

    /// Relaxed actuation `B(α)` with continuous gains.
    pub fn relaxed(alpha: &[f64]) -> Self {
        Self {
            nodes: (0..alpha.len()).collect(),
            weights: alpha.to_vec(),
        }
    }

    /// Reduced actuation `B̂` driving only `nodes`.
    pub fn reduced(nodes: Vec<usize>) -> Self {
        let weights = vec![1.0; nodes.len()];
        Self { nodes, weights }
    }

    pub fn width(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn check(&self, node_count: usize) -> Result<()> {
        if let Some(&bad) = self.nodes.iter().find(|&&i| i >= node_count) {
            return Err(Error::invalid(format!(
                "actuated node {bad} out of range for {node_count} nodes"
            )));
        }
        Ok(())
    }

    /// Row index of the state coordinate driven by node `node`.
    #[inline]
    pub fn driven_row(node: usize, node_dim: usize) -> usize {
        node * node_dim + node_dim - 1
    }

    /// Adds `scale * B c` into `out`.
    pub fn add_drive(&self, node_dim: usize, c: &[f64], scale: f64, out: &mut DVector<f64>) {
        for ((&node, &w), &cj) in self.nodes.iter().zip(&self.weights).zip(c) {
            out[Self::driven_row(node, node_dim)] += scale * w * cj;
        }
    }

    /// Dense actuation matrix, `node_count * node_dim` by `width`.
    pub fn matrix(&self, node_count: usize, node_dim: usize) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(node_count * node_dim, self.width());
        for (j, (&node, &w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            b[(Self::driven_row(node, node_dim), j)] = w;
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expand_then_restrict_is_identity() {
        let u = ControlSequence::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let z = u.expand(&[3, 1], 5);
        assert_eq!(z.row(0), &[0.0, 2.0, 0.0, 1.0, 0.0]);
        assert_eq!(z.restrict(&[3, 1]), u);
    }

    #[test]
    fn selection_matrix_blocks() {
        let b = Actuation::selection(&[true, false, true]).matrix(3, 2);
        assert_eq!(b.shape(), (6, 3));
        assert_eq!(b[(1, 0)], 1.0);
        assert_eq!(b[(0, 0)], 0.0);
        assert!(b.column(1).iter().all(|&v| v == 0.0));
        assert_eq!(b[(5, 2)], 1.0);
    }

    #[test]
    fn scalar_nodes_give_diagonal() {
        let pi = [true, false, true, true];
        let b = Actuation::selection(&pi).matrix(4, 1);
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0, 1.0, 1.0]));
        assert_eq!(b, expected);
    }

    #[test]
    fn zero_width_keeps_horizon() {
        let c = ControlSequence::zeros(4, 0);
        assert_eq!(c.len(), 5);
        assert_eq!(c.horizon(), 4);
        assert_eq!(c.expand(&[], 3).len(), 5);
    }

    #[test]
    fn rejects_wrong_buffer() {
        assert!(ControlSequence::from_flat(2, 2, vec![0.0; 5]).is_err());
    }
}
