use std::collections::VecDeque;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::indexed_rng;

/// Regeneration attempts before [`grg_graph`] gives up.
pub const MAX_GRAPH_ATTEMPTS: usize = 1000;

/// Connection radius `sqrt(1.44 / N)` of the geometric random graph.
pub fn grg_radius(node_count: usize) -> f64 {
    (1.44 / node_count as f64).sqrt()
}

/// Undirected graph with its unit-square node positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    coords: Vec<[f64; 2]>,
    edges: Vec<(usize, usize)>,
    radius: f64,
}

impl Graph {
    /// Connects every pair of nodes closer than `radius` (strictly).
    ///
    /// Edges are listed as `(i, j)` with `i < j` in lexicographic order.
    pub fn from_coords(coords: Vec<[f64; 2]>, radius: f64) -> Self {
        let mut edges = Vec::new();
        for i in 0..coords.len() {
            for j in i + 1..coords.len() {
                let dx = coords[i][0] - coords[j][0];
                let dy = coords[i][1] - coords[j][1];
                if (dx * dx + dy * dy).sqrt() < radius {
                    edges.push((i, j));
                }
            }
        }
        Self {
            coords,
            edges,
            radius,
        }
    }

    /// Graph with an explicit edge list (no geometry check).
    pub fn from_edges(node_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for &(i, j) in &edges {
            if i == j || i >= node_count || j >= node_count {
                return Err(Error::invalid(format!("bad edge ({i}, {j})")));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::invalid(format!("duplicate edge ({i}, {j})")));
            }
        }
        Ok(Self {
            coords: vec![[0.0, 0.0]; node_count],
            edges,
            radius: f64::NAN,
        })
    }

    pub fn node_count(&self) -> usize {
        self.coords.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn degree(&self, node: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(i, j)| i == node || j == node)
            .count()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); n];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut visited = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    visited += 1;
                    queue.push_back(w);
                }
            }
        }
        visited == n
    }
}

/// Connected geometric random graph on the unit square.
///
/// Node positions are i.i.d. uniform; attempt `a` draws from ChaCha stream `a`
/// of `seed`, and disconnected samples are redrawn.
pub fn grg_graph(node_count: usize, seed: u64) -> Result<Graph> {
    if node_count < 2 {
        return Err(Error::invalid("a geometric random graph needs at least 2 nodes"));
    }
    let radius = grg_radius(node_count);
    for attempt in 0..MAX_GRAPH_ATTEMPTS {
        let mut rng = indexed_rng(seed, attempt as u64);
        let coords = (0..node_count)
            .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        let graph = Graph::from_coords(coords, radius);
        if graph.is_connected() {
            if attempt > 0 {
                log::debug!("graph connected after {} redraws", attempt);
            }
            return Ok(graph);
        }
    }
    Err(Error::GraphGeneration {
        attempts: MAX_GRAPH_ATTEMPTS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_for_ten_nodes() {
        assert!((grg_radius(10) - 0.379_473_319).abs() < 1e-8);
    }

    #[test]
    fn far_apart_nodes_are_not_joined() {
        let g = Graph::from_coords(vec![[0.0, 0.0], [1.0, 1.0]], grg_radius(2));
        assert!(g.edges().is_empty());
        assert!(!g.is_connected());
    }

    #[test]
    fn distance_equal_to_radius_is_excluded() {
        let g = Graph::from_coords(vec![[0.0, 0.0], [0.5, 0.0]], 0.5);
        assert!(g.edges().is_empty());
    }

    #[test]
    fn seeded_graph_is_connected_and_reproducible() {
        let a = grg_graph(10, 42).unwrap();
        let b = grg_graph(10, 42).unwrap();
        assert!(a.is_connected());
        assert_eq!(a, b);
        for &(i, j) in a.edges() {
            assert!(i < j);
            let [xi, yi] = a.coords()[i];
            let [xj, yj] = a.coords()[j];
            assert!(((xi - xj).powi(2) + (yi - yj).powi(2)).sqrt() < a.radius());
        }
    }

    #[test]
    fn rejects_single_node() {
        assert!(grg_graph(1, 0).is_err());
    }

    #[test]
    fn explicit_edges_validated() {
        assert!(Graph::from_edges(3, vec![(0, 0)]).is_err());
        assert!(Graph::from_edges(3, vec![(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(3, vec![(0, 1), (1, 2)]).unwrap().is_connected());
    }
}
