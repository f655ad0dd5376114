//! Simple undirected graphs in compressed sparse row form.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A sampled (or loaded) simple undirected graph.
///
/// Neighbor lists are sorted and the adjacency is symmetric with an empty
/// diagonal. Graphs drawn from a graphon keep their latent coordinates and
/// the seed that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSample {
    n: usize,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    degrees: Vec<usize>,
    latents: Option<Vec<f64>>,
    seed: Option<u64>,
}

impl GraphSample {
    /// Builds a graph from per-node neighbor lists, already sorted and symmetric.
    pub(crate) fn from_sorted_lists(
        lists: Vec<Vec<u32>>,
        latents: Option<Vec<f64>>,
        seed: Option<u64>,
    ) -> Self {
        let n = lists.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut degrees = Vec::with_capacity(n);
        let total: usize = lists.iter().map(Vec::len).sum();
        let mut targets = Vec::with_capacity(total);
        offsets.push(0);
        for list in lists {
            degrees.push(list.len());
            targets.extend_from_slice(&list);
            offsets.push(targets.len());
        }
        GraphSample {
            n,
            offsets,
            targets,
            degrees,
            latents,
            seed,
        }
    }

    /// Builds a graph on `n` nodes from undirected edges.
    ///
    /// Each edge may be given in either orientation. Self-loops, repeated
    /// edges and out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("graph must have at least one node".into()));
        }
        if n > u32::MAX as usize {
            return Err(Error::InvalidArgument(format!("n = {n} exceeds u32 node ids")));
        }
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::shape(
                    format!("node ids below {n}"),
                    format!("edge ({u}, {v})"),
                ));
            }
            if u == v {
                return Err(Error::Malformed(format!("self-loop at node {u}")));
            }
            lists[u].push(v as u32);
            lists[v].push(u as u32);
        }
        for (i, list) in lists.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Malformed(format!("repeated edge at node {i}")));
            }
        }
        Ok(Self::from_sorted_lists(lists, None, None))
    }

    /// Attaches latent coordinates to a loaded graph.
    pub fn with_latents(mut self, latents: Vec<f64>) -> Result<Self> {
        if latents.len() != self.n {
            return Err(Error::shape(self.n, latents.len()));
        }
        if let Some(&bad) = latents.iter().find(|u| !(0.0..=1.0).contains(*u)) {
            return Err(Error::Domain {
                name: "latent",
                value: bad,
            });
        }
        self.latents = Some(latents);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn latents(&self) -> Option<&[f64]> {
        self.latents.as_deref()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// Undirected edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .map(|&v| v as usize)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Computes `out = (D − A) x / n` for a row-major block `x` of `width` columns.
    ///
    /// Row `i` of the result is accumulated in neighbor-list order.
    pub fn rescaled_laplacian_block(&self, x: &[f64], width: usize, out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n * width);
        debug_assert_eq!(out.len(), self.n * width);
        let inv_n = 1.0 / self.n as f64;
        for i in 0..self.n {
            let row = &mut out[i * width..(i + 1) * width];
            let deg = self.degrees[i] as f64;
            let xi = &x[i * width..(i + 1) * width];
            for (o, &v) in row.iter_mut().zip(xi) {
                *o = deg * v;
            }
            for &j in self.neighbors(i) {
                let j = j as usize;
                let xj = &x[j * width..(j + 1) * width];
                for (o, &v) in row.iter_mut().zip(xj) {
                    *o -= v;
                }
            }
            for o in row.iter_mut() {
                *o *= inv_n;
            }
        }
    }

    /// `Σ_c xᵀ_c (D − A) x_c / n` over the columns of a row-major block,
    /// without materializing the product.
    pub fn rescaled_laplacian_quadratic(&self, x: &[f64], width: usize) -> f64 {
        debug_assert_eq!(x.len(), self.n * width);
        let mut scratch = vec![0.0; width];
        let mut total = 0.0;
        for i in 0..self.n {
            let deg = self.degrees[i] as f64;
            let xi = &x[i * width..(i + 1) * width];
            for (s, &v) in scratch.iter_mut().zip(xi) {
                *s = deg * v;
            }
            for &j in self.neighbors(i) {
                let j = j as usize;
                let xj = &x[j * width..(j + 1) * width];
                for (s, &v) in scratch.iter_mut().zip(xj) {
                    *s -= v;
                }
            }
            total += xi.iter().zip(&scratch).map(|(a, b)| a * b).sum::<f64>();
        }
        total / self.n as f64
    }

    /// Dense rescaled Laplacian `(D − A) / n`.
    pub fn dense_rescaled_laplacian(&self) -> DMatrix<f64> {
        let n = self.n;
        let inv_n = 1.0 / n as f64;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.degrees[i] as f64 * inv_n;
            for &j in self.neighbors(i) {
                m[(i, j as usize)] = -inv_n;
            }
        }
        m
    }

    /// Checks the structural invariants. Used by tests and loaders.
    pub fn validate(&self) -> Result<()> {
        for i in 0..self.n {
            let nb = self.neighbors(i);
            if nb.len() != self.degrees[i] {
                return Err(Error::InternalConsistency(format!("degree mismatch at {i}")));
            }
            if nb.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InternalConsistency(format!("unsorted neighbors at {i}")));
            }
            for &j in nb {
                let j = j as usize;
                if j == i {
                    return Err(Error::InternalConsistency(format!("self-loop at {i}")));
                }
                if self.neighbors(j).binary_search(&(i as u32)).is_err() {
                    return Err(Error::InternalConsistency(format!("asymmetric edge {i}-{j}")));
                }
            }
        }
        if let Some(l) = &self.latents {
            if l.len() != self.n || l.iter().any(|u| !(0.0..=1.0).contains(u)) {
                return Err(Error::InternalConsistency("bad latents".into()));
            }
        }
        Ok(())
    }
}

/// Small named graphs used by examples and tests.
pub mod named {
    use super::GraphSample;

    /// Complete graph `K_n`.
    pub fn complete(n: usize) -> GraphSample {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        GraphSample::from_edges(n, edges).expect("valid complete graph")
    }

    /// Graph on `n` nodes with no edges.
    pub fn empty(n: usize) -> GraphSample {
        GraphSample::from_edges(n, std::iter::empty()).expect("valid empty graph")
    }

    /// Path `0 – 1 – … – (n−1)`.
    pub fn path(n: usize) -> GraphSample {
        GraphSample::from_edges(n, (1..n).map(|v| (v - 1, v))).expect("valid path")
    }

    /// Star with center 0 and `leaves` leaves.
    pub fn star(leaves: usize) -> GraphSample {
        GraphSample::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v))).expect("valid star")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_edges_normalizes_orientation() {
        let g = GraphSample::from_edges(4, [(2, 0), (0, 1), (3, 2)]).unwrap();
        assert_eq!(g.degrees(), &[2, 1, 2, 1]);
        assert_eq!(g.neighbors(0), &[1, 2]);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (2, 3)]);
        assert_eq!(g.edge_count(), 3);
        g.validate().unwrap();
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(GraphSample::from_edges(3, [(1, 1)]).is_err());
        assert!(GraphSample::from_edges(3, [(0, 1), (1, 0)]).is_err());
        assert!(matches!(
            GraphSample::from_edges(3, [(0, 3)]),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(GraphSample::from_edges(0, []).is_err());
    }

    #[test]
    fn dense_laplacian_matches_block_product() {
        let g = named::star(3);
        let l = g.dense_rescaled_laplacian();
        let x = [1.0, 2.0, -1.0, 0.5, 3.0, 0.0, 0.25, -2.0];
        let mut out = vec![0.0; 8];
        g.rescaled_laplacian_block(&x, 2, &mut out);
        let xm = DMatrix::from_row_slice(4, 2, &x);
        let want = &l * &xm;
        for i in 0..4 {
            for c in 0..2 {
                assert!((out[i * 2 + c] - want[(i, c)]).abs() < 1e-15);
            }
        }
        let q = g.rescaled_laplacian_quadratic(&x, 2);
        let want_q = (xm.transpose() * &l * &xm).trace();
        assert!((q - want_q).abs() < 1e-14);
    }

    #[test]
    fn latents_must_be_in_unit_interval() {
        let g = named::path(2);
        assert!(g.clone().with_latents(vec![0.2, 1.2]).is_err());
        assert!(g.clone().with_latents(vec![0.2]).is_err());
        assert!(g.with_latents(vec![0.0, 1.0]).is_ok());
    }
}
