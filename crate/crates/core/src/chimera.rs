//! Chimera qubit-connectivity graphs.
//!
//! `C_L` is an `L x L` grid of eight-qubit unit cells. Qubit `k` of the cell
//! at `(row, col)` has index `8 * (row * L + col) + k`; `k < 4` are the
//! horizontal qubits and `k >= 4` the vertical ones. Inside a cell every
//! horizontal qubit couples to every vertical qubit (`K_{4,4}`). Horizontal
//! qubits also couple to the same `k` in the cell to the right, vertical
//! qubits to the same `k` in the cell below.

use std::collections::BTreeSet;

use crate::error::{invalid, Result};

pub const CELL_QUBITS: usize = 8;
pub const MAX_SIZE: usize = 64;

/// A (possibly masked) Chimera graph. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChimeraTopology {
    size: usize,
    functional: Vec<bool>,
    edges: Vec<(u32, u32)>,
    adj_offsets: Vec<u32>,
    adj: Vec<(u32, u32)>,
}

impl ChimeraTopology {
    /// Full-yield `C_L`.
    pub fn build(size: usize) -> Result<Self> {
        if !(1..=MAX_SIZE).contains(&size) {
            return Err(invalid(format!("Chimera size {size} outside 1..={MAX_SIZE}")));
        }
        Ok(Self::from_mask(size, vec![true; CELL_QUBITS * size * size]))
    }

    fn from_mask(size: usize, functional: Vec<bool>) -> Self {
        let mut edges = Vec::with_capacity(16 * size * size + 8 * size * size);
        for row in 0..size {
            for col in 0..size {
                let base = CELL_QUBITS * (row * size + col);
                for h in 0..4 {
                    for v in 4..8 {
                        edges.push(((base + h) as u32, (base + v) as u32));
                    }
                }
                if col + 1 < size {
                    for h in 0..4 {
                        edges.push(((base + h) as u32, (base + CELL_QUBITS + h) as u32));
                    }
                }
                if row + 1 < size {
                    for v in 4..8 {
                        edges.push(((base + v) as u32, (base + CELL_QUBITS * size + v) as u32));
                    }
                }
            }
        }
        edges.retain(|&(a, b)| functional[a as usize] && functional[b as usize]);
        edges.sort_unstable();

        let n_qubits = functional.len();
        let mut degree = vec![0u32; n_qubits + 1];
        for &(a, b) in &edges {
            degree[a as usize + 1] += 1;
            degree[b as usize + 1] += 1;
        }
        for q in 0..n_qubits {
            degree[q + 1] += degree[q];
        }
        let adj_offsets = degree;
        let mut fill = adj_offsets.clone();
        let mut adj = vec![(0u32, 0u32); edges.len() * 2];
        for (e, &(a, b)) in edges.iter().enumerate() {
            adj[fill[a as usize] as usize] = (b, e as u32);
            fill[a as usize] += 1;
            adj[fill[b as usize] as usize] = (a, e as u32);
            fill[b as usize] += 1;
        }
        for q in 0..n_qubits {
            adj[adj_offsets[q] as usize..adj_offsets[q + 1] as usize].sort_unstable();
        }

        Self { size, functional, edges, adj_offsets, adj }
    }

    /// Copy with the listed qubits marked broken and their couplers removed.
    pub fn with_broken(&self, broken: &[usize]) -> Result<Self> {
        let mut functional = self.functional.clone();
        for &q in broken {
            if q >= functional.len() {
                return Err(invalid(format!("qubit {q} outside 0..{}", functional.len())));
            }
            functional[q] = false;
        }
        Ok(Self::from_mask(self.size, functional))
    }

    /// Grid dimension `L`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Physical qubit count `N = 8 L^2`.
    pub fn num_qubits(&self) -> usize {
        self.functional.len()
    }

    /// Functional qubit count `n`.
    pub fn num_functional(&self) -> usize {
        self.functional.iter().filter(|&&f| f).count()
    }

    pub fn is_functional(&self, q: usize) -> bool {
        self.functional.get(q).copied().unwrap_or(false)
    }

    pub fn functional_qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.functional.iter().enumerate().filter(|(_, &f)| f).map(|(q, _)| q)
    }

    pub fn broken_qubits(&self) -> Vec<usize> {
        self.functional.iter().enumerate().filter(|(_, &f)| !f).map(|(q, _)| q).collect()
    }

    /// Couplers as `(low, high)` pairs in lexicographic order.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// `(neighbour, edge index)` pairs of `q`, sorted by neighbour.
    #[inline]
    pub fn neighbors(&self, q: usize) -> &[(u32, u32)] {
        &self.adj[self.adj_offsets[q] as usize..self.adj_offsets[q + 1] as usize]
    }

    pub fn degree(&self, q: usize) -> usize {
        (self.adj_offsets[q + 1] - self.adj_offsets[q]) as usize
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = if a < b { (a as u32, b as u32) } else { (b as u32, a as u32) };
        self.edges.binary_search(&key).ok()
    }

    /// Unit cell `(row, col)` holding `qubit`.
    pub fn unit_cell_of(&self, qubit: usize) -> Result<(usize, usize)> {
        if qubit >= self.num_qubits() {
            return Err(invalid(format!("qubit {qubit} outside 0..{}", self.num_qubits())));
        }
        let cell = qubit / CELL_QUBITS;
        Ok((cell / self.size, cell % self.size))
    }

    #[inline]
    pub fn cell_index(qubit: usize) -> usize {
        qubit / CELL_QUBITS
    }

    /// Half-cell id: `2 * cell + 0` for the horizontal half, `+ 1` for the vertical half.
    #[inline]
    pub fn half_cell_of(qubit: usize) -> usize {
        2 * (qubit / CELL_QUBITS) + usize::from(qubit % CELL_QUBITS >= 4)
    }

    pub fn num_half_cells(&self) -> usize {
        2 * self.size * self.size
    }

    /// Whether the functional qubits induce a connected graph.
    pub fn is_connected(&self) -> bool {
        let Some(start) = self.functional_qubits().next() else {
            return true;
        };
        let mut seen = vec![false; self.num_qubits()];
        let mut stack = vec![start];
        seen[start] = true;
        let mut count = 1;
        while let Some(q) = stack.pop() {
            for &(w, _) in self.neighbors(q) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    count += 1;
                    stack.push(w as usize);
                }
            }
        }
        count == self.num_functional()
    }

    /// Set of broken qubits, handy for serialization.
    pub fn broken_set(&self) -> BTreeSet<usize> {
        self.broken_qubits().into_iter().collect()
    }
}
