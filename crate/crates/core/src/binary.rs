//! Two-label energies in the explicit per-variable / per-edge table form.
//!
//! For a variable `i` the unary pair is `(a, b) = (phi_i(0), phi_i(1))`; for an
//! edge `(i, j)` the table `t[x_i][x_j]` holds the four pairwise costs, i.e.
//! `e = t[0][0]`, `f = t[1][0]`, `g = t[0][1]`, `h = t[1][1]`.

use crate::energy::{Energy, Labeling};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryEdge<T> {
    pub i: usize,
    pub j: usize,
    /// `table[x_i][x_j]`
    pub table: [[T; 2]; 2],
}

impl<T: Real> BinaryEdge<T> {
    /// `phi(0,1) + phi(1,0) - phi(0,0) - phi(1,1)`; non-negative iff submodular.
    pub fn submodular_margin(&self) -> T {
        let t = &self.table;
        t[0][1] + t[1][0] - t[0][0] - t[1][1]
    }

    pub fn is_submodular(&self) -> bool {
        self.submodular_margin() >= -T::slack(self.scale())
    }

    pub(crate) fn scale(&self) -> T {
        self.table.iter().flatten().fold(T::zero(), |m, x| m.max(x.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryEnergy<T> {
    pub unary: Vec<[T; 2]>,
    pub edges: Vec<BinaryEdge<T>>,
}

impl<T: Real> BinaryEnergy<T> {
    pub fn new(unary: Vec<[T; 2]>, edges: Vec<BinaryEdge<T>>) -> Result<Self> {
        let n = unary.len();
        for e in &edges {
            if e.i >= n || e.j >= n || e.i == e.j {
                return Err(Error::Instance(format!("binary edge ({}, {}) invalid for n={n}", e.i, e.j)));
            }
        }
        Ok(BinaryEnergy { unary, edges })
    }

    /// Lossless view of a two-label energy.
    pub fn from_energy(energy: &Energy<T>) -> Result<Self> {
        if energy.num_labels() != 2 {
            return Err(Error::Dimension(format!("binary form needs 2 labels, energy has {}", energy.num_labels())));
        }
        let d = energy.unary();
        let v = energy.pairwise();
        let unary = (0..energy.num_vars()).map(|i| [d[[i, 0]], d[[i, 1]]]).collect();
        let edges = energy
            .edges()
            .iter()
            .map(|e| {
                let w = e.weight;
                BinaryEdge { i: e.i, j: e.j, table: [[w * v[[0, 0]], w * v[[0, 1]]], [w * v[[1, 0]], w * v[[1, 1]]]] }
            })
            .collect();
        Ok(BinaryEnergy { unary, edges })
    }

    pub fn num_vars(&self) -> usize {
        self.unary.len()
    }

    pub fn is_submodular(&self) -> bool {
        self.edges.iter().all(BinaryEdge::is_submodular)
    }

    pub fn evaluate(&self, x: &[bool]) -> T {
        let unary: T = self.unary.iter().zip(x).map(|(u, &xi)| u[xi as usize]).sum();
        let pair: T = self.edges.iter().map(|e| e.table[x[e.i] as usize][x[e.j] as usize]).sum();
        unary + pair
    }

    pub fn evaluate_labeling(&self, labeling: &Labeling) -> Result<T> {
        if labeling.len() != self.num_vars() {
            return Err(Error::Dimension("labeling length differs from variable count".into()));
        }
        labeling.check_range(2)?;
        Ok(self.evaluate(&to_bits(labeling)))
    }

    /// Energy over the variables with `free[i]`, every other variable clamped
    /// to `x[i]`. Returns the reduced energy and the map reduced -> original.
    pub(crate) fn condition(&self, free: &[bool], x: &[bool]) -> (BinaryEnergy<T>, Vec<usize>) {
        let mut local = vec![usize::MAX; self.num_vars()];
        let mut origin = Vec::new();
        for (i, &f) in free.iter().enumerate() {
            if f {
                local[i] = origin.len();
                origin.push(i);
            }
        }
        let mut unary: Vec<[T; 2]> = origin.iter().map(|&i| self.unary[i]).collect();
        let mut edges = Vec::new();
        for e in &self.edges {
            match (free[e.i], free[e.j]) {
                (true, true) => edges.push(BinaryEdge { i: local[e.i], j: local[e.j], table: e.table }),
                (true, false) => {
                    let xj = x[e.j] as usize;
                    let u = &mut unary[local[e.i]];
                    u[0] += e.table[0][xj];
                    u[1] += e.table[1][xj];
                }
                (false, true) => {
                    let xi = x[e.i] as usize;
                    let u = &mut unary[local[e.j]];
                    u[0] += e.table[xi][0];
                    u[1] += e.table[xi][1];
                }
                (false, false) => {}
            }
        }
        (BinaryEnergy { unary, edges }, origin)
    }
}

pub(crate) fn to_bits(labeling: &Labeling) -> Vec<bool> {
    labeling.values().iter().map(|&l| l == 1).collect()
}

pub(crate) fn from_bits(x: &[bool]) -> Labeling {
    Labeling::new(x.iter().map(|&b| b as usize).collect())
}
