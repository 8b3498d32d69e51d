use std::collections::BTreeMap;

use ndarray::Array2;

use super::interpolation::InterpolationMatrix;
use crate::energy::{Edge, Energy};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// The coarse energy by variables as a raw triple product, before the
/// self-interaction weights are moved into the unary term.
#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinProduct<T> {
    /// `P^T D`
    pub unary: Array2<T>,
    /// Off-diagonal part of `P^T W P`, each unordered coarse pair once.
    pub edges: Vec<Edge<T>>,
    /// Diagonal of `P^T W P` with each fine edge counted once.
    pub diagonal: Vec<T>,
    pub pairwise: Array2<T>,
}

impl<T: Real> GalerkinProduct<T> {
    /// Relaxed energy at a coarse assignment, self-interactions included.
    pub fn relaxed(&self, u: &Array2<T>) -> T {
        let linear: T = self.unary.iter().zip(u.iter()).map(|(&d, &x)| d * x).sum();
        let uv = u.dot(&self.pairwise);
        let dot = |a: usize, b: usize| uv.row(a).iter().zip(u.row(b)).map(|(&x, &y)| x * y).sum::<T>();
        let pairs: T = self.edges.iter().map(|e| e.weight * dot(e.i, e.j)).sum();
        let diag: T = self.diagonal.iter().enumerate().map(|(i, &w)| w * dot(i, i)).sum();
        linear + pairs + diag
    }

    /// Moves `w_II V_aa` into the unary term and drops the diagonal.
    pub fn absorb(&self) -> Result<Energy<T>> {
        let mut unary = self.unary.clone();
        for (i, &w) in self.diagonal.iter().enumerate() {
            if w != T::zero() {
                for a in 0..self.pairwise.nrows() {
                    unary[[i, a]] += w * self.pairwise[[a, a]];
                }
            }
        }
        Energy::new(unary, self.pairwise.clone(), self.edges.iter().map(|e| (e.i, e.j, e.weight)))
    }
}

/// `P^T D` and `P^T W P` for a symmetric `V`.
pub fn galerkin_product<T: Real>(energy: &Energy<T>, p: &InterpolationMatrix<T>) -> Result<GalerkinProduct<T>> {
    if p.num_fine() != energy.num_vars() {
        return Err(Error::Dimension(format!(
            "interpolation has {} rows, energy has {} variables",
            p.num_fine(),
            energy.num_vars()
        )));
    }
    if !energy.is_pairwise_symmetric() {
        return Err(Error::Instance("coarsening by variables needs a symmetric V".into()));
    }
    let nc = p.num_coarse();
    let unary = p.apply_transpose(energy.unary());
    let mut off: BTreeMap<(usize, usize), T> = BTreeMap::new();
    let mut diagonal = vec![T::zero(); nc];
    for e in energy.edges() {
        for (a, pa) in p.row(e.i) {
            for (b, pb) in p.row(e.j) {
                let w = e.weight * pa * pb;
                if a == b {
                    diagonal[a] += w;
                } else {
                    *off.entry((a.min(b), a.max(b))).or_insert(T::zero()) += w;
                }
            }
        }
    }
    let edges = off.into_iter().map(|((i, j), weight)| Edge { i, j, weight }).collect();
    Ok(GalerkinProduct { unary, edges, diagonal, pairwise: energy.pairwise().clone() })
}

/// Coarse energy by variables: `D^c = P^T D`, `W^c = P^T W P`, then the
/// diagonal of `W^c` absorbed into `D^c`.
pub fn coarsen_variables<T: Real>(energy: &Energy<T>, p: &InterpolationMatrix<T>) -> Result<Energy<T>> {
    galerkin_product(energy, p)?.absorb()
}

/// Coarse energy by labels: `D P_hat` and `P_hat^T V P_hat` over the same
/// variables and edges.
pub fn coarsen_labels<T: Real>(energy: &Energy<T>, p: &InterpolationMatrix<T>) -> Result<Energy<T>> {
    if p.num_fine() != energy.num_labels() {
        return Err(Error::Dimension(format!(
            "label interpolation has {} rows, energy has {} labels",
            p.num_fine(),
            energy.num_labels()
        )));
    }
    let dense = p.to_dense();
    let unary = energy.unary().dot(&dense);
    let pairwise = dense.t().dot(energy.pairwise()).dot(&dense);
    Energy::new(unary, pairwise, energy.edges().iter().map(|e| (e.i, e.j, e.weight)))
}
