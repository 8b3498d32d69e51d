use ndarray::Array2;
use rayon::prelude::*;

use super::interpolation::{build_interpolation, select_coarse, Correlations, InterpolationMatrix};
use crate::energy::{Edge, Energy, Labeling};
use crate::error::{Error, Result};
use crate::icm::{icm_with_order, SweepOrder};
use crate::rng;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateOptions {
    /// Independent ICM descents.
    pub restarts: usize,
    /// Sweeps per descent.
    pub sweeps: usize,
    /// `sigma = sigma_scale * max V`.
    pub sigma_scale: f64,
    /// Visit variables in a fresh random order every sweep.
    pub shuffled: bool,
    pub seed: u64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions { restarts: 10, sweeps: 10, sigma_scale: 0.1, shuffled: false, seed: 0 }
    }
}

/// Energy-aware variable correlations from short ICM descents started at
/// uniformly random labelings: `c_ij = exp(-d_ij / sigma)` where `d_ij` is
/// the mean of `V[l_i, l_j]` over the descents. Descents run in parallel on
/// independent streams of the seed.
pub fn estimate_correlations<T: Real>(energy: &Energy<T>, opts: &EstimateOptions) -> Result<Correlations<T>> {
    let EstimateOptions { restarts, sweeps, sigma_scale, shuffled, seed } = *opts;
    if restarts == 0 || sweeps == 0 {
        return Err(Error::Instance("correlation estimate needs at least one restart and one sweep".into()));
    }
    let n = energy.num_vars();
    let l = energy.num_labels();
    let runs: Vec<Vec<usize>> = (0..restarts as u64)
        .into_par_iter()
        .map(|k| {
            let mut r = rng::stream(seed, k);
            let init = Labeling::new((0..n).map(|_| rng::below(&mut r, l)).collect());
            let order_seed = rng::below(&mut r, usize::MAX) as u64;
            let order = if shuffled { SweepOrder::Shuffled { seed: order_seed } } else { SweepOrder::Index };
            icm_with_order(energy, &init, sweeps, order).map(|s| s.labeling.into_inner())
        })
        .collect::<Result<_>>()?;

    let v = energy.pairwise();
    let vmax = v.iter().fold(T::neg_infinity(), |m, &x| m.max(x));
    let k = T::of(restarts as f64);
    let edges = energy
        .edges()
        .iter()
        .map(|e| {
            let weight = if vmax > T::zero() {
                let sigma = T::of(sigma_scale) * vmax;
                let d: T = runs.iter().map(|lab| v[[lab[e.i], lab[e.j]]]).sum::<T>() / k;
                (-d.max(T::zero()) / sigma).exp()
            } else {
                T::one()
            };
            Edge { i: e.i, j: e.j, weight }
        })
        .collect();
    Correlations::from_edges(n, edges)
}

/// Closed-form label correlations `min(V+) / V_ab` on the symmetric part of
/// `V`, over off-diagonal pairs with positive cost. Pairs with negative cost
/// get no correlation. Pairs with zero cost are returned separately: they are
/// merged outright.
pub fn label_correlations<T: Real>(v: &Array2<T>) -> Result<(Correlations<T>, Vec<(usize, usize)>)> {
    let (l, m) = v.dim();
    if l != m {
        return Err(Error::Dimension(format!("V is {l}x{m}")));
    }
    let tol = T::slack(v.iter().fold(T::zero(), |s, x| s.max(x.abs())));
    let half = T::of(0.5);
    let sym = |a: usize, b: usize| half * (v[[a, b]] + v[[b, a]]);
    let mut merges = Vec::new();
    let mut positive = Vec::new();
    for a in 0..l {
        for b in a + 1..l {
            let x = sym(a, b);
            if x.abs() <= tol {
                merges.push((a, b));
            } else if x > T::zero() {
                positive.push((a, b, x));
            }
        }
    }
    let floor = positive.iter().fold(T::infinity(), |m, p| m.min(p.2));
    let edges = positive.into_iter().map(|(i, j, x)| Edge { i, j, weight: floor / x }).collect();
    Ok((Correlations::from_edges(l, edges)?, merges))
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Label interpolation `P_hat` (`l x l_c`): zero-cost label pairs are merged
/// first, then the merged groups go through the same selection and pruning
/// as variables, with the group correlation the strongest member correlation.
pub fn label_interpolation<T: Real>(v: &Array2<T>, beta: f64, delta: usize) -> Result<InterpolationMatrix<T>> {
    let (c, merges) = label_correlations(v)?;
    let l = c.len();
    let mut parent: Vec<usize> = (0..l).collect();
    for (a, b) in merges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra.max(rb)] = ra.min(rb);
    }
    // groups numbered by their smallest member
    let mut group = vec![usize::MAX; l];
    let mut num_groups = 0;
    for a in 0..l {
        let r = find(&mut parent, a);
        if group[r] == usize::MAX {
            group[r] = num_groups;
            num_groups += 1;
        }
        group[a] = group[r];
    }
    let mut strongest = std::collections::BTreeMap::new();
    for e in c.edges() {
        let (g, h) = (group[e.i], group[e.j]);
        if g != h {
            let key = (g.min(h), g.max(h));
            let w = strongest.entry(key).or_insert(T::zero());
            *w = w.max(e.weight);
        }
    }
    let gc = Correlations::from_edges(
        num_groups,
        strongest.into_iter().map(|((i, j), weight)| Edge { i, j, weight }).collect(),
    )?;
    let set = select_coarse(&gc, beta);
    let (pg, _) = build_interpolation(&gc, &set, delta)?;
    let rows = (0..l).map(|a| pg.row(group[a]).collect()).collect();
    InterpolationMatrix::from_rows(pg.num_coarse(), rows)
}
