//! Correlation clustering over signed affinities.
//!
//! A partition is a [`Labeling`] with an unbounded label set. Its cost in Potts
//! form is `sum_{i<j} W_ij [l_i != l_j]`; the equivalent agreement form
//! `-sum_{i<j} W_ij [l_i == l_j]` differs from it by the constant `sum W_ij`.

use std::collections::HashMap;

use ndarray::Array2;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::energy::{adjacency_of, Edge, Energy, Labeling, Neighbor};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sparse symmetric signed affinity matrix with zero diagonal. Absent entries
/// carry zero certainty.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix<T> {
    n: usize,
    edges: Vec<Edge<T>>,
    offsets: Vec<usize>,
    adjacency: Vec<Neighbor<T>>,
}

impl<T: Real> AffinityMatrix<T> {
    /// From `(i, j, w)` entries, each unordered pair at most once.
    pub fn from_triplets<I>(n: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        let mut edges = Vec::new();
        for (a, b, w) in entries {
            if a >= n || b >= n {
                return Err(Error::Instance(format!("affinity ({a}, {b}) out of range 0..{n}")));
            }
            if a == b {
                return Err(Error::Instance(format!("affinity diagonal entry at {a}")));
            }
            if !w.is_finite() {
                return Err(Error::Instance(format!("non-finite affinity at ({a}, {b})")));
            }
            if w != T::zero() {
                edges.push(Edge { i: a.min(b), j: a.max(b), weight: w });
            }
        }
        edges.sort_by_key(|e| (e.i, e.j));
        if let Some(d) = edges.windows(2).find(|p| (p[0].i, p[0].j) == (p[1].i, p[1].j)) {
            return Err(Error::Instance(format!("duplicate affinity ({}, {})", d[0].i, d[0].j)));
        }
        let (offsets, adjacency) = adjacency_of(n, &edges);
        Ok(AffinityMatrix { n, edges, offsets, adjacency })
    }

    /// From a dense matrix, which must be symmetric with a zero diagonal.
    pub fn from_dense(w: &Array2<T>) -> Result<Self> {
        let (n, m) = w.dim();
        if n != m {
            return Err(Error::Dimension(format!("affinity matrix is {n}x{m}")));
        }
        let scale = w.iter().fold(T::zero(), |s, x| s.max(x.abs()));
        let tol = T::slack(scale);
        let mut entries = Vec::new();
        for i in 0..n {
            if w[[i, i]].abs() > tol {
                return Err(Error::Instance(format!("non-zero diagonal at {i}")));
            }
            for j in i + 1..n {
                if (w[[i, j]] - w[[j, i]]).abs() > tol {
                    return Err(Error::Instance(format!("asymmetric affinity at ({i}, {j})")));
                }
                entries.push((i, j, w[[i, j]]));
            }
        }
        Self::from_triplets(n, entries)
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[Neighbor<T>] {
        &self.adjacency[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn total_weight(&self) -> T {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Fraction of stored entries that are positive.
    pub fn positive_fraction(&self) -> f64 {
        if self.edges.is_empty() {
            return 0.0;
        }
        self.edges.iter().filter(|e| e.weight > T::zero()).count() as f64 / self.edges.len() as f64
    }

    /// Fraction of the `n (n - 1) / 2` pairs that carry an entry.
    pub fn density(&self) -> f64 {
        let pairs = self.n * self.n.saturating_sub(1) / 2;
        if pairs == 0 {
            0.0
        } else {
            self.edges.len() as f64 / pairs as f64
        }
    }

    /// Potts cost `sum W_ij [l_i != l_j]`.
    pub fn potts_energy(&self, labels: &[usize]) -> T {
        self.edges.iter().filter(|e| labels[e.i] != labels[e.j]).map(|e| e.weight).sum()
    }

    /// The same objective written as a `k`-label Potts energy with no unary term.
    pub fn to_energy(&self, num_labels: usize) -> Result<Energy<T>> {
        let v = Array2::from_shape_fn((num_labels, num_labels), |(a, b)| if a == b { T::zero() } else { T::one() });
        Energy::new(Array2::zeros((self.n, num_labels)), v, self.edges.iter().map(|e| (e.i, e.j, e.weight)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcEnergy<T> {
    /// `sum W_ij [l_i != l_j]`
    pub potts: T,
    /// `-sum W_ij [l_i == l_j]`
    pub agreement: T,
}

pub fn cc_energy<T: Real>(w: &AffinityMatrix<T>, labeling: &Labeling) -> Result<CcEnergy<T>> {
    if labeling.len() != w.num_vars() {
        return Err(Error::Dimension(format!(
            "labeling has {} entries, affinity has {} points",
            labeling.len(),
            w.num_vars()
        )));
    }
    let labels = labeling.values();
    let (mut potts, mut agreement) = (T::zero(), T::zero());
    for e in w.edges() {
        if labels[e.i] == labels[e.j] {
            agreement -= e.weight;
        } else {
            potts += e.weight;
        }
    }
    debug_assert!({
        let total = w.total_weight();
        let scale = w.edges().iter().map(|e| e.weight.abs()).sum::<T>();
        (potts - agreement - total).abs() <= T::slack(scale) * T::of(w.edges().len().max(1) as f64)
    });
    Ok(CcEnergy { potts, agreement })
}

pub const LOG_ODDS_EPS: f64 = 1e-9;

/// `log(p / (1 - p))`, with `p` clamped to `[eps, 1 - eps]` (a warning is logged
/// when clamping happens).
pub fn log_odds_with<T: Real>(p: T, eps: T) -> T {
    let lo = eps;
    let hi = T::one() - eps;
    let q = if p < lo || p > hi {
        log::warn!("probability {p} clamped to [{lo}, {hi}]");
        p.max(lo).min(hi)
    } else {
        p
    };
    (q / (T::one() - q)).ln()
}

pub fn log_odds<T: Real>(p: T) -> T {
    log_odds_with(p, T::of(LOG_ODDS_EPS))
}

pub fn log_odds_all<T: Real>(ps: &[T]) -> Vec<T> {
    ps.iter().map(|&p| log_odds(p)).collect()
}

/// Stirling numbers of the second kind `S(n, 0..=n)`.
pub fn stirling2_row(n: usize) -> Vec<BigUint> {
    let mut row = vec![BigUint::one()];
    for m in 1..=n {
        let mut next = vec![BigUint::zero(); m + 1];
        for k in 1..=m {
            let keep = if k < m { &row[k] * BigUint::from(k) } else { BigUint::zero() };
            next[k] = keep + &row[k - 1];
        }
        row = next;
    }
    row
}

pub fn bell(n: usize) -> BigUint {
    stirling2_row(n).into_iter().sum()
}

/// Largest `n` for which [`prior_on_k`] uses exact integer arithmetic.
pub const EXACT_PRIOR_LIMIT: usize = 60;

/// `-log Pr(k)` for `k = 1..=n` under a uniform prior over partitions of `n`
/// points, `Pr(k) = S(n, k) / B(n)`.
pub fn prior_on_k(n: usize) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    if n <= EXACT_PRIOR_LIMIT {
        let row = stirling2_row(n);
        let total: BigUint = row.iter().sum();
        let total = total.to_f64().expect("B(60) fits in f64");
        return row[1..].iter().map(|s| -(s.to_f64().expect("fits") / total).ln()).collect();
    }
    let mut logs = vec![0.0f64];
    for m in 1..=n {
        let mut next = vec![f64::NEG_INFINITY; m + 1];
        for k in 1..=m {
            let keep = if k < m { (k as f64).ln() + logs[k] } else { f64::NEG_INFINITY };
            next[k] = log_add(keep, logs[k - 1]);
        }
        logs = next;
    }
    let log_bell = logs[1..].iter().copied().fold(f64::NEG_INFINITY, log_add);
    logs[1..].iter().map(|s| log_bell - s).collect()
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `(1/n) sum_clusters max_class |cluster & class|`.
pub fn purity(labeling: &Labeling, truth: &Labeling) -> Result<f64> {
    if labeling.len() != truth.len() {
        return Err(Error::Dimension("labeling and ground truth differ in length".into()));
    }
    if labeling.is_empty() {
        return Ok(1.0);
    }
    let mut overlap: HashMap<(usize, usize), usize> = HashMap::new();
    for (&c, &g) in labeling.values().iter().zip(truth.values()) {
        *overlap.entry((c, g)).or_default() += 1;
    }
    let mut best: HashMap<usize, usize> = HashMap::new();
    for (&(c, _), &count) in &overlap {
        let b = best.entry(c).or_default();
        *b = (*b).max(count);
    }
    Ok(best.values().sum::<usize>() as f64 / labeling.len() as f64)
}

/// Two-sided sign assignment problem `min_S sum_{i<j} w_ij (S_i - S_j)^2`,
/// `S_i in {-1, +1}`, as a two-label Potts energy: label 0 is `S = -1`,
/// label 1 is `S = +1`, and each disagreeing pair costs `4 w_ij`.
pub fn sketch_to_cc<T: Real>(w: &AffinityMatrix<T>) -> Result<Energy<T>> {
    let four = T::of(4.0);
    let v = ndarray::array![[T::zero(), four], [four, T::zero()]];
    Energy::new(Array2::zeros((w.num_vars(), 2)), v, w.edges().iter().map(|e| (e.i, e.j, e.weight)))
}

/// Direct evaluation of the quadratic sign functional.
pub fn sketch_functional<T: Real>(w: &AffinityMatrix<T>, signs: &[i8]) -> T {
    w.edges()
        .iter()
        .map(|e| {
            let d = T::of(f64::from(signs[e.i] - signs[e.j]));
            e.weight * d * d
        })
        .sum()
}
