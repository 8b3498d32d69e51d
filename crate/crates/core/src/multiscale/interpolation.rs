use ndarray::Array2;

use crate::energy::{adjacency_of, Edge, Neighbor};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sparse symmetric non-negative correlations between the degrees of freedom
/// of one level (variables or labels).
#[derive(Debug, Clone, PartialEq)]
pub struct Correlations<T> {
    n: usize,
    edges: Vec<Edge<T>>,
    offsets: Vec<usize>,
    adjacency: Vec<Neighbor<T>>,
}

impl<T: Real> Correlations<T> {
    /// `edges` must have `i < j`, be free of duplicates and carry values in `[0, 1]`.
    pub fn from_edges(n: usize, mut edges: Vec<Edge<T>>) -> Result<Self> {
        for e in &edges {
            if e.i >= e.j || e.j >= n {
                return Err(Error::Instance(format!("correlation ({}, {}) invalid for n={n}", e.i, e.j)));
            }
            if !(e.weight >= T::zero()) {
                return Err(Error::Instance(format!("negative correlation at ({}, {})", e.i, e.j)));
            }
        }
        edges.sort_by_key(|e| (e.i, e.j));
        if edges.windows(2).any(|p| (p[0].i, p[0].j) == (p[1].i, p[1].j)) {
            return Err(Error::Instance("duplicate correlation entry".into()));
        }
        let (offsets, adjacency) = adjacency_of(n, &edges);
        Ok(Correlations { n, edges, offsets, adjacency })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[Neighbor<T>] {
        &self.adjacency[self.offsets[i]..self.offsets[i + 1]]
    }
}

/// Coarse representatives and the fine -> coarse index map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoarseSet {
    coarse: Vec<usize>,
    index: Vec<Option<usize>>,
}

impl CoarseSet {
    pub fn from_members(n: usize, members: &[bool]) -> Self {
        assert_eq!(members.len(), n);
        let mut index = vec![None; n];
        let mut coarse = Vec::new();
        for (i, &m) in members.iter().enumerate() {
            if m {
                index[i] = Some(coarse.len());
                coarse.push(i);
            }
        }
        CoarseSet { coarse, index }
    }

    /// Fine indices of the representatives, ascending.
    pub fn representatives(&self) -> &[usize] {
        &self.coarse
    }

    pub fn coarse_index(&self, i: usize) -> Option<usize> {
        self.index[i]
    }

    pub fn num_fine(&self) -> usize {
        self.index.len()
    }

    pub fn num_coarse(&self) -> usize {
        self.coarse.len()
    }
}

/// Greedy scan in index order: `i` is left fine when its correlation to the
/// representatives chosen so far is at least `beta` times its total
/// correlation (and that total is positive), and becomes a representative
/// otherwise.
pub fn select_coarse<T: Real>(c: &Correlations<T>, beta: f64) -> CoarseSet {
    let beta = T::of(beta);
    let mut members = vec![false; c.len()];
    for i in 0..c.len() {
        let (mut total, mut coarse) = (T::zero(), T::zero());
        for nb in c.neighbors(i) {
            total += nb.weight;
            if members[nb.node] {
                coarse += nb.weight;
            }
        }
        members[i] = !(total > T::zero() && coarse >= beta * total);
    }
    CoarseSet::from_members(c.len(), &members)
}

/// Row-stochastic sparse matrix mapping coarse degrees of freedom to fine ones.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationMatrix<T> {
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> InterpolationMatrix<T> {
    /// From per-row `(coarse, value)` lists. Rows must be non-negative and sum
    /// to one within tolerance; column indices must be in range and unique per row.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, T)>>) -> Result<Self> {
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            if row.windows(2).any(|p| p[0].0 == p[1].0) {
                return Err(Error::Instance(format!("row {i} repeats a column")));
            }
            let mut sum = T::zero();
            for &(j, v) in &row {
                if j >= cols || !(v >= T::zero()) {
                    return Err(Error::Instance(format!("row {i} has invalid entry ({j}, {v})")));
                }
                sum += v;
            }
            if (sum - T::one()).abs() > T::of(1e-12).max(T::TOLERANCE) * T::of(4.0) {
                return Err(Error::Instance(format!("row {i} sums to {sum}")));
            }
            for (j, v) in row {
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Ok(InterpolationMatrix { cols, indptr, indices, values })
    }

    pub fn identity(n: usize) -> Self {
        InterpolationMatrix { cols: n, indptr: (0..=n).collect(), indices: (0..n).collect(), values: vec![T::one(); n] }
    }

    pub fn num_fine(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn num_coarse(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn row_len(&self, i: usize) -> usize {
        self.indptr[i + 1] - self.indptr[i]
    }

    pub fn max_row_len(&self) -> usize {
        (0..self.num_fine()).map(|i| self.row_len(i)).max().unwrap_or(0)
    }

    /// All stored `(fine, coarse, value)` entries, row-major.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.num_fine()).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn to_dense(&self) -> Array2<T> {
        let mut p = Array2::zeros((self.num_fine(), self.cols));
        for (i, j, v) in self.triplets() {
            p[[i, j]] = v;
        }
        p
    }

    /// `P X` for a `num_coarse x m` matrix `X`.
    pub fn apply(&self, x: &Array2<T>) -> Array2<T> {
        assert_eq!(x.nrows(), self.cols);
        let mut out = Array2::zeros((self.num_fine(), x.ncols()));
        for (i, j, v) in self.triplets() {
            out.row_mut(i).scaled_add(v, &x.row(j));
        }
        out
    }

    /// `P^T X` for a `num_fine x m` matrix `X`.
    pub fn apply_transpose(&self, x: &Array2<T>) -> Array2<T> {
        assert_eq!(x.nrows(), self.num_fine());
        let mut out = Array2::zeros((self.cols, x.ncols()));
        for (i, j, v) in self.triplets() {
            out.row_mut(j).scaled_add(v, &x.row(i));
        }
        out
    }
}

/// Interpolation from correlations: representatives get unit rows; every
/// other row keeps its `delta` strongest correlations to representatives
/// (lowest coarse index on ties) and is normalized. A fine variable with no
/// positive correlation to any representative is promoted to one first, so
/// the returned set may be larger than `set`.
pub fn build_interpolation<T: Real>(
    c: &Correlations<T>,
    set: &CoarseSet,
    delta: usize,
) -> Result<(InterpolationMatrix<T>, CoarseSet)> {
    if delta == 0 {
        return Err(Error::Instance("interpolation needs delta >= 1".into()));
    }
    let n = c.len();
    if set.num_fine() != n {
        return Err(Error::Dimension(format!("coarse set is over {} variables, expected {n}", set.num_fine())));
    }
    let is_rep = |i: usize| set.coarse_index(i).is_some();
    let members: Vec<bool> = (0..n)
        .map(|i| is_rep(i) || !c.neighbors(i).iter().any(|nb| is_rep(nb.node) && nb.weight > T::zero()))
        .collect();
    let set = CoarseSet::from_members(n, &members);
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        if let Some(ci) = set.coarse_index(i) {
            rows.push(vec![(ci, T::one())]);
            continue;
        }
        let mut entries: Vec<(usize, T)> = c
            .neighbors(i)
            .iter()
            .filter(|nb| nb.weight > T::zero())
            .filter_map(|nb| set.coarse_index(nb.node).map(|cj| (cj, nb.weight)))
            .collect();
        entries.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite").then(a.0.cmp(&b.0)));
        entries.truncate(delta);
        let sum: T = entries.iter().map(|e| e.1).sum();
        rows.push(entries.into_iter().map(|(j, v)| (j, v / sum)).collect());
    }
    let p = InterpolationMatrix::from_rows(set.num_coarse(), rows)?;
    Ok((p, set))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corr(n: usize, entries: &[(usize, usize, f64)]) -> Correlations<f64> {
        Correlations::from_edges(n, entries.iter().map(|&(i, j, weight)| Edge { i, j, weight }).collect()).unwrap()
    }

    #[test]
    fn zero_correlations_select_everything() {
        let c = corr(4, &[(0, 1, 0.0), (1, 2, 0.0)]);
        assert_eq!(select_coarse(&c, 0.2).num_coarse(), 4);
    }

    #[test]
    fn chain_of_three() {
        let c = corr(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let set = select_coarse(&c, 0.2);
        assert_eq!(set.representatives(), &[0, 2]);
        let (p, set2) = build_interpolation(&c, &set, 3).unwrap();
        assert_eq!(set2, set);
        assert_eq!(p.to_dense(), ndarray::array![[1.0, 0.0], [0.5, 0.5], [0.0, 1.0]]);
    }

    #[test]
    fn soft_aggregation_row() {
        let c = corr(3, &[(0, 1, 0.7), (0, 2, 0.3)]);
        let set = CoarseSet::from_members(3, &[false, true, true]);
        let (p, _) = build_interpolation(&c, &set, 3).unwrap();
        let row: Vec<_> = p.row(0).collect();
        assert_eq!(row.len(), 2);
        assert!((row[0].1 - 0.7).abs() < 1e-15 && (row[1].1 - 0.3).abs() < 1e-15);
    }

    #[test]
    fn pruning_keeps_strongest_and_lowest_on_ties() {
        let c = corr(5, &[(0, 1, 0.2), (0, 2, 0.5), (0, 3, 0.5), (0, 4, 0.5)]);
        let set = CoarseSet::from_members(5, &[false, true, true, true, true]);
        let (p, _) = build_interpolation(&c, &set, 2).unwrap();
        let cols: Vec<usize> = p.row(0).map(|(j, _)| j).collect();
        assert_eq!(cols, vec![1, 2]);
    }

    #[test]
    fn isolated_variable_is_promoted() {
        let c = corr(3, &[(0, 1, 1.0)]);
        let set = CoarseSet::from_members(3, &[true, false, false]);
        let (p, set) = build_interpolation(&c, &set, 3).unwrap();
        assert_eq!(set.representatives(), &[0, 2]);
        assert_eq!(p.to_dense(), ndarray::array![[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn apply_matches_dense() {
        let p = InterpolationMatrix::from_rows(2, vec![vec![(0, 1.0)], vec![(0, 0.25), (1, 0.75)], vec![(1, 1.0)]])
            .unwrap();
        let x = ndarray::array![[1.0, 2.0], [3.0, 4.0]];
        assert_eq!(p.apply(&x), p.to_dense().dot(&x));
        let y = ndarray::array![[1.0], [2.0], [3.0]];
        assert_eq!(p.apply_transpose(&y), p.to_dense().t().dot(&y));
        assert!(InterpolationMatrix::from_rows(2, vec![vec![(0, 0.5)]]).is_err());
    }
}
