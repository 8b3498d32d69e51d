//! Pairwise energies `E(L) = sum_i D[i, l_i] + sum_{(i,j)} w_ij * V[l_i, l_j]`.
//!
//! Edges are undirected and stored once with `i < j`; the pairwise table of an
//! edge is always read as `V[l_i, l_j]` with `i` the lower index. The relaxed
//! (matrix) form evaluates `Tr(D U^T) + sum_{(i,j)} w_ij [U V U^T]_ij`, which
//! is `Tr(D U^T + W U V U^T) / 2`-consistent for symmetric `W` with the
//! off-diagonal weight counted once per undirected edge.

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Label assignment, one label index per variable (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Labeling(Vec<usize>);

impl Labeling {
    pub fn new(values: Vec<usize>) -> Self {
        Labeling(values)
    }

    /// Every variable in label 0.
    pub fn uniform(n: usize) -> Self {
        Labeling(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [usize] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }

    pub fn get(&self, i: usize) -> usize {
        self.0[i]
    }

    /// One past the largest label in use (0 for an empty labeling).
    pub fn label_bound(&self) -> usize {
        self.0.iter().max().map_or(0, |m| m + 1)
    }

    /// Number of distinct labels in use.
    pub fn num_distinct(&self) -> usize {
        let mut seen = vec![false; self.label_bound()];
        self.0.iter().for_each(|&l| seen[l] = true);
        seen.into_iter().filter(|&s| s).count()
    }

    /// Renumbers labels to `0..k` preserving their relative order; returns `k`.
    pub fn compact(&mut self) -> usize {
        let mut remap = vec![usize::MAX; self.label_bound()];
        for &l in &self.0 {
            remap[l] = 0;
        }
        let mut k = 0;
        for r in remap.iter_mut() {
            if *r == 0 {
                *r = k;
                k += 1;
            }
        }
        for l in self.0.iter_mut() {
            *l = remap[*l];
        }
        k
    }

    pub fn check_range(&self, num_labels: usize) -> Result<()> {
        match self.0.iter().position(|&l| l >= num_labels) {
            Some(i) => Err(Error::Instance(format!("label {} of variable {i} is outside 0..{num_labels}", self.0[i]))),
            None => Ok(()),
        }
    }
}

impl From<Vec<usize>> for Labeling {
    fn from(values: Vec<usize>) -> Self {
        Labeling(values)
    }
}

impl std::ops::Index<usize> for Labeling {
    type Output = usize;

    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

/// `n x l` assignment matrix `U`; one-hot for discrete labelings, fractional
/// after interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentMatrix<T>(Array2<T>);

impl<T: Real> AssignmentMatrix<T> {
    pub fn new(u: Array2<T>) -> Self {
        AssignmentMatrix(u)
    }

    pub fn from_labeling(labeling: &Labeling, num_labels: usize) -> Result<Self> {
        labeling.check_range(num_labels)?;
        let mut u = Array2::zeros((labeling.len(), num_labels));
        for (i, &l) in labeling.values().iter().enumerate() {
            u[[i, l]] = T::one();
        }
        Ok(AssignmentMatrix(u))
    }

    /// Per-row argmax; ties go to the lowest label index.
    pub fn to_labeling(&self) -> Result<Labeling> {
        if self.0.ncols() == 0 && self.0.nrows() > 0 {
            return Err(Error::Instance("assignment matrix has empty rows".into()));
        }
        Ok(Labeling(self.0.rows().into_iter().map(argmax_lowest).collect()))
    }

    pub fn view(&self) -> &Array2<T> {
        &self.0
    }

    pub fn into_inner(self) -> Array2<T> {
        self.0
    }

    /// Fails when any row sum is off from 1 by more than `tol`.
    pub fn check_rows(&self, tol: T) -> Result<()> {
        for (i, row) in self.0.rows().into_iter().enumerate() {
            let s: T = row.iter().copied().sum();
            if (s - T::one()).abs() > tol {
                return Err(Error::Instance(format!("row {i} of U sums to {s}, expected 1")));
            }
        }
        Ok(())
    }
}

pub(crate) fn argmax_lowest<T: Real>(row: ArrayView1<'_, T>) -> usize {
    let mut best = 0;
    for (a, &x) in row.iter().enumerate().skip(1) {
        if x > row[best] {
            best = a;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T> {
    pub i: usize,
    pub j: usize,
    pub weight: T,
}

/// Adjacency entry of a variable: the other endpoint, the edge weight, and
/// whether the owning variable is the lower index of the edge (so the table
/// reads `V[own, other]`) or the higher one (`V[other, own]`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor<T> {
    pub node: usize,
    pub weight: T,
    pub owner_first: bool,
}

/// A pairwise energy over `n` variables and `l` labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Energy<T> {
    unary: Array2<T>,
    pairwise: Array2<T>,
    edges: Vec<Edge<T>>,
    offsets: Vec<usize>,
    adjacency: Vec<Neighbor<T>>,
}

impl<T: Real> Energy<T> {
    /// Builds an energy from the `n x l` unary matrix, the `l x l` label
    /// interaction matrix and `(i, j, w)` edges. Edges given as `i > j` are
    /// flipped, zero weights are dropped; self loops and duplicates are errors.
    pub fn new<I>(unary: Array2<T>, pairwise: Array2<T>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        let (n, l) = unary.dim();
        if l == 0 {
            return Err(Error::Dimension("energy needs at least one label".into()));
        }
        if pairwise.dim() != (l, l) {
            return Err(Error::Dimension(format!("V is {:?}, expected {l}x{l}", pairwise.dim())));
        }
        if unary.iter().chain(pairwise.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Instance("non-finite entry in D or V".into()));
        }
        let mut list = Vec::new();
        for (a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::Instance(format!("edge ({a}, {b}) out of range 0..{n}")));
            }
            if a == b {
                return Err(Error::Instance(format!("self loop on variable {a}")));
            }
            if !w.is_finite() {
                return Err(Error::Instance(format!("non-finite weight on edge ({a}, {b})")));
            }
            if w != T::zero() {
                list.push(Edge { i: a.min(b), j: a.max(b), weight: w });
            }
        }
        list.sort_by_key(|e| (e.i, e.j));
        if let Some(d) = list.windows(2).find(|p| (p[0].i, p[0].j) == (p[1].i, p[1].j)) {
            return Err(Error::Instance(format!("duplicate edge ({}, {})", d[0].i, d[0].j)));
        }
        let (offsets, adjacency) = adjacency_of(n, &list);
        Ok(Energy { unary, pairwise, edges: list, offsets, adjacency })
    }

    /// Unary-only energy of the given shape, convenience for tests and generators.
    pub fn unary_only(unary: Array2<T>) -> Result<Self> {
        let l = unary.ncols();
        Self::new(unary, Array2::zeros((l, l)), std::iter::empty())
    }

    pub fn num_vars(&self) -> usize {
        self.unary.nrows()
    }

    pub fn num_labels(&self) -> usize {
        self.unary.ncols()
    }

    pub fn unary(&self) -> &Array2<T> {
        &self.unary
    }

    pub fn pairwise(&self) -> &Array2<T> {
        &self.pairwise
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[Neighbor<T>] {
        &self.adjacency[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Cost of the edge seen from its owner when the owner takes `own` and the
    /// neighbor takes `other`.
    #[inline]
    pub fn edge_cost(&self, nb: &Neighbor<T>, own: usize, other: usize) -> T {
        let v = if nb.owner_first { self.pairwise[[own, other]] } else { self.pairwise[[other, own]] };
        nb.weight * v
    }

    /// Unary plus incident pairwise cost of giving variable `i` label `label`
    /// while every other variable keeps its label in `labels`.
    pub fn local_cost(&self, i: usize, label: usize, labels: &[usize]) -> T {
        self.neighbors(i)
            .iter()
            .fold(self.unary[[i, label]], |acc, nb| acc + self.edge_cost(nb, label, labels[nb.node]))
    }

    pub fn is_pairwise_symmetric(&self) -> bool {
        let l = self.num_labels();
        let tol = T::slack(self.max_abs_pairwise());
        (0..l).all(|a| (0..a).all(|b| (self.pairwise[[a, b]] - self.pairwise[[b, a]]).abs() <= tol))
    }

    pub fn max_abs_pairwise(&self) -> T {
        self.pairwise.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    fn check_labeling(&self, labeling: &Labeling) -> Result<()> {
        if labeling.len() != self.num_vars() {
            return Err(Error::Dimension(format!(
                "labeling has {} entries, energy has {} variables",
                labeling.len(),
                self.num_vars()
            )));
        }
        labeling.check_range(self.num_labels())
    }

    /// Energy of a discrete labeling; each undirected edge counted once.
    pub fn evaluate(&self, labeling: &Labeling) -> Result<T> {
        self.check_labeling(labeling)?;
        Ok(self.evaluate_unchecked(labeling.values()))
    }

    pub(crate) fn evaluate_unchecked(&self, labels: &[usize]) -> T {
        let unary: T = labels.iter().enumerate().map(|(i, &l)| self.unary[[i, l]]).sum();
        let pair: T = self.edges.iter().map(|e| e.weight * self.pairwise[[labels[e.i], labels[e.j]]]).sum();
        unary + pair
    }

    /// Relaxed energy of an assignment matrix whose rows sum to one.
    pub fn evaluate_relaxed(&self, u: &AssignmentMatrix<T>) -> Result<T> {
        let view = u.view();
        if view.dim() != self.unary.dim() {
            return Err(Error::Dimension(format!("U is {:?}, expected {:?}", view.dim(), self.unary.dim())));
        }
        u.check_rows(T::of(1e-9).max(T::TOLERANCE))?;
        Ok(self.trace_form(view))
    }

    /// `Tr(D U^T) + sum_{(i,j)} w_ij [U V U^T]_ij` without any check on `U`
    /// beyond its shape (which must be `n x l`).
    pub fn trace_form(&self, u: &Array2<T>) -> T {
        let linear: T = self.unary.iter().zip(u.iter()).map(|(&d, &x)| d * x).sum();
        let uv = u.dot(&self.pairwise);
        let quad: T = self
            .edges
            .iter()
            .map(|e| e.weight * uv.row(e.i).iter().zip(u.row(e.j)).map(|(&a, &b)| a * b).sum::<T>())
            .sum();
        linear + quad
    }

    /// Per-variable argmin of the unary term, lowest label on ties.
    pub fn winner_take_all(&self) -> Labeling {
        Labeling(
            self.unary
                .rows()
                .into_iter()
                .map(|row| {
                    let mut best = 0;
                    for (a, &x) in row.iter().enumerate().skip(1) {
                        if x < row[best] {
                            best = a;
                        }
                    }
                    best
                })
                .collect(),
        )
    }

    pub fn classify(&self) -> Classification {
        classify(self)
    }
}

pub(crate) fn adjacency_of<T: Real>(n: usize, edges: &[Edge<T>]) -> (Vec<usize>, Vec<Neighbor<T>>) {
    let mut degree = vec![0usize; n + 1];
    for e in edges {
        degree[e.i + 1] += 1;
        degree[e.j + 1] += 1;
    }
    for k in 0..n {
        degree[k + 1] += degree[k];
    }
    let offsets = degree;
    let mut cursor = offsets.clone();
    let empty = Neighbor { node: 0, weight: T::zero(), owner_first: true };
    let mut adjacency = vec![empty; offsets[n]];
    for e in edges {
        adjacency[cursor[e.i]] = Neighbor { node: e.j, weight: e.weight, owner_first: true };
        cursor[e.i] += 1;
        adjacency[cursor[e.j]] = Neighbor { node: e.i, weight: e.weight, owner_first: false };
        cursor[e.j] += 1;
    }
    (offsets, adjacency)
}

/// Structural families of the pairwise term, tested on every edge's effective
/// table `w_ij * V`. The unary term plays no role.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    /// `None` unless the energy has exactly two labels.
    pub binary_submodular: Option<bool>,
    pub multilabel_submodular: bool,
    pub relaxed_metric: bool,
    pub relaxed_semi_metric: bool,
}

/// Largest violation `lhs - rhs` of each inequality over all label tuples of
/// the table `sign * V`.
struct Violations<T> {
    binary: T,
    monge: T,
    metric: T,
    semi_metric: T,
}

fn violations<T: Real>(v: &Array2<T>, sign: T) -> Violations<T> {
    let l = v.nrows();
    let at = |a: usize, b: usize| sign * v[[a, b]];
    let mut out = Violations {
        binary: T::neg_infinity(),
        monge: T::neg_infinity(),
        metric: T::neg_infinity(),
        semi_metric: T::neg_infinity(),
    };
    if l == 2 {
        out.binary = at(0, 0) + at(1, 1) - at(0, 1) - at(1, 0);
    }
    for a in 0..l.saturating_sub(1) {
        for b in 0..l - 1 {
            out.monge = out.monge.max(at(a, b) + at(a + 1, b + 1) - at(a, b + 1) - at(a + 1, b));
        }
    }
    for a in 0..l {
        for b in 0..l {
            out.semi_metric = out.semi_metric.max(at(a, a) + at(b, b) - at(b, a) - at(a, b));
            for c in 0..l {
                out.metric = out.metric.max(at(a, a) + at(b, c) - at(b, a) - at(a, c));
            }
        }
    }
    out
}

fn classify<T: Real>(energy: &Energy<T>) -> Classification {
    let v = energy.pairwise();
    let tol = T::slack(energy.max_abs_pairwise());
    let has_pos = energy.edges().iter().any(|e| e.weight > T::zero());
    let has_neg = energy.edges().iter().any(|e| e.weight < T::zero());
    let pos = violations(v, T::one());
    let neg = violations(v, -T::one());
    let holds = |f: fn(&Violations<T>) -> T| (!has_pos || f(&pos) <= tol) && (!has_neg || f(&neg) <= tol);
    Classification {
        binary_submodular: (energy.num_labels() == 2).then(|| holds(|x| x.binary)),
        multilabel_submodular: holds(|x| x.monge),
        relaxed_metric: holds(|x| x.metric),
        relaxed_semi_metric: holds(|x| x.semi_metric),
    }
}
