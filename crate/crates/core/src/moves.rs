//! Large moves: alpha-beta swap and alpha expansion, plus the label-exploring
//! variants for correlation clustering.
//!
//! Every move is a binary sub-problem over a set of active variables, the
//! rest held fixed. Submodular sub-problems are solved exactly by min-cut;
//! the others go to QPBOI seeded with the current labeling, which never
//! returns anything worse. A move is applied only when it strictly lowers
//! the energy.

use crate::binary::{from_bits, BinaryEdge, BinaryEnergy};
use crate::corrclust::AffinityMatrix;
use crate::energy::{Edge, Energy, Labeling};
use crate::error::{Error, Result};
use crate::mincut;
use crate::qpbo::{qpboi_improve, ImproveOptions};
use crate::scalar::Real;
use crate::solution::{MoveStats, Solution};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveOptions {
    /// Hard cap on the number of full sweeps over the label pairs / labels.
    pub max_sweeps: usize,
    /// Settings for the non-submodular steps; each step offsets the seed by
    /// its running index.
    pub improve: ImproveOptions,
}

impl Default for MoveOptions {
    fn default() -> Self {
        MoveOptions { max_sweeps: 100, improve: ImproveOptions::default() }
    }
}

/// What a binary move needs from the energy.
trait Model<T: Real> {
    fn num_vars(&self) -> usize;
    fn unary(&self, i: usize, a: usize) -> T;
    fn edges(&self) -> &[Edge<T>];
    /// Cost of edge `e` (with `e.i < e.j`) when `e.i` takes `a` and `e.j` takes `b`.
    fn pair(&self, e: &Edge<T>, a: usize, b: usize) -> T;
    fn total(&self, labels: &[usize]) -> T;
}

impl<T: Real> Model<T> for Energy<T> {
    fn num_vars(&self) -> usize {
        Energy::num_vars(self)
    }
    fn unary(&self, i: usize, a: usize) -> T {
        Energy::unary(self)[[i, a]]
    }
    fn edges(&self) -> &[Edge<T>] {
        Energy::edges(self)
    }
    fn pair(&self, e: &Edge<T>, a: usize, b: usize) -> T {
        e.weight * self.pairwise()[[a, b]]
    }
    fn total(&self, labels: &[usize]) -> T {
        self.evaluate_unchecked(labels)
    }
}

impl<T: Real> Model<T> for AffinityMatrix<T> {
    fn num_vars(&self) -> usize {
        AffinityMatrix::num_vars(self)
    }
    fn unary(&self, _: usize, _: usize) -> T {
        T::zero()
    }
    fn edges(&self) -> &[Edge<T>] {
        AffinityMatrix::edges(self)
    }
    fn pair(&self, e: &Edge<T>, a: usize, b: usize) -> T {
        if a == b {
            T::zero()
        } else {
            e.weight
        }
    }
    fn total(&self, labels: &[usize]) -> T {
        self.potts_energy(labels)
    }
}

struct Mover<'a, T: Real, M: Model<T>> {
    model: &'a M,
    labels: Vec<usize>,
    trace: Vec<T>,
    stats: MoveStats,
    improve: ImproveOptions,
    steps: u64,
}

impl<'a, T: Real, M: Model<T>> Mover<'a, T, M> {
    fn new(model: &'a M, labels: Vec<usize>, improve: ImproveOptions) -> Self {
        let start = model.total(&labels);
        Mover { model, labels, trace: vec![start], stats: MoveStats::default(), improve, steps: 0 }
    }

    /// Binary move where variable `i` chooses between `options(i, l_i)[0]`
    /// (x = 0) and `[1]` (x = 1); `None` keeps it fixed. `start(l_i)` is the
    /// bit that reproduces the current label. Returns whether it was applied.
    fn step<F, S>(&mut self, options: F, start: S) -> bool
    where
        F: Fn(usize) -> Option<[usize; 2]>,
        S: Fn(usize) -> bool,
    {
        let n = self.model.num_vars();
        let mut local = vec![usize::MAX; n];
        let mut choice = Vec::new();
        let mut origin = Vec::new();
        for i in 0..n {
            if let Some(opt) = options(self.labels[i]) {
                local[i] = origin.len();
                origin.push(i);
                choice.push(opt);
            }
        }
        if origin.is_empty() {
            return false;
        }
        let m = self.model;
        let mut unary: Vec<[T; 2]> =
            origin.iter().zip(&choice).map(|(&i, c)| [m.unary(i, c[0]), m.unary(i, c[1])]).collect();
        let mut edges = Vec::new();
        for e in m.edges() {
            match (local[e.i], local[e.j]) {
                (usize::MAX, usize::MAX) => {}
                (a, usize::MAX) => {
                    let lj = self.labels[e.j];
                    unary[a][0] += m.pair(e, choice[a][0], lj);
                    unary[a][1] += m.pair(e, choice[a][1], lj);
                }
                (usize::MAX, b) => {
                    let li = self.labels[e.i];
                    unary[b][0] += m.pair(e, li, choice[b][0]);
                    unary[b][1] += m.pair(e, li, choice[b][1]);
                }
                (a, b) => {
                    let (ci, cj) = (choice[a], choice[b]);
                    let table = [
                        [m.pair(e, ci[0], cj[0]), m.pair(e, ci[0], cj[1])],
                        [m.pair(e, ci[1], cj[0]), m.pair(e, ci[1], cj[1])],
                    ];
                    edges.push(BinaryEdge { i: a, j: b, table });
                }
            }
        }
        let be = BinaryEnergy { unary, edges };
        let current: Vec<bool> = origin.iter().map(|&i| start(self.labels[i])).collect();
        let before = be.evaluate(&current);

        let proposal = if be.is_submodular() {
            self.stats.exact_steps += 1;
            mincut::solve(&be).expect("submodular sub-problem").0
        } else {
            self.stats.improve_steps += 1;
            let opts = ImproveOptions { seed: self.improve.seed.wrapping_add(self.steps), ..self.improve };
            qpboi_improve(&be, &from_bits(&current), opts)
        };
        self.steps += 1;
        let bits: Vec<bool> = proposal.values().iter().map(|&x| x == 1).collect();
        let after = be.evaluate(&bits);
        if !(after < before - T::slack(before)) {
            return false;
        }
        for ((&i, c), &x) in origin.iter().zip(&choice).zip(&bits) {
            self.labels[i] = c[x as usize];
        }
        let e = m.total(&self.labels);
        let prev = *self.trace.last().expect("non-empty");
        assert!(e <= prev + T::slack(prev), "accepted move increased the energy");
        self.trace.push(e);
        self.stats.accepted += 1;
        true
    }

    fn swap(&mut self, alpha: usize, beta: usize) -> bool {
        self.step(|l| (l == alpha || l == beta).then_some([alpha, beta]), |l| l == beta)
    }

    fn expand(&mut self, alpha: usize) -> bool {
        self.step(|l| (l != alpha).then_some([l, alpha]), |_| false)
    }

    /// Relabels to `0..k` preserving order and returns `k`.
    fn compact(&mut self) -> usize {
        let mut l = Labeling::new(std::mem::take(&mut self.labels));
        let k = l.compact();
        self.labels = l.into_inner();
        k
    }

    fn finish(self) -> Solution<T> {
        let energy = *self.trace.last().expect("non-empty");
        Solution { labeling: Labeling::new(self.labels), energy, trace: self.trace, stats: self.stats }
    }
}

/// Alpha-beta swap over all label pairs `alpha < beta`, repeated until a full
/// sweep changes nothing.
pub fn alpha_beta_swap<T: Real>(energy: &Energy<T>, init: &Labeling, opts: MoveOptions) -> Result<Solution<T>> {
    energy.evaluate(init)?;
    let l = energy.num_labels();
    let mut mover = Mover::new(energy, init.clone().into_inner(), opts.improve);
    for _ in 0..opts.max_sweeps {
        mover.stats.sweeps += 1;
        let mut changed = false;
        for alpha in 0..l {
            for beta in alpha + 1..l {
                changed |= mover.swap(alpha, beta);
            }
        }
        if !changed {
            break;
        }
    }
    Ok(mover.finish())
}

/// Alpha expansion over every label in turn, repeated until a full sweep
/// changes nothing. Starts from the winner-take-all labeling unless `init`
/// is given.
pub fn alpha_expansion<T: Real>(energy: &Energy<T>, init: Option<&Labeling>, opts: MoveOptions) -> Result<Solution<T>> {
    let start = match init {
        Some(l) => {
            energy.evaluate(l)?;
            l.clone()
        }
        None => energy.winner_take_all(),
    };
    let l = energy.num_labels();
    let mut mover = Mover::new(energy, start.into_inner(), opts.improve);
    for _ in 0..opts.max_sweeps {
        mover.stats.sweeps += 1;
        let mut changed = false;
        for alpha in 0..l {
            changed |= mover.expand(alpha);
        }
        if !changed {
            break;
        }
    }
    Ok(mover.finish())
}

fn start_partition<T: Real>(w: &AffinityMatrix<T>, init: Option<&Labeling>) -> Result<Vec<usize>> {
    match init {
        Some(l) if l.len() != w.num_vars() => {
            Err(Error::Dimension(format!("init has {} entries, affinity has {} points", l.len(), w.num_vars())))
        }
        Some(l) => {
            let mut l = l.clone();
            l.compact();
            Ok(l.into_inner())
        }
        None => Ok(vec![0; w.num_vars()]),
    }
}

/// Swap-and-explore: swaps between every pair of used labels and between
/// each used label and one unused label, so the number of clusters can grow
/// or shrink. Starts from a single cluster unless `init` is given.
pub fn swap_and_explore<T: Real>(
    w: &AffinityMatrix<T>,
    init: Option<&Labeling>,
    opts: MoveOptions,
) -> Result<Solution<T>> {
    let mut mover = Mover::new(w, start_partition(w, init)?, opts.improve);
    let mut k = mover.compact();
    for _ in 0..opts.max_sweeps {
        mover.stats.sweeps += 1;
        let mut changed = false;
        let mut alpha = 0;
        while alpha < k {
            let mut beta = alpha + 1;
            while beta <= k {
                if mover.swap(alpha, beta) {
                    changed = true;
                    k = mover.compact();
                }
                beta += 1;
            }
            alpha += 1;
        }
        if !changed {
            break;
        }
    }
    Ok(mover.finish())
}

/// Expand-and-explore: expansions of every used label and of one unused
/// label. Starts from a single cluster unless `init` is given.
pub fn expand_and_explore<T: Real>(
    w: &AffinityMatrix<T>,
    init: Option<&Labeling>,
    opts: MoveOptions,
) -> Result<Solution<T>> {
    let mut mover = Mover::new(w, start_partition(w, init)?, opts.improve);
    let mut k = mover.compact();
    for _ in 0..opts.max_sweeps {
        mover.stats.sweeps += 1;
        let mut changed = false;
        let mut alpha = 0;
        while alpha <= k {
            if mover.expand(alpha) {
                changed = true;
                k = mover.compact();
            }
            alpha += 1;
        }
        if !changed {
            break;
        }
    }
    Ok(mover.finish())
}
