//! Point-wise greedy descent: ICM with a fixed label set and the
//! adaptive-label variant for correlation clustering.

use crate::corrclust::AffinityMatrix;
use crate::energy::{Energy, Labeling};
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Real;
use crate::solution::{MoveStats, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepOrder {
    /// Variables visited in index order.
    #[default]
    Index,
    /// A fresh seeded permutation every sweep.
    Shuffled { seed: u64 },
}

struct Visit {
    order: Vec<usize>,
    rng: Option<rng::ChaCha8Rng>,
}

impl Visit {
    fn new(n: usize, order: SweepOrder) -> Self {
        let rng = match order {
            SweepOrder::Index => None,
            SweepOrder::Shuffled { seed } => Some(rng::seeded(seed)),
        };
        Visit { order: (0..n).collect(), rng }
    }

    fn next_sweep(&mut self) -> &[usize] {
        if let Some(r) = self.rng.as_mut() {
            rng::shuffle(r, &mut self.order);
        }
        &self.order
    }
}

/// ICM in index order: each variable takes its conditionally cheapest label,
/// keeping the current one on ties and otherwise preferring the lowest index.
/// Stops after `max_sweeps` sweeps or one that changes nothing.
pub fn icm<T: Real>(energy: &Energy<T>, init: &Labeling, max_sweeps: usize) -> Result<Solution<T>> {
    icm_with_order(energy, init, max_sweeps, SweepOrder::Index)
}

pub fn icm_with_order<T: Real>(
    energy: &Energy<T>,
    init: &Labeling,
    max_sweeps: usize,
    order: SweepOrder,
) -> Result<Solution<T>> {
    let start = energy.evaluate(init)?;
    let mut labels = init.clone().into_inner();
    let mut trace = vec![start];
    let mut stats = MoveStats::default();
    let mut visit = Visit::new(energy.num_vars(), order);
    let mut costs = vec![T::zero(); energy.num_labels()];
    for _ in 0..max_sweeps {
        stats.sweeps += 1;
        let mut changed = false;
        for &i in visit.next_sweep() {
            for (a, c) in costs.iter_mut().enumerate() {
                *c = energy.local_cost(i, a, &labels);
            }
            let cur = labels[i];
            let mut best = cur;
            for (a, &c) in costs.iter().enumerate() {
                if c < costs[best] {
                    best = a;
                }
            }
            if best != cur {
                // lowest index among the strict improvements of equal cost
                best = costs.iter().position(|&c| c == costs[best]).expect("present");
                debug_assert!(costs[best] < costs[cur]);
                labels[i] = best;
                stats.accepted += 1;
                changed = true;
            }
        }
        let e = energy.evaluate_unchecked(&labels);
        assert!(e <= *trace.last().expect("non-empty") + T::slack(e), "ICM sweep increased the energy");
        trace.push(e);
        if !changed {
            break;
        }
    }
    let energy_value = *trace.last().expect("non-empty");
    Ok(Solution { labeling: Labeling::new(labels), energy: energy_value, trace, stats })
}

/// Adaptive-label ICM for `sum W_ij [l_i != l_j]`.
///
/// Each point joins the cluster it is most attracted to (largest positive
/// `sum_{j in c} W_ij`, lowest index on ties, staying put if its own cluster
/// already attains the maximum). When no cluster attracts it strictly, it is
/// moved to a fresh singleton. Labels are compacted to `0..k` after every sweep.
pub fn adaptive_icm<T: Real>(w: &AffinityMatrix<T>, init: &Labeling, max_sweeps: usize) -> Result<Solution<T>> {
    adaptive_icm_with_order(w, init, max_sweeps, SweepOrder::Index)
}

pub fn adaptive_icm_with_order<T: Real>(
    w: &AffinityMatrix<T>,
    init: &Labeling,
    max_sweeps: usize,
    order: SweepOrder,
) -> Result<Solution<T>> {
    let n = w.num_vars();
    if init.len() != n {
        return Err(Error::Dimension(format!("init has {} entries, affinity has {n} points", init.len())));
    }
    let mut labeling = init.clone();
    labeling.compact();
    let mut labels = labeling.into_inner();
    let mut trace = vec![w.potts_energy(&labels)];
    let mut stats = MoveStats::default();
    let mut visit = Visit::new(n, order);

    // label ids never exceed n + current bound within a sweep
    let mut sizes = vec![0usize; 2 * n + 1];
    let mut attraction = vec![T::zero(); 2 * n + 1];
    let mut marked = vec![false; 2 * n + 1];
    let mut touched = Vec::new();

    for _ in 0..max_sweeps {
        stats.sweeps += 1;
        sizes.iter_mut().for_each(|s| *s = 0);
        labels.iter().for_each(|&l| sizes[l] += 1);
        let mut free: Vec<usize> = Vec::new();
        let mut bound = labels.iter().max().map_or(0, |m| m + 1);
        let mut changed = false;
        let mut running = *trace.last().expect("non-empty");

        for &i in visit.next_sweep() {
            for nb in w.neighbors(i) {
                let c = labels[nb.node];
                if !marked[c] {
                    marked[c] = true;
                    touched.push(c);
                }
                attraction[c] += nb.weight;
            }
            let cur = labels[i];
            let own = if marked[cur] { attraction[cur] } else { T::zero() };
            let mut best: Option<usize> = None;
            for &c in &touched {
                if attraction[c] > T::zero() {
                    best = match best {
                        Some(b) if attraction[b] > attraction[c] || (attraction[b] == attraction[c] && b < c) => {
                            Some(b)
                        }
                        _ => Some(c),
                    };
                }
            }
            let target = match best {
                Some(b) if attraction[b] > own => Some((b, attraction[b])),
                Some(_) => None,
                None if sizes[cur] > 1 => {
                    let fresh = free.pop().unwrap_or_else(|| {
                        bound += 1;
                        bound - 1
                    });
                    Some((fresh, T::zero()))
                }
                None => None,
            };
            if let Some((to, gain)) = target {
                let delta = own - gain;
                debug_assert!(delta <= T::zero());
                running += delta;
                sizes[cur] -= 1;
                if sizes[cur] == 0 {
                    free.push(cur);
                }
                sizes[to] += 1;
                labels[i] = to;
                stats.accepted += 1;
                changed = true;
            }
            for &c in &touched {
                attraction[c] = T::zero();
                marked[c] = false;
            }
            touched.clear();
        }
        let mut compacted = Labeling::new(labels);
        compacted.compact();
        labels = compacted.into_inner();
        let e = w.potts_energy(&labels);
        let prev = *trace.last().expect("non-empty");
        assert!(e <= prev + T::slack(prev.abs() + running.abs()), "adaptive ICM increased the energy");
        trace.push(e);
        if !changed {
            break;
        }
    }
    let energy = *trace.last().expect("non-empty");
    Ok(Solution { labeling: Labeling::new(labels), energy, trace, stats })
}
