//! Roof-duality partial labeling for arbitrary binary energies and the
//! fix-and-solve improvement of a complete labeling.
//!
//! Each variable `p` is represented by two nodes, `p` (source side means
//! `x_p = 0`) and its complement `p'` (source side means `x_p = 1`). Every
//! submodular term becomes an arc between same-polarity nodes, every
//! supermodular term an arc from a complement node to a plain one, and each
//! arc is added together with its mirror image, so a cut that respects
//! `p' = not p` costs twice the energy minus the constant. After the flow, a
//! variable is labeled when its two nodes fall on opposite sides of the
//! source-reachable cut and left unknown otherwise.

use crate::binary::{from_bits, to_bits, BinaryEnergy};
use crate::energy::Labeling;
use crate::maxflow::FlowNetwork;
use crate::mincut::{self, unary_residues, Residues};
use crate::rng;
use crate::scalar::Real;

/// QPBO output: `Some(label)` for persistent variables, `None` for unknowns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialLabeling(Vec<Option<bool>>);

impl PartialLabeling {
    pub fn values(&self) -> &[Option<bool>] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn num_unknown(&self) -> usize {
        self.0.iter().filter(|v| v.is_none()).count()
    }

    /// Complete labeling if nothing is unknown.
    pub fn complete(&self) -> Option<Labeling> {
        self.0.iter().map(|v| v.map(|b| b as usize)).collect::<Option<Vec<_>>>().map(Labeling::new)
    }
}

/// Partial labeling with weak persistency: some global minimum agrees with
/// every labeled variable. Fully submodular inputs are sent to the exact
/// min-cut and come back fully labeled.
pub fn qpbo_solve<T: Real>(be: &BinaryEnergy<T>) -> PartialLabeling {
    if be.is_submodular() {
        let (labeling, _) = mincut::min_cut(mincut::build_graph(be).expect("submodular by check"));
        return PartialLabeling(labeling.values().iter().map(|&l| Some(l == 1)).collect());
    }
    let n = be.num_vars();
    let (source, sink) = (2 * n, 2 * n + 1);
    let bar = |p: usize| n + p;
    let mut net = FlowNetwork::new(2 * n + 2, source, sink);
    let Residues { mut delta, .. } = unary_residues(be);
    for e in &be.edges {
        let (p, q) = (e.i, e.j);
        let m = e.submodular_margin();
        if m >= T::zero() {
            net.add_arc(p, q, m, T::zero());
            net.add_arc(bar(q), bar(p), m, T::zero());
        } else {
            // m (1 - x) y = m y + |m| x y
            delta[q] += m;
            net.add_arc(bar(p), q, -m, T::zero());
            net.add_arc(bar(q), p, -m, T::zero());
        }
    }
    for (p, &d) in delta.iter().enumerate() {
        if d >= T::zero() {
            net.add_arc(source, p, d, T::zero());
            net.add_arc(bar(p), sink, d, T::zero());
        } else {
            net.add_arc(p, sink, -d, T::zero());
            net.add_arc(source, bar(p), -d, T::zero());
        }
    }
    net.max_flow();
    let side = net.source_side();
    PartialLabeling(
        (0..n)
            .map(|p| match (side[p], side[bar(p)]) {
                (true, false) => Some(false),
                (false, true) => Some(true),
                _ => None,
            })
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImproveOptions {
    pub seed: u64,
    /// Passes over the unknown region; stops early after a pass without gain.
    pub max_passes: usize,
    /// Fraction of the still-free variables clamped to the current labeling
    /// before each re-solve.
    pub fix_fraction: f64,
}

impl Default for ImproveOptions {
    fn default() -> Self {
        ImproveOptions { seed: 0, max_passes: 1, fix_fraction: 0.05 }
    }
}

/// Improves a complete labeling without ever increasing its energy.
///
/// Variables labeled by [`qpbo_solve`] take their persistent values. The
/// unknown region is then resolved by repeatedly clamping a seeded random
/// subset of it to the current labeling, solving the remaining variables with
/// QPBO and splicing their persistent labels in; the free region shrinks to
/// the variables that stay unknown. Each splice is accepted only if it lowers
/// the energy. Whole passes repeat with fresh subsets until one brings no gain.
pub fn qpboi_improve<T: Real>(be: &BinaryEnergy<T>, init: &Labeling, opts: ImproveOptions) -> Labeling {
    let n = be.num_vars();
    debug_assert_eq!(init.len(), n);
    let mut x = to_bits(init);
    let mut energy = be.evaluate(&x);

    let first = qpbo_solve(be);
    let mut fused = x.clone();
    for (xi, y) in fused.iter_mut().zip(first.values()) {
        if let Some(b) = y {
            *xi = *b;
        }
    }
    let fused_energy = be.evaluate(&fused);
    if fused_energy <= energy {
        x = fused;
        energy = fused_energy;
    }
    let region: Vec<usize> = (0..n).filter(|&i| first.values()[i].is_none()).collect();
    if region.is_empty() {
        return from_bits(&x);
    }

    let mut rng = rng::seeded(opts.seed);
    for _ in 0..opts.max_passes {
        let start = energy;
        let mut free = region.clone();
        while !free.is_empty() {
            rng::shuffle(&mut rng, &mut free);
            let clamp = ((free.len() as f64 * opts.fix_fraction).round() as usize).clamp(1, free.len());
            let active = &free[clamp..];
            if active.is_empty() {
                break;
            }
            let mut mask = vec![false; n];
            active.iter().for_each(|&i| mask[i] = true);
            let (reduced, origin) = be.condition(&mask, &x);
            let y = qpbo_solve(&reduced);
            let mut cand = x.clone();
            let mut still_free = Vec::new();
            for (k, v) in y.values().iter().enumerate() {
                match v {
                    Some(b) => cand[origin[k]] = *b,
                    None => still_free.push(origin[k]),
                }
            }
            let cand_energy = be.evaluate(&cand);
            if cand_energy < energy {
                x = cand;
                energy = cand_energy;
            }
            free = still_free;
        }
        if energy >= start {
            break;
        }
    }
    from_bits(&x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binary::BinaryEdge;

    fn optima(be: &BinaryEnergy<f64>) -> (f64, Vec<Vec<bool>>) {
        let n = be.num_vars();
        let all: Vec<(f64, Vec<bool>)> = (0..1u32 << n)
            .map(|m| {
                let x: Vec<bool> = (0..n).map(|i| m >> i & 1 == 1).collect();
                (be.evaluate(&x), x)
            })
            .collect();
        let best = all.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        (best, all.into_iter().filter(|p| p.0 <= best + 1e-9).map(|p| p.1).collect())
    }

    fn random_energy(r: &mut rng::ChaCha8Rng, n: usize, density: f64, unary_scale: f64) -> BinaryEnergy<f64> {
        let unary =
            (0..n).map(|_| [unary_scale * rng::standard_normal(r), unary_scale * rng::standard_normal(r)]).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng::uniform01(r) < density {
                    let t = [
                        [rng::uniform(r, -1.0, 1.0), rng::uniform(r, -1.0, 1.0)],
                        [rng::uniform(r, -1.0, 1.0), rng::uniform(r, -1.0, 1.0)],
                    ];
                    edges.push(BinaryEdge { i, j, table: t });
                }
            }
        }
        BinaryEnergy::new(unary, edges).unwrap()
    }

    #[test]
    fn contrast_pair_is_fully_unknown() {
        let be =
            BinaryEnergy::new(vec![[0.0, 0.0]; 2], vec![BinaryEdge { i: 0, j: 1, table: [[1.0, 0.0], [0.0, 1.0]] }])
                .unwrap();
        let y = qpbo_solve(&be);
        assert_eq!(y.values(), &[None, None]);
        let (best, opt) = optima(&be);
        assert_eq!(best, 0.0);
        assert_eq!(opt, vec![vec![true, false], vec![false, true]]);
    }

    #[test]
    fn submodular_is_fully_labeled_and_optimal() {
        let be = BinaryEnergy::new(
            vec![[0.0, 1.0], [0.5, 0.0], [0.3, 0.2]],
            vec![
                BinaryEdge { i: 0, j: 1, table: [[0.0, 1.0], [1.0, 0.0]] },
                BinaryEdge { i: 1, j: 2, table: [[0.0, 0.4], [0.6, 0.0]] },
            ],
        )
        .unwrap();
        let y = qpbo_solve(&be);
        let l = y.complete().expect("no unknowns");
        let (_, v) = mincut::solve(&be).unwrap();
        assert_eq!(be.evaluate_labeling(&l).unwrap(), v);
    }

    #[test]
    fn weak_persistency_on_random_instances() {
        let mut r = rng::seeded(2024);
        for trial in 0..100 {
            let n = 4 + trial % 9;
            let be = random_energy(&mut r, n, 0.4, 0.7);
            let y = qpbo_solve(&be);
            let (_, opt) = optima(&be);
            let ok = opt.iter().any(|x| y.values().iter().zip(x).all(|(v, &b)| v.is_none_or(|v| v == b)));
            assert!(ok, "trial {trial}: {y:?}");
        }
    }

    #[test]
    fn improve_never_increases_and_is_idempotent() {
        let mut r = rng::seeded(99);
        for trial in 0..300 {
            let n = 3 + trial % 10;
            let be = random_energy(&mut r, n, 0.5, if trial % 3 == 0 { 0.0 } else { 0.5 });
            let init = Labeling::new((0..n).map(|_| rng::below(&mut r, 2)).collect());
            let e0 = be.evaluate_labeling(&init).unwrap();
            let once = qpboi_improve(&be, &init, ImproveOptions { seed: trial as u64, ..Default::default() });
            let e1 = be.evaluate_labeling(&once).unwrap();
            assert!(e1 <= e0, "trial {trial}: {e1} > {e0}");
            let (best, _) = optima(&be);
            assert!(e1 >= best - 1e-9);
            let twice = qpboi_improve(&be, &once, ImproveOptions { seed: trial as u64, ..Default::default() });
            assert!(be.evaluate_labeling(&twice).unwrap() <= e1 + 1e-12);
        }
    }

    #[test]
    fn improve_follows_strong_unaries() {
        let mut be = BinaryEnergy::new(
            vec![[0.0, -3.0], [0.0, 0.0], [0.0, -2.5], [0.0, 0.0]],
            vec![
                BinaryEdge { i: 0, j: 1, table: [[1.0, 0.0], [0.0, 1.0]] },
                BinaryEdge { i: 1, j: 2, table: [[1.0, 0.0], [0.0, 1.0]] },
                BinaryEdge { i: 2, j: 3, table: [[0.0, 0.5], [0.5, 0.0]] },
            ],
        )
        .unwrap();
        be.edges.push(BinaryEdge { i: 0, j: 3, table: [[0.2, 0.0], [0.0, 0.2]] });
        let init = Labeling::uniform(4);
        let e0 = be.evaluate_labeling(&init).unwrap();
        let out = qpboi_improve(&be, &init, ImproveOptions::default());
        let e1 = be.evaluate_labeling(&out).unwrap();
        let (best, _) = optima(&be);
        assert!(e1 < e0 && e1 >= best - 1e-12);
    }
}
