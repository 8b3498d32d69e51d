//! Exact minimization of submodular binary energies by s-t minimum cut.
//!
//! Every pairwise table is split as
//! `t(x, y) = t00 + (t10 - t00) x + (t11 - t10) y + m (1 - x) y` with
//! `m = t01 + t10 - t00 - t11 >= 0`, so the edge contributes an arc `i -> j`
//! of capacity `m` and the rest folds into the unary residues of `i` and `j`.
//! A variable on the source side of the cut takes label 0. Residues become
//! terminal arcs (`s -> i` charges label 1, `i -> t` charges label 0) and the
//! subtracted constants accumulate in the offset, so
//! `cut weight + offset == energy` for every assignment.

use crate::binary::BinaryEnergy;
use crate::energy::Labeling;
use crate::error::{Error, Result};
use crate::maxflow::FlowNetwork;
use crate::scalar::Real;

/// Flow network for a binary energy together with the constant offset.
#[derive(Debug, Clone)]
pub struct FlowGraph<T> {
    network: FlowNetwork<T>,
    num_vars: usize,
    offset: T,
}

impl<T: Real> FlowGraph<T> {
    pub fn offset(&self) -> T {
        self.offset
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }
}

/// Per-variable cost difference `cost(1) - cost(0)` plus the shared constant.
pub(crate) struct Residues<T> {
    pub delta: Vec<T>,
    pub constant: T,
}

pub(crate) fn unary_residues<T: Real>(be: &BinaryEnergy<T>) -> Residues<T> {
    let mut delta: Vec<T> = be.unary.iter().map(|u| u[1] - u[0]).collect();
    let mut constant: T = be.unary.iter().map(|u| u[0]).sum();
    for e in &be.edges {
        let t = &e.table;
        constant += t[0][0];
        delta[e.i] += t[1][0] - t[0][0];
        delta[e.j] += t[1][1] - t[1][0];
    }
    Residues { delta, constant }
}

/// Graph whose minimum cut plus `offset` is the minimum energy. Fails on the
/// first edge whose margin is negative beyond tolerance; tolerated residues
/// are clamped to a zero-capacity arc.
pub fn build_graph<T: Real>(be: &BinaryEnergy<T>) -> Result<FlowGraph<T>> {
    let n = be.num_vars();
    let (source, sink) = (n, n + 1);
    let mut network = FlowNetwork::new(n + 2, source, sink);
    for e in &be.edges {
        let m = e.submodular_margin();
        if m < -T::slack(e.scale()) {
            return Err(Error::SubmodularityViolation { i: e.i, j: e.j, excess: -m.as_f64() });
        }
        network.add_arc(e.i, e.j, m.max(T::zero()), T::zero());
    }
    let Residues { delta, mut constant } = unary_residues(be);
    for (i, &d) in delta.iter().enumerate() {
        if d >= T::zero() {
            network.add_arc(source, i, d, T::zero());
        } else {
            network.add_arc(i, sink, -d, T::zero());
            constant += d;
        }
    }
    Ok(FlowGraph { network, num_vars: n, offset: constant })
}

/// Globally optimal labeling and the value `max flow + offset`.
///
/// A variable takes label 1 exactly when it can still reach the sink in the
/// residual graph, so among optimal cuts the one with the largest source side
/// is reported: variables that are indifferent keep label 0.
pub fn min_cut<T: Real>(mut graph: FlowGraph<T>) -> (Labeling, T) {
    let flow = graph.network.max_flow();
    let sink_side = graph.network.sink_side();
    let labels = (0..graph.num_vars).map(|i| sink_side[i] as usize).collect();
    (Labeling::new(labels), flow + graph.offset)
}

/// Convenience: build, cut, and report the energy evaluated on `be` itself.
pub fn solve<T: Real>(be: &BinaryEnergy<T>) -> Result<(Labeling, T)> {
    let (labeling, _) = min_cut(build_graph(be)?);
    let value = be.evaluate(&crate::binary::to_bits(&labeling));
    Ok((labeling, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binary::BinaryEdge;
    use crate::rng;

    fn pair(u: [[f64; 2]; 2], t: [[f64; 2]; 2]) -> BinaryEnergy<f64> {
        BinaryEnergy::new(vec![u[0], u[1]], vec![BinaryEdge { i: 0, j: 1, table: t }]).unwrap()
    }

    fn exhaustive(be: &BinaryEnergy<f64>) -> f64 {
        let n = be.num_vars();
        (0..1u32 << n)
            .map(|m| {
                let x: Vec<bool> = (0..n).map(|i| m >> i & 1 == 1).collect();
                be.evaluate(&x)
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn four_cuts_of_the_two_variable_graph() {
        // a, b, c, d = 1, 2, 3, 4 and e, f, g, h chosen submodular
        let (a, b, c, d) = (1.0, 2.0, 3.0, 4.0);
        let (e, f, g, h) = (0.5, 2.0, 3.0, 1.0);
        let be = pair([[a, b], [c, d]], [[e, g], [f, h]]);
        let expected = [
            ([false, false], a + e + c),
            ([true, false], b + f + c),
            ([false, true], a + g + d),
            ([true, true], b + d + h),
        ];
        for (x, val) in expected {
            assert_eq!(be.evaluate(&x), val);
        }
        let (l, v) = min_cut(build_graph(&be).unwrap());
        assert_eq!(v, a + e + c);
        assert_eq!(l.values(), &[0, 0]);
    }

    #[test]
    fn cut_plus_offset_reproduces_every_assignment() {
        // force each assignment to be optimal in turn through large unaries
        let base = [[0.0, 0.0], [0.0, 0.0]];
        let table = [[0.3, 1.1], [0.9, 0.2]];
        for m in 0..4 {
            let mut u = base;
            u[0][1 - (m & 1)] += 10.0;
            u[1][1 - (m >> 1 & 1)] += 10.0;
            let be = pair(u, table);
            let (l, v) = min_cut(build_graph(&be).unwrap());
            let x = [m & 1 == 1, m >> 1 & 1 == 1];
            assert_eq!(l.values(), &[x[0] as usize, x[1] as usize]);
            assert!((v - be.evaluate(&x)).abs() < 1e-12);
        }
    }

    #[test]
    fn unary_only_picks_smaller_cost() {
        let be = BinaryEnergy::<f64>::new(vec![[1.0, 0.5], [0.2, 0.9], [0.4, 0.4]], vec![]).unwrap();
        let (l, v) = min_cut(build_graph(&be).unwrap());
        assert_eq!(l.values(), &[1, 0, 0]);
        assert!((v - 1.1).abs() < 1e-12);
    }

    #[test]
    fn rejects_supermodular_edge() {
        let be = pair([[0.0; 2]; 2], [[1.0, 0.0], [0.0, 1.0]]);
        match build_graph(&be) {
            Err(Error::SubmodularityViolation { i: 0, j: 1, excess }) => {
                assert!((excess - 2.0).abs() < 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
        // tiny residues are clamped
        let be = pair([[0.0; 2]; 2], [[1.0, 0.5], [0.5, 1e-14]]);
        assert!(build_graph(&be).is_ok());
    }

    #[test]
    fn matches_enumeration_on_random_submodular() {
        let mut r = rng::seeded(11);
        for trial in 0..10 {
            let n = 6 + trial % 8;
            let unary = (0..n).map(|_| [rng::standard_normal(&mut r), rng::standard_normal(&mut r)]).collect();
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng::uniform01(&mut r) < 0.4 {
                        let t00 = rng::uniform(&mut r, -1.0, 1.0);
                        let t11 = rng::uniform(&mut r, -1.0, 1.0);
                        let t01 = rng::uniform(&mut r, -1.0, 1.0);
                        let t10 = t00 + t11 - t01 + rng::uniform01(&mut r);
                        edges.push(BinaryEdge { i, j, table: [[t00, t01], [t10, t11]] });
                    }
                }
            }
            let be = BinaryEnergy::new(unary, edges).unwrap();
            let (l, v) = solve(&be).unwrap();
            let best = exhaustive(&be);
            assert!((v - best).abs() < 1e-9, "trial {trial}: {v} vs {best}");
            assert_eq!(be.evaluate_labeling(&l).unwrap(), v);
        }
    }

    #[test]
    fn unary_shift_shifts_optimum() {
        let be = pair([[0.1, 0.7], [0.4, -0.2]], [[0.0, 1.0], [1.0, 0.0]]);
        let (_, v0) = solve(&be).unwrap();
        let mut shifted = be.clone();
        shifted.unary[1][0] += 0.25;
        shifted.unary[1][1] += 0.25;
        let (_, v1) = solve(&shifted).unwrap();
        assert!((v1 - v0 - 0.25).abs() < 1e-12);
    }
}
