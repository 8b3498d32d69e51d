//! Dinic's blocking-flow max-flow on a residual arc list.

use std::collections::VecDeque;

use crate::scalar::Real;

#[derive(Debug, Clone)]
struct Arc<T> {
    to: usize,
    /// index of the paired reverse arc
    rev: usize,
    residual: T,
}

#[derive(Debug, Clone)]
pub struct FlowNetwork<T> {
    arcs: Vec<Arc<T>>,
    head: Vec<Vec<usize>>,
    source: usize,
    sink: usize,
    max_capacity: T,
}

impl<T: Real> FlowNetwork<T> {
    /// `nodes` vertices; source and sink are two of them.
    pub fn new(nodes: usize, source: usize, sink: usize) -> Self {
        FlowNetwork { arcs: Vec::new(), head: vec![Vec::new(); nodes], source, sink, max_capacity: T::zero() }
    }

    pub fn num_nodes(&self) -> usize {
        self.head.len()
    }

    /// Arc `u -> v` with capacity `cap` and reverse capacity `rev_cap`.
    pub fn add_arc(&mut self, u: usize, v: usize, cap: T, rev_cap: T) {
        debug_assert!(cap >= T::zero() && rev_cap >= T::zero());
        if cap == T::zero() && rev_cap == T::zero() {
            return;
        }
        let a = self.arcs.len();
        self.arcs.push(Arc { to: v, rev: a + 1, residual: cap });
        self.arcs.push(Arc { to: u, rev: a, residual: rev_cap });
        self.head[u].push(a);
        self.head[v].push(a + 1);
        self.max_capacity = self.max_capacity.max(cap).max(rev_cap);
    }

    fn eps(&self) -> T {
        T::TOLERANCE * self.max_capacity
    }

    fn levels(&self, eps: T) -> Option<Vec<usize>> {
        let mut level = vec![usize::MAX; self.num_nodes()];
        level[self.source] = 0;
        let mut queue = VecDeque::from([self.source]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.head[u] {
                let arc = &self.arcs[a];
                if arc.residual > eps && level[arc.to] == usize::MAX {
                    level[arc.to] = level[u] + 1;
                    queue.push_back(arc.to);
                }
            }
        }
        (level[self.sink] != usize::MAX).then_some(level)
    }

    /// Saturates the network and returns the flow value.
    pub fn max_flow(&mut self) -> T {
        let eps = self.eps();
        let mut total = T::zero();
        while let Some(level) = self.levels(eps) {
            let mut next = vec![0usize; self.num_nodes()];
            let mut path: Vec<usize> = Vec::new();
            let mut u = self.source;
            loop {
                if u == self.sink {
                    let push = path.iter().map(|&a| self.arcs[a].residual).fold(T::infinity(), T::min);
                    for &a in &path {
                        self.arcs[a].residual -= push;
                        let r = self.arcs[a].rev;
                        self.arcs[r].residual += push;
                    }
                    total += push;
                    // retreat to the tail of the first saturated arc
                    let cut = path.iter().position(|&a| self.arcs[a].residual <= eps).unwrap_or(0);
                    path.truncate(cut);
                    u = path.last().map_or(self.source, |&a| self.arcs[a].to);
                    continue;
                }
                let mut advanced = false;
                while next[u] < self.head[u].len() {
                    let a = self.head[u][next[u]];
                    let arc = &self.arcs[a];
                    if arc.residual > eps && level[arc.to] == level[u] + 1 {
                        path.push(a);
                        u = arc.to;
                        advanced = true;
                        break;
                    }
                    next[u] += 1;
                }
                if !advanced {
                    if u == self.source {
                        break;
                    }
                    // dead end: prune u from this phase
                    let a = path.pop().expect("non-source node reached through an arc");
                    let tail = self.arcs[self.arcs[a].rev].to;
                    next[tail] += 1;
                    u = tail;
                }
            }
        }
        total
    }

    fn reach(&self, start: usize, forward: bool) -> Vec<bool> {
        let eps = self.eps();
        let mut seen = vec![false; self.num_nodes()];
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &a in &self.head[u] {
                let arc = &self.arcs[a];
                // forward: residual u -> v; backward: residual v -> u lives on the reverse arc
                let open = if forward { arc.residual } else { self.arcs[arc.rev].residual };
                if open > eps && !seen[arc.to] {
                    seen[arc.to] = true;
                    stack.push(arc.to);
                }
            }
        }
        seen
    }

    /// Nodes reachable from the source in the residual graph.
    pub fn source_side(&self) -> Vec<bool> {
        self.reach(self.source, true)
    }

    /// Nodes that can still reach the sink in the residual graph.
    pub fn sink_side(&self) -> Vec<bool> {
        self.reach(self.sink, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_network() {
        // CLRS figure 26.1: max flow 23
        let mut g = FlowNetwork::new(6, 0, 5);
        for (u, v, c) in [
            (0, 1, 16.0),
            (0, 2, 13.0),
            (2, 1, 4.0),
            (1, 3, 12.0),
            (3, 2, 9.0),
            (2, 4, 14.0),
            (4, 3, 7.0),
            (3, 5, 20.0),
            (4, 5, 4.0),
        ] {
            g.add_arc(u, v, c, 0.0);
        }
        assert_eq!(g.max_flow(), 23.0);
        let s = g.source_side();
        assert!(s[0] && !s[5]);
        let t = g.sink_side();
        assert!(t[5] && !t[0]);
    }

    #[test]
    fn flow_value_independent_of_insertion_order() {
        let arcs = [(0, 2, 3.0), (0, 3, 2.0), (2, 3, 1.5), (3, 2, 0.5), (2, 1, 2.0), (3, 1, 4.0)];
        let mut values: Vec<f64> = Vec::new();
        for rot in 0..arcs.len() {
            let mut g = FlowNetwork::new(4, 0, 1);
            for k in 0..arcs.len() {
                let (u, v, c) = arcs[(k + rot) % arcs.len()];
                g.add_arc(u, v, c, 0.0);
            }
            values.push(g.max_flow());
        }
        assert!(values.iter().all(|&v| (v - values[0]).abs() < 1e-12), "{values:?}");
        assert!((values[0] - 5.0).abs() < 1e-12);
    }
}
