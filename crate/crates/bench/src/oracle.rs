//! Exhaustive optima for small instances.

use pwe::{AffinityMatrix64, BinaryEnergy64, Energy64, Error, Labeling, Result};

/// Largest number of labelings [`brute_force`] will enumerate.
pub const MAX_LABELINGS: f64 = 1e7;
/// Largest point count [`brute_force_partitions`] accepts.
pub const MAX_PARTITION_POINTS: usize = 13;
/// Largest variable count [`brute_force_binary`] accepts.
pub const MAX_BINARY_VARS: usize = 24;

/// Global minimum over all `l^n` labelings; the first minimizer in
/// odometer order (variable 0 fastest) wins ties.
pub fn brute_force(energy: &Energy64) -> Result<(Labeling, f64)> {
    let (n, l) = (energy.num_vars(), energy.num_labels());
    let count = (l as f64).powi(n as i32);
    if count > MAX_LABELINGS {
        return Err(Error::SizeCap(format!("{l}^{n} labelings exceed {MAX_LABELINGS:e}")));
    }
    let mut labels = vec![0usize; n];
    let mut current = energy.evaluate(&Labeling::new(labels.clone()))?;
    let mut best = (labels.clone(), current);
    loop {
        let mut k = 0;
        while k < n {
            let old = labels[k];
            let new = (old + 1) % l;
            current += energy.local_cost(k, new, &labels) - energy.local_cost(k, old, &labels);
            labels[k] = new;
            if new != 0 {
                break;
            }
            k += 1;
        }
        if k == n {
            break;
        }
        if current < best.1 - 1e-9 {
            best = (labels.clone(), current);
        }
    }
    let labeling = Labeling::new(best.0);
    let value = energy.evaluate(&labeling)?;
    Ok((labeling, value))
}

/// Global minimum of a binary energy over all `2^n` assignments.
pub fn brute_force_binary(be: &BinaryEnergy64) -> Result<(Labeling, f64)> {
    let n = be.num_vars();
    if n > MAX_BINARY_VARS {
        return Err(Error::SizeCap(format!("2^{n} assignments exceed 2^{MAX_BINARY_VARS}")));
    }
    let mut best = (0u64, f64::INFINITY);
    let mut x = vec![false; n];
    for code in 0..1u64 << n {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = code >> i & 1 == 1;
        }
        let e = be.evaluate(&x);
        if e < best.1 {
            best = (code, e);
        }
    }
    let labeling = Labeling::new((0..n).map(|i| (best.0 >> i & 1) as usize).collect());
    Ok((labeling, best.1))
}

/// Minimum of `sum W_ij [l_i != l_j]` over all set partitions, enumerated
/// as restricted growth strings. The returned labeling is that string.
pub fn brute_force_partitions(w: &AffinityMatrix64) -> Result<(Labeling, f64)> {
    let n = w.num_vars();
    if n > MAX_PARTITION_POINTS {
        return Err(Error::SizeCap(format!("{n} points exceed the partition limit {MAX_PARTITION_POINTS}")));
    }
    if n == 0 {
        return Ok((Labeling::new(Vec::new()), 0.0));
    }
    struct Search<'a> {
        w: &'a AffinityMatrix64,
        labels: Vec<usize>,
        best: Vec<usize>,
        best_value: f64,
    }
    impl Search<'_> {
        fn go(&mut self, i: usize, blocks: usize, value: f64) {
            if i == self.labels.len() {
                if value < self.best_value - 1e-12 {
                    self.best_value = value;
                    self.best.copy_from_slice(&self.labels);
                }
                return;
            }
            for c in 0..=blocks {
                let added: f64 = self
                    .w
                    .neighbors(i)
                    .iter()
                    .filter(|nb| nb.node < i && self.labels[nb.node] != c)
                    .map(|nb| nb.weight)
                    .sum();
                self.labels[i] = c;
                self.go(i + 1, blocks.max(c + 1), value + added);
            }
        }
    }
    let mut s = Search { w, labels: vec![0; n], best: vec![0; n], best_value: f64::INFINITY };
    s.go(1, 1, 0.0);
    let value = w.potts_energy(&s.best);
    Ok((Labeling::new(s.best), value))
}

/// Number of restricted growth strings of length `n` (the Bell number),
/// counted by enumeration.
pub fn count_partitions(n: usize) -> u64 {
    fn go(i: usize, n: usize, blocks: usize) -> u64 {
        if i == n {
            return 1;
        }
        (0..=blocks).map(|c| go(i + 1, n, blocks.max(c + 1))).sum()
    }
    if n == 0 {
        1
    } else {
        go(1, n, 1)
    }
}
