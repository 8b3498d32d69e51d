//! Seeded synthetic instances.

use ndarray::Array2;
use pwe::rng;
use pwe::{AffinityMatrix64, Energy64, Labeling, Result};

/// Grid energy on an `height x width` 4-connected grid with `labels` labels:
/// `D ~ N(0, 1)`, symmetric `V ~ U(0, 1)` with zero diagonal, and edge
/// weights `lambda * U(-1, 1)`. Variables are numbered row-major.
pub fn gen_grid_energy(height: usize, width: usize, labels: usize, lambda: f64, seed: u64) -> Result<Energy64> {
    let mut r = rng::seeded(seed);
    let n = height * width;
    let unary = Array2::from_shape_fn((n, labels), |_| rng::standard_normal(&mut r));
    let mut v = Array2::zeros((labels, labels));
    for a in 0..labels {
        for b in a + 1..labels {
            let x = rng::uniform01(&mut r);
            v[[a, b]] = x;
            v[[b, a]] = x;
        }
    }
    let mut edges = Vec::with_capacity(2 * n);
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            if x + 1 < width {
                edges.push((i, i + 1, lambda * rng::uniform(&mut r, -1.0, 1.0)));
            }
            if y + 1 < height {
                edges.push((i, i + width, lambda * rng::uniform(&mut r, -1.0, 1.0)));
            }
        }
    }
    Energy64::new(unary, v, edges)
}

/// Parameters of the planted-partition correlation clustering family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcParams {
    pub n: usize,
    pub clusters: usize,
    /// Target fraction of the `n (n - 1) / 2` pairs that carry an entry.
    pub density: f64,
    /// Fraction of entries whose sign and certainty are redrawn at random.
    pub noise: f64,
    /// Fraction of each variable's sampled partners taken from its own cluster.
    pub intra: f64,
    /// Largest to smallest cluster size.
    pub size_ratio: f64,
}

impl Default for CcParams {
    fn default() -> Self {
        CcParams { n: 750, clusters: 15, density: 0.1, noise: 0.2, intra: 0.25, size_ratio: 5.0 }
    }
}

/// Cluster sizes growing linearly from 1 to `ratio` (relative), rounded by
/// largest remainder so they sum to `n`; every cluster gets at least one.
fn cluster_sizes(n: usize, k: usize, ratio: f64) -> Vec<usize> {
    let rel: Vec<f64> =
        (0..k).map(|c| if k == 1 { 1.0 } else { 1.0 + (ratio - 1.0) * c as f64 / (k - 1) as f64 }).collect();
    let total: f64 = rel.iter().sum();
    let exact: Vec<f64> = rel.iter().map(|x| x / total * n as f64).collect();
    let mut sizes: Vec<usize> = exact.iter().map(|&x| (x.floor() as usize).max(1)).collect();
    let mut assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        rb.partial_cmp(&ra).expect("finite").then(a.cmp(&b))
    });
    let mut idx = 0;
    while assigned < n {
        sizes[order[idx % k]] += 1;
        assigned += 1;
        idx += 1;
    }
    while assigned > n {
        let c = (0..k).rev().max_by_key(|&c| sizes[c]).expect("k > 0");
        sizes[c] -= 1;
        assigned -= 1;
    }
    sizes
}

/// Draws `count` distinct items from `pool` (partial Fisher-Yates).
fn sample(r: &mut rng::ChaCha8Rng, pool: &mut [usize], count: usize) -> Vec<usize> {
    let count = count.min(pool.len());
    for t in 0..count {
        let s = t + rng::below(r, pool.len() - t);
        pool.swap(t, s);
    }
    pool[..count].to_vec()
}

/// Cluster of every variable: sizes from [`cluster_sizes`] laid over a
/// random permutation.
fn plant(r: &mut rng::ChaCha8Rng, n: usize, k: usize, ratio: f64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    rng::shuffle(r, &mut perm);
    let mut truth = vec![0usize; n];
    let mut cursor = 0;
    for (c, s) in cluster_sizes(n, k, ratio).into_iter().enumerate() {
        for &i in &perm[cursor..cursor + s] {
            truth[i] = c;
        }
        cursor += s;
    }
    truth
}

/// Planted partition: clusters of sizes in ratio about `size_ratio`,
/// assigned to randomly permuted variables. Each variable in turn picks
/// about `density (n - 1) / 2` new partners, an `intra` share of them from
/// its own cluster. Entries are `+c` within and `-c` across clusters with
/// certainty `c ~ U(0, 1]`; a `noise` share is redrawn with random sign and
/// certainty.
pub fn gen_cc_matrix(params: &CcParams, seed: u64) -> Result<(AffinityMatrix64, Labeling)> {
    let CcParams { n, clusters: k, density, noise, intra, size_ratio } = *params;
    if k == 0 || k > n {
        return Err(pwe::Error::Instance(format!("need 1 <= clusters <= n, got {k} for n={n}")));
    }
    let mut r = rng::seeded(seed);
    let truth = plant(&mut r, n, k, size_ratio);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for i in 0..n {
        members[truth[i]].push(i);
    }

    let per_var = (density * (n - 1) as f64 / 2.0).ceil() as usize;
    let mut linked = vec![std::collections::HashSet::new(); n];
    let mut entries = Vec::new();
    for i in 0..n {
        let mut own: Vec<usize> =
            members[truth[i]].iter().copied().filter(|&j| j != i && !linked[i].contains(&j)).collect();
        let mut other: Vec<usize> = (0..n).filter(|&j| truth[j] != truth[i] && !linked[i].contains(&j)).collect();
        let want_own = ((intra * per_var as f64).round() as usize).min(own.len());
        let want_other = (per_var - want_own).min(other.len());
        let mut partners = sample(&mut r, &mut own, want_own);
        partners.extend(sample(&mut r, &mut other, want_other));
        for j in partners {
            linked[i].insert(j);
            linked[j].insert(i);
            let certainty = 1.0 - rng::uniform01(&mut r);
            let mut w = if truth[i] == truth[j] { certainty } else { -certainty };
            if rng::uniform01(&mut r) < noise {
                let sign = if rng::uniform01(&mut r) < 0.5 { 1.0 } else { -1.0 };
                w = sign * (1.0 - rng::uniform01(&mut r));
            }
            entries.push((i.min(j), i.max(j), w));
        }
    }
    Ok((AffinityMatrix64::from_triplets(n, entries)?, Labeling::new(truth)))
}

/// Noiseless planted partition on the complete graph: every pair gets
/// `+c` within and `-c` across clusters, `c ~ U(0, 1]`. Cluster sizes follow
/// the default size ratio.
pub fn gen_cc_complete(n: usize, clusters: usize, seed: u64) -> Result<(AffinityMatrix64, Labeling)> {
    if clusters == 0 || clusters > n {
        return Err(pwe::Error::Instance(format!("need 1 <= clusters <= n, got {clusters} for n={n}")));
    }
    let mut r = rng::seeded(seed);
    let truth = plant(&mut r, n, clusters, CcParams::default().size_ratio);
    let mut entries = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let c = 1.0 - rng::uniform01(&mut r);
            entries.push((i, j, if truth[i] == truth[j] { c } else { -c }));
        }
    }
    Ok((AffinityMatrix64::from_triplets(n, entries)?, Labeling::new(truth)))
}
