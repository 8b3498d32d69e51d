//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if a criterion fails that is not listed in [`KNOWN_FAILURES`].
//!
//! Run alone with `cargo test -p pwe-bench --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::Instant;

use ndarray::Array2;
use pwe::corrclust::{prior_on_k, purity};
use pwe::multiscale::{
    build_interpolation, coarsen_labels, estimate_correlations, galerkin_product, label_interpolation, select_coarse,
    EstimateOptions,
};
use pwe::rng::{self, ChaCha8Rng};
use pwe::{
    alpha_beta_swap, alpha_expansion, expand_and_explore, icm, mincut, qpbo_solve, qpboi_improve, swap_and_explore,
    AffinityMatrix64, AssignmentMatrix, BinaryEdge, BinaryEnergy64, ImproveOptions, InterpolationMatrix64, Labeling,
    MoveOptions, Solution,
};
use pwe_bench::{
    brute_force_binary, brute_force_partitions, gen_cc_complete, gen_cc_matrix, gen_grid_energy, CcParams, CcSolver,
    GridSolver,
};

/// Criteria that cannot hold as stated; each one is still computed and
/// reported, but its failure does not fail the run.
const KNOWN_FAILURES: &[(u32, &str)] =
    &[(8, "the modes of S(n, k) for n = 50, 100, 200 are 16, 28, 50, not within 2 of n / ln n")];

type Criterion = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_binary(r: &mut ChaCha8Rng, n: usize, submodular: bool) -> BinaryEnergy64 {
    let unary = (0..n).map(|_| [rng::standard_normal(r), rng::standard_normal(r)]).collect();
    let density = rng::uniform(r, 0.2, 0.9);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng::uniform01(r) < density {
                let mut table = [[0.0; 2]; 2];
                table.iter_mut().flatten().for_each(|t| *t = rng::uniform(r, -2.0, 2.0));
                let margin = table[0][1] + table[1][0] - table[0][0] - table[1][1];
                if submodular && margin < 0.0 {
                    table[0][1] -= margin;
                }
                edges.push(BinaryEdge { i, j, table });
            }
        }
    }
    BinaryEnergy64::new(unary, edges).expect("valid edges")
}

fn random_affinity(r: &mut ChaCha8Rng, n: usize) -> AffinityMatrix64 {
    let mut entries = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng::uniform01(r) < 0.4 {
                entries.push((i, j, rng::uniform(r, -1.0, 1.0)));
            }
        }
    }
    AffinityMatrix64::from_triplets(n, entries).expect("valid affinity")
}

fn random_labeling(r: &mut ChaCha8Rng, n: usize, l: usize) -> Labeling {
    Labeling::new((0..n).map(|_| rng::below(r, l)).collect())
}

fn random_stochastic(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    let mut u = Array2::from_shape_fn((rows, cols), |_| rng::uniform01(r));
    for mut row in u.rows_mut() {
        let s = row.sum();
        row.mapv_inplace(|x| x / s);
    }
    u
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn exactness() -> Outcome {
    let start = Instant::now();
    let mut r = rng::seeded(1);
    let mut mismatches = 0;
    for t in 0..200 {
        let n = 1 + t % 14;
        let be = random_binary(&mut r, n, true);
        let (_, cut) = mincut::solve(&be).expect("submodular");
        let (_, best) = brute_force_binary(&be).expect("small");
        if !rel_close(cut, best, 1e-9) {
            mismatches += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(mismatches == 0 && secs < 10.0, format!("{mismatches} mismatches in 200, {secs:.2} s"))
}

fn persistency() -> Outcome {
    let mut r = rng::seeded(2);
    let mut violations = 0;
    let mut labeled = 0;
    let mut total = 0;
    let mut t = 0;
    while total < 200 {
        t += 1;
        let n = 2 + t % 11;
        let be = random_binary(&mut r, n, false);
        if be.is_submodular() {
            continue;
        }
        total += 1;
        let partial = qpbo_solve(&be);
        let (_, best) = brute_force_binary(&be).expect("small");
        let mut best_consistent = f64::INFINITY;
        for code in 0..1u32 << n {
            let x: Vec<bool> = (0..n).map(|i| code >> i & 1 == 1).collect();
            if partial.values().iter().zip(&x).all(|(p, &b)| p.is_none_or(|v| v == b)) {
                best_consistent = best_consistent.min(be.evaluate(&x));
            }
        }
        labeled += n - partial.num_unknown();
        if !rel_close(best_consistent, best, 1e-9) {
            violations += 1;
        }
    }
    outcome(violations == 0, format!("{violations} violations in 200, {labeled} variables labeled"))
}

fn monotone(s: &Solution<f64>, start: f64) -> bool {
    s.is_monotone() && s.trace.first().is_some_and(|&e| rel_close(e, start, 1e-12)) && s.energy <= start + 1e-9
}

fn monotone_descent() -> Outcome {
    let mut r = rng::seeded(3);
    let mut counts = [0usize; 6];
    for t in 0..1000u64 {
        let kind = (t % 6) as usize;
        let opts = MoveOptions { improve: ImproveOptions { seed: t, ..Default::default() }, ..Default::default() };
        let ok = match kind {
            0..=2 => {
                let side = 3 + rng::below(&mut r, 6);
                let l = 2 + rng::below(&mut r, 4);
                let e = gen_grid_energy(side, side, l, rng::uniform(&mut r, 0.0, 15.0), t).expect("grid");
                let init = random_labeling(&mut r, side * side, l);
                let start = e.evaluate(&init).expect("valid");
                let s = match kind {
                    0 => icm(&e, &init, 1000),
                    1 => alpha_beta_swap(&e, &init, opts),
                    _ => alpha_expansion(&e, Some(&init), opts),
                }
                .expect("solver");
                monotone(&s, start)
            }
            3 => {
                let n = 2 + rng::below(&mut r, 30);
                let be = random_binary(&mut r, n, false);
                let init = random_labeling(&mut r, n, 2);
                let before = be.evaluate_labeling(&init).expect("binary");
                let after = be.evaluate_labeling(&qpboi_improve(&be, &init, opts.improve)).expect("binary");
                after <= before + 1e-9
            }
            _ => {
                let n = 2 + rng::below(&mut r, 40);
                let w = random_affinity(&mut r, n);
                let k = 1 + rng::below(&mut r, 5);
                let init = random_labeling(&mut r, n, k);
                let start = w.potts_energy(init.values());
                let s = if kind == 4 {
                    swap_and_explore(&w, Some(&init), opts)
                } else {
                    expand_and_explore(&w, Some(&init), opts)
                }
                .expect("solver");
                monotone(&s, start)
            }
        };
        assert!(ok, "trial {t} ({kind}) increased the energy");
        counts[kind] += 1;
    }
    outcome(
        true,
        format!(
            "1000 trials (icm {}, swap {}, expansion {}, qpboi {}, swap-explore {}, expand-explore {})",
            counts[0], counts[1], counts[2], counts[3], counts[4], counts[5]
        ),
    )
}

fn galerkin_identity() -> Outcome {
    let mut r = rng::seeded(4);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for t in 0..500u64 {
        let (h, w) = (3 + rng::below(&mut r, 8), 3 + rng::below(&mut r, 8));
        let l = 2 + rng::below(&mut r, 4);
        let e = gen_grid_energy(h, w, l, rng::uniform(&mut r, 1.0, 15.0), t).expect("grid");
        let p = if t % 2 == 0 {
            let c =
                estimate_correlations(&e, &EstimateOptions { seed: t, ..Default::default() }).expect("correlations");
            build_interpolation(&c, &select_coarse(&c, 0.2), 3).expect("interpolation").0
        } else {
            random_interpolation(&mut r, e.num_vars())
        };
        let coarse = galerkin_product(&e, &p).expect("symmetric V");
        let uc = random_stochastic(&mut r, p.num_coarse(), l);
        let a = coarse.relaxed(&uc);
        let b = e.evaluate_relaxed(&AssignmentMatrix::new(p.apply(&uc))).expect("stochastic");
        worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1.0));
        failures += usize::from(!rel_close(a, b, 1e-9));
    }
    for t in 0..500u64 {
        let l = 3 + rng::below(&mut r, 10);
        let e = gen_grid_energy(3 + rng::below(&mut r, 5), 3 + rng::below(&mut r, 5), l, 10.0, t).expect("grid");
        let p = if t % 2 == 0 {
            label_interpolation(e.pairwise(), 0.75, 2).expect("labels")
        } else {
            random_interpolation(&mut r, l)
        };
        let coarse = coarsen_labels(&e, &p).expect("labels");
        let uc = random_stochastic(&mut r, e.num_vars(), p.num_coarse());
        let a = coarse.evaluate_relaxed(&AssignmentMatrix::new(uc.clone())).expect("stochastic");
        // U = Uc P^T is not row-stochastic in general, so evaluate the trace form directly
        let b = e.trace_form(&uc.dot(&p.to_dense().t()));
        worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1.0));
        failures += usize::from(!rel_close(a, b, 1e-9));
    }
    outcome(failures == 0, format!("{failures} of 500 + 500 outside 1e-9, worst relative error {worst:.1e}"))
}

/// Random sparse row-stochastic matrix with unit rows on a random subset.
fn random_interpolation(r: &mut ChaCha8Rng, n: usize) -> InterpolationMatrix64 {
    let nc = 1 + rng::below(r, n);
    let mut order: Vec<usize> = (0..n).collect();
    rng::shuffle(r, &mut order);
    let mut rows = vec![Vec::new(); n];
    for (c, &i) in order[..nc].iter().enumerate() {
        rows[i] = vec![(c, 1.0)];
    }
    for &i in &order[nc..] {
        let mut cols: Vec<usize> = (0..nc).collect();
        rng::shuffle(r, &mut cols);
        cols.truncate(1 + rng::below(r, 3.min(nc)));
        let weights: Vec<f64> = cols.iter().map(|_| rng::uniform(r, 0.1, 1.0)).collect();
        let sum: f64 = weights.iter().sum();
        rows[i] = cols.into_iter().zip(weights).map(|(c, w)| (c, w / sum)).collect();
    }
    InterpolationMatrix64::from_rows(nc, rows).expect("stochastic rows")
}

fn synthetic_ordering() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for lambda in [5.0, 10.0, 15.0] {
        let mut sums = [0.0f64; 4];
        let solvers = [GridSolver::Icm, GridSolver::MsIcm, GridSolver::Swap, GridSolver::MsSwap];
        for seed in 0..100 {
            let e = gen_grid_energy(50, 50, 5, lambda, seed).expect("grid");
            for (s, solver) in sums.iter_mut().zip(solvers) {
                *s += solver.run(&e, seed).expect("solver").1;
            }
        }
        let [icm, ms_icm, swap, ms_swap] = sums.map(|s| s / 100.0);
        let gap = (icm - ms_icm) / icm.abs();
        let ok = ms_icm < icm && gap >= 0.02 && ms_swap <= swap + 0.01 * swap.abs();
        pass &= ok;
        parts.push(format!(
            "lambda {lambda}: icm {icm:.2} ms-icm {ms_icm:.2} (gap {:.2}%), swap {swap:.2} ms-swap {ms_swap:.2}",
            100.0 * gap
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 1800.0;
    outcome(pass, format!("{}; {secs:.0} s", parts.join("; ")))
}

fn model_selection() -> Outcome {
    let params = CcParams { n: 750, clusters: 15, density: 0.1, noise: 0.2, ..Default::default() };
    let mut parts = Vec::new();
    let mut pass = true;
    for solver in [CcSolver::SwapExplore, CcSolver::AdaptiveIcm] {
        let mut good = 0;
        for seed in 0..10 {
            let (w, truth) = gen_cc_matrix(&params, seed).expect("instance");
            assert!(w.density() >= 0.1);
            let (labels, _) = solver.run(&w, seed).expect("solver");
            let k = labels.num_distinct();
            if k.abs_diff(15) <= 3 && purity(&labels, &truth).expect("lengths") >= 0.9 {
                good += 1;
            }
        }
        pass &= good >= 8;
        parts.push(format!("{solver} {good}/10"));
    }
    outcome(pass, parts.join(", "))
}

fn partition_oracle() -> Outcome {
    let mut hits = [0usize; 3];
    for seed in 0..100u64 {
        let n = 6 + (seed % 7) as usize;
        let (w, _) = gen_cc_complete(n, 2 + (seed % 3) as usize, seed).expect("instance");
        let (_, best) = brute_force_partitions(&w).expect("small");
        for (h, solver) in hits.iter_mut().zip(CcSolver::ALL) {
            let (_, e) = solver.run(&w, seed).expect("solver");
            assert!(e >= best - 1e-9, "{solver} beat the exhaustive optimum");
            if rel_close(e, best, 1e-9) {
                *h += 1;
            }
        }
    }
    let detail = CcSolver::ALL.iter().zip(hits).map(|(s, h)| format!("{s} {h}/100")).collect::<Vec<_>>().join(", ");
    outcome(hits.iter().all(|&h| h >= 95), detail)
}

fn stirling_prior() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [50usize, 100, 200] {
        let prior = prior_on_k(n);
        let mode = 1 + (0..n).min_by(|&a, &b| prior[a].total_cmp(&prior[b])).expect("nonempty");
        let target = n as f64 / (n as f64).ln();
        pass &= (mode as f64 - target).abs() <= 2.0;
        parts.push(format!("n {n}: mode {mode} vs {target:.1}"));
    }
    let worst =
        (1..=60).map(|n| (prior_on_k(n).iter().map(|x| (-x).exp()).sum::<f64>() - 1.0).abs()).fold(0.0, f64::max);
    pass &= worst <= 1e-12;
    parts.push(format!("max |sum - 1| {worst:.1e} for n <= 60"));
    outcome(pass, parts.join("; "))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = dir.path().join("suite.toml");
    std::fs::write(
        &config,
        "seeds = 3\n\n[[grid]]\nheight = 12\nwidth = 12\nlabels = 4\nlambda = [5.0, 10.0]\n\
         solvers = [\"icm\", \"swap\", \"ms-icm\", \"ms-swap\", \"ms-expand\"]\n\n\
         [[cc]]\nn = 60\nclusters = 4\ndensity = 0.3\nnoise = 0.2\n\
         solvers = [\"adaptive-icm\", \"swap-explore\", \"expand-explore\"]\n",
    )
    .expect("write config");
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_pwe"))
            .args(["bench", "--config"])
            .arg(&config)
            .arg("--output")
            .arg(&out)
            .output()
            .expect("spawn");
        assert!(status.status.success(), "bench failed: {}", String::from_utf8_lossy(&status.stderr));
        std::fs::read(out).expect("report")
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    let rows = a.iter().filter(|&&c| c == b'\n').count().saturating_sub(1);
    outcome(a == b && rows == 39, format!("two runs, {rows} rows each, identical: {}", a == b))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (1, "min-cut exactness", exactness),
        (2, "QPBO weak persistency", persistency),
        (3, "monotone descent", monotone_descent),
        (4, "Galerkin identity", galerkin_identity),
        (5, "synthetic ordering", synthetic_ordering),
        (6, "CC model selection", model_selection),
        (7, "partition oracle", partition_oracle),
        (8, "Stirling prior", stirling_prior),
        (9, "CLI determinism", determinism),
    ];
    let mut unexpected = 0;
    for (id, name, check) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        let known = KNOWN_FAILURES.iter().find(|k| k.0 == id);
        println!(
            "{} [{id}] {name}: {} ({:.1} s)",
            if result.pass { "PASS" } else { "FAIL" },
            result.detail,
            start.elapsed().as_secs_f64()
        );
        match (result.pass, known) {
            (false, Some((_, why))) => println!("     expected failure: {why}"),
            (false, None) => unexpected += 1,
            (true, Some(_)) => println!("     listed as a known failure but passed"),
            (true, None) => {}
        }
    }
    if unexpected > 0 {
        println!("{unexpected} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
