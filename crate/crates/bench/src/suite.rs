//! Benchmark suites read from TOML and their reports.
//!
//! ```toml
//! seeds = 3          # runs seeds first_seed .. first_seed + seeds
//! first_seed = 0
//!
//! [[grid]]
//! height = 50
//! width = 50
//! labels = 5
//! lambda = [5.0, 10.0, 15.0]
//! solvers = ["icm", "ms-icm"]
//!
//! [[cc]]
//! n = 750
//! clusters = 15
//! density = 0.1
//! noise = 0.2
//! solvers = ["adaptive-icm", "swap-explore"]
//! ```

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;

use crate::gen::{gen_cc_matrix, gen_grid_energy, CcParams};
use crate::solvers::{CcSolver, GridSolver};
use crate::BenchError;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub seeds: u64,
    #[serde(default)]
    pub first_seed: u64,
    #[serde(default)]
    pub grid: Vec<GridFamily>,
    #[serde(default)]
    pub cc: Vec<CcFamily>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridFamily {
    pub height: usize,
    pub width: usize,
    pub labels: usize,
    pub lambda: Vec<f64>,
    pub solvers: Vec<String>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CcFamily {
    pub n: usize,
    pub clusters: usize,
    pub density: f64,
    pub noise: f64,
    pub solvers: Vec<String>,
}

impl SuiteConfig {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub family: &'static str,
    pub instance: String,
    pub solver: String,
    pub seed: u64,
    pub energy: f64,
    /// Clustering rows only.
    pub clusters: Option<usize>,
    pub purity: Option<f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub rows: Vec<Row>,
}

enum Job {
    Grid { h: usize, w: usize, l: usize, lambda: f64, solver: GridSolver, seed: u64 },
    Cc { params: CcParams, solver: CcSolver, seed: u64 },
}

impl Job {
    fn run(&self) -> Result<Row, BenchError> {
        let start = Instant::now();
        match *self {
            Job::Grid { h, w, l, lambda, solver, seed } => {
                let energy = gen_grid_energy(h, w, l, lambda, seed)?;
                let (_, value) = solver.run(&energy, seed)?;
                Ok(Row {
                    family: "grid",
                    instance: format!("{h}x{w} l={l} lambda={lambda}"),
                    solver: solver.to_string(),
                    seed,
                    energy: value,
                    clusters: None,
                    purity: None,
                    seconds: start.elapsed().as_secs_f64(),
                })
            }
            Job::Cc { params, solver, seed } => {
                let (w, truth) = gen_cc_matrix(&params, seed)?;
                let (labels, value) = solver.run(&w, seed)?;
                Ok(Row {
                    family: "cc",
                    instance: format!(
                        "n={} k={} density={} noise={}",
                        params.n, params.clusters, params.density, params.noise
                    ),
                    solver: solver.to_string(),
                    seed,
                    energy: value,
                    clusters: Some(labels.num_distinct()),
                    purity: Some(pwe::corrclust::purity(&labels, &truth)?),
                    seconds: start.elapsed().as_secs_f64(),
                })
            }
        }
    }
}

/// Runs every (instance, solver, seed) cell in parallel; rows come back in
/// configuration order regardless of scheduling.
pub fn bench_run(config: &SuiteConfig) -> Result<Report, BenchError> {
    let seeds = config.first_seed..config.first_seed + config.seeds;
    let mut jobs = Vec::new();
    for g in &config.grid {
        let solvers = g.solvers.iter().map(|s| s.parse()).collect::<Result<Vec<GridSolver>, _>>()?;
        for &lambda in &g.lambda {
            for &solver in &solvers {
                for seed in seeds.clone() {
                    jobs.push(Job::Grid { h: g.height, w: g.width, l: g.labels, lambda, solver, seed });
                }
            }
        }
    }
    for c in &config.cc {
        let solvers = c.solvers.iter().map(|s| s.parse()).collect::<Result<Vec<CcSolver>, _>>()?;
        let params =
            CcParams { n: c.n, clusters: c.clusters, density: c.density, noise: c.noise, ..Default::default() };
        for &solver in &solvers {
            for seed in seeds.clone() {
                jobs.push(Job::Cc { params, solver, seed });
            }
        }
    }
    let rows = jobs.par_iter().map(Job::run).collect::<Result<Vec<_>, _>>()?;
    Ok(Report { rows })
}

fn opt<T: std::fmt::Display>(x: Option<T>) -> String {
    x.map_or(String::new(), |v| v.to_string())
}

impl Report {
    /// One line per run. Timings are left out so that identical
    /// configurations give identical bytes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("family,instance,solver,seed,energy,clusters,purity\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.6},{},{}",
                r.family,
                r.instance,
                r.solver,
                r.seed,
                r.energy,
                opt(r.clusters),
                opt(r.purity.map(|p| format!("{p:.6}")))
            );
        }
        out
    }

    /// Per (instance, solver) cell: mean and standard deviation of the
    /// energy, mean wall time, and for clustering the mean k and purity.
    pub fn summary_table(&self) -> String {
        let mut cells: Vec<(&str, &str, Vec<&Row>)> = Vec::new();
        for r in &self.rows {
            match cells.iter_mut().find(|c| c.0 == r.instance && c.1 == r.solver) {
                Some(c) => c.2.push(r),
                None => cells.push((&r.instance, &r.solver, vec![r])),
            }
        }
        let mut out = format!(
            "{:<36} {:<14} {:>5} {:>14} {:>12} {:>10} {:>8} {:>8}\n",
            "instance", "solver", "runs", "mean energy", "std", "mean s", "mean k", "purity"
        );
        for (instance, solver, rows) in cells {
            let n = rows.len() as f64;
            let mean = rows.iter().map(|r| r.energy).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r.energy - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            let secs = rows.iter().map(|r| r.seconds).sum::<f64>() / n;
            let k = rows.iter().map(|r| r.clusters.map(|k| k as f64)).sum::<Option<f64>>().map(|s| s / n);
            let purity = rows.iter().map(|r| r.purity).sum::<Option<f64>>().map(|s| s / n);
            let _ = writeln!(
                out,
                "{:<36} {:<14} {:>5} {:>14.6} {:>12.6} {:>10.6} {:>8} {:>8}",
                instance,
                solver,
                rows.len(),
                mean,
                var.sqrt(),
                secs,
                opt(k.map(|k| format!("{k:.2}"))),
                opt(purity.map(|p| format!("{p:.4}")))
            );
        }
        out
    }
}
