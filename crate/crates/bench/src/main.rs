use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use pwe::corrclust::purity;
use pwe::format::{read_affinity, read_energy, write_affinity, write_energy};
use pwe::{AffinityMatrix64, Energy64, EnergyPyramid, Error, Labeling};
use pwe_bench::solvers::multiscale_params;
use pwe_bench::{
    bench_run, brute_force, gen_cc_matrix, gen_grid_energy, BenchError, CcParams, CcSolver, GridSolver, SuiteConfig,
};

#[derive(Parser)]
#[command(name = "pwe", version, about = "Pairwise energy minimization and correlation clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize a pairwise energy read from a `.pwe` file.
    Solve {
        #[arg(long)]
        energy: PathBuf,
        #[arg(long, value_parser = parse_grid_solver)]
        solver: GridSolver,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the pyramid levels and interpolations (multiscale solvers).
        #[arg(long)]
        dump_pyramid: Option<PathBuf>,
    },
    /// Cluster a signed affinity read from an `.aff` file.
    Cc {
        #[arg(long)]
        affinity: PathBuf,
        #[arg(long, value_parser = parse_cc_solver)]
        solver: CcSolver,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Ground-truth labels, whitespace separated, to report purity.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Write a synthetic instance.
    #[command(subcommand)]
    Gen(Gen),
    /// Run a benchmark suite described by a TOML file.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Write the CSV report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Exhaustive minimum of a small energy.
    Oracle {
        #[arg(long)]
        energy: PathBuf,
    },
}

#[derive(Subcommand)]
enum Gen {
    /// 4-connected grid with Gaussian unaries and random semi-metric pairwise costs.
    Grid {
        #[arg(long, default_value_t = 50)]
        height: usize,
        #[arg(long, default_value_t = 50)]
        width: usize,
        #[arg(long, default_value_t = 5)]
        labels: usize,
        #[arg(long, default_value_t = 10.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Planted partition with noisy signed affinities.
    Cc {
        #[arg(long, default_value_t = 750)]
        n: usize,
        #[arg(long, default_value_t = 15)]
        clusters: usize,
        #[arg(long, default_value_t = 0.1)]
        density: f64,
        #[arg(long, default_value_t = 0.2)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
        /// Also write the planted labels here.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Output {
    /// Destination file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_grid_solver(s: &str) -> Result<GridSolver, String> {
    s.parse().map_err(|e: BenchError| e.to_string())
}

fn parse_cc_solver(s: &str) -> Result<CcSolver, String> {
    s.parse().map_err(|e: BenchError| e.to_string())
}

fn open(path: &Path) -> Result<BufReader<File>, Error> {
    File::open(path).map(BufReader::new).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn create(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn labels_line(labeling: &Labeling) -> String {
    labeling.values().iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")
}

fn read_labels(path: &Path) -> Result<Labeling, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (k, line) in text.lines().enumerate() {
        for field in line.split_whitespace() {
            let v = field
                .parse()
                .map_err(|_| Error::Parse { line: k + 1, msg: format!("cannot parse a label from {field:?}") })?;
            values.push(v);
        }
    }
    Ok(Labeling::new(values))
}

fn report(out: &mut dyn Write, energy: f64, labeling: &Labeling) -> Result<(), Error> {
    writeln!(out, "energy {energy:.6}")?;
    writeln!(out, "labels {}", labels_line(labeling))?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Command::Solve { energy, solver, seed, dump_pyramid } => {
            let e: Energy64 = read_energy(open(&energy)?)?;
            info!(
                "{}: {} variables, {} labels, {} edges",
                energy.display(),
                e.num_vars(),
                e.num_labels(),
                e.edges().len()
            );
            if let Some(dir) = dump_pyramid {
                match solver.coarsening() {
                    Some(mode) => {
                        std::fs::create_dir_all(&dir).map_err(Error::from)?;
                        EnergyPyramid::build(&e, mode, &multiscale_params(seed))?.dump(&dir)?;
                    }
                    None => log::warn!("{solver} is single-scale, no pyramid to dump"),
                }
            }
            let (labeling, value) = solver.run(&e, seed)?;
            let mut out = create(None)?;
            report(&mut out, value, &labeling)?;
            out.flush().map_err(Error::from)?;
        }
        Command::Cc { affinity, solver, seed, truth } => {
            let w: AffinityMatrix64 = read_affinity(open(&affinity)?)?;
            let (labeling, value) = solver.run(&w, seed)?;
            let mut out = create(None)?;
            report(&mut out, value, &labeling)?;
            writeln!(out, "clusters {}", labeling.num_distinct()).map_err(Error::from)?;
            if let Some(t) = truth {
                writeln!(out, "purity {:.6}", purity(&labeling, &read_labels(&t)?)?).map_err(Error::from)?;
            }
            out.flush().map_err(Error::from)?;
        }
        Command::Gen(Gen::Grid { height, width, labels, lambda, seed, out }) => {
            let e = gen_grid_energy(height, width, labels, lambda, seed)?;
            let mut w = create(out.output.as_deref())?;
            write_energy(&mut w, &e)?;
            w.flush().map_err(Error::from)?;
        }
        Command::Gen(Gen::Cc { n, clusters, density, noise, seed, out, truth }) => {
            let params = CcParams { n, clusters, density, noise, ..Default::default() };
            let (w, planted) = gen_cc_matrix(&params, seed)?;
            let mut sink = create(out.output.as_deref())?;
            write_affinity(&mut sink, &w)?;
            sink.flush().map_err(Error::from)?;
            if let Some(t) = truth {
                let mut sink = create(Some(&t))?;
                writeln!(sink, "{}", labels_line(&planted)).map_err(Error::from)?;
                sink.flush().map_err(Error::from)?;
            }
        }
        Command::Bench { config, output } => {
            let text = std::fs::read_to_string(&config).map_err(|e| Error::Io(format!("{}: {e}", config.display())))?;
            let suite = SuiteConfig::from_toml(&text)?;
            let rep = bench_run(&suite)?;
            let mut sink = create(output.as_deref())?;
            sink.write_all(rep.to_csv().as_bytes()).map_err(Error::from)?;
            sink.flush().map_err(Error::from)?;
            eprint!("{}", rep.summary_table());
        }
        Command::Oracle { energy } => {
            let e: Energy64 = read_energy(open(&energy)?)?;
            let (labeling, value) = brute_force(&e)?;
            let mut out = create(None)?;
            report(&mut out, value, &labeling)?;
            out.flush().map_err(Error::from)?;
        }
    }
    Ok(())
}

fn exit_code(e: &BenchError) -> u8 {
    match e {
        BenchError::Core(Error::Parse { .. }) | BenchError::Config(_) | BenchError::UnknownSolver(_) => 2,
        BenchError::Core(Error::SizeCap(_)) => 3,
        BenchError::Core(_) => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
