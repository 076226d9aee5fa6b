use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use blockade_thermal::dimer::transition_coefficients;
use blockade_thermal::harness::validate::{validate_all, ValidateOptions};
use blockade_thermal::harness::{
    report_summary, run_experiment, sweep_finite_size, ExperimentConfig, InitialState, SolverKind, SweepConfig,
    TimeGrid,
};
use blockade_thermal::io::{fmt_num, write_atomic, write_json};
use blockade_thermal::{ConfigSpace, Error, Lattice, Result};

#[derive(Parser)]
#[command(
    name = "blockade-thermal",
    version,
    about = "Blockade spin dynamics vs Master and Fokker-Planck kinetics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate allowed configurations and print the graph summary.
    Enumerate {
        #[command(flatten)]
        model: ModelArgs,
        /// Write the edge list to this file.
        #[arg(long)]
        edges: Option<PathBuf>,
    },
    /// Print the exact ring coefficients nu_n, c_down, T_down, T_up.
    Coeffs {
        #[arg(long)]
        ring: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact quantum propagation.
    Quantum(RunArgs),
    /// Master equation.
    Master(RunArgs),
    /// Fokker-Planck equation (rings only).
    Fpe(RunArgs),
    /// Run several solvers and compare them (all applicable ones by default).
    Compare(RunArgs),
    /// RMS of quantum density fluctuations around the Master mean per ring size.
    Sweep {
        /// JSON sweep configuration; the standard L=15/20/25 sweep otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
    },
    /// Run the acceptance criteria; exits nonzero if any fails.
    Validate {
        /// Only the 8-site subset.
        #[arg(long)]
        fast: bool,
        /// Write the machine-readable summary here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// Ring with this many sites.
    #[arg(long, conflicts_with = "torus")]
    ring: Option<usize>,
    /// Periodic torus, e.g. 6x6.
    #[arg(long)]
    torus: Option<String>,
}

impl ModelArgs {
    fn lattice(&self) -> Result<Lattice> {
        match (self.ring, &self.torus) {
            (Some(l), None) => Lattice::ring(l),
            (None, Some(t)) => {
                let (a, b) = t
                    .split_once(['x', 'X'])
                    .ok_or_else(|| Error::Config(format!("torus `{t}` is not of the form LXxLY")))?;
                let parse = |s: &str| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|e| Error::Config(format!("torus `{t}`: {e}")))
                };
                Lattice::torus(parse(a)?, parse(b)?)
            }
            _ => Err(Error::Config("give exactly one of --ring or --torus".into())),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration; flags below are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
    /// Initial occupation bitmask.
    #[arg(long, conflicts_with_all = ["n", "seed"])]
    mask: Option<u64>,
    /// Column of the random initial state.
    #[arg(long, requires = "seed")]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 0.0)]
    start: f64,
    #[arg(long, default_value_t = 3.0)]
    stop: f64,
    #[arg(long, default_value_t = 61)]
    samples: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl RunArgs {
    fn experiment(&self, solvers: Option<Vec<SolverKind>>) -> Result<ExperimentConfig> {
        if let Some(path) = &self.config {
            let mut config = ExperimentConfig::from_json_file(path)?;
            if let Some(s) = solvers {
                config.solvers = s;
            }
            config.validate()?;
            return Ok(config);
        }
        let model = self.model.lattice()?;
        let initial = match (self.mask, self.n, self.seed) {
            (Some(mask), None, None) => InitialState::Bitmask { mask },
            (None, Some(n), Some(seed)) => InitialState::RandomInColumn { n, seed },
            _ => return Err(Error::Config("give --mask, or --n with --seed".into())),
        };
        let solvers = solvers.unwrap_or_else(|| {
            let mut all = vec![SolverKind::Quantum, SolverKind::Master];
            if matches!(model, Lattice::Ring { .. }) {
                all.push(SolverKind::Fpe);
            }
            all
        });
        let config = ExperimentConfig {
            model,
            initial,
            times: TimeGrid::new(self.start, self.stop, self.samples)?,
            solvers,
            output_dir: self.out.clone(),
            omega: 1.0,
        };
        config.validate()?;
        Ok(config)
    }
}

fn experiment(args: &RunArgs, solvers: Option<Vec<SolverKind>>) -> Result<()> {
    let config = args.experiment(solvers)?;
    let outcome = run_experiment(&config)?;
    print!("{}", report_summary(&outcome.report));
    eprintln!(
        "{} states, initial {} ({} excitations), artifacts in {}",
        outcome.manifest.states,
        outcome.manifest.initial_spins,
        outcome.manifest.initial_excitations,
        config.output_dir.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Enumerate { model, edges } => {
            let space = ConfigSpace::enumerate(model.lattice()?)?;
            println!("{}", serde_json::to_string_pretty(&space.summary())?);
            if let Some(path) = edges {
                write_atomic(&path, space.edge_list().as_bytes())?;
            }
        }
        Command::Coeffs { ring, out } => {
            let mut csv = String::from("l,n,nu_n,c_down,t_down,t_up\n");
            for r in transition_coefficients(ring)?.table() {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.l,
                    r.n,
                    r.nu_n,
                    r.c_down,
                    fmt_num(r.t_down),
                    fmt_num(r.t_up)
                ));
            }
            match out {
                Some(path) => write_atomic(&path, csv.as_bytes())?,
                None => print!("{csv}"),
            }
        }
        Command::Quantum(args) => experiment(&args, Some(vec![SolverKind::Quantum]))?,
        Command::Master(args) => experiment(&args, Some(vec![SolverKind::Master]))?,
        Command::Fpe(args) => experiment(&args, Some(vec![SolverKind::Fpe]))?,
        Command::Compare(args) => experiment(&args, None)?,
        Command::Sweep { config, out } => {
            let config = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                    serde_json::from_str::<SweepConfig>(&text)?
                }
                None => SweepConfig::standard(),
            };
            let summary = sweep_finite_size(&config)?;
            write_atomic(&out, summary.to_csv().as_bytes())?;
            write_json(&out.with_extension("json"), &summary)?;
            for row in &summary.rows {
                println!("L={} n0={} rms={}", row.l, row.n0, fmt_num(row.rms));
            }
            println!("decreasing: {}", summary.is_decreasing());
        }
        Command::Validate { fast, json } => {
            let summary = validate_all(&ValidateOptions {
                fast,
                ..Default::default()
            });
            for r in &summary.results {
                println!("{}", r.line());
            }
            if let Some(path) = json {
                write_json(&path, &summary)?;
            }
            return Ok(summary.passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
