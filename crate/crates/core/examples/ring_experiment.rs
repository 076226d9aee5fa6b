//! Full pipeline on a 25-site ring: quantum, Master and Fokker-Planck from
//! the same seeded micro-state, with artifacts written to a directory.
//!
//! cargo run --release --example ring_experiment -- out/ring25

use std::path::PathBuf;

use blockade_thermal::harness::{report_summary, run_experiment, ExperimentConfig, InitialState, SolverKind, TimeGrid};
use blockade_thermal::Lattice;

fn main() -> blockade_thermal::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("ring25"));
    let config = ExperimentConfig {
        model: Lattice::ring(25)?,
        initial: InitialState::RandomInColumn { n: 7, seed: 1 },
        times: TimeGrid::with_step(0.0, 3.0, 0.05)?,
        solvers: vec![SolverKind::Quantum, SolverKind::Master, SolverKind::Fpe],
        output_dir: out.clone(),
        omega: 1.0,
    };
    let outcome = run_experiment(&config)?;
    print!("{}", report_summary(&outcome.report));
    println!(
        "initial {}, artifacts {:?} in {}",
        outcome.manifest.initial_spins,
        outcome.manifest.artifacts,
        out.display()
    );
    Ok(())
}
