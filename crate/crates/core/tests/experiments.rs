use blockade_thermal::harness::validate::{validate_all, ValidateOptions};
use blockade_thermal::harness::{
    run_experiment, ExperimentConfig, InitialState, SolverKind, TimeGrid, ROW_SUM_TOLERANCE,
};
use blockade_thermal::master::{build_rates_1d, RateMatrix};
use blockade_thermal::{Lattice, Result};

fn ring_config(dir: &std::path::Path) -> ExperimentConfig {
    ExperimentConfig {
        model: Lattice::ring(14).unwrap(),
        initial: InitialState::Bitmask { mask: 0b1001001001 },
        times: TimeGrid::with_step(0.0, 2.0, 0.05).unwrap(),
        solvers: vec![SolverKind::Fpe, SolverKind::Quantum, SolverKind::Master],
        output_dir: dir.to_path_buf(),
        omega: 1.0,
    }
}

#[test]
fn every_written_distribution_is_normalized() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_experiment(&ring_config(dir.path())).unwrap();
    for (_, traj) in &out.trajectories {
        assert_eq!(traj.len(), 41);
        for d in traj {
            assert!((d.total() - 1.0).abs() < ROW_SUM_TOLERANCE);
        }
    }
    let csv = std::fs::read_to_string(dir.path().join("master.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let total: f64 = cells[1..cells.len() - 2].iter().sum();
        assert!((total - 1.0).abs() < ROW_SUM_TOLERANCE);
    }
}

#[test]
fn solvers_are_run_in_a_fixed_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_experiment(&ring_config(dir.path())).unwrap();
    let order: Vec<SolverKind> = out.trajectories.iter().map(|(s, _)| *s).collect();
    assert_eq!(order, vec![SolverKind::Quantum, SolverKind::Master, SolverKind::Fpe]);
    let pair = &out.report.pairs[0];
    assert_eq!((pair.a, pair.b), (SolverKind::Quantum, SolverKind::Master));
    assert!(pair.ks.iter().zip(&pair.tv).all(|(k, t)| k <= &(t + 1e-15)));
}

#[test]
fn torus_snapshot_against_equilibrium() {
    let dir = tempfile::tempdir().unwrap();
    let config = ExperimentConfig {
        model: Lattice::torus(4, 4).unwrap(),
        initial: InitialState::RandomInColumn { n: 3, seed: 1 },
        times: TimeGrid::new(3.0, 3.0, 1).unwrap(),
        solvers: vec![SolverKind::Quantum, SolverKind::Master],
        output_dir: dir.path().to_path_buf(),
        omega: 1.0,
    };
    let out = run_experiment(&config).unwrap();
    let eq = &out.report.equilibrium;
    assert_eq!(eq.len(), 2);
    assert!(eq.iter().all(|e| e.omega_t == 3.0 && (0.0..=1.0).contains(&e.tv)));
    assert!(dir.path().join("rates.json").exists());
}

#[test]
fn omega_drops_out_in_dimensionless_time() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let base = ring_config(a.path());
    let fast = ExperimentConfig {
        omega: 2.5,
        output_dir: b.path().to_path_buf(),
        ..base.clone()
    };
    let ra = run_experiment(&base).unwrap();
    let rb = run_experiment(&fast).unwrap();
    for ((_, x), (_, y)) in ra.trajectories.iter().zip(&rb.trajectories) {
        for (p, q) in x.iter().zip(y) {
            assert!(p.total_variation(q) < 1e-9);
        }
    }
}

fn swapped_rates(l: usize) -> Result<RateMatrix> {
    let mut r = build_rates_1d(l)?;
    r.t_up.swap(0, 1);
    Ok(r)
}

#[test]
fn injected_rate_fault_is_reported() {
    let summary = validate_all(&ValidateOptions {
        fast: true,
        rate_table: swapped_rates,
    });
    let balance = summary.results.iter().find(|r| r.id == 2).unwrap();
    assert!(!balance.passed);
    assert!(!summary.passed);
    let json = serde_json::to_value(&summary).unwrap();
    assert_eq!(json["results"][1]["passed"], false);
}
