//! End-to-end experiments: one configuration drives the quantum, Master and
//! Fokker-Planck solvers from the same initial micro-state and writes every
//! trajectory, table and comparison to disk.

mod sweep;
pub mod validate;

pub use sweep::{sweep_finite_size, FluctuationRow, FluctuationSummary, SweepConfig, SweepSystem};

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distribution::ExcitationDistribution;
use crate::error::{Error, Result};
use crate::fpe::consistency::{aligned_cells, bin_by_excitation_number};
use crate::fpe::{fields, FpeSolver};
use crate::io::{fmt_num, table_csv, trajectory_csv, write_atomic, write_json};
use crate::lattice::Lattice;
use crate::master::{build_rates_1d, build_rates_2d, solve_master, RateMatrix};
use crate::quantum::{distribution_trajectory, ModelParams, StateVector};
use crate::space::{ConfigSpace, Configuration, DEFAULT_STATE_BUDGET};

/// Tolerance on the unit total of every distribution that is written out.
pub const ROW_SUM_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InitialState {
    /// Explicit occupation bitmask, bit `i` is site `i`.
    Bitmask { mask: u64 },
    /// Uniform draw from column `n` with a ChaCha8 generator.
    RandomInColumn { n: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub samples: usize,
}

impl TimeGrid {
    pub fn new(start: f64, stop: f64, samples: usize) -> Result<Self> {
        let grid = TimeGrid { start, stop, samples };
        grid.validate()?;
        Ok(grid)
    }

    /// Grid from `start` to `stop` with spacing as close to `step` as fits.
    pub fn with_step(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::Config(format!("time step {step} must be positive")));
        }
        let samples = ((stop - start) / step).round() as usize + 1;
        Self::new(start, stop, samples)
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = (self.start, self.stop);
        if !(a.is_finite() && b.is_finite()) || a < 0.0 {
            return Err(Error::Config(format!(
                "time grid [{a}, {b}] must be finite and nonnegative"
            )));
        }
        if b < a {
            return Err(Error::Config(format!("time grid must be ascending, got [{a}, {b}]")));
        }
        if self.samples == 0 {
            return Err(Error::Config("time grid needs at least one sample".into()));
        }
        if self.samples == 1 && a != b {
            return Err(Error::Config("a single sample needs start == stop".into()));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        if self.samples == 1 {
            return vec![self.start];
        }
        let span = self.stop - self.start;
        (0..self.samples)
            .map(|k| self.start + span * k as f64 / (self.samples - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Quantum,
    Master,
    Fpe,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Quantum => "quantum",
            SolverKind::Master => "master",
            SolverKind::Fpe => "fpe",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Lattice,
    pub initial: InitialState,
    pub times: TimeGrid,
    pub solvers: Vec<SolverKind>,
    pub output_dir: PathBuf,
    #[serde(default = "default_omega")]
    pub omega: f64,
}

fn default_omega() -> f64 {
    1.0
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: ExperimentConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.times.validate()?;
        ModelParams::new(self.omega)?;
        if self.solvers.is_empty() {
            return Err(Error::Config("no solver selected".into()));
        }
        if self.solvers.contains(&SolverKind::Fpe) && !matches!(self.model, Lattice::Ring { .. }) {
            return Err(Error::Config(
                "the Fokker-Planck solver is defined for rings only".into(),
            ));
        }
        if let Lattice::Ring { sites } = self.model {
            if sites < 3 && self.solvers.iter().any(|&s| s != SolverKind::Quantum) {
                return Err(Error::Config(format!(
                    "kinetic solvers need a ring of at least 3 sites, got {sites}"
                )));
            }
        }
        Ok(())
    }

    fn sorted_solvers(&self) -> Vec<SolverKind> {
        let mut s = self.solvers.clone();
        s.sort();
        s.dedup();
        s
    }
}

/// Index of the initial micro-state in `space`.
pub fn resolve_initial_state(space: &ConfigSpace, initial: &InitialState) -> Result<usize> {
    match *initial {
        InitialState::Bitmask { mask } => space.index_of(Configuration(mask)).ok_or_else(|| {
            Error::Config(format!(
                "bitmask {mask:#b} is not an allowed configuration of {}",
                space.lattice().label()
            ))
        }),
        InitialState::RandomInColumn { n, seed } => random_in_column(space, n, seed),
    }
}

/// Uniform draw from column `n`, the first value produced by ChaCha8 seeded
/// with `seed`.
pub fn random_in_column(space: &ConfigSpace, n: usize, seed: u64) -> Result<usize> {
    let column = space.column(n);
    if column.is_empty() {
        return Err(Error::EmptyColumn(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rng.gen_range(column))
}

/// Master rates for the lattice: closed form on a ring, counted on the graph
/// otherwise.
pub fn rates_for(space: &ConfigSpace) -> Result<RateMatrix> {
    match *space.lattice() {
        Lattice::Ring { sites } => build_rates_1d(sites),
        Lattice::Torus { .. } => build_rates_2d(space),
    }
}

/// FPE solution binned onto excitation numbers, started from the box of
/// width `1/L` around `n0/L`.
pub fn fpe_trajectory(l: usize, n0: usize, times: &[f64]) -> Result<Vec<ExcitationDistribution>> {
    let solver = FpeSolver::new(l, aligned_cells(l))?;
    let lf = l as f64;
    let lo = (n0 as f64 - 0.5).max(0.0) / lf;
    let hi = ((n0 as f64 + 0.5) / lf).min(crate::fpe::X_MAX);
    let start = solver.uniform_on(lo, hi)?;
    Ok(solver
        .solve(&start, times)?
        .into_iter()
        .map(|s| ExcitationDistribution::new(bin_by_excitation_number(&solver, &s.density)).at(s.omega_t))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairComparison {
    pub a: SolverKind,
    pub b: SolverKind,
    pub omega_t: Vec<f64>,
    pub tv: Vec<f64>,
    /// Kolmogorov-Smirnov distance of the cumulative distributions, for information.
    pub ks: Vec<f64>,
    pub max_tv: f64,
    pub mean_tv: f64,
}

impl PairComparison {
    pub fn new(a: SolverKind, b: SolverKind, pa: &[ExcitationDistribution], pb: &[ExcitationDistribution]) -> Self {
        let tv: Vec<f64> = pa.iter().zip(pb).map(|(x, y)| x.total_variation(y)).collect();
        let ks = pa.iter().zip(pb).map(|(x, y)| x.kolmogorov_smirnov(y)).collect();
        PairComparison {
            a,
            b,
            omega_t: pa.iter().map(|d| d.omega_t).collect(),
            max_tv: tv.iter().cloned().fold(0.0, f64::max),
            mean_tv: if tv.is_empty() {
                0.0
            } else {
                tv.iter().sum::<f64>() / tv.len() as f64
            },
            tv,
            ks,
        }
    }
}

/// Distance of one solver's last distribution from the Master equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumComparison {
    pub solver: SolverKind,
    pub omega_t: f64,
    pub tv: f64,
    pub ks: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub pairs: Vec<PairComparison>,
    pub equilibrium: Vec<EquilibriumComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTiming {
    pub stage: &'static str,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub package: &'static str,
    pub version: &'static str,
    pub config: ExperimentConfig,
    pub states: usize,
    pub column_sizes: Vec<usize>,
    pub initial_index: usize,
    pub initial_mask: u64,
    pub initial_spins: String,
    pub initial_excitations: usize,
    pub artifacts: Vec<String>,
    pub wall_times: Vec<StageTiming>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOutcome {
    pub report: ComparisonReport,
    pub manifest: Manifest,
    pub trajectories: Vec<(SolverKind, Vec<ExcitationDistribution>)>,
    pub equilibrium: Option<ExcitationDistribution>,
}

fn timed<T>(timings: &mut Vec<StageTiming>, stage: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f().map_err(|e| e.in_stage(stage))?;
    timings.push(StageTiming {
        stage,
        seconds: start.elapsed().as_secs_f64(),
    });
    Ok(out)
}

fn check_rows(rows: &[ExcitationDistribution]) -> Result<()> {
    for row in rows {
        row.validate(ROW_SUM_TOLERANCE)
            .map_err(|e| Error::Solver(format!("distribution at Omega t = {}: {e}", row.omega_t)))?;
    }
    Ok(())
}

/// Runs every selected solver and writes `<solver>.csv`, the rate and field
/// tables, `report.json` and `manifest.json` into the output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let solvers = config.sorted_solvers();
    let times = config.times.points();
    let params = ModelParams::new(config.omega)?;
    let mut timings = Vec::new();

    let space = timed(&mut timings, "enumerate", || {
        ConfigSpace::enumerate_with_budget(config.model, DEFAULT_STATE_BUDGET)
    })?;
    let initial_index = timed(&mut timings, "initial_state", || {
        resolve_initial_state(&space, &config.initial)
    })?;
    let initial = space.state(initial_index);
    let n0 = initial.excitations();
    let needs_rates = solvers.iter().any(|&s| s != SolverKind::Quantum);
    let rates = if needs_rates {
        Some(timed(&mut timings, "rates", || rates_for(&space))?)
    } else {
        None
    };

    let mut trajectories = Vec::new();
    for &solver in &solvers {
        let traj = match solver {
            SolverKind::Quantum => timed(&mut timings, "quantum", || {
                let psi0 = StateVector::basis(&space, initial_index)?;
                let traj = distribution_trajectory(&space, &params, &psi0, &times)?;
                check_rows(&traj)?;
                Ok(traj)
            })?,
            SolverKind::Master => timed(&mut timings, "master", || {
                let rates = rates.as_ref().expect("rates built for kinetic solvers");
                let p0 = ExcitationDistribution::delta(n0, rates.n_max())?;
                let traj = solve_master(rates, &p0, &times)?;
                check_rows(&traj)?;
                Ok(traj)
            })?,
            SolverKind::Fpe => timed(&mut timings, "fpe", || {
                let traj = fpe_trajectory(config.model.num_sites(), n0, &times)?;
                check_rows(&traj)?;
                Ok(traj)
            })?,
        };
        trajectories.push((solver, traj));
    }

    let equilibrium = match &rates {
        Some(r) => Some(timed(&mut timings, "equilibrium", || r.stationary())?),
        None => None,
    };

    let report = timed(&mut timings, "compare", || {
        let mut pairs = Vec::new();
        for (i, (a, pa)) in trajectories.iter().enumerate() {
            for (b, pb) in &trajectories[i + 1..] {
                pairs.push(PairComparison::new(*a, *b, pa, pb));
            }
        }
        let equilibrium = match &equilibrium {
            Some(eq) => trajectories
                .iter()
                .filter_map(|(s, traj)| {
                    traj.last().map(|last| EquilibriumComparison {
                        solver: *s,
                        omega_t: last.omega_t,
                        tv: last.total_variation(eq),
                        ks: last.kolmogorov_smirnov(eq),
                    })
                })
                .collect(),
            None => Vec::new(),
        };
        Ok(ComparisonReport { pairs, equilibrium })
    })?;

    let dir = &config.output_dir;
    let mut artifacts = Vec::new();
    let start = Instant::now();
    let written: Result<()> = (|| {
        for (solver, traj) in &trajectories {
            let name = format!("{}.csv", solver.name());
            write_atomic(&dir.join(&name), trajectory_csv(traj).as_bytes())?;
            artifacts.push(name);
        }
        if let Some(rates) = &rates {
            write_json(&dir.join("rates.json"), rates)?;
            artifacts.push("rates.json".into());
        }
        if let Some(eq) = &equilibrium {
            write_atomic(
                &dir.join("equilibrium.csv"),
                trajectory_csv(std::slice::from_ref(eq)).as_bytes(),
            )?;
            artifacts.push("equilibrium.csv".into());
        }
        if solvers.contains(&SolverKind::Fpe) {
            let l = config.model.num_sites();
            let solver = FpeSolver::new(l, aligned_cells(l))?;
            let f = fields(l, solver.centers())?;
            let rows = (0..f.x.len()).map(|i| vec![f.x[i], f.f[i], f.d[i]]);
            write_atomic(
                &dir.join("fpe_fields.csv"),
                table_csv(&["x", "F", "D"], rows).as_bytes(),
            )?;
            artifacts.push("fpe_fields.csv".into());
        }
        write_json(&dir.join("report.json"), &report)?;
        artifacts.push("report.json".into());
        artifacts.push("manifest.json".into());
        Ok(())
    })();
    written.map_err(|e| e.in_stage("write"))?;
    timings.push(StageTiming {
        stage: "write",
        seconds: start.elapsed().as_secs_f64(),
    });

    let manifest = Manifest {
        package: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config: config.clone(),
        states: space.len(),
        column_sizes: space.column_sizes(),
        initial_index,
        initial_mask: initial.0,
        initial_spins: initial.to_spins(config.model.num_sites()),
        initial_excitations: n0,
        artifacts,
        wall_times: timings,
    };
    write_json(&dir.join("manifest.json"), &manifest).map_err(|e| e.in_stage("write"))?;

    Ok(ExperimentOutcome {
        report,
        manifest,
        trajectories,
        equilibrium,
    })
}

/// One line per pair: `a,b,max_tv,mean_tv`.
pub fn report_summary(report: &ComparisonReport) -> String {
    let mut out = String::from("a,b,max_tv,mean_tv\n");
    for p in &report.pairs {
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.a.name(),
            p.b.name(),
            fmt_num(p.max_tv),
            fmt_num(p.mean_tv)
        ));
    }
    for e in &report.equilibrium {
        out.push_str(&format!(
            "{},equilibrium,{},{}\n",
            e.solver.name(),
            fmt_num(e.tv),
            fmt_num(e.tv)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(dir: &Path) -> ExperimentConfig {
        ExperimentConfig {
            model: Lattice::ring(10).unwrap(),
            initial: InitialState::RandomInColumn { n: 3, seed: 4 },
            times: TimeGrid::new(0.0, 1.0, 11).unwrap(),
            solvers: vec![SolverKind::Quantum, SolverKind::Master, SolverKind::Fpe],
            output_dir: dir.to_path_buf(),
            omega: 1.0,
        }
    }

    #[test]
    fn time_grid_points_and_errors() {
        assert_eq!(TimeGrid::new(0.0, 1.0, 3).unwrap().points(), vec![0.0, 0.5, 1.0]);
        assert_eq!(TimeGrid::new(3.0, 3.0, 1).unwrap().points(), vec![3.0]);
        assert_eq!(TimeGrid::with_step(0.0, 3.0, 0.05).unwrap().samples, 61);
        assert!(TimeGrid::new(1.0, 0.0, 3).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
        assert!(TimeGrid::new(-1.0, 1.0, 3).is_err());
    }

    #[test]
    fn random_draw_is_reproducible_and_in_column() {
        let space = ConfigSpace::enumerate(Lattice::ring(12).unwrap()).unwrap();
        let a = random_in_column(&space, 4, 9).unwrap();
        assert_eq!(a, random_in_column(&space, 4, 9).unwrap());
        assert_eq!(space.column_of(a), 4);
        assert!(matches!(random_in_column(&space, 7, 1), Err(Error::EmptyColumn(7))));
    }

    #[test]
    fn config_round_trips_through_json() {
        let c = config(Path::new("out"));
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"random_in_column\""));
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        let torus_fpe = ExperimentConfig {
            model: Lattice::torus(3, 3).unwrap(),
            ..c
        };
        assert!(matches!(torus_fpe.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn experiment_writes_artifacts_deterministically() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_experiment(&config(dir.path())).unwrap();
        assert_eq!(out.report.pairs.len(), 3);
        for p in &out.report.pairs {
            assert!(p.tv.iter().all(|&t| (0.0..=1.0).contains(&t)));
            assert!(p.tv[0] < 1e-12);
        }
        let first = std::fs::read(dir.path().join("report.json")).unwrap();
        let quantum = std::fs::read(dir.path().join("quantum.csv")).unwrap();
        run_experiment(&config(dir.path())).unwrap();
        assert_eq!(first, std::fs::read(dir.path().join("report.json")).unwrap());
        assert_eq!(quantum, std::fs::read(dir.path().join("quantum.csv")).unwrap());
        for name in &out.manifest.artifacts {
            assert!(dir.path().join(name).exists(), "{name}");
        }
    }

    #[test]
    fn failures_name_the_stage() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = config(dir.path());
        c.initial = InitialState::Bitmask { mask: 0b11 };
        match run_experiment(&c) {
            Err(Error::Stage { stage, .. }) => assert_eq!(stage, "initial_state"),
            other => panic!("{other:?}"),
        }
    }
}
