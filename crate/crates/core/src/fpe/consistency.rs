//! Side-by-side solution of the discrete Master equation and its continuum
//! limit from matched initial conditions.

use serde::Serialize;

use super::FpeSolver;
use crate::distribution::{total_variation, ExcitationDistribution};
use crate::error::{Error, Result};
use crate::master::{build_rates_1d, solve_master};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub l: usize,
    pub n0: usize,
    pub cells: usize,
    pub omega_t: Vec<f64>,
    pub tv: Vec<f64>,
    pub max_tv: f64,
    /// Stationary means as densities `x`.
    pub master_stationary_mean: f64,
    pub fpe_stationary_mean: f64,
}

/// Mass of each excitation-number bin `[(n−½)/L, (n+½)/L] ∩ [0, ½]`.
pub fn bin_by_excitation_number(solver: &FpeSolver, density: &[f64]) -> Vec<f64> {
    let l = solver.l() as f64;
    let h = solver.cell_width();
    let n_max = solver.l() / 2;
    let mut bins = vec![0.0; n_max + 1];
    for (i, &p) in density.iter().enumerate() {
        let (lo, hi) = (i as f64 * h, (i + 1) as f64 * h);
        let first = ((lo * l) - 0.5).ceil().max(0.0) as usize;
        for (n, bin) in bins.iter_mut().enumerate().skip(first.saturating_sub(1)) {
            let (a, b) = ((n as f64 - 0.5) / l, (n as f64 + 0.5) / l);
            if a >= hi {
                break;
            }
            let overlap = (hi.min(b) - lo.max(a)).max(0.0);
            *bin += p * overlap;
        }
    }
    bins
}

/// Cells are a multiple of `L` so excitation-number bins fall on cell faces.
pub fn aligned_cells(l: usize) -> usize {
    l * super::DEFAULT_CELLS.div_ceil(l)
}

pub fn discrete_continuum_consistency(l: usize, n0: usize, times: &[f64]) -> Result<ConsistencyReport> {
    if l < 50 {
        return Err(Error::OutOfRange(format!(
            "L = {l} is too small for the continuum limit (need >= 50)"
        )));
    }
    let rates = build_rates_1d(l)?;
    let p0 = ExcitationDistribution::delta(n0, rates.n_max())?;
    let master = solve_master(&rates, &p0, times)?;

    let cells = aligned_cells(l);
    let solver = FpeSolver::new(l, cells)?;
    let lf = l as f64;
    let start = solver.uniform_on((n0 as f64 - 0.5) / lf, (n0 as f64 + 0.5) / lf)?;
    let continuum = solver.solve(&start, times)?;

    let tv: Vec<f64> = master
        .iter()
        .zip(&continuum)
        .map(|(m, c)| total_variation(&m.p, &bin_by_excitation_number(&solver, &c.density)))
        .collect();
    Ok(ConsistencyReport {
        l,
        n0,
        cells,
        omega_t: times.to_vec(),
        max_tv: tv.iter().cloned().fold(0.0, f64::max),
        tv,
        master_stationary_mean: rates.stationary()?.mean() / lf,
        fpe_stationary_mean: solver.mean(&solver.stationary()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpe::drift_root;

    #[test]
    fn binning_preserves_mass_and_recovers_a_delta() {
        let l = 60;
        let solver = FpeSolver::new(l, aligned_cells(l)).unwrap();
        let p = solver.uniform_on(19.5 / 60.0, 20.5 / 60.0).unwrap();
        let bins = bin_by_excitation_number(&solver, &p);
        assert!((bins.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((bins[20] - 1.0).abs() < 1e-12);

        let g = solver.gaussian(0.3, 0.05);
        let total: f64 = bin_by_excitation_number(&solver, &g).iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn large_ring_tracks_the_master_equation() {
        let times: Vec<f64> = (0..=20).map(|k| 0.1 * k as f64).collect();
        let report = discrete_continuum_consistency(200, 55, &times).unwrap();
        assert!(report.tv[0] < 1e-12);
        // at Ωt = 0.1 about one jump has happened and the spread is below one bin
        assert!(report.tv[1] > 0.05 && report.tv[1] < 0.1);
        let late = report.tv[2..].iter().cloned().fold(0.0, f64::max);
        assert!(late < 0.05, "{:?}", report.tv);
        assert!((report.fpe_stationary_mean - drift_root()).abs() < 0.01);
        assert!((report.master_stationary_mean - report.fpe_stationary_mean).abs() < 3.0 / 200.0);
    }

    #[test]
    fn agreement_improves_with_size() {
        let times: Vec<f64> = (0..=20).map(|k| 0.1 * k as f64).collect();
        let small = discrete_continuum_consistency(50, 14, &times).unwrap();
        let large = discrete_continuum_consistency(200, 55, &times).unwrap();
        assert!(small.max_tv > large.max_tv);
        let gap = |r: &ConsistencyReport| (r.master_stationary_mean - r.fpe_stationary_mean).abs();
        assert!(gap(&small) > gap(&large));
        assert!(discrete_continuum_consistency(20, 5, &times).is_err());
    }
}
