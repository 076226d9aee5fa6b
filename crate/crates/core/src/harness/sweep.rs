use serde::{Deserialize, Serialize};

use super::{random_in_column, TimeGrid};
use crate::distribution::ExcitationDistribution;
use crate::error::{Error, Result};
use crate::io::fmt_num;
use crate::lattice::Lattice;
use crate::master::{build_rates_1d, solve_master};
use crate::quantum::{distribution_trajectory, ModelParams, StateVector};
use crate::space::ConfigSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSystem {
    pub l: usize,
    pub n0: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub systems: Vec<SweepSystem>,
    pub seeds: Vec<u64>,
    pub window: TimeGrid,
}

impl SweepConfig {
    /// Rings of 15, 20 and 25 sites started in columns 3, 5 and 7, five seeds,
    /// `Ωt ∈ [2, 6]` sampled every 0.05.
    pub fn standard() -> Self {
        SweepConfig {
            systems: [(15, 3), (20, 5), (25, 7)]
                .into_iter()
                .map(|(l, n0)| SweepSystem { l, n0 })
                .collect(),
            seeds: (1..=5).collect(),
            window: TimeGrid {
                start: 2.0,
                stop: 6.0,
                samples: 81,
            },
        }
    }

    /// Starting column `round(density · L)` for each ring size.
    pub fn from_density(sizes: &[usize], density: f64, seeds: Vec<u64>, window: TimeGrid) -> Result<Self> {
        if !(0.0..=0.5).contains(&density) {
            return Err(Error::Config(format!("density {density} outside [0, 1/2]")));
        }
        Ok(SweepConfig {
            systems: sizes
                .iter()
                .map(|&l| SweepSystem {
                    l,
                    n0: (density * l as f64).round() as usize,
                })
                .collect(),
            seeds,
            window,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluctuationRow {
    pub l: usize,
    pub n0: usize,
    /// Root mean square of `⟨x⟩_quantum − ⟨x⟩_Master` pooled over seeds and times.
    pub rms: f64,
    pub per_seed_rms: Vec<f64>,
    pub initial_masks: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluctuationSummary {
    pub window: TimeGrid,
    pub seeds: Vec<u64>,
    pub rows: Vec<FluctuationRow>,
}

impl FluctuationSummary {
    pub fn is_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].rms < w[0].rms)
    }

    /// `l,n0,seed,rms`, with `seed` empty on the pooled row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("l,n0,seed,rms\n");
        for row in &self.rows {
            for (seed, rms) in self.seeds.iter().zip(&row.per_seed_rms) {
                out.push_str(&format!("{},{},{},{}\n", row.l, row.n0, seed, fmt_num(*rms)));
            }
            out.push_str(&format!("{},{},,{}\n", row.l, row.n0, fmt_num(row.rms)));
        }
        out
    }
}

/// Temporal fluctuations of the quantum mean density around the Master
/// mean, for each ring size.
pub fn sweep_finite_size(config: &SweepConfig) -> Result<FluctuationSummary> {
    config.window.validate()?;
    if config.seeds.is_empty() || config.systems.is_empty() {
        return Err(Error::Config("sweep needs at least one system and one seed".into()));
    }
    let times = config.window.points();
    // propagate from 0 so the window only selects samples
    let mut full = vec![0.0];
    full.extend(times.iter().copied().filter(|&t| t > 0.0));
    let skip = full.len() - times.len();
    let params = ModelParams::default();

    let mut rows = Vec::with_capacity(config.systems.len());
    for sys in &config.systems {
        let space = ConfigSpace::enumerate(Lattice::ring(sys.l)?)?;
        let rates = build_rates_1d(sys.l)?;
        let p0 = ExcitationDistribution::delta(sys.n0, rates.n_max())?;
        let master = solve_master(&rates, &p0, &full)?;
        let lf = sys.l as f64;

        let mut per_seed_rms = Vec::with_capacity(config.seeds.len());
        let mut initial_masks = Vec::with_capacity(config.seeds.len());
        let mut pooled = 0.0;
        for &seed in &config.seeds {
            let index = random_in_column(&space, sys.n0, seed)?;
            initial_masks.push(space.state(index).0);
            let psi0 = StateVector::basis(&space, index)?;
            let quantum = distribution_trajectory(&space, &params, &psi0, &full)?;
            let sq: f64 = quantum[skip..]
                .iter()
                .zip(&master[skip..])
                .map(|(q, m)| ((q.mean() - m.mean()) / lf).powi(2))
                .sum();
            pooled += sq;
            per_seed_rms.push((sq / times.len() as f64).sqrt());
        }
        rows.push(FluctuationRow {
            l: sys.l,
            n0: sys.n0,
            rms: (pooled / (times.len() * config.seeds.len()) as f64).sqrt(),
            per_seed_rms,
            initial_masks,
        });
    }
    Ok(FluctuationSummary {
        window: config.window,
        seeds: config.seeds.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SweepConfig {
        SweepConfig {
            systems: vec![SweepSystem { l: 10, n0: 2 }],
            seeds: vec![3],
            window: TimeGrid::new(1.0, 2.0, 11).unwrap(),
        }
    }

    #[test]
    fn single_system_single_seed() {
        let s = sweep_finite_size(&small()).unwrap();
        assert_eq!(s.rows.len(), 1);
        assert!(s.rows[0].rms >= 0.0);
        assert_eq!(s.rows[0].per_seed_rms[0], s.rows[0].rms);
        assert!(s.is_decreasing());
    }

    #[test]
    fn repeated_seeds_are_bitwise_identical() {
        let a = sweep_finite_size(&small()).unwrap();
        let b = sweep_finite_size(&small()).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.rows[0].rms.to_bits(), b.rows[0].rms.to_bits());
    }

    #[test]
    fn density_sets_starting_columns() {
        let c = SweepConfig::from_density(&[15, 20, 25], 0.25, vec![1], TimeGrid::new(2.0, 6.0, 5).unwrap()).unwrap();
        let n0: Vec<usize> = c.systems.iter().map(|s| s.n0).collect();
        assert_eq!(n0, vec![4, 5, 6]);
        assert!(SweepConfig::from_density(&[10], 0.7, vec![1], c.window).is_err());
    }
}
