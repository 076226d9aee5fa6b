//! Birth-death Master equation for the excitation-number distribution,
//!
//! `∂_t p_n = 2Ω²t [T_{n+1→n} p_{n+1} + T_{n−1→n} p_{n−1} − (T_{n→n−1} + T_{n→n+1}) p_n]`.
//!
//! With `τ = Ω²t²` we have `dτ = 2Ω²t dt`, the rate prefactor disappears
//! and `dp/dτ = W p`, so `p(t) = exp(W Ω²t²) p(0)`. The exponential is
//! evaluated by
//! uniformization, which keeps every iterate a probability vector.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::dimer::{self, transition_coefficients};
use crate::distribution::ExcitationDistribution;
use crate::error::{Error, Result};
use crate::space::ConfigSpace;

/// Tridiagonal generator `W` stored by its two off-diagonals: `t_down[n]`
/// is `T_{n→n−1}` and `t_up[n]` is `T_{n→n+1}`. No flux leaves `[0, n_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateMatrix {
    pub t_down: Vec<f64>,
    pub t_up: Vec<f64>,
}

impl RateMatrix {
    pub fn new(t_down: Vec<f64>, t_up: Vec<f64>) -> Result<Self> {
        let rates = RateMatrix { t_down, t_up };
        rates.validate()?;
        Ok(rates)
    }

    pub fn validate(&self) -> Result<()> {
        let len = self.t_down.len();
        if len == 0 || self.t_up.len() != len {
            return Err(Error::Solver(
                "rate vectors must be nonempty and of equal length".into(),
            ));
        }
        if self.t_down[0] != 0.0 || self.t_up[len - 1] != 0.0 {
            return Err(Error::Solver("rates leak out of [0, n_max]".into()));
        }
        if self
            .t_down
            .iter()
            .chain(&self.t_up)
            .any(|&t| !(t >= 0.0 && t.is_finite()))
        {
            return Err(Error::Solver("rates must be finite and nonnegative".into()));
        }
        Ok(())
    }

    pub fn n_max(&self) -> usize {
        self.t_down.len() - 1
    }

    /// Entry `W_{row, col}`.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        if row == col {
            -(self.t_down[col] + self.t_up[col])
        } else if row + 1 == col {
            self.t_down[col]
        } else if row == col + 1 {
            self.t_up[col]
        } else {
            0.0
        }
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..=self.n_max())
            .map(|c| (0..=self.n_max()).map(|r| self.entry(r, c)).sum())
            .collect()
    }

    /// `W p`.
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let m = self.n_max();
        (0..=m)
            .map(|n| {
                let mut v = -(self.t_down[n] + self.t_up[n]) * p[n];
                if n > 0 {
                    v += self.t_up[n - 1] * p[n - 1];
                }
                if n < m {
                    v += self.t_down[n + 1] * p[n + 1];
                }
                v
            })
            .collect()
    }

    /// Normalized null vector of `W` from the detailed-balance recursion
    /// `π_{n+1} = π_n T_{n→n+1} / T_{n+1→n}`.
    pub fn stationary(&self) -> Result<ExcitationDistribution> {
        let mut pi = vec![1.0; self.n_max() + 1];
        for n in 0..self.n_max() {
            if self.t_down[n + 1] <= 0.0 {
                return Err(Error::Solver(format!("chain is reducible at n = {}", n + 1)));
            }
            pi[n + 1] = pi[n] * self.t_up[n] / self.t_down[n + 1];
        }
        Ok(ExcitationDistribution::new(pi).normalized())
    }

    fn exit_rate_bound(&self) -> f64 {
        (0..=self.n_max())
            .map(|n| self.t_down[n] + self.t_up[n])
            .fold(0.0, f64::max)
    }
}

pub fn build_rates_1d(l: usize) -> Result<RateMatrix> {
    let counts = transition_coefficients(l)?;
    RateMatrix::new(counts.t_down_f64(), counts.t_up_f64())
}

/// Exact link counts of one column of a configuration graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ColumnLinks {
    pub states: u64,
    pub down_links: u64,
    pub up_links: u64,
}

pub fn column_links(space: &ConfigSpace) -> Vec<ColumnLinks> {
    (0..=space.n_max())
        .map(|n| {
            let column = space.column(n);
            let (mut down, mut up) = (0u64, 0u64);
            for i in column.clone() {
                let f = space.forward_degree(i) as u64;
                up += f;
                down += space.degree(i) as u64 - f;
            }
            ColumnLinks {
                states: column.len() as u64,
                down_links: down,
                up_links: up,
            }
        })
        .collect()
}

/// Coefficients measured on an enumerated graph: `T_{n→n±1}` is the mean
/// number of links from a column-`n` state into column `n ± 1`.
pub fn build_rates_2d(space: &ConfigSpace) -> Result<RateMatrix> {
    let links = column_links(space);
    let mut t_down = Vec::with_capacity(links.len());
    let mut t_up = Vec::with_capacity(links.len());
    for (n, c) in links.iter().enumerate() {
        if c.states == 0 {
            return Err(Error::EmptyColumn(n));
        }
        if c.down_links != n as u64 * c.states {
            return Err(Error::Solver(format!(
                "column {n}: {} down-links, expected n·ν_n = {}",
                c.down_links,
                n as u64 * c.states
            )));
        }
        t_down.push(n as f64);
        t_up.push(c.up_links as f64 / c.states as f64);
    }
    RateMatrix::new(t_down, t_up)
}

/// Distribution at each `Ωt`, obtained as `exp(W Ω²t²) p0`.
pub fn solve_master(
    rates: &RateMatrix,
    p0: &ExcitationDistribution,
    times: &[f64],
) -> Result<Vec<ExcitationDistribution>> {
    if p0.p.len() != rates.n_max() + 1 {
        return Err(Error::DimensionMismatch {
            expected: rates.n_max() + 1,
            got: p0.p.len(),
        });
    }
    p0.validate(1e-10)?;
    if let Some(&t) = times.iter().find(|&&t| !(t >= 0.0 && t.is_finite())) {
        return Err(Error::OutOfRange(format!("time {t} is negative or not finite")));
    }
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let mut out = vec![ExcitationDistribution::new(Vec::new()); times.len()];
    let (mut tau, mut p) = (0.0, p0.p.clone());
    for idx in order {
        let target = times[idx] * times[idx];
        p = evolve_tau(rates, &p, target - tau);
        tau = target;
        out[idx] = ExcitationDistribution::new(p.clone()).at(times[idx]);
    }
    Ok(out)
}

/// `exp(W Δτ) p` by uniformization in chunks of bounded Poisson mean.
pub fn evolve_tau(rates: &RateMatrix, p: &[f64], dtau: f64) -> Vec<f64> {
    const CHUNK_MEAN: f64 = 30.0;
    let q = rates.exit_rate_bound();
    if dtau <= 0.0 || q == 0.0 {
        return p.to_vec();
    }
    let chunks = (q * dtau / CHUNK_MEAN).ceil().max(1.0) as usize;
    let mean = q * dtau / chunks as f64;
    let mut current = p.to_vec();
    for _ in 0..chunks {
        current = poisson_sum(rates, &current, q, mean);
    }
    current
}

fn poisson_sum(rates: &RateMatrix, p: &[f64], q: f64, mean: f64) -> Vec<f64> {
    // P = I + W/q is column stochastic
    let step = |v: &[f64]| -> Vec<f64> {
        let wv = rates.apply(v);
        v.iter().zip(wv).map(|(a, b)| a + b / q).collect()
    };
    let mut weight = (-mean).exp();
    let mut term = p.to_vec();
    let mut acc: Vec<f64> = term.iter().map(|v| weight * v).collect();
    let mut k = 0usize;
    loop {
        k += 1;
        weight *= mean / k as f64;
        if k as f64 > mean && weight < 1e-18 {
            break;
        }
        term = step(&term);
        for (a, t) in acc.iter_mut().zip(&term) {
            *a += weight * t;
        }
    }
    acc
}

/// Closed-form equilibrium `p_n = φ^{−L} · L/(L−n) · C(L−n, n)` with
/// `1/φ = 2/(1+√5)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormEquilibrium {
    pub l: usize,
    pub prefactor: f64,
    pub raw: ExcitationDistribution,
    pub raw_sum: f64,
    pub normalized: ExcitationDistribution,
}

pub fn equilibrium_closed_form(l: usize) -> Result<ClosedFormEquilibrium> {
    if l < 3 {
        return Err(Error::OutOfRange(format!("ring size {l} < 3")));
    }
    let prefactor = (2.0 / (1.0 + 5f64.sqrt())).powi(l as i32);
    let raw: Vec<f64> = (0..=l / 2)
        .map(|n| Ok(prefactor * dimer::nu_closed_form(l, n)?.to_f64().unwrap()))
        .collect::<Result<_>>()?;
    let raw_sum = raw.iter().sum();
    let raw = ExcitationDistribution::new(raw);
    Ok(ClosedFormEquilibrium {
        l,
        prefactor,
        normalized: raw.normalized(),
        raw,
        raw_sum,
    })
}

/// `ν_n T_{n→n+1} = ν_{n+1} T_{n+1→n}` as exact rationals for every `n`
/// (the irrational prefactor of the equilibrium cancels).
pub fn detailed_balance_exact(l: usize) -> Result<bool> {
    let c = transition_coefficients(l)?;
    Ok((0..c.n_max()).all(|n| {
        let lhs = BigRational::from_integer(c.nu[n].clone().into()) * &c.t_up[n];
        let rhs = BigRational::from_integer(c.nu[n + 1].clone().into()) * &c.t_down[n + 1];
        lhs == rhs
    }))
}

/// Largest relative residual `|p_n T_{n→n+1} − p_{n+1} T_{n+1→n}|` over `n`.
pub fn detailed_balance_residual(rates: &RateMatrix, eq: &ExcitationDistribution) -> f64 {
    (0..rates.n_max())
        .map(|n| {
            let a = eq.p[n] * rates.t_up[n];
            let b = eq.p[n + 1] * rates.t_down[n + 1];
            let scale = a.abs().max(b.abs());
            if scale == 0.0 {
                0.0
            } else {
                (a - b).abs() / scale
            }
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianFit {
    pub lambda: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Fits `ln TV(p(t), p_eq) ≈ c − λ Ω²t²` over trajectory points with `Ωt`
/// inside `window`.
pub fn gaussian_relaxation_fit(
    trajectory: &[ExcitationDistribution],
    equilibrium: &ExcitationDistribution,
    window: (f64, f64),
) -> Result<GaussianFit> {
    let points: Vec<(f64, f64)> = trajectory
        .iter()
        .filter(|d| d.omega_t >= window.0 && d.omega_t <= window.1)
        .map(|d| (d.omega_t * d.omega_t, d.total_variation(equilibrium)))
        .collect();
    if points.iter().any(|&(_, dev)| dev < 1e-12) || points.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "{} points in window, deviation from equilibrium too small or too few points",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), &(x, d)| (a + x, b + d.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, d) in &points {
        let (dx, dy) = (x - mx, d.ln() - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateFit("no variation across the window".into()));
    }
    let slope = sxy / sxx;
    let lambda = -slope;
    if lambda <= 0.0 {
        return Err(Error::DegenerateFit(format!("deviation grows (λ = {lambda})")));
    }
    Ok(GaussianFit {
        lambda,
        intercept: my - slope * mx,
        r_squared: sxy * sxy / (sxx * syy),
        points: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;

    /// Direct RK4 integration of the time-dependent system in `t`.
    fn rk4_in_t(rates: &RateMatrix, p0: &[f64], t_end: f64, steps: usize) -> Vec<f64> {
        let h = t_end / steps as f64;
        let f = |t: f64, p: &[f64]| -> Vec<f64> { rates.apply(p).into_iter().map(|v| 2.0 * t * v).collect() };
        let axpy = |p: &[f64], k: &[f64], s: f64| -> Vec<f64> { p.iter().zip(k).map(|(a, b)| a + s * b).collect() };
        let mut p = p0.to_vec();
        for i in 0..steps {
            let t = i as f64 * h;
            let k1 = f(t, &p);
            let k2 = f(t + h / 2.0, &axpy(&p, &k1, h / 2.0));
            let k3 = f(t + h / 2.0, &axpy(&p, &k2, h / 2.0));
            let k4 = f(t + h, &axpy(&p, &k3, h));
            for j in 0..p.len() {
                p[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
        p
    }

    #[test]
    fn ring_eight_generator() {
        let rates = build_rates_1d(8).unwrap();
        assert_eq!(rates.n_max(), 4);
        assert_eq!(rates.t_up, vec![8.0, 5.0, 2.4, 0.5, 0.0]);
        assert!(rates.column_sums().iter().all(|s| s.abs() < 1e-14));
        let pi = rates.stationary().unwrap();
        assert!(pi.p.iter().all(|&p| p > 0.0));
        assert!(rates.apply(&pi.p).iter().all(|v| v.abs() < 1e-14));
        let eq = equilibrium_closed_form(8).unwrap().normalized;
        assert!(pi.total_variation(&eq) < 1e-14);
    }

    #[test]
    fn stationary_is_the_unique_null_vector() {
        let rates = build_rates_1d(11).unwrap();
        let dim = rates.n_max() + 1;
        let w = nalgebra::DMatrix::from_fn(dim, dim, |r, c| rates.entry(r, c));
        let svd = w.svd(false, false);
        let zero = svd.singular_values.iter().filter(|&&s| s < 1e-10).count();
        assert_eq!(zero, 1);
    }

    #[test]
    fn t_zero_returns_p0() {
        let rates = build_rates_1d(25).unwrap();
        let p0 = ExcitationDistribution::delta(7, 12).unwrap();
        let out = solve_master(&rates, &p0, &[0.0]).unwrap();
        assert_eq!(out[0].p, p0.p);
        assert!(solve_master(&rates, &p0, &[-1.0]).is_err());
        let bad = ExcitationDistribution::new(vec![0.5; 13]);
        assert!(solve_master(&rates, &bad, &[1.0]).is_err());
    }

    #[test]
    fn long_times_reach_equilibrium() {
        let rates = build_rates_1d(25).unwrap();
        let p0 = ExcitationDistribution::delta(0, 12).unwrap();
        let out = solve_master(&rates, &p0, &[6.0]).unwrap();
        let eq = rates.stationary().unwrap();
        assert!(out[0].total_variation(&eq) < 1e-10);
    }

    #[test]
    fn substitution_matches_direct_integration() {
        let rates = build_rates_1d(25).unwrap();
        let p0 = ExcitationDistribution::delta(7, 12).unwrap();
        for t in [0.3, 0.9, 1.6] {
            let exact = solve_master(&rates, &p0, &[t]).unwrap().remove(0);
            let direct = rk4_in_t(&rates, &p0.p, t, 20_000);
            let err = exact
                .p
                .iter()
                .zip(&direct)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-8, "t = {t}: {err}");
        }
    }

    #[test]
    fn conservation_positivity_and_monotone_tv() {
        let rates = build_rates_1d(25).unwrap();
        let eq = rates.stationary().unwrap();
        let p0 = ExcitationDistribution::delta(2, 12).unwrap();
        let times: Vec<f64> = (0..=60).map(|k| 0.05 * k as f64).collect();
        let traj = solve_master(&rates, &p0, &times).unwrap();
        let mut last = f64::INFINITY;
        for d in &traj {
            assert!((d.total() - 1.0).abs() < 1e-10);
            assert!(d.p.iter().all(|&p| p >= -1e-12));
            let tv = d.total_variation(&eq);
            assert!(tv <= last + 1e-12);
            last = tv;
        }
    }

    #[test]
    fn closed_form_equilibrium() {
        let eq = equilibrium_closed_form(25).unwrap();
        assert!((eq.prefactor.powf(1.0 / 25.0) - 0.618_033_988_749_894_8).abs() < 1e-15);
        // Lucas(25)/φ^25 with φ^25 = (Lucas_25 + Fib_25 √5)/2
        let phi25 = (167_761.0 + 75_025.0 * 5f64.sqrt()) / 2.0;
        assert!((eq.raw_sum - 167_761.0 / phi25).abs() < 1e-12);
        assert!((eq.raw_sum - 1.0).abs() < 1e-5);
        assert!((eq.normalized.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn detailed_balance() {
        for l in 3..=30 {
            assert!(detailed_balance_exact(l).unwrap());
            let rates = build_rates_1d(l).unwrap();
            let eq = equilibrium_closed_form(l).unwrap().normalized;
            assert!(detailed_balance_residual(&rates, &eq) < 1e-12, "L = {l}");
        }
        let mut rates = build_rates_1d(10).unwrap();
        rates.t_up[2] *= 1.01;
        let eq = equilibrium_closed_form(10).unwrap().normalized;
        assert!(detailed_balance_residual(&rates, &eq) > 1e-3);
    }

    #[test]
    fn two_state_gap() {
        let (a, b) = (0.7, 1.9);
        let rates = RateMatrix::new(vec![0.0, b], vec![a, 0.0]).unwrap();
        let eq = rates.stationary().unwrap();
        let times: Vec<f64> = (1..=20).map(|k| 0.05 * k as f64).collect();
        let traj = solve_master(&rates, &ExcitationDistribution::delta(0, 1).unwrap(), &times).unwrap();
        let fit = gaussian_relaxation_fit(&traj, &eq, (0.0, 1.0)).unwrap();
        assert!((fit.lambda - (a + b)).abs() < 1e-9);
        assert!(fit.r_squared > 1.0 - 1e-12);

        let flat = vec![eq.clone().at(0.5), eq.clone().at(0.6), eq.clone().at(0.7)];
        assert!(matches!(
            gaussian_relaxation_fit(&flat, &eq, (0.0, 1.0)),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn two_by_two_torus_rates() {
        let space = ConfigSpace::enumerate(Lattice::torus(2, 2).unwrap()).unwrap();
        let rates = build_rates_2d(&space).unwrap();
        assert_eq!(rates.t_up[0], 4.0);
        assert_eq!(rates.t_down, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn measured_rates_reproduce_ring_formula() {
        let space = ConfigSpace::enumerate(Lattice::ring(14).unwrap()).unwrap();
        let measured = build_rates_2d(&space).unwrap();
        let formula = build_rates_1d(14).unwrap();
        for n in 0..=7 {
            assert!((measured.t_up[n] - formula.t_up[n]).abs() < 1e-12);
            assert_eq!(measured.t_down[n], formula.t_down[n]);
        }
    }
}
