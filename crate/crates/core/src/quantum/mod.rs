//! Unitary dynamics of a pure state in the blockade-constrained space.
//!
//! The Hamiltonian is `Ω Σ_k σ^x_k` restricted to allowed configurations,
//! i.e. `Ω` times the adjacency matrix of the spin-flip graph. It is never
//! stored; every product walks the adjacency lists. Time is reported as
//! `Ωt`.

mod bessel;
pub mod dense;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::ExcitationDistribution;
use crate::error::{Error, Result};
use crate::space::ConfigSpace;

pub use bessel::bessel_j_sequence;

/// Allowed deviation of an input state's squared norm from 1.
pub const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega: f64,
}

impl ModelParams {
    pub fn new(omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::OutOfRange(format!("omega must be positive, got {omega}")));
        }
        Ok(ModelParams { omega })
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams { omega: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vec<Complex64>,
    pub omega_t: f64,
}

impl StateVector {
    pub fn basis(space: &ConfigSpace, index: usize) -> Result<Self> {
        if index >= space.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: space.len(),
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); space.len()];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            amplitudes,
            omega_t: 0.0,
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

fn check_dim(space: &ConfigSpace, len: usize) -> Result<()> {
    if len != space.len() {
        return Err(Error::DimensionMismatch {
            expected: space.len(),
            got: len,
        });
    }
    Ok(())
}

/// `(Hψ)_i = Ω Σ_{j ∈ N(i)} ψ_j`.
pub fn apply_hamiltonian(space: &ConfigSpace, params: &ModelParams, psi: &[Complex64]) -> Result<Vec<Complex64>> {
    check_dim(space, psi.len())?;
    let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
    out.par_iter_mut().enumerate().for_each(|(i, o)| {
        *o = params.omega * gather(space, psi, i);
    });
    Ok(out)
}

#[inline]
fn gather(space: &ConfigSpace, psi: &[Complex64], i: usize) -> Complex64 {
    space
        .neighbors_unchecked(i)
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &j| acc + psi[j as usize])
}

/// `⟨ψ|H|ψ⟩`; the imaginary part vanishes for any `ψ` since `H` is real symmetric.
pub fn energy(space: &ConfigSpace, params: &ModelParams, psi: &[Complex64]) -> Result<Complex64> {
    let h_psi = apply_hamiltonian(space, params, psi)?;
    Ok(psi.iter().zip(&h_psi).map(|(a, b)| a.conj() * b).sum())
}

/// `(⟨N⟩, ⟨N²⟩)` from the column projection.
pub fn excitation_moments(space: &ConfigSpace, psi: &[Complex64]) -> Result<(f64, f64)> {
    let dist = space.column_projection(psi)?;
    Ok((dist.mean(), dist.second_moment()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorConfig {
    /// Bound on the neglected Chebyshev tail per step.
    pub step_tolerance: f64,
    /// Largest `b·Δt` per step, `b` the spectral bound of `H`.
    pub max_phase_per_step: f64,
    /// Chebyshev terms allowed in one step.
    pub max_terms: usize,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        PropagatorConfig {
            step_tolerance: 1e-14,
            max_phase_per_step: 40.0,
            max_terms: 4096,
        }
    }
}

/// `exp(−iHΔt)ψ` via a Chebyshev expansion in `H/b`, `b = Ω·max degree`,
/// which bounds the spectrum. `Δt` may be negative.
pub fn evolve(
    space: &ConfigSpace,
    params: &ModelParams,
    psi: &[Complex64],
    dt: f64,
    config: &PropagatorConfig,
) -> Result<Vec<Complex64>> {
    check_dim(space, psi.len())?;
    if !dt.is_finite() {
        return Err(Error::Propagation(format!("non-finite time step {dt}")));
    }
    let bound = params.omega * space.max_degree() as f64;
    let phase = bound * dt.abs();
    if dt == 0.0 || bound == 0.0 {
        return Ok(psi.to_vec());
    }
    let steps = (phase / config.max_phase_per_step).ceil().max(1.0) as usize;
    let step = dt / steps as f64;
    let mut current = psi.to_vec();
    for _ in 0..steps {
        current = chebyshev_step(space, params.omega / bound, bound * step, &current, config)?;
    }
    Ok(current)
}

fn chebyshev_step(
    space: &ConfigSpace,
    scale: f64,
    x: f64,
    psi: &[Complex64],
    config: &PropagatorConfig,
) -> Result<Vec<Complex64>> {
    let ax = x.abs();
    let probe = (ax.ceil() as usize) + 40 + (10.0 * ax.cbrt()).ceil() as usize;
    let bessel = bessel_j_sequence(ax, probe);
    let cut = config.step_tolerance * 1e-2;
    let terms = match bessel.iter().rposition(|j| j.abs() >= cut) {
        Some(k) => k + 1,
        None => 1,
    };
    let tail: f64 = 2.0 * bessel[terms..].iter().map(|j| j.abs()).sum::<f64>();
    if terms > config.max_terms || tail > config.step_tolerance {
        return Err(Error::Propagation(format!(
            "step with phase {ax:.3} needs {terms} Chebyshev terms (tail {tail:.2e}); budget is {} terms at tolerance {:.1e}",
            config.max_terms, config.step_tolerance
        )));
    }
    // exp(−i x s) = Σ_k (2 − δ_k0) (−i)^k J_k(x) T_k(s), J_k(−x) = (−1)^k J_k(x)
    let sign = x.signum();
    let coeff = |k: usize| -> Complex64 {
        let minus_i_pow = match k % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        };
        let mag = if k == 0 {
            bessel[0]
        } else {
            2.0 * bessel[k] * sign.powi(k as i32)
        };
        minus_i_pow * mag
    };

    let c0 = coeff(0);
    let mut acc: Vec<Complex64> = psi.iter().map(|&a| c0 * a).collect();
    if terms == 1 {
        return Ok(acc);
    }
    // T_1 ψ = (H/b) ψ
    let mut prev = psi.to_vec();
    let mut cur = vec![Complex64::new(0.0, 0.0); psi.len()];
    let c1 = coeff(1);
    cur.par_iter_mut()
        .zip(acc.par_iter_mut())
        .enumerate()
        .for_each(|(i, (c, a))| {
            *c = scale * gather(space, psi, i);
            *a += c1 * *c;
        });
    for k in 2..terms {
        let ck = coeff(k);
        let two_scale = 2.0 * scale;
        // T_{k} = 2 s T_{k−1} − T_{k−2}, written over the T_{k−2} buffer
        prev.par_iter_mut()
            .zip(acc.par_iter_mut())
            .enumerate()
            .for_each(|(i, (p, a))| {
                *p = two_scale * gather(space, &cur, i) - *p;
                *a += ck * *p;
            });
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(acc)
}

/// `ψ(t) = exp(−iHt)ψ₀` at each requested `Ωt`, stepping from one time to
/// the next.
pub fn propagate(
    space: &ConfigSpace,
    params: &ModelParams,
    psi0: &StateVector,
    times: &[f64],
) -> Result<Vec<StateVector>> {
    propagate_with(space, params, psi0, times, &PropagatorConfig::default())
}

pub fn propagate_with(
    space: &ConfigSpace,
    params: &ModelParams,
    psi0: &StateVector,
    times: &[f64],
    config: &PropagatorConfig,
) -> Result<Vec<StateVector>> {
    check_dim(space, psi0.amplitudes.len())?;
    let norm = psi0.norm_sqr();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm_sqr: norm });
    }
    check_times(times)?;
    let mut out = Vec::with_capacity(times.len());
    let mut current = psi0.amplitudes.clone();
    let mut now = 0.0;
    for &t in times {
        // times are Ωt; H/Ω is what the evolution time multiplies
        current = evolve(space, params, &current, (t - now) / params.omega, config)?;
        now = t;
        out.push(StateVector {
            amplitudes: current.clone(),
            omega_t: t,
        });
    }
    Ok(out)
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if let Some(&t) = times.iter().find(|&&t| !(t >= 0.0 && t.is_finite())) {
        return Err(Error::OutOfRange(format!("time {t} is negative or not finite")));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::OutOfRange("times must be ascending".into()));
    }
    Ok(())
}

/// Column distributions along a propagated trajectory.
pub fn distribution_trajectory(
    space: &ConfigSpace,
    params: &ModelParams,
    psi0: &StateVector,
    times: &[f64],
) -> Result<Vec<ExcitationDistribution>> {
    check_dim(space, psi0.amplitudes.len())?;
    let norm = psi0.norm_sqr();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm_sqr: norm });
    }
    check_times(times)?;
    let config = PropagatorConfig::default();
    let mut out = Vec::with_capacity(times.len());
    let mut current = psi0.amplitudes.clone();
    let mut now = 0.0;
    for &t in times {
        current = evolve(space, params, &current, (t - now) / params.omega, &config)?;
        now = t;
        out.push(space.column_projection(&current)?.at(t));
    }
    Ok(out)
}

/// Mean of `p_n` over `samples` uniformly spaced times spanning `window`.
pub fn time_averaged_distribution(
    space: &ConfigSpace,
    params: &ModelParams,
    psi0: &StateVector,
    window: (f64, f64),
    samples: usize,
) -> Result<ExcitationDistribution> {
    let (a, b) = window;
    if !(a < b) || a < 0.0 {
        return Err(Error::OutOfRange(format!("window [{a}, {b}] is empty or negative")));
    }
    if samples < 2 {
        return Err(Error::OutOfRange(format!("need at least 2 samples, got {samples}")));
    }
    let times: Vec<f64> = (0..samples)
        .map(|k| a + (b - a) * k as f64 / (samples - 1) as f64)
        .collect();
    let traj = distribution_trajectory(space, params, psi0, &times)?;
    let mut mean = vec![0.0; space.n_max() + 1];
    for d in &traj {
        for (m, p) in mean.iter_mut().zip(&d.p) {
            *m += p / samples as f64;
        }
    }
    Ok(ExcitationDistribution::new(mean).normalized())
}
