//! Continuum limit of the Master equation in the excitation density
//! `x = n/L ∈ [0, ½]`:
//!
//! `∂_t p = −2Ω²t [∂_x F(x) − ½ ∂²_x D(x)] p`,
//! `F(x) = (1 − 5x + 5x²)/(1 − x)`, `D(x) = (1 − 3x + 3x²)/[(1 − x) L]`.
//!
//! In `τ = Ω²t²` this is `∂_τ p = −∂_x J` with flux `J = F p − ½ ∂_x(D p)`,
//! solved on a uniform finite-volume grid with no-flux walls.
//! Face fluxes use exponential fitting (Scharfetter–Gummel) on `q = D p`
//! with the harmonic mean of `D` at each face, so the discrete scheme has
//! an exact zero-flux stationary state and stays monotone when drift
//! dominates at large `L`.

pub mod consistency;
pub mod transform;

use serde::Serialize;

use crate::error::{Error, Result};

pub use consistency::{discrete_continuum_consistency, ConsistencyReport};
pub use transform::{quadratic_fit, transform, JacobianConvention, QuadraticFit, TransformedField};

pub const DEFAULT_CELLS: usize = 512;

/// Upper end of the density domain.
pub const X_MAX: f64 = 0.5;

/// Root of `1 − 5x + 5x²` in `[0, ½]`: where the drift vanishes.
pub fn drift_root() -> f64 {
    (5.0 - 5f64.sqrt()) / 10.0
}

pub fn drift(x: f64) -> f64 {
    (1.0 - 5.0 * x + 5.0 * x * x) / (1.0 - x)
}

/// `L·D(x)`, the size-independent part of the diffusion coefficient.
pub fn diffusion_shape(x: f64) -> f64 {
    (1.0 - 3.0 * x + 3.0 * x * x) / (1.0 - x)
}

/// Derivative of [`diffusion_shape`].
pub fn diffusion_shape_derivative(x: f64) -> f64 {
    (-2.0 + 6.0 * x - 3.0 * x * x) / ((1.0 - x) * (1.0 - x))
}

pub fn diffusion(x: f64, l: usize) -> f64 {
    diffusion_shape(x) / l as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FpeField {
    pub l: usize,
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub d: Vec<f64>,
}

pub fn fields(l: usize, grid: &[f64]) -> Result<FpeField> {
    if l < 3 {
        return Err(Error::OutOfRange(format!("L = {l} < 3")));
    }
    if let Some(&x) = grid.iter().find(|&&x| !(0.0..=X_MAX).contains(&x)) {
        return Err(Error::OutOfRange(format!("grid point {x} outside [0, 1/2]")));
    }
    Ok(FpeField {
        l,
        x: grid.to_vec(),
        f: grid.iter().map(|&x| drift(x)).collect(),
        d: grid.iter().map(|&x| diffusion(x, l)).collect(),
    })
}

/// `z / (eᶻ − 1)`, continuous at 0.
fn bernoulli(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 - z / 2.0
    } else {
        z / z.exp_m1()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Largest step in `τ = Ω²t²`.
    pub max_dtau: f64,
    /// Most negative density tolerated, relative to the peak.
    pub negativity_tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_dtau: 2e-3,
            negativity_tolerance: 1e-8,
        }
    }
}

/// Cell densities at one time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FpeSnapshot {
    pub omega_t: f64,
    pub density: Vec<f64>,
}

/// Finite-volume discretization on `cells` uniform cells of `[0, ½]`.
#[derive(Debug, Clone)]
pub struct FpeSolver {
    l: usize,
    h: f64,
    centers: Vec<f64>,
    // dp/dτ = A p, A tridiagonal: lower[i] = A[i][i-1], upper[i] = A[i][i+1]
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    /// q_{i+1}/q_i across each interior face for zero flux.
    face_ratio: Vec<f64>,
}

impl FpeSolver {
    pub fn new(l: usize, cells: usize) -> Result<Self> {
        if l < 3 {
            return Err(Error::OutOfRange(format!("L = {l} < 3")));
        }
        if cells < 2 {
            return Err(Error::OutOfRange(format!("need at least 2 cells, got {cells}")));
        }
        let h = X_MAX / cells as f64;
        let centers: Vec<f64> = (0..cells).map(|i| (i as f64 + 0.5) * h).collect();
        let d: Vec<f64> = centers.iter().map(|&x| diffusion(x, l)).collect();
        let mut lower = vec![0.0; cells];
        let mut diag = vec![0.0; cells];
        let mut upper = vec![0.0; cells];
        let mut face_ratio = Vec::with_capacity(cells - 1);
        for i in 0..cells - 1 {
            let xf = (i + 1) as f64 * h;
            let d_face = 2.0 * d[i] * d[i + 1] / (d[i] + d[i + 1]);
            let z = 2.0 * h * drift(xf) / d_face;
            // J = (B(−z) D_i p_i − B(z) D_{i+1} p_{i+1}) / (2h)
            let a = bernoulli(-z) * d[i] / (2.0 * h);
            let b = bernoulli(z) * d[i + 1] / (2.0 * h);
            // dp_i/dτ = −(J_{i+½} − J_{i−½}) / h
            let s = 1.0 / h;
            diag[i] -= s * a;
            upper[i] += s * b;
            diag[i + 1] -= s * b;
            lower[i + 1] += s * a;
            face_ratio.push(z.exp());
        }
        Ok(FpeSolver {
            l,
            h,
            centers,
            lower,
            diag,
            upper,
            face_ratio,
        })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn cells(&self) -> usize {
        self.centers.len()
    }

    pub fn cell_width(&self) -> f64 {
        self.h
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn mass(&self, density: &[f64]) -> f64 {
        density.iter().sum::<f64>() * self.h
    }

    pub fn mean(&self, density: &[f64]) -> f64 {
        self.centers.iter().zip(density).map(|(x, p)| x * p).sum::<f64>() * self.h / self.mass(density)
    }

    pub fn variance(&self, density: &[f64]) -> f64 {
        let m = self.mean(density);
        self.centers
            .iter()
            .zip(density)
            .map(|(x, p)| (x - m) * (x - m) * p)
            .sum::<f64>()
            * self.h
            / self.mass(density)
    }

    /// `A p`, the right-hand side of `dp/dτ`.
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let n = p.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * p[i];
                if i > 0 {
                    v += self.lower[i] * p[i - 1];
                }
                if i + 1 < n {
                    v += self.upper[i] * p[i + 1];
                }
                v
            })
            .collect()
    }

    /// Discrete zero-flux density, normalized to unit mass.
    pub fn stationary(&self) -> Vec<f64> {
        // log-space so large L does not overflow
        let mut log_q = vec![0.0; self.cells()];
        for i in 0..self.cells() - 1 {
            log_q[i + 1] = log_q[i] + self.face_ratio[i].ln();
        }
        let peak = log_q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let p: Vec<f64> = log_q
            .iter()
            .zip(&self.centers)
            .map(|(lq, &x)| (lq - peak).exp() / diffusion(x, self.l))
            .collect();
        let mass = self.mass(&p);
        p.into_iter().map(|v| v / mass).collect()
    }

    /// Cell densities of a distribution that is uniform on `[a, b]`.
    pub fn uniform_on(&self, a: f64, b: f64) -> Result<Vec<f64>> {
        let (a, b) = (a.max(0.0), b.min(X_MAX));
        if !(b > a) {
            return Err(Error::OutOfRange(format!("interval [{a}, {b}] is empty")));
        }
        let height = 1.0 / (b - a);
        Ok((0..self.cells())
            .map(|i| {
                let (lo, hi) = (i as f64 * self.h, (i + 1) as f64 * self.h);
                let overlap = (hi.min(b) - lo.max(a)).max(0.0);
                height * overlap / self.h
            })
            .collect())
    }

    /// Cell-averaged Gaussian density, normalized on the grid.
    pub fn gaussian(&self, center: f64, width: f64) -> Vec<f64> {
        let p: Vec<f64> = self
            .centers
            .iter()
            .map(|&x| (-0.5 * ((x - center) / width).powi(2)).exp())
            .collect();
        let mass = self.mass(&p);
        p.into_iter().map(|v| v / mass).collect()
    }

    pub fn solve(&self, p0: &[f64], times: &[f64]) -> Result<Vec<FpeSnapshot>> {
        self.solve_with(p0, times, &SolverOptions::default())
    }

    /// Backward Euler for the first step of every output interval, BDF2
    /// afterwards; both conserve mass exactly since the columns of `A` sum
    /// to zero.
    pub fn solve_with(&self, p0: &[f64], times: &[f64], options: &SolverOptions) -> Result<Vec<FpeSnapshot>> {
        if p0.len() != self.cells() {
            return Err(Error::DimensionMismatch {
                expected: self.cells(),
                got: p0.len(),
            });
        }
        if p0.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::OutOfRange("initial density must be nonnegative".into()));
        }
        let mass = self.mass(p0);
        if (mass - 1.0).abs() > 1e-8 {
            return Err(Error::OutOfRange(format!("initial density has mass {mass}")));
        }
        crate::quantum::check_times(times)?;

        let mut out = Vec::with_capacity(times.len());
        let mut p = p0.to_vec();
        let mut tau = 0.0;
        for &t in times {
            let target = t * t;
            let span = target - tau;
            if span > 0.0 {
                let steps = (span / options.max_dtau).ceil().max(2.0) as usize;
                let dtau = span / steps as f64;
                let mut previous = p.clone();
                p = self.implicit_step(&p, None, dtau)?;
                for _ in 1..steps {
                    let next = self.implicit_step(&p, Some(&previous), dtau)?;
                    previous = std::mem::replace(&mut p, next);
                }
                let peak = p.iter().cloned().fold(0.0, f64::max);
                if let Some((i, &v)) = p
                    .iter()
                    .enumerate()
                    .find(|(_, &v)| v < -options.negativity_tolerance * peak || !v.is_finite())
                {
                    return Err(Error::Solver(format!(
                        "density {v:.3e} at x = {:.4} after Ωt = {t} (dτ = {dtau:.2e}, {} cells); reduce max_dtau",
                        self.centers[i],
                        self.cells()
                    )));
                }
            }
            tau = target;
            out.push(FpeSnapshot {
                omega_t: t,
                density: p.clone(),
            });
        }
        Ok(out)
    }

    fn implicit_step(&self, current: &[f64], previous: Option<&[f64]>, dtau: f64) -> Result<Vec<f64>> {
        // BE: (I − dτ A) p' = p;  BDF2: (I − ⅔ dτ A) p' = (4p − p_prev)/3
        let (gamma, rhs): (f64, Vec<f64>) = match previous {
            None => (dtau, current.to_vec()),
            Some(prev) => (
                2.0 * dtau / 3.0,
                current.iter().zip(prev).map(|(c, p)| (4.0 * c - p) / 3.0).collect(),
            ),
        };
        let n = current.len();
        let sub: Vec<f64> = (0..n).map(|i| -gamma * self.lower[i]).collect();
        let main: Vec<f64> = (0..n).map(|i| 1.0 - gamma * self.diag[i]).collect();
        let sup: Vec<f64> = (0..n).map(|i| -gamma * self.upper[i]).collect();
        solve_tridiagonal(&sub, &main, &sup, &rhs)
    }
}

/// Thomas algorithm; `sub[0]` and `sup[n−1]` are ignored.
pub fn solve_tridiagonal(sub: &[f64], main: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = main.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = main[0];
    if denom == 0.0 {
        return Err(Error::Solver("singular tridiagonal system".into()));
    }
    c[0] = sup[0] / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = main[i] - sub[i] * c[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::Solver(format!("singular tridiagonal system at row {i}")));
        }
        c[i] = if i + 1 < n { sup[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub(crate) fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 40)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_values() {
        let field = fields(40, &[0.0, drift_root(), 0.5]).unwrap();
        assert_eq!(field.f[0], 1.0);
        assert_eq!(field.d[0], 1.0 / 40.0);
        assert!(field.f[1].abs() < 1e-15);
        assert!((drift_root() - 0.276_393_202_250_021).abs() < 1e-15);
        assert!(field.d.iter().all(|&d| d > 0.0));
        assert!(fields(40, &[0.6]).is_err());
        assert!(fields(2, &[0.1]).is_err());
    }

    #[test]
    fn diffusion_derivative_matches_finite_difference() {
        for x in [0.05, 0.2, 0.31, 0.47] {
            let h = 1e-6;
            let fd = (diffusion_shape(x + h) - diffusion_shape(x - h)) / (2.0 * h);
            assert!((fd - diffusion_shape_derivative(x)).abs() < 1e-8);
        }
    }

    #[test]
    fn stationary_is_a_fixed_point() {
        let solver = FpeSolver::new(100, 256).unwrap();
        let pi = solver.stationary();
        let rate = solver.apply(&pi);
        let scale = pi.iter().cloned().fold(0.0, f64::max);
        assert!(rate.iter().all(|r| r.abs() < 1e-9 * scale));
        let out = solver.solve(&pi, &[1.0]).unwrap();
        let drift: f64 = out[0].density.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum::<f64>() * solver.cell_width();
        assert!(drift < 1e-6);
    }

    #[test]
    fn continuum_zero_flux_residual_shrinks_with_refinement() {
        let residual = |cells: usize| {
            let solver = FpeSolver::new(50, cells).unwrap();
            let p = solver.stationary();
            let x = solver.centers();
            let h = solver.cell_width();
            (1..cells - 1)
                .map(|i| {
                    let dq = (diffusion(x[i + 1], 50) * p[i + 1] - diffusion(x[i - 1], 50) * p[i - 1]) / (2.0 * h);
                    (drift(x[i]) * p[i] - 0.5 * dq).abs()
                })
                .fold(0.0, f64::max)
        };
        let (coarse, fine) = (residual(128), residual(512));
        assert!(fine < coarse / 2.0, "{coarse} -> {fine}");
    }

    #[test]
    fn mass_is_conserved() {
        let solver = FpeSolver::new(100, DEFAULT_CELLS).unwrap();
        let p0 = solver.gaussian(0.1, 0.02);
        let times: Vec<f64> = (0..=16).map(|k| 0.1 * k as f64).collect();
        for snap in solver.solve(&p0, &times).unwrap() {
            assert!((solver.mass(&snap.density) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn gaussian_relaxes_to_the_drift_root() {
        let solver = FpeSolver::new(100, DEFAULT_CELLS).unwrap();
        let p0 = solver.gaussian(0.28, 0.005);
        let out = solver.solve(&p0, &[3.0]).unwrap();
        let m = solver.mean(&out[0].density);
        assert!((m - drift_root()).abs() < 5e-3, "mean {m}");
        let spread = solver.variance(&out[0].density).sqrt();
        // O(1/√L)
        assert!(spread > 0.1 / 10.0 && spread < 1.0 / 10.0, "spread {spread}");
    }

    #[test]
    fn rejects_invalid_initial_data() {
        let solver = FpeSolver::new(60, 64).unwrap();
        assert!(solver.solve(&vec![1.0; 64], &[1.0]).is_err());
        let mut bad = solver.gaussian(0.2, 0.05);
        bad[3] = -1.0;
        assert!(solver.solve(&bad, &[1.0]).is_err());
        assert!(solver.solve(&bad[..10], &[1.0]).is_err());
    }

    #[test]
    fn simpson_integrates_smooth_functions() {
        let v = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-11);
    }

    #[test]
    fn thomas_solves_a_known_system() {
        let x = solve_tridiagonal(&[0.0, 1.0, 1.0], &[4.0, 4.0, 4.0], &[1.0, 1.0, 0.0], &[5.0, 6.0, 5.0]).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }
}
