//! Change of variable `y = y(x)` that makes the diffusion coefficient
//! constant, with the transformed drift `F̃ = J[F − ½ ∂_y(D J)]` and its
//! potential `U` (`F̃ = −∂_y U`, `U(y(0)) = 0`).
//!
//! Two Jacobian normalizations are offered. `Literal` is `J = 1/√D`, which
//! makes `y` grow like `√L`. `Normalized` is `J = (2 L D)^(−1/2)`, which is
//! independent of `L` and gives the size-free map used for the quadratic
//! fit `y ≈ a₁x + a₂x²`.

use serde::{Deserialize, Serialize};

use super::{adaptive_simpson, diffusion_shape, diffusion_shape_derivative, drift, FpeField, X_MAX};
use crate::error::{Error, Result};

const QUAD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianConvention {
    #[default]
    Normalized,
    Literal,
}

impl JacobianConvention {
    /// `J = c / √g(x)` where `g = L·D`; this returns `c`.
    fn scale(self, l: usize) -> f64 {
        match self {
            JacobianConvention::Normalized => 0.5f64.sqrt(),
            JacobianConvention::Literal => (l as f64).sqrt(),
        }
    }

    pub fn jacobian(self, l: usize, x: f64) -> f64 {
        self.scale(l) / diffusion_shape(x).sqrt()
    }

    /// `d(D J)/dx`.
    fn d_dx_diffusion_jacobian(self, l: usize, x: f64) -> f64 {
        // D J = (c/L) √g
        let g = diffusion_shape(x);
        self.scale(l) / l as f64 * diffusion_shape_derivative(x) / (2.0 * g.sqrt())
    }

    /// `F̃(x) = J F − ½ d(DJ)/dx`, using `∂_y = J⁻¹ ∂_x`.
    pub fn effective_force(self, l: usize, x: f64) -> f64 {
        self.jacobian(l, x) * drift(x) - 0.5 * self.d_dx_diffusion_jacobian(l, x)
    }

    /// `J² D`, constant by construction.
    pub fn transformed_diffusion(self, l: usize) -> f64 {
        self.scale(l).powi(2) / l as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformedField {
    pub convention: JacobianConvention,
    pub l: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub j: Vec<f64>,
    pub f_tilde: Vec<f64>,
    pub u: Vec<f64>,
    pub d_tilde: f64,
}

impl TransformedField {
    /// Grid point where `U` is smallest, as `(x, y)`.
    pub fn potential_minimum(&self) -> (f64, f64) {
        let i = (0..self.u.len())
            .min_by(|&a, &b| self.u[a].total_cmp(&self.u[b]))
            .expect("nonempty grid");
        (self.x[i], self.y[i])
    }
}

/// `y(x) = ∫₀ˣ J`.
pub fn y_of_x(convention: JacobianConvention, l: usize, x: f64) -> f64 {
    adaptive_simpson(&|s| convention.jacobian(l, s), 0.0, x, QUAD_TOL)
}

/// Inverse of [`y_of_x`] by safeguarded Newton iteration.
pub fn x_of_y(convention: JacobianConvention, l: usize, y: f64) -> Result<f64> {
    let y_max = y_of_x(convention, l, X_MAX);
    if !(0.0..=y_max).contains(&y) {
        return Err(Error::OutOfRange(format!("y = {y} outside [0, {y_max}]")));
    }
    let (mut lo, mut hi) = (0.0, X_MAX);
    let mut x = X_MAX * y / y_max;
    for _ in 0..100 {
        let r = y_of_x(convention, l, x) - y;
        if r.abs() < 1e-13 {
            return Ok(x);
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - r / convention.jacobian(l, x);
        x = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Ok(x)
}

/// Tabulates `y`, `J`, `F̃` and `U` on the field's grid. The grid must be
/// ascending.
pub fn transform(field: &FpeField, convention: JacobianConvention) -> Result<TransformedField> {
    if field.x.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::OutOfRange("grid must be strictly ascending".into()));
    }
    let l = field.l;
    let jac = |x: f64| convention.jacobian(l, x);
    // dU = −F̃ dy = −F̃ J dx
    let force_density = |x: f64| -convention.effective_force(l, x) * convention.jacobian(l, x);
    let (mut y, mut u) = (Vec::with_capacity(field.x.len()), Vec::with_capacity(field.x.len()));
    let (mut prev, mut y_acc, mut u_acc) = (0.0, 0.0, 0.0);
    for &x in &field.x {
        y_acc += adaptive_simpson(&jac, prev, x, QUAD_TOL);
        u_acc += adaptive_simpson(&force_density, prev, x, QUAD_TOL);
        y.push(y_acc);
        u.push(u_acc);
        prev = x;
    }
    Ok(TransformedField {
        convention,
        l,
        x: field.x.clone(),
        y,
        j: field.x.iter().map(|&x| jac(x)).collect(),
        f_tilde: field.x.iter().map(|&x| convention.effective_force(l, x)).collect(),
        u,
        d_tilde: convention.transformed_diffusion(l),
    })
}

/// Least-squares fit `y(x) ≈ a₁x + a₂x²` over `[0, ½]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticFit {
    pub a1: f64,
    pub a2: f64,
    /// Largest `|fit − y|` relative to `y(½)`.
    pub max_relative_residual: f64,
}

impl QuadraticFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.a1 * x + self.a2 * x * x
    }

    pub fn inverse(&self, y: f64) -> f64 {
        ((self.a1 * self.a1 + 4.0 * self.a2 * y).sqrt() - self.a1) / (2.0 * self.a2)
    }
}

pub fn quadratic_fit(convention: JacobianConvention, l: usize, samples: usize) -> Result<QuadraticFit> {
    if samples < 3 {
        return Err(Error::OutOfRange(format!("need at least 3 samples, got {samples}")));
    }
    let xs: Vec<f64> = (0..samples).map(|k| X_MAX * k as f64 / (samples - 1) as f64).collect();
    let mut ys = Vec::with_capacity(samples);
    let mut acc = 0.0;
    for w in std::iter::once(&0.0).chain(&xs).collect::<Vec<_>>().windows(2) {
        acc += adaptive_simpson(&|s| convention.jacobian(l, s), *w[0], *w[1], QUAD_TOL);
        ys.push(acc);
    }
    // normal equations for the two basis functions x and x²
    let (mut s22, mut s23, mut s33, mut b2, mut b3) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(&ys) {
        let (x2, x3) = (x * x, x * x * x);
        s22 += x2;
        s23 += x3;
        s33 += x2 * x2;
        b2 += x * y;
        b3 += x2 * y;
    }
    let det = s22 * s33 - s23 * s23;
    let a1 = (b2 * s33 - b3 * s23) / det;
    let a2 = (s22 * b3 - s23 * b2) / det;
    let y_end = *ys.last().unwrap();
    let max_relative_residual = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| (a1 * x + a2 * x * x - y).abs())
        .fold(0.0, f64::max)
        / y_end;
    Ok(QuadraticFit {
        a1,
        a2,
        max_relative_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpe::{drift_root, fields};

    fn grid(points: usize) -> Vec<f64> {
        (0..points).map(|k| X_MAX * k as f64 / (points - 1) as f64).collect()
    }

    #[test]
    fn anchor_and_monotone() {
        let field = fields(100, &grid(201)).unwrap();
        let t = transform(&field, JacobianConvention::Normalized).unwrap();
        assert_eq!(t.y[0], 0.0);
        assert_eq!(t.u[0], 0.0);
        assert!(t.y.windows(2).all(|w| w[1] > w[0]));
        assert!(t.j.iter().all(|&j| j > 0.0));
        assert!((t.j[0] - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn literal_convention_scales_with_root_l() {
        let a = y_of_x(JacobianConvention::Literal, 100, 0.5);
        let b = y_of_x(JacobianConvention::Literal, 400, 0.5);
        assert!((b / a - 2.0).abs() < 1e-12);
        let n = y_of_x(JacobianConvention::Normalized, 100, 0.5);
        assert!((a / n - (200f64).sqrt()).abs() < 1e-9);
        assert!((JacobianConvention::Literal.transformed_diffusion(37) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fit_constants() {
        let fit = quadratic_fit(JacobianConvention::Normalized, 100, 1001).unwrap();
        assert!((fit.a1 - 0.7074).abs() < 5e-3, "a1 = {}", fit.a1);
        assert!((fit.a2 - 0.4169).abs() < 1e-2, "a2 = {}", fit.a2);
        assert!(fit.max_relative_residual < 0.01);
        let y = fit.eval(0.3);
        assert!((fit.inverse(y) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn inverse_round_trip() {
        for x in [0.0, 1e-4, 0.1, 0.2764, 0.45, 0.5] {
            let y = y_of_x(JacobianConvention::Normalized, 50, x);
            let back = x_of_y(JacobianConvention::Normalized, 50, y).unwrap();
            assert!((back - x).abs() < 1e-9, "{x} -> {back}");
        }
        assert!(x_of_y(JacobianConvention::Normalized, 50, 2.0).is_err());
    }

    #[test]
    fn force_is_minus_potential_gradient() {
        let field = fields(80, &grid(2001)).unwrap();
        let t = transform(&field, JacobianConvention::Normalized).unwrap();
        for i in 1..t.x.len() - 1 {
            let grad = (t.u[i + 1] - t.u[i - 1]) / (t.y[i + 1] - t.y[i - 1]);
            assert!((grad + t.f_tilde[i]).abs() < 1e-4, "x = {}", t.x[i]);
        }
    }

    #[test]
    fn potential_minimum_sits_at_the_drift_root() {
        let field = fields(2000, &grid(5001)).unwrap();
        let t = transform(&field, JacobianConvention::Normalized).unwrap();
        let (_, y_min) = t.potential_minimum();
        let x_min = x_of_y(JacobianConvention::Normalized, 2000, y_min).unwrap();
        assert!((x_min - drift_root()).abs() < 2e-3, "{x_min}");
        let fit = quadratic_fit(JacobianConvention::Normalized, 2000, 1001).unwrap();
        assert!((fit.inverse(y_min) - drift_root()).abs() < 1e-2);
        // single well: U decreases then increases
        let i_min = t.u.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!(t.u[..=i_min].windows(2).all(|w| w[1] <= w[0]));
        assert!(t.u[i_min..].windows(2).all(|w| w[1] >= w[0]));
    }
}
