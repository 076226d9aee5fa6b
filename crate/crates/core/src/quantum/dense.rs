//! Dense eigendecomposition propagator, used as an independent check of the
//! Chebyshev path on small spaces.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum::ModelParams;
use crate::space::ConfigSpace;

/// Refuse dense matrices above this dimension.
pub const MAX_DENSE_DIM: usize = 4000;

pub struct DensePropagator {
    eigen: SymmetricEigen<f64, nalgebra::Dyn>,
    omega: f64,
}

impl DensePropagator {
    pub fn new(space: &ConfigSpace, params: &ModelParams) -> Result<Self> {
        let dim = space.len();
        if dim > MAX_DENSE_DIM {
            return Err(Error::Capacity {
                predicted: dim as u128,
                budget: MAX_DENSE_DIM,
            });
        }
        let mut h = DMatrix::<f64>::zeros(dim, dim);
        for i in 0..dim {
            for &j in space.neighbors(i)? {
                h[(i, j as usize)] = params.omega;
            }
        }
        Ok(DensePropagator {
            eigen: SymmetricEigen::new(h),
            omega: params.omega,
        })
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigen.eigenvalues
    }

    /// `exp(−iHt)ψ₀` with `t` given as `Ωt`.
    pub fn propagate(&self, psi0: &[Complex64], omega_t: f64) -> Vec<Complex64> {
        let t = omega_t / self.omega;
        let v = &self.eigen.eigenvectors;
        let dim = v.nrows();
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for (k, &e) in self.eigen.eigenvalues.iter().enumerate() {
            let col = v.column(k);
            let overlap: Complex64 = (0..dim).map(|i| col[i] * psi0[i]).sum();
            let coeff = overlap * Complex64::from_polar(1.0, -e * t);
            for i in 0..dim {
                out[i] += coeff * col[i];
            }
        }
        out
    }
}
