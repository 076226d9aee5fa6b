use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probability of each excitation number `n = 0..=n_max`, optionally stamped
/// with the dimensionless time `Ωt` it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcitationDistribution {
    pub p: Vec<f64>,
    pub omega_t: f64,
}

impl ExcitationDistribution {
    pub fn new(p: Vec<f64>) -> Self {
        ExcitationDistribution { p, omega_t: 0.0 }
    }

    pub fn at(mut self, omega_t: f64) -> Self {
        self.omega_t = omega_t;
        self
    }

    /// Point mass on `n` over `0..=n_max`.
    pub fn delta(n: usize, n_max: usize) -> Result<Self> {
        if n > n_max {
            return Err(Error::OutOfRange(format!("n = {n} exceeds n_max = {n_max}")));
        }
        let mut p = vec![0.0; n_max + 1];
        p[n] = 1.0;
        Ok(Self::new(p))
    }

    pub fn n_max(&self) -> usize {
        self.p.len().saturating_sub(1)
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.p.iter().enumerate().map(|(n, &p)| n as f64 * p).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.p.iter().enumerate().map(|(n, &p)| (n * n) as f64 * p).sum()
    }

    pub fn normalized(&self) -> Self {
        let total = self.total();
        ExcitationDistribution {
            p: self.p.iter().map(|&p| p / total).collect(),
            omega_t: self.omega_t,
        }
    }

    /// Checks nonnegativity and unit total within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        if self.p.is_empty() {
            return Err(Error::OutOfRange("empty distribution".into()));
        }
        if let Some((n, &p)) = self.p.iter().enumerate().find(|(_, &p)| !(p >= -tol)) {
            return Err(Error::OutOfRange(format!("p_{n} = {p} is negative")));
        }
        let total = self.total();
        if (total - 1.0).abs() > tol {
            return Err(Error::OutOfRange(format!("distribution sums to {total}")));
        }
        Ok(())
    }

    /// `½ Σ |p_n − q_n|`, padding the shorter vector with zeros.
    pub fn total_variation(&self, other: &Self) -> f64 {
        total_variation(&self.p, &other.p)
    }

    /// Largest absolute difference of the cumulative distributions.
    pub fn kolmogorov_smirnov(&self, other: &Self) -> f64 {
        let len = self.p.len().max(other.p.len());
        let (mut a, mut b, mut worst) = (0.0f64, 0.0f64, 0.0f64);
        for n in 0..len {
            a += self.p.get(n).copied().unwrap_or(0.0);
            b += other.p.get(n).copied().unwrap_or(0.0);
            worst = worst.max((a - b).abs());
        }
        worst
    }
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let len = p.len().max(q.len());
    0.5 * (0..len)
        .map(|n| (p.get(n).copied().unwrap_or(0.0) - q.get(n).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn moments_of_delta() {
        let d = ExcitationDistribution::delta(7, 12).unwrap();
        assert_eq!(d.mean(), 7.0);
        assert_eq!(d.second_moment(), 49.0);
        assert!(ExcitationDistribution::delta(13, 12).is_err());
    }

    #[test]
    fn validate_rejects_bad_mass() {
        assert!(ExcitationDistribution::new(vec![0.5, 0.6]).validate(1e-10).is_err());
        assert!(ExcitationDistribution::new(vec![1.1, -0.1]).validate(1e-10).is_err());
        assert!(ExcitationDistribution::new(vec![0.25, 0.75]).validate(1e-10).is_ok());
    }

    #[test]
    fn tv_pads_shorter() {
        assert_eq!(total_variation(&[1.0], &[0.0, 1.0]), 1.0);
        assert_eq!(total_variation(&[0.5, 0.5], &[0.5, 0.5]), 0.0);
    }

    fn simplex(len: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, len).prop_filter_map("nonzero", |w| {
            let s: f64 = w.iter().sum();
            (s > 1e-6).then(|| w.iter().map(|x| x / s).collect())
        })
    }

    proptest! {
        #[test]
        fn tv_and_ks_are_bounded_metrics(p in simplex(8), q in simplex(8)) {
            let a = ExcitationDistribution::new(p);
            let b = ExcitationDistribution::new(q);
            let tv = a.total_variation(&b);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&tv));
            prop_assert!((tv - b.total_variation(&a)).abs() < 1e-15);
            prop_assert!(a.kolmogorov_smirnov(&b) <= tv + 1e-12);
        }
    }
}
