//! Exact hard-dimer combinatorics of the ring: state counts per excitation
//! number, connectivity between neighbouring columns, the Master-equation
//! transition coefficients, generating polynomials and the census of
//! second-order transition types.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::space::ConfigSpace;

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn check_range(l: usize, n: usize) -> Result<()> {
    if l < 2 {
        return Err(Error::OutOfRange(format!("ring size {l} < 2")));
    }
    if n > l / 2 {
        return Err(Error::OutOfRange(format!(
            "n = {n} exceeds floor(L/2) = {} for L = {l}",
            l / 2
        )));
    }
    Ok(())
}

/// `ν_n = L/(L−n) · C(L−n, n)`, the number of ring configurations with `n`
/// excitations; `ν_0 = 1`.
pub fn nu_closed_form(l: usize, n: usize) -> Result<BigUint> {
    check_range(l, n)?;
    if n == 0 {
        return Ok(BigUint::one());
    }
    let (l, n) = (l as u64, n as u64);
    let numerator = BigUint::from(l) * binomial(l - n, n);
    let (q, r) = numerator.div_rem(&BigUint::from(l - n));
    debug_assert!(r.is_zero());
    Ok(q)
}

/// The same count written as `L/n! · Π_{j=n+1}^{2n−1} (L − j)`.
pub fn nu_product_form(l: usize, n: usize) -> Result<BigUint> {
    check_range(l, n)?;
    if n == 0 {
        return Ok(BigUint::one());
    }
    let mut acc = BigUint::from(l);
    for j in n + 1..2 * n {
        acc *= BigUint::from(l - j);
    }
    let factorial: BigUint = (1..=n as u64).map(BigUint::from).product();
    Ok(acc / factorial)
}

/// `c_{n→n−1} = L/(n−1)! · Π_{j=n+1}^{2n−1} (L − j)`: all links from column
/// `n` down to column `n − 1`.
pub fn c_down_product_form(l: usize, n: usize) -> Result<BigUint> {
    check_range(l, n)?;
    if n == 0 {
        return Ok(BigUint::zero());
    }
    let mut acc = BigUint::from(l);
    for j in n + 1..2 * n {
        acc *= BigUint::from(l - j);
    }
    let factorial: BigUint = (1..n as u64).map(BigUint::from).product();
    Ok(acc / factorial)
}

/// Lucas numbers `2, 1, 3, 4, 7, 11, …`; `lucas(L)` counts the independent
/// sets of an `L`-cycle.
pub fn lucas(l: usize) -> BigUint {
    let (mut a, mut b) = (BigUint::from(2u32), BigUint::one());
    for _ in 0..l {
        let next = &a + &b;
        a = std::mem::replace(&mut b, next);
    }
    a
}

/// Fibonacci numbers with `fibonacci(0) = 0`.
pub fn fibonacci(l: usize) -> BigUint {
    let (mut a, mut b) = (BigUint::zero(), BigUint::one());
    for _ in 0..l {
        let next = &a + &b;
        a = std::mem::replace(&mut b, next);
    }
    a
}

fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// `T_{n→n+1} = (L − 2n − 1)(L − 2n)/(L − n − 1)` as an exact rational.
pub fn t_up(l: usize, n: usize) -> Result<BigRational> {
    check_range(l, n)?;
    if l < 3 {
        return Err(Error::OutOfRange(format!("ring size {l} < 3")));
    }
    let (l, n) = (l as i64, n as i64);
    let numerator = (l - 2 * n - 1) * (l - 2 * n);
    Ok(BigRational::new(numerator.into(), (l - n - 1).into()))
}

/// Exact per-column counts and coefficients of the ring.
#[derive(Debug, Clone, PartialEq)]
pub struct DimerCounts {
    pub l: usize,
    pub nu: Vec<BigUint>,
    pub c_down: Vec<BigUint>,
    pub t_down: Vec<BigRational>,
    pub t_up: Vec<BigRational>,
}

impl DimerCounts {
    pub fn n_max(&self) -> usize {
        self.nu.len() - 1
    }

    pub fn t_up_f64(&self) -> Vec<f64> {
        self.t_up.iter().map(|t| t.to_f64().unwrap()).collect()
    }

    pub fn t_down_f64(&self) -> Vec<f64> {
        self.t_down.iter().map(|t| t.to_f64().unwrap()).collect()
    }

    /// Mean forward connectivity `(n+1)·ν_{n+1}/ν_n`, which must equal `T_up`.
    pub fn forward_connectivity(&self, n: usize) -> BigRational {
        if n == self.n_max() {
            return BigRational::zero();
        }
        let num = BigUint::from(n + 1) * &self.nu[n + 1];
        BigRational::new(num.into(), self.nu[n].clone().into())
    }

    pub fn table(&self) -> Vec<CoefficientRow> {
        (0..=self.n_max())
            .map(|n| CoefficientRow {
                l: self.l,
                n,
                nu_n: self.nu[n].to_string(),
                c_down: self.c_down[n].to_string(),
                t_down: self.t_down[n].to_f64().unwrap(),
                t_up: self.t_up[n].to_f64().unwrap(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoefficientRow {
    pub l: usize,
    pub n: usize,
    pub nu_n: String,
    pub c_down: String,
    pub t_down: f64,
    pub t_up: f64,
}

pub fn transition_coefficients(l: usize) -> Result<DimerCounts> {
    if l < 3 {
        return Err(Error::OutOfRange(format!("ring size {l} < 3")));
    }
    let n_max = l / 2;
    let mut counts = DimerCounts {
        l,
        nu: Vec::with_capacity(n_max + 1),
        c_down: Vec::with_capacity(n_max + 1),
        t_down: Vec::with_capacity(n_max + 1),
        t_up: Vec::with_capacity(n_max + 1),
    };
    for n in 0..=n_max {
        let nu = nu_closed_form(l, n)?;
        counts.c_down.push(BigUint::from(n) * &nu);
        counts.nu.push(nu);
        counts.t_down.push(ratio(n as u64, 1));
        counts.t_up.push(t_up(l, n)?);
    }
    Ok(counts)
}

/// `Ξ(z) = Σ ν_n zⁿ` and `Λ(z) = Σ c_{n→n−1} zⁿ` with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneratingPolys {
    pub xi: Vec<u64>,
    pub lambda: Vec<u64>,
}

impl GeneratingPolys {
    pub fn xi_at(&self, z: f64) -> f64 {
        horner(&self.xi, z)
    }

    pub fn lambda_at(&self, z: f64) -> f64 {
        horner(&self.lambda, z)
    }
}

fn horner(coeffs: &[u64], z: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c as f64)
}

/// Builds `Ξ` and `Λ` by enumerating the ring and checks every coefficient
/// against the closed forms.
pub fn generating_polys(l: usize) -> Result<GeneratingPolys> {
    let space = ConfigSpace::enumerate(Lattice::ring(l)?)?;
    let xi: Vec<u64> = space.column_sizes().iter().map(|&s| s as u64).collect();
    let lambda: Vec<u64> = (0..=space.n_max())
        .map(|n| space.column(n).map(|i| space.backward_degree(i) as u64).sum())
        .collect();
    for n in 0..xi.len() {
        let nu = nu_closed_form(l, n)?;
        let c = c_down_product_form(l, n)?;
        if BigUint::from(xi[n]) != nu || BigUint::from(lambda[n]) != c {
            return Err(Error::Solver(format!(
                "L = {l}, n = {n}: enumerated (ν, c) = ({}, {}) but closed form gives ({nu}, {c})",
                xi[n], lambda[n]
            )));
        }
    }
    Ok(GeneratingPolys { xi, lambda })
}

/// Bulk excitation density `½(1 − 1/√(1+4z))` of the hard-dimer gas.
pub fn bulk_density(z: f64) -> f64 {
    0.5 * (1.0 - 1.0 / (1.0 + 4.0 * z).sqrt())
}

/// Exact density `z Ξ'(z) / (L Ξ(z))` of a finite ring from the 2×2
/// transfer matrix, whose eigenvalues are `(1 ± √(1+4z))/2`.
pub fn ring_density(l: usize, z: f64) -> f64 {
    let s = (1.0 + 4.0 * z).sqrt();
    let plus = 0.5 * (1.0 + s);
    let r = 0.5 * (1.0 - s) / plus;
    let l = l as i32;
    (z / s) * (1.0 - r.powi(l - 1)) / (plus * (1.0 + r.powi(l)))
}

/// Density from the closed-form counts, `Σ n ν_n zⁿ / (L Σ ν_n zⁿ)`.
pub fn ring_density_from_counts(l: usize, z: f64) -> Result<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for n in 0..=l / 2 {
        let w = nu_closed_form(l, n)?.to_f64().unwrap() * z.powi(n as i32);
        num += n as f64 * w;
        den += w;
    }
    Ok(num / (l as f64 * den))
}

/// Ordered length-2 walks starting in one column, classified by endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransitionCensus {
    pub lattice: String,
    pub n: usize,
    pub states: usize,
    /// Walks returning to the starting state.
    pub loops: u64,
    /// Walks ending on a different state of the same column.
    pub reflections: u64,
    /// Walks ending two columns away.
    pub transmissions: u64,
    /// Ordered pairs of distinct same-column states joined by at least one reflection.
    pub reflection_pairs: u64,
}

impl TransitionCensus {
    pub fn total(&self) -> u64 {
        self.loops + self.reflections + self.transmissions
    }

    pub fn reflection_loop_ratio(&self) -> f64 {
        self.reflections as f64 / self.loops as f64
    }

    /// Probability that two distinct states drawn from the column are
    /// joined by a reflection.
    pub fn reflection_link_probability(&self) -> f64 {
        let s = self.states as f64;
        if self.states < 2 {
            return 0.0;
        }
        self.reflection_pairs as f64 / (s * (s - 1.0))
    }
}

pub fn transition_census(space: &ConfigSpace, n: usize) -> Result<TransitionCensus> {
    let column = space.column(n);
    if column.is_empty() {
        return Err(Error::EmptyColumn(n));
    }
    let mut census = TransitionCensus {
        lattice: space.lattice().label(),
        n,
        states: column.len(),
        loops: 0,
        reflections: 0,
        transmissions: 0,
        reflection_pairs: 0,
    };
    let mut partners = Vec::new();
    for s in column {
        partners.clear();
        for &mid in space.neighbors_unchecked(s) {
            for &end in space.neighbors_unchecked(mid as usize) {
                let end = end as usize;
                if end == s {
                    census.loops += 1;
                } else if space.column_of(end) == n {
                    census.reflections += 1;
                    partners.push(end);
                } else {
                    census.transmissions += 1;
                }
            }
        }
        partners.sort_unstable();
        partners.dedup();
        census.reflection_pairs += partners.len() as u64;
    }
    Ok(census)
}
