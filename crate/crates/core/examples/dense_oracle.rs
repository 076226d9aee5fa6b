//! Chebyshev propagation against full diagonalization on a small ring.

use blockade_thermal::quantum::dense::DensePropagator;
use blockade_thermal::quantum::propagate;
use blockade_thermal::{ConfigSpace, Lattice, ModelParams, StateVector};

fn main() -> blockade_thermal::Result<()> {
    let space = ConfigSpace::enumerate(Lattice::ring(12)?)?;
    let params = ModelParams::default();
    let dense = DensePropagator::new(&space, &params)?;
    let e = dense.eigenvalues();
    println!("{} states, spectrum [{:.6}, {:.6}]", space.len(), e.min(), e.max());
    let psi0 = StateVector::basis(&space, space.column(3).start)?;
    let times = [0.5, 1.0, 2.0, 5.0];
    for psi in propagate(&space, &params, &psi0, &times)? {
        let exact = dense.propagate(&psi0.amplitudes, psi.omega_t);
        let err: f64 = psi
            .amplitudes
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        println!("Omega t = {:.1}: ||sparse - dense|| = {err:.2e}", psi.omega_t);
    }
    Ok(())
}
