//! Quench from a single micro-state: excitation-number distribution,
//! moments and energy along the exact trajectory.

use blockade_thermal::harness::random_in_column;
use blockade_thermal::quantum::{energy, excitation_moments, propagate};
use blockade_thermal::{ConfigSpace, Lattice, ModelParams, StateVector};

fn main() -> blockade_thermal::Result<()> {
    let l = 20;
    let space = ConfigSpace::enumerate(Lattice::ring(l)?)?;
    let params = ModelParams::default();
    let start = random_in_column(&space, 5, 1)?;
    println!(
        "L = {l}, {} states, initial {}",
        space.len(),
        space.state(start).to_spins(l)
    );
    let psi0 = StateVector::basis(&space, start)?;
    let times: Vec<f64> = (0..=20).map(|k| 0.25 * k as f64).collect();
    for psi in propagate(&space, &params, &psi0, &times)? {
        let (n1, n2) = excitation_moments(&space, &psi.amplitudes)?;
        let e = energy(&space, &params, &psi.amplitudes)?;
        println!(
            "Omega t = {:>4.2}  norm-1 = {:+.1e}  <n> = {:.4}  var n = {:.4}  <H> = {:+.1e}",
            psi.omega_t,
            psi.norm_sqr() - 1.0,
            n1,
            n2 - n1 * n1,
            e.re
        );
    }
    Ok(())
}
