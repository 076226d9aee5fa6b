//! Continuum limit: the Fokker-Planck solution on [0, 1/2] next to the
//! Master equation of a 200-site ring.

use blockade_thermal::fpe::consistency::discrete_continuum_consistency;
use blockade_thermal::fpe::{drift_root, FpeSolver, DEFAULT_CELLS};

fn main() -> blockade_thermal::Result<()> {
    let l = 200;
    let solver = FpeSolver::new(l, DEFAULT_CELLS)?;
    let stationary = solver.stationary();
    println!(
        "stationary mean {:.5} (drift root {:.5}), variance {:.3e}",
        solver.mean(&stationary),
        drift_root(),
        solver.variance(&stationary)
    );
    let p0 = solver.gaussian(0.1, 0.01);
    let times = [0.0, 0.25, 0.5, 1.0, 2.0];
    for snap in solver.solve(&p0, &times)? {
        println!(
            "Omega t = {:.2}  mean x = {:.5}  mass = {:.12}",
            snap.omega_t,
            solver.mean(&snap.density),
            solver.mass(&snap.density)
        );
    }
    let times: Vec<f64> = (0..=20).map(|k| 0.1 * k as f64).collect();
    let report = discrete_continuum_consistency(l, 55, &times)?;
    for (t, tv) in report.omega_t.iter().zip(&report.tv).step_by(4) {
        println!("Omega t = {t:.1}  TV(master, FPE) = {tv:.4}");
    }
    Ok(())
}
