//! Exact column sizes and transition coefficients of the hard-dimer ring,
//! with the generating polynomials and the mean density.

use blockade_thermal::dimer::{bulk_density, generating_polys, lucas, ring_density, transition_coefficients};

fn main() -> blockade_thermal::Result<()> {
    let l: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(12);
    let c = transition_coefficients(l)?;
    println!("L = {l}, Lucas(L) = {}", lucas(l));
    println!(
        "{:>3} {:>10} {:>10} {:>8} {:>10}",
        "n", "nu_n", "c_down", "T_down", "T_up"
    );
    for row in c.table() {
        println!(
            "{:>3} {:>10} {:>10} {:>8.3} {:>10.5}",
            row.n, row.nu_n, row.c_down, row.t_down, row.t_up
        );
    }
    let g = generating_polys(l)?;
    println!("Xi(1) = {}, Lambda(1) = {}", g.xi_at(1.0), g.lambda_at(1.0));
    println!(
        "density at z = 1: ring {:.6}, bulk {:.6}, equilibrium point (5-sqrt5)/10 = {:.6}",
        ring_density(l, 1.0),
        bulk_density(1.0),
        (5.0 - 5f64.sqrt()) / 10.0
    );
    Ok(())
}
