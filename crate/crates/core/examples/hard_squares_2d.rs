//! Hard squares on a periodic torus: measured coefficients, the 2D Master
//! equilibrium, and a quantum snapshot against it.
//!
//! cargo run --release --example hard_squares_2d -- 6 6 8

use blockade_thermal::harness::random_in_column;
use blockade_thermal::lattice::transfer_matrix_counts;
use blockade_thermal::master::build_rates_2d;
use blockade_thermal::quantum::distribution_trajectory;
use blockade_thermal::{ConfigSpace, Lattice, ModelParams, StateVector};

fn main() -> blockade_thermal::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (lx, ly, n0) = match args[..] {
        [a, b, n] => (a, b, n),
        _ => (4, 4, 3),
    };
    let lattice = Lattice::torus(lx, ly)?;
    let predicted: u128 = transfer_matrix_counts(&lattice).iter().sum();
    let space = ConfigSpace::enumerate(lattice)?;
    println!(
        "{} states (transfer matrix {predicted}), columns {:?}",
        space.len(),
        space.column_sizes()
    );
    let rates = build_rates_2d(&space)?;
    let eq = rates.stationary()?;
    for n in 0..=rates.n_max() {
        println!(
            "n = {n:>2}  T_down = {:>4}  T_up = {:>9.4}  p_eq = {:.5}",
            rates.t_down[n], rates.t_up[n], eq.p[n]
        );
    }
    let psi0 = StateVector::basis(&space, random_in_column(&space, n0, 1)?)?;
    let q = distribution_trajectory(&space, &ModelParams::default(), &psi0, &[3.0])?;
    println!(
        "quantum at Omega t = 3 vs equilibrium: TV = {:.4}",
        q[0].total_variation(&eq)
    );
    Ok(())
}
