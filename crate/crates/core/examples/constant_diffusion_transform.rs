//! Change of variable y(x) that makes the diffusion constant, its quadratic
//! approximation and the effective potential.

use blockade_thermal::fpe::transform::{quadratic_fit, transform, y_of_x, JacobianConvention};
use blockade_thermal::fpe::{drift_root, fields};

fn main() -> blockade_thermal::Result<()> {
    let l = 200;
    for conv in [JacobianConvention::Normalized, JacobianConvention::Literal] {
        let fit = quadratic_fit(conv, l, 401)?;
        println!(
            "{conv:?}: y(1/2) = {:.5}, fit a1 = {:.4}, a2 = {:.4}, max residual {:.2}%",
            y_of_x(conv, l, 0.5),
            fit.a1,
            fit.a2,
            100.0 * fit.max_relative_residual
        );
    }
    let grid: Vec<f64> = (1..100).map(|k| 0.005 * k as f64).collect();
    let t = transform(&fields(l, &grid)?, JacobianConvention::Normalized)?;
    let (x, y) = t.potential_minimum();
    println!(
        "potential minimum at x = {x:.3} (drift root {:.3}), y = {y:.4}; constant diffusion {:.3e}",
        drift_root(),
        t.d_tilde
    );
    Ok(())
}
