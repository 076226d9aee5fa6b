//! Master-equation relaxation on a 25-site ring and the exp(-lambda Omega^2 t^2)
//! signature of the approach to equilibrium.

use blockade_thermal::master::{build_rates_1d, equilibrium_closed_form, gaussian_relaxation_fit, solve_master};
use blockade_thermal::ExcitationDistribution;

fn main() -> blockade_thermal::Result<()> {
    let (l, n0) = (25, 7);
    let rates = build_rates_1d(l)?;
    let eq = rates.stationary()?;
    let closed = equilibrium_closed_form(l)?;
    println!(
        "stationary vs closed form: TV = {:.2e}, raw sum = {:.12}",
        eq.total_variation(&closed.normalized),
        closed.raw_sum
    );

    let times: Vec<f64> = (0..=30).map(|k| 0.05 * k as f64).collect();
    let traj = solve_master(&rates, &ExcitationDistribution::delta(n0, rates.n_max())?, &times)?;
    for d in traj.iter().step_by(3) {
        println!(
            "Omega t = {:.2}  <n> = {:.4}  TV to equilibrium = {:.3e}",
            d.omega_t,
            d.mean(),
            d.total_variation(&eq)
        );
    }
    let fit = gaussian_relaxation_fit(&traj, &eq, (0.1, 0.8))?;
    println!(
        "lambda = {:.4}, R^2 = {:.4} over {} points",
        fit.lambda, fit.r_squared, fit.points
    );
    Ok(())
}
