//! Temporal fluctuations of the quantum mean density around the Master mean
//! for rings of 15, 20 and 25 sites.

use blockade_thermal::harness::{sweep_finite_size, SweepConfig};

fn main() -> blockade_thermal::Result<()> {
    let summary = sweep_finite_size(&SweepConfig::standard())?;
    print!("{}", summary.to_csv());
    println!("decreasing with L: {}", summary.is_decreasing());
    Ok(())
}
