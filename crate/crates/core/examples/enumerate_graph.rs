//! Blockade-allowed configurations of a ring and a torus, and the graph
//! the transverse field puts on them.
//!
//! cargo run --release --example enumerate_graph -- 10

use blockade_thermal::lattice::transfer_matrix_counts;
use blockade_thermal::{ConfigSpace, Lattice};

fn main() -> blockade_thermal::Result<()> {
    let l: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(8);
    let ring = ConfigSpace::enumerate(Lattice::ring(l)?)?;
    println!("{}", serde_json::to_string_pretty(&ring.summary())?);
    for (i, s) in ring.states().take(6).enumerate() {
        println!("{i:>3} {}  degree {}", s.to_spins(l), ring.degree(i));
    }

    let torus = Lattice::torus(6, 6)?;
    let counts = transfer_matrix_counts(&torus);
    println!(
        "torus 6x6: {} hard-square configurations, largest column n = {}",
        counts.iter().sum::<u128>(),
        counts.len() - 1
    );
    Ok(())
}
