//! Second-order transitions out of one column: loops, reflections and
//! transmissions, counted on the enumerated graph.

use blockade_thermal::dimer::transition_census;
use blockade_thermal::{ConfigSpace, Lattice};

fn main() -> blockade_thermal::Result<()> {
    println!(
        "{:>3} {:>3} {:>6} {:>8} {:>11} {:>13} {:>10} {:>10}",
        "L", "n", "states", "loops", "reflections", "transmissions", "refl/loop", "link prob"
    );
    for l in 10..=20 {
        let space = ConfigSpace::enumerate(Lattice::ring(l)?)?;
        let c = transition_census(&space, (l as f64 / 4.0).round() as usize)?;
        println!(
            "{l:>3} {:>3} {:>6} {:>8} {:>11} {:>13} {:>10.3} {:>10.4}",
            c.n,
            c.states,
            c.loops,
            c.reflections,
            c.transmissions,
            c.reflection_loop_ratio(),
            c.reflection_link_probability()
        );
    }
    Ok(())
}
