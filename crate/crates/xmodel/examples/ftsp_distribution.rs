//! Computes the stationary distribution of the fast-time-scale process at
//! the fluid stationary point three ways: by the matrix-geometric (QBD)
//! solver, by brute-force truncation of the generator, and by long-run
//! occupancy of a direct simulation.

use xmodel::fmt_sig;
use xmodel::ftsp::truncated_generator_distribution;
use xmodel::ftsp::simulate_ftsp;
use xmodel::ftsp::{ftsp_stationary_distribution, pi_12, TAIL_EPSILON};
use xmodel::model::{stationary_point, ModelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = ModelParams::canonical();
    let x = stationary_point(&p)?;

    let dist = ftsp_stationary_distribution(&x, &p, TAIL_EPSILON)?;
    println!(
        "QBD: support [{}, {}], total mass {}, atom at zero {}",
        dist.support.first().unwrap(),
        dist.support.last().unwrap(),
        fmt_sig(dist.total_mass()),
        fmt_sig(dist.atom_at_zero)
    );
    let pi_qbd = pi_12(&x, &p)?;
    let pi_oracle = truncated_generator_distribution(&x, &p, 300)?.positive_mass();
    let occupancy = simulate_ftsp(&x, &p, 0, 200_000.0, 7).occupancy_positive();
    println!("P(D > 0): qbd={}", fmt_sig(pi_qbd));
    println!("P(D > 0): truncated-generator oracle={}", fmt_sig(pi_oracle));
    println!("P(D > 0): simulated occupancy={}", fmt_sig(occupancy));

    println!("head of the distribution (lattice value, mass):");
    for (v, m) in dist.support.iter().zip(dist.mass.iter()) {
        if (-3..=3).contains(v) {
            println!("  {v:>3}  {}", fmt_sig(*m));
        }
    }
    Ok(())
}
