//! Computes the stationary point of the fluid model for the canonical
//! overloaded instance, together with the standalone overload quantities,
//! the local drifts, and the region classification.

use xmodel::fmt_sig;
use xmodel::ftsp::pi_12;
use xmodel::model::{
    classify_region, derived_quantities, drift_pair, stationary_point, stationary_point_six,
    ModelParams,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = ModelParams::canonical();
    let d = derived_quantities(&p);
    println!("traffic intensities: rho1={} rho2={}", fmt_sig(d.rho1), fmt_sig(d.rho2));
    println!("standalone queues:   qa1={} qa2={}", fmt_sig(d.qa1), fmt_sig(d.qa2));

    let x = stationary_point(&p)?;
    println!(
        "stationary point x*: q1={} q2={} z12={}",
        fmt_sig(x.q1),
        fmt_sig(x.q2),
        fmt_sig(x.z12)
    );

    let (dm, dp) = drift_pair(&x, &p);
    println!(
        "FTSP drifts at x*:   delta_minus={} delta_plus={} region={}",
        fmt_sig(dm),
        fmt_sig(dp),
        classify_region(&x, &p).as_str()
    );
    println!("pi(x*) = P(D > 0) = {}", fmt_sig(pi_12(&x, &p)?));

    let x6 = stationary_point_six(&p)?;
    let cols = ["q1", "q2", "z11", "z12", "z21", "z22"];
    let row: Vec<String> = cols
        .iter()
        .zip(x6.iter())
        .map(|(c, v)| format!("{c}={}", fmt_sig(*v)))
        .collect();
    println!("six-dimensional x*: {}", row.join(" "));
    Ok(())
}
