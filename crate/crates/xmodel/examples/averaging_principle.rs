//! Averaging principle: at a fixed time, the law of the unscaled queue
//! difference D12 matches the stationary law of the fast-time-scale
//! process evaluated at the fluid state for that time.

use xmodel::experiments::ap_check;
use xmodel::fmt_sig;
use xmodel::model::{stationary_point, ModelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = ModelParams::canonical();
    let x_star = stationary_point(&p)?;
    let report = ap_check(&p, 1000, &x_star, 2.0, 2000, 11)?;
    println!(
        "n={} reps={} t_check={}",
        report.n, report.reps, report.t_check
    );
    println!("levy distance (empirical vs limit law): {}", fmt_sig(report.levy));
    println!("P(D > 0): empirical={}", fmt_sig(report.pi_hat));
    println!("P(D > 0): limit={}", fmt_sig(report.pi_limit));
    Ok(())
}
