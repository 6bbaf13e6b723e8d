//! Interchange of limits: the long-run time average of the fluid-scaled
//! six-dimensional state approaches the stationary point of the fluid
//! model, so the t -> infinity and n -> infinity limits commute.

use xmodel::experiments::steady_state_check;
use xmodel::fmt_sig;
use xmodel::model::{stationary_point, ModelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = ModelParams::canonical();
    let x_star = stationary_point(&p)?;
    let report = steady_state_check(&p, 500, &x_star, 10.0, 60.0, 4, 29)?;
    let cols = ["q1", "q2", "z11", "z12", "z21", "z22"];
    println!(
        "n={} reps={} window=[{}, {}]",
        report.n, report.reps, report.burn_in, report.horizon
    );
    for (i, c) in cols.iter().enumerate() {
        println!(
            "{c:>4}: time-average={} x*={}",
            fmt_sig(report.mean_state[i]),
            fmt_sig(report.x_star[i])
        );
    }
    println!("l1 error: {}", fmt_sig(report.l1_error));
    Ok(())
}
