//! State-space collapse: no sharing in the wrong direction, both pools
//! stay full, and the queues lock onto the ratio r12 so that |Q1 - r Q2|
//! grows slower than any power of n.

use xmodel::experiments::ssc_check;
use xmodel::model::{stationary_point, ModelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = ModelParams::canonical();
    let x_star = stationary_point(&p)?;
    let report = ssc_check(&p, &[200, 600, 2000], &x_star, 1.0, 6.0, 5, 23)?;
    print!("{}", report.to_csv());
    Ok(())
}
