//! Time expansion: viewed through a microscope (time divided by n), the
//! queue-difference process of the n-th system converges in law to the
//! fast-time-scale process started from the same difference.

use xmodel::experiments::time_expansion_check;
use xmodel::fmt_sig;
use xmodel::model::{stationary_point, ModelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = ModelParams::canonical();
    let x_star = stationary_point(&p)?;
    let report = time_expansion_check(&p, 1000, &x_star, &[1.0, 2.0, 5.0, 10.0], 2000, 31)?;
    println!("n={} reps={}", report.n, report.reps);
    println!("expanded time s, levy distance between D^n(s/n) and FTSP D(s):");
    for (s, levy) in report.s_values.iter().zip(report.levy_at_s.iter()) {
        println!("  s={s}: {}", fmt_sig(*levy));
    }
    Ok(())
}
