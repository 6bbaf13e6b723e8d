//! Integrates the three-dimensional fluid ODE from an out-of-equilibrium
//! start and reports the exponential approach to the stationary point.

use xmodel::fluid::{integrate, DEFAULT_STEP};
use xmodel::fmt_sig;
use xmodel::model::{stationary_point, FluidState, ModelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = ModelParams::canonical();
    let x0 = FluidState::new(0.6, 0.6, 0.0);
    let x_star = stationary_point(&p)?;

    let traj = integrate(&x0, &p, 20.0, DEFAULT_STEP)?;
    println!("t,q1,q2,z12,dist_to_x_star");
    for t in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 12.0, 16.0, 20.0] {
        let x = traj.at(t);
        println!(
            "{t},{},{},{},{}",
            fmt_sig(x.q1),
            fmt_sig(x.q2),
            fmt_sig(x.z12),
            fmt_sig(x.l1_distance(&x_star))
        );
    }
    for eps in [1e-1, 1e-2, 1e-3] {
        match traj.time_to_ball(&x_star, eps) {
            Some(t) => println!("first time within {eps:.0e} of x*: {}", fmt_sig(t)),
            None => println!("never within {eps:.0e} of x* by t=20"),
        }
    }
    Ok(())
}
