//! Simulates one sample path of the n-th system under FQR-T and prints
//! the fluid-scaled state on a coarse grid next to the fluid trajectory.

use xmodel::experiments::init_from_fluid;
use xmodel::fluid::{integrate, DEFAULT_STEP};
use xmodel::fmt_sig;
use xmodel::model::{scaled_instance, FluidState, ModelParams};
use xmodel::sim::simulate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = ModelParams::canonical();
    let n = 500;
    let x0 = FluidState::new(0.6, 0.6, 0.0);
    let inst = scaled_instance(&p, n)?;
    let init = init_from_fluid(&inst, &x0)?;
    println!(
        "n={n}: lambda1_n={} lambda2_n={} m1_n={} m2_n={} k12_n={} k21_n={}",
        inst.lambda1_n, inst.lambda2_n, inst.m1_n, inst.m2_n, inst.k12_n, inst.k21_n
    );

    let path = simulate(&inst, init, 8.0, 1.0, 42)?;
    let traj = integrate(&x0, &p, 8.0, DEFAULT_STEP)?;
    let scaled = path.scaled();
    println!("t,q1/n,q2/n,z12/n,z21/n,fluid_q1,fluid_q2,fluid_z12");
    for (i, t) in path.times.iter().enumerate() {
        let s = scaled[i];
        let x = traj.at(*t);
        println!(
            "{t},{},{},{},{},{},{},{}",
            fmt_sig(s[0]),
            fmt_sig(s[1]),
            fmt_sig(s[3]),
            fmt_sig(s[4]),
            fmt_sig(x.q1),
            fmt_sig(x.q2),
            fmt_sig(x.z12)
        );
    }
    Ok(())
}
