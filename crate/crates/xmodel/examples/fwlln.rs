//! Functional weak law of large numbers: the fluid-scaled system converges
//! to the fluid trajectory, so the sup-norm error shrinks as n grows.

use xmodel::experiments::compare_fwlln;
use xmodel::model::{FluidState, ModelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = ModelParams::canonical();
    let x0 = FluidState::new(0.6, 0.6, 0.0);
    let report = compare_fwlln(&p, &[100, 400, 1600], &x0, 8.0, 10, 5)?;
    print!("{}", report.to_csv());
    Ok(())
}
