//! The fluid ODE of the overloaded X model.
//!
//! The right-hand side is driven by pi(x) = P(D > 0), the stationary
//! probability that the FTSP frozen at x is positive:
//!
//!   q1' = lambda1 - m1 mu11 - pi (z12 mu12 + z22 mu22) - theta1 q1
//!   q2' = lambda2 - (1 - pi)(z22 mu22 + z12 mu12) - theta2 q2
//!   z12' = pi z22 mu22 - (1 - pi) z12 mu12
//!
//! with z22 = m2 - z12. Integration is forward Euler with a fixed step;
//! the QBD solve at each step warm-starts from the previous one, which
//! makes the per-step pi evaluation cheap along a continuous trajectory.

use crate::error::FluidError;
use crate::ftsp::PiSolver;
use crate::model::{classify_region, FluidState, ModelParams, Region};

/// Default Euler step.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Right-hand side of the ODE at x given pi = pi(x).
pub fn ode_rhs(x: &FluidState, p: &ModelParams, pi: f64) -> [f64; 3] {
    let z22 = p.m2 - x.z12;
    let shared_service = x.z12 * p.mu12 + z22 * p.mu22;
    [
        p.lambda1 - p.m1 * p.mu11 - pi * shared_service - p.theta1 * x.q1,
        p.lambda2 - (1.0 - pi) * shared_service - p.theta2 * x.q2,
        pi * z22 * p.mu22 - (1.0 - pi) * x.z12 * p.mu12,
    ]
}

/// One integrated fluid trajectory: states on the uniform time grid,
/// together with the pi value used at each step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<FluidState>,
    pub pi: Vec<f64>,
    pub step: f64,
}

impl Trajectory {
    pub fn last(&self) -> &FluidState {
        self.states.last().expect("trajectory is never empty")
    }

    /// Linear interpolation of the state at time t.
    pub fn at(&self, t: f64) -> FluidState {
        let end = *self.times.last().unwrap();
        let t = t.clamp(0.0, end);
        let i = ((t / self.step) as usize).min(self.states.len() - 1);
        if i + 1 >= self.states.len() {
            return self.states[i];
        }
        let w = (t - self.times[i]) / self.step;
        let (a, b) = (&self.states[i], &self.states[i + 1]);
        FluidState::new(
            a.q1 + w * (b.q1 - a.q1),
            a.q2 + w * (b.q2 - a.q2),
            a.z12 + w * (b.z12 - a.z12),
        )
    }

    /// First time the trajectory enters (and stays in, until the horizon)
    /// the closed l1-ball of radius eps around x.
    pub fn time_to_ball(&self, x: &FluidState, eps: f64) -> Option<f64> {
        let mut entered: Option<f64> = None;
        for (t, s) in self.times.iter().zip(&self.states) {
            if s.l1_distance(x) <= eps {
                entered.get_or_insert(*t);
            } else {
                entered = None;
            }
        }
        entered
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,q1,q2,z12,pi\n");
        for i in 0..self.times.len() {
            let s = &self.states[i];
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                crate::fmt_sig(self.times[i]),
                crate::fmt_sig(s.q1),
                crate::fmt_sig(s.q2),
                crate::fmt_sig(s.z12),
                crate::fmt_sig(self.pi[i]),
            ));
        }
        out
    }
}

/// Integrates the fluid ODE from x0 to the horizon by forward Euler.
///
/// After each step the state is projected back onto the state space
/// (componentwise clamping); a projection larger than the step's own
/// rate bound indicates a misuse of the integrator and is an error.
pub fn integrate(
    x0: &FluidState,
    p: &ModelParams,
    horizon: f64,
    step: f64,
) -> Result<Trajectory, FluidError> {
    let steps = (horizon / step).round() as usize;
    let mut solver = PiSolver::new(p);
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut pis = Vec::with_capacity(steps + 1);

    // Rate bound for the projection sanity check: |rhs| is bounded by
    // the total service + arrival + abandonment rate at any state with
    // queues below their transient bound.
    let rate_bound = p.lambda1
        + p.lambda2
        + p.m1 * p.mu11.max(p.mu21)
        + p.m2 * p.mu12.max(p.mu22)
        + p.theta1 * (x0.q1 + horizon * p.lambda1)
        + p.theta2 * (x0.q2 + horizon * p.lambda2);

    let mut x = x0.project(p);
    for i in 0..=steps {
        let t = i as f64 * step;
        let pi = solver.pi_12(&x)?;
        times.push(t);
        states.push(x);
        pis.push(pi);
        if i == steps {
            break;
        }
        let rhs = ode_rhs(&x, p, pi);
        let raw = FluidState::new(
            x.q1 + step * rhs[0],
            x.q2 + step * rhs[1],
            x.z12 + step * rhs[2],
        );
        let mut projected = raw.project(p);
        let overshoot = raw.l1_distance(&projected);
        let allowed = step * rate_bound;
        if overshoot > allowed {
            return Err(FluidError::StepTooLarge {
                t,
                overshoot,
                allowed,
            });
        }
        // Sliding motion: when the step lands on the other side of the
        // switching boundary q1 = r q2 and the boundary is attracting
        // from both sides (region A), the limit dynamics stay on the
        // boundary. Snap by orthogonal projection onto the line, which
        // removes the O(step) chatter of plain Euler.
        let r = p.r();
        let diff_before = x.q1 - r * x.q2;
        let diff_after = projected.q1 - r * projected.q2;
        if diff_before == 0.0 || diff_after == 0.0 || (diff_before > 0.0) != (diff_after > 0.0) {
            let q2s = ((r * projected.q1 + projected.q2) / (1.0 + r * r)).max(0.0);
            let snapped = FluidState::new(r * q2s, q2s, projected.z12).project(p);
            if classify_region(&snapped, p) == Region::BoundaryA {
                projected = snapped;
            }
        }
        x = projected;
    }

    Ok(Trajectory {
        times,
        states,
        pi: pis,
        step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::stationary_point;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rhs_vanishes_at_the_stationary_point() {
        let p = ModelParams::canonical();
        let x = stationary_point(&p).unwrap();
        let pi = crate::ftsp::pi_12(&x, &p).unwrap();
        let rhs = ode_rhs(&x, &p, pi);
        for v in rhs {
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn trajectory_converges_to_the_stationary_point() {
        let p = ModelParams::canonical();
        let x0 = FluidState::new(0.4, 0.4, 0.0);
        let traj = integrate(&x0, &p, 16.0, 1e-3).unwrap();
        let x_star = stationary_point(&p).unwrap();
        assert!(traj.last().l1_distance(&x_star) < 5e-4);
        let t_hit = traj.time_to_ball(&x_star, 0.01).unwrap();
        assert!(t_hit > 0.0 && t_hit < 16.0);
    }

    #[test]
    fn states_stay_in_the_state_space() {
        let p = ModelParams::canonical();
        let x0 = FluidState::new(1.0, 0.0, 0.9);
        let traj = integrate(&x0, &p, 4.0, 1e-3).unwrap();
        for s in &traj.states {
            assert!(s.in_space(&p), "left the space at {s:?}");
        }
    }

    #[test]
    fn interpolation_matches_grid_points() {
        let p = ModelParams::canonical();
        let x0 = FluidState::new(0.3, 0.1, 0.1);
        let traj = integrate(&x0, &p, 1.0, 1e-3).unwrap();
        let s = traj.at(0.5);
        assert_abs_diff_eq!(s.q1, traj.states[500].q1, epsilon = 1e-12);
        let end = traj.at(5.0); // clamped to the horizon
        assert_eq!(end.q1, traj.last().q1);
    }
}
