//! The fast-time-scale process (FTSP): the pure-jump Markov process that
//! governs the queue difference D = q1 - r q2 at the fast time scale, its
//! QBD representation, the matrix-geometric stationary solver, and direct
//! event-by-event simulation.
//!
//! With r = j/k rational, multiplying the difference by k turns the FTSP
//! into an integer-lattice chain with jumps {+j, +k, -j, -k} and rates
//! that depend only on the sign of the current value. All lattice values
//! in this module are in units of 1/k of the original difference scale.

mod oracle;
mod qbd;
mod simulate;

pub use oracle::truncated_generator_distribution;
pub use qbd::{build_qbd, qbd_positive_recurrent, solve_rate_matrix, QbdBlocks, QbdSolution};
pub use simulate::{simulate_ftsp, FtspPath};

use crate::error::QbdError;
use crate::model::{classify_region, FluidState, ModelParams, Region, ScaledInstance};
use crate::sim::SystemState;

/// The eight transition rates of the FTSP at a fixed fluid state: jumps of
/// +1, +r, -1, -r on the nonpositive (minus) and positive (plus) sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtspRates {
    pub lam1_minus: f64,
    pub lam_r_minus: f64,
    pub mu1_minus: f64,
    pub mu_r_minus: f64,
    pub lam1_plus: f64,
    pub lam_r_plus: f64,
    pub mu1_plus: f64,
    pub mu_r_plus: f64,
}

impl FtspRates {
    /// Evaluates the rates at gamma:
    /// on D <= 0: lam1 = lambda1, lamR = mu12 z12 + mu22 (m2 - z12) + theta2 q2,
    ///            mu1 = mu11 m1 + theta1 q1, muR = lambda2;
    /// on D > 0:  lam1 = lambda1, lamR = theta2 q2,
    ///            mu1 = mu11 m1 + mu12 z12 + mu22 (m2 - z12) + theta1 q1,
    ///            muR = lambda2.
    pub fn at(gamma: &FluidState, p: &ModelParams) -> Self {
        let service = p.mu12 * gamma.z12 + p.mu22 * (p.m2 - gamma.z12);
        FtspRates {
            lam1_minus: p.lambda1,
            lam_r_minus: service + p.theta2 * gamma.q2,
            mu1_minus: p.mu11 * p.m1 + p.theta1 * gamma.q1,
            mu_r_minus: p.lambda2,
            lam1_plus: p.lambda1,
            lam_r_plus: p.theta2 * gamma.q2,
            mu1_plus: p.mu11 * p.m1 + service + p.theta1 * gamma.q1,
            mu_r_plus: p.lambda2,
        }
    }

    pub fn total_minus(&self) -> f64 {
        self.lam1_minus + self.lam_r_minus + self.mu1_minus + self.mu_r_minus
    }

    pub fn total_plus(&self) -> f64 {
        self.lam1_plus + self.lam_r_plus + self.mu1_plus + self.mu_r_plus
    }

    /// Scales all eight rates by a common factor (time rescaling).
    pub fn scaled(&self, c: f64) -> Self {
        FtspRates {
            lam1_minus: c * self.lam1_minus,
            lam_r_minus: c * self.lam_r_minus,
            mu1_minus: c * self.mu1_minus,
            mu_r_minus: c * self.mu_r_minus,
            lam1_plus: c * self.lam1_plus,
            lam_r_plus: c * self.lam_r_plus,
            mu1_plus: c * self.mu1_plus,
            mu_r_plus: c * self.mu_r_plus,
        }
    }
}

/// The FTSP stationary distribution on the integer lattice (units of 1/k),
/// truncated where the cumulative tail drops below `tail_epsilon`.
#[derive(Debug, Clone)]
pub struct FtspDistribution {
    /// Lattice values, sorted ascending.
    pub support: Vec<i64>,
    /// Probability mass per value, aligned with `support`.
    pub mass: Vec<f64>,
    /// Ratio denominator: divide lattice values by k for difference units.
    pub k: u32,
    /// Mass of the atom at value 0. P(D >= 0) differs from P(D > 0) by
    /// exactly this amount.
    pub atom_at_zero: f64,
}

impl FtspDistribution {
    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn positive_mass(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.mass)
            .filter(|(v, _)| **v > 0)
            .map(|(_, m)| m)
            .sum()
    }

    /// Writes the distribution as two-column CSV (value, mass), with the
    /// value expressed in difference units (lattice / k).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,mass\n");
        for (v, m) in self.support.iter().zip(&self.mass) {
            out.push_str(&format!(
                "{},{}\n",
                crate::fmt_sig(*v as f64 / f64::from(self.k)),
                crate::fmt_sig(*m)
            ));
        }
        out
    }
}

/// Solver tolerance defaults from the crate-wide contract.
pub const QBD_TOL: f64 = 1e-13;
pub const QBD_MAX_ITER: u64 = 1_000_000;
pub const TAIL_EPSILON: f64 = 1e-10;

/// Stationary probability that the FTSP is strictly positive.
///
/// Dispatches on the region of gamma: 1 on S+ and A+, 0 on S- and A-, and
/// the QBD stationary mass on positive lattice values on A.
pub fn pi_12(gamma: &FluidState, p: &ModelParams) -> Result<f64, QbdError> {
    PiSolver::new(p).pi_12(gamma)
}

/// Stateful pi solver that warm-starts the rate-matrix iteration from the
/// previous solve, for tight loops over nearby states (ODE integration).
pub struct PiSolver {
    params: ModelParams,
    warm: Option<nalgebra::DMatrix<f64>>,
    pub tol: f64,
    pub max_iter: u64,
}

impl PiSolver {
    pub fn new(p: &ModelParams) -> Self {
        PiSolver {
            params: *p,
            warm: None,
            tol: QBD_TOL,
            max_iter: QBD_MAX_ITER,
        }
    }

    pub fn pi_12(&mut self, gamma: &FluidState) -> Result<f64, QbdError> {
        match classify_region(gamma, &self.params) {
            Region::SPlus | Region::BoundaryAPlus => Ok(1.0),
            Region::SMinus | Region::BoundaryAMinus => Ok(0.0),
            Region::BoundaryA => {
                let blocks = build_qbd(gamma, &self.params);
                let sol = solve_rate_matrix(&blocks, self.tol, self.max_iter, self.warm.take())?;
                let pi = sol
                    .pi_positive
                    .ok_or(QbdError::NotPositiveRecurrent { region: "A" })?;
                self.warm = Some(sol.rate_matrix);
                Ok(pi)
            }
        }
    }
}

/// Full stationary distribution at a positive recurrent state, expanded
/// level by level from alpha_n = alpha0 R^n until the remaining tail is
/// below `tail_epsilon`.
pub fn ftsp_stationary_distribution(
    gamma: &FluidState,
    p: &ModelParams,
    tail_epsilon: f64,
) -> Result<FtspDistribution, QbdError> {
    let region = classify_region(gamma, p);
    if region != Region::BoundaryA {
        return Err(QbdError::NotPositiveRecurrent {
            region: region.as_str(),
        });
    }
    let blocks = build_qbd(gamma, p);
    let sol = solve_rate_matrix(&blocks, QBD_TOL, QBD_MAX_ITER, None)?;
    sol.expand_distribution(&blocks, tail_epsilon)
}

/// View of a frozen queue-difference process as an FTSP instance.
///
/// The frozen process at system state Gamma of the n-th instance equals in
/// law the FTSP with parameters (lambda^n/n, m^n/n), state Gamma/n, and
/// time multiplied by n.
#[derive(Debug, Clone)]
pub struct FrozenView {
    /// Fluid parameters of the identified FTSP: arrival rates lambda^n/n
    /// and staffing m^n/n, everything else unchanged.
    pub params: ModelParams,
    /// gamma_n = Gamma / n.
    pub gamma: FluidState,
    /// Time-compression factor: FTSP time runs n times faster.
    pub time_factor: f64,
}

/// Identifies the frozen queue-difference process at state Gamma with an
/// FTSP at gamma_n = Gamma/n under parameters (lambda^n/n, m^n/n) and time
/// scaled by n.
pub fn frozen_as_ftsp(inst: &ScaledInstance, state: &SystemState) -> FrozenView {
    let n = inst.n as f64;
    let mut params = inst.params;
    params.lambda1 = inst.lambda1_n as f64 / n;
    params.lambda2 = inst.lambda2_n as f64 / n;
    params.m1 = inst.m1_n as f64 / n;
    params.m2 = inst.m2_n as f64 / n;
    FrozenView {
        params,
        gamma: FluidState::new(
            state.q1 as f64 / n,
            state.q2 as f64 / n,
            state.z12 as f64 / n,
        ),
        time_factor: n,
    }
}

/// Drift rates of the frozen queue-difference process at state Gamma, on
/// the original (unscaled) time scale. These are n times the FTSP drifts
/// at Gamma/n under the frozen parameters.
pub fn frozen_drifts(inst: &ScaledInstance, state: &SystemState) -> (f64, f64) {
    let p = &inst.params;
    let r = p.r();
    let lam1 = inst.lambda1_n as f64;
    let lam2 = inst.lambda2_n as f64;
    let m1 = inst.m1_n as f64;
    let m2 = inst.m2_n as f64;
    let z12 = state.z12 as f64;
    let q1 = state.q1 as f64;
    let q2 = state.q2 as f64;
    let delta_plus = (lam1 - p.mu11 * m1 + (p.mu22 - p.mu12) * z12 - p.mu22 * m2 - p.theta1 * q1)
        - r * (lam2 - p.theta2 * q2);
    let delta_minus = (lam1 - p.mu11 * m1 - p.theta1 * q1)
        - r * (lam2 + (p.mu22 - p.mu12) * z12 - p.mu22 * m2 - p.theta2 * q2);
    (delta_minus, delta_plus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{drift_pair, scaled_instance, stationary_point};
    use approx::assert_abs_diff_eq;

    #[test]
    fn rates_at_canonical_stationary_point() {
        let p = ModelParams::canonical();
        let x = stationary_point(&p).unwrap();
        let r = FtspRates::at(&x, &p);
        assert_abs_diff_eq!(r.lam_r_minus, 1.0777777777777777, epsilon = 1e-12);
        assert_abs_diff_eq!(r.lam1_minus, p.lambda1, epsilon = 1e-15);
        assert_abs_diff_eq!(r.mu_r_minus, p.lambda2, epsilon = 1e-15);
        assert_abs_diff_eq!(r.mu_r_plus, p.lambda2, epsilon = 1e-15);
    }

    #[test]
    fn rates_with_pool_two_saturated_by_class_one() {
        let p = ModelParams::canonical();
        let gamma = FluidState::new(0.4, 0.3, p.m2);
        let r = FtspRates::at(&gamma, &p);
        assert_abs_diff_eq!(r.lam_r_plus, p.theta2 * gamma.q2, epsilon = 1e-15);
        assert_abs_diff_eq!(
            r.mu1_plus,
            p.mu11 * p.m1 + p.mu12 * p.m2 + p.theta1 * gamma.q1,
            epsilon = 1e-15
        );
    }

    #[test]
    fn rates_at_empty_corner() {
        let p = ModelParams::canonical();
        let gamma = FluidState::new(0.0, 0.0, 0.0);
        let r = FtspRates::at(&gamma, &p);
        assert_abs_diff_eq!(r.lam_r_minus, p.mu22 * p.m2, epsilon = 1e-15);
        assert_abs_diff_eq!(r.mu1_minus, p.mu11 * p.m1, epsilon = 1e-15);
    }

    #[test]
    fn frozen_identity_at_n_equals_one() {
        let p = ModelParams::canonical();
        let inst = scaled_instance(&p, 1).unwrap();
        let state = SystemState {
            q1: 2,
            q2: 1,
            z11: 1,
            z12: 0,
            z21: 0,
            z22: 1,
        };
        let view = frozen_as_ftsp(&inst, &state);
        assert_eq!(view.time_factor, 1.0);
        assert_eq!(view.gamma.q1, 2.0);
    }

    #[test]
    fn frozen_gamma_converges_to_x_star() {
        let p = ModelParams::canonical();
        let x = stationary_point(&p).unwrap();
        for n in [100u64, 1000, 10000] {
            let inst = scaled_instance(&p, n).unwrap();
            let nf = n as f64;
            let state = SystemState {
                q1: (nf * x.q1).round() as u64,
                q2: (nf * x.q2).round() as u64,
                z11: inst.m1_n,
                z12: (nf * x.z12).round() as u64,
                z21: 0,
                z22: inst.m2_n - (nf * x.z12).round() as u64,
            };
            let view = frozen_as_ftsp(&inst, &state);
            assert!(view.gamma.l1_distance(&x) <= 1.5 / nf);
        }
    }

    #[test]
    fn frozen_drift_signs_match_ftsp_drifts() {
        // The frozen drifts differ from the FTSP drifts at Gamma/n under
        // the frozen parameters by exactly the factor n.
        let p = ModelParams::canonical();
        let inst = scaled_instance(&p, 200).unwrap();
        for state in [
            SystemState {
                q1: 50,
                q2: 48,
                z11: 200,
                z12: 44,
                z21: 0,
                z22: 156,
            },
            SystemState {
                q1: 120,
                q2: 10,
                z11: 200,
                z12: 0,
                z21: 0,
                z22: 200,
            },
        ] {
            let (dm_frozen, dp_frozen) = frozen_drifts(&inst, &state);
            let view = frozen_as_ftsp(&inst, &state);
            let (dm, dp) = drift_pair(&view.gamma, &view.params);
            let n = inst.n as f64;
            assert_abs_diff_eq!(dm_frozen, n * dm, epsilon = 1e-7 * n);
            assert_abs_diff_eq!(dp_frozen, n * dp, epsilon = 1e-7 * n);
        }
    }
}
