//! Brute-force stationary solve of the FTSP on a truncated lattice.
//!
//! Independent of the matrix-geometric machinery: builds the full dense
//! generator of the lattice chain on [-half_width, half_width] (jumps that
//! would exit are clamped to the boundary) and solves nu Q = 0 directly.
//! Intended as a cross-check oracle for tests, not for production use.

use super::{FtspDistribution, FtspRates};
use crate::error::QbdError;
use crate::model::{FluidState, ModelParams};
use nalgebra::{DMatrix, DVector};

pub fn truncated_generator_distribution(
    gamma: &FluidState,
    p: &ModelParams,
    half_width: i64,
) -> Result<FtspDistribution, QbdError> {
    let rates = FtspRates::at(gamma, p);
    let j = i64::from(p.r12.num());
    let k = i64::from(p.r12.den());
    let size = (2 * half_width + 1) as usize;
    let idx = |v: i64| (v + half_width) as usize;

    let mut q = DMatrix::zeros(size, size);
    for v in -half_width..=half_width {
        let moves: [(i64, f64); 4] = if v > 0 {
            [
                (k, rates.lam1_plus),
                (j, rates.lam_r_plus),
                (-k, rates.mu1_plus),
                (-j, rates.mu_r_plus),
            ]
        } else {
            [
                (k, rates.lam1_minus),
                (j, rates.lam_r_minus),
                (-k, rates.mu1_minus),
                (-j, rates.mu_r_minus),
            ]
        };
        for (d, rate) in moves {
            if rate == 0.0 {
                continue;
            }
            let target = (v + d).clamp(-half_width, half_width);
            if target != v {
                q[(idx(v), idx(target))] += rate;
                q[(idx(v), idx(v))] -= rate;
            }
        }
    }

    // nu Q = 0 with sum(nu) = 1: replace one balance equation (they are
    // linearly dependent) by the normalization and solve by LU.
    let mut sys = q.transpose();
    for col in 0..size {
        sys[(0, col)] = 1.0;
    }
    let mut rhs = DVector::zeros(size);
    rhs[0] = 1.0;
    let nu = sys
        .lu()
        .solve(&rhs)
        .ok_or(QbdError::SingularBoundary { residual: f64::NAN })?;

    let support: Vec<i64> = (-half_width..=half_width).collect();
    let mass: Vec<f64> = nu.iter().copied().collect();
    let atom_at_zero = mass[idx(0)];
    Ok(FtspDistribution {
        support,
        mass,
        k: p.r12.den(),
        atom_at_zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::stationary_point;
    use approx::assert_abs_diff_eq;

    #[test]
    fn oracle_mass_is_a_probability_vector() {
        let p = ModelParams::canonical();
        let x = stationary_point(&p).unwrap();
        let dist = truncated_generator_distribution(&x, &p, 300).unwrap();
        assert_abs_diff_eq!(dist.total_mass(), 1.0, epsilon = 1e-10);
        assert!(dist.mass.iter().all(|&m| m >= -1e-14));
    }

    #[test]
    fn oracle_pi_matches_known_value() {
        let p = ModelParams::canonical();
        let x = stationary_point(&p).unwrap();
        let dist = truncated_generator_distribution(&x, &p, 300).unwrap();
        assert_abs_diff_eq!(dist.positive_mass(), 0.18604651162790695, epsilon = 1e-9);
    }
}
