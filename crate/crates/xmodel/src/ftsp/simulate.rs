//! Direct event-by-event simulation of the FTSP lattice chain.

use super::FtspRates;
use crate::model::{FluidState, ModelParams};
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

/// Right-continuous piecewise-constant sample path on the lattice.
#[derive(Debug, Clone)]
pub struct FtspPath {
    /// Event times, starting with 0.0.
    pub times: Vec<f64>,
    /// Lattice value holding from the corresponding time on.
    pub values: Vec<i64>,
    pub horizon: f64,
}

impl FtspPath {
    pub fn value_at(&self, t: f64) -> i64 {
        match self.times.partition_point(|&s| s <= t) {
            0 => self.values[0],
            i => self.values[i - 1],
        }
    }

    /// Fraction of [0, horizon] the path spends strictly above zero.
    pub fn occupancy_positive(&self) -> f64 {
        let mut above = 0.0;
        for i in 0..self.times.len() {
            let end = if i + 1 < self.times.len() {
                self.times[i + 1].min(self.horizon)
            } else {
                self.horizon
            };
            if self.values[i] > 0 && end > self.times[i] {
                above += end - self.times[i];
            }
        }
        above / self.horizon
    }
}

/// Simulates the FTSP frozen at gamma from lattice value d0 up to the
/// horizon, drawing exponential holding times from a seeded generator.
pub fn simulate_ftsp(
    gamma: &FluidState,
    p: &ModelParams,
    d0: i64,
    horizon: f64,
    seed: u64,
) -> FtspPath {
    let rates = FtspRates::at(gamma, p);
    let j = i64::from(p.r12.num());
    let k = i64::from(p.r12.den());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut times = vec![0.0];
    let mut values = vec![d0];
    let mut t = 0.0;
    let mut v = d0;
    loop {
        let (r_lam1, r_lamr, r_mu1, r_mur) = if v > 0 {
            (
                rates.lam1_plus,
                rates.lam_r_plus,
                rates.mu1_plus,
                rates.mu_r_plus,
            )
        } else {
            (
                rates.lam1_minus,
                rates.lam_r_minus,
                rates.mu1_minus,
                rates.mu_r_minus,
            )
        };
        let total = r_lam1 + r_lamr + r_mu1 + r_mur;
        if total <= 0.0 {
            break;
        }
        // 1 - U lies in (0, 1], keeping the logarithm finite.
        t += -(1.0 - rng.gen::<f64>()).ln() / total;
        if t >= horizon {
            break;
        }
        let pick = rng.gen::<f64>() * total;
        v += if pick < r_lam1 {
            k
        } else if pick < r_lam1 + r_lamr {
            j
        } else if pick < r_lam1 + r_lamr + r_mu1 {
            -k
        } else {
            -j
        };
        times.push(t);
        values.push(v);
    }
    FtspPath {
        times,
        values,
        horizon,
    }
}
