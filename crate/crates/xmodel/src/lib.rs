//! Simulation and fluid analysis of an overloaded X model: two customer
//! classes, two server pools, and threshold-activated one-way sharing
//! (FQR-T routing).
//!
//! The crate has four layers:
//!
//! * [`model`] — parameters, the fluid state space, drift regions, the
//!   stationary point, and the many-server scaling;
//! * [`ftsp`] — the fast-time-scale queue-difference process, its QBD
//!   representation, and the matrix-geometric stationary solver;
//! * [`fluid`] — the fluid ODE driven by the FTSP stationary
//!   distribution, integrated by forward Euler;
//! * [`sim`] — exact event-by-event simulation of the n-th system on
//!   eight shared Poisson streams, including pathwise bounding processes;
//! * [`experiments`] — replicated comparisons between simulation and the
//!   limit objects (law of large numbers, averaging, state-space
//!   collapse, steady state), with [`config`] the TOML front end.

pub mod config;
pub mod error;
pub mod experiments;
pub mod fluid;
pub mod ftsp;
pub mod levy;
pub mod model;
pub mod sim;

/// Formats a float with 12 significant digits, the crate-wide precision
/// for all numeric report and CSV output.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    // Prefer plain notation for moderate magnitudes.
    let mag = x.abs();
    if (1e-4..1e12).contains(&mag) {
        let digits_before = mag.log10().floor() as i32 + 1;
        let decimals = (12 - digits_before).max(0) as usize;
        let plain = format!("{:.*}", decimals, x);
        // Trim trailing zeros but keep at least one digit.
        let trimmed = if plain.contains('.') {
            plain.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            plain
        };
        trimmed
    } else {
        let sci = format!("{:.*e}", 11, x);
        let (mant, exp) = sci.split_once('e').unwrap();
        let mant = mant.trim_end_matches('0').trim_end_matches('.');
        format!("{mant}e{exp}")
    }
}

#[cfg(test)]
mod tests {
    use super::fmt_sig;

    #[test]
    fn fmt_sig_keeps_twelve_significant_digits() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(2.0 / 9.0), "0.222222222222");
        assert_eq!(fmt_sig(1234.5), "1234.5");
        assert_eq!(fmt_sig(-0.35555555555555557), "-0.355555555556");
        assert_eq!(fmt_sig(1e-7), "1e-7");
    }
}
