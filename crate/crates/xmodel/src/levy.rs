//! The Lévy metric between distribution functions on the real line:
//!
//!   L(F1, F2) = inf { eps > 0 : F1(x - eps) - eps <= F2(x)
//!                                <= F1(x + eps) + eps for all x }.
//!
//! Convergence in the Lévy metric is equivalent to weak convergence, so
//! this is the right gauge for comparing an empirical law against the
//! FTSP stationary distribution.

/// A right-continuous distribution function given by its jump points;
/// may be defective (total mass below one) when built from a truncated
/// distribution.
#[derive(Debug, Clone)]
pub struct Cdf {
    /// Jump locations, strictly increasing.
    pub points: Vec<f64>,
    /// F(points[i]); nondecreasing.
    pub values: Vec<f64>,
}

impl Cdf {
    /// Builds a CDF from (value, mass) pairs; pairs need not be sorted
    /// and duplicate values are merged.
    pub fn from_masses(pairs: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut sorted: Vec<(f64, f64)> = pairs.into_iter().collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut points = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        let mut cum = 0.0;
        for (x, m) in sorted {
            cum += m;
            if points.last().is_some_and(|&last: &f64| last == x) {
                *values.last_mut().unwrap() = cum;
            } else {
                points.push(x);
                values.push(cum);
            }
        }
        Cdf { points, values }
    }

    /// Empirical CDF of a sample (each point gets mass 1/len).
    pub fn empirical(sample: &[f64]) -> Self {
        let w = 1.0 / sample.len() as f64;
        Cdf::from_masses(sample.iter().map(|&x| (x, w)))
    }

    /// Point mass at x.
    pub fn dirac(x: f64) -> Self {
        Cdf {
            points: vec![x],
            values: vec![1.0],
        }
    }

    /// F(x), right-continuous evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        match self.points.partition_point(|&p| p <= x) {
            0 => 0.0,
            i => self.values[i - 1],
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Checks whether eps satisfies the Lévy sandwich for all x. It suffices
/// to test at the jump points of both functions (and just below them),
/// since both sides are piecewise constant between jumps.
fn levy_ok(f1: &Cdf, f2: &Cdf, eps: f64) -> bool {
    let check = |x: f64| -> bool {
        let lo = f1.eval(x - eps) - eps;
        let hi = f1.eval(x + eps) + eps;
        let v = f2.eval(x);
        lo <= v + 1e-15 && v <= hi + 1e-15
    };
    for &x in f1.points.iter().chain(f2.points.iter()) {
        // At the jump and approaching it from the left.
        if !check(x) || !check(x - eps) || !check(next_below(x)) {
            return false;
        }
    }
    true
}

/// Largest f64 strictly below x (the bit pattern of negative floats runs
/// in the opposite direction, so the two signs need different steps).
fn next_below(x: f64) -> f64 {
    if x == 0.0 {
        -f64::MIN_POSITIVE
    } else if x > 0.0 {
        f64::from_bits(x.to_bits() - 1)
    } else {
        f64::from_bits(x.to_bits() + 1)
    }
}

/// Lévy distance between two distribution functions, to absolute
/// accuracy `tol`, by bisection over eps.
pub fn levy_distance(f1: &Cdf, f2: &Cdf, tol: f64) -> f64 {
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    // The metric is bounded by 1 for proper distributions; widen for
    // defective inputs just in case.
    while !levy_ok(f1, f2, hi) && hi < 4.0 {
        hi *= 2.0;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if levy_ok(f1, f2, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identical_cdfs_are_at_distance_zero() {
        let f = Cdf::from_masses([(0.0, 0.3), (1.0, 0.7)]);
        assert!(levy_distance(&f, &f, 1e-9) < 1e-8);
    }

    #[test]
    fn nearby_point_masses() {
        // L(delta_0, delta_a) = min(a, 1) for a >= 0: the sandwich needs
        // both a horizontal and a vertical slack of a.
        let d0 = Cdf::dirac(0.0);
        let d03 = Cdf::dirac(0.3);
        assert_abs_diff_eq!(levy_distance(&d0, &d03, 1e-9), 0.3, epsilon = 1e-7);
        let d2 = Cdf::dirac(2.0);
        assert_abs_diff_eq!(levy_distance(&d0, &d2, 1e-9), 1.0, epsilon = 1e-7);
    }

    #[test]
    fn metric_is_symmetric() {
        let f = Cdf::from_masses([(-1.0, 0.5), (2.0, 0.5)]);
        let g = Cdf::from_masses([(0.0, 0.25), (0.5, 0.25), (1.0, 0.5)]);
        let a = levy_distance(&f, &g, 1e-9);
        let b = levy_distance(&g, &f, 1e-9);
        assert_abs_diff_eq!(a, b, epsilon = 1e-7);
    }

    #[test]
    fn vertical_gap_dominates_for_same_support() {
        // Between the jumps F = 0.9 and G = 0.5 on a long flat stretch,
        // so horizontal movement does not help: F(x - eps) - eps <= G(x)
        // forces eps >= 0.4.
        let f = Cdf::from_masses([(0.0, 0.9), (5.0, 0.1)]);
        let g = Cdf::from_masses([(0.0, 0.5), (5.0, 0.5)]);
        let d = levy_distance(&f, &g, 1e-9);
        assert_abs_diff_eq!(d, 0.4, epsilon = 1e-6);
    }

    #[test]
    fn empirical_cdf_counts_duplicates() {
        let f = Cdf::empirical(&[1.0, 1.0, 2.0, 3.0]);
        assert_abs_diff_eq!(f.eval(1.0), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(f.eval(2.5), 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(f.eval(0.0), 0.0, epsilon = 1e-12);
    }
}
