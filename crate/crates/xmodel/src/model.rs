//! Model parameters, the fluid state space, and derived steady-state
//! quantities for the two-class/two-pool X model under FQR-T routing.
//!
//! All quantities here are on the fluid scale: arrival rates and staffing
//! levels are O(1), and the n-th system is obtained from them via
//! [`ScaledInstance`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::ftsp::FtspRates;

/// Exact rational queue-ratio parameter, stored as a reduced pair of
/// positive integers so the QBD lattice construction stays exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    num: u32,
    den: u32,
}

impl Ratio {
    pub fn new(num: u32, den: u32) -> Result<Self, ModelError> {
        if num == 0 || den == 0 {
            return Err(ModelError::InvalidRatio(format!("{num}/{den}")));
        }
        let g = gcd(num, den);
        Ok(Ratio {
            num: num / g,
            den: den / g,
        })
    }

    pub fn num(&self) -> u32 {
        self.num
    }

    pub fn den(&self) -> u32 {
        self.den
    }

    pub fn value(&self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Ratio {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::InvalidRatio(s.to_string());
        match s.split_once('/') {
            Some((n, d)) => {
                let n: u32 = n.trim().parse().map_err(|_| bad())?;
                let d: u32 = d.trim().parse().map_err(|_| bad())?;
                Ratio::new(n, d)
            }
            None => {
                let n: u32 = s.trim().parse().map_err(|_| bad())?;
                Ratio::new(n, 1)
            }
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Fluid-scale parameters of an X-model instance.
///
/// Serializes as a flat TOML table with keys matching the field names;
/// the ratio parameters serialize as strings of the form `"j/k"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub mu11: f64,
    pub mu12: f64,
    pub mu21: f64,
    pub mu22: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub m1: f64,
    pub m2: f64,
    pub r12: Ratio,
    pub r21: Ratio,
    pub kappa12: f64,
    pub kappa21: f64,
}

impl ModelParams {
    /// The canonical configuration used throughout the test suite.
    pub fn canonical() -> Self {
        ModelParams {
            lambda1: 1.3,
            lambda2: 0.9,
            mu11: 1.0,
            mu12: 0.8,
            mu21: 0.8,
            mu22: 1.0,
            theta1: 0.5,
            theta2: 0.5,
            m1: 1.0,
            m2: 1.0,
            r12: Ratio::new(1, 1).unwrap(),
            r21: Ratio::new(1, 1).unwrap(),
            kappa12: 0.1,
            kappa21: 0.1,
        }
    }

    /// Checks strict positivity of all rates and staffing, and the ratio
    /// ordering r12 >= r21.
    pub fn validate(&self) -> Result<(), ModelError> {
        let fields = [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("mu11", self.mu11),
            ("mu12", self.mu12),
            ("mu21", self.mu21),
            ("mu22", self.mu22),
            ("theta1", self.theta1),
            ("theta2", self.theta2),
            ("m1", self.m1),
            ("m2", self.m2),
            ("kappa12", self.kappa12),
            ("kappa21", self.kappa21),
        ];
        for (name, v) in fields {
            if v <= 0.0 || !v.is_finite() {
                return Err(ModelError::NonPositive(name));
            }
        }
        if self.r12.value() < self.r21.value() {
            return Err(ModelError::RatioOrder);
        }
        Ok(())
    }

    pub fn r(&self) -> f64 {
        self.r12.value()
    }
}

/// A point gamma = (q1, q2, z12) in the fluid state space
/// S = [0, inf)^2 x [0, m2].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidState {
    pub q1: f64,
    pub q2: f64,
    pub z12: f64,
}

impl FluidState {
    pub fn new(q1: f64, q2: f64, z12: f64) -> Self {
        FluidState { q1, q2, z12 }
    }

    pub fn in_space(&self, p: &ModelParams) -> bool {
        self.q1 >= 0.0 && self.q2 >= 0.0 && self.z12 >= 0.0 && self.z12 <= p.m2
    }

    /// Componentwise projection onto the state space.
    pub fn project(&self, p: &ModelParams) -> Self {
        FluidState {
            q1: self.q1.max(0.0),
            q2: self.q2.max(0.0),
            z12: self.z12.clamp(0.0, p.m2),
        }
    }

    pub fn l1_distance(&self, other: &FluidState) -> f64 {
        (self.q1 - other.q1).abs() + (self.q2 - other.q2).abs() + (self.z12 - other.z12).abs()
    }
}

/// Stand-alone traffic intensities, queue lengths, and idleness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedQuantities {
    pub rho1: f64,
    pub rho2: f64,
    pub qa1: f64,
    pub qa2: f64,
    pub sa1: f64,
    pub sa2: f64,
}

/// Stand-alone steady-state quantities of the two classes operating
/// independently: rho_i = lambda_i / (mu_ii m_i),
/// qa_i = (lambda_i - mu_ii m_i)^+ / theta_i, sa_i = (m_i - lambda_i/mu_ii)^+.
pub fn derived_quantities(p: &ModelParams) -> DerivedQuantities {
    let rho1 = p.lambda1 / (p.mu11 * p.m1);
    let rho2 = p.lambda2 / (p.mu22 * p.m2);
    DerivedQuantities {
        rho1,
        rho2,
        qa1: (p.lambda1 - p.mu11 * p.m1).max(0.0) / p.theta1,
        qa2: (p.lambda2 - p.mu22 * p.m2).max(0.0) / p.theta2,
        sa1: (p.m1 - p.lambda1 / p.mu11).max(0.0),
        sa2: (p.m2 - p.lambda2 / p.mu22).max(0.0),
    }
}

/// A named violation of the overload conditions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum OverloadViolation {
    /// theta1 * qa1 <= mu12 * sa2: class 1 not overloaded enough to keep
    /// pool 2 busy after sharing.
    Class1NotOverloaded,
    /// qa1 <= r12 * qa2: class 1 not more overloaded than class 2.
    RatioNotExceeded,
}

impl fmt::Display for OverloadViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OverloadViolation::Class1NotOverloaded => {
                write!(f, "condition (1) violated: theta1*qa1 <= mu12*sa2")
            }
            OverloadViolation::RatioNotExceeded => {
                write!(f, "condition (2) violated: qa1 <= r12*qa2")
            }
        }
    }
}

/// Checks the overload conditions: theta1*qa1 > mu12*sa2 and
/// qa1 > r12*qa2 (both strict). Returns the list of violated conditions;
/// an empty list means the overload regime holds.
pub fn validate_overload(p: &ModelParams) -> Vec<OverloadViolation> {
    let d = derived_quantities(p);
    let mut violations = Vec::new();
    if p.theta1 * d.qa1 <= p.mu12 * d.sa2 {
        violations.push(OverloadViolation::Class1NotOverloaded);
    }
    if d.qa1 <= p.r() * d.qa2 {
        violations.push(OverloadViolation::RatioNotExceeded);
    }
    violations
}

/// Constant drift rates (delta_minus, delta_plus) of the queue-difference
/// process below and above zero:
/// delta_± = r (lamR_± - muR_±) + (lam1_± - mu1_±).
pub fn drift_pair(gamma: &FluidState, p: &ModelParams) -> (f64, f64) {
    let rates = FtspRates::at(gamma, p);
    let r = p.r();
    let delta_minus =
        r * (rates.lam_r_minus - rates.mu_r_minus) + (rates.lam1_minus - rates.mu1_minus);
    let delta_plus = r * (rates.lam_r_plus - rates.mu_r_plus) + (rates.lam1_plus - rates.mu1_plus);
    (delta_minus, delta_plus)
}

/// Subsets of the fluid state space relevant to the queue-difference
/// process: the open half-spaces S+ / S-, and the partition of the
/// boundary {q1 = r q2} by the drift signs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    /// q1 - r q2 > 0.
    SPlus,
    /// q1 - r q2 < 0.
    SMinus,
    /// Boundary, positive recurrent: delta_minus > 0 > delta_plus.
    BoundaryA,
    /// Boundary with delta_plus >= 0.
    BoundaryAPlus,
    /// Boundary with delta_minus <= 0.
    BoundaryAMinus,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::SPlus => "S+",
            Region::SMinus => "S-",
            Region::BoundaryA => "A",
            Region::BoundaryAPlus => "A+",
            Region::BoundaryAMinus => "A-",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classifies gamma by the sign of q1 - r q2 and, on the boundary, by the
/// drift pair. On the boundary delta_plus >= 0 takes precedence over
/// delta_minus <= 0 (the two cannot hold simultaneously since
/// delta_minus > delta_plus for every state).
pub fn classify_region(gamma: &FluidState, p: &ModelParams) -> Region {
    let diff = gamma.q1 - p.r() * gamma.q2;
    if diff > 0.0 {
        Region::SPlus
    } else if diff < 0.0 {
        Region::SMinus
    } else {
        let (delta_minus, delta_plus) = drift_pair(gamma, p);
        if delta_plus >= 0.0 {
            Region::BoundaryAPlus
        } else if delta_minus <= 0.0 {
            Region::BoundaryAMinus
        } else {
            Region::BoundaryA
        }
    }
}

/// The unique stationary point x* of the fluid ODE:
/// z12* = [theta2 (lambda1 - m1 mu11) - r theta1 (lambda2 - m2 mu22)]
///        / (r theta1 mu22 + theta2 mu12),
/// q1*  = (lambda1 - m1 mu11 - mu12 z12*) / theta1,
/// q2*  = (lambda2 - mu22 (m2 - z12*)) / theta2.
///
/// Fails when z12* falls outside [0, m2], i.e. the parameters are outside
/// the overload regime this fixed point describes.
pub fn stationary_point(p: &ModelParams) -> Result<FluidState, ModelError> {
    let r = p.r();
    let z12 = (p.theta2 * (p.lambda1 - p.m1 * p.mu11) - r * p.theta1 * (p.lambda2 - p.m2 * p.mu22))
        / (r * p.theta1 * p.mu22 + p.theta2 * p.mu12);
    if !(0.0..=p.m2).contains(&z12) {
        return Err(ModelError::StationaryPointOutside { z12, m2: p.m2 });
    }
    let q1 = (p.lambda1 - p.m1 * p.mu11 - p.mu12 * z12) / p.theta1;
    let q2 = (p.lambda2 - p.mu22 * (p.m2 - z12)) / p.theta2;
    Ok(FluidState::new(q1, q2, z12))
}

/// The n-th system in the many-server scaling: integer Poisson rates,
/// staffing, and thresholds, plus the fluid parameters they came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaledInstance {
    pub n: u64,
    pub lambda1_n: u64,
    pub lambda2_n: u64,
    pub m1_n: u64,
    pub m2_n: u64,
    pub k12_n: u64,
    pub k21_n: u64,
    pub params: ModelParams,
}

/// Threshold scaling sequence c_n = n^0.6; the exponent sits strictly
/// between 1/2 and 1 so that c_n/sqrt(n) -> inf and c_n/n -> 0.
pub fn threshold_scale(n: u64) -> f64 {
    (n as f64).powf(0.6)
}

fn round_half_up(x: f64) -> u64 {
    (x + 0.5).floor() as u64
}

/// Rounds up to the next positive multiple of `grid`.
fn ceil_to_multiple(v: u64, grid: u64) -> u64 {
    let v = v.max(1);
    v.div_ceil(grid) * grid
}

/// Builds the n-th scaled instance: lambda_i_n = round(n lambda_i),
/// m_j_n = round(n m_j), thresholds round(kappa c_n) rounded up to the
/// ratio denominator's grid so they stay rational with the ratio.
pub fn scaled_instance(p: &ModelParams, n: u64) -> Result<ScaledInstance, ModelError> {
    if n == 0 {
        return Err(ModelError::BadScaleIndex(n));
    }
    let nf = n as f64;
    let m1_n = round_half_up(nf * p.m1);
    let m2_n = round_half_up(nf * p.m2);
    if m1_n == 0 || m2_n == 0 {
        return Err(ModelError::BadScaleIndex(n));
    }
    let c_n = threshold_scale(n);
    Ok(ScaledInstance {
        n,
        lambda1_n: round_half_up(nf * p.lambda1),
        lambda2_n: round_half_up(nf * p.lambda2),
        m1_n,
        m2_n,
        k12_n: ceil_to_multiple(round_half_up(p.kappa12 * c_n), u64::from(p.r12.den())),
        k21_n: ceil_to_multiple(round_half_up(p.kappa21 * c_n), u64::from(p.r21.den())),
        params: *p,
    })
}

/// Six-dimensional stationary point (q1*, q2*, m1, z12*, 0, m2 - z12*).
pub fn stationary_point_six(p: &ModelParams) -> Result<[f64; 6], ModelError> {
    let x = stationary_point(p)?;
    Ok([x.q1, x.q2, p.m1, x.z12, 0.0, p.m2 - x.z12])
}
