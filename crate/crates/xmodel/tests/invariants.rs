//! Property-based invariants: CTMC state validity under arbitrary event
//! sequences, recurrence classification consistency across parameter
//! variations, Lévy metric axioms, and rate-scaling identities.

use proptest::prelude::*;
use xmodel::ftsp::{qbd_positive_recurrent, FtspRates};
use xmodel::levy::{levy_distance, Cdf};
use xmodel::model::{
    classify_region, drift_pair, scaled_instance, stationary_point, FluidState, ModelParams,
    Region,
};
use xmodel::sim::{
    apply_event, event_rates, init_state, queue_difference_lattice, Simulator, EVENTS,
};

fn params_strategy() -> impl Strategy<Value = ModelParams> {
    // Vary rates around the canonical instance while keeping class 1
    // overloaded (lambda1 > mu11 m1), so the model stays in scope.
    (
        1.05f64..1.8,
        0.5f64..1.1,
        0.5f64..1.5,
        0.5f64..1.5,
        0.2f64..1.0,
        0.2f64..1.0,
    )
        .prop_map(|(lambda1, lambda2, mu12, mu22, theta1, theta2)| {
            let mut p = ModelParams::canonical();
            p.lambda1 = lambda1;
            p.lambda2 = lambda2;
            p.mu12 = mu12;
            p.mu22 = mu22;
            p.theta1 = theta1;
            p.theta2 = theta2;
            p
        })
        .prop_filter("valid parameter set", |p| p.validate().is_ok())
}

fn state_strategy() -> impl Strategy<Value = FluidState> {
    (0.0f64..2.0, 0.0f64..2.0, 0.0f64..=1.0)
        .prop_map(|(q1, q2, z12)| FluidState::new(q1, q2, z12))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Any event sequence drawn from the simulator keeps the state legal:
    /// pool capacities respected, sharing in at most one direction, and
    /// the invariant checked by `SystemState::validate`.
    #[test]
    fn simulated_states_stay_legal(seed in any::<u64>(), n in 20u64..200) {
        let p = ModelParams::canonical();
        let inst = scaled_instance(&p, n).unwrap();
        let init = init_state(&inst, n / 2, n / 3, 0).unwrap();
        let mut sim = Simulator::new(&inst, init, seed).unwrap();
        for _ in 0..2000 {
            sim.next_event();
            prop_assert!(sim.state.validate(&inst).is_ok(), "illegal state {:?}", sim.state);
            prop_assert!(sim.state.z12 == 0 || sim.state.z21 == 0, "two-way sharing");
        }
    }

    /// Applying any event with positive rate changes the population by
    /// exactly one customer in the expected direction.
    #[test]
    fn events_move_one_customer(seed in any::<u64>(), steps in 1usize..300) {
        let p = ModelParams::canonical();
        let inst = scaled_instance(&p, 50).unwrap();
        let mut state = init_state(&inst, 25, 15, 0).unwrap();
        let mut pick = seed;
        for _ in 0..steps {
            pick = pick.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let event = EVENTS[(pick >> 33) as usize % 8];
            if event_rates(&state, &inst)[EVENTS.iter().position(|e| *e == event).unwrap()] <= 0.0 {
                continue;
            }
            let next = apply_event(&state, &inst, event);
            let pop = |s: &xmodel::sim::SystemState| {
                s.q1 + s.q2 + s.z11 + s.z12 + s.z21 + s.z22
            };
            let diff = pop(&next) as i64 - pop(&state) as i64;
            prop_assert_eq!(diff.abs(), 1, "event {:?} moved {} customers", event, diff);
            state = next;
        }
    }

    /// The two recurrence criteria for the fast process (sign of the
    /// drifts and the mean-drift condition of the QBD) always agree; the
    /// drift-based region classification matches the boolean answer.
    #[test]
    fn recurrence_tests_agree(p in params_strategy(), gamma in state_strategy()) {
        let gamma = FluidState::new(p.r() * gamma.q2, gamma.q2, gamma.z12 * p.m2);
        let region = classify_region(&gamma, &p);
        let recurrent = qbd_positive_recurrent(&gamma, &p).unwrap();
        prop_assert_eq!(recurrent, region == Region::BoundaryA);
        let (dm, dp) = drift_pair(&gamma, &p);
        prop_assert_eq!(recurrent, dm > 0.0 && dp < 0.0);
    }

    /// FTSP rates scale linearly: multiplying all rate parameters by c
    /// multiplies every transition rate by c, and leaves the drift signs
    /// (hence the region) unchanged.
    #[test]
    fn ftsp_rates_scale_linearly(p in params_strategy(), gamma in state_strategy(), c in 0.1f64..10.0) {
        let gamma = FluidState::new(gamma.q1, gamma.q2, gamma.z12 * p.m2);
        let base = FtspRates::at(&gamma, &p);
        let scaled = base.scaled(c);
        prop_assert!((scaled.total_minus() - c * base.total_minus()).abs() <= 1e-9 * base.total_minus().max(1.0));
        prop_assert!((scaled.total_plus() - c * base.total_plus()).abs() <= 1e-9 * base.total_plus().max(1.0));
    }

    /// Lévy metric axioms on discrete distributions: symmetry, identity,
    /// boundedness by 1, and agreement with the known value for diracs.
    #[test]
    fn levy_metric_axioms(a in -5.0f64..5.0, b in -5.0f64..5.0, masses in proptest::collection::vec((-5.0f64..5.0, 0.01f64..1.0), 1..8)) {
        let tol = 1e-9;
        let total: f64 = masses.iter().map(|(_, m)| m).sum();
        let f = Cdf::from_masses(masses.iter().map(|&(x, m)| (x, m / total)));
        let g = Cdf::dirac(a);
        let h = Cdf::dirac(b);
        prop_assert!((levy_distance(&f, &f, tol)).abs() <= tol);
        let fg = levy_distance(&f, &g, tol);
        let gf = levy_distance(&g, &f, tol);
        prop_assert!((fg - gf).abs() <= 2.0 * tol);
        prop_assert!(fg <= 1.0 + tol);
        // Two point masses: the distance is exactly min(|a - b|, 1).
        let gh = levy_distance(&g, &h, tol);
        prop_assert!((gh - (a - b).abs().min(1.0)).abs() <= 2.0 * tol);
    }
}

#[test]
fn queue_difference_is_exact_on_the_lattice() {
    let p = ModelParams::canonical();
    let inst = scaled_instance(&p, 1000).unwrap();
    let state = init_state(&inst, 700, 300, 100).unwrap();
    let (d12, d21) = queue_difference_lattice(&state, &inst);
    // r12 = r21 = 1 for the canonical instance, so the lattice values are
    // plain integer differences.
    assert_eq!(d12, 700 - i128::from(inst.k12_n) - 300);
    assert_eq!(d21, 300 - i128::from(inst.k21_n) - 700);
}

#[test]
fn stationary_point_is_region_a_for_canonical() {
    let p = ModelParams::canonical();
    let x = stationary_point(&p).unwrap();
    assert_eq!(classify_region(&x, &p), Region::BoundaryA);
}
