//! Exact event-by-event CTMC simulation of the n-th X-model system under
//! FQR-T routing.
//!
//! The system is driven by eight shared unit-rate Poisson streams (two
//! arrival, four service, two abandonment), each consumed at its own
//! integrated instantaneous rate. Sharing the streams makes sample-path
//! comparisons (bounding processes, coupled instances) exact rather than
//! distributional.

use crate::error::SimError;
use crate::model::ScaledInstance;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

/// Integer head-count state of the n-th system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemState {
    pub q1: u64,
    pub q2: u64,
    pub z11: u64,
    pub z12: u64,
    pub z21: u64,
    pub z22: u64,
}

impl SystemState {
    pub fn total(&self) -> u64 {
        self.q1 + self.q2 + self.z11 + self.z12 + self.z21 + self.z22
    }

    pub fn as_array(&self) -> [u64; 6] {
        [self.q1, self.q2, self.z11, self.z12, self.z21, self.z22]
    }

    /// Checks pool capacities, the one-way-sharing invariant
    /// z12 z21 = 0, and the no-idle-with-queue work-conservation rule.
    pub fn validate(&self, inst: &ScaledInstance) -> Result<(), SimError> {
        if self.z11 + self.z21 > inst.m1_n {
            return Err(SimError::IllegalState(format!(
                "pool 1 overfull: {} + {} > {}",
                self.z11, self.z21, inst.m1_n
            )));
        }
        if self.z12 + self.z22 > inst.m2_n {
            return Err(SimError::IllegalState(format!(
                "pool 2 overfull: {} + {} > {}",
                self.z12, self.z22, inst.m2_n
            )));
        }
        if self.z12 > 0 && self.z21 > 0 {
            return Err(SimError::IllegalState(
                "two-way sharing: z12 and z21 both positive".into(),
            ));
        }
        if self.q1 > 0 && self.z11 + self.z21 < inst.m1_n {
            return Err(SimError::IllegalState(
                "class-1 queue nonempty with idle pool-1 servers".into(),
            ));
        }
        if self.q2 > 0 && self.z12 + self.z22 < inst.m2_n {
            return Err(SimError::IllegalState(
                "class-2 queue nonempty with idle pool-2 servers".into(),
            ));
        }
        Ok(())
    }
}

/// Initial state builder used throughout: pool 1 fully busy with its own
/// class, no class-2 spillover, pool 2 split between z12 shared servers
/// and its own class.
pub fn init_state(inst: &ScaledInstance, q1: u64, q2: u64, z12: u64) -> Result<SystemState, SimError> {
    if z12 > inst.m2_n {
        return Err(SimError::IllegalState(format!(
            "z12 = {z12} exceeds pool-2 staffing {}",
            inst.m2_n
        )));
    }
    let state = SystemState {
        q1,
        q2,
        z11: inst.m1_n,
        z12,
        z21: 0,
        z22: inst.m2_n - z12,
    };
    state.validate(inst)?;
    Ok(state)
}

/// Exact queue-difference numerators on the ratio lattice:
/// d12 = k12 (q1 - k12_n) - j12 q2 scaled by the denominator k of r12
/// (likewise d21 with the roles swapped). Positive numerator means the
/// threshold is strictly exceeded.
pub fn queue_difference_lattice(state: &SystemState, inst: &ScaledInstance) -> (i128, i128) {
    let p = &inst.params;
    let (j12, k12) = (i128::from(p.r12.num()), i128::from(p.r12.den()));
    let (j21, k21) = (i128::from(p.r21.num()), i128::from(p.r21.den()));
    let d12 = k12 * (i128::from(state.q1) - i128::from(inst.k12_n)) - j12 * i128::from(state.q2);
    let d21 = k21 * (i128::from(state.q2) - i128::from(inst.k21_n)) - j21 * i128::from(state.q1);
    (d12, d21)
}

/// Queue differences in customer units (floating-point convenience).
pub fn queue_difference(state: &SystemState, inst: &ScaledInstance) -> (f64, f64) {
    let p = &inst.params;
    let (d12, d21) = queue_difference_lattice(state, inst);
    (
        d12 as f64 / f64::from(p.r12.den()),
        d21 as f64 / f64::from(p.r21.den()),
    )
}

/// The eight transition types of the CTMC.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    Arrival1,
    Arrival2,
    /// Pool-1 server finishes a class-1 customer.
    Service11,
    /// Pool-2 server finishes a class-1 customer.
    Service12,
    /// Pool-1 server finishes a class-2 customer.
    Service21,
    /// Pool-2 server finishes a class-2 customer.
    Service22,
    Abandon1,
    Abandon2,
}

pub const EVENTS: [Event; 8] = [
    Event::Arrival1,
    Event::Arrival2,
    Event::Service11,
    Event::Service12,
    Event::Service21,
    Event::Service22,
    Event::Abandon1,
    Event::Abandon2,
];

/// Instantaneous rate of each event type at a state.
pub fn event_rates(state: &SystemState, inst: &ScaledInstance) -> [f64; 8] {
    let p = &inst.params;
    [
        inst.lambda1_n as f64,
        inst.lambda2_n as f64,
        p.mu11 * state.z11 as f64,
        p.mu12 * state.z12 as f64,
        p.mu21 * state.z21 as f64,
        p.mu22 * state.z22 as f64,
        p.theta1 * state.q1 as f64,
        p.theta2 * state.q2 as f64,
    ]
}

/// Whether pool 2 should take the head of queue 1 when a pool-2 server
/// frees: FQR-T activates sharing when D12 > 0 and no class-2 customer
/// is being served in pool 1. D12 > 0 forces q1 > 0 since k12_n >= 1.
fn pool2_takes_class1(state: &SystemState, inst: &ScaledInstance) -> bool {
    let (d12, _) = queue_difference_lattice(state, inst);
    d12 > 0 && state.z21 == 0
}

fn pool1_takes_class2(state: &SystemState, inst: &ScaledInstance) -> bool {
    let (_, d21) = queue_difference_lattice(state, inst);
    d21 > 0 && state.z12 == 0
}

/// Applies one event to the state under FQR-T routing. The caller must
/// only pass events whose rate at `state` is positive.
pub fn apply_event(state: &SystemState, inst: &ScaledInstance, event: Event) -> SystemState {
    let mut s = *state;
    match event {
        Event::Arrival1 => {
            if s.z11 + s.z21 < inst.m1_n {
                s.z11 += 1;
            } else {
                s.q1 += 1;
            }
        }
        Event::Arrival2 => {
            if s.z12 + s.z22 < inst.m2_n {
                s.z22 += 1;
            } else {
                s.q2 += 1;
            }
        }
        Event::Service11 | Event::Service21 => {
            if event == Event::Service11 {
                s.z11 -= 1;
            } else {
                s.z21 -= 1;
            }
            if pool1_takes_class2(&s, inst) {
                s.q2 -= 1;
                s.z21 += 1;
            } else if s.q1 > 0 {
                s.q1 -= 1;
                s.z11 += 1;
            }
        }
        Event::Service12 | Event::Service22 => {
            if event == Event::Service12 {
                s.z12 -= 1;
            } else {
                s.z22 -= 1;
            }
            if pool2_takes_class1(&s, inst) {
                s.q1 -= 1;
                s.z12 += 1;
            } else if s.q2 > 0 {
                s.q2 -= 1;
                s.z22 += 1;
            }
        }
        Event::Abandon1 => s.q1 -= 1,
        Event::Abandon2 => s.q2 -= 1,
    }
    s
}

/// A unit-rate Poisson stream whose full jump sequence is materialized
/// lazily, so the same realization can be consumed sequentially at a
/// state-dependent rate and also counted at a deterministic rate (for
/// pathwise bounding processes).
pub struct UnitPoisson {
    rng: ChaCha8Rng,
    /// Cumulative jump epochs on the unit-rate internal clock.
    jumps: Vec<f64>,
    /// Index of the next unconsumed jump.
    cursor: usize,
    /// Internal clock consumed so far (integrated rate).
    consumed: f64,
}

impl UnitPoisson {
    pub fn new(seed: u64) -> Self {
        UnitPoisson {
            rng: ChaCha8Rng::seed_from_u64(seed),
            jumps: Vec::new(),
            cursor: 0,
            consumed: 0.0,
        }
    }

    fn extend_past(&mut self, target: f64) {
        use rand::Rng;
        let mut last = self.jumps.last().copied().unwrap_or(0.0);
        while last <= target {
            last += -(1.0 - self.rng.gen::<f64>()).ln();
            self.jumps.push(last);
        }
    }

    /// Internal-clock distance to the next jump (always positive).
    fn gap_to_next(&mut self) -> f64 {
        loop {
            if self.cursor < self.jumps.len() {
                let gap = self.jumps[self.cursor] - self.consumed;
                if gap > 0.0 {
                    return gap;
                }
                self.cursor += 1;
            } else {
                self.extend_past(self.consumed);
            }
        }
    }

    fn advance(&mut self, amount: f64) {
        self.consumed += amount;
    }

    fn fire(&mut self) {
        let _ = self.gap_to_next();
        self.consumed = self.jumps[self.cursor];
        self.cursor += 1;
    }

    /// Number of jumps with epoch <= `target` on the internal clock.
    pub fn count_up_to(&mut self, target: f64) -> u64 {
        self.extend_past(target);
        self.jumps.partition_point(|&e| e <= target) as u64
    }
}

/// The event engine: current state, clock, and the eight shared streams.
pub struct Simulator {
    pub inst: ScaledInstance,
    pub state: SystemState,
    pub t: f64,
    pub events: u64,
    streams: [UnitPoisson; 8],
}

/// Deterministic per-stream seed derivation from a master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    // SplitMix64 step on master + index: decorrelates nearby seeds.
    let mut z = master
        .wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Simulator {
    pub fn new(inst: &ScaledInstance, init: SystemState, seed: u64) -> Result<Self, SimError> {
        init.validate(inst)?;
        let streams = core::array::from_fn(|i| UnitPoisson::new(derive_seed(seed, i as u64)));
        Ok(Simulator {
            inst: inst.clone(),
            state: init,
            t: 0.0,
            events: 0,
            streams,
        })
    }

    /// Advances to the next event and applies it; returns the event time
    /// and type. The chain is irreducible with positive arrival rates, so
    /// some stream always has positive rate.
    pub fn next_event(&mut self) -> (f64, Event) {
        let rates = event_rates(&self.state, &self.inst);
        let mut best = f64::INFINITY;
        let mut winner = 0usize;
        let mut gaps = [0.0f64; 8];
        for i in 0..8 {
            if rates[i] > 0.0 {
                gaps[i] = self.streams[i].gap_to_next();
                let dt = gaps[i] / rates[i];
                if dt < best {
                    best = dt;
                    winner = i;
                }
            }
        }
        debug_assert!(best.is_finite(), "no active stream");
        for (i, stream) in self.streams.iter_mut().enumerate() {
            if rates[i] > 0.0 && i != winner {
                stream.advance(rates[i] * best);
            }
        }
        self.streams[winner].fire();
        self.t += best;
        self.events += 1;
        let event = EVENTS[winner];
        self.state = apply_event(&self.state, &self.inst, event);
        (self.t, event)
    }

    pub fn stream_clock(&self, index: usize) -> f64 {
        self.streams[index].consumed
    }

    pub fn stream_mut(&mut self, index: usize) -> &mut UnitPoisson {
        &mut self.streams[index]
    }
}

/// Sampled trajectory on a uniform grid.
#[derive(Debug, Clone)]
pub struct SimPath {
    pub n: u64,
    pub times: Vec<f64>,
    pub states: Vec<SystemState>,
    pub events: u64,
    pub event_counts: [u64; 8],
}

impl SimPath {
    /// Fluid-scales the path: every head count divided by n.
    pub fn scaled(&self) -> Vec<[f64; 6]> {
        let n = self.n as f64;
        self.states
            .iter()
            .map(|s| {
                let a = s.as_array();
                [
                    a[0] as f64 / n,
                    a[1] as f64 / n,
                    a[2] as f64 / n,
                    a[3] as f64 / n,
                    a[4] as f64 / n,
                    a[5] as f64 / n,
                ]
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,q1,q2,z11,z12,z21,z22\n");
        for (t, s) in self.times.iter().zip(&self.states) {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                crate::fmt_sig(*t),
                s.q1,
                s.q2,
                s.z11,
                s.z12,
                s.z21,
                s.z22
            ));
        }
        out
    }
}

/// Simulates the n-th system from `init` to `horizon`, sampling the state
/// on a uniform grid of step `dt_sample` (plus the endpoint).
pub fn simulate(
    inst: &ScaledInstance,
    init: SystemState,
    horizon: f64,
    dt_sample: f64,
    seed: u64,
) -> Result<SimPath, SimError> {
    let mut sim = Simulator::new(inst, init, seed)?;
    let grid_times = sample_grid(horizon, dt_sample);
    let mut times = Vec::with_capacity(grid_times.len());
    let mut states = Vec::with_capacity(grid_times.len());
    let mut event_counts = [0u64; 8];
    let mut next_sample = 0usize;

    loop {
        let before = sim.state;
        let (t, event) = sim.next_event();
        while next_sample < grid_times.len() && grid_times[next_sample] < t {
            times.push(grid_times[next_sample]);
            states.push(before);
            next_sample += 1;
        }
        if next_sample >= grid_times.len() {
            break;
        }
        event_counts[EVENTS.iter().position(|e| *e == event).unwrap()] += 1;
    }

    Ok(SimPath {
        n: inst.n,
        times,
        states,
        events: sim.events,
        event_counts,
    })
}

/// Uniform sampling grid: multiples of `dt_sample` below the horizon,
/// plus the horizon itself.
fn sample_grid(horizon: f64, dt_sample: f64) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..)
        .map(|i| i as f64 * dt_sample)
        .take_while(|&ts| ts < horizon)
        .collect();
    grid.push(horizon);
    grid
}

/// Pathwise bounding processes for the shared-stream construction, sampled
/// on a uniform grid together with the bounded quantities.
#[derive(Debug, Clone)]
pub struct BoundsReport {
    pub times: Vec<f64>,
    pub z12: Vec<u64>,
    pub z12_lower: Vec<u64>,
    pub z12_upper: Vec<u64>,
    pub q1: Vec<u64>,
    pub q1_lower: Vec<i64>,
    pub q1_upper: Vec<u64>,
    pub q2: Vec<u64>,
    pub q2_lower: Vec<i64>,
    pub q2_upper: Vec<u64>,
    /// Number of grid points at which any ordering failed. The coupling
    /// is pathwise, so this must be zero.
    pub violations: u64,
}

impl BoundsReport {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("t,z12_lower,z12,z12_upper,q1_lower,q1,q1_upper,q2_lower,q2,q2_upper\n");
        for i in 0..self.times.len() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                crate::fmt_sig(self.times[i]),
                self.z12_lower[i],
                self.z12[i],
                self.z12_upper[i],
                self.q1_lower[i],
                self.q1[i],
                self.q1_upper[i],
                self.q2_lower[i],
                self.q2[i],
                self.q2_upper[i],
            ));
        }
        out
    }
}

/// Runs the simulation together with the classical bounding processes,
/// all driven by the same eight streams:
///
/// * lower bound for Z12: the tagged initial shared customers (pure
///   death at rate mu12 x count, realized by thinning Service12
///   completions);
/// * upper bound for Z12: m2_n minus the initial class-2 customers still
///   in service (pure death at rate mu22 x count, thinned from
///   Service22);
/// * upper bound for Q_i: initial queue plus the raw arrival counts;
/// * lower bound for Q_i: initial queue minus every service stream run
///   at its full-staffing rate minus a dominating abandonment process
///   (true initial-customer abandonments topped up to constant rate
///   theta_i Q_i(0) by an independent stream).
pub fn coupled_bounds(
    inst: &ScaledInstance,
    init: SystemState,
    horizon: f64,
    dt_sample: f64,
    seed: u64,
) -> Result<BoundsReport, SimError> {
    use rand::Rng;

    let p = inst.params;
    let mut sim = Simulator::new(inst, init, seed)?;
    let mut thin_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 100));
    let mut topup1 = UnitPoisson::new(derive_seed(seed, 101));
    let mut topup2 = UnitPoisson::new(derive_seed(seed, 102));

    // Tag counters.
    let mut tagged_z12 = init.z12; // initial shared customers still in service
    let mut initial_z22 = init.z22; // initial class-2 customers still in service
    let mut init_q1 = init.q1; // initial class-1 customers still in queue
    let mut init_q2 = init.q2;
    // Dominating abandonment counts (initial abandons + top-up).
    let mut ab1_dom = 0u64;
    let mut ab2_dom = 0u64;
    let mut arrivals1 = 0u64;
    let mut arrivals2 = 0u64;

    let max_service_rate = |ev: usize| -> f64 {
        match ev {
            2 => p.mu11 * inst.m1_n as f64,
            3 => p.mu12 * inst.m2_n as f64,
            4 => p.mu21 * inst.m1_n as f64,
            5 => p.mu22 * inst.m2_n as f64,
            _ => unreachable!(),
        }
    };

    let grid_times = sample_grid(horizon, dt_sample);
    let mut report = BoundsReport {
        times: Vec::with_capacity(grid_times.len()),
        z12: Vec::new(),
        z12_lower: Vec::new(),
        z12_upper: Vec::new(),
        q1: Vec::new(),
        q1_lower: Vec::new(),
        q1_upper: Vec::new(),
        q2: Vec::new(),
        q2_lower: Vec::new(),
        q2_upper: Vec::new(),
        violations: 0,
    };
    let mut next_sample = 0usize;
    let mut last_t = 0.0f64;

    loop {
        let before = sim.state;
        let (t, event) = sim.next_event();
        let step_end = t.min(horizon);

        // Advance the top-up streams over (last_t, step_end] at their
        // current (piecewise constant) rates.
        let rate1 = p.theta1 * ((init.q1 - init_q1) as f64);
        let rate2 = p.theta2 * ((init.q2 - init_q2) as f64);
        ab1_dom += topup_fired(&mut topup1, rate1 * (step_end - last_t));
        ab2_dom += topup_fired(&mut topup2, rate2 * (step_end - last_t));

        // Emit samples strictly before the event time, using the
        // pre-event state and the bound values at the sample instant.
        while next_sample < grid_times.len() && grid_times[next_sample] < t {
            let ts = grid_times[next_sample];
            next_sample += 1;
            push_sample(
                &mut report,
                ts,
                &before,
                inst,
                &mut sim,
                tagged_z12,
                initial_z22,
                init.q1,
                init.q2,
                arrivals1,
                arrivals2,
                ab1_dom,
                ab2_dom,
                &max_service_rate,
            );
        }
        if next_sample >= grid_times.len() || t >= horizon {
            break;
        }
        last_t = t;

        // Update tags for the event that just fired (the state change is
        // already applied inside the simulator).
        match event {
            Event::Arrival1 => arrivals1 += 1,
            Event::Arrival2 => arrivals2 += 1,
            Event::Service12 => {
                if before.z12 > 0
                    && thin_rng.gen::<f64>() * (before.z12 as f64) < tagged_z12 as f64
                {
                    tagged_z12 -= 1;
                }
                // A class-1 admission from the queue drains initial
                // customers first (FCFS).
                if sim.state.q1 < before.q1 && init_q1 > 0 {
                    init_q1 -= 1;
                }
                if sim.state.q2 < before.q2 && init_q2 > 0 {
                    init_q2 -= 1;
                }
            }
            Event::Service22 => {
                if before.z22 > 0
                    && thin_rng.gen::<f64>() * (before.z22 as f64) < initial_z22 as f64
                {
                    initial_z22 -= 1;
                }
                if sim.state.q1 < before.q1 && init_q1 > 0 {
                    init_q1 -= 1;
                }
                if sim.state.q2 < before.q2 && init_q2 > 0 {
                    init_q2 -= 1;
                }
            }
            Event::Service11 | Event::Service21 => {
                if sim.state.q1 < before.q1 && init_q1 > 0 {
                    init_q1 -= 1;
                }
                if sim.state.q2 < before.q2 && init_q2 > 0 {
                    init_q2 -= 1;
                }
            }
            Event::Abandon1 => {
                if before.q1 > 0 && thin_rng.gen::<f64>() * (before.q1 as f64) < init_q1 as f64 {
                    init_q1 -= 1;
                    ab1_dom += 1;
                }
            }
            Event::Abandon2 => {
                if before.q2 > 0 && thin_rng.gen::<f64>() * (before.q2 as f64) < init_q2 as f64 {
                    init_q2 -= 1;
                    ab2_dom += 1;
                }
            }
        }
    }

    Ok(report)
}

fn topup_fired(stream: &mut UnitPoisson, amount: f64) -> u64 {
    if amount <= 0.0 {
        return 0;
    }
    let before = stream.count_up_to(stream.consumed);
    stream.advance(amount);
    stream.count_up_to(stream.consumed) - before
}

#[allow(clippy::too_many_arguments)]
fn push_sample(
    report: &mut BoundsReport,
    ts: f64,
    state: &SystemState,
    inst: &ScaledInstance,
    sim: &mut Simulator,
    tagged_z12: u64,
    initial_z22: u64,
    q1_0: u64,
    q2_0: u64,
    arrivals1: u64,
    arrivals2: u64,
    ab1_dom: u64,
    ab2_dom: u64,
    max_service_rate: &dyn Fn(usize) -> f64,
) {
    let z12_upper = inst.m2_n - initial_z22;
    let q1_upper = q1_0 + arrivals1;
    let q2_upper = q2_0 + arrivals2;
    // Every service stream counted at full-staffing rate over [0, ts].
    let mut completions = 0u64;
    for ev in 2..=5 {
        completions += sim.stream_mut(ev).count_up_to(max_service_rate(ev) * ts);
    }
    let q1_lower = q1_0 as i64 - completions as i64 - ab1_dom as i64;
    let q2_lower = q2_0 as i64 - completions as i64 - ab2_dom as i64;

    let ok = tagged_z12 <= state.z12
        && state.z12 <= z12_upper
        && q1_lower <= state.q1 as i64
        && state.q1 <= q1_upper
        && q2_lower <= state.q2 as i64
        && state.q2 <= q2_upper;
    if !ok {
        report.violations += 1;
    }
    report.times.push(ts);
    report.z12.push(state.z12);
    report.z12_lower.push(tagged_z12);
    report.z12_upper.push(z12_upper);
    report.q1.push(state.q1);
    report.q1_lower.push(q1_lower);
    report.q1_upper.push(q1_upper);
    report.q2.push(state.q2);
    report.q2_lower.push(q2_lower);
    report.q2_upper.push(q2_upper);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{scaled_instance, ModelParams};

    fn canonical_instance(n: u64) -> ScaledInstance {
        scaled_instance(&ModelParams::canonical(), n).unwrap()
    }

    #[test]
    fn init_builder_fills_pool_one() {
        let inst = canonical_instance(50);
        let s = init_state(&inst, 10, 8, 12).unwrap();
        assert_eq!(s.z11, 50);
        assert_eq!(s.z21, 0);
        assert_eq!(s.z22, 38);
        s.validate(&inst).unwrap();
    }

    #[test]
    fn queue_difference_is_exact_on_the_lattice() {
        let inst = canonical_instance(100);
        // k12_n = 2 at n = 100 for the canonical parameters.
        let s = init_state(&inst, 25, 20, 10).unwrap();
        let (d12, d21) = queue_difference_lattice(&s, &inst);
        assert_eq!(d12, 25 - i128::from(inst.k12_n) - 20);
        assert_eq!(d21, 20 - i128::from(inst.k21_n) - 25);
    }

    #[test]
    fn arrival_takes_idle_server_before_queueing() {
        let inst = canonical_instance(10);
        let mut s = init_state(&inst, 0, 0, 0).unwrap();
        s.z11 = 9; // one idle server in pool 1
        let after = apply_event(&s, &inst, Event::Arrival1);
        assert_eq!(after.z11, 10);
        assert_eq!(after.q1, 0);
        let full = apply_event(&after, &inst, Event::Arrival1);
        assert_eq!(full.q1, 1);
    }

    #[test]
    fn pool_two_completion_pulls_class_one_above_threshold() {
        let inst = canonical_instance(10);
        // k12_n = 1 at n = 10; q1 = 5, q2 = 1 gives d12 = 3 > 0.
        let s = init_state(&inst, 5, 1, 0).unwrap();
        let after = apply_event(&s, &inst, Event::Service22);
        assert_eq!(after.z12, 1);
        assert_eq!(after.q1, 4);
        assert_eq!(after.z22, 9);
        after.validate(&inst).unwrap();
    }

    #[test]
    fn pool_two_completion_below_threshold_serves_own_class() {
        let inst = canonical_instance(10);
        let s = init_state(&inst, 1, 5, 0).unwrap(); // d12 < 0
        let after = apply_event(&s, &inst, Event::Service22);
        assert_eq!(after.z12, 0);
        assert_eq!(after.q2, 4);
        assert_eq!(after.z22, 10);
    }

    #[test]
    fn sharing_stays_one_way() {
        // With z12 > 0 a pool-1 completion must not pull class 2 even if
        // d21 > 0.
        let inst = canonical_instance(10);
        let mut s = init_state(&inst, 0, 8, 3).unwrap();
        s.q1 = 0;
        let after = apply_event(&s, &inst, Event::Service11);
        assert_eq!(after.z21, 0);
        assert_eq!(after.z11, 9); // idles instead (queue 1 empty)
        after.validate(&inst).unwrap();
    }

    #[test]
    fn simulation_preserves_invariants_and_is_deterministic() {
        let inst = canonical_instance(25);
        let init = init_state(&inst, 6, 6, 5).unwrap();
        let a = simulate(&inst, init, 4.0, 0.05, 99).unwrap();
        let b = simulate(&inst, init, 4.0, 0.05, 99).unwrap();
        assert_eq!(a.states, b.states);
        assert!(a.events > 0);
        for s in &a.states {
            s.validate(&inst).unwrap();
        }
        let c = simulate(&inst, init, 4.0, 0.05, 100).unwrap();
        assert_ne!(a.states, c.states);
    }

    #[test]
    fn sampled_grid_covers_horizon() {
        let inst = canonical_instance(25);
        let init = init_state(&inst, 6, 6, 5).unwrap();
        let path = simulate(&inst, init, 2.0, 0.5, 7).unwrap();
        assert_eq!(path.times, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn bounds_hold_pathwise() {
        let inst = canonical_instance(40);
        let init = init_state(&inst, 10, 10, 9).unwrap();
        let report = coupled_bounds(&inst, init, 3.0, 0.01, 314).unwrap();
        assert_eq!(report.violations, 0);
        assert!(report.times.len() > 100);
    }

    #[test]
    fn abandonment_needs_nonempty_queue() {
        let inst = canonical_instance(10);
        let s = init_state(&inst, 0, 0, 0).unwrap();
        let rates = event_rates(&s, &inst);
        assert_eq!(rates[6], 0.0);
        assert_eq!(rates[7], 0.0);
    }
}
