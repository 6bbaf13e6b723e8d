//! TOML experiment configuration and the dispatch used by the CLI and
//! the runnable examples.

use crate::error::HarnessError;
use crate::experiments;
use crate::fluid;
use crate::ftsp;
use crate::model::{
    classify_region, drift_pair, scaled_instance, stationary_point, stationary_point_six,
    FluidState, ModelParams,
};
use crate::sim;
use serde::Deserialize;
use std::path::Path;

fn fluid_state(x: [f64; 3]) -> FluidState {
    FluidState::new(x[0], x[1], x[2])
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidSection {
    #[serde(default = "default_x0")]
    pub x0: [f64; 3],
    #[serde(default = "default_fluid_horizon")]
    pub horizon: f64,
    #[serde(default = "default_step")]
    pub step: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FtspSection {
    /// Fluid state at which to freeze the FTSP; defaults to the
    /// stationary point of the ODE.
    pub gamma: Option<[f64; 3]>,
    #[serde(default = "default_tail_epsilon")]
    pub tail_epsilon: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    #[serde(default = "default_n")]
    pub n: u64,
    #[serde(default = "default_x0")]
    pub x0: [f64; 3],
    #[serde(default = "default_sim_horizon")]
    pub horizon: f64,
    #[serde(default = "default_dt_sample")]
    pub dt_sample: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FwllnSection {
    #[serde(default = "default_ns")]
    pub ns: Vec<u64>,
    #[serde(default = "default_x0")]
    pub x0: [f64; 3],
    #[serde(default = "default_sim_horizon")]
    pub horizon: f64,
    #[serde(default = "default_reps_small")]
    pub reps: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApSection {
    #[serde(default = "default_n_large")]
    pub n: u64,
    #[serde(default = "default_x0")]
    pub x0: [f64; 3],
    #[serde(default = "default_t_check")]
    pub t_check: f64,
    #[serde(default = "default_reps_large")]
    pub reps: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SscSection {
    #[serde(default = "default_ns")]
    pub ns: Vec<u64>,
    #[serde(default = "default_x0")]
    pub x0: [f64; 3],
    #[serde(default = "default_t0")]
    pub t0: f64,
    #[serde(default = "default_sim_horizon")]
    pub horizon: f64,
    #[serde(default = "default_reps_small")]
    pub reps: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadySection {
    #[serde(default = "default_n")]
    pub n: u64,
    #[serde(default = "default_x0")]
    pub x0: [f64; 3],
    /// Time discarded before averaging; defaults to horizon / 4.
    pub burn_in: Option<f64>,
    #[serde(default = "default_steady_horizon")]
    pub horizon: f64,
    #[serde(default = "default_reps_mid")]
    pub reps: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpandSection {
    #[serde(default = "default_n_large")]
    pub n: u64,
    #[serde(default = "default_x0")]
    pub x0: [f64; 3],
    #[serde(default = "default_s_values")]
    pub s_values: Vec<f64>,
    #[serde(default = "default_reps_large")]
    pub reps: u64,
}

fn default_x0() -> [f64; 3] {
    [0.3, 0.3, 0.2]
}
fn default_fluid_horizon() -> f64 {
    10.0
}
fn default_step() -> f64 {
    fluid::DEFAULT_STEP
}
fn default_tail_epsilon() -> f64 {
    ftsp::TAIL_EPSILON
}
fn default_n() -> u64 {
    100
}
fn default_n_large() -> u64 {
    400
}
fn default_sim_horizon() -> f64 {
    3.0
}
fn default_steady_horizon() -> f64 {
    12.0
}
fn default_dt_sample() -> f64 {
    0.01
}
fn default_ns() -> Vec<u64> {
    vec![25, 100, 400]
}
fn default_t_check() -> f64 {
    2.0
}
fn default_t0() -> f64 {
    1.0
}
fn default_reps_small() -> u64 {
    8
}
fn default_reps_mid() -> u64 {
    16
}
fn default_reps_large() -> u64 {
    200
}
fn default_s_values() -> Vec<f64> {
    vec![1.0, 2.0, 4.0, 8.0]
}

macro_rules! default_section {
    ($t:ty) => {
        impl Default for $t {
            fn default() -> Self {
                toml::from_str("").expect("empty section deserializes via field defaults")
            }
        }
    };
}
default_section!(FluidSection);
default_section!(FtspSection);
default_section!(SimulateSection);
default_section!(FwllnSection);
default_section!(ApSection);
default_section!(SscSection);
default_section!(SteadySection);
default_section!(ExpandSection);

/// Top-level experiment configuration. Unknown keys anywhere are a parse
/// error, so typos in section or field names fail loudly.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "ModelParams::canonical")]
    pub params: ModelParams,
    #[serde(default)]
    pub fluid: FluidSection,
    #[serde(default)]
    pub ftsp: FtspSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub fwlln: FwllnSection,
    #[serde(default)]
    pub ap: ApSection,
    #[serde(default)]
    pub ssc: SscSection,
    #[serde(default)]
    pub steady: SteadySection,
    #[serde(default)]
    pub expand: ExpandSection,
}

impl ExperimentConfig {
    /// Canonical parameters with all experiment defaults.
    pub fn canonical() -> Self {
        ExperimentConfig {
            params: ModelParams::canonical(),
            fluid: Default::default(),
            ftsp: Default::default(),
            simulate: Default::default(),
            fwlln: Default::default(),
            ap: Default::default(),
            ssc: Default::default(),
            steady: Default::default(),
            expand: Default::default(),
        }
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, HarnessError> {
    let cfg: ExperimentConfig =
        toml::from_str(text).map_err(|e| HarnessError::ConfigParse(e.to_string()))?;
    cfg.params.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_config(&text)
}

/// The experiment selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Fluid,
    Stationary,
    FtspPi,
    Simulate,
    Fwlln,
    Ap,
    Ssc,
    Steady,
    Expand,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

fn json_out<T: serde::Serialize>(value: &T) -> Result<String, HarnessError> {
    serde_json::to_string_pretty(value).map_err(|e| HarnessError::ConfigParse(e.to_string()))
}

/// Runs one experiment and renders its report; all randomness derives
/// from `seed`, which is echoed in the output.
pub fn run(
    cmd: Command,
    cfg: &ExperimentConfig,
    seed: u64,
    format: OutputFormat,
) -> Result<String, HarnessError> {
    let p = &cfg.params;
    match cmd {
        Command::Fluid => {
            let s = &cfg.fluid;
            let traj = fluid::integrate(&fluid_state(s.x0), p, s.horizon, s.step)?;
            match format {
                OutputFormat::Csv => Ok(traj.to_csv()),
                OutputFormat::Json => json_out(&serde_json::json!({
                    "horizon": s.horizon,
                    "step": s.step,
                    "times": traj.times,
                    "q1": traj.states.iter().map(|x| x.q1).collect::<Vec<_>>(),
                    "q2": traj.states.iter().map(|x| x.q2).collect::<Vec<_>>(),
                    "z12": traj.states.iter().map(|x| x.z12).collect::<Vec<_>>(),
                    "pi": traj.pi,
                })),
            }
        }
        Command::Stationary => {
            let x = stationary_point(p)?;
            let six = stationary_point_six(p)?;
            let (dm, dp) = drift_pair(&x, p);
            let pi = ftsp::pi_12(&x, p)?;
            match format {
                OutputFormat::Csv => {
                    let mut out = String::from("quantity,value\n");
                    for (name, v) in [
                        ("q1_star", x.q1),
                        ("q2_star", x.q2),
                        ("z12_star", x.z12),
                        ("z11_star", six[2]),
                        ("z21_star", six[4]),
                        ("z22_star", six[5]),
                        ("delta_minus", dm),
                        ("delta_plus", dp),
                        ("pi_star", pi),
                    ] {
                        out.push_str(&format!("{},{}\n", name, crate::fmt_sig(v)));
                    }
                    Ok(out)
                }
                OutputFormat::Json => json_out(&serde_json::json!({
                    "q1_star": x.q1,
                    "q2_star": x.q2,
                    "z12_star": x.z12,
                    "state_six": six,
                    "delta_minus": dm,
                    "delta_plus": dp,
                    "pi_star": pi,
                    "region": classify_region(&x, p).as_str(),
                })),
            }
        }
        Command::FtspPi => {
            let s = &cfg.ftsp;
            let gamma = match s.gamma {
                Some(g) => fluid_state(g),
                None => stationary_point(p)?,
            };
            let pi = ftsp::pi_12(&gamma, p)?;
            let dist = ftsp::ftsp_stationary_distribution(&gamma, p, s.tail_epsilon)?;
            match format {
                OutputFormat::Csv => Ok(format!(
                    "# pi={} atom_at_zero={}\n{}",
                    crate::fmt_sig(pi),
                    crate::fmt_sig(dist.atom_at_zero),
                    dist.to_csv()
                )),
                OutputFormat::Json => json_out(&serde_json::json!({
                    "pi": pi,
                    "atom_at_zero": dist.atom_at_zero,
                    "support": dist.support,
                    "mass": dist.mass,
                    "lattice_denominator": dist.k,
                })),
            }
        }
        Command::Simulate => {
            let s = &cfg.simulate;
            let inst = scaled_instance(p, s.n)?;
            let init = experiments::init_from_fluid(&inst, &fluid_state(s.x0))?;
            let path = sim::simulate(&inst, init, s.horizon, s.dt_sample, seed)?;
            match format {
                OutputFormat::Csv => Ok(format!("# seed={}\n{}", seed, path.to_csv())),
                OutputFormat::Json => json_out(&serde_json::json!({
                    "seed": seed,
                    "n": s.n,
                    "events": path.events,
                    "times": path.times,
                    "states": path.states.iter().map(|st| st.as_array()).collect::<Vec<_>>(),
                })),
            }
        }
        Command::Fwlln => {
            let s = &cfg.fwlln;
            let report =
                experiments::compare_fwlln(p, &s.ns, &fluid_state(s.x0), s.horizon, s.reps, seed)?;
            match format {
                OutputFormat::Csv => Ok(report.to_csv()),
                OutputFormat::Json => json_out(&report),
            }
        }
        Command::Ap => {
            let s = &cfg.ap;
            let report =
                experiments::ap_check(p, s.n, &fluid_state(s.x0), s.t_check, s.reps, seed)?;
            match format {
                OutputFormat::Csv => Ok(report.to_csv()),
                OutputFormat::Json => json_out(&report),
            }
        }
        Command::Ssc => {
            let s = &cfg.ssc;
            let report = experiments::ssc_check(
                p,
                &s.ns,
                &fluid_state(s.x0),
                s.t0,
                s.horizon,
                s.reps,
                seed,
            )?;
            match format {
                OutputFormat::Csv => Ok(report.to_csv()),
                OutputFormat::Json => json_out(&report),
            }
        }
        Command::Steady => {
            let s = &cfg.steady;
            let report = experiments::steady_state_check(
                p,
                s.n,
                &fluid_state(s.x0),
                s.burn_in.unwrap_or(s.horizon / 4.0),
                s.horizon,
                s.reps,
                seed,
            )?;
            match format {
                OutputFormat::Csv => Ok(report.to_csv()),
                OutputFormat::Json => json_out(&report),
            }
        }
        Command::Expand => {
            let s = &cfg.expand;
            let report = experiments::time_expansion_check(
                p,
                s.n,
                &fluid_state(s.x0),
                &s.s_values,
                s.reps,
                seed,
            )?;
            match format {
                OutputFormat::Csv => Ok(report.to_csv()),
                OutputFormat::Json => json_out(&report),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let text = r#"
[params]
lambda1 = 1.3
lambda2 = 0.9
mu11 = 1.0
mu12 = 0.8
mu21 = 0.8
mu22 = 1.0
theta1 = 0.5
theta2 = 0.5
m1 = 1.0
m2 = 1.0
r12 = "1/1"
r21 = "1/1"
kappa12 = 0.1
kappa21 = 0.1
"#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.params, ModelParams::canonical());
        assert_eq!(cfg.fwlln.ns, vec![25, 100, 400]);
        assert_eq!(cfg.ap.t_check, 2.0);
    }

    #[test]
    fn unknown_key_names_itself_in_the_error() {
        let text = r#"
[params]
lambda1 = 1.3
lambda2 = 0.9
mu11 = 1.0
mu12 = 0.8
mu21 = 0.8
mu22 = 1.0
theta1 = 0.5
theta2 = 0.5
m1 = 1.0
m2 = 1.0
r12 = "1/1"
r21 = "1/1"
kappa12 = 0.1
kappa21 = 0.1

[fluid]
horzion = 5.0
"#;
        let err = parse_config(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("config parse error"), "{msg}");
        assert!(msg.contains("horzion"), "{msg}");
    }

    #[test]
    fn stationary_csv_lists_the_fixed_point() {
        let cfg = ExperimentConfig::canonical();
        let out = run(Command::Stationary, &cfg, 1, OutputFormat::Csv).unwrap();
        assert!(out.contains("z12_star,0.222222222222"), "{out}");
        assert!(out.contains("pi_star,0.186046511628"), "{out}");
    }
}
