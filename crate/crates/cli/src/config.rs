use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use speclab::dwcore::DampingProfile;
use speclab::thermo::MarkovModel;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid {kind} parameters: {msg}")]
    Parameters { kind: Kind, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Spectrum,
    Thermo,
    Flowavg,
    Arith,
    Trace,
    Count,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Spectrum => "spectrum",
            Kind::Thermo => "thermo",
            Kind::Flowavg => "flowavg",
            Kind::Arith => "arith",
            Kind::Trace => "trace",
            Kind::Count => "count",
        }
    }
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default = "empty_object")]
    pub parameters: Value,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Parses the kind-specific parameters; every schema check happens here.
    pub fn validate(&self) -> Result<Params, ConfigError> {
        let bad = |msg: String| ConfigError::Parameters { kind: self.kind, msg };
        let params = match self.kind {
            Kind::Spectrum => Params::Spectrum(parse(&self.parameters).map_err(bad)?),
            Kind::Thermo => Params::Thermo(parse(&self.parameters).map_err(bad)?),
            Kind::Flowavg => Params::Flowavg(parse(&self.parameters).map_err(bad)?),
            Kind::Arith => Params::Arith(parse(&self.parameters).map_err(bad)?),
            Kind::Trace => Params::Trace(parse(&self.parameters).map_err(bad)?),
            Kind::Count => Params::Count(parse(&self.parameters).map_err(bad)?),
        };
        params.check().map_err(bad)?;
        Ok(params)
    }
}

fn parse<T: DeserializeOwned>(v: &Value) -> Result<T, String> {
    serde_json::from_value(v.clone()).map_err(|e| e.to_string())
}

#[derive(Clone, Debug)]
pub enum Params {
    Spectrum(SpectrumParams),
    Thermo(ThermoParams),
    Flowavg(FlowavgParams),
    Arith(ArithParams),
    Trace(TraceParams),
    Count(CountParams),
}

impl Params {
    fn check(&self) -> Result<(), String> {
        match self {
            Params::Spectrum(p) => {
                p.profile.validate().map_err(|e| e.to_string())?;
                if p.k < p.profile.degree().max(1) {
                    return Err(format!("k = {} is below the profile degree {}", p.k, p.profile.degree()));
                }
                if p.rayleigh_k == Some(0) || p.decay_k == 0 {
                    return Err("rayleigh_k and decay_k must be positive".into());
                }
            }
            Params::Thermo(p) => {
                p.model.build()?;
                if !(p.beta_min < p.beta_max) || p.beta_points < 8 {
                    return Err("need beta_min < beta_max and beta_points ≥ 8".into());
                }
                if let Some(ld) = &p.ld {
                    if ld.t == 0 || !(ld.lo <= ld.hi) || ld.nsamples < 10_000 {
                        return Err("ld needs t ≥ 1, lo ≤ hi and nsamples ≥ 10^4".into());
                    }
                }
            }
            Params::Flowavg(p) => {
                if p.observables.is_empty() {
                    return Err("observables must not be empty".into());
                }
                for name in p.observables.iter().chain(&p.time_change) {
                    observable_known(name)?;
                }
                if !(p.d_minus_1 > 0.0) {
                    return Err(format!("d_minus_1 must be positive, got {}", p.d_minus_1));
                }
                if !(p.t > 0.0 && p.fd_step > 0.0 && p.trajectory_step > 0.0) {
                    return Err("t, fd_step and trajectory_step must be positive".into());
                }
            }
            Params::Arith(p) => p.check()?,
            Params::Trace(p) => {
                p.lengths.check()?;
                if !(p.area > 0.0 && p.sigma > 0.0 && p.t > 0.0 && p.m >= 1.0) {
                    return Err("need area > 0, sigma > 0, t > 0 and m ≥ 1".into());
                }
                if !(p.beta > 0.0 && p.beta <= 1.0) {
                    return Err(format!("beta must lie in (0, 1], got {}", p.beta));
                }
            }
            Params::Count(p) => {
                p.profile.validate().map_err(|e| e.to_string())?;
                if !(p.c > 0.0) || p.alphas.is_empty() {
                    return Err("need c > 0 and at least one alpha".into());
                }
                if p.side != "above" && p.side != "below" {
                    return Err(format!("side must be above or below, got {}", p.side));
                }
                if let Some(h) = p.hbar {
                    if !(h > 0.0) {
                        return Err(format!("hbar must be positive, got {h}"));
                    }
                }
                if !p.ladder_k.is_empty() && p.ladder_k.len() < 4 {
                    return Err("ladder_k needs at least four entries".into());
                }
            }
        }
        Ok(())
    }
}

pub fn observable_known(name: &str) -> Result<(), String> {
    match name {
        "bounded_ratio" | "oscillating" | "positive_oscillating" | "top_left_squared" => Ok(()),
        other => Err(format!("unknown observable {other}")),
    }
}

fn default_profile() -> DampingProfile {
    DampingProfile::cosine(0.5, 0.4)
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    #[serde(default = "default_profile")]
    pub profile: DampingProfile,
    #[serde(default = "default_k")]
    pub k: usize,
    /// Defaults to `K/5`.
    pub weyl_lambda: Option<f64>,
    /// Truncation for the Rayleigh check, which needs eigenvectors; defaults to `min(K, 64)`.
    pub rayleigh_k: Option<usize>,
    /// Runs the energy-decay experiment to this time.
    pub decay_tmax: Option<f64>,
    #[serde(default = "default_decay_k")]
    pub decay_k: usize,
}

fn default_k() -> usize {
    64
}

fn default_decay_k() -> usize {
    32
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ModelSpec {
    Preset(String),
    Custom(Value),
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::Preset("coin".into())
    }
}

impl ModelSpec {
    pub fn build(&self) -> Result<MarkovModel, String> {
        match self {
            ModelSpec::Preset(name) => match name.as_str() {
                "coin" => MarkovModel::full_shift(&[0.0, 1.0]).map_err(|e| e.to_string()),
                "golden_mean" => Ok(MarkovModel::golden_mean()),
                other => Err(format!("unknown model preset {other} (expected coin or golden_mean)")),
            },
            ModelSpec::Custom(v) => MarkovModel::from_json(&v.to_string()).map_err(|e| e.to_string()),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermoParams {
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default = "default_beta_min")]
    pub beta_min: f64,
    #[serde(default = "default_beta_max")]
    pub beta_max: f64,
    #[serde(default = "default_beta_points")]
    pub beta_points: usize,
    pub ld: Option<LdParams>,
}

fn default_beta_min() -> f64 {
    speclab::thermo::DEFAULT_BETA_MIN
}

fn default_beta_max() -> f64 {
    speclab::thermo::DEFAULT_BETA_MAX
}

fn default_beta_points() -> usize {
    speclab::thermo::DEFAULT_BETA_POINTS
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdParams {
    pub t: usize,
    pub lo: f64,
    pub hi: f64,
    #[serde(default = "default_nsamples")]
    pub nsamples: u64,
}

fn default_nsamples() -> u64 {
    1_000_000
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowavgParams {
    #[serde(default = "default_point")]
    pub point: [[f64; 2]; 2],
    #[serde(default = "default_observables")]
    pub observables: Vec<String>,
    #[serde(default = "default_flow_t")]
    pub t: f64,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    #[serde(default = "default_trajectory_step")]
    pub trajectory_step: f64,
    /// Positive observable `φ` driving a time change; adds the variable-speed identity.
    pub time_change: Option<String>,
    #[serde(default = "default_d_minus_1")]
    pub d_minus_1: f64,
}

fn default_d_minus_1() -> f64 {
    1.0
}

fn default_point() -> [[f64; 2]; 2] {
    [[0.8, 0.9], [-0.3, 0.9]]
}

fn default_observables() -> Vec<String> {
    ["bounded_ratio", "oscillating", "positive_oscillating"].map(String::from).to_vec()
}

fn default_flow_t() -> f64 {
    8.0
}

fn default_fd_step() -> f64 {
    1e-4
}

fn default_trajectory_step() -> f64 {
    0.05
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    #[serde(default = "default_a")]
    pub a: i64,
    #[serde(default = "default_p")]
    pub p: i64,
    #[serde(default = "default_m_max")]
    pub m_max: i64,
    #[serde(rename = "box", default = "default_box")]
    pub bx: i64,
    /// Synthetic stable norm; zero-form weights when absent.
    pub synthetic_norm: Option<f64>,
    /// Length-spectrum cache file, reused when its parameters match.
    pub cache: Option<PathBuf>,
}

impl Default for GroupSpec {
    fn default() -> Self {
        Self {
            a: default_a(),
            p: default_p(),
            m_max: default_m_max(),
            bx: default_box(),
            synthetic_norm: None,
            cache: None,
        }
    }
}

impl GroupSpec {
    fn check(&self) -> Result<(), String> {
        speclab::arith::GroupParams::new(self.a, self.p).map_err(|e| e.to_string())?;
        if self.m_max < 2 || self.bx < 1 {
            return Err("need m_max ≥ 2 and box ≥ 1".into());
        }
        Ok(())
    }
}

fn default_a() -> i64 {
    2
}

fn default_p() -> i64 {
    5
}

fn default_m_max() -> i64 {
    12
}

fn default_box() -> i64 {
    12
}

pub type ArithParams = GroupSpec;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceParams {
    #[serde(default)]
    pub lengths: GroupSpec,
    /// Area of the quotient surface, entering the Plancherel term as `Area/(4π)`.
    pub area: f64,
    #[serde(default = "default_trace_t")]
    pub t: f64,
    #[serde(default = "default_trace_m")]
    pub m: f64,
    #[serde(default = "default_max_lengths")]
    pub max_lengths: usize,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_moment_t")]
    pub moment_t: Vec<f64>,
}

fn default_trace_t() -> f64 {
    3.0
}

fn default_trace_m() -> f64 {
    10.0
}

fn default_max_lengths() -> usize {
    speclab::arith::R_SEARCH_MAX_LENGTHS
}

fn default_sigma() -> f64 {
    0.5
}

fn default_beta() -> f64 {
    0.8
}

fn default_moment_t() -> Vec<f64> {
    vec![100.0, 200.0]
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountParams {
    #[serde(default = "default_profile")]
    pub profile: DampingProfile,
    #[serde(default = "default_count_k")]
    pub k: usize,
    /// Defaults to `4/K`, which puts the window at `|τ| ≈ K/4`.
    pub hbar: Option<f64>,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_side")]
    pub side: String,
    /// Truncations for the exponent ladder, each run at `ħ = 4/K`.
    #[serde(default)]
    pub ladder_k: Vec<usize>,
    #[serde(default = "default_ladder_alpha")]
    pub ladder_alpha: f64,
    /// Random polynomials for the Jensen check.
    #[serde(default = "default_polynomials")]
    pub polynomials: usize,
}

fn default_count_k() -> usize {
    128
}

fn default_c() -> f64 {
    2.0
}

fn default_alphas() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}

fn default_side() -> String {
    "above".into()
}

fn default_ladder_alpha() -> f64 {
    0.6
}

fn default_polynomials() -> usize {
    20
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(kind: &str, params: &str) -> String {
        format!(r#"{{"kind":"{kind}","parameters":{params},"seed":1,"output_dir":"out"}}"#)
    }

    #[test]
    fn defaults_validate() {
        for kind in ["spectrum", "thermo", "flowavg", "arith", "count"] {
            let c = ExperimentConfig::from_json(&config(kind, "{}")).unwrap();
            c.validate().unwrap();
        }
        let c = ExperimentConfig::from_json(&config("trace", r#"{"area":12.566}"#)).unwrap();
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"kind":"arith","output_dir":"o","extra":1}"#).is_err());
        let c = ExperimentConfig::from_json(&config("spectrum", r#"{"K":64}"#)).unwrap();
        assert!(matches!(c.validate(), Err(ConfigError::Parameters { .. })));
        let c = ExperimentConfig::from_json(&config("arith", r#"{"a":2,"bogus":true}"#)).unwrap();
        assert!(c.validate().is_err());
        let c = ExperimentConfig::from_json(&config("spectrum", r#"{"profile":{"mean":0.5,"amp":1}}"#)).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn semantic_checks() {
        let c = ExperimentConfig::from_json(&config("trace", "{}")).unwrap();
        assert!(c.validate().is_err(), "area is required");
        let c = ExperimentConfig::from_json(&config("thermo", r#"{"model":"tent"}"#)).unwrap();
        assert!(c.validate().is_err());
        let c = ExperimentConfig::from_json(&config("flowavg", r#"{"observables":["nope"]}"#)).unwrap();
        assert!(c.validate().is_err());
        let c =
            ExperimentConfig::from_json(&config("spectrum", r#"{"profile":{"mean":0.5,"cos":[0.1,0.1,0.1]},"k":2}"#))
                .unwrap();
        assert!(c.validate().is_err());
    }
}
