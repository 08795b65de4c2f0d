//! Scenario configuration files (TOML).
//!
//! ```toml
//! scenario = "spectrum"     # spectrum | rabi_scan | g2tau | g3tau | pnstat | dressed
//! n_max = 8                 # Fock truncation, default 8
//! check_truncation = false  # rerun at n_max + 2 and report relative changes
//! output_path = "fig2b.csv" # optional; --out on the command line wins
//!
//! g = 15.0                  # all rates in units of κ
//! phi_z = 0.0               # radians
//! eta = 0.5
//! delta = -18.37            # sets delta_a = delta_cav; or "two_photon_resonance"
//! # delta_a = ..., delta_cav = ...   (instead of delta)
//! gamma = 1.0               # default 1
//! kappa = 1.0               # default 1, must be 1
//!
//! [grid]                    # spectrum: Δ/g, rabi_scan: η/κ
//! start = -2.0
//! stop = 2.0
//! points = 401
//!
//! [tau]                     # g2tau / g3tau
//! t_max = 10.0
//! dt_out = 0.002
//! orders = [2, 3]           # optional; default [2] for g2tau, [3] for g3tau
//! method = "fixed_rk4"      # or "adaptive" (with rel_tol, abs_tol)
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{two_photon_detuning, SystemParams};
use crate::solvers::{Method, PropagationSpec};

pub const DEFAULT_N_MAX: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("malformed config: {0}")]
    Malformed(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("missing required key `{0}`")]
    MissingField(String),
    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },
    #[error("value out of range for `{key}`: {reason}")]
    OutOfRange { key: String, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Spectrum,
    RabiScan,
    #[serde(rename = "g2tau")]
    G2Tau,
    #[serde(rename = "g3tau")]
    G3Tau,
    Pnstat,
    Dressed,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::Spectrum,
        ScenarioKind::RabiScan,
        ScenarioKind::G2Tau,
        ScenarioKind::G3Tau,
        ScenarioKind::Pnstat,
        ScenarioKind::Dressed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Spectrum => "spectrum",
            ScenarioKind::RabiScan => "rabi_scan",
            ScenarioKind::G2Tau => "g2tau",
            ScenarioKind::G3Tau => "g3tau",
            ScenarioKind::Pnstat => "pnstat",
            ScenarioKind::Dressed => "dressed",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    fn is_sweep(self) -> bool {
        matches!(self, ScenarioKind::Spectrum | ScenarioKind::RabiScan)
    }

    fn is_tau(self) -> bool {
        matches!(self, ScenarioKind::G2Tau | ScenarioKind::G3Tau)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        crate::observables::linspace(self.start, self.stop, self.points)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauSpec {
    pub t_max: f64,
    pub dt_out: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orders: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
}

impl TauSpec {
    pub fn propagation(&self, g: f64) -> PropagationSpec {
        match self.method.unwrap_or(Method::FixedRk4) {
            Method::FixedRk4 => PropagationSpec::fixed_rk4(self.t_max, self.dt_out, g),
            Method::Adaptive => PropagationSpec::adaptive(
                self.t_max,
                self.dt_out,
                self.rel_tol.unwrap_or(1e-8),
                self.abs_tol.unwrap_or(1e-10),
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum DetuningSpec {
    Value(f64),
    Named(String),
}

const TWO_PHOTON: &str = "two_photon_resonance";

/// The document as written, before defaults and validation.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<String>,
    n_max: Option<i64>,
    check_truncation: Option<bool>,
    output_path: Option<String>,
    g: Option<f64>,
    phi_z: Option<f64>,
    eta: Option<f64>,
    delta: Option<DetuningSpec>,
    delta_a: Option<f64>,
    delta_cav: Option<f64>,
    gamma: Option<f64>,
    kappa: Option<f64>,
    n_levels: Option<i64>,
    grid: Option<GridSpec>,
    tau: Option<TauSpec>,
}

const TOP_KEYS: &[&str] = &[
    "scenario",
    "n_max",
    "check_truncation",
    "output_path",
    "g",
    "phi_z",
    "eta",
    "delta",
    "delta_a",
    "delta_cav",
    "gamma",
    "kappa",
    "n_levels",
    "grid",
    "tau",
];
const GRID_KEYS: &[&str] = &["start", "stop", "points"];
const TAU_KEYS: &[&str] = &["t_max", "dt_out", "orders", "method", "rel_tol", "abs_tol"];

/// Fully resolved and validated scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub params: SystemParams,
    pub n_max: usize,
    pub grid: Option<GridSpec>,
    pub tau: Option<TauSpec>,
    pub output_path: Option<String>,
    pub check_truncation: bool,
    /// Highest photon manifold listed by the `dressed` scenario.
    pub n_levels: usize,
}

impl ScenarioConfig {
    /// Correlation orders requested by a tau scenario.
    pub fn orders(&self) -> Vec<u32> {
        if let Some(o) = self.tau.as_ref().and_then(|t| t.orders.clone()) {
            return o;
        }
        match self.scenario {
            ScenarioKind::G3Tau => vec![3],
            _ => vec![2],
        }
    }

    /// Canonical TOML form with every default written out; parsing it yields
    /// an identical config.
    pub fn to_toml(&self) -> String {
        let p = &self.params;
        let raw = RawConfig {
            scenario: Some(self.scenario.name().to_string()),
            n_max: Some(self.n_max as i64),
            check_truncation: Some(self.check_truncation),
            output_path: self.output_path.clone(),
            g: Some(p.g),
            phi_z: Some(p.phi_z),
            eta: Some(p.eta),
            delta: None,
            delta_a: Some(p.delta_a),
            delta_cav: Some(p.delta_cav),
            gamma: Some(p.gamma),
            kappa: Some(p.kappa),
            n_levels: Some(self.n_levels as i64),
            grid: self.grid,
            tau: self.tau.clone(),
        };
        toml::to_string(&raw).expect("config serializes")
    }
}

/// Parse a TOML document into an unvalidated table.
pub fn parse_table(text: &str) -> Result<toml::Table, ConfigError> {
    text.parse::<toml::Table>()
        .map_err(|e| ConfigError::Malformed(e.to_string().trim().to_string()))
}

/// Overlay `top` onto `base`, merging nested tables key by key.
pub fn merge_tables(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge_tables(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn check_keys(table: &toml::Table, allowed: &[&str], prefix: &str) -> Result<(), ConfigError> {
    for key in table.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(format!("{prefix}{key}")));
        }
    }
    Ok(())
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    config_from_table(parse_table(text)?)
}

pub fn config_from_table(table: toml::Table) -> Result<ScenarioConfig, ConfigError> {
    check_keys(&table, TOP_KEYS, "")?;
    for (section, keys) in [("grid", GRID_KEYS), ("tau", TAU_KEYS)] {
        match table.get(section) {
            Some(toml::Value::Table(t)) => check_keys(t, keys, &format!("{section}."))?,
            Some(_) => {
                return Err(ConfigError::InvalidValue {
                    key: section.into(),
                    reason: "expected a table".into(),
                })
            }
            None => {}
        }
    }
    // Deserialize field by field so type errors can name their key.
    let mut raw = RawConfig::default();
    macro_rules! field {
        ($name:ident) => {
            if let Some(v) = table.get(stringify!($name)) {
                raw.$name = Some(v.clone().try_into().map_err(|e: toml::de::Error| {
                    ConfigError::InvalidValue {
                        key: stringify!($name).into(),
                        reason: e.message().to_string(),
                    }
                })?);
            }
        };
    }
    field!(scenario);
    field!(n_max);
    field!(check_truncation);
    field!(output_path);
    field!(g);
    field!(phi_z);
    field!(eta);
    field!(delta);
    field!(delta_a);
    field!(delta_cav);
    field!(gamma);
    field!(kappa);
    field!(n_levels);
    if let Some(toml::Value::Table(t)) = table.get("grid") {
        for k in GRID_KEYS {
            if !t.contains_key(*k) {
                return Err(ConfigError::MissingField(format!("grid.{k}")));
            }
        }
    }
    if let Some(toml::Value::Table(t)) = table.get("tau") {
        for k in ["t_max", "dt_out"] {
            if !t.contains_key(k) {
                return Err(ConfigError::MissingField(format!("tau.{k}")));
            }
        }
    }
    field!(grid);
    field!(tau);
    resolve(raw)
}

fn out_of_range(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::OutOfRange {
        key: key.into(),
        reason: reason.into(),
    }
}

fn resolve(raw: RawConfig) -> Result<ScenarioConfig, ConfigError> {
    let name = raw
        .scenario
        .ok_or_else(|| ConfigError::MissingField("scenario".into()))?;
    let scenario = ScenarioKind::from_name(&name).ok_or_else(|| ConfigError::InvalidValue {
        key: "scenario".into(),
        reason: format!("unknown scenario `{name}`"),
    })?;

    let n_max = raw.n_max.unwrap_or(DEFAULT_N_MAX as i64);
    let min_n_max = match scenario {
        ScenarioKind::RabiScan => 3,
        ScenarioKind::G3Tau | ScenarioKind::G2Tau => 3,
        _ => 1,
    };
    if n_max < min_n_max {
        return Err(out_of_range(
            "n_max",
            format!("must be >= {min_n_max} for {name}, got {n_max}"),
        ));
    }
    let n_max = n_max as usize;

    let g = raw.g.ok_or_else(|| ConfigError::MissingField("g".into()))?;
    let phi_z = raw
        .phi_z
        .ok_or_else(|| ConfigError::MissingField("phi_z".into()))?;
    let needs_drive = scenario != ScenarioKind::Dressed && scenario != ScenarioKind::RabiScan;
    let eta = match raw.eta {
        Some(v) => v,
        None if needs_drive => return Err(ConfigError::MissingField("eta".into())),
        None => 0.0,
    };

    if raw.delta.is_some() && (raw.delta_a.is_some() || raw.delta_cav.is_some()) {
        return Err(ConfigError::InvalidValue {
            key: "delta".into(),
            reason: "give either delta or delta_a/delta_cav, not both".into(),
        });
    }
    let (delta_a, delta_cav) = match (raw.delta, raw.delta_a, raw.delta_cav) {
        (Some(DetuningSpec::Value(d)), _, _) => (d, d),
        (Some(DetuningSpec::Named(s)), _, _) if s == TWO_PHOTON => {
            let d = two_photon_detuning(g);
            (d, d)
        }
        (Some(DetuningSpec::Named(s)), _, _) => {
            return Err(ConfigError::InvalidValue {
                key: "delta".into(),
                reason: format!("expected a number or \"{TWO_PHOTON}\", got \"{s}\""),
            })
        }
        (None, Some(a), Some(c)) => (a, c),
        (None, Some(_), None) => return Err(ConfigError::MissingField("delta_cav".into())),
        (None, None, Some(_)) => return Err(ConfigError::MissingField("delta_a".into())),
        (None, None, None) => match scenario {
            // Swept or fixed by the scenario itself.
            ScenarioKind::Spectrum | ScenarioKind::Dressed => (0.0, 0.0),
            ScenarioKind::RabiScan => {
                let d = two_photon_detuning(g);
                (d, d)
            }
            _ => return Err(ConfigError::MissingField("delta".into())),
        },
    };
    let params = SystemParams {
        g,
        phi_z,
        eta,
        delta_a,
        delta_cav,
        gamma: raw.gamma.unwrap_or(1.0),
        kappa: raw.kappa.unwrap_or(1.0),
    };
    for (key, v) in [
        ("g", params.g),
        ("phi_z", params.phi_z),
        ("eta", params.eta),
        ("delta_a", params.delta_a),
        ("delta_cav", params.delta_cav),
        ("gamma", params.gamma),
        ("kappa", params.kappa),
    ] {
        if !v.is_finite() {
            return Err(out_of_range(key, "must be finite"));
        }
    }
    for (key, v) in [
        ("g", params.g),
        ("eta", params.eta),
        ("gamma", params.gamma),
    ] {
        if v < 0.0 {
            return Err(out_of_range(key, format!("must be >= 0, got {v}")));
        }
    }
    if params.kappa != 1.0 {
        return Err(out_of_range(
            "kappa",
            format!("kappa is the rate unit and must be 1, got {}", params.kappa),
        ));
    }
    if scenario == ScenarioKind::Spectrum && params.g <= 0.0 {
        return Err(out_of_range(
            "g",
            "spectrum grid is in units of g, need g > 0",
        ));
    }
    if scenario == ScenarioKind::Dressed {
        crate::dressed::Radiation::from_phase(params.phi_z)
            .map_err(|e| out_of_range("phi_z", e.to_string()))?;
    }

    let grid = if scenario.is_sweep() {
        let grid = raw
            .grid
            .ok_or_else(|| ConfigError::MissingField("grid".into()))?;
        if grid.points < 2 {
            return Err(out_of_range(
                "grid.points",
                format!("sweeps need at least 2 points, got {}", grid.points),
            ));
        }
        if !grid.start.is_finite() || !grid.stop.is_finite() {
            return Err(out_of_range("grid.start", "grid bounds must be finite"));
        }
        if scenario == ScenarioKind::RabiScan && grid.start.min(grid.stop) < 0.0 {
            return Err(out_of_range("grid.start", "eta grid must be >= 0"));
        }
        Some(grid)
    } else {
        raw.grid
    };

    let tau = if scenario.is_tau() {
        let tau = raw
            .tau
            .ok_or_else(|| ConfigError::MissingField("tau".into()))?;
        if !(tau.dt_out.is_finite() && tau.dt_out > 0.0) {
            return Err(out_of_range("tau.dt_out", "must be > 0"));
        }
        if !(tau.t_max.is_finite() && tau.t_max >= tau.dt_out) {
            return Err(out_of_range("tau.t_max", "must be >= tau.dt_out"));
        }
        if let Some(orders) = &tau.orders {
            if orders.is_empty() || orders.iter().any(|o| !(2..=3).contains(o)) {
                return Err(out_of_range("tau.orders", "entries must be 2 or 3"));
            }
            let mut sorted = orders.clone();
            sorted.dedup();
            if sorted.len() != orders.len() || orders.windows(2).any(|w| w[0] >= w[1]) {
                return Err(out_of_range(
                    "tau.orders",
                    "must be increasing without repeats",
                ));
            }
        }
        for (key, v) in [("tau.rel_tol", tau.rel_tol), ("tau.abs_tol", tau.abs_tol)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(out_of_range(key, "must be > 0"));
                }
            }
        }
        Some(tau)
    } else {
        raw.tau
    };

    let n_levels = raw.n_levels.unwrap_or(3);
    if n_levels < 1 {
        return Err(out_of_range(
            "n_levels",
            format!("must be >= 1, got {n_levels}"),
        ));
    }

    Ok(ScenarioConfig {
        scenario,
        params,
        n_max,
        grid,
        tau,
        output_path: raw.output_path,
        check_truncation: raw.check_truncation.unwrap_or(false),
        n_levels: n_levels as usize,
    })
}
