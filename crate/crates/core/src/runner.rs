//! Scenario execution and deterministic serialization of results.
//!
//! A run produces one data file (CSV, or JSON for `dressed`) and a sidecar
//! `<data>.meta.json` holding the resolved configuration, solver residuals,
//! per-point failures and a summary of extracted features.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::config::{config_from_table, merge_tables, ConfigError};
use crate::config::{parse_table, ScenarioConfig, ScenarioKind};
use crate::dressed::{build_block, eigensystem, predicted_frequencies, Radiation, Scenario};
use crate::error::Error;
use crate::hilbert::make_space;
use crate::model::build_model;
use crate::observables::analysis::{
    blockade_mask, fast_period, local_maxima, runs, slow_period, window_width,
};
use crate::observables::sweep::PointFailure;
use crate::observables::{
    g2_tau, g2_zero, g3_tau, g3_zero, mean_photon_number, photon_statistics, rabi_scan,
    spectrum_scan, SweepResult,
};
use crate::solvers::steady_state_with_residual;

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Significant digits of every serialized number.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Slow-modulation maxima are collected up to this delay (1/κ).
pub const SLOW_WINDOW_END: f64 = 10.0;

/// Preset scenario files shipped with the tool.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig2b", include_str!("../presets/fig2b.toml")),
    ("fig2c", include_str!("../presets/fig2c.toml")),
    ("fig3a", include_str!("../presets/fig3a.toml")),
    ("fig3b", include_str!("../presets/fig3b.toml")),
    ("fig4b", include_str!("../presets/fig4b.toml")),
    ("fig4c", include_str!("../presets/fig4c.toml")),
    ("fig5a", include_str!("../presets/fig5a.toml")),
    ("fig5b", include_str!("../presets/fig5b.toml")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numerical(#[from] Error),
    #[error("all {points} grid points failed; first error: {first}")]
    AllPointsFailed { points: usize, first: String },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl RunError {
    /// 1 usage/config, 2 numerical, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) | RunError::Config(_) => 1,
            RunError::Numerical(Error::InvalidArgument(_) | Error::Unsupported(_)) => 1,
            RunError::Numerical(_) | RunError::AllPointsFailed { .. } => 2,
            RunError::Io { .. } => 3,
        }
    }
}

/// `%g`-style rendering with [`SIGNIFICANT_DIGITS`] digits. `-0` prints as
/// `0`, NaN as `nan`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Round to [`SIGNIFICANT_DIGITS`] for JSON output; non-finite becomes null.
fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    json!(format_number(x)
        .parse::<f64>()
        .expect("formatted number parses"))
}

fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

/// Named columns of equal length.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    fn new(cols: Vec<(&str, Vec<f64>)>) -> Self {
        let (headers, columns) = cols.into_iter().map(|(h, c)| (h.to_string(), c)).unzip();
        Self { headers, columns }
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.headers
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.headers.join(",");
        out.push('\n');
        for r in 0..self.rows() {
            let row: Vec<String> = self.columns.iter().map(|c| format_number(c[r])).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Data {
    Csv(Table),
    Json(Value),
}

impl Data {
    pub fn render(&self) -> String {
        match self {
            Data::Csv(t) => t.to_csv(),
            Data::Json(v) => {
                let mut s = serde_json::to_string_pretty(v).expect("json renders");
                s.push('\n');
                s
            }
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            Data::Csv(_) => "csv",
            Data::Json(_) => "json",
        }
    }
}

/// Everything a scenario computes, before anything is written.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub data: Data,
    pub residuals: Vec<f64>,
    pub failures: Vec<PointFailure>,
    pub summary: Value,
}

pub fn compute(cfg: &ScenarioConfig) -> Result<Outcome, RunError> {
    match cfg.scenario {
        ScenarioKind::Spectrum => spectrum(cfg),
        ScenarioKind::RabiScan => rabi(cfg),
        ScenarioKind::G2Tau | ScenarioKind::G3Tau => correlations(cfg),
        ScenarioKind::Pnstat => pnstat(cfg),
        ScenarioKind::Dressed => dressed(cfg),
    }
}

fn grid_of(cfg: &ScenarioConfig) -> Result<Vec<f64>, RunError> {
    cfg.grid
        .as_ref()
        .map(|g| g.values())
        .ok_or_else(|| ConfigError::MissingField("grid".into()).into())
}

fn check_sweep(r: &SweepResult) -> Result<(), RunError> {
    if !r.grid.is_empty() && r.failures.len() == r.grid.len() {
        return Err(RunError::AllPointsFailed {
            points: r.grid.len(),
            first: r.failures[0].error.clone(),
        });
    }
    Ok(())
}

fn spectrum(cfg: &ScenarioConfig) -> Result<Outcome, RunError> {
    let space = make_space(cfg.n_max)?;
    let grid = grid_of(cfg)?;
    let g = cfg.params.g;
    let deltas: Vec<f64> = grid.iter().map(|x| x * g).collect();
    let r = spectrum_scan(space, &cfg.params, &deltas);
    check_sweep(&r)?;
    let mean_n = r.column("mean_n").expect("mean_n column").to_vec();
    let peaks: Vec<f64> = local_maxima(&mean_n).into_iter().map(|i| grid[i]).collect();
    let summary = json!({
        "peaks_delta_over_g": nums(&peaks),
        "max_mean_n": num(mean_n.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max)),
    });
    Ok(Outcome {
        data: Data::Csv(Table::new(vec![("delta_over_g", grid), ("mean_n", mean_n)])),
        residuals: r.residuals,
        failures: r.failures,
        summary,
    })
}

fn rabi(cfg: &ScenarioConfig) -> Result<Outcome, RunError> {
    let space = make_space(cfg.n_max)?;
    let grid = grid_of(cfg)?;
    let r = rabi_scan(space, &cfg.params, &grid);
    check_sweep(&r)?;
    let g2 = r.column("g2_0").expect("g2_0 column").to_vec();
    let g3 = r.column("g3_0").expect("g3_0 column").to_vec();
    let mask = blockade_mask(&g2, &g3);
    let intervals: Vec<Value> = runs(&mask)
        .into_iter()
        .map(|(a, b)| json!([num(grid[a]), num(grid[b])]))
        .collect();
    let summary = json!({
        "blockade_window_width": num(window_width(&grid, &mask)),
        "blockade_intervals_eta": intervals,
    });
    Ok(Outcome {
        data: Data::Csv(Table::new(vec![
            ("eta_over_kappa", grid),
            ("g2_0", g2),
            ("g3_0", g3),
        ])),
        residuals: r.residuals,
        failures: r.failures,
        summary,
    })
}

fn scenario_of(phi_z: f64) -> Option<Scenario> {
    Radiation::from_phase(phi_z).ok().map(|r| match r {
        Radiation::InPhase => Scenario::InPhase,
        Radiation::OutOfPhase => Scenario::OutPhase,
    })
}

fn correlations(cfg: &ScenarioConfig) -> Result<Outcome, RunError> {
    let space = make_space(cfg.n_max)?;
    let tau = cfg
        .tau
        .as_ref()
        .ok_or_else(|| ConfigError::MissingField("tau".into()))?;
    let spec = tau.propagation(cfg.params.g);
    let (_, l) = build_model(space, &cfg.params)?;
    let ss = steady_state_with_residual(&l)?;
    let orders = cfg.orders();

    let mut cols: Vec<(String, Vec<f64>)> = Vec::new();
    let mut times = Vec::new();
    let mut per_order = Map::new();
    for &order in &orders {
        let (series, zero) = match order {
            2 => (g2_tau(&l, &ss.rho, &spec)?, g2_zero(&ss.rho)?),
            _ => (g3_tau(&l, &ss.rho, &spec)?, g3_zero(&ss.rho)?),
        };
        let fast = fast_period(&series.tau, &series.values);
        let slow = fast.and_then(|f| {
            slow_period(
                &series.tau,
                &series.values,
                f,
                SLOW_WINDOW_END.min(spec.t_max),
            )
        });
        per_order.insert(
            format!("g{order}"),
            json!({
                "zero_delay": num(zero),
                "regression_tau0_error": num((series.values[0] - zero).abs()),
                "fast_period": fast.map_or(Value::Null, num),
                "slow_period": slow.map_or(Value::Null, num),
                "final_value": num(*series.values.last().expect("nonempty series")),
            }),
        );
        times = series.tau;
        cols.push((format!("g{order}"), series.values));
    }
    let mut table_cols = vec![("kappa_tau".to_string(), times)];
    if cols.len() == 1 {
        table_cols.push(("value".to_string(), cols.pop().expect("one column").1));
    } else {
        table_cols.extend(cols);
    }
    let (headers, columns) = table_cols.into_iter().unzip();

    let mut summary = json!({
        "mean_n": num(mean_photon_number(&ss.rho)),
        "correlations": per_order,
    });
    if let Some(sc) = scenario_of(cfg.params.phi_z) {
        summary["predicted"] = predicted_json(cfg, sc);
    }
    Ok(Outcome {
        data: Data::Csv(Table { headers, columns }),
        residuals: vec![ss.residual],
        failures: Vec::new(),
        summary,
    })
}

fn predicted_json(cfg: &ScenarioConfig, sc: Scenario) -> Value {
    Value::Array(
        predicted_frequencies(&cfg.params, sc)
            .into_iter()
            .map(|p| {
                json!({
                    "label": p.label,
                    "frequency": num(p.frequency),
                    "period": num(p.period),
                    "applies": p.applies,
                })
            })
            .collect(),
    )
}

fn pnstat(cfg: &ScenarioConfig) -> Result<Outcome, RunError> {
    let space = make_space(cfg.n_max)?;
    let (_, l) = build_model(space, &cfg.params)?;
    let ss = steady_state_with_residual(&l)?;
    let st = photon_statistics(&ss.rho);
    let n: Vec<f64> = (0..st.p_n.len()).map(|k| k as f64).collect();
    let dev: Vec<f64> = st.deviation.iter().map(|d| d.unwrap_or(f64::NAN)).collect();
    let mut summary = json!({
        "mean_n": num(st.mean_n),
        "g2_0": g2_zero(&ss.rho).map_or(Value::Null, num),
    });
    if cfg.n_max >= 3 {
        summary["g3_0"] = g3_zero(&ss.rho).map_or(Value::Null, num);
    }
    Ok(Outcome {
        data: Data::Csv(Table::new(vec![
            ("n", n),
            ("p_n", st.p_n),
            ("poisson_p_n", st.poisson),
            ("deviation", dev),
        ])),
        residuals: vec![ss.residual],
        failures: Vec::new(),
        summary,
    })
}

fn dressed(cfg: &ScenarioConfig) -> Result<Outcome, RunError> {
    let mut levels = Vec::new();
    for n in 1..=cfg.n_levels {
        let block = build_block(n, cfg.params.phi_z, cfg.params.g)?;
        for lvl in eigensystem(&block) {
            levels.push(json!({
                "n": lvl.n,
                "energy_over_g": num(lvl.energy_over_g),
                "amplitudes": nums(&lvl.amplitudes),
            }));
        }
    }
    let mut summary = json!({ "levels": levels.len() });
    if let Some(sc) = scenario_of(cfg.params.phi_z) {
        summary["predicted"] = predicted_json(cfg, sc);
    }
    Ok(Outcome {
        data: Data::Json(Value::Array(levels)),
        residuals: Vec::new(),
        failures: Vec::new(),
        summary,
    })
}

/// Largest pointwise relative change `|a − b| / max(|b|, 1e-12)` over the
/// rows both columns share.
fn relative_change(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(x, y)| (x - y).abs() / y.abs().max(1e-12))
        .fold(0.0, f64::max)
}

/// Recompute at `n_max + 2` and report the relative change of each data
/// column. Not applicable to `dressed`, which has no truncation.
pub fn truncation_check(cfg: &ScenarioConfig, base: &Outcome) -> Result<Value, RunError> {
    let Data::Csv(table) = &base.data else {
        return Ok(json!({ "applicable": false }));
    };
    let mut wider = cfg.clone();
    wider.n_max += 2;
    wider.check_truncation = false;
    let wide = compute(&wider)?;
    let Data::Csv(other) = &wide.data else {
        unreachable!("same scenario yields the same data kind");
    };
    // The distribution itself grows with n_max; its moments are compared.
    let skip = [
        "delta_over_g",
        "eta_over_kappa",
        "kappa_tau",
        "n",
        "p_n",
        "poisson_p_n",
        "deviation",
    ];
    let mut changes = Map::new();
    let mut worst: f64 = 0.0;
    for (h, col) in table.headers.iter().zip(&table.columns) {
        if skip.contains(&h.as_str()) {
            continue;
        }
        let c = relative_change(col, other.column(h).expect("same columns"));
        worst = worst.max(c);
        changes.insert(h.clone(), num(c));
    }
    for key in ["mean_n", "g2_0", "g3_0"] {
        if let (Some(a), Some(b)) = (base.summary[key].as_f64(), wide.summary[key].as_f64()) {
            let c = relative_change(&[a], &[b]);
            worst = worst.max(c);
            changes.insert(key.into(), num(c));
        }
    }
    Ok(json!({
        "applicable": true,
        "n_max_reference": wider.n_max,
        "max_relative_change": num(worst),
        "columns": changes,
    }))
}

pub fn metadata(cfg: &ScenarioConfig, outcome: &Outcome, truncation: Option<Value>) -> Value {
    let space = make_space(cfg.n_max).map(|s| s.dim()).unwrap_or(0);
    let max_res = outcome
        .residuals
        .iter()
        .copied()
        .filter(|r| r.is_finite())
        .fold(0.0, f64::max);
    let failures: Vec<Value> = outcome
        .failures
        .iter()
        .map(|f| json!({ "index": f.index, "value": num(f.value), "error": f.error }))
        .collect();
    let mut meta = json!({
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "scenario": cfg.scenario.name(),
        "config": serde_json::to_value(cfg).expect("config serializes"),
        "config_toml": cfg.to_toml(),
        "n_max": cfg.n_max,
        "dim": space,
        "max_residual": num(max_res),
        "residuals": nums(&outcome.residuals),
        "failures": failures,
        "summary": outcome.summary,
    });
    if let Some(t) = truncation {
        meta["truncation"] = t;
    }
    meta
}

/// Sidecar path for a data file: `<data>.meta.json`.
pub fn meta_path(data: &Path) -> PathBuf {
    let mut s = data.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

#[derive(Clone, Debug)]
pub struct Report {
    pub data_path: PathBuf,
    pub meta_path: PathBuf,
    pub points: usize,
    pub failures: usize,
}

fn write(path: &Path, text: &str) -> Result<(), RunError> {
    fs::write(path, text).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Compute the scenario and write the data file at `out` plus its sidecar.
pub fn run_scenario(cfg: &ScenarioConfig, out: &Path) -> Result<Report, RunError> {
    let mut cfg = cfg.clone();
    cfg.output_path = Some(out.to_string_lossy().into_owned());
    let outcome = compute(&cfg)?;
    let truncation = if cfg.check_truncation {
        Some(truncation_check(&cfg, &outcome)?)
    } else {
        None
    };
    let meta = metadata(&cfg, &outcome, truncation);
    write(out, &outcome.data.render())?;
    let mp = meta_path(out);
    let mut text = serde_json::to_string_pretty(&meta).expect("json renders");
    text.push('\n');
    write(&mp, &text)?;
    Ok(Report {
        data_path: out.to_path_buf(),
        meta_path: mp,
        points: outcome.residuals.len(),
        failures: outcome.failures.len(),
    })
}

/// Resolve the command-line target (scenario name or preset) and optional
/// config text into a validated config. A preset is overlaid by the file; a
/// bare scenario name must agree with any `scenario` key in the file.
pub fn resolve_target(target: &str, config_text: Option<&str>) -> Result<ScenarioConfig, RunError> {
    let file = config_text.map(parse_table).transpose()?;
    let mut table = if let Some(text) = preset(target) {
        parse_table(text)?
    } else if ScenarioKind::from_name(target).is_some() {
        let mut t = toml::Table::new();
        t.insert("scenario".into(), toml::Value::String(target.into()));
        if let Some(Some(s)) = file.as_ref().map(|f| f.get("scenario")) {
            if s.as_str() != Some(target) {
                return Err(RunError::Usage(format!(
                    "config scenario {s} contradicts command-line scenario `{target}`"
                )));
            }
        }
        t
    } else {
        let presets: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
        let scenarios: Vec<&str> = ScenarioKind::ALL.iter().map(|s| s.name()).collect();
        return Err(RunError::Usage(format!(
            "unknown target `{target}`; scenarios: {}; presets: {}",
            scenarios.join(", "),
            presets.join(", ")
        )));
    };
    if let Some(f) = file {
        merge_tables(&mut table, f);
    }
    Ok(config_from_table(table)?)
}
