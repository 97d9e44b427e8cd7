//! JSON run configuration, single-point solves, sweeps, Monte Carlo
//! validation runs and CSV output.
//!
//! A configuration document looks like
//!
//! ```json
//! {
//!   "params": { "tx_power_w": 0.1, "noise_dbm_per_hz": -174, "noise_figure_db": 0 },
//!   "geometry": { "kind": "positions", "bs": [0, 0], "ue": [50, 50], "ris": [25, 0], "normal": [1, 1] },
//!   "schemes": ["ES", "TS"],
//!   "conditions": ["LOS", "NLOS"],
//!   "targets": { "rate_bps": [1e7], "epsilon": [0.01] },
//!   "sweep_axis": "rate",
//!   "mc": { "num_samples": 1000000, "seed": 7, "num_streams": 4 }
//! }
//! ```
//!
//! Every field is optional. Missing parameters take the defaults of
//! [`SystemParams`], a missing geometry the default placement for the
//! region side. A raw geometry is given as
//! `{"kind": "raw", "psi_deg": 30, "theta_deg": -10, "d_sr_m": 25, "d_rd_m": 40}`
//! (`*_rad` keys are accepted as well).

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::{Point2, Vector2};
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{
    noise_psd_w_per_hz, DerivedConstants, LinkGeometry, Placement, SystemParams,
    THERMAL_NOISE_DBM_PER_HZ,
};
use crate::solver::{self, FeasibilityResult, Scenario};
use crate::validate::{self, McConfig, McReport};
use crate::{Condition, Scheme};

/// Header of solve and sweep output.
pub const SWEEP_HEADER: [&str; 12] = [
    "axis",
    "scheme",
    "condition",
    "m_reflect",
    "m_harvest",
    "m_total",
    "m_total_int",
    "tau",
    "rate_slack",
    "ss_slack",
    "outage_slack",
    "error",
];

/// Header of validation output.
pub const VALIDATE_HEADER: [&str; 9] = [
    "m",
    "target_outage",
    "gamma",
    "empirical_outage",
    "analytic_outage",
    "abs_gap",
    "binomial_stderr",
    "ks_distance",
    "num_samples",
];

pub const PRESETS: [&str; 4] = ["fig2a", "fig2b", "fig3a", "fig3b"];

/// Quantity varied along the rows of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    #[serde(alias = "tx_power_w")]
    Power,
    #[serde(alias = "rate_bps")]
    Rate,
    #[serde(alias = "epsilon")]
    OutageMargin,
}

impl SweepAxis {
    fn path(self) -> &'static str {
        match self {
            SweepAxis::Power => "targets.tx_power_w",
            SweepAxis::Rate => "targets.rate_bps",
            SweepAxis::OutageMargin => "targets.epsilon",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Targets {
    pub rate_bps: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub tx_power_w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSettings {
    pub config: McConfig,
    /// Element counts to validate.
    pub elements: Vec<usize>,
    /// Analytic outage levels at which thresholds are placed.
    pub outage_points: Vec<f64>,
}

impl Default for McSettings {
    fn default() -> Self {
        McSettings {
            config: McConfig::default(),
            elements: vec![10, 32, 100],
            outage_points: vec![0.01, 0.1, 0.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SystemParams,
    pub geometry: LinkGeometry,
    pub schemes: Vec<Scheme>,
    pub conditions: Vec<Condition>,
    pub targets: Targets,
    pub sweep_axis: SweepAxis,
    pub output_path: Option<PathBuf>,
    /// Also sets the worker count of sweeps.
    pub mc: McSettings,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    carrier_freq_hz: Option<f64>,
    bandwidth_hz: Option<f64>,
    noise_psd_w_per_hz: Option<f64>,
    noise_dbm_per_hz: Option<f64>,
    noise_figure_db: Option<f64>,
    num_bs_antennas: Option<usize>,
    harvest_efficiency: Option<f64>,
    element_power_w: Option<f64>,
    tx_power_w: Option<f64>,
    area_side_m: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawGeometry {
    Positions {
        bs: [f64; 2],
        ue: [f64; 2],
        ris: [f64; 2],
        normal: Option<[f64; 2]>,
    },
    Raw {
        psi_deg: Option<f64>,
        psi_rad: Option<f64>,
        theta_deg: Option<f64>,
        theta_rad: Option<f64>,
        d_sr_m: f64,
        d_rd_m: f64,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTargets {
    rate_bps: Option<Vec<f64>>,
    epsilon: Option<Vec<f64>>,
    tx_power_w: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMc {
    num_samples: Option<u64>,
    seed: Option<u64>,
    num_streams: Option<usize>,
    elements: Option<Vec<usize>>,
    outage_points: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    params: Option<RawParams>,
    geometry: Option<RawGeometry>,
    schemes: Option<Vec<Scheme>>,
    conditions: Option<Vec<Condition>>,
    condition: Option<Condition>,
    targets: Option<RawTargets>,
    sweep_axis: Option<SweepAxis>,
    output_path: Option<PathBuf>,
    mc: Option<RawMc>,
}

fn prefix(path: &str, err: Error) -> Error {
    match err {
        Error::InvalidParameter { field, reason } => {
            Error::config(format!("{path}.{field}"), reason)
        }
        Error::DegenerateGeometry { which, angle_rad } => Error::config(
            format!("{path}.{which}"),
            format!("{angle_rad} rad is outside (-pi/2, pi/2)"),
        ),
        other => Error::config(path, other.to_string()),
    }
}

fn angle(path: &str, deg: Option<f64>, rad: Option<f64>) -> Result<f64> {
    match (deg, rad) {
        (Some(d), None) => Ok(d.to_radians()),
        (None, Some(r)) => Ok(r),
        (None, None) => Err(Error::config(path, "missing angle (give *_deg or *_rad)")),
        (Some(_), Some(_)) => Err(Error::config(path, "give either *_deg or *_rad, not both")),
    }
}

impl RawParams {
    fn build(self) -> Result<SystemParams> {
        let d = SystemParams::default();
        let noise = match (self.noise_psd_w_per_hz, self.noise_dbm_per_hz) {
            (Some(_), Some(_)) => {
                return Err(Error::config(
                    "params.noise_psd_w_per_hz",
                    "give either noise_psd_w_per_hz or noise_dbm_per_hz, not both",
                ))
            }
            (Some(w), None) => {
                if self.noise_figure_db.is_some() {
                    return Err(Error::config(
                        "params.noise_figure_db",
                        "only applies together with noise_dbm_per_hz",
                    ));
                }
                w
            }
            (None, dbm) => noise_psd_w_per_hz(
                dbm.unwrap_or(THERMAL_NOISE_DBM_PER_HZ),
                self.noise_figure_db.unwrap_or(0.0),
            ),
        };
        let params = SystemParams {
            carrier_freq_hz: self.carrier_freq_hz.unwrap_or(d.carrier_freq_hz),
            bandwidth_hz: self.bandwidth_hz.unwrap_or(d.bandwidth_hz),
            noise_psd_w_per_hz: noise,
            num_bs_antennas: self.num_bs_antennas.unwrap_or(d.num_bs_antennas),
            harvest_efficiency: self.harvest_efficiency.unwrap_or(d.harvest_efficiency),
            element_power_w: self.element_power_w.unwrap_or(d.element_power_w),
            tx_power_w: self.tx_power_w.unwrap_or(d.tx_power_w),
            area_side_m: self.area_side_m.unwrap_or(d.area_side_m),
        };
        params.validate().map_err(|e| prefix("params", e))?;
        Ok(params)
    }
}

impl RawGeometry {
    fn build(self) -> Result<LinkGeometry> {
        match self {
            RawGeometry::Positions {
                bs,
                ue,
                ris,
                normal,
            } => {
                let normal = normal.unwrap_or([1.0, 1.0]);
                LinkGeometry::from_positions(Placement {
                    bs: Point2::from(bs),
                    ue: Point2::from(ue),
                    ris: Point2::from(ris),
                    normal: Vector2::from(normal),
                })
            }
            RawGeometry::Raw {
                psi_deg,
                psi_rad,
                theta_deg,
                theta_rad,
                d_sr_m,
                d_rd_m,
            } => LinkGeometry::from_raw(
                angle("geometry.psi", psi_deg, psi_rad)?,
                angle("geometry.theta", theta_deg, theta_rad)?,
                d_sr_m,
                d_rd_m,
            ),
        }
        .map_err(|e| match e {
            Error::Config { .. } => e,
            other => prefix("geometry", other),
        })
    }
}

fn check_list(path: &str, values: &[f64], ok: impl Fn(f64) -> bool, what: &str) -> Result<()> {
    for (i, &v) in values.iter().enumerate() {
        if !ok(v) {
            return Err(Error::config(
                format!("{path}[{i}]"),
                format!("{what}, got {v}"),
            ));
        }
    }
    Ok(())
}

impl RawConfig {
    fn build(self) -> Result<RunConfig> {
        let params = self.params.unwrap_or_default().build()?;
        let geometry = match self.geometry {
            Some(g) => g.build()?,
            None => LinkGeometry::default_for_side(params.area_side_m)
                .map_err(|e| prefix("geometry", e))?,
        };
        let conditions = match (self.conditions, self.condition) {
            (Some(_), Some(_)) => {
                return Err(Error::config(
                    "condition",
                    "give either condition or conditions, not both",
                ))
            }
            (Some(list), None) => list,
            (None, Some(c)) => vec![c],
            (None, None) => vec![Condition::LOS],
        };
        let targets = self.targets.unwrap_or_default();
        let tx_power_w = targets
            .tx_power_w
            .unwrap_or_else(|| vec![params.tx_power_w]);
        let mc = self.mc.unwrap_or_default();
        let defaults = McSettings::default();
        let config = RunConfig {
            params,
            geometry,
            schemes: self.schemes.unwrap_or_else(|| vec![Scheme::ES, Scheme::TS]),
            conditions,
            targets: Targets {
                rate_bps: targets.rate_bps.unwrap_or_default(),
                epsilon: targets.epsilon.unwrap_or_default(),
                tx_power_w,
            },
            sweep_axis: self.sweep_axis.unwrap_or(SweepAxis::Rate),
            output_path: self.output_path,
            mc: McSettings {
                config: McConfig {
                    num_samples: mc.num_samples.unwrap_or(defaults.config.num_samples),
                    seed: mc.seed.unwrap_or(defaults.config.seed),
                    num_streams: mc.num_streams.unwrap_or(defaults.config.num_streams),
                },
                elements: mc.elements.unwrap_or(defaults.elements),
                outage_points: mc.outage_points.unwrap_or(defaults.outage_points),
            },
        };
        config.validate()?;
        Ok(config)
    }
}

impl RunConfig {
    /// Parses and validates a JSON document. Errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(
                if path == "." { "$".to_owned() } else { path },
                e.into_inner().to_string(),
            )
        })?;
        raw.build()
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Built-in operating points; see [`PRESETS`].
    pub fn preset(name: &str) -> Result<Self> {
        let base = RunConfig {
            params: SystemParams::default(),
            geometry: LinkGeometry::default_for_side(SystemParams::default().area_side_m)?,
            schemes: vec![Scheme::ES, Scheme::TS],
            conditions: vec![Condition::LOS, Condition::NLOS],
            targets: Targets {
                rate_bps: vec![10e6],
                epsilon: vec![0.01],
                tx_power_w: vec![0.1],
            },
            sweep_axis: SweepAxis::Rate,
            output_path: None,
            mc: McSettings::default(),
        };
        let config = match name {
            "fig2a" => RunConfig {
                sweep_axis: SweepAxis::Power,
                targets: Targets {
                    tx_power_w: log_space(0.01, 1.0, 25),
                    ..base.targets.clone()
                },
                ..base
            },
            "fig2b" => RunConfig {
                sweep_axis: SweepAxis::Rate,
                targets: Targets {
                    rate_bps: (1..=10).map(|k| k as f64 * 5e6).collect(),
                    ..base.targets.clone()
                },
                ..base
            },
            "fig3a" | "fig3b" => RunConfig {
                sweep_axis: SweepAxis::OutageMargin,
                conditions: vec![Condition::NLOS],
                targets: Targets {
                    rate_bps: vec![if name == "fig3a" { 20e6 } else { 15e6 }],
                    epsilon: log_space(1e-4, 1e-1, 13),
                    tx_power_w: vec![0.1],
                },
                ..base
            },
            other => {
                return Err(Error::config(
                    "preset",
                    format!("unknown preset `{other}` (known: {})", PRESETS.join(", ")),
                ))
            }
        };
        config.validate()?;
        config.validate_targets()?;
        Ok(config)
    }

    fn needs_epsilon(&self) -> bool {
        self.conditions.contains(&Condition::NLOS)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate().map_err(|e| prefix("params", e))?;
        if self.schemes.is_empty() {
            return Err(Error::config("schemes", "must list at least one scheme"));
        }
        if self.conditions.is_empty() {
            return Err(Error::config(
                "conditions",
                "must list at least one condition",
            ));
        }
        let t = &self.targets;
        check_list(
            "targets.rate_bps",
            &t.rate_bps,
            |v| v.is_finite() && v > 0.0,
            "must be finite and > 0",
        )?;
        if t.tx_power_w.is_empty() {
            return Err(Error::config(
                "targets.tx_power_w",
                "must list at least one power",
            ));
        }
        check_list(
            "targets.tx_power_w",
            &t.tx_power_w,
            |v| v.is_finite() && v > 0.0,
            "must be finite and > 0",
        )?;
        check_list(
            "targets.epsilon",
            &t.epsilon,
            |v| crate::outage::check_epsilon(v).is_ok(),
            &format!(
                "must lie in [{:e}, {}]",
                crate::outage::MIN_EPSILON,
                crate::outage::MAX_EPSILON
            ),
        )?;
        self.mc.config.validate().map_err(|e| prefix("mc", e))?;
        if self.mc.elements.is_empty() || self.mc.elements.contains(&0) {
            return Err(Error::config(
                "mc.elements",
                "must list element counts >= 1",
            ));
        }
        check_list(
            "mc.outage_points",
            &self.mc.outage_points,
            |v| v > 0.0 && v < 1.0,
            "must lie in (0, 1)",
        )?;
        if self.mc.outage_points.is_empty() {
            return Err(Error::config(
                "mc.outage_points",
                "must list at least one level",
            ));
        }
        Ok(())
    }

    /// Checks that solves and sweeps have something to solve for.
    pub fn validate_targets(&self) -> Result<()> {
        let t = &self.targets;
        if t.rate_bps.is_empty() {
            return Err(Error::config(
                "targets.rate_bps",
                "must list at least one rate",
            ));
        }
        if self.needs_epsilon() && t.epsilon.is_empty() {
            return Err(Error::config("targets.epsilon", "required for NLOS"));
        }
        if self.sweep_axis == SweepAxis::OutageMargin && t.epsilon.is_empty() {
            return Err(Error::config(
                "targets.epsilon",
                "sweep axis outage_margin needs at least one value",
            ));
        }
        Ok(())
    }

    fn axis_values(&self) -> &[f64] {
        match self.sweep_axis {
            SweepAxis::Power => &self.targets.tx_power_w,
            SweepAxis::Rate => &self.targets.rate_bps,
            SweepAxis::OutageMargin => &self.targets.epsilon,
        }
    }

    /// Sweep-only checks: strictly increasing axis, one value for every
    /// other target.
    pub fn validate_sweep(&self) -> Result<()> {
        let path = self.sweep_axis.path();
        let values = self.axis_values();
        if let Some(i) = values.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::config(
                format!("{path}[{}]", i + 1),
                "sweep values must be strictly increasing",
            ));
        }
        let others = [
            (SweepAxis::Power, &self.targets.tx_power_w),
            (SweepAxis::Rate, &self.targets.rate_bps),
            (SweepAxis::OutageMargin, &self.targets.epsilon),
        ];
        for (axis, list) in others {
            if axis != self.sweep_axis && list.len() > 1 {
                return Err(Error::config(
                    axis.path(),
                    "only the sweep axis may list more than one value",
                ));
            }
        }
        Ok(())
    }
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..count)
        .map(|i| match i {
            0 => lo,
            i if i + 1 == count => hi,
            i => 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64),
        })
        .collect()
}

/// One output row of a solve or sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub axis: f64,
    pub scheme: Scheme,
    pub condition: Condition,
    pub outcome: std::result::Result<FeasibilityResult, String>,
}

impl Row {
    fn record(&self) -> Vec<String> {
        let num = |v: f64| v.to_string();
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        let mut out = vec![
            num(self.axis),
            self.scheme.to_string(),
            self.condition.to_string(),
        ];
        match &self.outcome {
            Ok(r) => {
                let d = &r.diagnostics;
                out.extend([
                    num(r.m_reflect),
                    num(r.m_harvest),
                    num(r.m_total),
                    r.m_total_int.to_string(),
                    num(r.tau),
                    opt(d.rate_slack),
                    num(d.ss_slack),
                    opt(d.outage_slack),
                    String::new(),
                ]);
            }
            Err(msg) => {
                out.extend(std::iter::repeat_n(String::new(), 8));
                out.push(msg.clone());
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct Point {
    axis: f64,
    tx_power_w: f64,
    rate_bps: f64,
    epsilon: Option<f64>,
}

fn solve_point(config: &RunConfig, point: Point) -> Vec<Row> {
    let params = config.params.with_tx_power(point.tx_power_w);
    let scenario = Scenario::new(&params, &config.geometry);
    let mut rows = Vec::new();
    for &scheme in &config.schemes {
        for &condition in &config.conditions {
            let eps = match condition {
                Condition::LOS => None,
                Condition::NLOS => point.epsilon,
            };
            let outcome = scenario
                .as_ref()
                .map_err(|e| e.to_string())
                .and_then(|scn| {
                    solver::solve(scn, scheme, condition, point.rate_bps, eps)
                        .map_err(|e| e.to_string())
                });
            rows.push(Row {
                axis: point.axis,
                scheme,
                condition,
                outcome,
            });
        }
    }
    rows
}

fn points(config: &RunConfig) -> Vec<Point> {
    let t = &config.targets;
    let eps: Vec<Option<f64>> = if t.epsilon.is_empty() {
        vec![None]
    } else {
        t.epsilon.iter().copied().map(Some).collect()
    };
    let mut out = Vec::new();
    for &p in &t.tx_power_w {
        for &r in &t.rate_bps {
            for &e in &eps {
                let axis = match config.sweep_axis {
                    SweepAxis::Power => p,
                    SweepAxis::Rate => r,
                    SweepAxis::OutageMargin => e.unwrap_or(f64::NAN),
                };
                out.push(Point {
                    axis,
                    tx_power_w: p,
                    rate_bps: r,
                    epsilon: e,
                });
            }
        }
    }
    out
}

fn thread_pool(config: &RunConfig) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(config.mc.config.num_streams)
        .build()
        .map_err(|e| Error::config("mc.num_streams", e.to_string()))
}

/// One row per `(target combination, scheme, condition)`, in the order the
/// targets are listed (power, then rate, then margin).
pub fn cmd_solve(config: &RunConfig) -> Result<Vec<Row>> {
    config.validate()?;
    config.validate_targets()?;
    Ok(points(config)
        .into_iter()
        .flat_map(|p| solve_point(config, p))
        .collect())
}

/// Solves every sweep point concurrently and returns the rows in axis order.
/// Failing points keep their row with the message in `error`.
pub fn cmd_sweep(config: &RunConfig) -> Result<Vec<Row>> {
    config.validate()?;
    config.validate_targets()?;
    config.validate_sweep()?;
    let pts = points(config);
    let rows: Vec<Vec<Row>> =
        thread_pool(config)?.install(|| pts.par_iter().map(|&p| solve_point(config, p)).collect());
    Ok(rows.concat())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationRow {
    pub target_outage: f64,
    pub report: McReport,
}

/// Monte Carlo outage for every `(M, outage level)` pair of the `mc` section.
/// The threshold of each pair is placed where the analytic outage equals the
/// level.
pub fn cmd_validate(config: &RunConfig) -> Result<Vec<ValidationRow>> {
    config.validate()?;
    let consts = DerivedConstants::new(&config.params, &config.geometry)?;
    let n = config.params.num_bs_antennas;
    let mut rows = Vec::new();
    for &m in &config.mc.elements {
        let gammas = config
            .mc
            .outage_points
            .iter()
            .map(|&p| validate::gamma_for_outage(p, m, consts.gamma0, n))
            .collect::<Result<Vec<_>>>()?;
        let reports = validate::empirical_outage_curve(
            &config.params,
            &config.geometry,
            m,
            &gammas,
            &config.mc.config,
        )?;
        rows.extend(
            config
                .mc
                .outage_points
                .iter()
                .zip(reports)
                .map(|(&p, report)| ValidationRow {
                    target_outage: p,
                    report,
                }),
        );
    }
    Ok(rows)
}

pub fn write_rows<W: Write>(out: W, rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_validation<W: Write>(out: W, rows: &[ValidationRow], num_samples: u64) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(VALIDATE_HEADER)?;
    for row in rows {
        let r = &row.report;
        w.write_record([
            r.num_elements.to_string(),
            row.target_outage.to_string(),
            r.gamma.to_string(),
            r.empirical_outage.to_string(),
            r.analytic_outage.to_string(),
            r.abs_gap.to_string(),
            r.binomial_stderr.to_string(),
            r.ks_distance.map(|k| k.to_string()).unwrap_or_default(),
            num_samples.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Solve every listed target combination.
    Solve,
    /// Sweep one target axis.
    Sweep,
    /// Monte Carlo check of the outage approximation.
    Validate,
}

#[derive(Debug, Parser)]
#[command(
    name = "ssris",
    version,
    about = "Minimum element counts for self-sustainable RIS"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in configuration: fig2a, fig2b, fig3a or fig3b.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Output CSV path (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Monte Carlo seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub streams: Option<usize>,
    /// Exit with status 2 if any point fails to solve.
    #[arg(long, global = true)]
    pub strict: bool,
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok = 0,
    ValidationError = 1,
    PointFailure = 2,
}

impl Cli {
    pub fn load_config(&self) -> Result<RunConfig> {
        let mut config = match (&self.config, &self.preset) {
            (Some(path), _) => RunConfig::from_path(path).map_err(|e| match e {
                Error::Io(io) => Error::config("--config", format!("{}: {io}", path.display())),
                other => other,
            })?,
            (None, Some(name)) => RunConfig::preset(name)?,
            (None, None) => RunConfig::from_json("{}")?,
        };
        if let Some(out) = &self.out {
            config.output_path = Some(out.clone());
        }
        if let Some(seed) = self.seed {
            config.mc.config.seed = seed;
        }
        if let Some(streams) = self.streams {
            config.mc.config.num_streams = streams;
        }
        config.validate()?;
        Ok(config)
    }
}

fn emit(path: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut file = std::io::BufWriter::new(std::fs::File::create(p)?);
            write(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)
        }
    }
}

/// Runs one command end to end.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let config = cli.load_config()?;
    let path = config.output_path.as_deref();
    match cli.command {
        Command::Solve | Command::Sweep => {
            let rows = if cli.command == Command::Solve {
                cmd_solve(&config)?
            } else {
                cmd_sweep(&config)?
            };
            emit(path, |w| write_rows(w, &rows))?;
            let failed = rows.iter().any(|r| r.outcome.is_err());
            Ok(if cli.strict && failed {
                Outcome::PointFailure
            } else {
                Outcome::Ok
            })
        }
        Command::Validate => {
            let rows = cmd_validate(&config)?;
            emit(path, |w| {
                write_validation(w, &rows, config.mc.config.num_samples)
            })?;
            Ok(Outcome::Ok)
        }
    }
}
