//! Minimum element counts under self-sustainability and rate/outage targets.
//!
//! | problem | scheme | surface–UE link | method |
//! |---------|--------|-----------------|--------|
//! | P1 | ES | LOS  | closed form |
//! | P2 | TS | LOS  | closed form |
//! | P3 | ES | NLOS | minimum root of the outage gap |
//! | P4 | TS | NLOS | `τ` fixed at `α/(1+α)`, then as P3 |
//!
//! Every solve returns a continuous optimum plus its integer rounding (see
//! [`integerize`]). [`oracle`] brute-forces the integer problem for
//! comparison.

pub mod oracle;
pub mod root;

use crate::error::{Error, Result};
use crate::model::{DerivedConstants, LinkGeometry, SystemParams};
use crate::outage::{self, OutageModel};
use crate::{Condition, Scheme};

pub use oracle::oracle_grid_search;
pub use root::{min_root, Root, Tolerance, M_MAX};

/// Relative slack tolerated when re-checking constraints at integer counts.
const INT_TOL: f64 = 1e-9;

/// Cap on extra elements added when an integer point misses a constraint.
const MAX_INT_BUMPS: u64 = 1024;

/// The scalars every element-count problem depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub alpha: f64,
    pub gamma0: f64,
    pub num_bs_antennas: usize,
    pub bandwidth_hz: f64,
}

impl Scenario {
    pub fn new(params: &SystemParams, geom: &LinkGeometry) -> Result<Self> {
        let consts = DerivedConstants::new(params, geom)?;
        Ok(Scenario {
            alpha: consts.alpha,
            gamma0: consts.gamma0,
            num_bs_antennas: params.num_bs_antennas,
            bandwidth_hz: params.bandwidth_hz,
        })
    }

    fn n_gamma0(&self) -> f64 {
        self.num_bs_antennas as f64 * self.gamma0
    }

    /// Harvesting time share that makes the TS budget exactly balance.
    pub fn tau_star(&self) -> f64 {
        self.alpha / (1.0 + self.alpha)
    }
}

/// What the link has to deliver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub rate_bps: f64,
    /// Outage margin, NLOS only.
    pub epsilon: Option<f64>,
    /// SNR threshold implied by the rate (and `τ` for TS).
    pub gamma_threshold: f64,
}

/// Constraint residuals. Positive slack means the constraint holds with room.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Diagnostics {
    /// `harvested / consumed - 1`.
    pub ss_slack: f64,
    /// `achieved rate / R0 - 1` (LOS).
    pub rate_slack: Option<f64>,
    /// `1 - P_out / ε` (NLOS).
    pub outage_slack: Option<f64>,
    /// `f2 - f1` at the reported count (NLOS).
    pub root_gap: Option<f64>,
}

impl Diagnostics {
    /// True when every constraint holds up to a relative slack of `tol`.
    pub fn feasible(&self, tol: f64) -> bool {
        self.ss_slack >= -tol
            && self.rate_slack.is_none_or(|s| s >= -tol)
            && self.outage_slack.is_none_or(|s| s >= -tol)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityResult {
    pub scheme: Scheme,
    pub condition: Condition,
    /// Reflecting elements; for TS this is the whole surface.
    pub m_reflect: f64,
    /// Harvesting-only elements (always 0 for TS).
    pub m_harvest: f64,
    pub m_total: f64,
    pub m_reflect_int: u64,
    pub m_harvest_int: u64,
    pub m_total_int: u64,
    /// Harvesting time share (0 for ES).
    pub tau: f64,
    pub scenario: Scenario,
    pub target: Target,
    /// Residuals at the continuous optimum.
    pub diagnostics: Diagnostics,
    /// Residuals at the integer counts.
    pub integer_diagnostics: Diagnostics,
}

fn check_rate(rate_bps: f64) -> Result<()> {
    if rate_bps.is_finite() && rate_bps > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "rate_bps",
            format!("must be finite and > 0, got {rate_bps}"),
        ))
    }
}

fn check_finite_count(value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InfeasibleWithinCap { cap: f64::MAX })
    }
}

/// Residuals of both constraints for a candidate operating point.
pub fn evaluate(
    scenario: &Scenario,
    scheme: Scheme,
    condition: Condition,
    target: &Target,
    m_reflect: f64,
    m_harvest: f64,
    tau: f64,
) -> Diagnostics {
    let ss_slack = match scheme {
        Scheme::ES => m_harvest / (scenario.alpha * m_reflect) - 1.0,
        Scheme::TS => tau / ((1.0 - tau) * scenario.alpha) - 1.0,
    };
    let reflect_share = match scheme {
        Scheme::ES => 1.0,
        Scheme::TS => 1.0 - tau,
    };
    match condition {
        Condition::LOS => {
            let snr = scenario.n_gamma0() * m_reflect * m_reflect;
            let rate = reflect_share * scenario.bandwidth_hz * snr.ln_1p() / std::f64::consts::LN_2;
            Diagnostics {
                ss_slack,
                rate_slack: Some(rate / target.rate_bps - 1.0),
                outage_slack: None,
                root_gap: None,
            }
        }
        Condition::NLOS => {
            let eps = target.epsilon.unwrap_or(f64::NAN);
            let p_out = OutageModel::new(m_reflect)
                .map(|model| {
                    outage::outage_probability(
                        target.gamma_threshold,
                        &model,
                        scenario.gamma0,
                        scenario.num_bs_antennas,
                    )
                })
                .unwrap_or(1.0);
            Diagnostics {
                ss_slack,
                rate_slack: None,
                outage_slack: Some(1.0 - p_out / eps),
                root_gap: Some(outage::outage_gap(
                    m_reflect,
                    target.gamma_threshold,
                    scenario.gamma0,
                    scenario.num_bs_antennas,
                    eps,
                )),
            }
        }
    }
}

/// Ceiling that leaves values within `INT_TOL` of an integer on that integer.
fn ceil_tol(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= INT_TOL * x.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

/// Rounds a continuous optimum up to whole elements and re-checks both
/// constraints there.
///
/// ES rounds the reflecting pool up first and then sizes the harvesting pool
/// for that integer reflecting pool, so the self-sustainability budget still
/// closes. If the rate/outage constraint is missed at the rounded count (only
/// possible through round-off), the reflecting pool grows one element at a
/// time.
pub fn integerize(result: &FeasibilityResult) -> FeasibilityResult {
    let scn = &result.scenario;
    let mut reflect = ceil_tol(result.m_reflect).max(1.0);
    let mut out = result.clone();
    for _ in 0..=MAX_INT_BUMPS {
        let harvest = match result.scheme {
            Scheme::ES => ceil_tol(scn.alpha * reflect),
            Scheme::TS => 0.0,
        };
        let diag = evaluate(
            scn,
            result.scheme,
            result.condition,
            &result.target,
            reflect,
            harvest,
            result.tau,
        );
        out.m_reflect_int = reflect as u64;
        out.m_harvest_int = harvest as u64;
        out.m_total_int = out.m_reflect_int + out.m_harvest_int;
        out.integer_diagnostics = diag;
        if diag.feasible(INT_TOL) {
            break;
        }
        reflect += 1.0;
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn finish(
    scenario: Scenario,
    scheme: Scheme,
    condition: Condition,
    target: Target,
    m_reflect: f64,
    m_harvest: f64,
    tau: f64,
) -> Result<FeasibilityResult> {
    let m_reflect = check_finite_count(m_reflect)?;
    let m_harvest = check_finite_count(m_harvest)?;
    let diagnostics = evaluate(
        &scenario, scheme, condition, &target, m_reflect, m_harvest, tau,
    );
    let result = FeasibilityResult {
        scheme,
        condition,
        m_reflect,
        m_harvest,
        m_total: m_reflect + m_harvest,
        m_reflect_int: 0,
        m_harvest_int: 0,
        m_total_int: 0,
        tau,
        scenario,
        target,
        diagnostics,
        integer_diagnostics: Diagnostics::default(),
    };
    Ok(integerize(&result))
}

/// P1: ES, LOS. `M_Rf = √(γ_ES / (N Γ0))`, `M_Hr = α M_Rf`.
pub fn solve_es_los(scn: &Scenario, rate_bps: f64) -> Result<FeasibilityResult> {
    check_rate(rate_bps)?;
    let gamma = outage::snr_threshold_es(rate_bps, scn.bandwidth_hz)?;
    let m_rf = (gamma / scn.n_gamma0()).sqrt();
    let target = Target {
        rate_bps,
        epsilon: None,
        gamma_threshold: gamma,
    };
    finish(
        *scn,
        Scheme::ES,
        Condition::LOS,
        target,
        m_rf,
        scn.alpha * m_rf,
        0.0,
    )
}

/// P2: TS, LOS. `τ* = α/(1+α)`, `M = √(γ_TS(τ*) / (N Γ0))`.
pub fn solve_ts_los(scn: &Scenario, rate_bps: f64) -> Result<FeasibilityResult> {
    check_rate(rate_bps)?;
    let tau = scn.tau_star();
    let gamma = outage::snr_threshold_ts(rate_bps, scn.bandwidth_hz, tau)?;
    let m = (gamma / scn.n_gamma0()).sqrt();
    let target = Target {
        rate_bps,
        epsilon: None,
        gamma_threshold: gamma,
    };
    finish(*scn, Scheme::TS, Condition::LOS, target, m, 0.0, tau)
}

fn outage_root(scn: &Scenario, gamma: f64, epsilon: f64) -> Result<Root> {
    let n = scn.num_bs_antennas;
    min_root(
        |m| outage::outage_gap(m, gamma, scn.gamma0, n, epsilon),
        M_MAX,
        Tolerance::default(),
    )
}

/// P3: ES, NLOS. `M_Rf` is the smallest root of `f2 - f1`.
pub fn solve_es_nlos(scn: &Scenario, rate_bps: f64, epsilon: f64) -> Result<FeasibilityResult> {
    check_rate(rate_bps)?;
    outage::check_epsilon(epsilon)?;
    let gamma = outage::snr_threshold_es(rate_bps, scn.bandwidth_hz)?;
    let root = outage_root(scn, gamma, epsilon)?;
    let target = Target {
        rate_bps,
        epsilon: Some(epsilon),
        gamma_threshold: gamma,
    };
    finish(
        *scn,
        Scheme::ES,
        Condition::NLOS,
        target,
        root.value,
        scn.alpha * root.value,
        0.0,
    )
}

/// P4: TS, NLOS. Outage grows with `τ`, so `τ` sits at its lower limit
/// `α/(1+α)` and `M` is the smallest root for the resulting threshold.
pub fn solve_ts_nlos(scn: &Scenario, rate_bps: f64, epsilon: f64) -> Result<FeasibilityResult> {
    check_rate(rate_bps)?;
    outage::check_epsilon(epsilon)?;
    let tau = scn.tau_star();
    let gamma = outage::snr_threshold_ts(rate_bps, scn.bandwidth_hz, tau)?;
    let root = outage_root(scn, gamma, epsilon)?;
    let target = Target {
        rate_bps,
        epsilon: Some(epsilon),
        gamma_threshold: gamma,
    };
    finish(
        *scn,
        Scheme::TS,
        Condition::NLOS,
        target,
        root.value,
        0.0,
        tau,
    )
}

/// Dispatches to the problem matching `(scheme, condition)`.
pub fn solve(
    scn: &Scenario,
    scheme: Scheme,
    condition: Condition,
    rate_bps: f64,
    epsilon: Option<f64>,
) -> Result<FeasibilityResult> {
    let need_eps = || epsilon.ok_or_else(|| Error::invalid("epsilon", "required for NLOS"));
    match (scheme, condition) {
        (Scheme::ES, Condition::LOS) => solve_es_los(scn, rate_bps),
        (Scheme::TS, Condition::LOS) => solve_ts_los(scn, rate_bps),
        (Scheme::ES, Condition::NLOS) => solve_es_nlos(scn, rate_bps, need_eps()?),
        (Scheme::TS, Condition::NLOS) => solve_ts_nlos(scn, rate_bps, need_eps()?),
    }
}

pub fn solve_p1(
    params: &SystemParams,
    geom: &LinkGeometry,
    rate_bps: f64,
) -> Result<FeasibilityResult> {
    solve_es_los(&Scenario::new(params, geom)?, rate_bps)
}

pub fn solve_p2(
    params: &SystemParams,
    geom: &LinkGeometry,
    rate_bps: f64,
) -> Result<FeasibilityResult> {
    solve_ts_los(&Scenario::new(params, geom)?, rate_bps)
}

pub fn solve_p3(
    params: &SystemParams,
    geom: &LinkGeometry,
    rate_bps: f64,
    epsilon: f64,
) -> Result<FeasibilityResult> {
    solve_es_nlos(&Scenario::new(params, geom)?, rate_bps, epsilon)
}

pub fn solve_p4(
    params: &SystemParams,
    geom: &LinkGeometry,
    rate_bps: f64,
    epsilon: f64,
) -> Result<FeasibilityResult> {
    solve_ts_nlos(&Scenario::new(params, geom)?, rate_bps, epsilon)
}

/// Total LOS element counts `(M_ES, M_TS)`:
/// `(1+α)√((2^{R0/B}-1)/(NΓ0))` and `√((2^{R0(1+α)/B}-1)/(NΓ0))`.
pub fn closed_form_totals(scn: &Scenario, rate_bps: f64) -> Result<(f64, f64)> {
    check_rate(rate_bps)?;
    let r = rate_bps / scn.bandwidth_hz * std::f64::consts::LN_2;
    let m_es = (1.0 + scn.alpha) * (r.exp_m1() / scn.n_gamma0()).sqrt();
    let m_ts = ((r * (1.0 + scn.alpha)).exp_m1() / scn.n_gamma0()).sqrt();
    Ok((m_es, m_ts))
}
