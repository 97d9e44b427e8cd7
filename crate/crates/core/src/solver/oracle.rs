//! Exhaustive integer search used to check the closed forms and the NLOS
//! root finder.
//!
//! Constraints are evaluated from first principles: harvested power per
//! element comes from an explicit one-element channel with MRT, the LOS rate
//! from [`phys::rate_los`], outage from [`outage::outage_probability`]. None
//! of `α`, `τ*` or the closed-form counts is used to steer the search.

use crate::error::{Error, Result};
use crate::model::{LinkGeometry, SystemParams};
use crate::outage::{self, OutageModel};
use crate::phys::{self, ReferencePhases};
use crate::{Condition, Scheme};

use super::{evaluate, Diagnostics, FeasibilityResult, Scenario, Target};

/// Spacing of the TS time-share grid.
pub const TAU_STEP: f64 = 1e-4;

/// Relative slack for constraints that are met with equality up to round-off.
const ORACLE_TOL: f64 = 1e-12;

struct Link<'a> {
    params: &'a SystemParams,
    geom: &'a LinkGeometry,
    rate_bps: f64,
    epsilon: Option<f64>,
    /// Power one harvesting element collects under the MRT beam.
    harvest_per_element_w: f64,
    scn: Scenario,
}

impl Link<'_> {
    /// Energy balance over one frame: `share_h · M_h · P_elem · η ≥ share_r · M_r · P0`.
    fn self_sustaining(
        &self,
        harvest_share: f64,
        m_harvest: f64,
        reflect_share: f64,
        m_reflect: f64,
    ) -> bool {
        let gained =
            harvest_share * m_harvest * self.harvest_per_element_w * self.params.harvest_efficiency;
        let spent = reflect_share * m_reflect * self.params.element_power_w;
        gained >= spent * (1.0 - ORACLE_TOL)
    }

    fn meets_target(&self, condition: Condition, m_reflect: f64, tau: f64) -> Result<bool> {
        let check = TargetCheck::new(self, condition, m_reflect)?;
        let gamma = outage::snr_threshold_ts(self.rate_bps, self.params.bandwidth_hz, tau)?;
        Ok(check.holds(self, tau, gamma))
    }

    fn result(
        &self,
        scheme: Scheme,
        condition: Condition,
        m_reflect: u64,
        m_harvest: u64,
        tau: f64,
    ) -> Result<FeasibilityResult> {
        let target = Target {
            rate_bps: self.rate_bps,
            epsilon: self.epsilon,
            gamma_threshold: outage::snr_threshold_ts(
                self.rate_bps,
                self.params.bandwidth_hz,
                tau,
            )?,
        };
        let (r, h) = (m_reflect as f64, m_harvest as f64);
        let diagnostics: Diagnostics = evaluate(&self.scn, scheme, condition, &target, r, h, tau);
        Ok(FeasibilityResult {
            scheme,
            condition,
            m_reflect: r,
            m_harvest: h,
            m_total: r + h,
            m_reflect_int: m_reflect,
            m_harvest_int: m_harvest,
            m_total_int: m_reflect + m_harvest,
            tau,
            scenario: self.scn,
            target,
            diagnostics,
            integer_diagnostics: diagnostics,
        })
    }
}

/// Rate or outage check at a fixed element count, reusable across `τ`.
enum TargetCheck {
    /// Rate with the surface reflecting all the time.
    Los {
        full_rate_bps: f64,
    },
    Nlos {
        model: OutageModel,
        epsilon: f64,
    },
}

impl TargetCheck {
    fn new(link: &Link<'_>, condition: Condition, m_reflect: f64) -> Result<Self> {
        Ok(match condition {
            Condition::LOS => TargetCheck::Los {
                full_rate_bps: phys::rate_los(link.params, link.geom, m_reflect)?,
            },
            Condition::NLOS => TargetCheck::Nlos {
                model: OutageModel::new(m_reflect)?,
                epsilon: link
                    .epsilon
                    .ok_or_else(|| Error::invalid("epsilon", "required for NLOS"))?,
            },
        })
    }

    /// `gamma` is the SNR threshold for reflecting a `1 - τ` share of the time.
    fn holds(&self, link: &Link<'_>, tau: f64, gamma: f64) -> bool {
        match self {
            TargetCheck::Los { full_rate_bps } => {
                (1.0 - tau) * full_rate_bps >= link.rate_bps * (1.0 - ORACLE_TOL)
            }
            TargetCheck::Nlos { model, epsilon } => {
                let p = outage::outage_probability(
                    gamma,
                    model,
                    link.scn.gamma0,
                    link.params.num_bs_antennas,
                );
                p <= epsilon * (1.0 + ORACLE_TOL)
            }
        }
    }
}

/// True integer minimum of the total element count with at most `m_cap`
/// elements in total.
///
/// ES scans reflecting pools upward and, for each one meeting the target,
/// grows the harvesting pool until the energy balance closes. TS scans `M`
/// and, for each `M`, every `τ = k · 1e-4`.
pub fn oracle_grid_search(
    params: &SystemParams,
    geom: &LinkGeometry,
    rate_bps: f64,
    epsilon: Option<f64>,
    scheme: Scheme,
    condition: Condition,
    m_cap: u64,
) -> Result<FeasibilityResult> {
    let single = phys::los_channel(params, geom, 1, ReferencePhases::default())?;
    let harvest_per_element_w = phys::beamform(params, &single)?.harvested_power_w;
    let link = Link {
        params,
        geom,
        rate_bps,
        epsilon,
        harvest_per_element_w,
        scn: Scenario::new(params, geom)?,
    };
    let infeasible = Error::InfeasibleWithinCap { cap: m_cap as f64 };

    match scheme {
        Scheme::ES => {
            let mut best: Option<(u64, u64)> = None;
            for r in 1..=m_cap {
                if best.is_some_and(|(br, bh)| r >= br + bh) {
                    break;
                }
                if !link.meets_target(condition, r as f64, 0.0)? {
                    continue;
                }
                let budget = best.map_or(m_cap, |(br, bh)| br + bh - 1).min(m_cap);
                let found = (0..=budget.saturating_sub(r))
                    .find(|&h| link.self_sustaining(1.0, h as f64, 1.0, r as f64));
                if let Some(h) = found {
                    best = Some((r, h));
                }
            }
            let (r, h) = best.ok_or(infeasible)?;
            link.result(scheme, condition, r, h, 0.0)
        }
        Scheme::TS => {
            let steps = (1.0 / TAU_STEP).round() as u64;
            let grid = (0..steps)
                .map(|k| {
                    let tau = k as f64 * TAU_STEP;
                    outage::snr_threshold_ts(rate_bps, params.bandwidth_hz, tau).map(|g| (tau, g))
                })
                .collect::<Result<Vec<_>>>()?;
            for m in 1..=m_cap {
                let mf = m as f64;
                let check = TargetCheck::new(&link, condition, mf)?;
                for &(tau, gamma) in &grid {
                    if link.self_sustaining(tau, mf, 1.0 - tau, mf)
                        && check.holds(&link, tau, gamma)
                    {
                        return link.result(scheme, condition, m, 0, tau);
                    }
                }
            }
            Err(infeasible)
        }
    }
}
