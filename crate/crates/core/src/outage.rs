//! Truncated-Gaussian outage model for the NLOS surface–UE link.
//!
//! Under i.i.d. Rayleigh fading the optimal SNR is `Γ = Γ0 N Y²` with
//! `Y = Σ|g̃_m|`. `Y` is modelled as a Gaussian truncated to `y ≥ 0` with
//! `μ_Y = M√π/2` and `σ_Y² = M(4-π)/4`.
//!
//! Outage margins go down to 1e-9, so every expression that would subtract
//! two numbers close to one is rewritten in terms of upper-tail `Q` values
//! (see [`truncated_gaussian_cdf`] and [`outage_gap`]).

use std::f64::consts::{LN_2, PI, SQRT_2};

use libm::erfc;

use crate::error::{Error, Result};

/// Smallest outage margin the solvers accept.
pub const MIN_EPSILON: f64 = 1e-9;
/// Largest outage margin the solvers accept.
pub const MAX_EPSILON: f64 = 0.5;

/// Gaussian tail probability `Q(x) = ½ erfc(x/√2)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Truncated-Gaussian model of `Y` for a given (possibly fractional) number
/// of reflecting elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageModel {
    pub m_elements: f64,
    pub mu_y: f64,
    pub sigma_y: f64,
    /// Truncation normaliser `1 / Q(-μ_Y/σ_Y)`.
    pub c_norm: f64,
}

impl OutageModel {
    pub fn new(m_elements: f64) -> Result<Self> {
        if !(m_elements.is_finite() && m_elements > 0.0) {
            return Err(Error::invalid(
                "m_elements",
                format!("must be finite and > 0, got {m_elements}"),
            ));
        }
        let mu_y = m_elements * PI.sqrt() / 2.0;
        let sigma_y = (m_elements * (4.0 - PI) / 4.0).sqrt();
        Ok(OutageModel {
            m_elements,
            mu_y,
            sigma_y,
            c_norm: 1.0 / q_function(-mu_y / sigma_y),
        })
    }

    /// `μ_Y / σ_Y = √(Mπ/(4-π))`.
    pub fn snr_ratio(&self) -> f64 {
        self.mu_y / self.sigma_y
    }
}

/// `F_Y(y) = 1 - C Q((y - μ_Y)/σ_Y)` for `y ≥ 0`, zero below.
///
/// Evaluated as `(Q(μ/σ - y/σ) - Q(μ/σ)) / Q(-μ/σ)`, which is the same
/// quantity without cancellation in the lower tail and exactly 0 at `y = 0`.
pub fn truncated_gaussian_cdf(y: f64, model: &OutageModel) -> f64 {
    if y.is_nan() {
        return f64::NAN;
    }
    if y <= 0.0 {
        return 0.0;
    }
    let a = model.snr_ratio();
    let b = y / model.sigma_y;
    let value = (q_function(a - b) - q_function(a)) * model.c_norm;
    value.clamp(0.0, 1.0)
}

/// Operating point of an outage-constrained link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageSpec {
    pub gamma_threshold: f64,
    pub epsilon: f64,
    pub rate_target_bps: f64,
}

impl OutageSpec {
    pub fn new(gamma_threshold: f64, epsilon: f64, rate_target_bps: f64) -> Result<Self> {
        if !(gamma_threshold > 0.0 && gamma_threshold.is_finite()) {
            return Err(Error::invalid(
                "gamma_threshold",
                format!("must be > 0, got {gamma_threshold}"),
            ));
        }
        check_epsilon(epsilon)?;
        if !(rate_target_bps >= 0.0) {
            return Err(Error::invalid(
                "rate_target_bps",
                format!("must be >= 0, got {rate_target_bps}"),
            ));
        }
        Ok(OutageSpec {
            gamma_threshold,
            epsilon,
            rate_target_bps,
        })
    }
}

/// Rejects margins outside the range where the approximation and the tail
/// arithmetic are trusted.
pub fn check_epsilon(epsilon: f64) -> Result<()> {
    if (MIN_EPSILON..=MAX_EPSILON).contains(&epsilon) {
        Ok(())
    } else {
        Err(Error::invalid(
            "epsilon",
            format!("must lie in [{MIN_EPSILON:e}, {MAX_EPSILON}], got {epsilon}"),
        ))
    }
}

/// `P{Γ < γ} = F_Y(√(γ / (N Γ0)))`.
pub fn outage_probability(gamma: f64, model: &OutageModel, gamma0: f64, n_antennas: usize) -> f64 {
    if gamma <= 0.0 {
        return 0.0;
    }
    truncated_gaussian_cdf((gamma / (n_antennas as f64 * gamma0)).sqrt(), model)
}

/// SNR needed for `R0` when reflecting all the time: `2^{R0/B} - 1`.
pub fn snr_threshold_es(rate_bps: f64, bandwidth_hz: f64) -> Result<f64> {
    snr_threshold_ts(rate_bps, bandwidth_hz, 0.0)
}

/// SNR needed for `R0` when reflecting a `1 - τ` share of the time.
pub fn snr_threshold_ts(rate_bps: f64, bandwidth_hz: f64, tau: f64) -> Result<f64> {
    if !(rate_bps >= 0.0 && rate_bps.is_finite()) {
        return Err(Error::invalid(
            "rate_bps",
            format!("must be finite and >= 0, got {rate_bps}"),
        ));
    }
    if !(bandwidth_hz > 0.0) {
        return Err(Error::invalid(
            "bandwidth_hz",
            format!("must be > 0, got {bandwidth_hz}"),
        ));
    }
    if !(0.0..1.0).contains(&tau) {
        return Err(Error::invalid(
            "tau",
            format!("must lie in [0, 1), got {tau}"),
        ));
    }
    Ok((rate_bps / ((1.0 - tau) * bandwidth_hz) * LN_2).exp_m1())
}

/// Left-hand side of the expanded outage constraint,
/// `(1-ε) Q(-√(Mπ/(4-π)))`.
pub fn f1(m_rf: f64, epsilon: f64) -> f64 {
    (1.0 - epsilon) * q_function(-(m_rf * PI / (4.0 - PI)).sqrt())
}

/// Right-hand side of the expanded outage constraint,
/// `Q(2√(γ/(N Γ0 M (4-π))) - √(Mπ/(4-π)))`.
pub fn f2(m_rf: f64, gamma: f64, gamma0: f64, n: usize) -> f64 {
    let spread = 2.0 * (gamma / (n as f64 * gamma0 * m_rf * (4.0 - PI))).sqrt();
    q_function(spread - (m_rf * PI / (4.0 - PI)).sqrt())
}

/// `f2(M) - f1(M)`, rearranged as `Q(a) - Q(a - b) + ε Q(-a)` with
/// `a = √(Mπ/(4-π))` and `b = 2√(γ/(N Γ0 M (4-π)))`.
///
/// Nonnegative exactly when the outage constraint `P_out(γ; M) ≤ ε` holds.
pub fn outage_gap(m_rf: f64, gamma: f64, gamma0: f64, n: usize, epsilon: f64) -> f64 {
    let a = (m_rf * PI / (4.0 - PI)).sqrt();
    let b = 2.0 * (gamma / (n as f64 * gamma0 * m_rf * (4.0 - PI))).sqrt();
    q_function(a) - q_function(a - b) + epsilon * q_function(-a)
}
