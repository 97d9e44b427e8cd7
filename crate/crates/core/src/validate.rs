//! Monte Carlo and matrix-level oracles.
//!
//! Randomness is counter based: sample block `b` is always drawn from the
//! ChaCha8 stream `b` of the configured seed, whichever worker happens to
//! process it. Integer counts are summed and floating-point statistics are
//! reduced in block order, so a report depends only on `(seed,
//! num_samples)` and never on `num_streams`.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DerivedConstants, LinkGeometry, SystemParams};
use crate::outage::{self, OutageModel};
use crate::phys::{self, CVector, ReferencePhases, C64, HALF_WAVELENGTH};

/// Samples per RNG stream.
pub const BLOCK_SAMPLES: u64 = 1 << 16;

/// Relative tolerance of the matrix-pipeline identity checks.
pub const IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct McConfig {
    pub num_samples: u64,
    pub seed: u64,
    /// Worker threads. Has no influence on the results.
    pub num_streams: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            num_samples: 1_000_000,
            seed: 0,
            num_streams: 4,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_samples == 0 {
            return Err(Error::invalid("num_samples", "must be >= 1"));
        }
        if self.num_streams == 0 {
            return Err(Error::invalid("num_streams", "must be >= 1"));
        }
        Ok(())
    }

    fn num_blocks(&self) -> u64 {
        self.num_samples.div_ceil(BLOCK_SAMPLES)
    }

    fn block_len(&self, block: u64) -> u64 {
        (self.num_samples - block * BLOCK_SAMPLES).min(BLOCK_SAMPLES)
    }

    /// Generator for sample block `block`.
    pub fn block_rng(&self, block: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(block);
        rng
    }

    fn run<T: Send>(&self, job: impl Fn(u64) -> T + Sync + Send) -> Result<Vec<T>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.num_streams)
            .build()
            .map_err(|e| Error::invalid("num_streams", e.to_string()))?;
        Ok(pool.install(|| (0..self.num_blocks()).into_par_iter().map(&job).collect()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McReport {
    pub num_elements: usize,
    pub gamma: f64,
    pub empirical_outage: f64,
    pub analytic_outage: f64,
    /// `|empirical - analytic|`.
    pub abs_gap: f64,
    /// `√(p̂(1-p̂)/n)`.
    pub binomial_stderr: f64,
    /// Kolmogorov distance between the sampled `Y` and the truncated-Gaussian CDF.
    pub ks_distance: Option<f64>,
}

/// `g̃ ~ CN(0, I_M)`: real and imaginary parts each of variance ½.
pub fn sample_fading<R: Rng + ?Sized>(m: usize, rng: &mut R) -> CVector {
    CVector::from_fn(m, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
    })
}

/// `Y = Σ|g̃_m|` drawn the same way as [`sample_fading`] without allocating.
fn sample_y<R: Rng + ?Sized>(m: usize, rng: &mut R) -> f64 {
    (0..m)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            (re * re + im * im).sqrt() * FRAC_1_SQRT_2
        })
        .sum()
}

/// All `num_samples` draws of `Y`, in block order.
pub fn sample_y_values(m: usize, cfg: &McConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    if m == 0 {
        return Err(Error::invalid("m", "element count must be >= 1"));
    }
    let blocks = cfg.run(|b| {
        let mut rng = cfg.block_rng(b);
        (0..cfg.block_len(b))
            .map(|_| sample_y(m, &mut rng))
            .collect::<Vec<_>>()
    })?;
    Ok(blocks.concat())
}

/// Largest gap between the empirical CDF of `samples` and `cdf`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            let f = cdf(y);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

fn report(m: usize, gamma: f64, outages: u64, n: u64, analytic: f64, ks: Option<f64>) -> McReport {
    let p = outages as f64 / n as f64;
    McReport {
        num_elements: m,
        gamma,
        empirical_outage: p,
        analytic_outage: analytic,
        abs_gap: (p - analytic).abs(),
        binomial_stderr: (p * (1.0 - p) / n as f64).sqrt(),
        ks_distance: ks,
    }
}

fn outage_counts(ys: &[f64], gammas: &[f64], n_gamma0: f64) -> Vec<u64> {
    let mut counts = vec![0u64; gammas.len()];
    for &y in ys {
        let snr = n_gamma0 * y * y;
        for (c, &g) in counts.iter_mut().zip(gammas) {
            *c += u64::from(snr < g);
        }
    }
    counts
}

/// Fraction of fading draws whose optimal SNR `Γ0 N Y²` falls below `gamma`.
pub fn empirical_outage(
    params: &SystemParams,
    geom: &LinkGeometry,
    m: usize,
    gamma: f64,
    cfg: &McConfig,
) -> Result<McReport> {
    cfg.validate()?;
    if m == 0 {
        return Err(Error::invalid("m", "element count must be >= 1"));
    }
    let consts = DerivedConstants::new(params, geom)?;
    let n_gamma0 = params.num_bs_antennas as f64 * consts.gamma0;
    let counts = cfg.run(|b| {
        let mut rng = cfg.block_rng(b);
        (0..cfg.block_len(b))
            .map(|_| {
                let y = sample_y(m, &mut rng);
                u64::from(n_gamma0 * y * y < gamma)
            })
            .sum::<u64>()
    })?;
    let model = OutageModel::new(m as f64)?;
    let analytic = outage::outage_probability(gamma, &model, consts.gamma0, params.num_bs_antennas);
    Ok(report(
        m,
        gamma,
        counts.iter().sum(),
        cfg.num_samples,
        analytic,
        None,
    ))
}

/// [`empirical_outage`] for several thresholds sharing one sample set, each
/// report also carrying the Kolmogorov distance of that sample set.
pub fn empirical_outage_curve(
    params: &SystemParams,
    geom: &LinkGeometry,
    m: usize,
    gammas: &[f64],
    cfg: &McConfig,
) -> Result<Vec<McReport>> {
    let consts = DerivedConstants::new(params, geom)?;
    let n_gamma0 = params.num_bs_antennas as f64 * consts.gamma0;
    let ys = sample_y_values(m, cfg)?;
    let model = OutageModel::new(m as f64)?;
    let ks = ks_distance(&ys, |y| outage::truncated_gaussian_cdf(y, &model));
    let counts = outage_counts(&ys, gammas, n_gamma0);
    Ok(gammas
        .iter()
        .zip(counts)
        .map(|(&g, c)| {
            let analytic =
                outage::outage_probability(g, &model, consts.gamma0, params.num_bs_antennas);
            report(m, g, c, cfg.num_samples, analytic, Some(ks))
        })
        .collect())
}

/// Threshold `γ` at which the analytic outage equals `p`.
pub fn gamma_for_outage(p: f64, m: usize, gamma0: f64, n_antennas: usize) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid("p", format!("must lie in (0, 1), got {p}")));
    }
    let model = OutageModel::new(m as f64)?;
    let (mut lo, mut hi) = (0.0, model.mu_y + 40.0 * model.sigma_y);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if outage::truncated_gaussian_cdf(mid, &model) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let y = 0.5 * (lo + hi);
    Ok(n_antennas as f64 * gamma0 * y * y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialFailure {
    pub trial: u64,
    pub snr_rel_err: f64,
    pub power_rel_err: f64,
    /// `1 - |a_N(ψ)ᴴ w| / √N`, NLOS only.
    pub collinearity_err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IdentityReport {
    pub trials: u64,
    pub max_snr_rel_err: f64,
    pub max_power_rel_err: f64,
    pub max_collinearity_err: f64,
    /// Trials (stream indices of the report's seed) that missed a tolerance.
    pub failures: Vec<TrialFailure>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn record(&mut self, trial: u64, snr_err: f64, power_err: f64, collinearity: Option<f64>) {
        self.trials += 1;
        self.max_snr_rel_err = self.max_snr_rel_err.max(snr_err);
        self.max_power_rel_err = self.max_power_rel_err.max(power_err);
        self.max_collinearity_err = self.max_collinearity_err.max(collinearity.unwrap_or(0.0));
        let bad = |e: f64| !(e <= IDENTITY_TOL);
        if bad(snr_err) || bad(power_err) || collinearity.is_some_and(bad) {
            self.failures.push(TrialFailure {
                trial,
                snr_rel_err: snr_err,
                power_rel_err: power_err,
                collinearity_err: collinearity,
            });
        }
    }
}

fn rel_err(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs()
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Angles inside ±80° and distances in 5–50 m.
pub fn random_geometry<R: Rng + ?Sized>(rng: &mut R) -> LinkGeometry {
    let limit = 80f64.to_radians();
    LinkGeometry::from_raw(
        rng.random_range(-limit..limit),
        rng.random_range(-limit..limit),
        rng.random_range(5.0..50.0),
        rng.random_range(5.0..50.0),
    )
    .expect("angles drawn inside the valid range")
}

fn random_phases<R: Rng + ?Sized>(rng: &mut R) -> ReferencePhases {
    let tau = std::f64::consts::TAU;
    ReferencePhases {
        bs_ris: rng.random_range(0.0..tau),
        ris_ue: rng.random_range(0.0..tau),
    }
}

/// Runs optimal phases, MRT and the explicit link simulation on LOS
/// channels and checks `Γ = Γ0 N M²` and `P_Rc = P N M ρ_sr`.
///
/// Trial 0 uses `geom`; later trials draw a fresh geometry. Every trial
/// draws its own reference phases.
pub fn verify_los_identities(
    params: &SystemParams,
    geom: &LinkGeometry,
    n: usize,
    m: usize,
    trials: u64,
    seed: u64,
) -> Result<IdentityReport> {
    let params = SystemParams {
        num_bs_antennas: n,
        ..*params
    };
    let mut report = IdentityReport::default();
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let g = if trial == 0 {
            *geom
        } else {
            random_geometry(&mut rng)
        };
        let phases = random_phases(&mut rng);
        let consts = DerivedConstants::new(&params, &g)?;
        let chan = phys::los_channel(&params, &g, m, phases)?;
        let phi = phys::optimal_phases(&chan.u1)?;
        let w = phys::mrt_precoder(&chan.cascaded, &phi)?;
        let link = phys::simulate_link(&params, &chan, &phi, &w)?;
        let (nf, mf) = (n as f64, m as f64);
        report.record(
            trial,
            rel_err(link.snr, consts.gamma0 * nf * mf * mf),
            rel_err(
                link.harvested_power_w,
                params.tx_power_w * nf * mf * consts.rho_sr,
            ),
            None,
        );
    }
    Ok(report)
}

/// Same pipeline under Rayleigh fading `g̃`: checks
/// `Γ = Γ0 N (Σ|g̃_m|)²`, that the MRT beam is collinear with `a_N(ψ)` and
/// that the surface still collects `P N M ρ_sr`.
pub fn verify_nlos_identities(
    params: &SystemParams,
    geom: &LinkGeometry,
    n: usize,
    m: usize,
    trials: u64,
    seed: u64,
) -> Result<IdentityReport> {
    let params = SystemParams {
        num_bs_antennas: n,
        ..*params
    };
    let consts = DerivedConstants::new(&params, geom)?;
    let a_n = phys::array_response(n, geom.psi_rad, HALF_WAVELENGTH).0;
    let mut report = IdentityReport::default();
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let fading = sample_fading(m, &mut rng);
        let chan = phys::nlos_channel(
            &params,
            geom,
            &fading,
            rng.random_range(0.0..std::f64::consts::TAU),
        )?;
        let phi = phys::optimal_phases(&chan.u1)?;
        let w = phys::mrt_precoder(&chan.cascaded, &phi)?;
        let link = phys::simulate_link(&params, &chan, &phi, &w)?;
        let (nf, mf) = (n as f64, m as f64);
        let y: f64 = fading.iter().map(|g| g.norm()).sum();
        report.record(
            trial,
            rel_err(link.snr, consts.gamma0 * nf * y * y),
            rel_err(
                link.harvested_power_w,
                params.tx_power_w * nf * mf * consts.rho_sr,
            ),
            Some(1.0 - a_n.dotc(&w).norm() / nf.sqrt()),
        );
    }
    Ok(report)
}
