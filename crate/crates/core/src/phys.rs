//! Channel construction, MRT precoding and phase-shift design.
//!
//! Two evaluation paths coexist on purpose: the analytic one (eigenpair of
//! the rank-1 Gram matrix `V = H Hᴴ`, then [`snr`]) and the explicit one
//! ([`simulate_link`]) that multiplies the matrices out. Tests hold them
//! against each other.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{DerivedConstants, LinkGeometry, SystemParams};
use crate::Condition;

pub type C64 = Complex<f64>;
pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;

/// Element spacing of both arrays, in wavelengths.
pub const HALF_WAVELENGTH: f64 = 0.5;

/// Unit-modulus steering vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayResponse(pub CVector);

impl ArrayResponse {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &CVector {
        &self.0
    }
}

/// Azimuth-only steering vector with linear phase progression
/// `exp(j 2π s i sin(angle))` over the horizontal element index.
///
/// All arrays here are coplanar with the scene, so the vertical index of a
/// planar array contributes no phase and a linear progression covers it.
pub fn array_response(size: usize, angle_rad: f64, spacing_wavelengths: f64) -> ArrayResponse {
    let step = 2.0 * std::f64::consts::PI * spacing_wavelengths * angle_rad.sin();
    ArrayResponse(CVector::from_fn(size, |i, _| {
        C64::from_polar(1.0, step * i as f64)
    }))
}

/// Reference phase offsets of the two LOS hops. They cancel in every power
/// and SNR expression.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ReferencePhases {
    pub bs_ris: f64,
    pub ris_ue: f64,
}

/// One realisation of the BS → surface → UE channel together with the
/// analytic dominant eigenpair of `V = H Hᴴ`.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// BS–surface channel `G`, N×M.
    pub bs_ris: CMatrix,
    /// Surface–UE channel `g`, length M.
    pub ris_ue: CVector,
    /// Cascaded channel `H = diag(g) Gᴴ`, M×N.
    pub cascaded: CMatrix,
    /// Small-scale fading `g̃` (NLOS only).
    pub fading: Option<CVector>,
    pub lambda1: f64,
    pub u1: CVector,
    pub condition: Condition,
}

impl ChannelRealization {
    pub fn num_antennas(&self) -> usize {
        self.bs_ris.nrows()
    }

    pub fn num_elements(&self) -> usize {
        self.bs_ris.ncols()
    }
}

fn bs_ris_channel(
    consts: &DerivedConstants,
    geom: &LinkGeometry,
    n: usize,
    m: usize,
    phase: f64,
) -> CMatrix {
    let a_n = array_response(n, geom.psi_rad, HALF_WAVELENGTH).0;
    let a_m = array_response(m, geom.psi_rad, HALF_WAVELENGTH).0;
    let scale = C64::from_polar(consts.rho_sr.sqrt(), -phase);
    a_n * a_m.transpose() * scale
}

fn cascade(g: &CVector, bs_ris: &CMatrix) -> CMatrix {
    let mut h = bs_ris.adjoint();
    for (mut row, gm) in h.row_iter_mut().zip(g.iter()) {
        row *= *gm;
    }
    h
}

fn check_elements(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::invalid("m", "element count must be >= 1"));
    }
    Ok(())
}

/// Pure LOS on both hops.
pub fn los_channel(
    params: &SystemParams,
    geom: &LinkGeometry,
    m: usize,
    phases: ReferencePhases,
) -> Result<ChannelRealization> {
    check_elements(m)?;
    let consts = DerivedConstants::new(params, geom)?;
    let n = params.num_bs_antennas;
    let bs_ris = bs_ris_channel(&consts, geom, n, m, phases.bs_ris);
    let a_theta = array_response(m, geom.theta_rad, HALF_WAVELENGTH).0;
    let ris_ue = a_theta * C64::from_polar(consts.rho_rd.sqrt(), -phases.ris_ue);
    let cascaded = cascade(&ris_ue, &bs_ris);

    // ā = diag(g) a_M*(ψ), ‖ā‖² = ρ_rd M
    let a_psi = array_response(m, geom.psi_rad, HALF_WAVELENGTH).0;
    let a_bar = ris_ue.component_mul(&a_psi.conjugate());
    let u1 = a_bar / C64::from((consts.rho_rd * m as f64).sqrt());

    Ok(ChannelRealization {
        bs_ris,
        ris_ue,
        cascaded,
        fading: None,
        lambda1: consts.rho0 * n as f64 * m as f64,
        u1,
        condition: Condition::LOS,
    })
}

/// LOS BS–surface hop, arbitrary fading `g̃` on the surface–UE hop.
pub fn nlos_channel(
    params: &SystemParams,
    geom: &LinkGeometry,
    fading: &CVector,
    bs_ris_phase: f64,
) -> Result<ChannelRealization> {
    let m = fading.len();
    check_elements(m)?;
    let energy = fading.norm_squared();
    if !(energy > 0.0) {
        return Err(Error::ZeroFading);
    }
    let consts = DerivedConstants::new(params, geom)?;
    let n = params.num_bs_antennas;
    let bs_ris = bs_ris_channel(&consts, geom, n, m, bs_ris_phase);
    let ris_ue = fading * C64::from(consts.rho_rd.sqrt());
    let cascaded = cascade(&ris_ue, &bs_ris);

    let a_psi = array_response(m, geom.psi_rad, HALF_WAVELENGTH).0;
    let a_tilde = fading.component_mul(&a_psi.conjugate());
    let u1 = &a_tilde / C64::from(a_tilde.norm());

    Ok(ChannelRealization {
        bs_ris,
        ris_ue,
        cascaded,
        fading: Some(fading.clone()),
        lambda1: consts.rho0 * n as f64 * energy,
        u1,
        condition: Condition::NLOS,
    })
}

/// `φ = exp(j∠u1)`, lossless reflection.
pub fn optimal_phases(u1: &CVector) -> Result<CVector> {
    u1.iter()
        .enumerate()
        .map(|(index, u)| {
            let r = u.norm();
            if r > 0.0 && r.is_finite() {
                Ok(u / r)
            } else {
                Err(Error::UndefinedPhase { index })
            }
        })
        .collect::<Result<Vec<_>>>()
        .map(CVector::from_vec)
}

/// Maximum-ratio transmission `w = (φᴴH)ᴴ / ‖φᴴH‖`.
pub fn mrt_precoder(cascaded: &CMatrix, phi: &CVector) -> Result<CVector> {
    if phi.len() != cascaded.nrows() {
        return Err(Error::Dimension(format!(
            "phi has {} entries, H has {} rows",
            phi.len(),
            cascaded.nrows()
        )));
    }
    let effective = cascaded.adjoint() * phi;
    let norm = effective.norm();
    if !(norm > 0.0) {
        return Err(Error::ZeroEffectiveChannel);
    }
    Ok(effective / C64::from(norm))
}

/// `P λ1 |φᴴ u1|² / (B N0)`.
pub fn snr(params: &SystemParams, chan: &ChannelRealization, phi: &CVector) -> Result<f64> {
    if phi.len() != chan.u1.len() {
        return Err(Error::Dimension(format!(
            "phi has {} entries, channel has {} elements",
            phi.len(),
            chan.u1.len()
        )));
    }
    let proj = phi.dotc(&chan.u1).norm_sqr();
    Ok(params.tx_power_w * chan.lambda1 * proj / (params.bandwidth_hz * params.noise_psd_w_per_hz))
}

/// Power incident on the surface, `P ‖Gᴴ w‖²`.
pub fn harvested_power(
    params: &SystemParams,
    chan: &ChannelRealization,
    w: &CVector,
) -> Result<f64> {
    if w.len() != chan.num_antennas() {
        return Err(Error::Dimension(format!(
            "w has {} entries, BS has {} antennas",
            w.len(),
            chan.num_antennas()
        )));
    }
    Ok(params.tx_power_w * (chan.bs_ris.adjoint() * w).norm_squared())
}

/// `B log2(1 + Γ0 N M²)`; `m` may be fractional.
pub fn rate_los(params: &SystemParams, geom: &LinkGeometry, m: f64) -> Result<f64> {
    if !(m >= 0.0) {
        return Err(Error::invalid("m", format!("must be >= 0, got {m}")));
    }
    let consts = DerivedConstants::new(params, geom)?;
    let snr = consts.gamma0 * params.num_bs_antennas as f64 * m * m;
    Ok(params.bandwidth_hz * snr.ln_1p() / std::f64::consts::LN_2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkMeasurement {
    pub snr: f64,
    pub harvested_power_w: f64,
}

/// Evaluates the received signal `φᴴ H w s` and the incident power
/// `P ‖Gᴴ w‖²` by explicit matrix products, with no eigenpair shortcut.
pub fn simulate_link(
    params: &SystemParams,
    chan: &ChannelRealization,
    phi: &CVector,
    w: &CVector,
) -> Result<LinkMeasurement> {
    if phi.len() != chan.num_elements() || w.len() != chan.num_antennas() {
        return Err(Error::Dimension(format!(
            "phi {}×1 and w {}×1 do not fit an {}×{} cascade",
            phi.len(),
            w.len(),
            chan.num_elements(),
            chan.num_antennas()
        )));
    }
    let hw = &chan.cascaded * w;
    let gain: C64 = phi.iter().zip(hw.iter()).map(|(p, h)| p.conj() * h).sum();
    let noise_power = params.bandwidth_hz * params.noise_psd_w_per_hz;
    Ok(LinkMeasurement {
        snr: params.tx_power_w * gain.norm_sqr() / noise_power,
        harvested_power_w: params.tx_power_w * (chan.bs_ris.adjoint() * w).norm_squared(),
    })
}

#[derive(Debug, Clone)]
pub struct BeamformingSolution {
    pub w: CVector,
    pub phi: CVector,
    pub snr: f64,
    pub harvested_power_w: f64,
    pub rate_bps: f64,
}

/// Optimal phases from the analytic eigenvector followed by MRT.
pub fn beamform(params: &SystemParams, chan: &ChannelRealization) -> Result<BeamformingSolution> {
    let phi = optimal_phases(&chan.u1)?;
    let w = mrt_precoder(&chan.cascaded, &phi)?;
    let snr = snr(params, chan, &phi)?;
    let harvested_power_w = harvested_power(params, chan, &w)?;
    Ok(BeamformingSolution {
        rate_bps: params.bandwidth_hz * snr.ln_1p() / std::f64::consts::LN_2,
        w,
        phi,
        snr,
        harvested_power_w,
    })
}
