#![allow(dead_code)]

use nalgebra::DVector;
use rand::Rng;
use ssris::model::{LinkGeometry, SystemParams};
use ssris::outage;
use ssris::phys::{CMatrix, CVector, C64};

/// Eigenpairs of a Hermitian matrix from nalgebra's dense solver, largest
/// first. The matrix is scaled by its trace beforehand so that path gains of
/// 1e-16 do not sit next to the solver's absolute thresholds.
pub fn dense_eigen(v: &CMatrix) -> (Vec<f64>, Vec<CVector>) {
    let scale = v.trace().re;
    let eig = (v / C64::from(scale)).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i] * scale).collect();
    let vectors = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    (values, vectors)
}

/// `|aᴴ b|` for unit vectors, 1 when they agree up to a global phase.
pub fn alignment(a: &CVector, b: &CVector) -> f64 {
    a.dotc(b).norm() / (a.norm() * b.norm())
}

pub fn random_params<R: Rng + ?Sized>(rng: &mut R, max_antennas: usize) -> SystemParams {
    SystemParams {
        num_bs_antennas: rng.random_range(1..=max_antennas),
        tx_power_w: rng.random_range(0.01..1.0),
        ..SystemParams::default()
    }
}

pub fn random_unit_phases<R: Rng + ?Sized>(rng: &mut R, m: usize) -> CVector {
    DVector::from_fn(m, |_, _| {
        C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
    })
}

/// First crossing of the outage gap found by walking `m = k · step` upward
/// from `step`, then refined by bisection inside the crossing step.
pub fn dense_scan_root(
    gamma: f64,
    gamma0: f64,
    n: usize,
    epsilon: f64,
    step: f64,
    cap: f64,
) -> Option<f64> {
    let gap = |m: f64| outage::outage_gap(m, gamma, gamma0, n, epsilon);
    let mut k = 1u64;
    loop {
        let m = k as f64 * step;
        if m > cap {
            return None;
        }
        if gap(m) >= 0.0 {
            let (mut lo, mut hi) = ((k - 1) as f64 * step, m);
            while hi - lo > 1e-13 * hi {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if gap(mid) >= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Some(hi);
        }
        k += 1;
    }
}

pub fn any_geometry<R: Rng + ?Sized>(rng: &mut R) -> LinkGeometry {
    ssris::validate::random_geometry(rng)
}
