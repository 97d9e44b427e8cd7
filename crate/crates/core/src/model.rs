//! System parameters, link geometry and the derived scalar constants.
//!
//! Everything downstream consumes [`DerivedConstants`]: the two path gains
//! `ρ(ψ, d_SR)` and `ρ(θ, d_RD)`, their product `ρ0`, the normalised
//! single-element SNR `Γ0 = P ρ0 / (B N0)` and the harvesting difficulty
//! `α = P0 / (η P N ρ(ψ, d_SR))`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Point2, Vector2};

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Thermal noise floor at room temperature (dBm/Hz).
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

/// Angles closer than this to ±π/2 are treated as lying in the surface plane.
pub const ANGLE_MARGIN_RAD: f64 = 1e-9;

/// Converts a noise density in dBm/Hz plus a noise figure in dB to W/Hz.
pub fn noise_psd_w_per_hz(dbm_per_hz: f64, noise_figure_db: f64) -> f64 {
    10f64.powf((dbm_per_hz + noise_figure_db) / 10.0) * 1e-3
}

/// Scalar radio and power parameters of the link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub carrier_freq_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_psd_w_per_hz: f64,
    pub num_bs_antennas: usize,
    /// RF-to-DC harvesting efficiency η.
    pub harvest_efficiency: f64,
    /// Power drawn by one reflecting element, P0.
    pub element_power_w: f64,
    pub tx_power_w: f64,
    /// Side length of the square deployment region.
    pub area_side_m: f64,
}

impl Default for SystemParams {
    /// 15 GHz carrier, 50 MHz bandwidth, 128 BS antennas, η = 0.65,
    /// P0 = 2 µW, P = 0.1 W, 50 m region and thermal noise at -174 dBm/Hz.
    fn default() -> Self {
        SystemParams {
            carrier_freq_hz: 15e9,
            bandwidth_hz: 50e6,
            noise_psd_w_per_hz: noise_psd_w_per_hz(THERMAL_NOISE_DBM_PER_HZ, 0.0),
            num_bs_antennas: 128,
            harvest_efficiency: 0.65,
            element_power_w: 2e-6,
            tx_power_w: 0.1,
            area_side_m: 50.0,
        }
    }
}

fn require_positive(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            field,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("carrier_freq_hz", self.carrier_freq_hz)?;
        require_positive("bandwidth_hz", self.bandwidth_hz)?;
        require_positive("noise_psd_w_per_hz", self.noise_psd_w_per_hz)?;
        require_positive("harvest_efficiency", self.harvest_efficiency)?;
        if self.harvest_efficiency > 1.0 {
            return Err(Error::invalid(
                "harvest_efficiency",
                format!("must be <= 1, got {}", self.harvest_efficiency),
            ));
        }
        require_positive("element_power_w", self.element_power_w)?;
        require_positive("tx_power_w", self.tx_power_w)?;
        require_positive("area_side_m", self.area_side_m)?;
        if self.num_bs_antennas == 0 {
            return Err(Error::invalid("num_bs_antennas", "must be >= 1"));
        }
        Ok(())
    }

    pub fn with_tx_power(mut self, tx_power_w: f64) -> Self {
        self.tx_power_w = tx_power_w;
        self
    }
}

/// Coordinates of the three nodes and the common broadside normal of the
/// BS array and the surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub bs: Point2<f64>,
    pub ue: Point2<f64>,
    pub ris: Point2<f64>,
    /// Unit normal shared by the BS array and the surface.
    pub normal: Vector2<f64>,
}

impl Placement {
    /// BS and UE at opposite corners of the `side`×`side` region, surface
    /// mounted at the midpoint of the edge next to the BS, both arrays
    /// facing into the region along the diagonal.
    pub fn default_for_side(side: f64) -> Self {
        Placement {
            bs: Point2::new(0.0, 0.0),
            ue: Point2::new(side, side),
            ris: Point2::new(side / 2.0, 0.0),
            normal: Vector2::new(1.0, 1.0).normalize(),
        }
    }
}

/// Angles and distances of the BS → surface → UE path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    /// Present when the geometry was built from coordinates.
    pub placement: Option<Placement>,
    /// Azimuth of the surface seen from the BS.
    pub psi_rad: f64,
    /// Azimuth of the UE seen from the surface.
    pub theta_rad: f64,
    pub d_sr_m: f64,
    pub d_rd_m: f64,
}

fn check_angle(which: &'static str, angle_rad: f64) -> Result<()> {
    if angle_rad.is_finite() && angle_rad.abs() < FRAC_PI_2 - ANGLE_MARGIN_RAD {
        Ok(())
    } else {
        Err(Error::DegenerateGeometry { which, angle_rad })
    }
}

/// Signed angle of `ray` from `normal`, positive towards the tangent obtained
/// by rotating the normal clockwise.
fn angle_from_normal(ray: Vector2<f64>, normal: Vector2<f64>) -> f64 {
    let tangent = Vector2::new(normal.y, -normal.x);
    ray.dot(&tangent).atan2(ray.dot(&normal))
}

impl LinkGeometry {
    /// Takes the four path quantities directly.
    pub fn from_raw(psi_rad: f64, theta_rad: f64, d_sr_m: f64, d_rd_m: f64) -> Result<Self> {
        require_positive("d_sr_m", d_sr_m)?;
        require_positive("d_rd_m", d_rd_m)?;
        check_angle("psi", psi_rad)?;
        check_angle("theta", theta_rad)?;
        Ok(LinkGeometry {
            placement: None,
            psi_rad,
            theta_rad,
            d_sr_m,
            d_rd_m,
        })
    }

    /// Derives the path quantities from node coordinates.
    pub fn from_positions(placement: Placement) -> Result<Self> {
        let Placement {
            bs,
            ue,
            ris,
            normal,
        } = placement;
        let n_norm = normal.norm();
        if !(n_norm.is_finite() && n_norm > 0.0) {
            return Err(Error::invalid("normal", "must be a finite nonzero vector"));
        }
        let normal = normal / n_norm;
        let to_ris = ris - bs;
        let to_ue = ue - ris;
        let d_sr_m = to_ris.norm();
        let d_rd_m = to_ue.norm();
        if d_sr_m == 0.0 {
            return Err(Error::invalid("ris", "coincides with the BS"));
        }
        if d_rd_m == 0.0 {
            return Err(Error::invalid("ris", "coincides with the UE"));
        }
        let psi_rad = angle_from_normal(to_ris, normal);
        let theta_rad = angle_from_normal(to_ue, normal);
        check_angle("psi", psi_rad)?;
        check_angle("theta", theta_rad)?;
        Ok(LinkGeometry {
            placement: Some(Placement {
                bs,
                ue,
                ris,
                normal,
            }),
            psi_rad,
            theta_rad,
            d_sr_m,
            d_rd_m,
        })
    }

    /// Default placement inside a region of the given side length.
    pub fn default_for_side(side: f64) -> Result<Self> {
        Self::from_positions(Placement::default_for_side(side))
    }
}

/// λ = c / f.
pub fn wavelength(carrier_freq_hz: f64) -> Result<f64> {
    require_positive("carrier_freq_hz", carrier_freq_hz)?;
    Ok(SPEED_OF_LIGHT / carrier_freq_hz)
}

/// Free-space path gain with the cosine element pattern,
/// `ρ(ψ, d) = λ² / (4πd)² · π cos ψ`.
pub fn fspl(angle_rad: f64, distance_m: f64, lambda_m: f64) -> Result<f64> {
    require_positive("distance_m", distance_m)?;
    require_positive("lambda_m", lambda_m)?;
    if !(angle_rad.abs() < FRAC_PI_2) {
        return Err(Error::DegenerateGeometry {
            which: "angle",
            angle_rad,
        });
    }
    let spread = 4.0 * PI * distance_m;
    Ok(lambda_m * lambda_m / (spread * spread) * PI * angle_rad.cos())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub lambda_m: f64,
    pub rho_sr: f64,
    pub rho_rd: f64,
    pub rho0: f64,
    /// Normalised SNR `P ρ0 / (B N0)`.
    pub gamma0: f64,
    /// Harvesting difficulty `P0 / (η P N ρ_sr)`.
    pub alpha: f64,
}

impl DerivedConstants {
    pub fn new(params: &SystemParams, geom: &LinkGeometry) -> Result<Self> {
        params.validate()?;
        let lambda_m = wavelength(params.carrier_freq_hz)?;
        let rho_sr = fspl(geom.psi_rad, geom.d_sr_m, lambda_m)?;
        let rho_rd = fspl(geom.theta_rad, geom.d_rd_m, lambda_m)?;
        let rho0 = rho_sr * rho_rd;
        let gamma0 = params.tx_power_w * rho0 / (params.bandwidth_hz * params.noise_psd_w_per_hz);
        let alpha = params.element_power_w
            / (params.harvest_efficiency
                * params.tx_power_w
                * params.num_bs_antennas as f64
                * rho_sr);
        Ok(DerivedConstants {
            lambda_m,
            rho_sr,
            rho_rd,
            rho0,
            gamma0,
            alpha,
        })
    }
}

/// Convenience alias for [`DerivedConstants::new`].
pub fn derive_constants(params: &SystemParams, geom: &LinkGeometry) -> Result<DerivedConstants> {
    DerivedConstants::new(params, geom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn reference_geometry() -> LinkGeometry {
        LinkGeometry::from_raw(0.0, 0.0, 25.0, 25.0).unwrap()
    }

    #[test]
    fn wavelength_values() {
        assert_relative_eq!(
            wavelength(15e9).unwrap(),
            0.019986163866666667,
            max_relative = 1e-12
        );
        assert_eq!(wavelength(SPEED_OF_LIGHT).unwrap(), 1.0);
        assert_eq!(wavelength(2.0 * SPEED_OF_LIGHT).unwrap(), 0.5);
        assert!(wavelength(0.0).is_err());
        assert!(wavelength(-1.0).is_err());
    }

    #[test]
    fn fspl_values() {
        let lambda = wavelength(15e9).unwrap();
        // λ²π / (4π·25)² evaluated by hand: 1.2715e-8
        let rho = fspl(0.0, 25.0, lambda).unwrap();
        assert_relative_eq!(rho, 1.27149e-8, max_relative = 1e-4);
        assert!(fspl(FRAC_PI_2 - 1e-12, 25.0, lambda).unwrap() < 1e-19);
        assert_relative_eq!(
            fspl(0.3, 50.0, lambda).unwrap() * 4.0,
            fspl(0.3, 25.0, lambda).unwrap(),
            max_relative = 1e-14
        );
        assert!(fspl(FRAC_PI_2, 25.0, lambda).is_err());
        assert!(fspl(-2.0, 25.0, lambda).is_err());
        assert!(fspl(0.0, 0.0, lambda).is_err());
    }

    #[test]
    fn broadside_geometry() {
        let geom = LinkGeometry::from_positions(Placement {
            bs: Point2::new(0.0, 0.0),
            ue: Point2::new(10.0, 30.0),
            ris: Point2::new(0.0, 25.0),
            normal: Vector2::new(0.0, 1.0),
        })
        .unwrap();
        assert_eq!(geom.psi_rad, 0.0);
        assert_eq!(geom.d_sr_m, 25.0);
    }

    #[test]
    fn ray_in_surface_plane_rejected() {
        let err = LinkGeometry::from_positions(Placement {
            bs: Point2::new(0.0, 0.0),
            ue: Point2::new(50.0, 50.0),
            ris: Point2::new(25.0, 0.0),
            normal: Vector2::new(0.0, 1.0),
        })
        .unwrap_err();
        assert!(matches!(
            err,
            Error::DegenerateGeometry { which: "psi", .. }
        ));
    }

    #[test]
    fn interior_surface_angles() {
        // +y normal: BS→RIS is (10, 10) and RIS→UE is (40, 40), both 45° off
        // the normal towards +x.
        let geom = LinkGeometry::from_positions(Placement {
            bs: Point2::new(0.0, 0.0),
            ue: Point2::new(50.0, 50.0),
            ris: Point2::new(10.0, 10.0),
            normal: Vector2::new(0.0, 1.0),
        })
        .unwrap();
        assert_relative_eq!(
            geom.psi_rad,
            std::f64::consts::FRAC_PI_4,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            geom.theta_rad,
            std::f64::consts::FRAC_PI_4,
            max_relative = 1e-14
        );
        assert_relative_eq!(geom.d_sr_m, 200f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(geom.d_rd_m, 3200f64.sqrt(), max_relative = 1e-14);

        // Diagonal normal: both rays lie along it.
        let geom = LinkGeometry::from_positions(Placement {
            normal: Vector2::new(1.0, 1.0),
            ..geom.placement.unwrap()
        })
        .unwrap();
        assert!(geom.psi_rad.abs() < 1e-15 && geom.theta_rad.abs() < 1e-15);
    }

    #[test]
    fn ue_behind_surface_rejected() {
        let err = LinkGeometry::from_positions(Placement {
            bs: Point2::new(0.0, 0.0),
            ue: Point2::new(0.0, -10.0),
            ris: Point2::new(5.0, 5.0),
            normal: Vector2::new(1.0, 1.0),
        })
        .unwrap_err();
        assert!(matches!(
            err,
            Error::DegenerateGeometry { which: "theta", .. }
        ));
    }

    #[test]
    fn default_placement_is_valid() {
        let geom = LinkGeometry::default_for_side(50.0).unwrap();
        assert_relative_eq!(
            geom.psi_rad,
            std::f64::consts::FRAC_PI_4,
            max_relative = 1e-14
        );
        assert_relative_eq!(geom.d_sr_m, 25.0);
        assert_relative_eq!(geom.d_rd_m, (25.0f64.powi(2) + 50.0f64.powi(2)).sqrt());
        assert_relative_eq!(geom.theta_rad, -(1.0f64 / 3.0).atan(), max_relative = 1e-12);
    }

    #[test]
    fn coincident_nodes_rejected() {
        let p = Placement::default_for_side(50.0);
        assert!(LinkGeometry::from_positions(Placement { ris: p.bs, ..p }).is_err());
        assert!(LinkGeometry::from_positions(Placement { ris: p.ue, ..p }).is_err());
    }

    #[test]
    fn derived_constants_reference_values() {
        // P = 0.1 W, ψ = θ = 0, 25 m hops, N0 = -174 dBm/Hz.
        let params = SystemParams::default();
        assert_relative_eq!(
            params.noise_psd_w_per_hz,
            10f64.powf(-20.4),
            max_relative = 1e-12
        );
        let c = DerivedConstants::new(&params, &reference_geometry()).unwrap();
        assert_relative_eq!(c.alpha, 18.90, max_relative = 1e-3);
        assert_relative_eq!(c.gamma0, 8.120e-5, max_relative = 1e-3);
        assert_relative_eq!(c.rho0, c.rho_sr * c.rho_rd);
    }

    #[test]
    fn derived_constants_scale_with_power() {
        let geom = reference_geometry();
        let a = DerivedConstants::new(&SystemParams::default(), &geom).unwrap();
        let b = DerivedConstants::new(&SystemParams::default().with_tx_power(0.05), &geom).unwrap();
        assert_relative_eq!(b.alpha, 2.0 * a.alpha, max_relative = 1e-14);
        assert_relative_eq!(b.gamma0, 0.5 * a.gamma0, max_relative = 1e-14);
    }

    #[test]
    fn params_validation() {
        let ok = SystemParams::default();
        assert!(ok.validate().is_ok());
        assert!(SystemParams {
            harvest_efficiency: 1.2,
            ..ok
        }
        .validate()
        .is_err());
        assert!(SystemParams {
            harvest_efficiency: 0.0,
            ..ok
        }
        .validate()
        .is_err());
        assert!(SystemParams {
            num_bs_antennas: 0,
            ..ok
        }
        .validate()
        .is_err());
        assert!(SystemParams {
            tx_power_w: f64::NAN,
            ..ok
        }
        .validate()
        .is_err());
        assert!(SystemParams {
            bandwidth_hz: -1.0,
            ..ok
        }
        .validate()
        .is_err());
    }

    proptest! {
        #[test]
        fn fspl_decreasing(a in 0.0f64..1.5, da in 1e-3f64..0.05, d in 1.0f64..500.0, dd in 1e-3f64..10.0) {
            let lambda = 0.02;
            let base = fspl(a, d, lambda).unwrap();
            prop_assert!(fspl(a, d + dd, lambda).unwrap() < base);
            if a + da < FRAC_PI_2 {
                prop_assert!(fspl(a + da, d, lambda).unwrap() < base);
                prop_assert!(fspl(-(a + da), d, lambda).unwrap() < base);
            }
        }

        #[test]
        fn alpha_identity(p in 1e-3f64..10.0, eta in 0.05f64..1.0, n in 1usize..512,
                          psi in -1.4f64..1.4, d in 2.0f64..200.0) {
            let params = SystemParams { tx_power_w: p, harvest_efficiency: eta, num_bs_antennas: n, ..SystemParams::default() };
            let geom = LinkGeometry::from_raw(psi, 0.2, d, 30.0).unwrap();
            let c = DerivedConstants::new(&params, &geom).unwrap();
            let recovered = c.alpha * eta * p * n as f64 * c.rho_sr;
            prop_assert!((recovered - params.element_power_w).abs() <= 1e-12 * params.element_power_w);
        }

        #[test]
        fn geometry_translation_invariant(dx in -1e3f64..1e3, dy in -1e3f64..1e3,
                                          rx in 5.0f64..45.0, ry in 0.0f64..20.0) {
            let base = Placement { ris: Point2::new(rx, ry), ..Placement::default_for_side(50.0) };
            let shift = Vector2::new(dx, dy);
            let moved = Placement { bs: base.bs + shift, ue: base.ue + shift, ris: base.ris + shift, ..base };
            match (LinkGeometry::from_positions(base), LinkGeometry::from_positions(moved)) {
                (Ok(a), Ok(b)) => {
                    prop_assert!((a.psi_rad - b.psi_rad).abs() < 1e-9);
                    prop_assert!((a.theta_rad - b.theta_rad).abs() < 1e-9);
                    prop_assert!((a.d_sr_m - b.d_sr_m).abs() < 1e-9 * a.d_sr_m.max(1.0));
                    prop_assert!((a.d_rd_m - b.d_rd_m).abs() < 1e-9 * a.d_rd_m.max(1.0));
                }
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "translation changed feasibility"),
            }
        }
    }
}
