use ssris::model::{LinkGeometry, SystemParams};
use ssris::outage::{self, OutageModel};
use ssris::validate::{self, empirical_outage, McConfig};

fn cfg(seed: u64) -> McConfig {
    McConfig {
        num_samples: 1_000_000,
        seed,
        num_streams: 4,
    }
}

#[test]
fn kolmogorov_distance_shrinks_with_elements() {
    let ks: Vec<f64> = [10usize, 32, 100, 316]
        .iter()
        .map(|&m| {
            let ys = validate::sample_y_values(m, &cfg(77)).unwrap();
            let model = OutageModel::new(m as f64).unwrap();
            validate::ks_distance(&ys, |y| outage::truncated_gaussian_cdf(y, &model))
        })
        .collect();
    println!("Kolmogorov distance over M = 10, 32, 100, 316: {ks:?}");
    assert!(ks.windows(2).all(|w| w[1] < w[0]), "{ks:?}");
}

#[test]
fn outage_tracks_monte_carlo_at_moderate_size() {
    let params = SystemParams::default();
    let geom = LinkGeometry::default_for_side(50.0).unwrap();
    let gamma0 = ssris::model::DerivedConstants::new(&params, &geom)
        .unwrap()
        .gamma0;
    for (m, p, tol) in [(32usize, 0.01, 1e-2), (100, 0.1, 5e-3)] {
        let gamma = validate::gamma_for_outage(p, m, gamma0, 128).unwrap();
        let r = empirical_outage(&params, &geom, m, gamma, &cfg(5)).unwrap();
        println!(
            "M = {m}, analytic {p}: empirical {} (stderr {:.1e})",
            r.empirical_outage, r.binomial_stderr
        );
        assert!(r.abs_gap <= tol, "{r:?}");
    }
}

#[test]
fn empirical_outage_in_range_for_any_threshold() {
    let params = SystemParams::default();
    let geom = LinkGeometry::default_for_side(50.0).unwrap();
    for gamma in [0.0, 1e-3, 1.0, 1e9] {
        let r = empirical_outage(
            &params,
            &geom,
            16,
            gamma,
            &McConfig {
                num_samples: 5000,
                ..cfg(1)
            },
        )
        .unwrap();
        assert!((0.0..=1.0).contains(&r.empirical_outage));
        assert_eq!(
            r.binomial_stderr,
            (r.empirical_outage * (1.0 - r.empirical_outage) / 5000.0).sqrt()
        );
    }
}
