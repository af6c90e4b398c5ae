use d2d_core::outage::{
    outage_cellular_with, InterferenceLt, InterferenceSource, LinkInterference, LinkMode, LtMethod,
};
use d2d_core::specfun::integrate_semi_infinite;
use d2d_core::units::{db_to_linear, dbm_to_watts, per_km2_to_per_m2};
use d2d_core::{
    link_capacity, mode_selection_probability, outage_cellular, outage_d2d, Bias, NetworkParams,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn theta_grid() -> Vec<f64> {
    (0..=15).map(|k| -10.0 + 2.0 * k as f64).collect()
}

fn random_point(rng: &mut ChaCha8Rng) -> NetworkParams {
    NetworkParams {
        bs_intensity: per_km2_to_per_m2(rng.random_range(1.0..20.0)),
        cutoff_threshold: dbm_to_watts(rng.random_range(-85.0..-55.0)),
        bias: Bias::Finite(10f64.powf(rng.random_range(-2.0..2.0))),
        sinr_threshold: db_to_linear(rng.random_range(-10.0..20.0)),
        noise_power: dbm_to_watts(rng.random_range(-110.0..-85.0)),
        ..NetworkParams::default()
    }
}

#[test]
fn arctan_paths_match_quadrature_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..20 {
        let p = random_point(&mut rng);
        let a = outage_cellular_with(&p, LtMethod::ClosedForm)
            .unwrap()
            .outage_probability;
        let b = outage_cellular_with(&p, LtMethod::Quadrature)
            .unwrap()
            .outage_probability;
        assert!(rel(a, b) < 1e-8, "{p:?}: {a} vs {b}");
        let s = p.sinr_threshold / p.cutoff_threshold;
        for src in [
            InterferenceSource::CellularOnBs,
            InterferenceSource::D2dOnBs,
        ] {
            let lt = InterferenceLt::new(src, &p).unwrap();
            let a = lt.eval_with(s, LtMethod::ClosedForm).unwrap();
            let b = lt.eval_with(s, LtMethod::Quadrature).unwrap();
            assert!(rel(a, b) < 1e-8);
        }
    }
}

#[test]
fn outages_monotone_over_threshold_grid() {
    for rho_dbm in [-80.0, -70.0, -60.0] {
        let mut prev = (0.0, 0.0);
        for db in theta_grid() {
            let p = NetworkParams {
                cutoff_threshold: dbm_to_watts(rho_dbm),
                sinr_threshold: db_to_linear(db),
                ..NetworkParams::default()
            };
            let c = outage_cellular(&p).unwrap().outage_probability;
            let d = outage_d2d(&p).unwrap().outage_probability;
            assert!(c >= prev.0 && d >= prev.1, "rho={rho_dbm} theta={db}");
            prev = (c, d);
        }
    }
}

#[test]
fn outages_decrease_with_cutoff_threshold() {
    for db in theta_grid() {
        let mut prev = (1.0, 1.0);
        for k in 0..=10 {
            let p = NetworkParams {
                cutoff_threshold: dbm_to_watts(-80.0 + 2.0 * k as f64),
                sinr_threshold: db_to_linear(db),
                ..NetworkParams::default()
            };
            let c = outage_cellular(&p).unwrap().outage_probability;
            let d = outage_d2d(&p).unwrap().outage_probability;
            assert!(c <= prev.0 && d <= prev.1, "theta={db} k={k}");
            prev = (c, d);
        }
    }
}

#[test]
fn rate_equals_integrated_coverage() {
    let p = NetworkParams::default();
    for mode in [LinkMode::Cellular, LinkMode::D2d] {
        let rate = link_capacity(mode, &p).unwrap();
        let li = LinkInterference::new(mode, &p).unwrap();
        // ∫₀^∞ P{SINR > e^t − 1} dt with the coverage taken from the outage path
        let coverage = integrate_semi_infinite(
            |t| {
                let theta = t.exp_m1();
                if theta <= 0.0 || !theta.is_finite() {
                    return if theta.is_finite() { 1.0 } else { 0.0 };
                }
                1.0 - li.outage(theta).unwrap().outage_probability
            },
            0.0,
            &d2d_core::outage::rate_quadrature(),
        )
        .unwrap();
        assert!(rel(rate, coverage) < 1e-6, "{mode}: {rate} vs {coverage}");
    }
}

#[test]
fn unequal_exponents_are_handled() {
    let p = NetworkParams {
        pathloss_cellular: 3.5,
        pathloss_d2d: 4.5,
        ..NetworkParams::default()
    };
    let pd = mode_selection_probability(&p).unwrap().prob_d2d;
    assert!(pd > 0.0 && pd < 1.0);
    for mode in [LinkMode::Cellular, LinkMode::D2d] {
        let li = LinkInterference::new(mode, &p).unwrap();
        let o = li.outage(1.0).unwrap().outage_probability;
        assert!(o > 0.0 && o < 1.0);
        let r = li
            .link_capacity(&d2d_core::outage::rate_quadrature())
            .unwrap();
        let u = li
            .link_capacity_u_form(&d2d_core::outage::rate_quadrature())
            .unwrap();
        assert!(rel(r, u) < 1e-6);
    }
}

#[test]
fn several_channels_dilute_d2d_interference() {
    let one = NetworkParams::default();
    let four = NetworkParams {
        num_channels: 4,
        ..one
    };
    assert!(
        outage_d2d(&four).unwrap().outage_probability
            < outage_d2d(&one).unwrap().outage_probability
    );
    assert!(
        outage_cellular(&four).unwrap().outage_probability
            < outage_cellular(&one).unwrap().outage_probability
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transforms_lie_in_unit_interval_and_decrease(
        lambda in 1.0f64..20.0,
        rho_dbm in -85.0f64..-55.0,
        log_t in -2.0f64..2.0,
        eta_c in 3.0f64..5.0,
        s1 in 1e5f64..1e12,
        ratio in 1.01f64..10.0,
    ) {
        let p = NetworkParams {
            bs_intensity: per_km2_to_per_m2(lambda),
            cutoff_threshold: dbm_to_watts(rho_dbm),
            bias: Bias::Finite(10f64.powf(log_t)),
            pathloss_cellular: eta_c,
            ..NetworkParams::default()
        };
        for src in [
            InterferenceSource::D2dOnD2d,
            InterferenceSource::CellularOnD2d,
            InterferenceSource::D2dOnBs,
            InterferenceSource::CellularOnBs,
        ] {
            let lt = InterferenceLt::new(src, &p).unwrap();
            let a = lt.eval(s1).unwrap();
            let b = lt.eval(s1 * ratio).unwrap();
            prop_assert!(a > 0.0 && a <= 1.0);
            prop_assert!(b < a || (a == 1.0 && b == 1.0) || b == 0.0);
        }
        let o = outage_d2d(&p).unwrap().outage_probability;
        prop_assert!((0.0..=1.0).contains(&o));
        let o = outage_cellular(&p).unwrap().outage_probability;
        prop_assert!((0.0..=1.0).contains(&o));
    }
}
