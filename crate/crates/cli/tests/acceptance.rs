//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use d2d_cli::{cmd_validate, Cell, ResultTable};
use d2d_core::oracle::{ks_distance_bound, sample_covered_cellular_powers, sample_d2d_mode_powers};
use d2d_core::outage::{
    optimal_bias, outage_cellular_with, BiasObjective, InterferenceLt, InterferenceSource, LtMethod,
};
use d2d_core::power::{
    case4_split_probability, mean_power_potential_d2d, moment_power_cellular_generic,
    moment_power_cellular_generic_closed_form, moment_quadrature, pdf_power_case2, pdf_power_d2d,
};
use d2d_core::units::{db_to_linear, dbm_to_watts, per_km2_to_per_m2};
use d2d_core::{
    derive, mode_selection_probability, outage_cellular, outage_d2d, run_campaign, Bias,
    NetworkParams, PowerDistribution, PowerKind, SimulationConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            pass: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: String) {
        self.pass &= ok;
        self.details
            .push(format!("{} {detail}", if ok { "ok  " } else { "FAIL" }));
    }

    fn note(&mut self, detail: String) {
        self.details.push(format!("info {detail}"));
    }
}

fn theta_grid_db() -> Vec<f64> {
    (0..=15).map(|k| -10.0 + 2.0 * k as f64).collect()
}

fn at(rho_dbm: f64, theta_db: f64) -> NetworkParams {
    NetworkParams {
        cutoff_threshold: dbm_to_watts(rho_dbm),
        sinr_threshold: db_to_linear(theta_db),
        ..NetworkParams::default()
    }
}

fn outages(p: &NetworkParams) -> (f64, f64) {
    (
        outage_cellular(p).unwrap().outage_probability,
        outage_d2d(p).unwrap().outage_probability,
    )
}

fn max_meta(table: &ResultTable, key: &str) -> f64 {
    table.metadata[key].parse().unwrap()
}

fn outage_validation() -> Outcome {
    let mut o = Outcome::new();
    for rho in [-80.0, -70.0, -60.0] {
        let params = at(rho, 0.0);
        let config = SimulationConfig {
            num_realizations: 2000,
            rng_seed: 20_240_601,
            guard_fraction: 0.2,
            ..SimulationConfig::default()
        }
        .with_window_km2(100.0);
        let t = cmd_validate(&params, &config).unwrap();
        let gap_c = max_meta(&t, "summary.max_gap_cellular");
        let gap_d = max_meta(&t, "summary.max_gap_d2d");
        let all_rows = t.rows.len() == 16
            && t.rows
                .iter()
                .all(|r| r.iter().take(14).all(|c| matches!(c, Cell::Number(_))));
        o.check(
            all_rows && gap_c <= 0.05 && gap_d <= 0.05,
            format!(
                "rho_o = {rho} dBm: max |gap| cellular {gap_c:.4}, d2d {gap_d:.4} (limit 0.05)"
            ),
        );
    }
    o
}

fn monotonicity() -> Outcome {
    let mut o = Outcome::new();
    let thetas = theta_grid_db();
    let mut violations = 0;
    let mut checked = 0;
    for rho in [-80.0, -70.0, -60.0] {
        let mut prev = (0.0, 0.0);
        for &th in &thetas {
            let cur = outages(&at(rho, th));
            checked += 1;
            violations += usize::from(!(cur.0 >= prev.0 && cur.1 >= prev.1));
            prev = cur;
        }
        for &th in &thetas {
            let mut prev = (0.0, 0.0);
            for k in 0..=20 {
                let p = NetworkParams {
                    noise_power: dbm_to_watts(-120.0 + 2.0 * k as f64),
                    ..at(rho, th)
                };
                let cur = outages(&p);
                checked += 1;
                violations += usize::from(!(cur.0 >= prev.0 && cur.1 >= prev.1));
                prev = cur;
            }
        }
    }
    o.check(
        violations == 0,
        format!("outages nondecreasing in theta and noise power: {violations} violations in {checked} steps"),
    );

    let (mut violations, mut checked) = (0, 0);
    for &th in &thetas {
        let mut prev = (1.0, 1.0);
        for k in 0..=20 {
            let cur = outages(&at(-90.0 + 2.0 * k as f64, th));
            checked += 1;
            violations += usize::from(!(cur.0 <= prev.0 && cur.1 <= prev.1));
            prev = cur;
        }
    }
    o.check(
        violations == 0,
        format!("outages nonincreasing in rho_o over -90..-50 dBm: {violations} violations in {checked} steps"),
    );

    for eta_c in [4.0, 3.5] {
        let mut prev = 0.0;
        let mut violations = 0;
        for k in 0..=240 {
            let p = NetworkParams {
                bias: Bias::Finite(10f64.powf(-3.0 + 6.0 * k as f64 / 240.0)),
                pathloss_cellular: eta_c,
                ..NetworkParams::default()
            };
            let pd = mode_selection_probability(&p).unwrap().prob_d2d;
            violations += usize::from(pd < prev);
            prev = pd;
        }
        o.check(
            violations == 0,
            format!("D2D selection probability nondecreasing in T_d on 10^-3..10^3 (eta_c = {eta_c}): {violations} violations"),
        );
    }
    o
}

fn closed_form_equivalence() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(31_337);
    let mut worst_outage: f64 = 0.0;
    let mut worst_lt: f64 = 0.0;
    for _ in 0..20 {
        let p = NetworkParams {
            bs_intensity: per_km2_to_per_m2(rng.random_range(1.0..20.0)),
            cutoff_threshold: dbm_to_watts(rng.random_range(-88.0..-50.0)),
            bias: Bias::Finite(10f64.powf(rng.random_range(-2.0..2.0))),
            sinr_threshold: db_to_linear(rng.random_range(-10.0..20.0)),
            noise_power: dbm_to_watts(rng.random_range(-110.0..-85.0)),
            ..NetworkParams::default()
        };
        let a = outage_cellular_with(&p, LtMethod::ClosedForm)
            .unwrap()
            .outage_probability;
        let b = outage_cellular_with(&p, LtMethod::Quadrature)
            .unwrap()
            .outage_probability;
        worst_outage = worst_outage.max(((a - b) / b).abs());
        let s = p.sinr_threshold / p.cutoff_threshold;
        for src in [
            InterferenceSource::CellularOnBs,
            InterferenceSource::D2dOnBs,
        ] {
            let lt = InterferenceLt::new(src, &p).unwrap();
            let a = lt.eval_with(s, LtMethod::ClosedForm).unwrap();
            let b = lt.eval_with(s, LtMethod::Quadrature).unwrap();
            worst_lt = worst_lt.max(((a - b) / b).abs());
        }
    }
    o.check(
        worst_outage < 1e-8,
        format!("cellular outage closed form vs quadrature: max rel diff {worst_outage:.2e}"),
    );
    o.check(
        worst_lt < 1e-8,
        format!("arctan transforms vs quadrature: max rel diff {worst_lt:.2e}"),
    );
    o
}

fn distribution_suite() -> Outcome {
    let mut o = Outcome::new();
    let points = [
        NetworkParams::default(),
        NetworkParams {
            pathloss_cellular: 3.5,
            bias: Bias::Finite(2.0),
            ..NetworkParams::default()
        },
        NetworkParams {
            cutoff_threshold: dbm_to_watts(-80.0),
            bias: Bias::Finite(0.25),
            ..NetworkParams::default()
        },
    ];
    let spec = moment_quadrature();
    let mut worst_norm: f64 = 0.0;
    let mut worst_moment: f64 = 0.0;
    for p in &points {
        for kind in [
            PowerKind::D2dMode,
            PowerKind::Case2Cellular,
            PowerKind::Case4Cellular,
        ] {
            let d = PowerDistribution::new(kind, p).unwrap();
            worst_norm = worst_norm.max((d.normalization(&spec).unwrap() - 1.0).abs());
        }
        let alphas = [
            2.0 / p.pathloss_d2d,
            2.0 / p.pathloss_cellular,
            0.5,
            1.0,
            2.0,
        ];
        for alpha in alphas {
            for kind in [PowerKind::D2dMode, PowerKind::Case2Cellular] {
                let d = PowerDistribution::new(kind, p).unwrap();
                let closed = d.moment(alpha).unwrap();
                let quad = d.moment_by_quadrature(alpha, &spec).unwrap();
                worst_moment = worst_moment.max(((closed - quad) / quad).abs());
            }
            let closed = moment_power_cellular_generic_closed_form(alpha, p).unwrap();
            let quad = moment_power_cellular_generic(alpha, p).unwrap();
            worst_moment = worst_moment.max(((closed - quad) / quad).abs());
        }
    }
    o.check(
        worst_norm < 1e-6,
        format!("pdf normalization: max |integral - 1| {worst_norm:.2e}"),
    );
    o.check(
        worst_moment < 1e-6,
        format!("closed-form vs quadrature moments: max rel diff {worst_moment:.2e}"),
    );

    let p = NetworkParams::default();
    let mut xs = sample_d2d_mode_powers(&p, 10_000_000, 11).unwrap();
    let ks = ks_distance_bound(
        &mut xs,
        |x| pdf_power_d2d(x, &p).unwrap(),
        0.0,
        p.max_tx_power,
        2000,
    )
    .unwrap();
    o.check(
        ks < 0.005,
        format!("D2D-mode power KS bound vs 1e7 geometric samples: {ks:.4}"),
    );
    let mut xs = sample_covered_cellular_powers(&p, 10_000_000, 12).unwrap();
    let ks = ks_distance_bound(
        &mut xs,
        |x| pdf_power_case2(x, &p).unwrap(),
        0.0,
        p.max_tx_power,
        2000,
    )
    .unwrap();
    o.check(
        ks < 0.005,
        format!("covered cellular power KS bound vs 1e7 geometric samples: {ks:.4}"),
    );
    o
}

fn sim_config() -> SimulationConfig {
    SimulationConfig {
        num_realizations: 500,
        rng_seed: 77,
        ..SimulationConfig::default()
    }
    .with_window_km2(25.0)
}

fn mode_selection_in_situ() -> Outcome {
    let mut o = Outcome::new();
    for t in [0.1, 1.0, 10.0] {
        let p = NetworkParams {
            bias: Bias::Finite(t),
            ..NetworkParams::default()
        };
        let r = run_campaign(&p, &sim_config()).unwrap();
        let pd = mode_selection_probability(&p).unwrap().prob_d2d;
        let est = r.mode_d2d_fraction;
        let z = (est.mean - pd) / est.std_error;
        o.check(
            z.abs() <= 3.0,
            format!(
                "T_d = {t}: empirical D2D fraction {:.4} (se {:.4}) vs {pd:.4}, z = {z:.2}",
                est.mean, est.std_error
            ),
        );
        let split = case4_split_probability(&p).unwrap().prob_d2d_given_case4();
        let c4 = r.case4_d2d_fraction;
        o.note(format!(
            "T_d = {t}: covered-only D2D fraction {:.4} (se {:.4}) vs conditional model {split:.4}",
            c4.mean, c4.std_error
        ));
    }
    o
}

fn truncation() -> Outcome {
    let mut o = Outcome::new();
    let p = NetworkParams::default();
    let d = derive(&p).unwrap();
    let r = run_campaign(&p, &sim_config()).unwrap();
    for (name, est, model) in [
        (
            "D2D truncation",
            r.d2d_truncation,
            d.d2d_truncation_probability(),
        ),
        (
            "cellular truncation",
            r.cellular_truncation,
            d.cellular_truncation_probability,
        ),
    ] {
        let z = (est.mean - model) / est.std_error;
        o.check(
            z.abs() <= 3.0,
            format!(
                "{name}: empirical {:.5} (se {:.5}) vs {model:.5}, z = {z:.2}",
                est.mean, est.std_error
            ),
        );
    }
    o
}

fn bias_optima() -> Outcome {
    let mut o = Outcome::new();
    let p = NetworkParams::default();
    for (name, objective) in [
        ("potential D2D UE rate", BiasObjective::PotentialD2dRate),
        ("total network capacity", BiasObjective::TotalCapacity),
    ] {
        let best = optimal_bias(&p, objective, 1e-2, 1e2).unwrap();
        o.check(
            best.interior,
            format!(
                "{name}: maximum over T_d in [0.01, 100] at T_d = {:.4} (value {:.6e}; ends {:.6e}, {:.6e})",
                best.bias, best.value, best.value_at_lower, best.value_at_upper
            ),
        );
    }
    let low = at(-80.0, 0.0);
    let best = optimal_bias(&low, BiasObjective::PotentialD2dRate, 1e-2, 1e2).unwrap();
    o.note(format!(
        "potential D2D UE rate at rho_o = -80 dBm: interior = {}, T_d = {:.4}",
        best.interior, best.bias
    ));

    let grid = [0.25, 0.5, 1.0, 2.0, 4.0];
    let powers: Vec<f64> = grid
        .iter()
        .map(|&t| {
            mean_power_potential_d2d(&NetworkParams {
                bias: Bias::Finite(t),
                ..p
            })
            .unwrap()
        })
        .collect();
    let argmin = powers
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| grid[i])
        .unwrap();
    o.check(
        argmin == 1.0,
        format!(
            "mean potential D2D UE power minimized at T_d = {argmin} on {grid:?}: {powers:.5?}"
        ),
    );

    let worst = theta_grid_db()
        .iter()
        .map(|&th| {
            let (c, d) = outages(&at(-70.0, th));
            c - d
        })
        .fold(f64::NEG_INFINITY, f64::max);
    o.check(
        worst <= 0.0,
        format!("cellular outage <= D2D outage over the threshold grid: max(cellular - d2d) = {worst:.4}"),
    );
    o
}

fn determinism() -> Outcome {
    let mut o = Outcome::new();
    let config = SimulationConfig {
        num_realizations: 200,
        rng_seed: 4242,
        ..SimulationConfig::default()
    }
    .with_window_km2(25.0);
    let p = NetworkParams::default();
    let render = || {
        let mut buf = Vec::new();
        cmd_validate(&p, &config)
            .unwrap()
            .write_csv(&mut buf)
            .unwrap();
        buf
    };
    let (a, b) = (render(), render());
    o.check(
        a == b,
        format!(
            "two validate runs with seed 4242: {} and {} bytes, identical = {}",
            a.len(),
            b.len(),
            a == b
        ),
    );
    o
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (
            "analytical outage matches Monte Carlo within 0.05 at rho_o in {-80,-70,-60} dBm",
            outage_validation,
        ),
        ("outage and mode-selection monotonicity", monotonicity),
        (
            "closed forms equal quadrature within 1e-8",
            closed_form_equivalence,
        ),
        (
            "power distributions: normalization, moments, KS",
            distribution_suite,
        ),
        (
            "simulated D2D selection fraction matches the model",
            mode_selection_in_situ,
        ),
        ("simulated truncation fractions match the model", truncation),
        (
            "bias optima, power minimum at T_d = 1, cellular vs D2D outage",
            bias_optima,
        ),
        (
            "validate output is bit-identical for a fixed seed",
            determinism,
        ),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome {
                pass: false,
                details: vec![format!("FAIL panicked: {msg}")],
            }
        });
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!(
            "{verdict} [{}] {name} ({:.1} s)",
            i + 1,
            start.elapsed().as_secs_f64()
        );
        for d in &outcome.details {
            println!("       {d}");
        }
        failures += usize::from(!outcome.pass);
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
