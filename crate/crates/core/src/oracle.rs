//! Independent reference computations for validating the analytical model:
//! direct geometric sampling of link distances and a Kolmogorov–Smirnov
//! statistic against a pdf integrated numerically.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::model::{derive, Bias, NetworkParams};
use crate::specfun::{integrate_finite, QuadratureSpec};

/// Nearest-BS distance: Rayleigh with pdf 2πλr e^{−πλr²}.
pub fn sample_cellular_distance<R: Rng>(rng: &mut R, params: &NetworkParams) -> f64 {
    let u: f64 = rng.random();
    (-(1.0 - u).ln() / params.pi_lambda()).sqrt()
}

/// D2D link distance of an admitted potential D2D UE: uniform in the disk of
/// radius R.
pub fn sample_d2d_distance<R: Rng>(rng: &mut R, d2d_range: f64) -> f64 {
    d2d_range * rng.random::<f64>().sqrt()
}

/// `n` powers ρ_o r_d^{η_d} of admitted potential D2D UEs that pass the
/// selection rule against an independent nearest-BS distance.
pub fn sample_d2d_mode_powers(
    params: &NetworkParams,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>, Error> {
    let derived = derive(params)?;
    if params.bias.is_zero() {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho = params.cutoff_threshold;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let rd = sample_d2d_distance(&mut rng, derived.d2d_range);
        let rc = sample_cellular_distance(&mut rng, params);
        let pd = rho * rd.powf(params.pathloss_d2d);
        let pc = rho * rc.powf(params.pathloss_cellular);
        if params.bias.selects_d2d(pd, pc) {
            out.push(pd);
        }
    }
    Ok(out)
}

/// `n` powers ρ_o r_c^{η_c} of covered UEs (r_c within the inversion range).
pub fn sample_covered_cellular_powers(
    params: &NetworkParams,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>, Error> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho = params.cutoff_threshold;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let pc = rho * sample_cellular_distance(&mut rng, params).powf(params.pathloss_cellular);
        if pc <= params.max_tx_power {
            out.push(pc);
        }
    }
    Ok(out)
}

/// Fraction of `n` covered potential D2D UEs that select cellular mode,
/// with its binomial standard error.
pub fn sample_case4_cellular_fraction(
    params: &NetworkParams,
    n: usize,
    seed: u64,
) -> Result<(f64, f64), Error> {
    let derived = derive(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho = params.cutoff_threshold;
    let (mut seen, mut cellular) = (0usize, 0usize);
    while seen < n {
        let pc = rho * sample_cellular_distance(&mut rng, params).powf(params.pathloss_cellular);
        if pc > params.max_tx_power {
            continue;
        }
        let pd = rho * sample_d2d_distance(&mut rng, derived.d2d_range).powf(params.pathloss_d2d);
        seen += 1;
        if !params.bias.selects_d2d(pd, pc) {
            cellular += 1;
        }
    }
    let f = cellular as f64 / n as f64;
    Ok((f, (f * (1.0 - f) / n as f64).sqrt()))
}

/// Sample mean and standard error.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Upper bound on the Kolmogorov–Smirnov distance between the sample and
/// the distribution with density `pdf` on `(lower, upper]`.
///
/// The model CDF is evaluated by quadrature at `grid` empirical quantiles
/// and compared with the empirical CDF on both sides of each quantile.
/// Between quantiles both CDFs are nondecreasing and the empirical one rises
/// by at most `1/grid`, which is added to the result.
pub fn ks_distance_bound<F: Fn(f64) -> f64>(
    samples: &mut [f64],
    pdf: F,
    lower: f64,
    upper: f64,
    grid: usize,
) -> Result<f64, Error> {
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    let spec = QuadratureSpec {
        relative_tolerance: 1e-10,
        absolute_tolerance: 1e-13,
        max_subdivisions: 400,
    };
    let mut cdf = 0.0;
    let mut prev = lower;
    let mut worst: f64 = 0.0;
    for k in 1..=grid {
        let idx = (k * n / grid).max(1) - 1;
        let x = samples[idx].min(upper);
        cdf += integrate_finite(&pdf, prev, x, &spec)?;
        prev = x;
        let below = idx as f64 / n as f64;
        let at = (idx + 1) as f64 / n as f64;
        worst = worst.max((cdf - below).abs()).max((cdf - at).abs());
    }
    Ok(worst + 1.0 / grid as f64)
}

/// Bias values used for exercising finite and limiting behaviour.
pub fn representative_biases() -> [Bias; 5] {
    [
        Bias::Finite(0.1),
        Bias::Finite(0.5),
        Bias::Finite(1.0),
        Bias::Finite(4.0),
        Bias::Infinite,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_bound_detects_the_wrong_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut xs: Vec<f64> = (0..200_000).map(|_| rng.random::<f64>()).collect();
        let good = ks_distance_bound(&mut xs.clone(), |_| 1.0, 0.0, 1.0, 500).unwrap();
        assert!(good < 0.01, "{good}");
        let bad = ks_distance_bound(&mut xs, |x| 2.0 * x, 0.0, 1.0, 500).unwrap();
        assert!(bad > 0.2, "{bad}");
    }

    #[test]
    fn sampled_powers_respect_the_cap() {
        let p = NetworkParams::default();
        assert!(sample_d2d_mode_powers(&p, 1000, 3)
            .unwrap()
            .iter()
            .all(|&x| x <= p.max_tx_power));
        assert!(sample_covered_cellular_powers(&p, 1000, 3)
            .unwrap()
            .iter()
            .all(|&x| x <= p.max_tx_power));
    }
}
