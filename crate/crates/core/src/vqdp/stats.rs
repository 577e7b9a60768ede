//! Shot statistics of the single-pair product estimator.
//!
//! Each shot on the product qubit is a ±1 variable with mean `xy`, so the
//! M-shot average has variance `(1 − (xy)²)/M`. Two tail bounds are provided:
//! Hoeffding for `[−1, 1]` variables, and a multiplicative Chernoff bound on
//! the count of `−1` outcomes, whose success probability is `q = (1 − xy)/2`.

use crate::error::{Error, Result};
use crate::rng::{binomial, derive_seed, rng_from_seed};

/// Variance of the M-shot estimate of `⟨Z⟩ = xy`.
pub fn estimator_variance(xy: f64, shots: u64) -> Result<f64> {
    if shots == 0 {
        return Err(Error::argument("variance needs at least one shot"));
    }
    if !(-1.0..=1.0).contains(&xy) {
        return Err(Error::Domain {
            value: xy,
            location: "estimator_variance(xy)".into(),
        });
    }
    Ok((1.0 - xy * xy) / shots as f64)
}

/// Upper bounds on `Pr[|Ẑ − xy| ≥ ε]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBounds {
    pub hoeffding: f64,
    /// `None` when `q = 0` (xy = 1), where the bound is undefined.
    pub chernoff: Option<f64>,
}

impl TailBounds {
    /// The tighter of the defined bounds.
    pub fn min(&self) -> f64 {
        self.chernoff.map_or(self.hoeffding, |c| c.min(self.hoeffding))
    }
}

/// Hoeffding `2·exp(−Mε²/2)` and Chernoff `2·exp(−ε²M/(12q))` with
/// `q = (1 − xy)/2`.
///
/// The Hoeffding exponent carries the squared outcome range 2² of ±1 shots;
/// the frequently quoted `2·exp(−2Mε²)` holds only for outcomes in `[0, 1]`
/// and is exceeded by ẑ. The Chernoff form follows from the binomial count of
/// −1 outcomes with `δ = ε/(2q)` and is valid for `ε ≤ 2q`.
pub fn deviation_bounds(eps: f64, shots: u64, xy: f64) -> Result<TailBounds> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::argument(format!("eps must be positive, got {eps}")));
    }
    if shots == 0 {
        return Err(Error::argument("bounds need at least one shot"));
    }
    if !(-1.0..=1.0).contains(&xy) {
        return Err(Error::Domain {
            value: xy,
            location: "deviation_bounds(xy)".into(),
        });
    }
    let m = shots as f64;
    let q = (1.0 - xy) / 2.0;
    Ok(TailBounds {
        hoeffding: 2.0 * (-m * eps * eps / 2.0).exp(),
        chernoff: (q > 0.0).then(|| 2.0 * (-eps * eps * m / (12.0 * q)).exp()),
    })
}

/// `trials` independent M-shot estimates of `⟨Z⟩ = xy`, drawn as binomial
/// counts of `+1` outcomes. Trial `t` uses the stream `derive_seed(seed, t)`.
pub fn simulate_estimates(xy: f64, shots: u64, trials: usize, seed: u64) -> Result<Vec<f64>> {
    estimator_variance(xy, shots)?;
    let p0 = (1.0 + xy) / 2.0;
    Ok((0..trials)
        .map(|t| {
            let mut rng = rng_from_seed(derive_seed(seed, t as u64));
            let n0 = binomial(&mut rng, shots, p0);
            (2.0 * n0 as f64 - shots as f64) / shots as f64
        })
        .collect())
}

/// Fraction of estimates deviating from `xy` by at least `eps`.
pub fn tail_frequency(estimates: &[f64], xy: f64, eps: f64) -> f64 {
    if estimates.is_empty() {
        return 0.0;
    }
    // Estimates live on a grid of 2/M; compare with a tolerance so that a
    // deviation of exactly eps is counted.
    let hits = estimates.iter().filter(|z| (*z - xy).abs() >= eps - 1e-12).count();
    hits as f64 / estimates.len() as f64
}

/// Unbiased sample mean and variance.
pub fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Fit("need at least two matched points".into()));
    }
    if xs.iter().chain(ys).any(|v| v.is_nan() || *v <= 0.0) {
        return Err(Error::Fit("log-log fit needs positive values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let (mx, _) = mean_and_variance(&lx);
    let (my, _) = mean_and_variance(&ly);
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all x values are equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}
