//! Histograms, the two-sample Kolmogorov-Smirnov statistic, and Gamma
//! distribution fitting.

use serde::{Deserialize, Serialize};
use statrs::distribution::ContinuousCDF;

use crate::error::{Error, Result};

pub use statrs::function::gamma::{digamma, ln_gamma};

/// Trigamma function: upward recurrence to `x >= 10`, then the asymptotic
/// series.
pub fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    acc + inv
        + 0.5 * inv2
        + inv * inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 / 30.0)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    MaximumLikelihood,
    Moments,
}

/// Fitted Gamma(shape `alpha`, scale `theta`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaFit {
    pub alpha: f64,
    pub theta: f64,
    #[serde(rename = "loglik")]
    pub log_likelihood: f64,
    #[serde(rename = "n")]
    pub n_samples: usize,
    pub method: FitMethod,
}

impl GammaFit {
    pub fn cdf(&self, x: f64) -> f64 {
        match statrs::distribution::Gamma::new(self.alpha, 1.0 / self.theta) {
            Ok(d) => d.cdf(x),
            Err(_) => f64::NAN,
        }
    }

    /// KS distance between `samples` and the fitted CDF.
    pub fn ks(&self, samples: &[f64]) -> Result<f64> {
        ks_against_cdf(samples, |x| self.cdf(x))
    }
}

/// Log-likelihood of `samples` under Gamma(alpha, theta).
pub fn gamma_log_likelihood(samples: &[f64], alpha: f64, theta: f64) -> f64 {
    let n = samples.len() as f64;
    let sum: f64 = samples.iter().sum();
    let sum_ln: f64 = samples.iter().map(|x| x.ln()).sum();
    (alpha - 1.0) * sum_ln - sum / theta - n * ln_gamma(alpha) - n * alpha * theta.ln()
}

fn check_samples(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::DegenerateFit(format!("need at least 2 samples, got {}", samples.len())));
    }
    if let Some(x) = samples.iter().find(|&&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::Domain(format!("sample {x} is not a positive number")));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    if var <= mean * mean * 1e-14 {
        return Err(Error::DegenerateFit("samples have zero variance".into()));
    }
    Ok((mean, var))
}

/// Method-of-moments fit: `alpha = mean^2 / var`, `theta = var / mean`.
pub fn fit_gamma_moments(samples: &[f64]) -> Result<GammaFit> {
    let (mean, var) = check_samples(samples)?;
    let alpha = mean * mean / var;
    let theta = var / mean;
    Ok(GammaFit {
        alpha,
        theta,
        log_likelihood: gamma_log_likelihood(samples, alpha, theta),
        n_samples: samples.len(),
        method: FitMethod::Moments,
    })
}

/// Maximum-likelihood fit: solves `ln a - digamma(a) = ln(mean) - mean(ln x)`
/// by Newton steps kept inside a shrinking bracket, then `theta = mean / a`.
pub fn fit_gamma(samples: &[f64]) -> Result<GammaFit> {
    let (mean, _) = check_samples(samples)?;
    let n = samples.len() as f64;
    let s = mean.ln() - samples.iter().map(|x| x.ln()).sum::<f64>() / n;
    if !(s > 1e-12) {
        return Err(Error::DegenerateFit(format!("log-mean gap {s} too small")));
    }
    // f(a) = ln a - digamma(a) - s is strictly decreasing
    let f = |a: f64| a.ln() - digamma(a) - s;
    let mut lo = 1e-8;
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::DegenerateFit("shape parameter diverges".into()));
        }
    }
    let mut a = (3.0 - s + ((s - 3.0).powi(2) + 24.0 * s).sqrt()) / (12.0 * s);
    if !(a > lo && a < hi) {
        a = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let fa = f(a);
        if fa > 0.0 {
            lo = a;
        } else {
            hi = a;
        }
        let slope = 1.0 / a - trigamma(a);
        let mut next = a - fa / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - a).abs() <= 1e-12 * a || hi - lo <= 1e-12 * a {
            a = next;
            break;
        }
        a = next;
    }
    let theta = mean / a;
    Ok(GammaFit {
        alpha: a,
        theta,
        log_likelihood: gamma_log_likelihood(samples, a, theta),
        n_samples: samples.len(),
        method: FitMethod::MaximumLikelihood,
    })
}

/// Bin specification for [`histogram`].
#[derive(Clone, Debug, PartialEq)]
pub enum Bins {
    /// Equal-width bins spanning the sample range.
    Count(usize),
    /// Explicit, strictly increasing edges.
    Edges(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

/// Left-closed bins, last bin closed on both sides. Samples outside the edges
/// are not counted.
pub fn histogram(samples: &[f64], bins: &Bins) -> Result<Histogram> {
    let edges = match bins {
        Bins::Count(0) => return Err(Error::Domain("need at least one bin".into())),
        Bins::Count(_) if samples.is_empty() => {
            return Ok(Histogram { edges: vec![], counts: vec![] })
        }
        Bins::Count(k) => {
            let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
            let w = (hi - lo) / *k as f64;
            let mut e: Vec<f64> = (0..=*k).map(|i| lo + w * i as f64).collect();
            e[*k] = hi;
            e
        }
        Bins::Edges(e) => {
            if e.len() < 2 || e.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::Domain("bin edges must be increasing, at least two".into()));
            }
            e.clone()
        }
    };
    let k = edges.len() - 1;
    let mut counts = vec![0u64; k];
    for &x in samples {
        if x < edges[0] || x > edges[k] || x.is_nan() {
            continue;
        }
        // first edge strictly greater than x
        let idx = edges.partition_point(|&e| e <= x);
        counts[(idx - 1).min(k - 1)] += 1;
    }
    Ok(Histogram { edges, counts })
}

/// Sup-norm distance between the empirical CDFs of `a` and `b`.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("KS distance needs two nonempty samples".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Sup-norm distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_against_cdf<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Domain("KS distance needs a nonempty sample".into()));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    Ok(xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max))
}
