//! Importance-weight diagnostics, resampling and the evidence estimator.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resampling {
    #[default]
    Multinomial,
    Systematic,
}

/// Per-iteration summary of a weighted population.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationDiagnostics {
    pub iteration: usize,
    /// `H = −Σ ζ_i log ζ_i` over normalized weights.
    pub entropy: f64,
    /// `exp(H)/N`.
    pub perplexity: f64,
    /// `log((1/N) Σ ζ̃_i)`.
    pub log_evidence_increment: f64,
    /// `1/Σ ζ_i²`.
    pub ess: f64,
    /// Share of particles whose weight vanished.
    pub degenerate_fraction: f64,
}

/// `log p(y)` and its delta-method standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogEvidence {
    pub value: f64,
    pub std_error: f64,
}

/// Normalized weights from unnormalized log weights; `None` when every weight vanished.
pub fn normalize_log_weights(log_w: &[f64]) -> Option<Vec<f64>> {
    let max = log_w
        .iter()
        .copied()
        .filter(|x| !x.is_nan())
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let mut w: Vec<f64> = log_w
        .iter()
        .map(|&l| if l.is_nan() { 0.0 } else { (l - max).exp() })
        .collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    Some(w)
}

/// Shannon entropy with `0 log 0 = 0`.
pub fn entropy(weights: &[f64]) -> f64 {
    -weights.iter().filter(|&&w| w > 0.0).map(|&w| w * w.ln()).sum::<f64>()
}

pub fn perplexity(weights: &[f64]) -> f64 {
    entropy(weights).exp() / weights.len() as f64
}

/// Diagnostics for one iteration, or an error if the population degenerated completely.
pub fn diagnose(iteration: usize, log_w: &[f64]) -> Result<(IterationDiagnostics, Vec<f64>)> {
    let n = log_w.len();
    let w = normalize_log_weights(log_w).ok_or(Error::DegenerateWeights { iteration })?;
    let h = entropy(&w);
    let degenerate = log_w.iter().filter(|l| !l.is_finite()).count();
    let diag = IterationDiagnostics {
        iteration,
        entropy: h,
        perplexity: (h.exp() / n as f64).min(1.0),
        log_evidence_increment: crate::scalar::log_mean_exp(log_w),
        ess: 1.0 / w.iter().map(|x| x * x).sum::<f64>(),
        degenerate_fraction: degenerate as f64 / n as f64,
    };
    Ok((diag, w))
}

/// `log[Σ_t H_t m_t / Σ_t H_t]` with `m_t` the mean unnormalized weight of iteration `t`.
///
/// The variance of each `m_t` is estimated by `m_t² (Σ ζ_i² − 1/N)` and the
/// iterations are treated as independent. If every `H_t` is zero the
/// iterations are averaged with equal weight.
pub fn combine_evidence(iters: &[IterationDiagnostics], particles: usize) -> Result<LogEvidence> {
    if iters.is_empty() {
        return Err(Error::invalid("no iterations to combine"));
    }
    let total_h: f64 = iters.iter().map(|d| d.entropy).sum();
    let coef: Vec<f64> = if total_h > 0.0 {
        iters.iter().map(|d| d.entropy / total_h).collect()
    } else {
        vec![1.0 / iters.len() as f64; iters.len()]
    };
    let shift = iters
        .iter()
        .zip(&coef)
        .filter(|(_, &c)| c > 0.0)
        .map(|(d, _)| d.log_evidence_increment)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut mean = 0.0;
    let mut var = 0.0;
    for (d, &c) in iters.iter().zip(&coef) {
        if c == 0.0 {
            continue;
        }
        let m = (d.log_evidence_increment - shift).exp();
        let rel = (1.0 / d.ess - 1.0 / particles as f64).max(0.0);
        mean += c * m;
        var += c * c * m * m * rel;
    }
    Ok(LogEvidence {
        value: shift + mean.ln(),
        std_error: var.sqrt() / mean,
    })
}

/// Offspring indices drawn according to normalized `weights`.
pub fn resample<R: Rng + ?Sized>(weights: &[f64], count: usize, scheme: Resampling, rng: &mut R) -> Vec<usize> {
    if count == 0 {
        return vec![];
    }
    // Ordered uniforms on [0, 1).
    let points: Vec<f64> = match scheme {
        Resampling::Systematic => {
            let u: f64 = rng.random();
            (0..count).map(|k| (k as f64 + u) / count as f64).collect()
        }
        Resampling::Multinomial => {
            // Normalized partial sums of exponentials are sorted uniforms.
            let e: Vec<f64> = (0..=count).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let total: f64 = e.iter().sum();
            let mut acc = 0.0;
            e[..count]
                .iter()
                .map(|x| {
                    acc += x;
                    acc / total
                })
                .collect()
        }
    };
    let last = weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1);
    let mut out = Vec::with_capacity(count);
    let mut cum = 0.0;
    let mut i = 0;
    for u in points {
        while i < last && cum + weights[i] <= u {
            cum += weights[i];
            i += 1;
        }
        out.push(i);
    }
    out
}
