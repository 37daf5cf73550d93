//! Weighted posterior summaries of the final population.

use serde::{Deserialize, Serialize};

use super::engine::{PmcModel, PmcRun};
use crate::error::{Error, Result};
use crate::model::correlation_of;
use crate::scalar::Real;

/// Quantile levels of the posterior tables.
pub const TABLE_LEVELS: [f64; 5] = [0.01, 0.05, 0.5, 0.95, 0.99];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterSummary {
    pub name: String,
    pub mean: f64,
    /// `sd / sqrt(ESS)`.
    pub std_error: f64,
    pub quantiles: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub levels: Vec<f64>,
    pub ess: f64,
    pub parameters: Vec<ParameterSummary>,
}

impl PosteriorSummary {
    pub fn get(&self, name: &str) -> Option<&ParameterSummary> {
        self.parameters.iter().find(|p| p.name == name)
    }
}

/// Smallest value whose cumulative normalized weight reaches `level`.
pub fn weighted_quantile(values: &[f64], weights: &[f64], level: f64) -> Result<f64> {
    if values.is_empty() || values.len() != weights.len() {
        return Err(Error::invalid("weighted_quantile: empty or mismatched input"));
    }
    if !(0.0..=1.0).contains(&level) {
        return Err(Error::invalid(format!("quantile level {level} outside [0, 1]")));
    }
    let mut order: Vec<usize> = (0..values.len()).filter(|&i| weights[i] > 0.0).collect();
    if order.is_empty() {
        return Err(Error::invalid("weighted_quantile: all weights are zero"));
    }
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let total: f64 = order.iter().map(|&i| weights[i]).sum();
    let target = level * total;
    let mut cum = 0.0;
    for &i in &order {
        cum += weights[i];
        if cum >= target {
            return Ok(values[i]);
        }
    }
    Ok(values[*order.last().expect("nonempty")])
}

/// Weighted mean and its standard error `sd/√ESS`.
pub fn weighted_mean(values: &[f64], weights: &[f64]) -> (f64, f64) {
    let total: f64 = weights.iter().sum();
    let mean = values.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / total;
    let var = values
        .iter()
        .zip(weights)
        .map(|(v, w)| w * (v - mean).powi(2))
        .sum::<f64>()
        / total;
    let ess = total * total / weights.iter().map(|w| w * w).sum::<f64>();
    (mean, (var / ess).sqrt())
}

/// Columns: location, `rho_i_j` (i < j), `omega_j`, `psi_j`.
pub fn column_names<T: Real, M: PmcModel<T>>(model: &M) -> Vec<String> {
    let p = model.data().ncols();
    let mut names = model.location_names();
    for i in 1..=p {
        for j in i + 1..=p {
            names.push(format!("rho_{i}_{j}"));
        }
    }
    names.extend((1..=p).map(|j| format!("omega_{j}")));
    names.extend((1..=p).map(|j| format!("psi_{j}")));
    names
}

/// One row of [`column_names`] values per particle, in the `(ξ, Ω, δ)` view with `ψ` kept.
pub fn particle_rows<T: Real, M: PmcModel<T>>(model: &M, run: &PmcRun<T, M::Location>) -> Result<Vec<Vec<f64>>> {
    let p = model.data().ncols();
    run.particles
        .iter()
        .map(|part| {
            let mut row = model.location_values(&part.location);
            let sigma = part.g.matrix() + &part.psi * part.psi.transpose();
            let corr = correlation_of(&sigma)?;
            for i in 0..p {
                for j in i + 1..p {
                    row.push(corr.matrix()[(i, j)].as_f64());
                }
            }
            row.extend((0..p).map(|j| sigma[(j, j)].sqrt().as_f64()));
            row.extend(part.psi.iter().map(|v| v.as_f64()));
            Ok(row)
        })
        .collect()
}

/// Weighted quantiles, means and standard errors from the final population.
pub fn posterior_summaries<T: Real, M: PmcModel<T>>(
    model: &M,
    run: &PmcRun<T, M::Location>,
    levels: &[f64],
) -> Result<PosteriorSummary> {
    let rows = particle_rows(model, run)?;
    let w = &run.weights;
    let parameters = column_names(model)
        .into_iter()
        .enumerate()
        .map(|(c, name)| {
            let col: Vec<f64> = rows.iter().map(|r| r[c]).collect();
            let quantiles = levels
                .iter()
                .map(|&q| weighted_quantile(&col, w, q))
                .collect::<Result<Vec<_>>>()?;
            let (mean, std_error) = weighted_mean(&col, w);
            Ok(ParameterSummary {
                name,
                mean,
                std_error,
                quantiles,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PosteriorSummary {
        levels: levels.to_vec(),
        ess: 1.0 / w.iter().map(|x| x * x).sum::<f64>(),
        parameters,
    })
}
