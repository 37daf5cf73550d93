//! The `simulate`, `fit`, `bf` and `estimate-a` commands.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use skewpmc::model::{sn_sample, ThetaStar};
use skewpmc::pmc::trace::TraceWriter;
use skewpmc::pmc::{
    check_evidence_config, log_p0_closed_form, posterior_summaries, B10Bucket, EvidenceEstimate, IterationDiagnostics,
    MeanModel, PmcConfig, PmcModel, PmcRun, PosteriorSummary, Sampler,
};
use skewpmc::priors::{estimate_a_grid, fit_a_from_values, ACoefficients, AEstimate};
use skewpmc::regression::{RegressionData, RegressionModel};
use skewpmc::stats::{RngStream, SpdMatrix};

use crate::config::RunConfig;
use crate::data::{num, read_matrix, split_columns, write_table, write_text, Provenance};
use crate::error::{CliError, CliResult};

/// RNG stream ids, so that the commands never share draws for the same seed.
pub(crate) mod streams {
    pub const SIMULATE: u64 = 0;
    pub const SAMPLER: u64 = 1;
    pub const A_GRID: u64 = 2;
    pub const STUDY_DATA: u64 = 3;
    pub const STUDY_SAMPLER: u64 = 4;
}

fn provenance(command: &'static str, cfg: &RunConfig) -> Provenance {
    Provenance {
        command,
        seed: cfg.seed,
        config_hash: cfg.hash(),
    }
}

/// `(ξ, ω, Ω, δ)` with a common correlation `ρ` and `δ = ψ/ω`.
pub fn table_theta_star(xi: &[f64], omega: &[f64], rho: f64, psi: &[f64]) -> CliResult<ThetaStar<f64>> {
    let p = xi.len();
    if p == 0 || omega.len() != p || psi.len() != p {
        return Err(CliError::Config(format!(
            "xi, omega and psi need equal nonzero lengths, got {}, {} and {}",
            p,
            omega.len(),
            psi.len()
        )));
    }
    let corr = DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { rho });
    let corr = SpdMatrix::with_context(corr, "correlation matrix").map_err(|_| {
        CliError::Config(format!(
            "rho = {rho} does not give a positive definite correlation matrix"
        ))
    })?;
    let delta = DVector::from_fn(p, |j, _| psi[j] / omega[j]);
    Ok(ThetaStar::from_correlation(
        DVector::from_column_slice(xi),
        &DVector::from_column_slice(omega),
        &corr,
        delta,
    )?)
}

pub fn simulate(cfg: &RunConfig) -> CliResult<String> {
    let out = cfg.require_output()?;
    let ts = table_theta_star(&cfg.xi, &cfg.omega, cfg.rho, &cfg.psi)?;
    let sample = sn_sample(cfg.n, &ts, &mut RngStream::new(cfg.seed, streams::SIMULATE))?;
    let p = ts.dim();
    let rows: Vec<Vec<String>> = (0..cfg.n)
        .map(|i| {
            let mut r: Vec<String> = (0..p).map(|j| num(sample.y()[(i, j)])).collect();
            if cfg.write_z {
                r.push(num(sample.z()[i]));
            }
            r
        })
        .collect();
    let mut cols: Vec<String> = (1..=p).map(|j| format!("y_{j}")).collect();
    if cfg.write_z {
        cols.push("z".into());
    }
    let comments = [format!("columns: {}", cols.join(", "))];
    write_table(out, &provenance("simulate", cfg), &comments, None, &rows)?;
    Ok(format!(
        "wrote {} observations of dimension {p} to {}",
        cfg.n,
        out.display()
    ))
}

/// Everything a fit produces.
pub struct FitOutcome {
    pub model: &'static str,
    /// Number of response columns.
    pub dim: usize,
    pub summary: PosteriorSummary,
    pub diagnostics: Vec<IterationDiagnostics>,
    /// Present only for priors whose evidence is comparable with the Gaussian model.
    pub evidence: Option<EvidenceEstimate>,
}

type ModelRun<L> = (PmcRun<f64, L>, PosteriorSummary, Option<EvidenceEstimate>);

fn run_model<M: PmcModel<f64>>(
    model: &M,
    pmc: PmcConfig,
    seed: u64,
    levels: &[f64],
    log_p0: impl FnOnce() -> skewpmc::Result<f64>,
) -> CliResult<ModelRun<M::Location>> {
    let comparable = check_evidence_config(&pmc).is_ok();
    let run = Sampler::new(model, pmc)?.run(&RngStream::new(seed, streams::SAMPLER))?;
    let summary = posterior_summaries(model, &run, levels)?;
    let evidence = if comparable {
        Some(EvidenceEstimate::new(
            run.log_evidence.value,
            run.log_evidence.std_error,
            log_p0()?,
        ))
    } else {
        None
    };
    Ok((run, summary, evidence))
}

/// Fits the mean model, or the regression model when covariates are configured.
pub fn fit_data(cfg: &RunConfig, table: &DMatrix<f64>) -> CliResult<FitOutcome> {
    let (y, covariates) = split_columns(table, &cfg.response_columns, &cfg.covariate_columns)?;
    let pmc = cfg.pmc_config(y.ncols())?;
    if covariates.ncols() == 0 && cfg.intercept {
        let model = MeanModel::new(y.clone())?;
        let (run, summary, evidence) = run_model(&model, pmc, cfg.seed, &cfg.quantiles, || log_p0_closed_form(&y))?;
        return Ok(FitOutcome {
            model: "mean",
            dim: y.ncols(),
            summary,
            diagnostics: run.diagnostics,
            evidence,
        });
    }
    let x = if cfg.intercept {
        let mut x = DMatrix::from_element(y.nrows(), covariates.ncols() + 1, 1.0);
        x.view_mut((0, 1), (y.nrows(), covariates.ncols()))
            .copy_from(&covariates);
        x
    } else {
        covariates
    };
    if x.ncols() == 0 {
        return Err(CliError::Config("no covariates and no intercept".into()));
    }
    let dim = y.ncols();
    let model = RegressionModel::new(RegressionData::new(y, x)?)?;
    let (run, summary, evidence) = run_model(&model, pmc, cfg.seed, &cfg.quantiles, || model.log_p0())?;
    Ok(FitOutcome {
        model: "regression",
        dim,
        summary,
        diagnostics: run.diagnostics,
        evidence,
    })
}

fn trace_path(cfg: &RunConfig) -> Option<PathBuf> {
    cfg.trace
        .clone()
        .or_else(|| cfg.output.as_ref().map(|o| o.join("trace.jsonl")))
}

fn write_trace(cfg: &RunConfig, fit: &FitOutcome) -> CliResult<Option<PathBuf>> {
    let Some(path) = trace_path(cfg) else {
        return Ok(None);
    };
    crate::data::ensure_parent(&path)?;
    let io = |e| CliError::io(&path, e);
    let file = BufWriter::new(File::create(&path).map_err(io)?);
    let mut w = TraceWriter::new(file, cfg.seed, fit.model, &cfg.pmc_config(fit.dim)?).map_err(io)?;
    for d in &fit.diagnostics {
        w.iteration(d).map_err(io)?;
    }
    w.into_inner().map_err(io)?;
    Ok(Some(path))
}

/// Rows `statistic, <parameters...>`: one per quantile level, then `mean` and `se`.
pub fn summary_rows(summary: &PosteriorSummary) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = vec!["statistic".to_string()];
    header.extend(summary.parameters.iter().map(|p| p.name.clone()));
    let mut rows: Vec<Vec<String>> = summary
        .levels
        .iter()
        .enumerate()
        .map(|(k, &level)| {
            let mut r = vec![format!("q{}", num(level))];
            r.extend(summary.parameters.iter().map(|p| num(p.quantiles[k])));
            r
        })
        .collect();
    for (label, pick) in [("mean", 0), ("se", 1)] {
        let mut r = vec![label.to_string()];
        r.extend(
            summary
                .parameters
                .iter()
                .map(|p| num(if pick == 0 { p.mean } else { p.std_error })),
        );
        rows.push(r);
    }
    (header, rows)
}

#[derive(Serialize)]
struct EvidenceRecord<'a> {
    seed: u64,
    config_hash: &'a str,
    log_p0: f64,
    log_p1: f64,
    std_error: f64,
    log_b10: f64,
    b10: f64,
    bucket: String,
}

fn bucket_label(cfg: &RunConfig, log_b10: f64) -> String {
    match B10Bucket::classify_with(log_b10, cfg.b10_low, cfg.b10_high) {
        B10Bucket::FavoursNormal => format!("B10<{}", cfg.b10_low),
        B10Bucket::Inconclusive => format!("{}<=B10<{}", cfg.b10_low, cfg.b10_high),
        B10Bucket::FavoursSkew => format!("B10>={}", cfg.b10_high),
    }
}

fn evidence_json(cfg: &RunConfig, ev: &EvidenceEstimate) -> String {
    let hash = cfg.hash();
    let rec = EvidenceRecord {
        seed: cfg.seed,
        config_hash: &hash,
        log_p0: ev.log_p0,
        log_p1: ev.log_p1,
        std_error: ev.std_error,
        log_b10: ev.log_b10,
        b10: ev.log_b10.exp(),
        bucket: bucket_label(cfg, ev.log_b10),
    };
    let mut s = serde_json::to_string_pretty(&rec).expect("evidence serializes");
    s.push('\n');
    s
}

pub fn fit(cfg: &RunConfig) -> CliResult<String> {
    let input = cfg.require_input()?;
    let out = cfg.require_output()?;
    let table = read_matrix(input)?;
    let fit = fit_data(cfg, &table)?;

    let (header, rows) = summary_rows(&fit.summary);
    let summary_path = out.join("summary.csv");
    let comments = [
        format!("model: {}", fit.model),
        format!("ess: {}", num(fit.summary.ess)),
    ];
    write_table(&summary_path, &provenance("fit", cfg), &comments, Some(&header), &rows)?;
    write_trace(cfg, &fit)?;
    let mut msg = format!("wrote {}", summary_path.display());
    if let Some(ev) = &fit.evidence {
        let path = out.join("evidence.json");
        write_text(&path, &evidence_json(cfg, ev))?;
        let _ = write!(msg, " and {}", path.display());
    }
    Ok(msg)
}

/// Human-readable evidence report.
pub fn bf_report(cfg: &RunConfig, fit: &FitOutcome) -> CliResult<String> {
    let ev = fit
        .evidence
        .as_ref()
        .ok_or_else(|| CliError::Config("this prior does not give a comparable evidence".into()))?;
    let mut s = String::new();
    let _ = writeln!(s, "model      {}", fit.model);
    let _ = writeln!(s, "seed       {}", cfg.seed);
    let _ = writeln!(s, "log p0     {:.6}", ev.log_p0);
    let _ = writeln!(s, "log p1     {:.6} +/- {:.6}", ev.log_p1, ev.std_error);
    let _ = writeln!(s, "log B10    {:.6}", ev.log_b10);
    let _ = writeln!(s, "B10        {:.6e}", ev.log_b10.exp());
    let _ = writeln!(s, "bucket     {}", bucket_label(cfg, ev.log_b10));
    let _ = writeln!(s, "iteration  entropy     perplexity  log_increment  ess");
    for d in &fit.diagnostics {
        let _ = writeln!(
            s,
            "{:<10} {:<11.5} {:<11.5} {:<14.6} {:.2}",
            d.iteration, d.entropy, d.perplexity, d.log_evidence_increment, d.ess
        );
    }
    Ok(s)
}

pub fn bf(cfg: &RunConfig) -> CliResult<String> {
    let input = cfg.require_input()?;
    let table = read_matrix(input)?;
    let (y, _) = split_columns(&table, &cfg.response_columns, &cfg.covariate_columns)?;
    check_evidence_config(&cfg.pmc_config(y.ncols())?)?;
    let fit = fit_data(cfg, &table)?;
    let report = bf_report(cfg, &fit)?;
    if let Some(out) = &cfg.output {
        write_text(&out.join("bf.txt"), &report)?;
        write_text(
            &out.join("evidence.json"),
            &evidence_json(cfg, fit.evidence.as_ref().expect("checked")),
        )?;
    }
    write_trace(cfg, &fit)?;
    Ok(report)
}

/// `A(ρ)` estimates on the grid and the least-squares `(a, b)`.
pub fn estimate_a_table(cfg: &RunConfig) -> CliResult<(Vec<AEstimate>, ACoefficients)> {
    if cfg.a_grid.len() < 5 {
        return Err(CliError::Config(format!(
            "a_grid needs at least five points, got {}",
            cfg.a_grid.len()
        )));
    }
    let est = estimate_a_grid(&cfg.a_grid, cfg.a_draws, &RngStream::new(cfg.seed, streams::A_GRID))?;
    let values: Vec<f64> = est.iter().map(|e| e.value).collect();
    let coef = fit_a_from_values(&cfg.a_grid, &values)?;
    Ok((est, coef))
}

pub fn estimate_a(cfg: &RunConfig) -> CliResult<String> {
    let (est, coef) = estimate_a_table(cfg)?;
    let rows: Vec<Vec<String>> = cfg
        .a_grid
        .iter()
        .zip(&est)
        .map(|(&rho, e)| {
            let fitted = coef.a * (1.0 - rho * rho).powf(coef.b);
            vec![num(rho), num(e.value), num(e.std_error), num(fitted)]
        })
        .collect();
    let mut s = format!("a = {:.4}\nb = {:.4}\n", coef.a, coef.b);
    if let Some(out) = &cfg.output {
        let header: Vec<String> = ["rho", "a_hat", "std_error", "fitted"].map(String::from).to_vec();
        let comments = [format!("fit: a = {}, b = {}", num(coef.a), num(coef.b))];
        write_table(out, &provenance("estimate-a", cfg), &comments, Some(&header), &rows)?;
        let _ = writeln!(s, "wrote {}", out.display());
    }
    Ok(s)
}
