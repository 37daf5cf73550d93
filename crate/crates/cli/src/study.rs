//! Repeated simulation and fitting over a set of `(ψ, ρ)` points.

use std::collections::HashMap;

use skewpmc::model::{alpha_from_delta, sn_sample};
use skewpmc::pmc::{bayes_factor, posterior_summaries, B10Bucket, MeanModel};
use skewpmc::regression::cml_estimate;
use skewpmc::stats::RngStream;

use crate::commands::{streams, table_theta_star};
use crate::config::RunConfig;
use crate::data::{num, read_matrix, write_table, Provenance};
use crate::error::{CliError, CliResult};

/// Posterior levels recorded for `ψ₁`.
const STUDY_LEVELS: [f64; 3] = [0.5, 0.9, 0.95];

#[derive(Clone, Debug, PartialEq)]
pub struct ReplicateResult {
    pub point: usize,
    pub replicate: usize,
    pub log_b10: f64,
    pub log_b10_se: f64,
    pub psi1_median: f64,
    pub psi1_q90: f64,
    pub psi1_q95: f64,
    pub psi1_mean: f64,
    /// `ψ₁` estimated with the latent `z` known.
    pub psi1_cml: f64,
    pub psi1_mle: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyPoint {
    pub psi: f64,
    pub rho: f64,
    pub alpha1: f64,
    pub replicates: usize,
    /// Shares of replicates below, between and above the `B₁₀` thresholds.
    pub buckets: [f64; 3],
    /// Median over replicates of the posterior median of `ψ₁`.
    pub med_med: f64,
    /// Share of replicates with the true `ψ₁` at or below the posterior 0.95 quantile.
    pub fc95: f64,
    pub fc90: f64,
    pub me_mean: f64,
    pub me_cml: f64,
    pub me_mle: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Study {
    pub points: Vec<StudyPoint>,
    pub replicates: Vec<ReplicateResult>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `(point, replicate) → ψ₁` from a headerless three-column file.
fn read_mle(cfg: &RunConfig) -> CliResult<HashMap<(usize, usize), f64>> {
    let Some(path) = &cfg.mle_file else {
        return Ok(HashMap::new());
    };
    let m = read_matrix(path)?;
    if m.ncols() != 3 {
        return Err(CliError::Data(format!(
            "{}: expected 3 columns (point, replicate, psi_1)",
            path.display()
        )));
    }
    let index = |v: f64| {
        if v >= 0.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(CliError::Data(format!("{}: bad index {v}", path.display())))
        }
    };
    m.row_iter().map(|r| Ok(((index(r[0])?, index(r[1])?), r[2]))).collect()
}

pub fn run_study(cfg: &RunConfig) -> CliResult<Study> {
    let p = cfg.xi.len();
    let pmc = cfg.pmc_config(p)?;
    let mle = read_mle(cfg)?;
    let data_rng = RngStream::new(cfg.seed, streams::STUDY_DATA);
    let sampler_rng = RngStream::new(cfg.seed, streams::STUDY_SAMPLER);
    let (lo, hi) = (cfg.b10_low, cfg.b10_high);

    let mut points = Vec::with_capacity(cfg.study_points.len());
    let mut all = Vec::new();
    for (k, &[psi, rho]) in cfg.study_points.iter().enumerate() {
        let ts = table_theta_star(&cfg.xi, &cfg.omega, rho, &vec![psi; p])?;
        let alpha1 = alpha_from_delta(ts.delta(), &ts.correlation()?)?[0];
        let true_psi1 = psi;
        let mut reps = Vec::with_capacity(cfg.replicates);
        for r in 0..cfg.replicates {
            let key = ((k as u64) << 32) | r as u64;
            let sample = sn_sample(cfg.n, &ts, &mut data_rng.substream(key))?;
            let cml = cml_estimate(&sample)?;
            let y = sample.y().clone();
            let bf = bayes_factor(&y, &pmc, &sampler_rng.substream(key))?;
            let s = posterior_summaries(&MeanModel::new(y)?, &bf.run, &STUDY_LEVELS)?;
            let psi1 = s.get("psi_1").expect("psi_1 column");
            reps.push(ReplicateResult {
                point: k,
                replicate: r,
                log_b10: bf.evidence.log_b10,
                log_b10_se: bf.evidence.std_error,
                psi1_median: psi1.quantiles[0],
                psi1_q90: psi1.quantiles[1],
                psi1_q95: psi1.quantiles[2],
                psi1_mean: psi1.mean,
                psi1_cml: cml.psi_hat[0],
                psi1_mle: mle.get(&(k, r)).copied(),
            });
        }
        let m = reps.len() as f64;
        let share = |f: &dyn Fn(&ReplicateResult) -> bool| reps.iter().filter(|x| f(x)).count() as f64 / m;
        let bucket = |b: B10Bucket| share(&|x| B10Bucket::classify_with(x.log_b10, lo, hi) == b);
        let mles: Option<Vec<f64>> = reps.iter().map(|x| x.psi1_mle).collect();
        points.push(StudyPoint {
            psi,
            rho,
            alpha1,
            replicates: reps.len(),
            buckets: [
                bucket(B10Bucket::FavoursNormal),
                bucket(B10Bucket::Inconclusive),
                bucket(B10Bucket::FavoursSkew),
            ],
            med_med: median(reps.iter().map(|x| x.psi1_median).collect()),
            fc95: share(&|x| true_psi1 <= x.psi1_q95),
            fc90: share(&|x| true_psi1 <= x.psi1_q90),
            me_mean: median(reps.iter().map(|x| x.psi1_mean).collect()),
            me_cml: median(reps.iter().map(|x| x.psi1_cml).collect()),
            me_mle: mles.map(median),
        });
        all.extend(reps);
    }
    Ok(Study {
        points,
        replicates: all,
    })
}

pub fn sim_study(cfg: &RunConfig) -> CliResult<String> {
    let out = cfg.require_output()?;
    let study = run_study(cfg)?;
    let prov = Provenance {
        command: "sim-study",
        seed: cfg.seed,
        config_hash: cfg.hash(),
    };
    let opt = |v: Option<f64>| v.map(num).unwrap_or_else(|| "NA".into());

    let header: Vec<String> = [
        "psi",
        "rho",
        "alpha_1",
        "replicates",
        "b10_low",
        "b10_mid",
        "b10_high",
        "med_med_psi1",
        "fc_0.95",
        "fc_0.9",
        "me_mean",
        "me_cml",
        "me_mle",
    ]
    .map(String::from)
    .to_vec();
    let rows: Vec<Vec<String>> = study
        .points
        .iter()
        .map(|s| {
            vec![
                num(s.psi),
                num(s.rho),
                num(s.alpha1),
                s.replicates.to_string(),
                num(s.buckets[0]),
                num(s.buckets[1]),
                num(s.buckets[2]),
                num(s.med_med),
                num(s.fc95),
                num(s.fc90),
                num(s.me_mean),
                num(s.me_cml),
                opt(s.me_mle),
            ]
        })
        .collect();
    let comments = [format!(
        "n = {}, B10 thresholds {} and {}",
        cfg.n, cfg.b10_low, cfg.b10_high
    )];
    let path = out.join("study.csv");
    write_table(&path, &prov, &comments, Some(&header), &rows)?;

    let header: Vec<String> = [
        "point",
        "replicate",
        "log_b10",
        "log_b10_se",
        "psi1_median",
        "psi1_q90",
        "psi1_q95",
        "psi1_mean",
        "psi1_cml",
        "psi1_mle",
    ]
    .map(String::from)
    .to_vec();
    let rows: Vec<Vec<String>> = study
        .replicates
        .iter()
        .map(|r| {
            vec![
                r.point.to_string(),
                r.replicate.to_string(),
                num(r.log_b10),
                num(r.log_b10_se),
                num(r.psi1_median),
                num(r.psi1_q90),
                num(r.psi1_q95),
                num(r.psi1_mean),
                num(r.psi1_cml),
                opt(r.psi1_mle),
            ]
        })
        .collect();
    let rep_path = out.join("replicates.csv");
    write_table(&rep_path, &prov, &[], Some(&header), &rows)?;
    Ok(format!("wrote {} and {}", path.display(), rep_path.display()))
}
