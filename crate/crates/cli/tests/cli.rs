use std::path::Path;
use std::process::{Command, Output};

use skewpmc_cli::data::read_matrix;

fn skewpmc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skewpmc"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = skewpmc(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

const DESK: [&str; 4] = ["--set", "preset=desk", "--set", "threads=2"];

fn with_desk<'a>(args: &[&'a str]) -> Vec<&'a str> {
    args.iter().copied().chain(DESK).collect()
}

#[test]
fn simulate_writes_requested_shape_with_provenance() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["simulate", "-o", "y.csv", "--set", "psi=[0.7, 0.7]", "--set", "n=200"],
    );
    let y = read_matrix(&dir.path().join("y.csv")).unwrap();
    assert_eq!(y.shape(), (200, 2));
    let text = std::fs::read_to_string(dir.path().join("y.csv")).unwrap();
    assert!(text.contains("# seed: 1\n"));
    assert!(text.contains("# config_hash: "));

    ok(
        dir.path(),
        &["simulate", "-o", "yz.csv", "--set", "n=10", "--set", "write_z=true"],
    );
    assert_eq!(read_matrix(&dir.path().join("yz.csv")).unwrap().shape(), (10, 3));
}

#[test]
fn simulated_means_match_skew_normal_moments() {
    let dir = tempfile::tempdir().unwrap();
    let n = 40_000;
    ok(
        dir.path(),
        &[
            "simulate",
            "-o",
            "y.csv",
            "--set",
            &format!("n={n}"),
            "--set",
            "xi=[1.0, -2.0]",
            "--set",
            "omega=[2.0, 0.5]",
            "--set",
            "psi=[1.2, 0.3]",
            "--set",
            "rho=0.3",
        ],
    );
    let y = read_matrix(&dir.path().join("y.csv")).unwrap();
    // E[y] = ξ + ψ √(2/π), Var[y_j] = ω_j² − (2/π) ψ_j².
    let c = (2.0 / std::f64::consts::PI).sqrt();
    for (j, (xi, omega, psi)) in [(1.0, 2.0, 1.2), (-2.0, 0.5, 0.3)].into_iter().enumerate() {
        let mean = y.column(j).mean();
        let sd = (omega * omega - c * c * psi * psi).sqrt();
        let se = sd / (n as f64).sqrt();
        assert!((mean - (xi + psi * c)).abs() < 4.0 * se, "column {j}: {mean}");
    }
}

#[test]
fn fit_emits_table_trace_and_evidence_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["simulate", "-o", "y.csv", "--set", "n=150"]);
    let fit = with_desk(&["fit", "-i", "y.csv", "-o", "a", "--set", "iterations=4"]);
    ok(d, &fit);
    let again = with_desk(&["fit", "-i", "y.csv", "-o", "b", "--set", "iterations=4"]);
    ok(d, &again);
    for f in ["summary.csv", "trace.jsonl", "evidence.json"] {
        let a = std::fs::read(d.join("a").join(f)).unwrap();
        assert_eq!(a, std::fs::read(d.join("b").join(f)).unwrap(), "{f}");
    }
    let summary = std::fs::read_to_string(d.join("a/summary.csv")).unwrap();
    let header = summary.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "statistic,xi_1,xi_2,rho_1_2,omega_1,omega_2,psi_1,psi_2");
    let stats: Vec<&str> = summary
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(stats, ["q0.01", "q0.05", "q0.5", "q0.95", "q0.99", "mean", "se"]);

    let trace = std::fs::read_to_string(d.join("a/trace.jsonl")).unwrap();
    let records: Vec<serde_json::Value> = trace.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 5);
    assert_eq!(records[0]["record"], "run");
    assert_eq!(
        records[0]["proposal_order"],
        serde_json::json!(["z", "location", "G", "psi"])
    );
    for (t, r) in records[1..].iter().enumerate() {
        assert_eq!(r["iteration"], t + 1);
        let perplexity = r["perplexity"].as_f64().unwrap();
        assert!(perplexity > 0.0 && perplexity <= 1.0);
    }
    let ev: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("a/evidence.json")).unwrap()).unwrap();
    let (p0, p1, b) = (
        ev["log_p0"].as_f64().unwrap(),
        ev["log_p1"].as_f64().unwrap(),
        ev["log_b10"].as_f64().unwrap(),
    );
    assert!((p1 - p0 - b).abs() < 1e-9);
}

#[test]
fn regression_fit_with_covariate_columns() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &["simulate", "-o", "y.csv", "--set", "n=80", "--set", "write_z=true"],
    );
    // The latent column doubles as a covariate here.
    let fit = with_desk(&[
        "fit",
        "-i",
        "y.csv",
        "-o",
        "r",
        "--set",
        "covariate_columns=[2]",
        "--set",
        "iterations=3",
    ]);
    ok(d, &fit);
    let summary = std::fs::read_to_string(d.join("r/summary.csv")).unwrap();
    assert!(summary.contains("# model: regression"));
    assert!(summary.contains("statistic,b_1_1,b_1_2,b_2_1,b_2_2,rho_1_2"));
}

#[test]
fn bayes_factor_report_on_skewed_and_gaussian_data() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "simulate",
            "-o",
            "skew.csv",
            "--set",
            "n=200",
            "--set",
            "psi=[0.7, 0.7]",
            "--seed",
            "21",
        ],
    );
    ok(
        d,
        &[
            "simulate",
            "-o",
            "gauss.csv",
            "--set",
            "n=200",
            "--set",
            "psi=[0.0, 0.0]",
            "--seed",
            "22",
        ],
    );
    let skew = ok(d, &with_desk(&["bf", "-i", "skew.csv"]));
    assert!(skew.contains("bucket     B10>=2"), "{skew}");
    assert!(skew.contains("log p0") && skew.contains("log p1") && skew.contains("B10"));
    let trace_rows = skew.lines().skip_while(|l| !l.starts_with("iteration")).count();
    assert_eq!(trace_rows, 11, "header plus one row per iteration");
    let gauss = ok(d, &with_desk(&["bf", "-i", "gauss.csv", "-o", "g"]));
    assert!(gauss.contains("bucket     B10<0.5"), "{gauss}");
    assert!(d.join("g/bf.txt").exists() && d.join("g/trace.jsonl").exists());
}

#[test]
fn bayes_factor_refuses_incomparable_priors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["simulate", "-o", "y.csv", "--set", "n=30"]);
    let out = skewpmc(
        d,
        &with_desk(&["bf", "-i", "y.csv", "--set", "delta_prior=uniform_delta"]),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn estimate_a_is_symmetric_and_fits_the_curve() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let report = ok(d, &["estimate-a", "-o", "a.csv", "--set", "a_draws=40000"]);
    assert!(report.starts_with("a = "));
    let text = std::fs::read_to_string(d.join("a.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 7);
    for k in 0..3 {
        let (lo, hi) = (&rows[k], &rows[6 - k]);
        assert_eq!(lo[0], -hi[0]);
        let se = (lo[2] * lo[2] + hi[2] * hi[2]).sqrt();
        assert!(
            (lo[1] - hi[1]).abs() < 4.0 * se,
            "rho {}: {} vs {}",
            hi[0],
            lo[1],
            hi[1]
        );
    }
    for r in &rows {
        assert!((r[3] / r[1] - 1.0).abs() < 0.1, "{r:?}");
    }
}

#[test]
fn single_replicate_study_emits_all_columns() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = with_desk(&[
        "sim-study",
        "-o",
        "s",
        "--set",
        "replicates=1",
        "--set",
        "n=50",
        "--set",
        "iterations=3",
        "--set",
        "study_points=[[0.0, 0.0], [0.4, -0.5]]",
    ]);
    ok(d, &args);
    let text = std::fs::read_to_string(d.join("s/study.csv")).unwrap();
    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(
        lines[0],
        "psi,rho,alpha_1,replicates,b10_low,b10_mid,b10_high,med_med_psi1,fc_0.95,fc_0.9,me_mean,me_cml,me_mle"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines
        .iter()
        .skip(1)
        .all(|l| l.split(',').count() == 13 && l.ends_with(",NA")));
    let reps = std::fs::read_to_string(d.join("s/replicates.csv")).unwrap();
    assert_eq!(reps.lines().filter(|l| !l.starts_with('#')).count(), 3);
}

#[test]
fn errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let code = |args: &[&str]| skewpmc(d, args).status.code();
    assert_eq!(code(&["fit", "-i", "missing.csv", "-o", "x"]), Some(2));
    assert_eq!(code(&["fit", "-o", "x"]), Some(1));
    assert_eq!(code(&["fit", "--set", "particles=1"]), Some(1));
    assert_eq!(code(&["nonsense"]), Some(1));
    assert_eq!(code(&["simulate", "-o", "y.csv", "--set", "psi=[0.9, 0.9]"]), Some(1));
    std::fs::write(d.join("bad.csv"), "1,2\n3,oops\n").unwrap();
    assert_eq!(code(&["fit", "-i", "bad.csv", "-o", "x"]), Some(2));
    std::fs::write(d.join("tiny.csv"), "1,2\n3,4\n").unwrap();
    assert_eq!(code(&["fit", "-i", "tiny.csv", "-o", "x"]), Some(2));
    std::fs::write(d.join("cfg.toml"), "seed = \"x\"\n").unwrap();
    assert_eq!(code(&["fit", "--config", "cfg.toml"]), Some(1));
}

#[test]
fn config_file_and_overrides_combine() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("run.toml"),
        "n = 25\npsi = [0.3, 0.3]\noutput = \"from_file.csv\"\n",
    )
    .unwrap();
    ok(d, &["simulate", "--config", "run.toml", "--set", "n=30"]);
    assert_eq!(read_matrix(&d.join("from_file.csv")).unwrap().nrows(), 30);
    ok(d, &["simulate", "--config", "run.toml", "-o", "flag.csv"]);
    assert_eq!(read_matrix(&d.join("flag.csv")).unwrap().nrows(), 25);
}
