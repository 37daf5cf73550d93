//! Flat key-value run configuration with command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use skewpmc::pmc::{PmcConfig, Resampling, TABLE_LEVELS};
use skewpmc::priors::{ACoefficients, AMode, DeltaPrior, PriorConfig, SigmaPrior};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// 20 iterations of 20000 particles.
    #[default]
    Full,
    /// 10 iterations of 2000 particles.
    Desk,
}

impl Preset {
    pub fn iterations(self) -> usize {
        match self {
            Preset::Full => 20,
            Preset::Desk => 10,
        }
    }

    pub fn particles(self) -> usize {
        match self {
            Preset::Full => 20_000,
            Preset::Desk => 2000,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaPriorKind {
    #[default]
    Jeffreys,
    InverseWishart,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AModeKind {
    #[default]
    Fitted,
    MonteCarlo,
}

/// Every setting of every command. Unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Preset,
    /// Overrides the preset's iteration count.
    pub iterations: Option<usize>,
    /// Overrides the preset's population size.
    pub particles: Option<usize>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub resampling: Resampling,
    pub fix_psi_zero: bool,

    pub delta_prior: DeltaPrior,
    pub sigma_prior: SigmaPriorKind,
    /// Degrees of freedom `m` of the inverse Wishart prior.
    pub iw_df: f64,
    /// Row-major scale `Λ` of the inverse Wishart prior; empty means the identity.
    pub iw_scale: Vec<f64>,
    pub a_mode: AModeKind,
    pub a_coef: [f64; 2],
    /// Draws per Ω in Monte Carlo mode and per grid point in `estimate-a`.
    pub a_draws: usize,
    pub a_grid: Vec<f64>,

    pub quantiles: Vec<f64>,
    pub b10_low: f64,
    pub b10_high: f64,

    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    /// JSON-lines trace path for `fit` and `bf`; defaults to `trace.jsonl` in the output directory.
    pub trace: Option<PathBuf>,
    /// Response columns (0-based); empty means every non-covariate column.
    pub response_columns: Vec<usize>,
    /// Covariate columns (0-based); empty fits a common location.
    pub covariate_columns: Vec<usize>,
    pub intercept: bool,

    pub n: usize,
    pub xi: Vec<f64>,
    pub omega: Vec<f64>,
    /// Common off-diagonal correlation of `Ω`.
    pub rho: f64,
    /// Skewness `ψ = ωδ`.
    pub psi: Vec<f64>,
    /// Append the latent `z` as a last column.
    pub write_z: bool,

    pub replicates: usize,
    /// `[ψ, ρ]` pairs, each giving `ψ = (ψ, ψ)` and `Ω` with correlation `ρ`.
    pub study_points: Vec<[f64; 2]>,
    /// Headerless CSV of `point, replicate, ψ₁` maximum likelihood estimates.
    pub mle_file: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let c = ACoefficients::default();
        Self {
            preset: Preset::default(),
            iterations: None,
            particles: None,
            seed: 1,
            threads: None,
            resampling: Resampling::default(),
            fix_psi_zero: false,
            delta_prior: DeltaPrior::default(),
            sigma_prior: SigmaPriorKind::default(),
            iw_df: 5.0,
            iw_scale: vec![],
            a_mode: AModeKind::default(),
            a_coef: [c.a, c.b],
            a_draws: 100_000,
            a_grid: skewpmc::priors::default_a_grid(),
            quantiles: TABLE_LEVELS.to_vec(),
            b10_low: 0.5,
            b10_high: 2.0,
            input: None,
            output: None,
            trace: None,
            response_columns: vec![],
            covariate_columns: vec![],
            intercept: true,
            n: 200,
            xi: vec![3.0, 3.0],
            omega: vec![1.0, 1.0],
            rho: 0.0,
            psi: vec![0.7, 0.7],
            write_z: false,
            replicates: 20,
            study_points: vec![[0.0, 0.0], [0.7, 0.0]],
            mle_file: None,
        }
    }
}

impl RunConfig {
    /// Reads `path` (if any), applies `key=value` overrides in order and validates.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> CliResult<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                text.parse::<toml::Table>()
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            let (key, value) = o
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("override `{o}` is not key=value")))?;
            table.insert(key.trim().to_string(), parse_value(value.trim()));
        }
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.iterations == Some(0) {
            return bad("iterations must be at least 1".into());
        }
        if matches!(self.particles, Some(n) if n < 2) {
            return bad("particles must be at least 2".into());
        }
        if !(self.b10_low > 0.0 && self.b10_low < self.b10_high) {
            return bad(format!(
                "thresholds must satisfy 0 < b10_low < b10_high, got {} and {}",
                self.b10_low, self.b10_high
            ));
        }
        if self.quantiles.iter().any(|q| !(0.0..=1.0).contains(q)) {
            return bad("quantiles must lie in [0, 1]".into());
        }
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        Ok(())
    }

    pub fn iterations(&self) -> usize {
        self.iterations.unwrap_or(self.preset.iterations())
    }

    pub fn particles(&self) -> usize {
        self.particles.unwrap_or(self.preset.particles())
    }

    pub fn prior_config(&self, p: usize) -> CliResult<PriorConfig> {
        let sigma_prior = match self.sigma_prior {
            SigmaPriorKind::Jeffreys => SigmaPrior::Jeffreys,
            SigmaPriorKind::InverseWishart => {
                let lambda = if self.iw_scale.is_empty() {
                    (0..p * p).map(|k| if k % (p + 1) == 0 { 1.0 } else { 0.0 }).collect()
                } else {
                    self.iw_scale.clone()
                };
                SigmaPrior::InverseWishart { m: self.iw_df, lambda }
            }
        };
        let a_mode = match self.a_mode {
            AModeKind::Fitted => AMode::Fitted {
                a: self.a_coef[0],
                b: self.a_coef[1],
            },
            AModeKind::MonteCarlo => AMode::MonteCarlo { n_draws: self.a_draws },
        };
        Ok(PriorConfig {
            delta_prior: self.delta_prior,
            sigma_prior,
            a_mode,
            a_seed: self.seed,
            ..PriorConfig::default()
        })
    }

    pub fn pmc_config(&self, p: usize) -> CliResult<PmcConfig> {
        Ok(PmcConfig {
            iterations: self.iterations(),
            particles: self.particles(),
            prior: self.prior_config(p)?,
            resampling: self.resampling,
            fix_psi_zero: self.fix_psi_zero,
            threads: self.threads,
        })
    }

    /// SHA-256 of the settings that affect results; paths and thread count are excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.input = None;
        c.output = None;
        c.trace = None;
        c.mle_file = None;
        c.threads = None;
        let json = serde_json::to_string(&c).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn require_input(&self) -> CliResult<&Path> {
        self.input
            .as_deref()
            .ok_or_else(|| CliError::Config("no input file (set input=PATH or pass --input)".into()))
    }

    pub fn require_output(&self) -> CliResult<&Path> {
        self.output
            .as_deref()
            .ok_or_else(|| CliError::Config("no output path (set output=PATH or pass --output)".into()))
    }
}

/// TOML value for an override; bare words become strings.
fn parse_value(raw: &str) -> toml::Value {
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_presets() {
        let c = RunConfig::load(None, &[]).unwrap();
        assert_eq!((c.iterations(), c.particles()), (20, 20_000));
        let d = RunConfig::load(None, &["preset=desk".into()]).unwrap();
        assert_eq!((d.iterations(), d.particles()), (10, 2000));
        let e = RunConfig::load(None, &["preset=desk".into(), "particles=500".into()]).unwrap();
        assert_eq!(e.particles(), 500);
    }

    #[test]
    fn overrides_parse_as_toml_values() {
        let c = RunConfig::load(
            None,
            &[
                "psi=[0.5, 0.25]".into(),
                "output=out/dir".into(),
                "resampling=systematic".into(),
                "study_points=[[0.0, 0.5]]".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.psi, vec![0.5, 0.25]);
        assert_eq!(c.output.as_deref(), Some(Path::new("out/dir")));
        assert_eq!(c.resampling, Resampling::Systematic);
        assert_eq!(c.study_points, vec![[0.0, 0.5]]);
    }

    #[test]
    fn rejects_bad_settings() {
        for o in [
            "bogus=1",
            "iterations=0",
            "particles=1",
            "b10_low=3",
            "quantiles=[1.5]",
            "noequals",
        ] {
            let e = RunConfig::load(None, &[o.into()]).unwrap_err();
            assert_eq!(e.exit_code(), 1, "{o}");
        }
    }

    #[test]
    fn hash_ignores_paths_and_threads() {
        let a = RunConfig::load(None, &["output=a".into(), "threads=2".into()]).unwrap();
        let b = RunConfig::load(None, &["output=b".into()]).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig::load(None, &["seed=9".into()]).unwrap();
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn inverse_wishart_scale_defaults_to_identity() {
        let c = RunConfig::load(None, &["sigma_prior=inverse_wishart".into()]).unwrap();
        match c.prior_config(2).unwrap().sigma_prior {
            SigmaPrior::InverseWishart { m, lambda } => {
                assert_eq!(m, 5.0);
                assert_eq!(lambda, vec![1.0, 0.0, 0.0, 1.0]);
            }
            other => panic!("{other:?}"),
        }
    }
}
