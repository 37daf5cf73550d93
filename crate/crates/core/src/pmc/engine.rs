//! Generic population Monte Carlo loop over `(location, G, ψ, z)`.

use std::fmt::Debug;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::proposals::{g_proposal_params, psi_proposal_params, sample_z, z_logpdf, z_params_centered};
use super::weights::{combine_evidence, diagnose, resample, IterationDiagnostics, LogEvidence, Resampling};
use crate::error::{Error, Result};
use crate::model::augmented_loglik_centered;
use crate::priors::{Prior, PriorConfig};
use crate::scalar::Real;
use crate::stats::{inv_wishart_logpdf, inv_wishart_sample, mvn_logpdf, mvn_sample, RngStream, SpdMatrix};

/// Environment variable read when [`PmcConfig::threads`] is unset.
pub const THREADS_ENV: &str = "SKEWPMC_THREADS";

const RESAMPLE_TAG: u64 = 1 << 63;

/// How the location enters the model: the data, the centred residuals and
/// the location's own proposal kernel.
pub trait PmcModel<T: Real>: Sync {
    type Location: Clone + Debug + Send + Sync;

    /// The `n × p` response matrix.
    fn data(&self) -> &DMatrix<T>;

    /// `y_i − μ_i` for every observation.
    fn centered(&self, loc: &Self::Location) -> DMatrix<T>;

    /// Draw the location from its full conditional given `G`, `ψ` and `|z|`.
    fn sample_location<R: Rng + ?Sized>(
        &self,
        g: &SpdMatrix<T>,
        psi: &DVector<T>,
        absz: &DVector<T>,
        rng: &mut R,
    ) -> Result<Self::Location>;

    fn location_logpdf(&self, loc: &Self::Location, g: &SpdMatrix<T>, psi: &DVector<T>, absz: &DVector<T>)
        -> Result<T>;

    /// Location of the initial population.
    fn initial_location<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Self::Location>;

    /// Moment estimate of the response scale, used to spread the initial population.
    fn initial_scale(&self) -> &SpdMatrix<T>;

    /// Column names for [`PmcModel::location_values`].
    fn location_names(&self) -> Vec<String>;

    fn location_values(&self, loc: &Self::Location) -> Vec<f64>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PmcConfig {
    /// Number of iterations `T`.
    pub iterations: usize,
    /// Population size `N`.
    pub particles: usize,
    pub prior: PriorConfig,
    pub resampling: Resampling,
    /// Restrict to the Gaussian submodel `ψ = 0`.
    pub fix_psi_zero: bool,
    /// Worker threads; falls back to `SKEWPMC_THREADS`, then to the global pool.
    pub threads: Option<usize>,
}

impl Default for PmcConfig {
    fn default() -> Self {
        Self {
            iterations: 10,
            particles: 2000,
            prior: PriorConfig::default(),
            resampling: Resampling::default(),
            fix_psi_zero: false,
            threads: None,
        }
    }
}

impl PmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::invalid("iterations must be at least 1"));
        }
        if self.particles < 2 {
            return Err(Error::invalid("need at least 2 particles"));
        }
        if self.threads == Some(0) {
            return Err(Error::invalid("threads must be positive"));
        }
        Ok(())
    }

    fn resolved_threads(&self) -> Result<Option<usize>> {
        if self.threads.is_some() {
            return Ok(self.threads);
        }
        match std::env::var(THREADS_ENV) {
            Ok(s) if !s.trim().is_empty() => match s.trim().parse::<usize>() {
                Ok(k) if k > 0 => Ok(Some(k)),
                _ => Err(Error::invalid(format!("{THREADS_ENV}={s} is not a positive integer"))),
            },
            _ => Ok(None),
        }
    }
}

/// Parameter state a proposal conditions on.
#[derive(Clone, Debug)]
pub struct Ancestor<T: Real, L> {
    pub location: L,
    pub g: SpdMatrix<T>,
    pub psi: DVector<T>,
}

#[derive(Clone, Debug)]
pub struct Particle<T: Real, L> {
    pub location: L,
    pub g: SpdMatrix<T>,
    pub psi: DVector<T>,
    pub z: DVector<T>,
    pub log_target: T,
    pub log_proposal: T,
    /// `log_target − log_proposal`, or `−∞` for a failed proposal.
    pub log_weight: T,
    /// Index of the ancestor in the previous population.
    pub parent: usize,
}

impl<T: Real, L: Clone> Particle<T, L> {
    pub fn ancestor(&self) -> Ancestor<T, L> {
        Ancestor {
            location: self.location.clone(),
            g: self.g.clone(),
            psi: self.psi.clone(),
        }
    }
}

/// Output of [`Sampler::run`].
#[derive(Clone, Debug)]
pub struct PmcRun<T: Real, L> {
    pub diagnostics: Vec<IterationDiagnostics>,
    /// Last population with its normalized weights.
    pub particles: Vec<Particle<T, L>>,
    pub weights: Vec<f64>,
    pub log_evidence: LogEvidence,
}

pub struct Sampler<'a, T: Real, M: PmcModel<T>> {
    model: &'a M,
    prior: Prior<T>,
    config: PmcConfig,
}

impl<'a, T: Real, M: PmcModel<T>> Sampler<'a, T, M> {
    pub fn new(model: &'a M, config: PmcConfig) -> Result<Self> {
        config.validate()?;
        let p = model.data().ncols();
        let prior = Prior::new(config.prior.clone(), p)?;
        Ok(Self { model, prior, config })
    }

    pub fn config(&self) -> &PmcConfig {
        &self.config
    }

    pub fn prior(&self) -> &Prior<T> {
        &self.prior
    }

    /// Unnormalized log posterior of a particle.
    pub fn log_target(&self, loc: &M::Location, g: &SpdMatrix<T>, psi: &DVector<T>, z: &DVector<T>) -> Result<T> {
        let d = self.model.centered(loc);
        let prior = if self.config.fix_psi_zero {
            self.prior.log_prior_xi_sigma(g)?
        } else {
            self.prior.log_prior_g_psi(g, psi)?
        };
        Ok(augmented_loglik_centered(&d, g, psi, z) + prior)
    }

    /// Log density of drawing `particle` from the kernel centred at `ancestor`.
    pub fn log_proposal(&self, ancestor: &Ancestor<T, M::Location>, particle: &Particle<T, M::Location>) -> Result<T> {
        let d_parent = self.model.centered(&ancestor.location);
        let (m, v) = z_params_centered(&d_parent, &ancestor.g, &ancestor.psi);
        let absz = particle.z.abs();
        let mut lq = z_logpdf(&particle.z, &m, v)
            + self
                .model
                .location_logpdf(&particle.location, &ancestor.g, &ancestor.psi, &absz)?;
        let d = self.model.centered(&particle.location);
        let (df, scale) = g_proposal_params(&d, &ancestor.psi, &absz, &self.prior)?;
        lq += inv_wishart_logpdf(&particle.g, df, &scale)?;
        if !self.config.fix_psi_zero {
            let (mean, cov) = psi_proposal_params(&d, &absz, &particle.g)?;
            lq += mvn_logpdf(&particle.psi, &mean, &cov)?;
        }
        Ok(lq)
    }

    /// One draw `z → location → G → ψ` from the kernel centred at `ancestor`.
    pub fn propose<R: Rng + ?Sized>(
        &self,
        ancestor: &Ancestor<T, M::Location>,
        parent: usize,
        rng: &mut R,
    ) -> Result<Particle<T, M::Location>> {
        let p = ancestor.psi.len();
        let d_parent = self.model.centered(&ancestor.location);
        let (m, v) = z_params_centered(&d_parent, &ancestor.g, &ancestor.psi);
        let z = sample_z(&m, v, rng);
        let absz = z.abs();
        let location = self.model.sample_location(&ancestor.g, &ancestor.psi, &absz, rng)?;
        let d = self.model.centered(&location);
        let (df, scale) = g_proposal_params(&d, &ancestor.psi, &absz, &self.prior)?;
        let g = inv_wishart_sample(df, &scale, rng)?;
        let psi = if self.config.fix_psi_zero {
            DVector::zeros(p)
        } else {
            let (mean, cov) = psi_proposal_params(&d, &absz, &g)?;
            mvn_sample(&mean, &cov, rng)?
        };
        let mut particle = Particle {
            location,
            g,
            psi,
            z,
            log_target: T::zero(),
            log_proposal: T::zero(),
            log_weight: T::zero(),
            parent,
        };
        particle.log_proposal = self.log_proposal(ancestor, &particle)?;
        particle.log_target = self.log_target(&particle.location, &particle.g, &particle.psi, &particle.z)?;
        particle.log_weight = particle.log_target - particle.log_proposal;
        if particle.log_weight.is_nan_real() {
            particle.log_weight = T::neg_infinity();
        }
        Ok(particle)
    }

    /// Overdispersed starting state: `G⁰ ~ IW(p+4, (p+4)S)` and `ψ⁰ ~ N(0, diag(S)/4)`.
    pub fn initial_ancestor<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Ancestor<T, M::Location>> {
        let s = self.model.initial_scale();
        let p = s.dim();
        let location = self.model.initial_location(rng)?;
        let df = T::from_usize_lossy(p + 4);
        let g = inv_wishart_sample(df, &s.scaled(df)?, rng)?;
        let psi = if self.config.fix_psi_zero {
            DVector::zeros(p)
        } else {
            let spread = SpdMatrix::from_diagonal(&(s.diagonal() * T::lit(0.25)))?;
            mvn_sample(&DVector::zeros(p), &spread, rng)?
        };
        Ok(Ancestor { location, g, psi })
    }

    /// Runs `T` iterations of `N` particles from the stream `rng`.
    ///
    /// Particle `i` of iteration `t` draws from `rng.substream((t << 32) | i)`,
    /// so the result does not depend on the number of worker threads.
    pub fn run(&self, rng: &RngStream) -> Result<PmcRun<T, M::Location>> {
        self.run_with(rng, |_| ())
    }

    /// [`Sampler::run`], calling `observe` after every iteration.
    pub fn run_with<F: FnMut(&IterationDiagnostics) + Send>(
        &self,
        rng: &RngStream,
        observe: F,
    ) -> Result<PmcRun<T, M::Location>> {
        match self.config.resolved_threads()? {
            Some(k) => rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
                .install(|| self.run_inner(rng, observe)),
            None => self.run_inner(rng, observe),
        }
    }

    fn run_inner<F: FnMut(&IterationDiagnostics)>(
        &self,
        rng: &RngStream,
        mut observe: F,
    ) -> Result<PmcRun<T, M::Location>> {
        let n = self.config.particles;
        let mut ancestors: Vec<Ancestor<T, M::Location>> = (0..n)
            .into_par_iter()
            .map(|i| self.initial_ancestor(&mut rng.substream(i as u64)))
            .collect::<Result<_>>()?;
        let mut parents: Vec<usize> = (0..n).collect();
        let mut diagnostics = Vec::with_capacity(self.config.iterations);
        for t in 1..=self.config.iterations {
            let particles: Vec<Particle<T, M::Location>> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let anc = &ancestors[i];
                    let mut r = rng.substream(((t as u64) << 32) | i as u64);
                    self.propose(anc, parents[i], &mut r)
                        .unwrap_or_else(|_| self.failed(anc, parents[i]))
                })
                .collect();
            let log_w: Vec<f64> = particles.iter().map(|p| p.log_weight.as_f64()).collect();
            let (diag, weights) = diagnose(t, &log_w)?;
            observe(&diag);
            diagnostics.push(diag);
            if t == self.config.iterations {
                let log_evidence = combine_evidence(&diagnostics, n)?;
                return Ok(PmcRun {
                    diagnostics,
                    particles,
                    weights,
                    log_evidence,
                });
            }
            let mut r = rng.substream(RESAMPLE_TAG | t as u64);
            parents = resample(&weights, n, self.config.resampling, &mut r);
            ancestors = parents.iter().map(|&k| particles[k].ancestor()).collect();
        }
        unreachable!("iterations validated to be positive")
    }

    fn failed(&self, anc: &Ancestor<T, M::Location>, parent: usize) -> Particle<T, M::Location> {
        Particle {
            location: anc.location.clone(),
            g: anc.g.clone(),
            psi: anc.psi.clone(),
            z: DVector::zeros(self.model.data().nrows()),
            log_target: T::neg_infinity(),
            log_proposal: T::zero(),
            log_weight: T::neg_infinity(),
            parent,
        }
    }
}
