//! Population Monte Carlo with full-conditional importance functions.

mod engine;
mod evidence;
mod mean;
pub mod proposals;
mod summary;
pub mod trace;
mod weights;

pub use engine::{Ancestor, Particle, PmcConfig, PmcModel, PmcRun, Sampler, THREADS_ENV};
pub(crate) use evidence::gaussian_log_evidence;
pub use evidence::{
    bayes_factor, check_evidence_config, log_p0_closed_form, B10Bucket, BayesFactorRun, EvidenceEstimate,
    B10_THRESHOLDS,
};
pub use mean::MeanModel;
pub use proposals::{propose_g, propose_psi, propose_xi, propose_z, zconditional_params, Proposal};
pub use summary::{
    column_names, particle_rows, posterior_summaries, weighted_mean, weighted_quantile, ParameterSummary,
    PosteriorSummary, TABLE_LEVELS,
};
pub use weights::{
    combine_evidence, diagnose, entropy, normalize_log_weights, perplexity, resample, IterationDiagnostics,
    LogEvidence, Resampling,
};
