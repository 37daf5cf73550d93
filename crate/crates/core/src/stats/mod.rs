//! Probability primitives: SPD algebra, normal family, inverse Wishart,
//! matrix normal, truncated normal and a seedable stream RNG.

mod matnorm;
mod normal;
mod rng;
mod spd;
pub mod special;
mod truncnorm;
mod wishart;

pub use matnorm::{matrix_normal_logpdf, matrix_normal_sample, vec_rows};
pub(crate) use normal::mvn_logpdf_centered;
pub use normal::{
    log_std_normal_cdf, mvn_logpdf, mvn_sample, standard_normal_vector, std_normal_cdf, std_normal_logpdf,
};
pub(crate) use rng::splitmix64;
pub use rng::RngStream;
pub use spd::SpdMatrix;
pub use special::multigamma_log;
pub use truncnorm::{standard_tail_cdf, standard_tail_sample, trunc_normal_logpdf, trunc_normal_sample, TAIL_SWITCH};
pub use wishart::{inv_wishart_logpdf, inv_wishart_sample};
