pub mod error;
pub mod model;
pub mod pmc;
pub mod priors;
pub mod quadrature;
pub mod regression;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Real;

// Double-precision instantiations.
pub type SpdMatrix64 = stats::SpdMatrix<f64>;
pub type Theta64 = model::Theta<f64>;
pub type ThetaStar64 = model::ThetaStar<f64>;
pub type AugmentedSample64 = model::AugmentedSample<f64>;
pub type Prior64 = priors::Prior<f64>;
pub type MeanModel64 = pmc::MeanModel<f64>;
pub type RegressionData64 = regression::RegressionData<f64>;
pub type RegressionModel64 = regression::RegressionModel<f64>;
pub type MeanRun64 = pmc::PmcRun<f64, nalgebra::DVector<f64>>;
pub type RegressionRun64 = pmc::PmcRun<f64, nalgebra::DMatrix<f64>>;
