//! Nonparametric conditional copula estimation with smoothed local-linear
//! conditional margins, plus a Gaussian reference model and a Monte Carlo
//! harness comparing the estimator against its oracle counterpart.

pub mod copula;
pub mod error;
pub mod gauss;
pub mod harness;
pub mod kernels;
pub mod loclin;
pub mod quadrature;
pub mod stats;

pub use copula::{
    copula_margin_identity, empirical_copula, margin_evaluations, pseudo_observations, ConditionalMargin,
    EmpiricalCopula, Provenance, PseudoObservations, StepEcdf, TrivariateSample,
};
pub use error::{Error, Result};
pub use gauss::{
    bivariate_normal_cdf, conditional_margin, conditional_quantile, gaussian_copula, limit_sigma, partial_correlation,
    std_normal_cdf, std_normal_quantile, GaussianCopulaSpec, GaussianMargin, LimitLaw,
};
pub use harness::{ExperimentConfig, ReplicationRecord};
pub use kernels::{Kernel, SmoothedIndicator};
pub use loclin::{Bandwidths, ConditionalCdfFit, LocalDesign, MonotonicityReport, Sample1D};
