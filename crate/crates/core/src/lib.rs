//! Severity modelling for operational-risk losses: parametric kernels,
//! semi-nonparametric (SNP) extensions, maximum-likelihood fitting,
//! goodness-of-fit tools and Monte Carlo capital estimates.

pub mod capital;
pub mod diagnostics;
pub mod error;
pub mod estimate;
pub mod evt;
pub mod io;
pub mod kernels;
pub mod optim;
pub mod registry;
pub mod rng;
pub mod severity;
pub mod simgen;
pub mod snp;
pub mod special;

pub use error::{Error, Result};
pub use estimate::{FitOptions, FitResult, ModelKind};
pub use kernels::{KernelFamily, KernelParams};
pub use severity::Severity;
pub use snp::SnpModelSpec;
