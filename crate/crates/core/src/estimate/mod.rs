//! Maximum-likelihood fitting of kernel and SNP severity models, standard
//! errors, nested likelihood-ratio tests and the truncation-point ladder.
//!
//! Data are divided by their sample mean before optimisation. Reported
//! parameters, quantiles and log-likelihoods are in the original units.

mod inference;
mod kernel_fit;
mod snp_fit;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use inference::{delta_method_se, lr_test, LrTest};
pub use kernel_fit::fit_kernel_mle;
pub use snp_fit::{fit_ladder, fit_snp_mle, LadderResult};

use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, KernelParams};
use crate::optim::OptimOptions;
use crate::severity::Severity;
use crate::snp::{snp_kernel, snp_name, SnpModelSpec};

/// Which model a fit belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    Kernel { family: KernelFamily },
    Snp { family: KernelFamily, k: usize },
}

impl ModelKind {
    pub fn family(&self) -> KernelFamily {
        match *self {
            ModelKind::Kernel { family } | ModelKind::Snp { family, .. } => family,
        }
    }

    /// `GPD`, `LogLGT`, ... or `SNP<TAG><K>p`.
    pub fn name(&self) -> String {
        match *self {
            ModelKind::Kernel { family } => family.label().to_string(),
            ModelKind::Snp { family, k } => snp_name(family, k),
        }
    }

    pub fn param_count(&self) -> usize {
        match *self {
            ModelKind::Kernel { family } => family.param_count(),
            ModelKind::Snp { family, k } => {
                let shape = snp_kernel(family).map_or(1, |kern| usize::from(kern.free_shape()));
                shape + k + 1
            }
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Fitted distribution in original units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FittedModel {
    Kernel { params: KernelParams },
    Snp { spec: SnpModelSpec },
}

impl FittedModel {
    pub fn as_severity(&self) -> &dyn Severity {
        match self {
            FittedModel::Kernel { params } => params,
            FittedModel::Snp { spec } => spec,
        }
    }
}

impl Severity for FittedModel {
    fn label(&self) -> String {
        self.as_severity().label()
    }
    fn cdf(&self, x: f64) -> f64 {
        self.as_severity().cdf(x)
    }
    fn sf(&self, x: f64) -> f64 {
        self.as_severity().sf(x)
    }
    fn ln_pdf(&self, x: f64) -> Result<f64> {
        self.as_severity().ln_pdf(x)
    }
    fn quantile(&self, p: f64) -> Result<f64> {
        self.as_severity().quantile(p)
    }
    fn isf(&self, a: f64) -> Result<f64> {
        self.as_severity().isf(a)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ModelKind,
    pub fitted: FittedModel,
    /// Optimiser coordinates on the mean-scaled data.
    pub estimates: Vec<f64>,
    pub param_names: Vec<String>,
    /// Reporting parameterisation in original units.
    pub params: Vec<f64>,
    /// `None` when the observed information is not positive definite.
    pub se: Option<Vec<f64>>,
    pub t_stats: Option<Vec<f64>>,
    pub log_likelihood: f64,
    pub n: usize,
    pub converged: bool,
    pub grad_norm: f64,
    pub scale_factor: f64,
}

impl FitResult {
    pub fn name(&self) -> String {
        self.model.name()
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        self.fitted.quantile(p)
    }
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub optim: OptimOptions,
    /// Random restarts per SNP fit, in addition to the warm starts.
    pub jitter_starts: usize,
    pub jitter_sd: f64,
    pub seed: u64,
    pub compute_se: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { optim: OptimOptions::default(), jitter_starts: 3, jitter_sd: 0.3, seed: 0x5eed, compute_se: true }
    }
}

/// Validated data divided by its mean.
pub(crate) struct Scaled {
    pub y: Vec<f64>,
    pub s: f64,
}

impl Scaled {
    pub fn new(data: &[f64]) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::InsufficientData("no observations to fit".into()));
        }
        if let Some(bad) = data.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::Domain(format!("exceedances must be positive and finite, got {bad}")));
        }
        let s = data.iter().sum::<f64>() / data.len() as f64;
        Ok(Self { y: data.iter().map(|x| x / s).collect(), s })
    }

    /// Converts a log-likelihood on the scaled data to original units.
    pub fn unscale_loglik(&self, ll: f64) -> f64 {
        ll - self.y.len() as f64 * self.s.ln()
    }
}

/// Shared tail of every fit: standard errors through the reporting map.
pub(crate) fn assemble(
    model: ModelKind,
    fitted: FittedModel,
    scaled: &Scaled,
    estimates: Vec<f64>,
    loglik: &dyn Fn(&[f64]) -> f64,
    report: &dyn Fn(&[f64]) -> Vec<f64>,
    names: Vec<String>,
    grad_norm: f64,
    opts: &FitOptions,
) -> FitResult {
    let ll = loglik(&estimates);
    let params = report(&estimates);
    let se = if opts.compute_se { delta_method_se(loglik, &estimates, report) } else { None };
    let t_stats = se.as_ref().map(|se| params.iter().zip(se).map(|(p, s)| p / s).collect());
    FitResult {
        model,
        fitted,
        params,
        param_names: names,
        se,
        t_stats,
        log_likelihood: scaled.unscale_loglik(ll),
        n: scaled.y.len(),
        converged: ll.is_finite() && grad_norm < 1e-3,
        grad_norm,
        scale_factor: scaled.s,
        estimates,
    }
}

/// Recomputes standard errors and t-statistics of `fit` on the data it was
/// fitted to. Either is `None` when the observed information is not positive
/// definite.
pub fn standard_errors(fit: &FitResult, data: &[f64]) -> Result<(Option<Vec<f64>>, Option<Vec<f64>>)> {
    let se = match fit.model {
        ModelKind::Kernel { family } => kernel_fit::standard_errors(family, fit, data)?,
        ModelKind::Snp { family, .. } => snp_fit::standard_errors(family, fit, data)?,
    };
    let t = se.as_ref().map(|se| fit.params.iter().zip(se).map(|(p, s)| p / s).collect());
    Ok((se, t))
}
