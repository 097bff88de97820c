use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_probability, Error, Result};
use crate::optim::fd_hessian;
use crate::special::chi2_critical;

/// Standard errors of `report(x)` at the maximiser `x` of `loglik`.
///
/// The covariance of `x` is the inverse of the observed information (negative
/// central-difference Hessian); it is pushed through a numerical Jacobian of
/// `report`. Returns `None` when the information is not positive definite.
pub fn delta_method_se(
    loglik: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    report: &dyn Fn(&[f64]) -> Vec<f64>,
) -> Option<Vec<f64>> {
    let n = x.len();
    let neg = |p: &[f64]| -loglik(p);
    let info = fd_hessian(&neg, x);
    if info.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let cov = info.cholesky()?.inverse();

    let base = report(x);
    let mut jac = DMatrix::zeros(base.len(), n);
    let mut xp = x.to_vec();
    for j in 0..n {
        let h = 1e-6 * x[j].abs().max(1.0);
        xp[j] = x[j] + h;
        let up = report(&xp);
        xp[j] = x[j] - h;
        let dn = report(&xp);
        xp[j] = x[j];
        for i in 0..base.len() {
            jac[(i, j)] = (up[i] - dn[i]) / (2.0 * h);
        }
    }
    let rep_cov = &jac * cov * jac.transpose();
    let se: Vec<f64> = rep_cov.diagonal().iter().map(|v| v.sqrt()).collect();
    se.iter().all(|s| s.is_finite() && *s > 0.0).then_some(se)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrTest {
    pub statistic: f64,
    pub df: usize,
    pub alpha: f64,
    pub critical: f64,
    pub reject: bool,
}

/// Nested likelihood-ratio test, 2(logL_full − logL_restricted) against the
/// chi-square upper-`alpha` point.
pub fn lr_test(ll_restricted: f64, ll_full: f64, df: usize, alpha: f64) -> Result<LrTest> {
    if df == 0 {
        return Err(Error::InvalidParameter("LR test needs df >= 1".into()));
    }
    ensure_probability(alpha)?;
    if !(ll_full >= ll_restricted - 1e-6) {
        return Err(Error::NestingViolation { restricted: ll_restricted, full: ll_full });
    }
    let statistic = (2.0 * (ll_full - ll_restricted)).max(0.0);
    let critical = chi2_critical(df, alpha);
    Ok(LrTest { statistic, df, alpha, critical, reject: statistic > critical })
}
