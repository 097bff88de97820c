use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, ensure_probability, Error, Result};
use crate::severity::Severity;
use crate::special::{ln_norm_interval, norm_cdf, norm_ppf, norm_sf, LN_SQRT_2PI};

/// Lognormal(μ, σ) truncated to the loss band [rt, bt]; `bt` may be +∞.
///
/// Density: f(x|μ,σ) / (F(bt|μ,σ) − F(rt|μ,σ)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncLognormalParams {
    pub mu: f64,
    pub sigma: f64,
    pub rt: f64,
    pub bt: f64,
}

impl TruncLognormalParams {
    pub fn new(mu: f64, sigma: f64, rt: f64, bt: f64) -> Result<Self> {
        ensure_finite("mu", mu)?;
        ensure_positive("sigma", sigma)?;
        ensure_positive("rt", rt)?;
        if !(bt > rt) {
            return Err(Error::InvalidParameter(format!("need rt < bt, got rt={rt}, bt={bt}")));
        }
        let out = Self { mu, sigma, rt, bt };
        if !out.ln_mass().is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lognormal({mu}, {sigma}) puts no mass on [{rt}, {bt}]"
            )));
        }
        Ok(out)
    }

    fn bounds(&self) -> (f64, f64) {
        let lo = (self.rt.ln() - self.mu) / self.sigma;
        let hi = if self.bt.is_finite() {
            (self.bt.ln() - self.mu) / self.sigma
        } else {
            f64::INFINITY
        };
        (lo, hi)
    }

    /// ln(F(bt) − F(rt)).
    pub fn ln_mass(&self) -> f64 {
        let (lo, hi) = self.bounds();
        ln_norm_interval(lo, hi)
    }
}

impl Severity for TruncLognormalParams {
    fn label(&self) -> String {
        "TruncLGN".into()
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= self.rt {
            return 0.0;
        }
        if x >= self.bt {
            return 1.0;
        }
        let (lo, _) = self.bounds();
        let z = (x.ln() - self.mu) / self.sigma;
        (ln_norm_interval(lo, z) - self.ln_mass()).exp().min(1.0)
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= self.rt {
            return 1.0;
        }
        if x >= self.bt {
            return 0.0;
        }
        let (_, hi) = self.bounds();
        let z = (x.ln() - self.mu) / self.sigma;
        (ln_norm_interval(z, hi) - self.ln_mass()).exp().min(1.0)
    }

    fn ln_pdf(&self, x: f64) -> Result<f64> {
        if !(x >= self.rt && x <= self.bt) {
            return Err(Error::Domain(format!(
                "x = {x} outside truncation band [{}, {}]",
                self.rt, self.bt
            )));
        }
        let z = (x.ln() - self.mu) / self.sigma;
        Ok(-x.ln() - self.sigma.ln() - LN_SQRT_2PI - 0.5 * z * z - self.ln_mass())
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        ensure_probability(p)?;
        let (lo, hi) = self.bounds();
        let z = if lo > 0.0 {
            // whole band in the upper half: interpolate survival probabilities
            let (s_lo, s_hi) = (norm_sf(lo), norm_sf(hi));
            -norm_ppf(s_lo - p * (s_lo - s_hi))
        } else {
            let (c_lo, c_hi) = (norm_cdf(lo), norm_cdf(hi));
            norm_ppf(c_lo + p * (c_hi - c_lo))
        };
        let x = (self.mu + self.sigma * z).exp();
        Ok(x.clamp(self.rt, self.bt))
    }
}

/// Log-density of the truncated lognormal body.
pub fn trunc_lgn_logpdf(params: &TruncLognormalParams, x: f64) -> Result<f64> {
    params.ln_pdf(x)
}
