use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, ensure_probability, Error, Result};
use crate::severity::Severity;
use crate::special::{norm_cdf, norm_isf, norm_ppf, norm_sf, LN_SQRT_2PI};

/// Lognormal with log-mean `mu` and log-sd `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lognormal {
    pub mu: f64,
    pub sigma: f64,
}

impl Lognormal {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        ensure_finite("lognormal mu", mu)?;
        ensure_positive("lognormal sigma", sigma)?;
        Ok(Self { mu, sigma })
    }

    fn z(&self, x: f64) -> f64 {
        (x.ln() - self.mu) / self.sigma
    }
}

impl Severity for Lognormal {
    fn label(&self) -> String {
        "LGN".into()
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            norm_cdf(self.z(x))
        }
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            norm_sf(self.z(x))
        }
    }

    fn ln_pdf(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Err(Error::Domain(format!("density needs x > 0, got {x}")));
        }
        let z = self.z(x);
        Ok(-x.ln() - self.sigma.ln() - LN_SQRT_2PI - 0.5 * z * z)
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        ensure_probability(p)?;
        Ok((self.mu + self.sigma * norm_ppf(p)).exp())
    }

    fn isf(&self, a: f64) -> Result<f64> {
        ensure_probability(a)?;
        Ok((self.mu + self.sigma * norm_isf(a)).exp())
    }
}
