use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, ensure_probability, Error, Result};
use crate::severity::Severity;
use crate::special::softplus;

/// Log-logistic with shape `c` and scale `b`: G(v) = (v/b)^c / (1 + (v/b)^c).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogistic {
    pub c: f64,
    pub b: f64,
}

impl LogLogistic {
    pub fn new(c: f64, b: f64) -> Result<Self> {
        ensure_positive("log-logistic shape c", c)?;
        ensure_positive("log-logistic scale b", b)?;
        Ok(Self { c, b })
    }

    /// Build from the reporting form (location of log-loss, dispersion):
    /// shape = 1/dispersion, scale = exp(location).
    pub fn from_location_dispersion(location: f64, dispersion: f64) -> Result<Self> {
        ensure_finite("log-logistic location", location)?;
        ensure_positive("log-logistic dispersion", dispersion)?;
        Self::new(1.0 / dispersion, location.exp())
    }

    /// (location, dispersion) = (ln b, 1/c).
    pub fn location_dispersion(&self) -> (f64, f64) {
        (self.b.ln(), 1.0 / self.c)
    }
}

impl Severity for LogLogistic {
    fn label(&self) -> String {
        "LogLGT".into()
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let t = self.c * (x / self.b).ln();
        1.0 / (1.0 + (-t).exp())
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        let t = self.c * (x / self.b).ln();
        1.0 / (1.0 + t.exp())
    }

    fn ln_pdf(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Err(Error::Domain(format!("density needs x > 0, got {x}")));
        }
        let z = (x / self.b).ln();
        Ok(self.c.ln() - self.b.ln() + (self.c - 1.0) * z - 2.0 * softplus(self.c * z))
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        ensure_probability(p)?;
        Ok(self.b * ((p.ln() - (-p).ln_1p()) / self.c).exp())
    }

    fn isf(&self, a: f64) -> Result<f64> {
        ensure_probability(a)?;
        Ok(self.b * (((-a).ln_1p() - a.ln()) / self.c).exp())
    }
}
