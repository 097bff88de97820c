use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, ensure_probability, Error, Result};
use crate::severity::Severity;

/// Weibull in rate form: G(v) = 1 − exp(−b·v^c). Note `b` multiplies `v^c`;
/// it is not a scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weibull {
    pub c: f64,
    pub b: f64,
}

impl Weibull {
    pub fn new(c: f64, b: f64) -> Result<Self> {
        ensure_positive("Weibull shape c", c)?;
        ensure_positive("Weibull rate b", b)?;
        Ok(Self { c, b })
    }

    /// From the scale form exp(−(v/λ)^κ).
    pub fn from_shape_scale(shape: f64, scale: f64) -> Result<Self> {
        ensure_positive("Weibull scale", scale)?;
        Self::new(shape, scale.powf(-shape))
    }

    pub fn scale(&self) -> f64 {
        self.b.powf(-1.0 / self.c)
    }

    fn cum_hazard(&self, x: f64) -> f64 {
        self.b * x.powf(self.c)
    }
}

impl Severity for Weibull {
    fn label(&self) -> String {
        "WBL".into()
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-self.cum_hazard(x)).exp_m1()
        }
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (-self.cum_hazard(x)).exp()
        }
    }

    fn ln_pdf(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Err(Error::Domain(format!("density needs x > 0, got {x}")));
        }
        Ok(self.b.ln() + self.c.ln() + (self.c - 1.0) * x.ln() - self.cum_hazard(x))
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        ensure_probability(p)?;
        Ok((-(-p).ln_1p() / self.b).powf(1.0 / self.c))
    }

    fn isf(&self, a: f64) -> Result<f64> {
        ensure_probability(a)?;
        Ok((-a.ln() / self.b).powf(1.0 / self.c))
    }
}

/// Exponential with rate `b`; evaluated as `Weibull { c: 1, b }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponential {
    pub b: f64,
}

impl Exponential {
    pub fn new(b: f64) -> Result<Self> {
        ensure_positive("exponential rate b", b)?;
        Ok(Self { b })
    }

    pub fn from_mean(mean: f64) -> Result<Self> {
        ensure_positive("exponential mean", mean)?;
        Self::new(1.0 / mean)
    }

    pub fn mean(&self) -> f64 {
        1.0 / self.b
    }

    fn as_weibull(&self) -> Weibull {
        Weibull { c: 1.0, b: self.b }
    }
}

impl Severity for Exponential {
    fn label(&self) -> String {
        "EXP".into()
    }
    fn cdf(&self, x: f64) -> f64 {
        self.as_weibull().cdf(x)
    }
    fn sf(&self, x: f64) -> f64 {
        self.as_weibull().sf(x)
    }
    fn ln_pdf(&self, x: f64) -> Result<f64> {
        self.as_weibull().ln_pdf(x)
    }
    fn quantile(&self, p: f64) -> Result<f64> {
        self.as_weibull().quantile(p)
    }
    fn isf(&self, a: f64) -> Result<f64> {
        self.as_weibull().isf(a)
    }
}
