use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, ensure_probability, Error, Result};
use crate::severity::Severity;

/// Generalized Pareto with shape `c > 0` and scale `b`:
/// G(v) = 1 − (1 + c·v/b)^(−1/c).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gpd {
    pub c: f64,
    pub b: f64,
}

impl Gpd {
    pub fn new(c: f64, b: f64) -> Result<Self> {
        ensure_positive("GPD shape c", c)?;
        ensure_positive("GPD scale b", b)?;
        Ok(Self { c, b })
    }

    fn log_sf(&self, x: f64) -> f64 {
        -(self.c * x / self.b).ln_1p() / self.c
    }
}

impl Severity for Gpd {
    fn label(&self) -> String {
        "GPD".into()
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -self.log_sf(x).exp_m1()
        }
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            self.log_sf(x).exp()
        }
    }

    fn ln_pdf(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Err(Error::Domain(format!("density needs x > 0, got {x}")));
        }
        Ok(-self.b.ln() - (1.0 + 1.0 / self.c) * (self.c * x / self.b).ln_1p())
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        ensure_probability(p)?;
        Ok(self.b / self.c * (-self.c * (-p).ln_1p()).exp_m1())
    }

    fn isf(&self, a: f64) -> Result<f64> {
        ensure_probability(a)?;
        Ok(self.b / self.c * (-self.c * a.ln()).exp_m1())
    }
}
