//! Parametric severity kernels: GPD, log-logistic, lognormal, Weibull,
//! exponential and GB2, plus the truncated-lognormal body model.

mod gb2;
mod gpd;
mod loglogistic;
mod lognormal;
mod trunc;
mod weibull;

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Serialize};

pub use gb2::Gb2;
pub use gpd::Gpd;
pub use loglogistic::LogLogistic;
pub use lognormal::Lognormal;
pub use trunc::{trunc_lgn_logpdf, TruncLognormalParams};
pub use weibull::{Exponential, Weibull};

use crate::error::{Error, Result};
use crate::severity::Severity;

/// The six parametric families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum KernelFamily {
    Gpd,
    LogLogistic,
    Lognormal,
    Weibull,
    Exponential,
    Gb2,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 6] = [
        KernelFamily::Gpd,
        KernelFamily::LogLogistic,
        KernelFamily::Lognormal,
        KernelFamily::Weibull,
        KernelFamily::Exponential,
        KernelFamily::Gb2,
    ];

    /// Families that can serve as an SNP kernel.
    pub const SNP: [KernelFamily; 5] = [
        KernelFamily::Gpd,
        KernelFamily::LogLogistic,
        KernelFamily::Lognormal,
        KernelFamily::Weibull,
        KernelFamily::Exponential,
    ];

    /// Table label: GPD, LogLGT, LGN, WBL, EXP, GB2.
    pub fn label(self) -> &'static str {
        match self {
            KernelFamily::Gpd => "GPD",
            KernelFamily::LogLogistic => "LogLGT",
            KernelFamily::Lognormal => "LGN",
            KernelFamily::Weibull => "WBL",
            KernelFamily::Exponential => "EXP",
            KernelFamily::Gb2 => "GB2",
        }
    }

    /// Suffix used in SNP model names (`SNPLGT3p`).
    pub fn snp_tag(self) -> &'static str {
        match self {
            KernelFamily::LogLogistic => "LGT",
            other => other.label(),
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            KernelFamily::Exponential => 1,
            KernelFamily::Gb2 => 4,
            _ => 2,
        }
    }

    pub fn supports_snp(self) -> bool {
        self != KernelFamily::Gb2
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        let fam = match key.as_str() {
            "gpd" | "pareto" | "genpareto" => KernelFamily::Gpd,
            "loglgt" | "lgt" | "loglogistic" | "llogis" | "fisk" => KernelFamily::LogLogistic,
            "lgn" | "lognormal" | "lnorm" => KernelFamily::Lognormal,
            "wbl" | "weibull" => KernelFamily::Weibull,
            "exp" | "exponential" => KernelFamily::Exponential,
            "gb2" => KernelFamily::Gb2,
            _ => return Err(Error::InvalidParameter(format!("unknown kernel family '{s}'"))),
        };
        Ok(fam)
    }
}

/// Parameters of one kernel, tagged by family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelParams {
    Gpd(Gpd),
    LogLogistic(LogLogistic),
    Lognormal(Lognormal),
    Weibull(Weibull),
    Exponential(Exponential),
    Gb2(Gb2),
}

impl KernelParams {
    pub fn family(&self) -> KernelFamily {
        match self {
            KernelParams::Gpd(_) => KernelFamily::Gpd,
            KernelParams::LogLogistic(_) => KernelFamily::LogLogistic,
            KernelParams::Lognormal(_) => KernelFamily::Lognormal,
            KernelParams::Weibull(_) => KernelFamily::Weibull,
            KernelParams::Exponential(_) => KernelFamily::Exponential,
            KernelParams::Gb2(_) => KernelFamily::Gb2,
        }
    }

    pub fn as_severity(&self) -> &dyn Severity {
        match self {
            KernelParams::Gpd(d) => d,
            KernelParams::LogLogistic(d) => d,
            KernelParams::Lognormal(d) => d,
            KernelParams::Weibull(d) => d,
            KernelParams::Exponential(d) => d,
            KernelParams::Gb2(d) => d,
        }
    }

    /// Re-runs the constructor checks (positivity etc.).
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelParams::Gpd(d) => Gpd::new(d.c, d.b).map(|_| ()),
            KernelParams::LogLogistic(d) => LogLogistic::new(d.c, d.b).map(|_| ()),
            KernelParams::Lognormal(d) => Lognormal::new(d.mu, d.sigma).map(|_| ()),
            KernelParams::Weibull(d) => Weibull::new(d.c, d.b).map(|_| ()),
            KernelParams::Exponential(d) => Exponential::new(d.b).map(|_| ()),
            KernelParams::Gb2(d) => Gb2::new(d.a, d.b, d.p, d.q).map(|_| ()),
        }
    }

    /// Distribution of `s·X`.
    pub fn rescaled(&self, s: f64) -> KernelParams {
        match *self {
            KernelParams::Gpd(d) => KernelParams::Gpd(Gpd { c: d.c, b: d.b * s }),
            KernelParams::LogLogistic(d) => {
                KernelParams::LogLogistic(LogLogistic { c: d.c, b: d.b * s })
            }
            KernelParams::Lognormal(d) => KernelParams::Lognormal(Lognormal {
                mu: d.mu + s.ln(),
                sigma: d.sigma,
            }),
            KernelParams::Weibull(d) => KernelParams::Weibull(Weibull {
                c: d.c,
                b: d.b * s.powf(-d.c),
            }),
            KernelParams::Exponential(d) => KernelParams::Exponential(Exponential { b: d.b / s }),
            KernelParams::Gb2(d) => KernelParams::Gb2(Gb2 { b: d.b * s, ..d }),
        }
    }
}

impl Severity for KernelParams {
    fn label(&self) -> String {
        self.family().label().to_string()
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

fn checked(family: KernelFamily, params: &KernelParams) -> Result<&KernelParams> {
    if params.family() != family {
        return Err(Error::InvalidParameter(format!(
            "parameters are for {}, not {}",
            params.family(),
            family
        )));
    }
    params.validate()?;
    Ok(params)
}

/// G(x) for the given family; requires x ≥ 0.
pub fn kernel_cdf(family: KernelFamily, params: &KernelParams, x: f64) -> Result<f64> {
    let p = checked(family, params)?;
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("loss must be >= 0, got {x}")));
    }
    Ok(p.cdf(x))
}

pub fn kernel_logpdf(family: KernelFamily, params: &KernelParams, x: f64) -> Result<f64> {
    checked(family, params)?.ln_pdf(x)
}

pub fn kernel_quantile(family: KernelFamily, params: &KernelParams, p: f64) -> Result<f64> {
    checked(family, params)?.quantile(p)
}

/// `n` inverse-CDF draws from the stream.
pub fn kernel_sample(
    family: KernelFamily,
    params: &KernelParams,
    rng: &mut dyn RngCore,
    n: usize,
) -> Result<Vec<f64>> {
    checked(family, params)?.sample(rng, n)
}
