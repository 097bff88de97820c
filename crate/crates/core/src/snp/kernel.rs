//! Unit-scale kernels G(v; c) that the SNP transform feeds into.
//!
//! Each kernel is a strategy object; the scale (and the lognormal location)
//! is absorbed by θ, so only the shape `c` remains.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::kernels::{Exponential, Gpd, KernelFamily, KernelParams, LogLogistic, Lognormal, Weibull};
use crate::special::{norm_cdf, norm_isf, norm_sf, softplus, LN_SQRT_2PI};

/// Extreme-value domain of attraction for maxima.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MdaClass {
    Frechet,
    Gumbel,
    Weibull,
}

impl fmt::Display for MdaClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MdaClass::Frechet => "Frechet",
            MdaClass::Gumbel => "Gumbel",
            MdaClass::Weibull => "Weibull",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailIndex {
    pub mda: MdaClass,
    /// ξ > 0 for Fréchet (survival ~ x^(−1/ξ)), 0 for Gumbel.
    pub xi: f64,
}

pub trait SnpKernel: Send + Sync + fmt::Debug {
    fn family(&self) -> KernelFamily;

    /// False when the shape is pinned (exponential: c = 1).
    fn free_shape(&self) -> bool {
        true
    }

    /// log g(v; c) for v > 0.
    fn ln_density(&self, v: f64, c: f64) -> f64;

    fn cdf(&self, v: f64, c: f64) -> f64;

    fn sf(&self, v: f64, c: f64) -> f64;

    /// ã(c): the v whose survival probability is `a`.
    fn inverse_sf(&self, a: f64, c: f64) -> f64;

    /// Tail index of G∘h when h has polynomial order m.
    fn tail_index(&self, c: f64, m: usize) -> TailIndex;

    /// The plain kernel equal to the K = 0 SNP model with (c, θ₀).
    fn nested_kernel(&self, c: f64, theta0: f64) -> KernelParams;

    /// (c, θ₀) reproducing a kernel fit, if the family matches.
    fn from_kernel(&self, params: &KernelParams) -> Option<(f64, f64)>;
}

#[derive(Debug)]
struct GpdUnit;
#[derive(Debug)]
struct LogLogisticUnit;
#[derive(Debug)]
struct LognormalUnit;
#[derive(Debug)]
struct WeibullUnit;
#[derive(Debug)]
struct ExponentialUnit;

impl SnpKernel for GpdUnit {
    fn family(&self) -> KernelFamily {
        KernelFamily::Gpd
    }
    fn ln_density(&self, v: f64, c: f64) -> f64 {
        -(1.0 + 1.0 / c) * (c * v).ln_1p()
    }
    fn cdf(&self, v: f64, c: f64) -> f64 {
        -(-(c * v).ln_1p() / c).exp_m1()
    }
    fn sf(&self, v: f64, c: f64) -> f64 {
        (-(c * v).ln_1p() / c).exp()
    }
    fn inverse_sf(&self, a: f64, c: f64) -> f64 {
        (-c * a.ln()).exp_m1() / c
    }
    fn tail_index(&self, c: f64, m: usize) -> TailIndex {
        TailIndex { mda: MdaClass::Frechet, xi: c / m as f64 }
    }
    fn nested_kernel(&self, c: f64, theta0: f64) -> KernelParams {
        KernelParams::Gpd(Gpd { c, b: theta0.powi(-2) })
    }
    fn from_kernel(&self, params: &KernelParams) -> Option<(f64, f64)> {
        match params {
            KernelParams::Gpd(g) => Some((g.c, g.b.powf(-0.5))),
            _ => None,
        }
    }
}

impl SnpKernel for LogLogisticUnit {
    fn family(&self) -> KernelFamily {
        KernelFamily::LogLogistic
    }
    fn ln_density(&self, v: f64, c: f64) -> f64 {
        let lv = v.ln();
        c.ln() + (c - 1.0) * lv - 2.0 * softplus(c * lv)
    }
    fn cdf(&self, v: f64, c: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        1.0 / (1.0 + (-c * v.ln()).exp())
    }
    fn sf(&self, v: f64, c: f64) -> f64 {
        if v <= 0.0 {
            return 1.0;
        }
        1.0 / (1.0 + (c * v.ln()).exp())
    }
    fn inverse_sf(&self, a: f64, c: f64) -> f64 {
        (((-a).ln_1p() - a.ln()) / c).exp()
    }
    fn tail_index(&self, c: f64, m: usize) -> TailIndex {
        TailIndex { mda: MdaClass::Frechet, xi: 1.0 / (c * m as f64) }
    }
    fn nested_kernel(&self, c: f64, theta0: f64) -> KernelParams {
        KernelParams::LogLogistic(LogLogistic { c, b: theta0.powi(-2) })
    }
    fn from_kernel(&self, params: &KernelParams) -> Option<(f64, f64)> {
        match params {
            KernelParams::LogLogistic(l) => Some((l.c, l.b.powf(-0.5))),
            _ => None,
        }
    }
}

impl SnpKernel for LognormalUnit {
    fn family(&self) -> KernelFamily {
        KernelFamily::Lognormal
    }
    fn ln_density(&self, v: f64, c: f64) -> f64 {
        let lv = v.ln();
        -LN_SQRT_2PI - c.ln() - lv - lv * lv / (2.0 * c * c)
    }
    fn cdf(&self, v: f64, c: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        norm_cdf(v.ln() / c)
    }
    fn sf(&self, v: f64, c: f64) -> f64 {
        if v <= 0.0 {
            return 1.0;
        }
        norm_sf(v.ln() / c)
    }
    fn inverse_sf(&self, a: f64, c: f64) -> f64 {
        (c * norm_isf(a)).exp()
    }
    fn tail_index(&self, _c: f64, _m: usize) -> TailIndex {
        TailIndex { mda: MdaClass::Gumbel, xi: 0.0 }
    }
    fn nested_kernel(&self, c: f64, theta0: f64) -> KernelParams {
        KernelParams::Lognormal(Lognormal { mu: -2.0 * theta0.ln(), sigma: c })
    }
    fn from_kernel(&self, params: &KernelParams) -> Option<(f64, f64)> {
        match params {
            KernelParams::Lognormal(l) => Some((l.sigma, (-0.5 * l.mu).exp())),
            _ => None,
        }
    }
}

impl SnpKernel for WeibullUnit {
    fn family(&self) -> KernelFamily {
        KernelFamily::Weibull
    }
    fn ln_density(&self, v: f64, c: f64) -> f64 {
        c.ln() + (c - 1.0) * v.ln() - v.powf(c)
    }
    fn cdf(&self, v: f64, c: f64) -> f64 {
        -(-v.powf(c)).exp_m1()
    }
    fn sf(&self, v: f64, c: f64) -> f64 {
        (-v.powf(c)).exp()
    }
    fn inverse_sf(&self, a: f64, c: f64) -> f64 {
        (-a.ln()).powf(1.0 / c)
    }
    // Unbounded support: Gumbel domain for maxima.
    fn tail_index(&self, _c: f64, _m: usize) -> TailIndex {
        TailIndex { mda: MdaClass::Gumbel, xi: 0.0 }
    }
    fn nested_kernel(&self, c: f64, theta0: f64) -> KernelParams {
        KernelParams::Weibull(Weibull { c, b: theta0.powf(2.0 * c) })
    }
    fn from_kernel(&self, params: &KernelParams) -> Option<(f64, f64)> {
        match params {
            KernelParams::Weibull(w) => Some((w.c, w.b.powf(0.5 / w.c))),
            _ => None,
        }
    }
}

impl SnpKernel for ExponentialUnit {
    fn family(&self) -> KernelFamily {
        KernelFamily::Exponential
    }
    fn free_shape(&self) -> bool {
        false
    }
    fn ln_density(&self, v: f64, _c: f64) -> f64 {
        -v
    }
    fn cdf(&self, v: f64, _c: f64) -> f64 {
        -(-v).exp_m1()
    }
    fn sf(&self, v: f64, _c: f64) -> f64 {
        (-v).exp()
    }
    fn inverse_sf(&self, a: f64, _c: f64) -> f64 {
        -a.ln()
    }
    fn tail_index(&self, _c: f64, _m: usize) -> TailIndex {
        TailIndex { mda: MdaClass::Gumbel, xi: 0.0 }
    }
    fn nested_kernel(&self, _c: f64, theta0: f64) -> KernelParams {
        KernelParams::Exponential(Exponential { b: theta0 * theta0 })
    }
    fn from_kernel(&self, params: &KernelParams) -> Option<(f64, f64)> {
        match params {
            KernelParams::Exponential(e) => Some((1.0, e.b.sqrt())),
            _ => None,
        }
    }
}

static GPD: GpdUnit = GpdUnit;
static LGT: LogLogisticUnit = LogLogisticUnit;
static LGN: LognormalUnit = LognormalUnit;
static WBL: WeibullUnit = WeibullUnit;
static EXP: ExponentialUnit = ExponentialUnit;

/// The SNP kernel strategy for a family; `None` for GB2.
pub fn snp_kernel(family: KernelFamily) -> Option<&'static dyn SnpKernel> {
    match family {
        KernelFamily::Gpd => Some(&GPD),
        KernelFamily::LogLogistic => Some(&LGT),
        KernelFamily::Lognormal => Some(&LGN),
        KernelFamily::Weibull => Some(&WBL),
        KernelFamily::Exponential => Some(&EXP),
        KernelFamily::Gb2 => None,
    }
}
