use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta_reg, ln_beta};

use crate::error::{ensure_positive, ensure_probability, Error, Result};
use crate::severity::Severity;
use crate::special::softplus;

/// Generalized beta of the second kind:
/// f(x) = a·x^(ap−1) / (b^(ap)·B(p,q)·(1 + (x/b)^a)^(p+q)).
///
/// The CDF is the regularized incomplete beta at t/(1+t), t = (x/b)^a; the
/// quantile has no closed form and is solved by bisection on log x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gb2 {
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub q: f64,
}

impl Gb2 {
    pub fn new(a: f64, b: f64, p: f64, q: f64) -> Result<Self> {
        ensure_positive("GB2 a", a)?;
        ensure_positive("GB2 b", b)?;
        ensure_positive("GB2 p", p)?;
        ensure_positive("GB2 q", q)?;
        Ok(Self { a, b, p, q })
    }

    /// Returns (z, 1 − z) with z = t/(1+t), each computed directly.
    fn split(&self, x: f64) -> (f64, f64) {
        let lt = self.a * (x / self.b).ln();
        let z = 1.0 / (1.0 + (-lt).exp());
        let zc = 1.0 / (1.0 + lt.exp());
        (z, zc)
    }

    /// Finds x with `target(x) = 0` for a target increasing in x.
    fn solve(&self, mut f: impl FnMut(f64) -> f64) -> Result<f64> {
        let mut lo = self.b.ln();
        let mut hi = lo;
        let mut step = 1.0 / self.a;
        let mut guard = 0;
        while f(lo.exp()) > 0.0 {
            lo -= step;
            step *= 2.0;
            guard += 1;
            if guard > 200 {
                return Err(Error::Convergence("GB2 quantile: lower bracket not found".into()));
            }
        }
        step = 1.0 / self.a;
        while f(hi.exp()) < 0.0 {
            hi += step;
            step *= 2.0;
            guard += 1;
            if guard > 400 {
                return Err(Error::Convergence("GB2 quantile: upper bracket not found".into()));
            }
        }
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid.exp()) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((0.5 * (lo + hi)).exp())
    }
}

impl Severity for Gb2 {
    fn label(&self) -> String {
        "GB2".into()
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let (z, zc) = self.split(x);
        if z <= 0.5 {
            beta_reg(self.p, self.q, z)
        } else {
            1.0 - beta_reg(self.q, self.p, zc)
        }
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        let (z, zc) = self.split(x);
        if z <= 0.5 {
            1.0 - beta_reg(self.p, self.q, z)
        } else {
            beta_reg(self.q, self.p, zc)
        }
    }

    fn ln_pdf(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Err(Error::Domain(format!("density needs x > 0, got {x}")));
        }
        let lx = x.ln();
        let lb = self.b.ln();
        Ok(self.a.ln() + (self.a * self.p - 1.0) * lx
            - self.a * self.p * lb
            - ln_beta(self.p, self.q)
            - (self.p + self.q) * softplus(self.a * (lx - lb)))
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        ensure_probability(p)?;
        if p > 0.5 {
            return self.isf(1.0 - p);
        }
        self.solve(|x| self.cdf(x) - p)
    }

    fn isf(&self, a: f64) -> Result<f64> {
        ensure_probability(a)?;
        if a > 0.5 {
            return self.quantile(1.0 - a);
        }
        self.solve(|x| a - self.sf(x))
    }
}
