//! Semi-nonparametric severity models F(x) = G(h(x)), where h is the integral
//! of a squared polynomial and G a unit-scale kernel.

mod kernel;
mod poly;

use rand::RngCore;
use serde::{Deserialize, Serialize};

pub use kernel::{snp_kernel, MdaClass, SnpKernel, TailIndex};
pub use poly::{gamma_from_theta, h_eval, h_grad, h_inverse, SnpGamma, SnpTheta};

use crate::error::{ensure_positive, ensure_probability, Error, Result};
use crate::kernels::{KernelFamily, KernelParams};
use crate::severity::Severity;

/// Kernel family, kernel shape and transform coefficients. The kernel scale
/// (and lognormal location) is carried by θ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SnpSpecRepr", into = "SnpSpecRepr")]
pub struct SnpModelSpec {
    family: KernelFamily,
    c: f64,
    theta: SnpTheta,
    gamma: SnpGamma,
}

#[derive(Serialize, Deserialize)]
struct SnpSpecRepr {
    family: KernelFamily,
    c: f64,
    theta: Vec<f64>,
}

impl TryFrom<SnpSpecRepr> for SnpModelSpec {
    type Error = Error;
    fn try_from(r: SnpSpecRepr) -> Result<Self> {
        SnpModelSpec::new(r.family, r.c, SnpTheta::from_raw(r.theta)?)
    }
}

impl From<SnpModelSpec> for SnpSpecRepr {
    fn from(s: SnpModelSpec) -> Self {
        SnpSpecRepr { family: s.family, c: s.c, theta: s.theta.as_slice().to_vec() }
    }
}

impl SnpModelSpec {
    pub fn new(family: KernelFamily, c: f64, theta: SnpTheta) -> Result<Self> {
        let kern = snp_kernel(family).ok_or_else(|| {
            Error::InvalidParameter(format!("{family} cannot be used as an SNP kernel"))
        })?;
        ensure_positive("SNP kernel shape c", c)?;
        if !kern.free_shape() && c != 1.0 {
            return Err(Error::InvalidParameter(format!(
                "{family} kernel has its shape fixed at 1, got {c}"
            )));
        }
        let gamma = gamma_from_theta(&theta);
        Ok(Self { family, c, theta, gamma })
    }

    /// Convenience constructor from a plain coefficient vector.
    pub fn from_parts(family: KernelFamily, c: f64, theta: Vec<f64>) -> Result<Self> {
        Self::new(family, c, SnpTheta::new(theta)?)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn theta(&self) -> &SnpTheta {
        &self.theta
    }

    pub fn gamma(&self) -> &SnpGamma {
        &self.gamma
    }

    pub fn k(&self) -> usize {
        self.theta.k()
    }

    pub fn m(&self) -> usize {
        self.theta.m()
    }

    pub fn kernel(&self) -> &'static dyn SnpKernel {
        snp_kernel(self.family).expect("checked in constructor")
    }

    /// Name in the `SNP<KERNEL><K>p` convention.
    pub fn name(&self) -> String {
        snp_name(self.family, self.k())
    }

    /// Log-density with −∞ where the transform gradient vanishes. The gradient
    /// is evaluated as (Σθ_k x^k)², identical to Σ iγᵢx^(i−1) but never
    /// negative from rounding.
    pub fn ln_pdf_or_neg_inf(&self, x: f64) -> f64 {
        let r = self.theta.root_poly(x);
        let grad = r * r;
        if grad == 0.0 {
            return f64::NEG_INFINITY;
        }
        let h = h_eval(&self.gamma, x);
        self.kernel().ln_density(h, self.c) + grad.ln()
    }

    /// The plain kernel this spec equals when K = 0.
    pub fn nested_kernel(&self) -> Option<KernelParams> {
        (self.k() == 0).then(|| self.kernel().nested_kernel(self.c, self.theta.as_slice()[0]))
    }

    /// Spec of the distribution of s·X: θ_k → θ_k·s^(−k−1/2).
    pub fn rescaled(&self, s: f64) -> SnpModelSpec {
        let theta: Vec<f64> = self
            .theta
            .as_slice()
            .iter()
            .enumerate()
            .map(|(k, t)| t * s.powf(-(k as f64) - 0.5))
            .collect();
        SnpModelSpec::new(self.family, self.c, SnpTheta::from_raw(theta).expect("θ₀ stays positive"))
            .expect("valid spec rescales to a valid spec")
    }
}

/// `SNP<KERNEL><K>p`, e.g. `SNPLGN3p`.
pub fn snp_name(family: KernelFamily, k: usize) -> String {
    format!("SNP{}{}p", family.snp_tag(), k)
}

impl Severity for SnpModelSpec {
    fn label(&self) -> String {
        self.name()
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        self.kernel().cdf(h_eval(&self.gamma, x), self.c)
    }

    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        self.kernel().sf(h_eval(&self.gamma, x), self.c)
    }

    fn ln_pdf(&self, x: f64) -> Result<f64> {
        snp_logpdf(self, x)
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        ensure_probability(p)?;
        h_inverse(&self.gamma, self.kernel().inverse_sf(1.0 - p, self.c))
    }

    fn isf(&self, a: f64) -> Result<f64> {
        ensure_probability(a)?;
        h_inverse(&self.gamma, self.kernel().inverse_sf(a, self.c))
    }
}

/// Log-density of the SNP model; a vanishing transform gradient is reported
/// as [`Error::DegenerateGradient`] (callers treat it as −∞).
pub fn snp_logpdf(spec: &SnpModelSpec, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("density needs x > 0, got {x}")));
    }
    let v = spec.ln_pdf_or_neg_inf(x);
    if v == f64::NEG_INFINITY {
        return Err(Error::DegenerateGradient { x });
    }
    Ok(v)
}

pub fn snp_cdf(spec: &SnpModelSpec, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("loss must be >= 0, got {x}")));
    }
    Ok(spec.cdf(x))
}

/// x_a = h⁻¹(ã(c)) with a = 1 − p.
pub fn snp_quantile(spec: &SnpModelSpec, p: f64) -> Result<f64> {
    spec.quantile(p)
}

pub fn snp_sample(spec: &SnpModelSpec, rng: &mut dyn RngCore, n: usize) -> Result<Vec<f64>> {
    spec.sample(rng, n)
}

pub fn snp_tail_index(spec: &SnpModelSpec) -> TailIndex {
    spec.kernel().tail_index(spec.c, spec.m())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Gpd;

    fn spec(f: KernelFamily, c: f64, t: &[f64]) -> SnpModelSpec {
        SnpModelSpec::from_parts(f, c, t.to_vec()).unwrap()
    }

    #[test]
    fn logpdf_fixtures() {
        let g = spec(KernelFamily::Gpd, 1.0, &[1.0]);
        assert!((snp_logpdf(&g, 1.0).unwrap() + 2.0 * 2f64.ln()).abs() < 1e-15);
        let w = spec(KernelFamily::Weibull, 1.0, &[1.0]);
        assert!((snp_logpdf(&w, 3.0).unwrap() + 3.0).abs() < 1e-15);
        assert!(matches!(snp_logpdf(&w, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn degenerate_gradient_is_signalled() {
        let s = spec(KernelFamily::Gpd, 0.5, &[1.0, -1.0]);
        assert!(matches!(snp_logpdf(&s, 1.0), Err(Error::DegenerateGradient { .. })));
        assert_eq!(s.ln_pdf_or_neg_inf(1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn cdf_fixtures() {
        let g = spec(KernelFamily::Gpd, 1.0, &[1.0]);
        assert_eq!(snp_cdf(&g, 0.0).unwrap(), 0.0);
        assert!((snp_cdf(&g, 1.0).unwrap() - 0.5).abs() < 1e-15);
        let l = spec(KernelFamily::LogLogistic, 1.0, &[2.0, 3.0]);
        let x = h_inverse(l.gamma(), 1.0).unwrap();
        assert!((snp_cdf(&l, x).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn quantile_fixtures() {
        let g = spec(KernelFamily::Gpd, 1.0, &[1.0]);
        assert!((snp_quantile(&g, 0.999).unwrap() - 999.0).abs() < 1e-9);
        let w = spec(KernelFamily::Weibull, 1.0, &[1.0]);
        let p = 1.0 - (-1f64).exp();
        assert!((snp_quantile(&w, p).unwrap() - 1.0).abs() < 1e-12);
        let g2 = spec(KernelFamily::Gpd, 1.0, &[1.0, 1.0]);
        assert!((snp_quantile(&g2, 0.999).unwrap() - 13.419_289_991_543).abs() < 1e-8);
        assert!(snp_quantile(&g2, 1.0).is_err());
    }

    #[test]
    fn tail_index_fixtures() {
        let g = spec(KernelFamily::Gpd, 1.5110, &[1.0, 0.0, 0.0, 1.0]);
        let t = snp_tail_index(&g);
        assert_eq!(t.mda, MdaClass::Frechet);
        assert_eq!(t.xi, 1.5110 / 7.0);
        let l = spec(KernelFamily::LogLogistic, 0.9162, &[1.0, 0.0, 0.0, 1.0]);
        assert!((snp_tail_index(&l).xi - 0.1559).abs() < 5e-5);
        let k0 = spec(KernelFamily::Gpd, 0.8, &[2.0]);
        assert_eq!(snp_tail_index(&k0).xi, 0.8);
        for f in [KernelFamily::Lognormal, KernelFamily::Weibull] {
            let t = snp_tail_index(&spec(f, 1.2, &[1.0, 1.0]));
            assert_eq!((t.mda, t.xi), (MdaClass::Gumbel, 0.0));
        }
    }

    #[test]
    fn exponential_kernel_pins_shape() {
        assert!(SnpModelSpec::from_parts(KernelFamily::Exponential, 2.0, vec![1.0]).is_err());
        assert!(SnpModelSpec::from_parts(KernelFamily::Gb2, 1.0, vec![1.0]).is_err());
    }

    #[test]
    fn nested_kernel_for_k0() {
        let s = spec(KernelFamily::Gpd, 0.7, &[2.0]);
        let k = s.nested_kernel().unwrap();
        assert_eq!(k, KernelParams::Gpd(Gpd { c: 0.7, b: 0.25 }));
        assert!(spec(KernelFamily::Gpd, 0.7, &[2.0, 1.0]).nested_kernel().is_none());
    }

    #[test]
    fn rescaling_maps_quantiles() {
        let s = spec(KernelFamily::Lognormal, 1.3, &[1.2, -0.4, 0.3]);
        let r = s.rescaled(250.0);
        for &p in &[0.05, 0.5, 0.999] {
            let want = 250.0 * s.quantile(p).unwrap();
            assert!((r.quantile(p).unwrap() / want - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn names_follow_convention() {
        assert_eq!(snp_name(KernelFamily::Lognormal, 3), "SNPLGN3p");
        assert_eq!(snp_name(KernelFamily::LogLogistic, 2), "SNPLGT2p");
        assert_eq!(spec(KernelFamily::Exponential, 1.0, &[1.0, 0.5]).name(), "SNPEXP1p");
    }
}
