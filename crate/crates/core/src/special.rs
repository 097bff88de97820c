//! Normal-distribution helpers and a few log-space utilities.

use statrs::distribution::{ChiSquared, ContinuousCDF};
use libm::erfc;
use statrs::function::erf::erfc_inv;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

/// log(sqrt(2π))
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal CDF.
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Standard normal survival function, accurate deep in the upper tail.
pub fn norm_sf(z: f64) -> f64 {
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

/// Standard normal inverse CDF.
pub fn norm_ppf(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let z = -SQRT_2 * erfc_inv(2.0 * p);
    // one Halley step against the accurate CDF
    let e = if p < 0.5 { norm_cdf(z) - p } else { (1.0 - p) - norm_sf(z) };
    let u = e * (LN_SQRT_2PI + 0.5 * z * z).exp();
    z - u / (1.0 + 0.5 * z * u)
}

/// Upper-tail inverse: z with `norm_sf(z) = a`.
pub fn norm_isf(a: f64) -> f64 {
    -norm_ppf(a)
}

/// log(Φ(b) − Φ(a)) for a < b, evaluated on the side of the distribution
/// that avoids cancellation.
pub fn ln_norm_interval(a: f64, b: f64) -> f64 {
    if a >= b {
        return f64::NEG_INFINITY;
    }
    let mass = if a > 0.0 {
        norm_sf(a) - norm_sf(b)
    } else {
        norm_cdf(b) - norm_cdf(a)
    };
    mass.ln()
}

/// log(1 + exp(t)) without overflow.
pub fn softplus(t: f64) -> f64 {
    if t > 35.0 {
        t
    } else if t < -35.0 {
        t.exp()
    } else {
        t.exp().ln_1p()
    }
}

/// Upper `alpha` critical value of the chi-square distribution with `df` degrees of freedom.
pub fn chi2_critical(df: usize, alpha: f64) -> f64 {
    let dist = ChiSquared::new(df as f64).expect("df >= 1");
    dist.inverse_cdf(1.0 - alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_table_values() {
        assert!((norm_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((norm_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-14);
        assert!((norm_ppf(0.999) - 3.090_232_306_167_813_5).abs() < 1e-10);
        assert!((norm_isf(1e-12) - 7.034_483_825_301_131).abs() < 1e-8);
    }

    #[test]
    fn ppf_inverts_cdf() {
        for &p in &[1e-10, 1e-4, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-9] {
            assert!((norm_cdf(norm_ppf(p)) - p).abs() < 1e-12 * p.max(1e-3));
        }
    }

    #[test]
    fn interval_mass_in_both_tails() {
        let direct = (norm_cdf(1.0) - norm_cdf(0.0)).ln();
        assert!((ln_norm_interval(0.0, 1.0) - direct).abs() < 1e-14);
        // 8σ..9σ: the CDF difference is pure rounding noise, the sf difference is not.
        let far = ln_norm_interval(8.0, 9.0);
        assert!(far.is_finite() && far < -30.0);
    }

    #[test]
    fn chi_square_critical_values() {
        assert!((chi2_critical(3, 0.10) - 6.251_388_631_170_325).abs() < 1e-6);
        assert!((chi2_critical(1, 0.05) - 3.841_458_820_694_124).abs() < 1e-6);
    }
}
