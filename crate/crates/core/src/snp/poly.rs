use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square-root coefficients θ₀..θ_K of the transform gradient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnpTheta {
    theta: Vec<f64>,
}

impl SnpTheta {
    /// Requires θ₀ > 0 (sign normalization) and θ_K ≠ 0 when K > 0.
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        let t = Self::from_raw(theta)?;
        if t.k() > 0 && t.theta[t.k()] == 0.0 {
            return Err(Error::InvalidParameter(
                "leading coefficient θ_K must be nonzero; drop it to lower K".into(),
            ));
        }
        Ok(t)
    }

    /// Like `new` but tolerates a zero leading coefficient, which optimizers
    /// pass through when padding a lower-order fit.
    pub(crate) fn from_raw(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidParameter("θ needs at least θ₀".into()));
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite θ: {theta:?}")));
        }
        if !(theta[0] > 0.0) {
            return Err(Error::InvalidParameter(format!("θ₀ must be > 0, got {}", theta[0])));
        }
        Ok(Self { theta })
    }

    /// Truncation point K.
    pub fn k(&self) -> usize {
        self.theta.len() - 1
    }

    /// Polynomial order m = 2K + 1 of h.
    pub fn m(&self) -> usize {
        2 * self.k() + 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.theta
    }

    /// Σ θ_k x^k.
    pub fn root_poly(&self, x: f64) -> f64 {
        self.theta.iter().rev().fold(0.0, |acc, &t| acc * x + t)
    }
}

/// Power-series coefficients γ₁..γ_m of h(x) = Σ γᵢ xⁱ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnpGamma {
    gamma: Vec<f64>,
}

impl SnpGamma {
    /// Raw coefficients, γ₁ first. No perfect-square check is made.
    pub fn from_coefficients(gamma: Vec<f64>) -> Result<Self> {
        if gamma.is_empty() || gamma.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidParameter(format!("bad γ coefficients: {gamma:?}")));
        }
        Ok(Self { gamma })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.gamma
    }

    pub fn m(&self) -> usize {
        self.gamma.len()
    }
}

/// γᵢ = (1/i)·Σ_{j+k=i−1} θⱼθ_k, so that Σ γᵢxⁱ = ∫₀ˣ (Σ θ_k η^k)² dη.
pub fn gamma_from_theta(theta: &SnpTheta) -> SnpGamma {
    let t = theta.as_slice();
    let kk = t.len() - 1;
    let m = 2 * kk + 1;
    let mut gamma = vec![0.0; m];
    for (j, &tj) in t.iter().enumerate() {
        for (k, &tk) in t.iter().enumerate() {
            gamma[j + k] += tj * tk;
        }
    }
    for (i, g) in gamma.iter_mut().enumerate() {
        *g /= (i + 1) as f64;
    }
    SnpGamma { gamma }
}

/// h(x) = Σ γᵢ xⁱ by Horner's scheme.
pub fn h_eval(gamma: &SnpGamma, x: f64) -> f64 {
    x * gamma.gamma.iter().rev().fold(0.0, |acc, &g| acc * x + g)
}

/// ∇h(x) = Σ i·γᵢ·x^(i−1).
pub fn h_grad(gamma: &SnpGamma, x: f64) -> f64 {
    gamma
        .gamma
        .iter()
        .enumerate()
        .rev()
        .fold(0.0, |acc, (i, &g)| acc * x + (i + 1) as f64 * g)
}

const MAX_BRACKET_DOUBLINGS: usize = 200;

/// Solves h(x) = y on [0, ∞): doubles an upper bound from 1 until h ≥ y, then
/// runs Newton steps safeguarded by bisection until the bracket collapses.
pub fn h_inverse(gamma: &SnpGamma, y: f64) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::Domain(format!("h⁻¹ needs y >= 0, got {y}")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    if y.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut doublings = 0;
    while h_eval(gamma, hi) < y {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings >= MAX_BRACKET_DOUBLINGS || !hi.is_finite() {
            return Err(Error::Convergence(format!(
                "h⁻¹({y}): no upper bracket after {doublings} doublings"
            )));
        }
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..400 {
        let fx = h_eval(gamma, x) - y;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let d = h_grad(gamma, x);
        let newton = x - fx / d;
        x = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if x <= lo || x >= hi {
            break;
        }
    }
    // pick whichever end of the collapsed bracket is closer in h
    let pick = [lo, x, hi]
        .into_iter()
        .filter(|v| *v > 0.0)
        .min_by(|a, b| {
            let ea = (h_eval(gamma, *a) - y).abs();
            let eb = (h_eval(gamma, *b) - y).abs();
            ea.total_cmp(&eb)
        })
        .unwrap_or(x);
    Ok(pick)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(v: &[f64]) -> SnpGamma {
        SnpGamma::from_coefficients(v.to_vec()).unwrap()
    }

    #[test]
    fn gamma_fixtures() {
        let t = SnpTheta::new(vec![2.0, 3.0]).unwrap();
        assert_eq!(gamma_from_theta(&t).as_slice(), &[4.0, 6.0, 3.0]);

        let t = SnpTheta::new(vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let got = gamma_from_theta(&t);
        let want = [1.0, 0.0, 0.0, 0.5, 0.0, 0.0, 1.0 / 7.0];
        for (a, b) in got.as_slice().iter().zip(want) {
            assert!((a - b).abs() < 1e-16);
        }
    }

    #[test]
    fn gamma_matches_published_k3_relations() {
        let t = [0.7, -1.3, 0.4, 2.2];
        let got = gamma_from_theta(&SnpTheta::new(t.to_vec()).unwrap());
        let want = [
            t[0] * t[0],
            t[0] * t[1],
            (t[1] * t[1] + 2.0 * t[0] * t[2]) / 3.0,
            (t[1] * t[2] + t[0] * t[3]) / 2.0,
            (t[2] * t[2] + 2.0 * t[1] * t[3]) / 5.0,
            t[2] * t[3] / 3.0,
            t[3] * t[3] / 7.0,
        ];
        for (i, (a, b)) in got.as_slice().iter().zip(want).enumerate() {
            assert!((a - b).abs() < 1e-14, "γ{}", i + 1);
        }
    }

    #[test]
    fn eval_fixtures() {
        assert_eq!(h_eval(&g(&[1.0]), 5.0), 5.0);
        assert!((h_eval(&g(&[1.0, 1.0, 1.0 / 3.0]), 1.0) - 7.0 / 3.0).abs() < 1e-15);
        assert_eq!(h_eval(&g(&[4.0, 6.0, 3.0]), 2.0), 56.0);
        assert_eq!(h_eval(&g(&[4.0, 6.0, 3.0]), 0.0), 0.0);
    }

    #[test]
    fn gradient_fixtures() {
        assert_eq!(h_grad(&g(&[1.0]), 123.0), 1.0);
        let t = SnpTheta::new(vec![1.0, -1.0]).unwrap();
        assert!(h_grad(&gamma_from_theta(&t), 1.0).abs() < 1e-15);
        let t = SnpTheta::new(vec![2.0, 3.0]).unwrap();
        assert_eq!(h_grad(&gamma_from_theta(&t), 1.0), 25.0);
        assert_eq!(t.root_poly(1.0).powi(2), 25.0);
    }

    #[test]
    fn inverse_fixtures() {
        assert_eq!(h_inverse(&g(&[1.0]), 42.0).unwrap(), 42.0);
        let cubic = g(&[1.0, 1.0, 1.0 / 3.0]);
        assert!((h_inverse(&cubic, 7.0 / 3.0).unwrap() - 1.0).abs() < 1e-14);
        let x = h_inverse(&cubic, 999.0).unwrap();
        assert!((x - 13.419_289_991_543).abs() < 1e-9);
        assert_eq!(h_inverse(&cubic, 0.0).unwrap(), 0.0);
        assert!(matches!(h_inverse(&cubic, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn inverse_through_a_double_root() {
        // θ = (1, −1): gradient vanishes at x = 1
        let gm = gamma_from_theta(&SnpTheta::new(vec![1.0, -1.0]).unwrap());
        for &x in &[0.5, 0.999, 1.0, 1.001, 3.0] {
            let back = h_inverse(&gm, h_eval(&gm, x)).unwrap();
            assert!((back - x).abs() < 1e-4, "{x} -> {back}");
        }
    }

    #[test]
    fn inverse_reports_bracketing_failure() {
        // h ≡ tiny slope: cannot reach y within the doubling cap
        let flat = g(&[1e-300]);
        assert!(matches!(h_inverse(&flat, 1e300), Err(Error::Convergence(_))));
    }

    #[test]
    fn theta_validation() {
        assert!(SnpTheta::new(vec![]).is_err());
        assert!(SnpTheta::new(vec![-1.0]).is_err());
        assert!(SnpTheta::new(vec![1.0, 0.0]).is_err());
        assert!(SnpTheta::new(vec![1.0, f64::NAN]).is_err());
        let t = SnpTheta::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!((t.k(), t.m()), (2, 5));
    }
}
