//! Spliced severity (truncated-lognormal body, exceedance tail above the
//! body-tail threshold), Poisson frequencies and compound Monte Carlo VaR.

use std::sync::Arc;

use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, ensure_probability, Error, Result};
use crate::estimate::delta_method_se;
use crate::kernels::TruncLognormalParams;
use crate::optim::{minimize, OptimOptions};
use crate::rng::stream;
use crate::severity::{Scaled, Severity};

/// Body losses come from `body`; tail losses are `bt + Y` with Y from `tail`.
#[derive(Debug, Clone)]
pub struct SplicedSeverity {
    body: Arc<dyn Severity>,
    tail: Arc<dyn Severity>,
    bt: f64,
}

impl SplicedSeverity {
    pub fn new(body: TruncLognormalParams, tail: Arc<dyn Severity>) -> Result<Self> {
        if !body.bt.is_finite() {
            return Err(Error::InvalidParameter("spliced body needs a finite body-tail threshold".into()));
        }
        Ok(Self { bt: body.bt, body: Arc::new(body), tail })
    }

    /// Arbitrary body and tail pieces; `bt` is the tail offset (may be 0).
    pub fn from_parts(body: Arc<dyn Severity>, tail: Arc<dyn Severity>, bt: f64) -> Result<Self> {
        if !(bt >= 0.0 && bt.is_finite()) {
            return Err(Error::InvalidParameter(format!("tail offset must be finite and >= 0, got {bt}")));
        }
        Ok(Self { body, tail, bt })
    }

    pub fn bt(&self) -> f64 {
        self.bt
    }

    pub fn body(&self) -> &dyn Severity {
        self.body.as_ref()
    }

    pub fn tail(&self) -> &dyn Severity {
        self.tail.as_ref()
    }

    /// Every loss multiplied by `s`, consuming random numbers identically.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Ok(Self {
            body: Arc::new(Scaled::new(Arc::clone(&self.body), s)?),
            tail: Arc::new(Scaled::new(Arc::clone(&self.tail), s)?),
            bt: self.bt * s,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyFit {
    pub lambda_body: f64,
    pub lambda_tail: f64,
    pub years: f64,
}

impl FrequencyFit {
    pub fn from_counts(body_count: u64, tail_count: u64, years: f64) -> Result<Self> {
        Ok(Self {
            lambda_body: fit_frequency(body_count, years)?,
            lambda_tail: fit_frequency(tail_count, years)?,
            years,
        })
    }

    pub fn from_rates(lambda_body: f64, lambda_tail: f64) -> Result<Self> {
        for (name, l) in [("lambda_body", lambda_body), ("lambda_tail", lambda_tail)] {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {l}")));
            }
        }
        Ok(Self { lambda_body, lambda_tail, years: 1.0 })
    }
}

/// Poisson rate: count / years.
pub fn fit_frequency(count: u64, years: f64) -> Result<f64> {
    ensure_positive("observation window (years)", years)?;
    if !years.is_finite() {
        return Err(Error::InvalidParameter("observation window must be finite".into()));
    }
    Ok(count as f64 / years)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapitalResult {
    pub var_999: f64,
    pub iterations: usize,
    pub seed: u64,
    pub mean_annual_loss: f64,
    pub max_annual_loss: f64,
    pub annual_losses: Option<Vec<f64>>,
}

fn poisson(lambda: f64) -> Result<Option<Poisson<f64>>> {
    if lambda == 0.0 {
        return Ok(None);
    }
    Poisson::new(lambda)
        .map(Some)
        .map_err(|e| Error::InvalidParameter(format!("Poisson rate {lambda}: {e}")))
}

/// Compound-Poisson annual losses and their 99.9% order statistic.
///
/// Iteration i draws from stream (seed, i): body count, tail count, body
/// losses, tail losses, in that order. The result does not depend on how
/// iterations are spread over threads.
pub fn simulate_aggregate(
    severity: &SplicedSeverity,
    freq: &FrequencyFit,
    iterations: usize,
    seed: u64,
    keep_losses: bool,
) -> Result<CapitalResult> {
    if iterations < 1000 {
        return Err(Error::InvalidParameter(format!("need at least 1000 iterations, got {iterations}")));
    }
    let pb = poisson(freq.lambda_body)?;
    let pt = poisson(freq.lambda_tail)?;
    let losses: Vec<f64> = (0..iterations)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            let nb = pb.as_ref().map_or(0, |d| d.sample(&mut rng) as u64);
            let nt = pt.as_ref().map_or(0, |d| d.sample(&mut rng) as u64);
            let wrap = |e: Error| Error::Simulation { iteration: i, source: Box::new(e) };
            let mut total = 0.0;
            for _ in 0..nb {
                total += severity.body.draw(&mut rng).map_err(wrap)?;
            }
            for _ in 0..nt {
                total += severity.bt + severity.tail.draw(&mut rng).map_err(wrap)?;
            }
            Ok(total)
        })
        .collect::<Result<_>>()?;
    let var_999 = var_at(&losses, 0.999)?;
    let mean_annual_loss = losses.iter().sum::<f64>() / iterations as f64;
    let max_annual_loss = losses.iter().copied().fold(0.0, f64::max);
    Ok(CapitalResult {
        var_999,
        iterations,
        seed,
        mean_annual_loss,
        max_annual_loss,
        annual_losses: keep_losses.then_some(losses),
    })
}

/// The ⌈p·n⌉-th order statistic.
pub fn var_at(losses: &[f64], p: f64) -> Result<f64> {
    ensure_probability(p)?;
    let n = losses.len();
    if n == 0 {
        return Err(Error::InsufficientData("empty loss sample".into()));
    }
    let k = ((p * n as f64 - 1e-9).ceil() as usize).clamp(1, n);
    let mut v = losses.to_vec();
    let (_, kth, _) = v.select_nth_unstable_by(k - 1, f64::total_cmp);
    Ok(*kth)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BodyFit {
    pub params: TruncLognormalParams,
    pub log_likelihood: f64,
    /// Standard errors of (μ, σ), when the information is positive definite.
    pub se: Option<Vec<f64>>,
    pub n: usize,
    pub converged: bool,
}

fn body_loglik(data: &[f64], rt: f64, bt: f64, u: &[f64]) -> f64 {
    let Ok(p) = TruncLognormalParams::new(u[0], u[1].exp(), rt, bt) else {
        return f64::NEG_INFINITY;
    };
    let mut acc = 0.0;
    for &x in data {
        match p.ln_pdf(x) {
            Ok(v) => acc += v,
            Err(_) => return f64::NEG_INFINITY,
        }
    }
    acc
}

/// Maximum likelihood for the lognormal truncated to [rt, bt].
pub fn fit_body(data: &[f64], rt: f64, bt: f64) -> Result<BodyFit> {
    ensure_positive("rt", rt)?;
    if !(bt > rt) {
        return Err(Error::InvalidParameter(format!("need rt < bt, got rt={rt}, bt={bt}")));
    }
    if data.len() < 10 {
        return Err(Error::InsufficientData(format!("body fit needs at least 10 losses, got {}", data.len())));
    }
    if let Some(x) = data.iter().find(|&&x| !(x >= rt && x <= bt)) {
        return Err(Error::Domain(format!("body loss {x} outside [{rt}, {bt}]")));
    }
    let n = data.len() as f64;
    let mu0 = data.iter().map(|x| x.ln()).sum::<f64>() / n;
    let var0 = data.iter().map(|x| (x.ln() - mu0).powi(2)).sum::<f64>() / n;
    if !(var0 > 0.0) {
        return Err(Error::InsufficientData("body losses are all equal".into()));
    }
    let neg = |u: &[f64]| -body_loglik(data, rt, bt, u);
    let r = minimize(&neg, &[mu0, 0.5 * var0.ln()], &OptimOptions::default());
    if !r.fx.is_finite() {
        return Err(Error::Convergence("truncated lognormal likelihood is not finite".into()));
    }
    let params = TruncLognormalParams::new(r.x[0], r.x[1].exp(), rt, bt)?;
    let ll = |u: &[f64]| body_loglik(data, rt, bt, u);
    let report = |u: &[f64]| vec![u[0], u[1].exp()];
    Ok(BodyFit {
        params,
        log_likelihood: -r.fx,
        se: delta_method_se(&ll, &r.x, &report),
        n: data.len(),
        converged: r.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::severity::PointMass;

    #[test]
    fn var_fixtures() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(var_at(&v, 0.999).unwrap(), 999.0);
        assert_eq!(var_at(&[4.5; 17], 0.999).unwrap(), 4.5);
        assert!(var_at(&[], 0.5).is_err());
        assert!(var_at(&v, 1.0).is_err());
    }

    #[test]
    fn frequency_fixtures() {
        assert!((fit_frequency(100, 9.25).unwrap() - 10.8).abs() < 0.05);
        assert!((fit_frequency(43, 9.25).unwrap() - 4.65).abs() < 0.005);
        assert_eq!(fit_frequency(0, 9.25).unwrap(), 0.0);
        assert!(fit_frequency(3, 0.0).is_err());
    }

    #[test]
    fn zero_frequency_gives_zero_var() {
        let sev = SplicedSeverity::from_parts(
            Arc::new(PointMass::new(1.0).unwrap()),
            Arc::new(PointMass::new(1.0).unwrap()),
            0.0,
        )
        .unwrap();
        let r = simulate_aggregate(&sev, &FrequencyFit::from_rates(0.0, 0.0).unwrap(), 1000, 1, false).unwrap();
        assert_eq!(r.var_999, 0.0);
        assert!(simulate_aggregate(&sev, &FrequencyFit::from_rates(0.0, 0.0).unwrap(), 999, 1, false).is_err());
    }

    #[test]
    fn body_fit_wide_band_is_plain_lognormal() {
        let ln = crate::kernels::Lognormal::new(0.4, 0.9).unwrap();
        let data = ln.sample(&mut stream(3, 0), 300).unwrap();
        let f = fit_body(&data, 1e-300, f64::INFINITY).unwrap();
        let n = data.len() as f64;
        let mu = data.iter().map(|x| x.ln()).sum::<f64>() / n;
        let sd = (data.iter().map(|x| (x.ln() - mu).powi(2)).sum::<f64>() / n).sqrt();
        assert!((f.params.mu - mu).abs() < 1e-6 && (f.params.sigma - sd).abs() < 1e-6);
        assert!(fit_body(&[2.0; 20], 1.0, 3.0).is_err());
        assert!(fit_body(&data[..5], 1e-300, f64::INFINITY).is_err());
    }
}
