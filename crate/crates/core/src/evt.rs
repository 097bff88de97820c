//! Body-tail threshold selection: EDF goodness-of-fit statistics against a
//! fitted GPD, parametric-bootstrap p-values, and an empirical tail-slope
//! check for tail-index results.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{fit_kernel_mle, FitOptions};
use crate::kernels::{KernelFamily, KernelParams};
use crate::rng::stream;
use crate::severity::Severity;

const Z_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdfStats {
    pub ks_d: f64,
    pub cvm_w2: f64,
    pub ad_a2: f64,
}

impl EdfStats {
    fn as_array(&self) -> [f64; 3] {
        [self.ks_d, self.cvm_w2, self.ad_a2]
    }
}

/// Kolmogorov–Smirnov D, Cramér–von Mises W² and Anderson–Darling A² of a
/// sample against a fitted CDF.
pub fn edf_stats(data: &[f64], cdf: &dyn Fn(f64) -> f64) -> Result<EdfStats> {
    if data.is_empty() {
        return Err(Error::InsufficientData("EDF statistics need at least one observation".into()));
    }
    let mut z: Vec<f64> = data.iter().map(|&x| cdf(x).clamp(Z_CLAMP, 1.0 - Z_CLAMP)).collect();
    if z.iter().any(|v| v.is_nan()) {
        return Err(Error::Domain("fitted CDF returned NaN".into()));
    }
    z.sort_by(f64::total_cmp);
    Ok(edf_from_sorted(&z))
}

/// Statistics from probability-integral values already sorted ascending.
pub fn edf_from_sorted(z: &[f64]) -> EdfStats {
    let n = z.len();
    let nf = n as f64;
    let mut d = 0.0f64;
    let mut w2 = 1.0 / (12.0 * nf);
    let mut a_sum = 0.0;
    for (i0, &zi) in z.iter().enumerate() {
        let i = (i0 + 1) as f64;
        d = d.max(i / nf - zi).max(zi - (i - 1.0) / nf);
        w2 += (zi - (2.0 * i - 1.0) / (2.0 * nf)).powi(2);
        a_sum += (2.0 * i - 1.0) * (zi.ln() + (-z[n - 1 - i0]).ln_1p());
    }
    EdfStats { ks_d: d, cvm_w2: w2, ad_a2: -nf - a_sum / nf }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PValues {
    pub ks: f64,
    pub cvm: f64,
    pub ad: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BootstrapOutcome {
    pub p_values: PValues,
    pub replications: usize,
    pub failures: usize,
}

/// Parametric-bootstrap p-values: `b` samples of size `n` from the fitted
/// model, each refitted and scored; p = (1 + #{boot ≥ observed}) / (B + 1).
/// Replicate r uses stream (seed, r), so results do not depend on threads.
pub fn bootstrap_pvalues(
    params: &KernelParams,
    n: usize,
    observed: &EdfStats,
    b: usize,
    seed: u64,
    opts: &FitOptions,
) -> Result<BootstrapOutcome> {
    if b < 100 {
        return Err(Error::InvalidParameter(format!("bootstrap needs B >= 100, got {b}")));
    }
    if n == 0 {
        return Err(Error::InsufficientData("bootstrap sample size is zero".into()));
    }
    let family = params.family();
    let fit_opts = FitOptions { compute_se: false, ..opts.clone() };
    let reps: Vec<Option<[f64; 3]>> = (0..b)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, r as u64);
            let sample = params.sample(&mut rng, n).ok()?;
            let fit = fit_kernel_mle(family, &sample, &fit_opts).ok()?;
            if !fit.converged {
                return None;
            }
            edf_stats(&sample, &|x| fit.fitted.cdf(x)).ok().map(|s| s.as_array())
        })
        .collect();
    let failures = reps.iter().filter(|r| r.is_none()).count();
    if failures * 10 > b {
        return Err(Error::Convergence(format!("{failures} of {b} bootstrap refits failed")));
    }
    if failures > 0 {
        log::warn!("{failures} of {b} bootstrap refits failed and were dropped");
    }
    let obs = observed.as_array();
    let mut exceed = [0usize; 3];
    for r in reps.iter().flatten() {
        for j in 0..3 {
            if r[j] >= obs[j] {
                exceed[j] += 1;
            }
        }
    }
    let kept = (b - failures) as f64;
    let p = |j: usize| (1.0 + exceed[j] as f64) / (kept + 1.0);
    Ok(BootstrapOutcome { p_values: PValues { ks: p(0), cvm: p(1), ad: p(2) }, replications: b - failures, failures })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GofReport {
    pub threshold: f64,
    pub n_tail: usize,
    pub stats: EdfStats,
    pub p_values: Option<PValues>,
    pub fitted: KernelParams,
}

/// GPD fit to the exceedances over `threshold`, its EDF statistics and,
/// when `bootstrap` is `Some(B)`, bootstrap p-values.
pub fn gof_report(
    data: &[f64],
    threshold: f64,
    bootstrap: Option<usize>,
    seed: u64,
    opts: &FitOptions,
) -> Result<GofReport> {
    let tail: Vec<f64> = data.iter().filter(|&&x| x > threshold).map(|x| x - threshold).collect();
    let fit = fit_kernel_mle(KernelFamily::Gpd, &tail, opts)?;
    let stats = edf_stats(&tail, &|x| fit.fitted.cdf(x))?;
    let crate::estimate::FittedModel::Kernel { params } = fit.fitted else {
        unreachable!("kernel fit returns kernel parameters")
    };
    let p_values = match bootstrap {
        Some(b) => Some(bootstrap_pvalues(&params, tail.len(), &stats, b, seed, opts)?.p_values),
        None => None,
    };
    Ok(GofReport { threshold, n_tail: tail.len(), stats, p_values, fitted: params })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScanRow {
    pub threshold: f64,
    pub n_tail: usize,
    pub gpd_c: f64,
    pub gpd_b: f64,
    pub stats: EdfStats,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdScan {
    pub rows: Vec<ThresholdScanRow>,
    /// Index into `rows` of the minimum-A² candidate.
    pub selected: usize,
}

impl ThresholdScan {
    pub fn selected_row(&self) -> &ThresholdScanRow {
        &self.rows[self.selected]
    }
}

pub const DEFAULT_MIN_TAIL: usize = 30;

/// Empirical 70%..99% quantiles in 1% steps (order statistic ⌈p·n⌉),
/// deduplicated.
pub fn default_candidates(data: &[f64]) -> Vec<f64> {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return Vec::new();
    }
    let mut out: Vec<f64> = (70..=99)
        .map(|pct| {
            let k = ((pct as f64 / 100.0) * n as f64 - 1e-9).ceil().clamp(1.0, n as f64) as usize;
            v[k - 1]
        })
        .collect();
    out.dedup();
    out
}

/// GPD fits on exceedances over each candidate; selects the minimum A²
/// (ties go to the smaller threshold). Candidates leaving fewer than
/// `min_tail` exceedances, or the same count as a smaller candidate, are skipped.
pub fn threshold_scan(data: &[f64], candidates: &[f64], min_tail: usize, opts: &FitOptions) -> Result<ThresholdScan> {
    let mut cands: Vec<f64> = candidates.iter().copied().filter(|u| u.is_finite()).collect();
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let fit_opts = FitOptions { compute_se: false, ..opts.clone() };

    let mut admissible: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut last_n = usize::MAX;
    for u in cands {
        let tail: Vec<f64> = data.iter().filter(|&&x| x > u).map(|x| x - u).collect();
        if tail.len() < min_tail.max(1) || tail.len() >= last_n {
            continue;
        }
        last_n = tail.len();
        admissible.push((u, tail));
    }
    let rows: Vec<ThresholdScanRow> = admissible
        .par_iter()
        .filter_map(|(u, tail)| {
            let fit = match fit_kernel_mle(KernelFamily::Gpd, tail, &fit_opts) {
                Ok(f) => f,
                Err(e) => {
                    log::warn!("threshold {u}: GPD fit failed: {e}");
                    return None;
                }
            };
            let stats = edf_stats(tail, &|x| fit.fitted.cdf(x)).ok()?;
            Some(ThresholdScanRow { threshold: *u, n_tail: tail.len(), gpd_c: fit.params[0], gpd_b: fit.params[1], stats })
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no candidate threshold leaves at least {min_tail} exceedances"
        )));
    }
    let mut selected = 0;
    for (i, r) in rows.iter().enumerate() {
        if r.stats.ad_a2 < rows[selected].stats.ad_a2 {
            selected = i;
        }
    }
    Ok(ThresholdScan { rows, selected })
}

/// Scan rows as CSV: `u,n_tail,gpd_c,gpd_b,ks,cvm,ad`.
pub fn write_scan_csv<W: Write>(w: W, scan: &ThresholdScan) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["u", "n_tail", "gpd_c", "gpd_b", "ks", "cvm", "ad"])?;
    for r in &scan.rows {
        wr.write_record([
            r.threshold.to_string(),
            r.n_tail.to_string(),
            r.gpd_c.to_string(),
            r.gpd_b.to_string(),
            r.stats.ks_d.to_string(),
            r.stats.cvm_w2.to_string(),
            r.stats.ad_a2.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailSlope {
    pub slope: f64,
    pub p_lo: f64,
    /// Upper tail probability actually used (raised if the survival underflowed).
    pub p_hi: f64,
}

/// Least-squares slope of ln S(x) on ln x over 50 log-spaced points between
/// the upper `p_lo` and `p_hi` quantiles.
pub fn tail_slope(sev: &dyn Severity, p_lo: f64, p_hi: f64) -> Result<TailSlope> {
    if !(p_hi > 0.0 && p_hi < p_lo && p_lo <= 1e-3) {
        return Err(Error::InvalidParameter(format!(
            "tail slope needs 0 < p_hi < p_lo <= 1e-3, got p_lo={p_lo}, p_hi={p_hi}"
        )));
    }
    let x_lo = sev.isf(p_lo)?;
    let mut p_hi_used = p_hi;
    let x_hi = loop {
        let ok = sev.isf(p_hi_used).ok().filter(|x| x.is_finite() && *x > x_lo && sev.sf(*x) > 0.0);
        if let Some(x) = ok {
            break x;
        }
        p_hi_used *= 10.0;
        if p_hi_used >= p_lo {
            return Err(Error::Domain("survival underflows across the whole tail band".into()));
        }
        log::warn!("survival underflow; raising p_hi to {p_hi_used:e}");
    };
    let (a, b) = (x_lo.ln(), x_hi.ln());
    let pts: Vec<(f64, f64)> = (0..50)
        .map(|i| {
            let lx = a + (b - a) * i as f64 / 49.0;
            (lx, sev.sf(lx.exp()).ln())
        })
        .filter(|(_, ly)| ly.is_finite())
        .collect();
    if pts.len() < 2 {
        return Err(Error::Domain("too few finite survival values for a slope".into()));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(TailSlope { slope: sxy / sxx, p_lo, p_hi: p_hi_used })
}
