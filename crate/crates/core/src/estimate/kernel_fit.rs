use crate::error::{Error, Result};
use crate::kernels::{Exponential, Gb2, Gpd, KernelFamily, KernelParams, LogLogistic, Lognormal, Weibull};
use crate::optim::{fd_gradient, minimize, OptimResult};
use crate::severity::Severity;

use super::{assemble, FitOptions, FitResult, FittedModel, ModelKind, Scaled};

/// Optimiser coordinates → parameters. Shapes and scales live in log space.
pub(crate) fn kernel_from_internal(family: KernelFamily, u: &[f64]) -> Result<KernelParams> {
    Ok(match family {
        KernelFamily::Gpd => KernelParams::Gpd(Gpd::new(u[0].exp(), u[1].exp())?),
        KernelFamily::LogLogistic => KernelParams::LogLogistic(LogLogistic::new(u[0].exp(), u[1].exp())?),
        KernelFamily::Lognormal => KernelParams::Lognormal(Lognormal::new(u[0], u[1].exp())?),
        KernelFamily::Weibull => KernelParams::Weibull(Weibull::new(u[0].exp(), u[1].exp())?),
        KernelFamily::Exponential => KernelParams::Exponential(Exponential::new(u[0].exp())?),
        KernelFamily::Gb2 => KernelParams::Gb2(Gb2::new(u[0].exp(), u[1].exp(), u[2].exp(), u[3].exp())?),
    })
}

/// Reporting parameterisation: GPD (c, b); LogLGT (location ln b, dispersion
/// 1/c); LGN (μ, σ); WBL (c, rate b); EXP (scale = mean); GB2 (a, b, p, q).
pub(crate) fn report_params(p: &KernelParams) -> Vec<f64> {
    match *p {
        KernelParams::Gpd(d) => vec![d.c, d.b],
        KernelParams::LogLogistic(d) => {
            let (loc, disp) = d.location_dispersion();
            vec![loc, disp]
        }
        KernelParams::Lognormal(d) => vec![d.mu, d.sigma],
        KernelParams::Weibull(d) => vec![d.c, d.b],
        KernelParams::Exponential(d) => vec![d.mean()],
        KernelParams::Gb2(d) => vec![d.a, d.b, d.p, d.q],
    }
}

pub(crate) fn report_names(family: KernelFamily) -> Vec<String> {
    let names: &[&str] = match family {
        KernelFamily::Gpd | KernelFamily::Weibull => &["c", "b"],
        KernelFamily::LogLogistic => &["location", "dispersion"],
        KernelFamily::Lognormal => &["mu", "sigma"],
        KernelFamily::Exponential => &["scale"],
        KernelFamily::Gb2 => &["a", "b", "p", "q"],
    };
    names.iter().map(|s| s.to_string()).collect()
}

pub(crate) fn loglik(family: KernelFamily, y: &[f64], u: &[f64]) -> f64 {
    let Ok(k) = kernel_from_internal(family, u) else {
        return f64::NEG_INFINITY;
    };
    let mut acc = 0.0;
    for &x in y {
        match k.ln_pdf(x) {
            Ok(v) if v.is_finite() => acc += v,
            _ => return f64::NEG_INFINITY,
        }
    }
    acc
}

fn median(y: &[f64]) -> f64 {
    let mut v = y.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn closed_form(family: KernelFamily, y: &[f64]) -> Option<Vec<f64>> {
    let n = y.len() as f64;
    match family {
        KernelFamily::Exponential => Some(vec![-(y.iter().sum::<f64>() / n).ln()]),
        KernelFamily::Lognormal => {
            let mu = y.iter().map(|x| x.ln()).sum::<f64>() / n;
            let var = y.iter().map(|x| (x.ln() - mu).powi(2)).sum::<f64>() / n;
            Some(vec![mu, 0.5 * var.ln()])
        }
        _ => None,
    }
}

fn starts(family: KernelFamily, y: &[f64], opts: &FitOptions) -> Vec<Vec<f64>> {
    let med = median(y).max(1e-12);
    let shapes = [0.3, 0.7, 1.5];
    match family {
        KernelFamily::Gpd => shapes
            .iter()
            .map(|&c: &f64| vec![c.ln(), (c * med / (2f64.powf(c) - 1.0)).ln()])
            .collect(),
        KernelFamily::LogLogistic => shapes.iter().map(|&c: &f64| vec![c.ln(), med.ln()]).collect(),
        KernelFamily::Weibull => shapes
            .iter()
            .map(|&c: &f64| vec![c.ln(), (2f64.ln() / med.powf(c)).ln()])
            .collect(),
        KernelFamily::Gb2 => {
            let mut out = Vec::new();
            if let Ok((KernelParams::LogLogistic(ll), _)) = fit_kernel_scaled(KernelFamily::LogLogistic, y, opts) {
                for (p, q) in [(1.0f64, 1.0f64), (2.0, 0.5), (0.5, 2.0)] {
                    out.push(vec![ll.c.ln(), ll.b.ln(), p.ln(), q.ln()]);
                }
            }
            out.push(vec![0.0, med.ln(), 0.0, 0.0]);
            out
        }
        KernelFamily::Lognormal | KernelFamily::Exponential => closed_form(family, y).into_iter().collect(),
    }
}

/// Fits on already-scaled data; returns the parameters and the optimiser record.
pub(crate) fn fit_kernel_scaled(family: KernelFamily, y: &[f64], opts: &FitOptions) -> Result<(KernelParams, OptimResult)> {
    let ll = |u: &[f64]| loglik(family, y, u);
    let neg = |u: &[f64]| -ll(u);
    let best = if let Some(u) = closed_form(family, y) {
        let fx = neg(&u);
        let grad_norm = fd_gradient(&neg, &u).iter().fold(0.0f64, |a, g| a.max(g.abs()));
        OptimResult { x: u, fx, evals: 1, grad_norm, converged: fx.is_finite() }
    } else {
        starts(family, y, opts)
            .iter()
            .map(|u0| minimize(&neg, u0, &opts.optim))
            .filter(|r| r.fx.is_finite())
            .min_by(|a, b| a.fx.total_cmp(&b.fx))
            .ok_or_else(|| Error::Convergence(format!("{family}: likelihood not finite at any start")))?
    };
    let k = kernel_from_internal(family, &best.x)?;
    Ok((k, best))
}

/// Maximum-likelihood fit of a parametric kernel to positive exceedances.
pub fn fit_kernel_mle(family: KernelFamily, data: &[f64], opts: &FitOptions) -> Result<FitResult> {
    let scaled = Scaled::new(data)?;
    let (k, best) = fit_kernel_scaled(family, &scaled.y, opts)?;
    let s = scaled.s;
    let fitted = FittedModel::Kernel { params: k.rescaled(s) };
    let ll = |u: &[f64]| loglik(family, &scaled.y, u);
    let report = |u: &[f64]| match kernel_from_internal(family, u) {
        Ok(p) => report_params(&p.rescaled(s)),
        Err(_) => vec![f64::NAN; family.param_count()],
    };
    Ok(assemble(
        ModelKind::Kernel { family },
        fitted,
        &scaled,
        best.x,
        &ll,
        &report,
        report_names(family),
        best.grad_norm,
        opts,
    ))
}

pub(crate) fn standard_errors(family: KernelFamily, fit: &FitResult, data: &[f64]) -> Result<Option<Vec<f64>>> {
    let scaled = Scaled::new(data)?;
    let s = scaled.s;
    let ll = |u: &[f64]| loglik(family, &scaled.y, u);
    let report = |u: &[f64]| match kernel_from_internal(family, u) {
        Ok(p) => report_params(&p.rescaled(s)),
        Err(_) => vec![f64::NAN; family.param_count()],
    };
    Ok(super::delta_method_se(&ll, &fit.estimates, &report))
}
