use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelFamily;
use crate::optim::{minimize, OptimResult};
use crate::rng::{stream, substream_seed};
use crate::snp::{snp_kernel, SnpKernel, SnpModelSpec, SnpTheta};

use super::inference::{delta_method_se, lr_test, LrTest};
use super::kernel_fit::fit_kernel_scaled;
use super::{assemble, FitOptions, FitResult, FittedModel, ModelKind, Scaled};

fn kernel_of(family: KernelFamily) -> Result<&'static dyn SnpKernel> {
    snp_kernel(family).ok_or_else(|| Error::InvalidParameter(format!("{family} has no SNP form")))
}

/// Coordinates: (ln c, ln θ₀, φ₁, …, φ_K) with φ_k = θ_k·r^k; no ln c when
/// the shape is pinned. `r` is the largest scaled observation, so every φ_k
/// moves the polynomial by O(1) at the top of the sample. Without it the
/// high-order directions are too badly conditioned for the optimiser.
fn from_internal(kern: &dyn SnpKernel, u: &[f64], r: f64) -> Result<SnpModelSpec> {
    let free = kern.free_shape();
    let (c, rest) = if free { (u[0].exp(), &u[1..]) } else { (1.0, u) };
    let mut theta = Vec::with_capacity(rest.len());
    theta.push(rest[0].exp());
    theta.extend(rest[1..].iter().zip(1..).map(|(phi, k)| phi / r.powi(k)));
    SnpModelSpec::new(kern.family(), c, SnpTheta::from_raw(theta)?)
}

fn precond(y: &[f64]) -> f64 {
    y.iter().copied().fold(1.0, f64::max)
}

fn loglik(kern: &dyn SnpKernel, y: &[f64], r: f64, u: &[f64]) -> f64 {
    let Ok(spec) = from_internal(kern, u, r) else {
        return f64::NEG_INFINITY;
    };
    let mut acc = 0.0;
    for &x in y {
        acc += spec.ln_pdf_or_neg_inf(x);
    }
    if acc.is_nan() {
        f64::NEG_INFINITY
    } else {
        acc
    }
}

fn report(kern: &dyn SnpKernel, u: &[f64], r: f64, s: f64) -> Vec<f64> {
    match from_internal(kern, u, r) {
        Ok(spec) => {
            let r = spec.rescaled(s);
            let mut out = Vec::with_capacity(u.len());
            if kern.free_shape() {
                out.push(r.c());
            }
            out.extend_from_slice(r.theta().as_slice());
            out
        }
        Err(_) => vec![f64::NAN; u.len()],
    }
}

fn names(kern: &dyn SnpKernel, k: usize) -> Vec<String> {
    let mut out = Vec::new();
    if kern.free_shape() {
        out.push("c".to_string());
    }
    out.extend((0..=k).map(|i| format!("theta{i}")));
    out
}

fn pad(u: &[f64], len: usize, fill: f64) -> Vec<f64> {
    let mut v = u.to_vec();
    v.resize(len, fill);
    v
}

struct Rung {
    opt: OptimResult,
}

fn fit_rung(
    kern: &dyn SnpKernel,
    k: usize,
    y: &[f64],
    kernel_start: &[f64],
    prev: Option<&[f64]>,
    opts: &FitOptions,
) -> Result<Rung> {
    let dim = kernel_start.len() + k;
    let mut starts = vec![pad(kernel_start, dim, 0.0)];
    if let Some(p) = prev {
        starts.push(pad(p, dim, 0.0));
        starts.push(pad(p, dim, 1e-3));
    }
    let centre = prev.map_or_else(|| starts[0].clone(), |p| pad(p, dim, 0.0));
    let seed = substream_seed(opts.seed, &format!("snp-{}-{k}", kern.family().label()));
    let r = precond(y);
    // Each jitter is tried twice: on the preconditioned coordinates, and
    // with the polynomial part widened to the raw θ scale, which reaches
    // modes the first misses.
    let first_poly = dim - k;
    for j in 0..opts.jitter_starts {
        let mut rng = stream(seed, j as u64);
        let z: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        starts.push(centre.iter().zip(&z).map(|(v, z)| v + opts.jitter_sd * z).collect());
        starts.push(
            centre
                .iter()
                .zip(&z)
                .enumerate()
                .map(|(i, (v, z))| {
                    let widen = if i >= first_poly { r.powi((i - first_poly + 1) as i32) } else { 1.0 };
                    v + opts.jitter_sd * widen * z
                })
                .collect(),
        );
    }

    let neg = |u: &[f64]| -loglik(kern, y, r, u);
    let results: Vec<OptimResult> = starts.par_iter().map(|u0| minimize(&neg, u0, &opts.optim)).collect();
    let best = results
        .into_iter()
        .filter(|r| r.fx.is_finite())
        .min_by(|a, b| a.fx.total_cmp(&b.fx))
        .ok_or_else(|| {
            Error::Convergence(format!(
                "SNP{}{}p: likelihood not finite at any of {} starts",
                kern.family().snp_tag(),
                k,
                starts.len()
            ))
        })?;
    Ok(Rung { opt: best })
}

/// Fits K = 0..=kmax in order, each rung warm-started from the one below.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LadderResult {
    pub family: KernelFamily,
    pub fits: Vec<FitResult>,
    /// Step tests K−1 → K (df = 1); entry i compares fits[i] with fits[i+1].
    pub lr_steps: Vec<LrTest>,
    pub selected_k: usize,
    pub alpha: f64,
    /// Set when a rung failed; fits holds the rungs below it.
    pub failure: Option<String>,
}

impl LadderResult {
    pub fn selected(&self) -> Option<&FitResult> {
        self.fits.get(self.selected_k)
    }

    pub fn fit_for(&self, k: usize) -> Option<&FitResult> {
        self.fits.get(k)
    }
}

/// SNP ladder for one kernel family.
pub fn fit_ladder(family: KernelFamily, data: &[f64], kmax: usize, alpha: f64, opts: &FitOptions) -> Result<LadderResult> {
    let kern = kernel_of(family)?;
    crate::error::ensure_probability(alpha)?;
    let scaled = Scaled::new(data)?;
    let s = scaled.s;
    let y = &scaled.y;
    let r = precond(y);

    let (kp, _) = fit_kernel_scaled(family, y, opts)?;
    let (c0, t0) = kern
        .from_kernel(&kp)
        .ok_or_else(|| Error::InvalidParameter(format!("{family} kernel does not nest")))?;
    let kernel_start: Vec<f64> = if kern.free_shape() { vec![c0.ln(), t0.ln()] } else { vec![t0.ln()] };

    let mut fits: Vec<FitResult> = Vec::new();
    let mut failure = None;
    let mut prev: Option<Vec<f64>> = None;
    for k in 0..=kmax {
        let rung = match fit_rung(kern, k, y, &kernel_start, prev.as_deref(), opts) {
            Ok(r) => r,
            Err(e) => {
                failure = Some(format!("K={k}: {e}"));
                break;
            }
        };
        let u = rung.opt.x;
        let spec = from_internal(kern, &u, r)?;
        let ll = |v: &[f64]| loglik(kern, y, r, v);
        let rep = |v: &[f64]| report(kern, v, r, s);
        let fit = assemble(
            ModelKind::Snp { family, k },
            FittedModel::Snp { spec: spec.rescaled(s) },
            &scaled,
            u.clone(),
            &ll,
            &rep,
            names(kern, k),
            rung.opt.grad_norm,
            opts,
        );
        fits.push(fit);
        prev = Some(u);
    }

    let mut lr_steps = Vec::new();
    let mut selected_k = 0;
    for (i, w) in fits.windows(2).enumerate() {
        let t = lr_test(w[0].log_likelihood, w[1].log_likelihood, 1, alpha)?;
        if t.reject {
            selected_k = i + 1;
        }
        lr_steps.push(t);
    }
    Ok(LadderResult { family, fits, lr_steps, selected_k, alpha, failure })
}

/// SNP fit with truncation point `k`, reached through the warm-started ladder.
pub fn fit_snp_mle(family: KernelFamily, k: usize, data: &[f64], opts: &FitOptions) -> Result<FitResult> {
    let mut ladder = fit_ladder(family, data, k, 0.10, opts)?;
    if ladder.fits.len() <= k {
        return Err(Error::Convergence(ladder.failure.unwrap_or_else(|| format!("K={k} not reached"))));
    }
    Ok(ladder.fits.swap_remove(k))
}

pub(crate) fn standard_errors(family: KernelFamily, fit: &FitResult, data: &[f64]) -> Result<Option<Vec<f64>>> {
    let kern = kernel_of(family)?;
    let scaled = Scaled::new(data)?;
    let r = precond(&scaled.y);
    let ll = |v: &[f64]| loglik(kern, &scaled.y, r, v);
    let rep = |v: &[f64]| report(kern, v, r, scaled.s);
    Ok(delta_method_se(&ll, &fit.estimates, &rep))
}
