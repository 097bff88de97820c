//! Plot-ready model diagnostics: Q-Q points, tail survival curves and the
//! model comparison table, with their CSV writers.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::FitResult;
use crate::severity::Severity;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QqSeries {
    pub model: String,
    /// (empirical, model) pairs, ascending.
    pub points: Vec<(f64, f64)>,
}

/// i-th point: (x₍ᵢ₎, Q((i − 0.5)/n)).
pub fn qq_points(model: &str, data: &[f64], quantile: &dyn Fn(f64) -> Result<f64>) -> Result<QqSeries> {
    if data.is_empty() {
        return Err(Error::InsufficientData("Q-Q plot of an empty sample".into()));
    }
    let mut x = data.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let points = x
        .iter()
        .enumerate()
        .map(|(i, &xi)| Ok((xi, quantile((i as f64 + 0.5) / n)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(QqSeries { model: model.to_string(), points })
}

/// (x, 1 − F(x)) on the given ascending grid.
pub fn tail_curve(sf: &dyn Fn(f64) -> f64, grid: &[f64]) -> Vec<(f64, f64)> {
    grid.iter().map(|&x| (x, sf(x).clamp(0.0, 1.0))).collect()
}

/// `points` log-spaced values from the median to the 1 − 10⁻⁶ quantile.
pub fn default_tail_grid(model: &dyn Severity, points: usize) -> Result<Vec<f64>> {
    let lo = model.quantile(0.5)?;
    let hi = model.isf(1e-6)?;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Domain(format!("cannot build a tail grid between {lo} and {hi}")));
    }
    let m = points.max(2);
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..m).map(|i| (a + (b - a) * i as f64 / (m - 1) as f64).exp()).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: String,
    pub log_likelihood: f64,
    pub q999: f64,
    pub params: usize,
    pub converged: bool,
}

/// One row per fit; quantile at `p` from the fitted model.
pub fn comparison_table(fits: &[FitResult], p: f64) -> Result<Vec<ComparisonRow>> {
    fits.iter()
        .map(|f| {
            Ok(ComparisonRow {
                model: f.name(),
                log_likelihood: f.log_likelihood,
                q999: f.quantile(p)?,
                params: f.model.param_count(),
                converged: f.converged,
            })
        })
        .collect()
}

pub fn write_qq_csv<W: Write>(w: W, qq: &QqSeries) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["empirical", "model"])?;
    for (e, m) in &qq.points {
        wr.write_record([e.to_string(), m.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_tail_csv<W: Write>(w: W, curve: &[(f64, f64)]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["x", "survival"])?;
    for (x, s) in curve {
        wr.write_record([x.to_string(), s.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_comparison_csv<W: Write>(w: W, rows: &[ComparisonRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["model", "logL", "q999", "params", "converged"])?;
    for r in rows {
        wr.write_record([
            r.model.clone(),
            r.log_likelihood.to_string(),
            r.q999.to_string(),
            r.params.to_string(),
            r.converged.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::{fit_kernel_mle, FitOptions};
    use crate::kernels::{Gpd, KernelFamily};

    #[test]
    fn qq_fixtures() {
        let g = Gpd::new(0.5, 1.0).unwrap();
        let data: Vec<f64> = (1..=20).map(|i| g.quantile((i as f64 - 0.5) / 20.0).unwrap()).collect();
        let qq = qq_points("GPD", &data, &|p| g.quantile(p)).unwrap();
        assert!(qq.points.iter().all(|(a, b)| a == b));
        let one = qq_points("id", &[5.0], &|p| Ok(p)).unwrap();
        assert_eq!(one.points, vec![(5.0, 0.5)]);
        let last = qq_points("id", &[3.0, 1.0, 2.0, 4.0], &|p| Ok(p)).unwrap();
        assert_eq!(last.points[3], (4.0, 3.5 / 4.0));
        assert!(qq_points("id", &[], &|p| Ok(p)).is_err());
    }

    #[test]
    fn tail_curve_fixtures() {
        let c = tail_curve(&|x: f64| x.powi(-2), &[10.0]);
        assert!((c[0].1 - 0.01).abs() < 1e-15);
        let g = Gpd::new(0.5, 1.0).unwrap();
        let grid = default_tail_grid(&g, 40).unwrap();
        let c = tail_curve(&|x| g.sf(x), &grid);
        assert!((c[0].1 - 0.5).abs() < 1e-12);
        assert!(c.windows(2).all(|w| w[1].1 <= w[0].1));
    }

    #[test]
    fn exponential_row() {
        let data = [0.5, 1.0, 1.5, 2.0];
        let fit = fit_kernel_mle(KernelFamily::Exponential, &data, &FitOptions::default()).unwrap();
        let rows = comparison_table(std::slice::from_ref(&fit), 0.999).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].model, "EXP");
        assert!((rows[0].q999 - 1.25 * -(0.001f64.ln())).abs() < 1e-9);
        assert_eq!(rows[0].log_likelihood, fit.log_likelihood);
        let mut buf = Vec::new();
        write_comparison_csv(&mut buf, &rows).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("model,logL,q999,params,converged\n"));
    }
}
