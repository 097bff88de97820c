use std::sync::Arc;

use rand::SeedableRng;
use rand_distr::{Distribution, LogNormal, Poisson};
use snpcap::capital::{fit_body, simulate_aggregate, var_at, FrequencyFit, SplicedSeverity};
use snpcap::estimate::{fit_kernel_mle, fit_snp_mle, FitOptions};
use snpcap::kernels::{trunc_lgn_logpdf, KernelFamily, TruncLognormalParams};
use snpcap::rng::stream;
use snpcap::severity::PointMass;
use snpcap::{Severity, SnpModelSpec};

fn poisson_quantile(lambda: f64, p: f64) -> u64 {
    let mut pmf = (-lambda).exp();
    let mut cdf = pmf;
    let mut k = 0u64;
    while cdf < p {
        k += 1;
        pmf *= lambda / k as f64;
        cdf += pmf;
    }
    k
}

fn point_tail(s: f64) -> SplicedSeverity {
    SplicedSeverity::from_parts(Arc::new(PointMass::new(1.0).unwrap()), Arc::new(PointMass::new(s).unwrap()), 0.0).unwrap()
}

#[test]
fn degenerate_severity_matches_poisson_quantile() {
    let s = 3.0;
    let q = poisson_quantile(4.6, 0.999) as f64;
    let r = simulate_aggregate(&point_tail(s), &FrequencyFit::from_rates(0.0, 4.6).unwrap(), 1_000_000, 17, false).unwrap();
    assert!((r.var_999 - s * q).abs() <= s, "VaR {} vs {}", r.var_999, s * q);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let sev = SplicedSeverity::new(
        TruncLognormalParams::new(0.0, 1.0, 0.5, 5.0).unwrap(),
        Arc::new(snpcap::kernels::Gpd::new(0.4, 2.0).unwrap()),
    )
    .unwrap();
    let freq = FrequencyFit::from_rates(6.0, 2.0).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate_aggregate(&sev, &freq, 20_000, 99, true).unwrap())
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a.var_999.to_bits(), b.var_999.to_bits());
    assert_eq!(a.annual_losses, b.annual_losses);
}

#[test]
fn var_scales_with_severity() {
    let sev = SplicedSeverity::new(
        TruncLognormalParams::new(0.0, 1.0, 0.5, 5.0).unwrap(),
        Arc::new(SnpModelSpec::from_parts(KernelFamily::Lognormal, 1.2, vec![1.0, -0.3, 0.1]).unwrap()),
    )
    .unwrap();
    let freq = FrequencyFit::from_rates(5.0, 1.5).unwrap();
    let base = simulate_aggregate(&sev, &freq, 10_000, 5, false).unwrap().var_999;
    let eight = simulate_aggregate(&sev.scaled(8.0).unwrap(), &freq, 10_000, 5, false).unwrap().var_999;
    assert_eq!((8.0 * base).to_bits(), eight.to_bits());
    let odd = simulate_aggregate(&sev.scaled(3.7).unwrap(), &freq, 10_000, 5, false).unwrap().var_999;
    assert!((odd / (3.7 * base) - 1.0).abs() < 1e-12);
}

#[test]
fn more_tail_events_do_not_lower_var() {
    let sev = SplicedSeverity::new(
        TruncLognormalParams::new(0.0, 1.0, 0.5, 5.0).unwrap(),
        Arc::new(snpcap::kernels::Gpd::new(0.5, 1.0).unwrap()),
    )
    .unwrap();
    let ups = (0..20u64)
        .filter(|&seed| {
            let lo = simulate_aggregate(&sev, &FrequencyFit::from_rates(3.0, 2.0).unwrap(), 5000, seed, false).unwrap();
            let hi = simulate_aggregate(&sev, &FrequencyFit::from_rates(3.0, 3.0).unwrap(), 5000, seed, false).unwrap();
            hi.var_999 >= lo.var_999
        })
        .count();
    // one-sided sign test at 5%: at least 15 of 20
    assert!(ups >= 15, "{ups}/20");
}

#[test]
fn body_only_var_matches_independent_oracle() {
    let lambda = 3.0;
    let body = TruncLognormalParams::new(0.0, 1.0, 1e-300, f64::INFINITY).unwrap();
    let sev = SplicedSeverity::from_parts(Arc::new(body), Arc::new(PointMass::new(1.0).unwrap()), 0.0).unwrap();
    let freq = FrequencyFit::from_rates(lambda, 0.0).unwrap();
    let a = simulate_aggregate(&sev, &freq, 1_000_000, 1, false).unwrap().var_999;
    let b = simulate_aggregate(&sev, &freq, 1_000_000, 2, false).unwrap().var_999;
    assert!((a / b - 1.0).abs() < 0.02, "{a} vs {b}");

    let mut rng = rand::rngs::StdRng::seed_from_u64(12345);
    let pois = Poisson::new(lambda).unwrap();
    let ln = LogNormal::new(0.0, 1.0).unwrap();
    let oracle: Vec<f64> = (0..10_000_000)
        .map(|_| {
            let n = pois.sample(&mut rng) as u64;
            (0..n).map(|_| ln.sample(&mut rng)).sum()
        })
        .collect();
    let want = var_at(&oracle, 0.999).unwrap();
    assert!((a / want - 1.0).abs() < 0.02, "{a} vs oracle {want}");
}

#[test]
fn body_parameters_are_recovered() {
    let truth = TruncLognormalParams::new(-6.0, 2.5, 1e-4, 0.05).unwrap();
    let data = truth.sample(&mut stream(4, 0), 5000).unwrap();
    let fit = fit_body(&data, 1e-4, 0.05).unwrap();
    let se = fit.se.clone().unwrap();
    assert!(((fit.params.mu + 6.0) / se[0]).abs() < 3.0, "{:?} {se:?}", fit.params);
    assert!(((fit.params.sigma - 2.5) / se[1]).abs() < 3.0);
    let ll = |mu: f64, sigma: f64| {
        let p = TruncLognormalParams::new(mu, sigma, 1e-4, 0.05).unwrap();
        data.iter().map(|&x| trunc_lgn_logpdf(&p, x).unwrap()).sum::<f64>()
    };
    let best = ll(fit.params.mu, fit.params.sigma);
    assert!((best - fit.log_likelihood).abs() < 1e-6);
    for d in [-0.1, 0.1] {
        assert!(best >= ll(fit.params.mu + d, fit.params.sigma));
    }
}

/// Heavy-tail fixture: 43 exceedances per 9.25 years from a fitted-form
/// SNPLGN3p tail, a small truncated-lognormal body. Whenever the GPD fit has
/// c > 1, its VaR explodes past 10x the observed total while the SNP tail
/// stays within [0.5x, 5x].
#[test]
fn snp_tail_capital_stays_in_sanity_band() {
    let tail_model = SnpModelSpec::from_parts(KernelFamily::Lognormal, 1.8787, vec![5.1856, -2.3907, 0.3725, -0.0161]).unwrap();
    let (rt, bt, years) = (0.001, 0.05, 9.25);
    let body_model = TruncLognormalParams::new(-6.0, 1.5, rt, bt).unwrap();
    let opts = FitOptions { compute_se: false, ..FitOptions::default() };
    let mut heavy = 0;
    for seed in 0..8u64 {
        let tail = tail_model.sample(&mut stream(seed, 0), 43).unwrap();
        let body = body_model.sample(&mut stream(seed, 1), 281).unwrap();
        let total: f64 = tail.iter().map(|y| y + bt).sum::<f64>() + body.iter().sum::<f64>();
        let gpd = fit_kernel_mle(KernelFamily::Gpd, &tail, &opts).unwrap();
        if gpd.params[0] <= 1.0 {
            continue;
        }
        heavy += 1;
        let snp = fit_snp_mle(KernelFamily::Lognormal, 3, &tail, &opts).unwrap();
        let bf = fit_body(&body, rt, bt).unwrap();
        let freq = FrequencyFit::from_counts(body.len() as u64, tail.len() as u64, years).unwrap();
        let var = |f: &snpcap::FitResult| {
            let sev = SplicedSeverity::new(bf.params, Arc::new(f.fitted.clone())).unwrap();
            simulate_aggregate(&sev, &freq, 10_000, seed, false).unwrap().var_999
        };
        let (vg, vs) = (var(&gpd), var(&snp));
        assert!(vg > 10.0 * total, "seed {seed}: GPD VaR {vg} vs total {total}");
        assert!(vs >= 0.5 * total && vs <= 5.0 * total, "seed {seed}: SNP VaR {vs} vs total {total}");
    }
    assert!(heavy >= 3, "only {heavy} heavy-tailed GPD fits");
}
