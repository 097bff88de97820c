mod common;

use common::{integrate, squared_poly};
use proptest::prelude::*;
use snpcap::kernels::KernelFamily;
use snpcap::snp::{gamma_from_theta, h_eval, h_grad, h_inverse, SnpTheta};
use snpcap::{Severity, SnpModelSpec};

fn theta_strategy() -> impl Strategy<Value = Vec<f64>> {
    (0usize..=4).prop_flat_map(|k| {
        (0.01f64..=5.0, prop::collection::vec(-5.0f64..=5.0, k)).prop_filter_map("leading coefficient zero", |(t0, rest)| {
            let mut v = vec![t0];
            v.extend(rest);
            (v.len() == 1 || v.last().unwrap().abs() > 1e-6).then_some(v)
        })
    })
}

fn family_strategy() -> impl Strategy<Value = KernelFamily> {
    prop::sample::select(KernelFamily::SNP.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn h_matches_quadrature(theta in theta_strategy(), xs in prop::collection::vec(1e-3f64..=10.0, 20)) {
        let g = gamma_from_theta(&SnpTheta::new(theta.clone()).unwrap());
        for x in xs {
            let q = integrate(&|e| squared_poly(&theta, e), 0.0, x, 1e-14);
            let h = h_eval(&g, x);
            prop_assert!((h - q).abs() <= 1e-9 * q.abs().max(1e-300), "x={} h={} quad={}", x, h, q);
        }
    }

    #[test]
    fn h_is_monotone(theta in theta_strategy()) {
        let g = gamma_from_theta(&SnpTheta::new(theta.clone()).unwrap());
        let mut prev = 0.0;
        for i in 0..=400 {
            let x = 10.0 * f64::from(i) / 400.0;
            let h = h_eval(&g, x);
            prop_assert!(h >= prev, "h decreased at x={}", x);
            prev = h;
            let scale: f64 = g.as_slice().iter().enumerate().map(|(j, c)| ((j + 1) as f64 * c * x.powi(j as i32)).abs()).sum();
            prop_assert!(h_grad(&g, x) >= -1e-12 * scale.max(1.0));
            let sq = squared_poly(&theta, x);
            prop_assert!((h_grad(&g, x) - sq).abs() <= 1e-12 * scale.max(1.0));
        }
    }

    #[test]
    fn inverse_round_trips(theta in theta_strategy(), xs in prop::collection::vec(1e-3f64..=1e3, 10)) {
        let g = gamma_from_theta(&SnpTheta::new(theta).unwrap());
        for x in xs {
            let back = h_inverse(&g, h_eval(&g, x)).unwrap();
            prop_assert!((back / x - 1.0).abs() < 1e-8, "x={} back={}", x, back);
        }
    }

    #[test]
    fn density_integrates_to_cdf(fam in family_strategy(), c in 0.4f64..2.5, theta in theta_strategy()) {
        let c = if fam == KernelFamily::Exponential { 1.0 } else { c };
        let spec = SnpModelSpec::from_parts(fam, c, theta).unwrap();
        let q = spec.quantile(1.0 - 1e-6).unwrap();
        // substitute x = e^t so the kernel singularities at 0 stay integrable
        let f = |t: f64| { let x = t.exp(); spec.ln_pdf_or_neg_inf(x).exp() * x };
        let lo = (1e-300f64).ln();
        let mut mass = 0.0;
        let cuts = 64;
        for i in 0..cuts {
            let a = lo + (q.ln() - lo) * i as f64 / cuts as f64;
            let b = lo + (q.ln() - lo) * (i + 1) as f64 / cuts as f64;
            mass += integrate(&f, a, b, 1e-12);
        }
        prop_assert!((mass - 1.0).abs() < 1e-4, "{} mass {}", spec.name(), mass);
    }

    #[test]
    fn quantile_inverts_cdf(fam in family_strategy(), c in 0.4f64..2.5, theta in theta_strategy(), p in 0.001f64..0.999) {
        let c = if fam == KernelFamily::Exponential { 1.0 } else { c };
        let spec = SnpModelSpec::from_parts(fam, c, theta).unwrap();
        let x = spec.quantile(p).unwrap();
        prop_assert!((spec.cdf(x) - p).abs() < 1e-8);
    }
}
