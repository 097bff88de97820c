use snpcap::estimate::{fit_kernel_mle, fit_ladder, fit_snp_mle, standard_errors, FitOptions};
use snpcap::kernels::{Gpd, KernelFamily, KernelParams};
use snpcap::rng::stream;
use snpcap::{Severity, SnpModelSpec};

fn opts() -> FitOptions {
    FitOptions::default()
}

#[test]
fn exponential_scale_is_sample_mean_with_fisher_se() {
    let data: Vec<f64> = KernelParams::Exponential(snpcap::kernels::Exponential::from_mean(0.54181).unwrap())
        .sample(&mut stream(3, 0), 400)
        .unwrap();
    let mean = data.iter().sum::<f64>() / data.len() as f64;
    let fit = fit_kernel_mle(KernelFamily::Exponential, &data, &opts()).unwrap();
    assert!((fit.params[0] - mean).abs() < 1e-12 * mean);
    let se = fit.se.as_ref().unwrap()[0];
    assert!((se / (mean / 20.0) - 1.0).abs() < 1e-5, "{se}");
    assert!(fit.converged);
}

#[test]
fn lognormal_closed_form() {
    let e = std::f64::consts::E;
    let fit = fit_kernel_mle(KernelFamily::Lognormal, &[1.0 / e, 1.0, e], &opts()).unwrap();
    assert!(fit.params[0].abs() < 1e-12);
    assert!((fit.params[1] - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
}

#[test]
fn empty_and_invalid_data_are_rejected() {
    assert!(fit_kernel_mle(KernelFamily::Gpd, &[], &opts()).is_err());
    assert!(fit_kernel_mle(KernelFamily::Gpd, &[1.0, -2.0], &opts()).is_err());
    assert!(fit_snp_mle(KernelFamily::Gb2, 1, &[1.0, 2.0], &opts()).is_err());
}

#[test]
fn gpd_parameters_are_recovered() {
    let truth = Gpd::new(0.5, 1.0).unwrap();
    let data = truth.sample(&mut stream(11, 0), 5000).unwrap();
    let fit = fit_kernel_mle(KernelFamily::Gpd, &data, &opts()).unwrap();
    let se = fit.se.clone().unwrap();
    assert!(((fit.params[0] - 0.5) / se[0]).abs() < 3.0, "{:?} {:?}", fit.params, se);
    assert!(((fit.params[1] - 1.0) / se[1]).abs() < 3.0);
    assert!(fit.grad_norm < 1e-3);
    let (se2, t2) = standard_errors(&fit, &data).unwrap();
    assert_eq!(se2.unwrap(), se);
    assert_eq!(t2.unwrap(), fit.t_stats.clone().unwrap());
}

#[test]
fn gb2_fit_nests_loglogistic() {
    let data = KernelParams::LogLogistic(snpcap::kernels::LogLogistic::new(1.5, 2.0).unwrap())
        .sample(&mut stream(5, 0), 800)
        .unwrap();
    let ll = fit_kernel_mle(KernelFamily::LogLogistic, &data, &opts()).unwrap();
    let gb2 = fit_kernel_mle(KernelFamily::Gb2, &data, &opts()).unwrap();
    assert!(gb2.log_likelihood >= ll.log_likelihood - 1e-6);
}

fn heavy_data(seed: u64, n: usize) -> Vec<f64> {
    let spec = SnpModelSpec::from_parts(KernelFamily::Gpd, 0.6, vec![1.3, -0.5, 0.2]).unwrap();
    spec.sample(&mut stream(seed, 0), n).unwrap()
}

#[test]
fn ladder_k0_matches_kernel_and_is_monotone() {
    let data = heavy_data(21, 600);
    for fam in KernelFamily::SNP {
        let kernel = fit_kernel_mle(fam, &data, &opts()).unwrap();
        let lad = fit_ladder(fam, &data, 3, 0.10, &opts()).unwrap();
        assert!(lad.failure.is_none());
        assert!((lad.fits[0].log_likelihood - kernel.log_likelihood).abs() < 1e-6, "{fam}: {} vs {}", lad.fits[0].log_likelihood, kernel.log_likelihood);
        for w in lad.fits.windows(2) {
            assert!(w[1].log_likelihood >= w[0].log_likelihood - 1e-6, "{fam}");
        }
        for f in &lad.fits {
            assert!(f.grad_norm < 1e-3, "{} grad {}", f.name(), f.grad_norm);
        }
    }
}

#[test]
fn snp_quantile_is_recovered() {
    let truth = SnpModelSpec::from_parts(KernelFamily::Gpd, 1.0, vec![1.0, 1.0]).unwrap();
    let data = truth.sample(&mut stream(9, 0), 5000).unwrap();
    let fit = fit_snp_mle(KernelFamily::Gpd, 1, &data, &opts()).unwrap();
    let q = fit.quantile(0.99).unwrap();
    let want = truth.quantile(0.99).unwrap();
    assert!((q / want - 1.0).abs() < 0.10, "{q} vs {want}");
}

#[test]
fn fits_are_scale_equivariant() {
    let data = heavy_data(4, 300);
    let s = 1234.5;
    let big: Vec<f64> = data.iter().map(|x| x * s).collect();
    for fam in [KernelFamily::Lognormal, KernelFamily::Gpd] {
        let a = fit_snp_mle(fam, 2, &data, &opts()).unwrap();
        let b = fit_snp_mle(fam, 2, &big, &opts()).unwrap();
        let shift = data.len() as f64 * s.ln();
        assert!((a.log_likelihood - shift - b.log_likelihood).abs() < 1e-6);
        let (qa, qb) = (a.quantile(0.999).unwrap(), b.quantile(0.999).unwrap());
        assert!((qb / (s * qa) - 1.0).abs() < 1e-6);
    }
}

#[test]
fn gpd_t_ratios_cover_truth() {
    let truth = [0.5, 1.0];
    let mut inside = 0;
    for r in 0..200 {
        let data = Gpd::new(0.5, 1.0).unwrap().sample(&mut stream(31, r), 5000).unwrap();
        let fit = fit_kernel_mle(KernelFamily::Gpd, &data, &opts()).unwrap();
        let se = fit.se.clone().unwrap();
        if (0..2).all(|i| ((fit.params[i] - truth[i]) / se[i]).abs() < 3.0) {
            inside += 1;
        }
    }
    assert!(inside >= 198, "{inside}/200");
}

// Under a pure kernel the K=0 -> 1 step should reject about alpha of the time.
#[test]
fn ladder_step_has_nominal_size() {
    let o = FitOptions { compute_se: false, ..opts() };
    let reps = 60;
    let rejects = (0..reps)
        .filter(|&r| {
            let data = Gpd::new(0.3, 1.0).unwrap().sample(&mut stream(41, r), 200).unwrap();
            let l = fit_ladder(KernelFamily::Gpd, &data, 1, 0.10, &o).unwrap();
            l.selected_k != 0
        })
        .count();
    // binomial(60, 0.1): mean 6, sd 2.3
    assert!(rejects <= 14, "{rejects}/{reps}");
}

#[test]
fn lognormal_ladder_on_mixture_picks_a_middle_k() {
    use snpcap::simgen::{extract_exceedances, generate_mixture, paper_mixture};
    let sample = generate_mixture(&paper_mixture(), 7).unwrap();
    let y = extract_exceedances(&sample, 30.0).unwrap().values;
    let l = fit_ladder(KernelFamily::Lognormal, &y, 4, 0.10, &FitOptions { compute_se: false, ..opts() }).unwrap();
    assert!((2..=4).contains(&l.selected_k), "selected K = {}", l.selected_k);
    assert!(l.fits[3].log_likelihood > l.fits[0].log_likelihood);
}
