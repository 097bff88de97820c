use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use serde_json::json;

use snpcap::capital::{fit_body, simulate_aggregate, FrequencyFit, SplicedSeverity};
use snpcap::diagnostics::{
    comparison_table, default_tail_grid, qq_points, tail_curve, write_comparison_csv, write_qq_csv, write_tail_csv,
};
use snpcap::estimate::{fit_ladder, FitOptions, FitResult, LadderResult};
use snpcap::evt::{default_candidates, gof_report, threshold_scan, write_scan_csv, DEFAULT_MIN_TAIL};
use snpcap::io::{read_losses_path, LossData};
use snpcap::registry::{strategy_for, ModelRegistry};
use snpcap::rng::substream_seed;
use snpcap::severity::PointMass;
use snpcap::simgen::{
    extract_exceedances, generate_mixture, paper_mixture, summarize, write_sample_csv, COMPONENT_SIZE, STUDY_THRESHOLDS,
};
use snpcap::{KernelFamily, ModelKind, Severity};

use crate::config::{split_list, FileConfig, Threshold};
use crate::Common;

/// Reports a usage problem the way clap does (exit code 2).
fn usage(msg: impl std::fmt::Display) -> ! {
    clap::Error::raw(ErrorKind::ValueValidation, format!("{msg}\n")).exit()
}

struct Ctx {
    cfg: FileConfig,
    input: Option<PathBuf>,
    out: PathBuf,
    seed: u64,
}

impl Ctx {
    fn new(common: &Common) -> Result<Self> {
        let cfg = FileConfig::load(common.config.as_deref())?;
        let input = common.input.clone().or_else(|| cfg.input.clone());
        let out = common.output_dir.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
        let seed = common.seed.or(cfg.seed).unwrap_or(0);
        fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        Ok(Self { cfg, input, out, seed })
    }

    fn losses(&self) -> Result<LossData> {
        let Some(path) = &self.input else { usage("--input is required for this command") };
        read_losses_path(path).with_context(|| format!("reading {}", path.display()))
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        let path = self.out.join(name);
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(BufWriter::new(f))
    }

    fn bt(&self, flag: Option<Threshold>) -> Result<Option<Threshold>> {
        match flag {
            Some(t) => Ok(Some(t)),
            None => self.cfg.bt.as_deref().map(|s| s.parse::<Threshold>().map_err(|e| anyhow!("config bt: {e}"))).transpose(),
        }
    }
}

fn file_stem(model: &str) -> String {
    model.chars().filter(|c| c.is_ascii_alphanumeric() || *c == '-' || *c == '_').collect()
}

fn auto_threshold(values: &[f64], opts: &FitOptions) -> Result<f64> {
    let scan = threshold_scan(values, &default_candidates(values), DEFAULT_MIN_TAIL, opts)?;
    let u = scan.selected_row().threshold;
    eprintln!("auto threshold: u = {u} ({} exceedances, AD {:.4})", scan.selected_row().n_tail, scan.selected_row().stats.ad_a2);
    Ok(u)
}

pub fn simulate(common: &Common, paper: bool, n: Option<usize>) -> Result<()> {
    let ctx = Ctx::new(common)?;
    if !paper {
        usage("simulate needs --paper-mixture (the built-in mixture is the only generator)");
    }
    let n = n.or(ctx.cfg.n).unwrap_or(COMPONENT_SIZE);
    if n == 0 {
        usage("n must be at least 1");
    }
    let specs: Vec<_> = paper_mixture().into_iter().map(|mut s| {
        s.n = n;
        s
    }).collect();
    let sample = generate_mixture(&specs, substream_seed(ctx.seed, "sim"))?;
    write_sample_csv(ctx.create("simulated.csv")?, &sample.values, &sample.labels)?;

    println!("{} losses written to {}", sample.len(), ctx.out.join("simulated.csv").display());
    for u in STUDY_THRESHOLDS {
        let ds = extract_exceedances(&sample, u)?;
        let share = 100.0 * ds.values.len() as f64 / sample.len() as f64;
        println!("\ncut at {u} ({} exceedances, {share:.1}% of sample)", ds.values.len());
        println!("{:<14}{:>7}{:>14}{:>14}{:>14}", "source", "count", "min", "mean", "max");
        for s in summarize(&ds.values, &ds.labels) {
            println!("{:<14}{:>7}{:>14.4}{:>14.4}{:>14.4}", s.label, s.count, s.min, s.mean, s.max);
        }
    }
    Ok(())
}

pub fn threshold(common: &Common, candidates: Option<String>, min_tail: Option<usize>, bootstrap: Option<usize>) -> Result<()> {
    let ctx = Ctx::new(common)?;
    let data = ctx.losses()?;
    let candidates = match candidates.or_else(|| ctx.cfg.candidates.clone()) {
        Some(list) => split_list(&list)
            .iter()
            .map(|t| t.parse::<f64>().map_err(|_| anyhow!("bad candidate threshold '{t}'")))
            .collect::<Result<Vec<_>>>()?,
        None => default_candidates(&data.values),
    };
    let min_tail = min_tail.or(ctx.cfg.min_tail).unwrap_or(DEFAULT_MIN_TAIL);
    let opts = FitOptions { compute_se: false, ..FitOptions::default() };
    let scan = threshold_scan(&data.values, &candidates, min_tail, &opts)?;
    write_scan_csv(ctx.create("threshold_scan.csv")?, &scan)?;

    println!("{:>14}{:>8}{:>10}{:>12}{:>10}{:>10}{:>10}", "u", "n_tail", "gpd_c", "gpd_b", "ks", "cvm", "ad");
    for (i, r) in scan.rows.iter().enumerate() {
        println!(
            "{:>14.6}{:>8}{:>10.4}{:>12.4e}{:>10.4}{:>10.4}{:>10.4}{}",
            r.threshold,
            r.n_tail,
            r.gpd_c,
            r.gpd_b,
            r.stats.ks_d,
            r.stats.cvm_w2,
            r.stats.ad_a2,
            if i == scan.selected { "  <- min AD" } else { "" }
        );
    }
    let u = scan.selected_row().threshold;
    println!("selected threshold: {u}");
    if let Some(b) = bootstrap.or(ctx.cfg.bootstrap) {
        let rep = gof_report(&data.values, u, Some(b), substream_seed(ctx.seed, "boot"), &opts)?;
        let p = rep.p_values.expect("bootstrap requested");
        println!("bootstrap p-values (B = {b}): KS {:.4}  CvM {:.4}  AD {:.4}", p.ks, p.cvm, p.ad);
    }
    Ok(())
}

pub struct FitArgs {
    pub families: Option<String>,
    pub kmin: Option<usize>,
    pub kmax: Option<usize>,
    pub alpha: Option<f64>,
    pub bt: Option<Threshold>,
}

fn parse_families(list: &str) -> Result<Vec<KernelFamily>> {
    split_list(list).iter().map(|f| f.parse::<KernelFamily>().map_err(|e| anyhow!("{e}"))).collect()
}

fn fit_json(f: &FitResult) -> serde_json::Value {
    json!({
        "model": f.name(),
        "param_names": f.param_names,
        "params": f.params,
        "se": f.se,
        "t_stats": f.t_stats,
        "log_likelihood": f.log_likelihood,
        "n": f.n,
        "converged": f.converged,
        "grad_norm": f.grad_norm,
    })
}

fn ladder_json(l: &LadderResult) -> serde_json::Value {
    let steps: Vec<_> = l
        .lr_steps
        .iter()
        .enumerate()
        .map(|(i, t)| {
            json!({ "from_k": i, "to_k": i + 1, "statistic": t.statistic, "df": t.df, "critical": t.critical, "reject": t.reject })
        })
        .collect();
    json!({
        "family": l.family.label(),
        "selected_k": l.selected_k,
        "selected_model": l.selected().map(FitResult::name),
        "alpha": l.alpha,
        "lr_table": steps,
        "failure": l.failure,
    })
}

pub fn fit(common: &Common, args: FitArgs) -> Result<()> {
    let ctx = Ctx::new(common)?;
    let data = ctx.losses()?;
    let families = match args.families.or_else(|| ctx.cfg.families.clone()) {
        Some(list) => parse_families(&list)?,
        None => KernelFamily::ALL.to_vec(),
    };
    let kmax = args.kmax.or(ctx.cfg.kmax).unwrap_or(4);
    let kmin = args.kmin.or(ctx.cfg.kmin).unwrap_or(2).max(1);
    let alpha = args.alpha.or(ctx.cfg.alpha).unwrap_or(0.10);
    if !(alpha > 0.0 && alpha < 1.0) {
        usage(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    let opts = FitOptions::default();

    let threshold = match ctx.bt(args.bt)? {
        None => None,
        Some(Threshold::Value(u)) => Some(u),
        Some(Threshold::Auto) => Some(auto_threshold(&data.values, &opts)?),
    };
    let y: Vec<f64> = match threshold {
        Some(u) => data.values.iter().filter(|&&x| x > u).map(|x| x - u).collect(),
        None => data.values.clone(),
    };
    if y.is_empty() {
        bail!("no observations above the threshold");
    }

    let mut kernels = Vec::new();
    let mut ladders = Vec::new();
    let mut failures = Vec::new();
    for &family in &families {
        match strategy_for(ModelKind::Kernel { family }).and_then(|s| s.fit(&y, &opts)) {
            Ok(f) => kernels.push(f),
            Err(e) => failures.push((family.label().to_string(), e.to_string())),
        }
        if family.supports_snp() && kmax >= 1 {
            match fit_ladder(family, &y, kmax, alpha, &opts) {
                Ok(l) => {
                    if let Some(msg) = &l.failure {
                        failures.push((format!("SNP{} ladder", family.snp_tag()), msg.clone()));
                    }
                    ladders.push(l);
                }
                Err(e) => failures.push((format!("SNP{} ladder", family.snp_tag()), e.to_string())),
            }
        }
    }
    let mut fits = kernels;
    for k in kmin..=kmax {
        for l in &ladders {
            if let Some(f) = l.fit_for(k) {
                fits.push(f.clone());
            }
        }
    }

    let rows = comparison_table(&fits, 0.999)?;
    write_comparison_csv(ctx.create("comparison.csv")?, &rows)?;
    for f in &fits {
        let stem = file_stem(&f.name());
        let qq = qq_points(&f.name(), &y, &|p| f.quantile(p))?;
        write_qq_csv(ctx.create(&format!("qq_{stem}.csv"))?, &qq)?;
        let grid = default_tail_grid(&f.fitted, 200)?;
        write_tail_csv(ctx.create(&format!("tail_{stem}.csv"))?, &tail_curve(&|x| f.fitted.sf(x), &grid))?;
    }
    let report = json!({
        "threshold": threshold,
        "n": y.len(),
        "alpha": alpha,
        "models": fits.iter().map(fit_json).collect::<Vec<_>>(),
        "ladders": ladders.iter().map(ladder_json).collect::<Vec<_>>(),
        "failures": failures.iter().map(|(m, e)| json!({ "model": m, "error": e })).collect::<Vec<_>>(),
    });
    let mut w = ctx.create("fits.json")?;
    serde_json::to_writer_pretty(&mut w, &report)?;
    writeln!(w)?;
    w.flush()?;

    println!("{} exceedances{}", y.len(), threshold.map(|u| format!(" over u = {u}")).unwrap_or_default());
    println!("{:<12}{:>16}{:>16}{:>8}{:>11}", "model", "logL", "q999", "params", "converged");
    for r in &rows {
        println!("{:<12}{:>16.4}{:>16.4}{:>8}{:>11}", r.model, r.log_likelihood, r.q999, r.params, r.converged);
    }
    for l in &ladders {
        if let Some(f) = l.selected() {
            println!("SNP{} ladder: LR selects K = {} ({})", l.family.snp_tag(), l.selected_k, f.name());
        }
    }
    for (m, e) in &failures {
        eprintln!("warning: {m}: {e}");
    }
    Ok(())
}

pub struct CapitalArgs {
    pub rt: Option<f64>,
    pub bt: Option<Threshold>,
    pub years: Option<f64>,
    pub iterations: Option<usize>,
    pub models: Option<String>,
    pub lambda_body: Option<f64>,
    pub lambda_tail: Option<f64>,
}

fn placeholder() -> Arc<dyn Severity> {
    Arc::new(PointMass::new(1.0).expect("positive"))
}

pub fn capital(common: &Common, args: CapitalArgs) -> Result<()> {
    let ctx = Ctx::new(common)?;
    let Some(bt) = ctx.bt(args.bt)? else { usage("capital needs --bt (a number or 'auto')") };
    let Some(years) = args.years.or(ctx.cfg.years) else { usage("capital needs --years") };
    if !(years > 0.0 && years.is_finite()) {
        usage(format!("years must be positive, got {years}"));
    }
    let iterations = args.iterations.or(ctx.cfg.iterations).unwrap_or(10_000);
    if iterations < 1000 {
        usage(format!("iterations must be at least 1000, got {iterations}"));
    }
    let data = ctx.losses()?;
    let rt = args.rt.or(ctx.cfg.rt).unwrap_or_else(|| data.values.iter().copied().fold(f64::INFINITY, f64::min));
    let opts = FitOptions::default();
    let bt = match bt {
        Threshold::Value(u) => u,
        Threshold::Auto => {
            let above: Vec<f64> = data.values.iter().copied().filter(|&x| x >= rt).collect();
            auto_threshold(&above, &opts)?
        }
    };
    if !(rt > 0.0 && rt < bt) {
        usage(format!("need 0 < rt < bt, got rt = {rt}, bt = {bt}"));
    }
    let below = data.values.iter().filter(|&&x| x < rt).count();
    if below > 0 {
        log::warn!("{below} losses below the reporting threshold were ignored");
    }
    let body: Vec<f64> = data.values.iter().copied().filter(|&x| x >= rt && x <= bt).collect();
    let tail: Vec<f64> = data.values.iter().filter(|&&x| x > bt).map(|x| x - bt).collect();
    let lambda_body = args.lambda_body.or(ctx.cfg.lambda_body).unwrap_or(body.len() as f64 / years);
    let lambda_tail = args.lambda_tail.or(ctx.cfg.lambda_tail).unwrap_or(tail.len() as f64 / years);
    let freq = FrequencyFit::from_rates(lambda_body, lambda_tail)?;

    // Pieces with zero frequency are never drawn, so they need no fit.
    let body_sev: Arc<dyn Severity> = if lambda_body > 0.0 {
        let bf = fit_body(&body, rt, bt).context("fitting the body")?;
        println!("body: truncated lognormal mu = {:.4}, sigma = {:.4} on {} losses", bf.params.mu, bf.params.sigma, bf.n);
        Arc::new(bf.params)
    } else {
        placeholder()
    };

    let models = split_list(&args.models.or_else(|| ctx.cfg.models.clone()).unwrap_or_else(|| "GPD,SNPLGN3p".into()));
    let registry = ModelRegistry::with_defaults(2..=4);
    let mc_seed = substream_seed(ctx.seed, "mc");
    let total: f64 = data.values.iter().filter(|&&x| x >= rt).sum();
    let largest = data.values.iter().copied().fold(0.0, f64::max);

    let mut w = ctx.create("capital.csv")?;
    writeln!(w, "model,var999,iterations,seed")?;
    let mut failed = Vec::new();
    println!("total loss {total:.4}, largest loss {largest:.4}, {} body / {} tail losses over {years} years", body.len(), tail.len());
    println!("{:<12}{:>18}{:>14}", "tail model", "VaR 99.9%", "VaR / total");
    for name in &models {
        let tail_sev: Result<Arc<dyn Severity>> = if lambda_tail > 0.0 {
            registry
                .get(name)
                .and_then(|s| s.fit(&tail, &opts))
                .map(|f| Arc::new(f.fitted) as Arc<dyn Severity>)
                .map_err(|e| anyhow!("{e}"))
        } else {
            Ok(placeholder())
        };
        let res = tail_sev.and_then(|t| {
            let sev = SplicedSeverity::from_parts(Arc::clone(&body_sev), t, bt)?;
            Ok(simulate_aggregate(&sev, &freq, iterations, mc_seed, false)?)
        });
        match res {
            Ok(r) => {
                writeln!(w, "{name},{},{iterations},{}", r.var_999, ctx.seed)?;
                println!("{name:<12}{:>18.4}{:>14.3}", r.var_999, r.var_999 / total);
            }
            Err(e) => {
                eprintln!("error: {name}: {e:#}");
                failed.push(name.clone());
            }
        }
    }
    w.flush()?;
    if !failed.is_empty() {
        bail!("no capital figure for {}", failed.join(", "));
    }
    Ok(())
}
