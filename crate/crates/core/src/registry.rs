//! Fitting strategies looked up by name.
//!
//! Every fittable model (a plain kernel or an SNP ladder rung) is a
//! [`ModelStrategy`]; the registry maps names such as `GPD`, `SNPLGN3p` or
//! `snp-lognormal:3` to one.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::estimate::{fit_kernel_mle, fit_snp_mle, FitOptions, FitResult, ModelKind};
use crate::kernels::KernelFamily;

pub trait ModelStrategy: Send + Sync + fmt::Debug {
    fn kind(&self) -> ModelKind;

    fn name(&self) -> String {
        self.kind().name()
    }

    fn fit(&self, data: &[f64], opts: &FitOptions) -> Result<FitResult>;
}

#[derive(Debug)]
struct KernelStrategy(KernelFamily);

impl ModelStrategy for KernelStrategy {
    fn kind(&self) -> ModelKind {
        ModelKind::Kernel { family: self.0 }
    }
    fn fit(&self, data: &[f64], opts: &FitOptions) -> Result<FitResult> {
        fit_kernel_mle(self.0, data, opts)
    }
}

#[derive(Debug)]
struct SnpStrategy {
    family: KernelFamily,
    k: usize,
}

impl ModelStrategy for SnpStrategy {
    fn kind(&self) -> ModelKind {
        ModelKind::Snp { family: self.family, k: self.k }
    }
    fn fit(&self, data: &[f64], opts: &FitOptions) -> Result<FitResult> {
        fit_snp_mle(self.family, self.k, data, opts)
    }
}

/// Builds the strategy for a model kind.
pub fn strategy_for(kind: ModelKind) -> Result<Arc<dyn ModelStrategy>> {
    match kind {
        ModelKind::Kernel { family } => Ok(Arc::new(KernelStrategy(family))),
        ModelKind::Snp { family, k } => {
            if !family.supports_snp() {
                return Err(Error::InvalidParameter(format!("{family} has no SNP form")));
            }
            Ok(Arc::new(SnpStrategy { family, k }))
        }
    }
}

/// Parses `gpd`, `LogLGT`, `SNPLGN3p`, `snp-lognormal:3` or `snp-lgn-3`.
pub fn parse_model(name: &str) -> Result<ModelKind> {
    let t = name.trim();
    let lower = t.to_ascii_lowercase();
    if let Some(rest) = lower.strip_prefix("snp-").or_else(|| lower.strip_prefix("snp_")) {
        let (fam, k) = rest
            .rsplit_once([':', '-', '_'])
            .ok_or_else(|| Error::InvalidParameter(format!("'{t}': expected snp-<kernel>:<K>")))?;
        let k = k.parse().map_err(|_| Error::InvalidParameter(format!("'{t}': bad truncation point")))?;
        let family: KernelFamily = fam.parse()?;
        return strategy_for(ModelKind::Snp { family, k }).map(|s| s.kind());
    }
    if let Some(rest) = lower.strip_prefix("snp") {
        if let Some(body) = rest.strip_suffix('p') {
            let split = body.find(|c: char| c.is_ascii_digit()).unwrap_or(body.len());
            let (fam, k) = body.split_at(split);
            if let (Ok(family), Ok(k)) = (fam.parse::<KernelFamily>(), k.parse::<usize>()) {
                return strategy_for(ModelKind::Snp { family, k }).map(|s| s.kind());
            }
        }
        return Err(Error::InvalidParameter(format!("'{t}': expected SNP<KERNEL><K>p")));
    }
    Ok(ModelKind::Kernel { family: t.parse()? })
}

/// Name-keyed set of strategies.
#[derive(Debug, Default, Clone)]
pub struct ModelRegistry {
    entries: BTreeMap<String, Arc<dyn ModelStrategy>>,
    order: Vec<String>,
}

impl ModelRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// The six kernels plus every SNP kernel for K in `k_range`.
    pub fn with_defaults(k_range: std::ops::RangeInclusive<usize>) -> Self {
        let mut reg = Self::new();
        for kind in roster(k_range) {
            reg.register(strategy_for(kind).expect("roster kinds are valid"));
        }
        reg
    }

    pub fn register(&mut self, s: Arc<dyn ModelStrategy>) {
        let key = s.name().to_ascii_lowercase();
        if !self.entries.contains_key(&key) {
            self.order.push(key.clone());
        }
        self.entries.insert(key, s);
    }

    /// Registered strategy by exact name, or one built from a parseable name.
    pub fn get(&self, name: &str) -> Result<Arc<dyn ModelStrategy>> {
        if let Some(s) = self.entries.get(&name.trim().to_ascii_lowercase()) {
            return Ok(Arc::clone(s));
        }
        let kind = parse_model(name)?;
        match self.entries.get(&kind.name().to_ascii_lowercase()) {
            Some(s) => Ok(Arc::clone(s)),
            None => strategy_for(kind),
        }
    }

    pub fn names(&self) -> Vec<String> {
        self.order.iter().map(|k| self.entries[k].name()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Comparison roster: all kernels, then SNP models by K then kernel.
pub fn roster(k_range: std::ops::RangeInclusive<usize>) -> Vec<ModelKind> {
    let mut out: Vec<ModelKind> = KernelFamily::ALL.iter().map(|&family| ModelKind::Kernel { family }).collect();
    for k in k_range {
        for family in KernelFamily::SNP {
            out.push(ModelKind::Snp { family, k });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_parse_in_all_spellings() {
        let want = ModelKind::Snp { family: KernelFamily::Lognormal, k: 3 };
        assert_eq!(parse_model("SNPLGN3p").unwrap(), want);
        assert_eq!(parse_model("snp-lognormal:3").unwrap(), want);
        assert_eq!(parse_model("snp-lgn-3").unwrap(), want);
        assert_eq!(parse_model("SNPLGT2p").unwrap(), ModelKind::Snp { family: KernelFamily::LogLogistic, k: 2 });
        assert_eq!(parse_model("pareto").unwrap(), ModelKind::Kernel { family: KernelFamily::Gpd });
        assert!(parse_model("SNPGB22p").is_err());
        assert!(parse_model("snp-gpd:x").is_err());
        assert!(parse_model("normal").is_err());
    }

    #[test]
    fn default_roster_has_21_rows() {
        let reg = ModelRegistry::with_defaults(2..=4);
        assert_eq!(reg.len(), 21);
        assert_eq!(reg.names()[0], "GPD");
        assert_eq!(reg.names()[6], "SNPGPD2p");
        assert_eq!(reg.get("snp-exp:4").unwrap().name(), "SNPEXP4p");
        assert_eq!(reg.get("SNPWBL7p").unwrap().name(), "SNPWBL7p");
    }
}
