//! Merging `--config` files with command-line flags and resolving defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use synergy::{ConsensusMethod, CorrelationMethod, EvalConfig, Metric, SizeBounds, SubsetScope};

use crate::{CommonArgs, Failure, InspectArgs, SimArgs};

pub const DEFAULT_TOPK: usize = 10;

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum MetricList {
    Text(String),
    List(Vec<String>),
}

/// Any flag, keyed by its long name without the dashes.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct ConfigFile {
    pool: Option<PathBuf>,
    seed: Option<u64>,
    metrics: Option<MetricList>,
    metric: Option<String>,
    consensus: Option<String>,
    neg_cap: Option<usize>,
    w_epsilon: Option<f64>,
    w_alpha: Option<f64>,
    min_size: Option<usize>,
    max_size: Option<usize>,
    topk: Option<usize>,
    out: Option<PathBuf>,
    full_set: Option<bool>,
    correlation: Option<String>,
    models: Option<usize>,
    samples: Option<usize>,
    classes: Option<usize>,
    groups: Option<usize>,
    rho: Option<f64>,
    complement: Option<f64>,
    peak_mass: Option<f64>,
    acc_min: Option<f64>,
    acc_max: Option<f64>,
    spec: Option<PathBuf>,
    team: Option<String>,
    sample: Option<String>,
}

macro_rules! fill {
    ($dst:expr, $src:expr, $($field:ident),+) => {
        $( if $dst.$field.is_none() { $dst.$field = $src.$field.take(); } )+
    };
}

fn read_config(path: &Path) -> Result<ConfigFile, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("invalid config {}: {e}", path.display())))
}

/// Fills every flag not given on the command line from `--config`.
pub fn apply_config(
    common: &mut CommonArgs,
    sim: Option<&mut SimArgs>,
    inspect: Option<&mut InspectArgs>,
) -> Result<(), Failure> {
    let Some(path) = common.config.clone() else {
        return Ok(());
    };
    let mut cfg = read_config(&path)?;
    fill!(
        common,
        cfg,
        pool,
        seed,
        metric,
        consensus,
        neg_cap,
        w_epsilon,
        w_alpha,
        min_size,
        max_size,
        topk,
        out,
        correlation
    );
    if common.metrics.is_none() {
        common.metrics = cfg.metrics.take().map(|m| match m {
            MetricList::Text(s) => s,
            MetricList::List(v) => v.join(","),
        });
    }
    if !common.full_set {
        common.full_set = cfg.full_set.unwrap_or(false);
    }
    if let Some(sim) = sim {
        fill!(
            sim, cfg, models, samples, classes, groups, rho, complement, peak_mass, acc_min,
            acc_max, spec
        );
    }
    if let Some(inspect) = inspect {
        fill!(inspect, cfg, team, sample);
    }
    Ok(())
}

pub fn parse_metric(s: &str) -> Result<Metric, Failure> {
    s.trim().parse::<Metric>().map_err(Failure::usage)
}

/// Requested metrics in the order given, duplicates dropped; all six by default.
pub fn metrics(common: &CommonArgs) -> Result<Vec<Metric>, Failure> {
    let Some(list) = &common.metrics else {
        return Ok(Metric::ALL.to_vec());
    };
    let mut out = Vec::new();
    for part in list.split(',').filter(|s| !s.trim().is_empty()) {
        let m = parse_metric(part)?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(Failure::usage("--metrics names no metric"));
    }
    Ok(out)
}

pub fn consensus(common: &CommonArgs) -> Result<ConsensusMethod, Failure> {
    common
        .consensus
        .as_deref()
        .map_or(Ok(ConsensusMethod::SoftVoting), |s| {
            s.parse().map_err(Failure::usage)
        })
}

pub fn correlation(common: &CommonArgs) -> Result<CorrelationMethod, Failure> {
    common
        .correlation
        .as_deref()
        .map_or(Ok(CorrelationMethod::Pearson), |s| {
            s.parse().map_err(Failure::usage)
        })
}

pub fn eval_config(common: &CommonArgs) -> Result<EvalConfig<f64>, Failure> {
    let mut cfg = EvalConfig {
        scope: if common.full_set {
            SubsetScope::FullSet
        } else {
            SubsetScope::Negatives
        },
        ..EvalConfig::default()
    }
    .with_sampling(common.neg_cap, common.seed.unwrap_or(0));
    if common.neg_cap == Some(0) {
        return Err(Failure::usage("--neg-cap must be positive"));
    }
    for (name, w) in [
        ("--w-epsilon", common.w_epsilon),
        ("--w-alpha", common.w_alpha),
    ] {
        if w.is_some_and(|w| !w.is_finite()) {
            return Err(Failure::usage(format!("{name} must be a finite number")));
        }
    }
    cfg.sq.w_epsilon = common.w_epsilon.unwrap_or(1.0);
    cfg.sq.w_alpha = common.w_alpha.unwrap_or(1.0);
    Ok(cfg)
}

pub fn bounds(common: &CommonArgs, pool_size: usize) -> SizeBounds {
    let full = SizeBounds::full(pool_size);
    SizeBounds {
        min: common.min_size.unwrap_or(full.min),
        max: common.max_size.unwrap_or(full.max),
    }
}

pub fn required<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T, Failure> {
    value
        .as_ref()
        .ok_or_else(|| Failure::usage(format!("{flag} is required")))
}
