use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use synergy::analytics::write_scatter_csv;
use synergy::{
    case_study, correctness, generate, load_pool, planted_best_team, scatter_many,
    select_and_evaluate, write_pool, CorrelationReport, EnsembleTeam, Error, Pool, SynthSpec,
};

use crate::settings::{self, required, DEFAULT_TOPK};
use crate::{CommonArgs, Failure, InspectArgs, SimArgs};

fn load(common: &CommonArgs) -> Result<Pool, Failure> {
    let path = required(&common.pool, "--pool")?;
    let pool: Pool = load_pool(path).with_context(|| format!("loading pool {}", path.display()))?;
    eprintln!(
        "loaded {}: {} models, {} samples, {} classes",
        path.display(),
        pool.n_models(),
        pool.n_samples(),
        pool.n_classes()
    );
    Ok(pool)
}

fn out_dir(common: &CommonArgs) -> Result<PathBuf, Failure> {
    let dir = required(&common.out, "--out")?.clone();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn to_json_bytes<S: serde::Serialize>(value: &S) -> Result<Vec<u8>, Failure> {
    let mut bytes = serde_json::to_vec_pretty(value).context("serializing JSON")?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn build_spec(common: &CommonArgs, sim: &SimArgs) -> Result<SynthSpec, Failure> {
    let mut spec = match &sim.spec {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("cannot read spec {}: {e}", path.display())))?;
            serde_json::from_str::<SynthSpec>(&text)
                .map_err(|e| Failure::usage(format!("invalid spec {}: {e}", path.display())))?
        }
        None => {
            let models = sim.models.unwrap_or(10);
            SynthSpec::archetypes(
                models,
                sim.samples.unwrap_or(5000),
                sim.classes.unwrap_or(15),
                sim.groups.unwrap_or(3.min(models.max(1))),
                (sim.acc_min.unwrap_or(0.85), sim.acc_max.unwrap_or(0.95)),
                sim.rho.unwrap_or(0.8),
                sim.complement.unwrap_or(0.7),
                sim.peak_mass.unwrap_or(0.6),
                0,
            )
        }
    };
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    spec.validate().map_err(Failure::usage)?;
    Ok(spec)
}

pub fn simulate(mut common: CommonArgs, mut sim: SimArgs) -> Result<(), Failure> {
    settings::apply_config(&mut common, Some(&mut sim), None)?;
    let spec = build_spec(&common, &sim)?;
    let dir = out_dir(&common)?;
    let pool: Pool = generate(&spec).context("generating pool")?;
    let manifest = write_pool(&pool, &dir).context("writing pool")?;
    eprintln!("wrote {} models to {}", pool.n_models(), dir.display());
    let planted = planted_best_team(&spec)
        .map(|t| t.key().to_string())
        .unwrap_or_else(|_| "-".into());
    println!("manifest    {}", manifest.display());
    println!("fingerprint {}", pool.fingerprint());
    println!("planted     {planted}");
    Ok(())
}

pub fn evaluate(mut common: CommonArgs) -> Result<(), Failure> {
    settings::apply_config(&mut common, None, None)?;
    let metrics = settings::metrics(&common)?;
    let cfg = settings::eval_config(&common)?;
    let method = settings::consensus(&common)?;
    let corr = settings::correlation(&common)?;
    let pool = load(&common)?;
    let dir = out_dir(&common)?;
    let bounds = settings::bounds(&common, pool.n_models());
    let cm = correctness(&pool);

    let scatter =
        scatter_many(&pool, &cm, &metrics, &cfg, method, bounds).context("scoring teams")?;
    let teams = scatter.metrics.values().next().map_or(0, Vec::len);
    if teams == 0 {
        return Err(Failure::Runtime(anyhow::anyhow!(
            "no candidate teams for sizes {}..{}",
            bounds.min,
            bounds.max
        )));
    }
    for (metric, rows) in &scatter.metrics {
        let mut buf = Vec::new();
        write_scatter_csv(rows, &mut buf).context("formatting scatter CSV")?;
        write_file(&dir.join(format!("scatter_{metric}.csv")), &buf)?;
    }

    let report = CorrelationReport::from_scatter(&scatter, corr);
    let doc = serde_json::json!({
        "method": corr.to_string(),
        "consensus": method.to_string(),
        "scope": cfg.scope,
        "teams": teams,
        "coefficients": report.to_json(),
    });
    write_file(&dir.join("correlation.json"), &to_json_bytes(&doc)?)?;

    println!("{corr} correlation with {method} accuracy over {teams} teams");
    for metric in &metrics {
        match report.get(*metric) {
            Some(r) => println!("  {metric:<3} {r:>8.4}"),
            None => println!("  {metric:<3} undefined"),
        }
    }
    Ok(())
}

pub fn select(mut common: CommonArgs) -> Result<(), Failure> {
    settings::apply_config(&mut common, None, None)?;
    let metric = match (&common.metric, &common.metrics) {
        (Some(m), _) => settings::parse_metric(m)?,
        (None, Some(_)) => settings::metrics(&common)?[0],
        (None, None) => synergy::Metric::Sq,
    };
    let topk = common.topk.unwrap_or(DEFAULT_TOPK);
    if topk == 0 {
        return Err(Failure::usage("--topk must be positive"));
    }
    let cfg = settings::eval_config(&common)?;
    let method = settings::consensus(&common)?;
    let pool = load(&common)?;
    let bounds = settings::bounds(&common, pool.n_models());
    let cm = correctness(&pool);

    let report = select_and_evaluate(&pool, &cm, metric, &cfg, topk, method, bounds)
        .with_context(|| format!("selecting teams by {metric}"))?;
    if report.candidates == 0 {
        return Err(Failure::Runtime(anyhow::anyhow!(
            "no candidate teams for sizes {}..{}",
            bounds.min,
            bounds.max
        )));
    }
    eprintln!("ranked {} candidate teams by {metric}", report.candidates);
    let mut buf = Vec::new();
    report
        .write_csv(&mut buf)
        .context("formatting selection CSV")?;
    match &common.out {
        Some(_) => {
            let dir = out_dir(&common)?;
            write_file(&dir.join(format!("select_{metric}.csv")), &buf)?;
            if let Some(top) = report.rows.first() {
                println!(
                    "top {metric} team {}: score {:.4}, {method} accuracy {:.4} (best member {:.4})",
                    top.team, top.score, top.ensemble_acc, top.best_single_acc
                );
            }
        }
        None => std::io::stdout()
            .write_all(&buf)
            .context("writing to stdout")?,
    }
    Ok(())
}

fn file_safe(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-_.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn inspect(mut common: CommonArgs, mut args: InspectArgs) -> Result<(), Failure> {
    settings::apply_config(&mut common, None, Some(&mut args))?;
    let key = required(&args.team, "--team")?.clone();
    let sample = required(&args.sample, "--sample")?.clone();
    let method = settings::consensus(&common)?;
    let pool = load(&common)?;
    let team = EnsembleTeam::parse(&key, pool.n_models()).map_err(Failure::usage)?;
    let study = case_study(&pool, &team, &sample, method).map_err(|e| match e {
        Error::UnknownSample(_) | Error::UnknownModel { .. } => Failure::usage(e),
        other => Failure::Runtime(other.into()),
    })?;
    let bytes = to_json_bytes(&study)?;
    match &common.out {
        Some(_) => {
            let dir = out_dir(&common)?;
            let name = format!("case_{}_{}.json", file_safe(team.key()), file_safe(&sample));
            write_file(&dir.join(name), &bytes)?;
            println!(
                "team {} on {}: {} (truth {})",
                team, sample, study.consensus_label, study.truth
            );
        }
        None => std::io::stdout()
            .write_all(&bytes)
            .context("writing to stdout")?,
    }
    Ok(())
}
