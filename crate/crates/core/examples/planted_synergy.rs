//! Scores every team of planted-structure pools with each metric and prints
//! the diversity/accuracy correlations and top-1 selections per seed.
//!
//! cargo run --release -p synergy-core --example planted_synergy [seeds] [peak_mass]

use synergy::{
    correctness, generate, scatter_many, selection::evaluate_team, ConsensusMethod,
    CorrelationMethod, CorrelationReport, EvalConfig, Metric, SizeBounds, SynthSpec,
};

fn main() -> synergy::Result<()> {
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().map(|s| s.parse().unwrap()).unwrap_or(20);
    let peak: f64 = args.next().map(|s| s.parse().unwrap()).unwrap_or(0.6);
    let metrics = [Metric::Ck, Metric::Bd, Metric::Gd, Metric::Kw, Metric::Sq];
    let cfg = EvalConfig::<f64>::default();
    println!("seed    ck      bd      gd      kw      sq   | sq_top  acc    best   ck_top acc");
    for seed in 0..seeds {
        let spec = SynthSpec::archetypes(10, 5000, 15, 3, (0.85, 0.95), 0.8, 0.7, peak, seed);
        let pool = generate::<f64>(&spec)?;
        let cm = correctness(&pool);
        let scatter = scatter_many(
            &pool,
            &cm,
            &metrics,
            &cfg,
            ConsensusMethod::SoftVoting,
            SizeBounds::full(10),
        )?;
        let corr = CorrelationReport::from_scatter(&scatter, CorrelationMethod::Pearson);
        let top = |m: Metric| {
            let rows: Vec<_> = scatter.metrics[&m]
                .iter()
                .map(|r| (r.team.clone(), r.score))
                .collect();
            synergy::rank_teams(&rows, m, 1).remove(0).team
        };
        let (sq_t, ck_t) = (top(Metric::Sq), top(Metric::Ck));
        let (sq_acc, sq_best) = evaluate_team(&pool, &cm, &sq_t, ConsensusMethod::SoftVoting)?;
        let (ck_acc, _) = evaluate_team(&pool, &cm, &ck_t, ConsensusMethod::SoftVoting)?;
        print!("{seed:>4}");
        for m in metrics {
            print!(" {:>7.3}", corr.get(m).unwrap_or(f64::NAN));
        }
        println!(
            " | {:>6} {:.4} {:.4} {:>6} {:.4}",
            sq_t.key(),
            sq_acc,
            sq_best,
            ck_t.key(),
            ck_acc
        );
    }
    Ok(())
}
