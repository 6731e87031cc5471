//! Test-only reference implementations and fuzzed pools.
//!
//! The `naive_*` functions work from plain `Vec`s with per-sample loops and
//! floating point fractions and share no code with the library beyond pool
//! construction. `compare_pool` checks the library against them.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use synergy::{
    binary_disagreement, cohen_kappa_diversity, consensus, correctness, generalized_diversity,
    kohavi_wolpert, negative_samples, q_statistic, sq_alpha, sq_epsilon, sq_score, AlphaMode,
    ConsensusMethod, EnsembleTeam, ModelRecord, NegativeMode, PredictionPool, SqConfig,
};

/// A pool plus the plain-vector views the reference code works on.
pub struct Fuzzed {
    pub pool: PredictionPool<f64>,
    /// `probs[model][sample][class]`
    pub probs: Vec<Vec<Vec<f64>>>,
    pub truth: Vec<usize>,
}

/// Random pool with `m` models, `n` samples and `c` classes. Roughly half the
/// rows are built from small integer weights so that argmax and vote ties
/// occur; per-model accuracies vary so negatives sets vary in size.
pub fn fuzz_pool(rng: &mut ChaCha8Rng, m: usize, n: usize, c: usize) -> Fuzzed {
    let truth: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c)).collect();
    let mut flat = Vec::with_capacity(m * n * c);
    for _ in 0..m {
        let skill: f64 = rng.gen_range(0.2..1.0);
        let quantized = rng.gen_bool(0.5);
        for &t in &truth {
            let mut w: Vec<f64> = (0..c)
                .map(|_| {
                    if quantized {
                        rng.gen_range(0..4) as f64
                    } else {
                        rng.gen::<f64>()
                    }
                })
                .collect();
            if rng.gen_bool(skill) {
                w[t] += if quantized { 2.0 } else { 1.0 };
            }
            if w.iter().all(|&x| x == 0.0) {
                w[0] = 1.0;
            }
            let s: f64 = w.iter().sum();
            flat.extend(w.iter().map(|x| x / s));
        }
    }
    let pool = PredictionPool::new(
        (0..m)
            .map(|i| ModelRecord {
                model_id: i,
                name: format!("f{i}"),
                predictions_path: Default::default(),
            })
            .collect(),
        (0..c).map(|k| format!("k{k}")).collect(),
        (0..n).map(|j| format!("x{j}")).collect(),
        truth.clone(),
        flat,
    )
    .expect("fuzzed pool is valid");
    let probs = (0..m)
        .map(|i| (0..n).map(|j| pool.row(i, j).to_vec()).collect())
        .collect();
    Fuzzed { pool, probs, truth }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn naive_argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for k in 0..row.len() {
        if row[k] > row[best] {
            best = k;
        }
    }
    best
}

pub fn naive_labels(probs: &[Vec<Vec<f64>>]) -> Vec<Vec<usize>> {
    probs
        .iter()
        .map(|rows| rows.iter().map(|r| naive_argmax(r)).collect())
        .collect()
}

pub fn naive_correct(probs: &[Vec<Vec<f64>>], truth: &[usize]) -> Vec<Vec<bool>> {
    naive_labels(probs)
        .into_iter()
        .map(|labels| labels.iter().zip(truth).map(|(l, t)| l == t).collect())
        .collect()
}

/// Samples where at least one member is wrong.
pub fn naive_any_wrong(correct: &[Vec<bool>], team: &[usize]) -> Vec<usize> {
    (0..correct[0].len())
        .filter(|&j| team.iter().any(|&m| !correct[m][j]))
        .collect()
}

pub fn naive_focal_wrong(correct: &[Vec<bool>], focal: usize) -> Vec<usize> {
    (0..correct[0].len())
        .filter(|&j| !correct[focal][j])
        .collect()
}

/// (n11, n10, n01, n00)
pub fn naive_table(a: &[bool], b: &[bool], subset: &[usize]) -> (f64, f64, f64, f64) {
    let mut t = (0.0, 0.0, 0.0, 0.0);
    for &j in subset {
        match (a[j], b[j]) {
            (true, true) => t.0 += 1.0,
            (true, false) => t.1 += 1.0,
            (false, true) => t.2 += 1.0,
            (false, false) => t.3 += 1.0,
        }
    }
    t
}

fn pairs(team: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..team.len() {
        for k in i + 1..team.len() {
            out.push((team[i], team[k]));
        }
    }
    out
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn naive_ck_diversity(correct: &[Vec<bool>], team: &[usize], subset: &[usize]) -> f64 {
    let per: Vec<f64> = pairs(team)
        .into_iter()
        .map(|(a, b)| {
            let (n11, n10, n01, n00) = naive_table(&correct[a], &correct[b], subset);
            let den = (n11 + n10) * (n10 + n00) + (n11 + n01) * (n01 + n00);
            let kappa = if den == 0.0 {
                1.0
            } else {
                2.0 * (n11 * n00 - n01 * n10) / den
            };
            1.0 - kappa
        })
        .collect();
    mean(&per)
}

pub fn naive_qs(correct: &[Vec<bool>], team: &[usize], subset: &[usize]) -> f64 {
    let per: Vec<f64> = pairs(team)
        .into_iter()
        .map(|(a, b)| {
            let (n11, n10, n01, n00) = naive_table(&correct[a], &correct[b], subset);
            let den = n11 * n00 + n01 * n10;
            if den == 0.0 {
                if n01 + n10 == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (n11 * n00 - n01 * n10) / den
            }
        })
        .collect();
    mean(&per)
}

pub fn naive_bd(correct: &[Vec<bool>], team: &[usize], subset: &[usize]) -> f64 {
    let per: Vec<f64> = pairs(team)
        .into_iter()
        .map(|(a, b)| {
            let differ = subset
                .iter()
                .filter(|&&j| correct[a][j] != correct[b][j])
                .count();
            differ as f64 / subset.len() as f64
        })
        .collect();
    mean(&per)
}

/// Partridge-Krzanowski, written through the failure-count distribution p_i.
pub fn naive_gd(correct: &[Vec<bool>], team: &[usize], subset: &[usize]) -> f64 {
    let s = team.len();
    let mut p = vec![0.0; s + 1];
    for &j in subset {
        let fails = team.iter().filter(|&&m| !correct[m][j]).count();
        p[fails] += 1.0 / subset.len() as f64;
    }
    let sf = s as f64;
    let p1: f64 = (0..=s).map(|i| i as f64 / sf * p[i]).sum();
    let p2: f64 = (0..=s)
        .map(|i| (i as f64 * (i as f64 - 1.0)) / (sf * (sf - 1.0)) * p[i])
        .sum();
    if p1 == 0.0 {
        0.0
    } else {
        1.0 - p2 / p1
    }
}

pub fn naive_kw(correct: &[Vec<bool>], team: &[usize], subset: &[usize]) -> f64 {
    let s = team.len() as f64;
    let mut total = 0.0;
    for &j in subset {
        let l = team.iter().filter(|&&m| correct[m][j]).count() as f64;
        total += l * (s - l);
    }
    total / (subset.len() as f64 * s * s)
}

pub fn naive_sq_epsilon(correct: &[Vec<bool>], team: &[usize], focal: usize) -> Option<f64> {
    let neg = naive_focal_wrong(correct, focal);
    if neg.is_empty() {
        return None;
    }
    let per: Vec<f64> = team
        .iter()
        .filter(|&&m| m != focal)
        .map(|&m| {
            let differ = neg
                .iter()
                .filter(|&&j| correct[m][j] != correct[focal][j])
                .count();
            differ as f64 / neg.len() as f64
        })
        .collect();
    Some(mean(&per))
}

pub fn naive_label_kappa(a: &[usize], b: &[usize], subset: &[usize]) -> f64 {
    let n = subset.len() as f64;
    let classes = subset
        .iter()
        .map(|&j| a[j].max(b[j]) + 1)
        .max()
        .unwrap_or(1);
    let mut ma = vec![0.0; classes];
    let mut mb = vec![0.0; classes];
    let mut agree = 0.0;
    for &j in subset {
        ma[a[j]] += 1.0 / n;
        mb[b[j]] += 1.0 / n;
        if a[j] == b[j] {
            agree += 1.0 / n;
        }
    }
    let pe: f64 = ma.iter().zip(&mb).map(|(x, y)| x * y).sum();
    let single_class = subset
        .iter()
        .all(|&j| a[j] == a[subset[0]] && b[j] == a[subset[0]]);
    if single_class {
        return 1.0;
    }
    if (1.0 - pe).abs() < 1e-15 {
        return if (agree - 1.0).abs() < 1e-15 {
            1.0
        } else {
            0.0
        };
    }
    (agree - pe) / (1.0 - pe)
}

pub fn naive_sq_alpha(
    correct: &[Vec<bool>],
    labels: &[Vec<usize>],
    team: &[usize],
    focal: usize,
) -> Option<f64> {
    let neg = naive_focal_wrong(correct, focal);
    if neg.is_empty() {
        return None;
    }
    let others: Vec<usize> = team.iter().copied().filter(|&m| m != focal).collect();
    if others.len() < 2 {
        return Some(0.0);
    }
    let per: Vec<f64> = pairs(&others)
        .into_iter()
        .map(|(a, b)| naive_label_kappa(&labels[a], &labels[b], &neg))
        .collect();
    Some(mean(&per))
}

/// (aggregate, all focals skipped)
pub fn naive_sq(
    correct: &[Vec<bool>],
    labels: &[Vec<usize>],
    team: &[usize],
    w_eps: f64,
    w_alpha: f64,
) -> (f64, bool) {
    let combined: Vec<f64> = team
        .iter()
        .filter_map(|&f| {
            let e = naive_sq_epsilon(correct, team, f)?;
            let a = naive_sq_alpha(correct, labels, team, f)?;
            Some(w_eps * e + w_alpha * a)
        })
        .collect();
    if combined.is_empty() {
        (0.0, true)
    } else {
        (mean(&combined), false)
    }
}

/// Values this close to the maximum are ties, resolved to the lowest index.
pub const NAIVE_TIE: f64 = 64.0 * f64::EPSILON;

pub fn naive_first_near_max(xs: &[f64]) -> usize {
    let mut max = f64::NEG_INFINITY;
    for &x in xs {
        if x > max {
            max = x;
        }
    }
    let mut k = 0;
    while xs[k] < max - NAIVE_TIE {
        k += 1;
    }
    k
}

pub fn naive_soft_vote(probs: &[Vec<Vec<f64>>], team: &[usize], sample: usize) -> usize {
    let c = probs[0][0].len();
    let mut avg = vec![0.0; c];
    for &m in team {
        for k in 0..c {
            avg[k] += probs[m][sample][k];
        }
    }
    for a in avg.iter_mut() {
        *a /= team.len() as f64;
    }
    naive_first_near_max(&avg)
}

pub fn naive_majority_vote(probs: &[Vec<Vec<f64>>], team: &[usize], sample: usize) -> usize {
    let c = probs[0][0].len();
    let mut votes = vec![0; c];
    let mut mass = vec![0.0; c];
    for &m in team {
        votes[naive_argmax(&probs[m][sample])] += 1;
        for k in 0..c {
            mass[k] += probs[m][sample][k];
        }
    }
    let top = *votes.iter().max().unwrap();
    let tied: Vec<usize> = (0..c).filter(|&k| votes[k] == top).collect();
    let tied_mass: Vec<f64> = tied.iter().map(|&k| mass[k]).collect();
    tied[naive_first_near_max(&tied_mass)]
}

pub fn naive_accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    pred.iter().zip(truth).filter(|(p, t)| p == t).count() as f64 / truth.len() as f64
}

/// Every subset of `0..m` with at least two members, as sorted id lists.
pub fn all_teams(m: usize) -> Vec<Vec<usize>> {
    (0u32..1 << m)
        .filter(|mask| mask.count_ones() >= 2)
        .map(|mask| (0..m).filter(|i| mask >> i & 1 == 1).collect())
        .collect()
}

pub fn naive_pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (sx, sy): (f64, f64) = (xs.iter().sum(), ys.iter().sum());
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let syy: f64 = ys.iter().map(|y| y * y).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

fn close(what: &str, team: &EnsembleTeam, got: f64, want: f64, tol: f64) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!(
            "{what} on team {team}: library {got} vs reference {want}"
        ))
    }
}

/// Every diversity measure, the SQ components and both consensus rules, on
/// every team of the pool, against the reference. Returns the number of
/// values compared.
pub fn compare_pool(f: &Fuzzed, tol: f64) -> Result<usize, String> {
    let m = f.pool.n_models();
    let cm = correctness(&f.pool);
    let correct = naive_correct(&f.probs, &f.truth);
    let labels = naive_labels(&f.probs);
    for (i, row) in correct.iter().enumerate() {
        for (j, &ok) in row.iter().enumerate() {
            if cm.is_correct(i, j) != ok {
                return Err(format!("correctness differs at model {i}, sample {j}"));
            }
        }
    }
    let mut checked = 0;
    for ids in all_teams(m) {
        let team = EnsembleTeam::new(ids.clone(), m).map_err(|e| e.to_string())?;

        let neg = negative_samples(&cm, &team, NegativeMode::AnyMemberErrs, 0, None)
            .map_err(|e| e.to_string())?;
        let want_neg = naive_any_wrong(&correct, &ids);
        if neg.indices() != want_neg.as_slice() {
            return Err(format!("negative set differs on team {team}"));
        }
        let full =
            negative_samples(&cm, &team, NegativeMode::All, 0, None).map_err(|e| e.to_string())?;
        let all: Vec<usize> = (0..f.truth.len()).collect();
        for (set, subset) in [(&neg, &want_neg), (&full, &all)] {
            let lib = [
                cohen_kappa_diversity::<f64>(&cm, &team, set),
                q_statistic::<f64>(&cm, &team, set),
                binary_disagreement::<f64>(&cm, &team, set),
                generalized_diversity::<f64>(&cm, &team, set),
                kohavi_wolpert::<f64>(&cm, &team, set),
            ];
            if subset.is_empty() {
                if lib.iter().any(|r| r.is_ok()) {
                    return Err(format!("empty subset scored without error on team {team}"));
                }
                continue;
            }
            let want = [
                naive_ck_diversity(&correct, &ids, subset),
                naive_qs(&correct, &ids, subset),
                naive_bd(&correct, &ids, subset),
                naive_gd(&correct, &ids, subset),
                naive_kw(&correct, &ids, subset),
            ];
            for ((name, got), want) in ["ck", "qs", "bd", "gd", "kw"].iter().zip(lib).zip(want) {
                let got = got
                    .map_err(|e| format!("{name} on team {team}: {e}"))?
                    .value;
                close(name, &team, got, want, tol)?;
                checked += 1;
            }
        }

        for &focal in &ids {
            let set = negative_samples(&cm, &team, NegativeMode::FocalErrs(focal), 0, None)
                .map_err(|e| e.to_string())?;
            let eps = sq_epsilon::<f64>(&cm, &team, focal, &set);
            let alpha = sq_alpha::<f64>(&cm, &team, focal, &set, AlphaMode::Labels);
            match (
                naive_sq_epsilon(&correct, &ids, focal),
                naive_sq_alpha(&correct, &labels, &ids, focal),
            ) {
                (Some(e), Some(a)) => {
                    close("sq-epsilon", &team, eps.map_err(|e| e.to_string())?, e, tol)?;
                    close("sq-alpha", &team, alpha.map_err(|e| e.to_string())?, a, tol)?;
                    checked += 2;
                }
                _ => {
                    if eps.is_ok() || alpha.is_ok() {
                        return Err(format!(
                            "focal {focal} without errors scored on team {team}"
                        ));
                    }
                }
            }
        }

        for (we, wa) in [(1.0, 1.0), (0.7, 0.3)] {
            let cfg = SqConfig {
                w_epsilon: we,
                w_alpha: wa,
                ..SqConfig::default()
            };
            let got = sq_score::<f64>(&cm, &team, &cfg).map_err(|e| e.to_string())?;
            let (want, skipped) = naive_sq(&correct, &labels, &ids, we, wa);
            if got.all_skipped != skipped {
                return Err(format!("sq skip flag differs on team {team}"));
            }
            close("sq", &team, got.aggregate, want, tol)?;
            checked += 1;
        }

        for method in [ConsensusMethod::SoftVoting, ConsensusMethod::MajorityVoting] {
            let got = consensus(&f.pool, &team, method);
            let want: Vec<usize> = (0..f.truth.len())
                .map(|j| match method {
                    ConsensusMethod::SoftVoting => naive_soft_vote(&f.probs, &ids, j),
                    ConsensusMethod::MajorityVoting => naive_majority_vote(&f.probs, &ids, j),
                })
                .collect();
            if got.predicted != want {
                return Err(format!("{method} labels differ on team {team}"));
            }
            close(
                &method.to_string(),
                &team,
                got.accuracy,
                naive_accuracy(&want, &f.truth),
                tol,
            )?;
            checked += 1;
        }
    }
    Ok(checked)
}
