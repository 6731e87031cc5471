//! Synthetic prediction pools with planted error structure.
//!
//! Models are partitioned into archetype groups. For every sample each group
//! draws a latent uniform; with probability `complement_strength` the group
//! latents are rotations of one shared uniform, which places the failure
//! regions of different groups side by side instead of on top of each other.
//! Each model copies its group latent with probability `rho` (otherwise it
//! draws its own) and fails when the latent falls below its error rate, so
//! marginal accuracies stay at `base_accuracy` whatever the coupling.
//!
//! A correct model puts `peak_mass` on the truth; a wrong one puts it on a
//! uniformly drawn wrong class. The remaining mass is jittered over the other
//! classes, always staying below the peak.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pool::{ModelRecord, PredictionPool};
use crate::scalar::Scalar;
use crate::team::EnsembleTeam;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_models: usize,
    pub n_samples: usize,
    pub n_classes: usize,
    /// Target accuracy per model, each in (0, 1).
    pub base_accuracy: Vec<f64>,
    /// Partition of `0..n_models` into archetype groups.
    pub groups: Vec<Vec<usize>>,
    /// Within-group error coupling in [0, 1].
    pub rho: f64,
    /// Cross-group complementarity in [0, 1].
    pub complement_strength: f64,
    /// Probability mass on the emitted label, in (1/C, 1].
    pub peak_mass: f64,
    pub seed: u64,
}

impl SynthSpec {
    /// `n_groups` groups assigned round-robin (model `i` joins group
    /// `i % n_groups`), accuracies evenly spaced over `[acc_lo, acc_hi]`.
    #[allow(clippy::too_many_arguments)]
    pub fn archetypes(
        n_models: usize,
        n_samples: usize,
        n_classes: usize,
        n_groups: usize,
        (acc_lo, acc_hi): (f64, f64),
        rho: f64,
        complement_strength: f64,
        peak_mass: f64,
        seed: u64,
    ) -> Self {
        let base_accuracy = (0..n_models)
            .map(|i| {
                if n_models == 1 {
                    acc_lo
                } else {
                    acc_lo + (acc_hi - acc_lo) * i as f64 / (n_models - 1) as f64
                }
            })
            .collect();
        let g = n_groups.max(1);
        let groups = (0..g)
            .map(|k| (0..n_models).filter(|i| i % g == k).collect())
            .collect();
        Self {
            n_models,
            n_samples,
            n_classes,
            base_accuracy,
            groups,
            rho,
            complement_strength,
            peak_mass,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.n_models < 2 {
            return bad(format!(
                "n_models must be at least 2, got {}",
                self.n_models
            ));
        }
        if self.n_classes < 2 {
            return bad(format!(
                "n_classes must be at least 2, got {}",
                self.n_classes
            ));
        }
        if self.n_samples == 0 {
            return bad("n_samples must be positive".into());
        }
        if self.base_accuracy.len() != self.n_models {
            return bad(format!(
                "{} base accuracies for {} models",
                self.base_accuracy.len(),
                self.n_models
            ));
        }
        if let Some(a) = self
            .base_accuracy
            .iter()
            .find(|a| !(**a > 0.0 && **a < 1.0))
        {
            return bad(format!("base accuracy {a} outside (0, 1)"));
        }
        let mut seen = vec![false; self.n_models];
        for &m in self.groups.iter().flatten() {
            if m >= self.n_models || std::mem::replace(&mut seen[m], true) {
                return bad(format!(
                    "groups are not a partition of the models (model {m})"
                ));
            }
        }
        if self.groups.iter().any(Vec::is_empty) || seen.iter().any(|s| !s) {
            return bad("groups must cover every model with no empty group".into());
        }
        for (name, v) in [
            ("rho", self.rho),
            ("complement_strength", self.complement_strength),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} {v} outside [0, 1]"));
            }
        }
        if !(self.peak_mass > 1.0 / self.n_classes as f64 && self.peak_mass <= 1.0) {
            return bad(format!(
                "peak_mass {} outside (1/{}, 1]",
                self.peak_mass, self.n_classes
            ));
        }
        Ok(())
    }

    fn group_of(&self) -> Vec<usize> {
        let mut of = vec![0; self.n_models];
        for (g, members) in self.groups.iter().enumerate() {
            for &m in members {
                of[m] = g;
            }
        }
        of
    }
}

fn width(n: usize) -> usize {
    n.saturating_sub(1).to_string().len()
}

/// Draws a pool from `spec`; the same spec always yields the same pool.
pub fn generate<T: Scalar>(spec: &SynthSpec) -> Result<PredictionPool<T>> {
    spec.validate()?;
    let (m, n, c) = (spec.n_models, spec.n_samples, spec.n_classes);
    let n_groups = spec.groups.len();
    let group_of = spec.group_of();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut truth = Vec::with_capacity(n);
    let mut probs = vec![T::zero(); m * n * c];
    let mut group_latent = vec![0.0; n_groups];
    let mut jitter = vec![0.0; c];
    let residual = (1.0 - spec.peak_mass) / (c - 1) as f64;
    let spread = 0.9 * residual.min(spec.peak_mass - residual);

    for j in 0..n {
        let t = rng.gen_range(0..c);
        truth.push(t);
        let shared: f64 = rng.gen();
        for (g, latent) in group_latent.iter_mut().enumerate() {
            let coin: f64 = rng.gen();
            let own: f64 = rng.gen();
            *latent = if coin < spec.complement_strength {
                (shared + g as f64 / n_groups as f64).fract()
            } else {
                own
            };
        }
        for i in 0..m {
            let coin: f64 = rng.gen();
            let own: f64 = rng.gen();
            let wrong_pick: f64 = rng.gen();
            jitter.iter_mut().for_each(|x| *x = rng.gen());

            let latent = if coin < spec.rho {
                group_latent[group_of[i]]
            } else {
                own
            };
            let correct = latent >= 1.0 - spec.base_accuracy[i];
            let emitted = if correct {
                t
            } else {
                let k = ((wrong_pick * (c - 1) as f64) as usize).min(c - 2);
                if k >= t {
                    k + 1
                } else {
                    k
                }
            };

            // zero-sum jitter around the even residual share
            let others = (0..c).filter(|&k| k != emitted);
            let mean_j = others.clone().map(|k| jitter[k]).sum::<f64>() / (c - 1) as f64;
            let mut row = vec![0.0f64; c];
            row[emitted] = spec.peak_mass;
            for k in others {
                row[k] = residual + spread * (jitter[k] - mean_j);
            }
            let sum: f64 = row.iter().sum();
            let block = &mut probs[(i * n + j) * c..(i * n + j + 1) * c];
            for (dst, p) in block.iter_mut().zip(&row) {
                *dst = T::of(p / sum);
            }
        }
    }

    let models = (0..m)
        .map(|i| ModelRecord {
            model_id: i,
            name: format!("synth_{i:0w$}", w = width(m).max(2)),
            predictions_path: Default::default(),
        })
        .collect();
    let classes = (0..c)
        .map(|k| format!("c{k:0w$}", w = width(c).max(2)))
        .collect();
    let sample_ids = (0..n).map(|j| format!("s{j:0w$}", w = width(n))).collect();
    PredictionPool::new(models, classes, sample_ids, truth, probs)
}

/// The cross-group team the construction makes maximally complementary: the
/// most accurate member of every group (lowest id on ties).
pub fn planted_best_team(spec: &SynthSpec) -> Result<EnsembleTeam> {
    spec.validate()?;
    if spec.groups.len() < 2 {
        return Err(Error::InvalidSpec(
            "planted team needs at least 2 groups".into(),
        ));
    }
    if spec.complement_strength <= 0.0 {
        return Err(Error::InvalidSpec(
            "planted team needs complement_strength > 0".into(),
        ));
    }
    let members = spec
        .groups
        .iter()
        .map(|g| {
            *g.iter()
                .max_by(|&&a, &&b| {
                    spec.base_accuracy[a]
                        .partial_cmp(&spec.base_accuracy[b])
                        .unwrap()
                        .then(b.cmp(&a))
                })
                .expect("groups are non-empty")
        })
        .collect();
    EnsembleTeam::new(members, spec.n_models)
}
