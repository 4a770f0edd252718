//! Synthetic corpora drawn from a known Naive Bayes model, for tests,
//! benchmarks and desk-scale experiments.

use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::axis::EmbeddingTable;
use crate::data::{ActivityVector, Corpus, Vocabulary, UNLABELED};
use crate::error::{Error, Result};
use crate::labeling::{Attribute, SeedSets};
use crate::rng::{derive_seed, stage_rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n: usize,
    pub d: usize,
    /// Class-1 prevalence.
    pub prevalence: f64,
    /// Dirichlet concentration of each community distribution.
    pub concentration: f64,
    /// 0 gives identical class distributions, 1 independent ones.
    pub separation: f64,
    /// Log-normal activity `(mu, sigma)` per class.
    pub activity: [(f64, f64); 2],
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n: 1000,
            d: 50,
            prevalence: 0.4,
            concentration: 1.0,
            separation: 0.5,
            activity: [(2.5, 0.8), (2.2, 0.8)],
            seed: 0,
        }
    }
}

/// The generating model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTruth {
    pub prior: Vec<f64>,
    /// `cond[y][j] = p(j | y)`.
    pub cond: Vec<Vec<f64>>,
    pub activity: [(f64, f64); 2],
}

impl SynthTruth {
    pub fn log_odds(&self) -> Vec<f64> {
        self.cond[1]
            .iter()
            .zip(&self.cond[0])
            .map(|(a, b)| a.ln() - b.ln())
            .collect()
    }
}

fn dirichlet<R: Rng>(rng: &mut R, d: usize, concentration: f64) -> Vec<f64> {
    let g = Gamma::new(concentration, 1.0).expect("positive shape");
    // a small floor keeps every community reachable
    let mut v: Vec<f64> = (0..d).map(|_| g.sample(rng).max(1e-12)).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

pub fn synth_vocabulary(d: usize) -> Arc<Vocabulary> {
    Arc::new(Vocabulary::new((0..d).map(|j| format!("c{j}"))).expect("distinct names"))
}

/// Draws a model, then `n` fully labeled rows from it.
pub fn generate(spec: &SynthSpec) -> Result<(Corpus, SynthTruth)> {
    if spec.d < 2 || spec.n == 0 {
        return Err(Error::arg("synthetic data needs d >= 2 and n >= 1"));
    }
    if !(0.0..=1.0).contains(&spec.prevalence) || !(0.0..=1.0).contains(&spec.separation) {
        return Err(Error::arg("prevalence and separation must lie in [0, 1]"));
    }
    if !(spec.concentration > 0.0) || spec.activity.iter().any(|a| !(a.1 > 0.0)) {
        return Err(Error::arg(
            "concentration and activity sigma must be positive",
        ));
    }
    let mut rng = stage_rng(spec.seed, 0);
    let base = dirichlet(&mut rng, spec.d, spec.concentration);
    let cond: Vec<Vec<f64>> = (0..2)
        .map(|_| {
            let own = dirichlet(&mut rng, spec.d, spec.concentration);
            base.iter()
                .zip(own)
                .map(|(b, o)| (1.0 - spec.separation) * b + spec.separation * o)
                .collect()
        })
        .collect();
    let truth = SynthTruth {
        prior: vec![1.0 - spec.prevalence, spec.prevalence],
        cond,
        activity: spec.activity,
    };
    let (rows, labels) = sample_rows(&truth, spec.n, derive_seed(spec.seed, 1))?;
    let corpus = Corpus::new(synth_vocabulary(spec.d), rows, labels, 2)?;
    Ok((corpus, truth))
}

/// Samples rows from a given model. Row `i` depends only on `(seed, i)`.
pub fn sample_rows(
    truth: &SynthTruth,
    n: usize,
    seed: u64,
) -> Result<(Vec<ActivityVector>, Vec<i32>)> {
    let pickers = truth
        .cond
        .iter()
        .map(|c| WeightedIndex::new(c).map_err(|e| Error::arg(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let acts = truth
        .activity
        .iter()
        .map(|&(mu, s)| Normal::new(mu, s).map_err(|e| Error::arg(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let out: Vec<(ActivityVector, i32)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stage_rng(seed, i as u64);
            let y = rng.random_bool(truth.prior[1]) as usize;
            // floor(exp(Z)) has exactly the binned log-normal law; zero is redrawn
            let a = loop {
                let a = acts[y].sample(&mut rng).exp().floor();
                if a >= 1.0 {
                    break a.min(1e6) as usize;
                }
            };
            let mut counts = vec![0u64; truth.cond[y].len()];
            for _ in 0..a {
                counts[pickers[y].sample(&mut rng)] += 1;
            }
            let pairs = counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(j, &c)| (j, c));
            let x = ActivityVector::from_pairs(format!("s{i}"), pairs).expect("bounded counts");
            (x, y as i32)
        })
        .collect();
    Ok(out.into_iter().unzip())
}

/// Hides all but `round(fraction · n)` labels, chosen uniformly.
pub fn mask_labels(corpus: &Corpus, fraction: f64, seed: u64) -> Result<Corpus> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::arg("labeled fraction must lie in [0, 1]"));
    }
    let mut idx: Vec<usize> = (0..corpus.len()).collect();
    idx.shuffle(&mut stage_rng(seed, 0));
    let keep = (fraction * corpus.len() as f64).round() as usize;
    let mut labels = vec![UNLABELED; corpus.len()];
    for &i in &idx[..keep] {
        labels[i] = corpus.labels()[i];
    }
    corpus.with_labels(labels)
}

/// Community embeddings whose first coordinate is the true log-odds plus
/// noise; remaining coordinates are pure noise.
pub fn synth_embeddings(
    truth: &SynthTruth,
    dim: usize,
    noise: f64,
    seed: u64,
) -> Result<EmbeddingTable> {
    if dim < 2 {
        return Err(Error::arg("embedding width must be at least 2"));
    }
    let mut rng = stage_rng(seed, 0);
    let lo = truth.log_odds();
    let scale = (lo.iter().map(|v| v * v).sum::<f64>() / lo.len() as f64)
        .sqrt()
        .max(1e-12);
    let rows = lo
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let mut e: Vec<f64> = (0..dim)
                .map(|_| noise * rng.sample::<f64, _>(StandardNormal))
                .collect();
            e[0] += v / scale;
            (format!("c{j}"), e)
        })
        .collect();
    EmbeddingTable::new(rows)
}

/// The `size` most class-0 and most class-1 communities by true log-odds.
pub fn synth_seeds(
    truth: &SynthTruth,
    size: usize,
    threshold: u64,
    attribute: Attribute,
) -> SeedSets {
    let lo = truth.log_odds();
    let mut order: Vec<usize> = (0..lo.len()).collect();
    order.sort_by(|&a, &b| lo[a].total_cmp(&lo[b]).then(a.cmp(&b)));
    let size = size.min(lo.len() / 2);
    SeedSets {
        attribute,
        pole_a: order[..size].iter().map(|j| format!("c{j}")).collect(),
        pole_b: order[order.len() - size..]
            .iter()
            .map(|j| format!("c{j}"))
            .collect(),
        threshold,
    }
}
