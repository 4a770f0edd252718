//! Train/test partitioning and class rebalancing.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Corpus, UNLABELED};
use crate::error::{Error, Result};
use crate::rng::stage_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub test_fraction: f64,
    pub stratified: bool,
    pub seed: u64,
    pub oversample: bool,
}

impl SplitSpec {
    pub fn holdout(test_fraction: f64, seed: u64) -> Self {
        Self {
            train_fraction: 1.0 - test_fraction,
            test_fraction,
            stratified: true,
            seed,
            oversample: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |f: f64| f > 0.0 && f < 1.0;
        if !ok(self.train_fraction) || !ok(self.test_fraction) {
            return Err(Error::arg("split fractions must lie in (0, 1)"));
        }
        if self.train_fraction + self.test_fraction > 1.0 + 1e-12 {
            return Err(Error::arg("split fractions sum above 1"));
        }
        Ok(())
    }
}

/// Sizes of the (train, test) parts of a group of `n` rows. Rounding
/// remainders go to train.
fn part_sizes(n: usize, spec: &SplitSpec) -> (usize, usize) {
    let test = (n as f64 * spec.test_fraction + 1e-9).floor() as usize;
    let rest = n - test;
    let train = if spec.train_fraction + spec.test_fraction >= 1.0 - 1e-12 {
        rest
    } else {
        ((n as f64 * spec.train_fraction - 1e-9).ceil() as usize).min(rest)
    };
    (train, test)
}

/// Splits labeled rows into train and test. Unlabeled rows always go to
/// train; when `spec.oversample` is set the train part is rebalanced.
pub fn split(corpus: &Corpus, spec: &SplitSpec) -> Result<(Corpus, Corpus)> {
    spec.validate()?;
    let mut rng = stage_rng(spec.seed, 0x5b1e);
    let groups: Vec<Vec<usize>> = if spec.stratified {
        let groups: Vec<Vec<usize>> = (0..corpus.k() as i32)
            .map(|c| corpus.class_indices(c))
            .collect();
        if let Some((c, g)) = groups.iter().enumerate().find(|(_, g)| g.len() < 2) {
            return Err(Error::data(format!(
                "stratified split needs at least 2 rows of class {c}, found {}",
                g.len()
            )));
        }
        groups
    } else {
        vec![(0..corpus.len())
            .filter(|&i| corpus.labels()[i] != UNLABELED)
            .collect()]
    };

    let mut train = Vec::new();
    let mut test = Vec::new();
    for mut group in groups {
        group.shuffle(&mut rng);
        let (n_train, n_test) = part_sizes(group.len(), spec);
        test.extend_from_slice(&group[..n_test]);
        train.extend_from_slice(&group[n_test..n_test + n_train]);
    }
    train.extend(corpus.class_indices(UNLABELED));
    train.sort_unstable();
    test.sort_unstable();

    let train = corpus.subset(&train);
    let train = if spec.oversample {
        random_oversample(&train, crate::rng::derive_seed(spec.seed, 0x0f5a))?
    } else {
        train
    };
    Ok((train, corpus.subset(&test)))
}

/// Duplicates minority-class rows, drawn uniformly with replacement, until
/// every labeled class matches the largest one. Unlabeled rows pass through.
pub fn random_oversample(corpus: &Corpus, seed: u64) -> Result<Corpus> {
    let counts = corpus.class_counts();
    if counts.iter().all(|&c| c == 0) {
        return Err(Error::data("oversampling needs labeled rows"));
    }
    if let Some(c) = counts.iter().position(|&c| c == 0) {
        return Err(Error::data(format!(
            "class {c} has no labeled rows to oversample"
        )));
    }
    let target = *counts.iter().max().expect("k >= 2");
    let mut rng = stage_rng(seed, 0x05a);
    let mut indices: Vec<usize> = (0..corpus.len()).collect();
    for class in 0..corpus.k() {
        let members = corpus.class_indices(class as i32);
        for _ in members.len()..target {
            indices.push(members[rng.random_range(0..members.len())]);
        }
    }
    Ok(corpus.subset(&indices))
}

/// Assigns labeled rows to `folds` folds, class by class. Without a seed the
/// assignment is round-robin in row order; with one, rows are shuffled
/// within each class first. Unlabeled rows get `None`.
pub fn stratified_folds(
    corpus: &Corpus,
    folds: usize,
    seed: Option<u64>,
) -> Result<Vec<Option<usize>>> {
    if folds < 2 {
        return Err(Error::arg("need at least 2 folds"));
    }
    let mut out = vec![None; corpus.len()];
    let mut rng = seed.map(|s| stage_rng(s, 0xf01d));
    let mut offset = 0;
    for class in 0..corpus.k() as i32 {
        let mut members = corpus.class_indices(class);
        if members.len() < folds {
            return Err(Error::data(format!(
                "class {class} has {} rows, fewer than {folds} folds",
                members.len()
            )));
        }
        if let Some(rng) = rng.as_mut() {
            members.shuffle(rng);
        }
        for (pos, &i) in members.iter().enumerate() {
            out[i] = Some((pos + offset) % folds);
        }
        offset += members.len();
    }
    Ok(out)
}

/// Draws a bootstrap resample of the labeled rows, with replacement within
/// each class so every class keeps its size.
pub fn stratified_bootstrap(corpus: &Corpus, seed: u64) -> Corpus {
    let mut rng = stage_rng(seed, 0xb007);
    let mut indices = Vec::with_capacity(corpus.n_labeled());
    for class in 0..corpus.k() as i32 {
        let members = corpus.class_indices(class);
        for _ in 0..members.len() {
            indices.push(members[rng.random_range(0..members.len())]);
        }
    }
    corpus.subset(&indices)
}
