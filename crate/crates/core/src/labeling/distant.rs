use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::rules::Attribute;
use crate::data::{Corpus, UNLABELED};
use crate::error::{Error, Result};

/// Two opposing sets of seed communities. Users leaning to `pole_a` get
/// class 0, users leaning to `pole_b` class 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSets {
    pub attribute: Attribute,
    pub pole_a: Vec<String>,
    pub pole_b: Vec<String>,
    pub threshold: u64,
}

const YEAR_SEEDS: &str = include_str!("../../config/seeds/year.json");
const GENDER_SEEDS: &str = include_str!("../../config/seeds/gender.json");
const PARTISAN_SEEDS: &str = include_str!("../../config/seeds/partisan.json");

impl SeedSets {
    pub fn validate(&self) -> Result<()> {
        if self.threshold < 1 {
            return Err(Error::data("seed threshold must be at least 1"));
        }
        if self.pole_a.is_empty() || self.pole_b.is_empty() {
            return Err(Error::data("both seed poles need at least one community"));
        }
        let a: HashSet<&String> = self.pole_a.iter().collect();
        if let Some(shared) = self.pole_b.iter().find(|n| a.contains(n)) {
            return Err(Error::data(format!(
                "`{shared}` appears in both seed poles"
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: SeedSets =
            serde_json::from_str(text).map_err(|e| Error::data(format!("seed file: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn default_for(attribute: Attribute) -> Self {
        let text = match attribute {
            Attribute::Year => YEAR_SEEDS,
            Attribute::Gender => GENDER_SEEDS,
            Attribute::Partisan => PARTISAN_SEEDS,
        };
        Self::from_json(text).expect("bundled seeds are valid")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistantLabels {
    /// One of −1, 0, 1 per corpus row.
    pub labels: Vec<i32>,
    /// Seed communities absent from the vocabulary.
    pub missing: Vec<String>,
}

impl DistantLabels {
    pub fn counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for &l in &self.labels {
            c[(l + 1) as usize] += 1;
        }
        c
    }
}

/// Labels a user when their activity in one pole exceeds the other by more
/// than the threshold.
pub fn distant_label(corpus: &Corpus, seeds: &SeedSets) -> Result<DistantLabels> {
    seeds.validate()?;
    let vocab = corpus.vocab();
    let mut missing = Vec::new();
    let mut resolve = |names: &[String]| -> Vec<usize> {
        names
            .iter()
            .filter_map(|n| {
                let idx = vocab.get(n);
                if idx.is_none() {
                    missing.push(n.clone());
                }
                idx
            })
            .collect()
    };
    let a = resolve(&seeds.pole_a);
    let b = resolve(&seeds.pole_b);
    if !missing.is_empty() {
        log::warn!(
            "{} seed communities not in vocabulary: {}",
            missing.len(),
            missing.join(", ")
        );
    }
    if a.is_empty() && b.is_empty() {
        return Err(Error::data("no seed community found in the vocabulary"));
    }
    let thr = seeds.threshold as i128;
    let labels = corpus
        .rows()
        .iter()
        .map(|x| {
            let ca: u64 = a.iter().map(|&j| x.count(j)).sum();
            let cb: u64 = b.iter().map(|&j| x.count(j)).sum();
            let delta = ca as i128 - cb as i128;
            if delta > thr {
                0
            } else if -delta > thr {
                1
            } else {
                UNLABELED
            }
        })
        .collect();
    Ok(DistantLabels { labels, missing })
}
