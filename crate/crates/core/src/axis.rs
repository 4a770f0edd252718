//! Embedding-axis baseline: communities are projected onto the direction
//! between two pole sets, standardized to z-scores, and users are scored by
//! the activity-weighted mean z of the communities they participate in.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calibrate::IsotonicMap;
use crate::classifier::{Classifier, Learner};
use crate::data::{ActivityVector, Corpus, Vocabulary};
use crate::error::{Error, Result};
use crate::labeling::SeedSets;

/// Pre-trained community vectors, one row per community.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    names: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    data: Vec<f64>,
}

impl EmbeddingTable {
    pub fn new(rows: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let dim = rows
            .first()
            .map(|r| r.1.len())
            .ok_or_else(|| Error::data("embedding table is empty"))?;
        if dim < 2 {
            return Err(Error::data("embedding width must be at least 2"));
        }
        let mut names = Vec::with_capacity(rows.len());
        let mut index = HashMap::with_capacity(rows.len());
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (name, v) in rows {
            if v.len() != dim {
                return Err(Error::data(format!(
                    "`{name}` has width {}, expected {dim}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::data(format!("`{name}` has a non-finite component")));
            }
            if index.insert(name.clone(), names.len()).is_some() {
                return Err(Error::data(format!("duplicate embedding for `{name}`")));
            }
            names.push(name);
            data.extend(v);
        }
        Ok(Self {
            names,
            index,
            dim,
            data,
        })
    }

    /// Reads `community<TAB>v1<TAB>…<TAB>vm` lines.
    pub fn load_tsv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let name = fields.next().unwrap_or_default().to_string();
            let v = fields
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            rows.push((name, v));
        }
        Self::new(rows)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.index.get(name).map(|&i| self.vector(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    #[default]
    Cosine,
    Dot,
}

/// Community z-scores along one pole-defined axis. Users scoring above
/// `threshold` are assigned class 1, the side of `pole_a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisModel {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribute: Option<String>,
    pub pole_a: Vec<String>,
    pub pole_b: Vec<String>,
    pub projection: Projection,
    /// Population the z-scores were standardized over.
    pub standardization: String,
    pub threshold: f64,
    pub communities: Vec<String>,
    pub z: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibrator: Option<IsotonicMap>,
}

fn mean_vector(emb: &EmbeddingTable, names: &[String], which: &str) -> Result<Vec<f64>> {
    let found: Vec<&[f64]> = names.iter().filter_map(|n| emb.get(n)).collect();
    if found.len() < names.len() {
        log::warn!(
            "{} of {} {which} communities missing from the embedding table",
            names.len() - found.len(),
            names.len()
        );
    }
    if found.is_empty() {
        return Err(Error::data(format!(
            "no {which} community found in the embedding table"
        )));
    }
    let mut mean = vec![0.0; emb.dim()];
    for v in &found {
        for (m, x) in mean.iter_mut().zip(v.iter()) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= found.len() as f64);
    Ok(mean)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Builds the axis `mean(pole_a) − mean(pole_b)` and z-scores every
/// community in the table against it.
pub fn build_axis(
    emb: &EmbeddingTable,
    pole_a: &[String],
    pole_b: &[String],
    projection: Projection,
) -> Result<AxisModel> {
    let a: HashSet<&String> = pole_a.iter().collect();
    if pole_b.iter().any(|n| a.contains(n)) {
        return Err(Error::data("axis poles must be disjoint"));
    }
    let ma = mean_vector(emb, pole_a, "pole_a")?;
    let mb = mean_vector(emb, pole_b, "pole_b")?;
    let axis: Vec<f64> = ma.iter().zip(&mb).map(|(x, y)| x - y).collect();
    let axis_norm = dot(&axis, &axis).sqrt();
    if axis_norm == 0.0 {
        return Err(Error::Numeric(
            "pole means coincide; axis is the zero vector".into(),
        ));
    }
    let raw: Vec<f64> = (0..emb.len())
        .map(|i| {
            let v = emb.vector(i);
            let p = dot(v, &axis);
            match projection {
                Projection::Dot => p,
                Projection::Cosine => {
                    let n = dot(v, v).sqrt();
                    if n == 0.0 {
                        0.0
                    } else {
                        p / (n * axis_norm)
                    }
                }
            }
        })
        .collect();
    let n = raw.len() as f64;
    let mean = raw.iter().sum::<f64>() / n;
    let std = (raw.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n).sqrt();
    if !(std > 0.0) {
        return Err(Error::Numeric(
            "all communities project to the same point".into(),
        ));
    }
    Ok(AxisModel {
        attribute: None,
        pole_a: pole_a.to_vec(),
        pole_b: pole_b.to_vec(),
        projection,
        standardization: "full_table".into(),
        threshold: 0.0,
        communities: emb.names.clone(),
        z: raw.iter().map(|r| (r - mean) / std).collect(),
        calibrator: None,
    })
}

/// Axis oriented to the class coding of [`SeedSets`]: its `pole_b`
/// (class 1) becomes the positive direction.
pub fn build_axis_from_seeds(
    emb: &EmbeddingTable,
    seeds: &SeedSets,
    projection: Projection,
) -> Result<AxisModel> {
    let mut m = build_axis(emb, &seeds.pole_b, &seeds.pole_a, projection)?;
    m.attribute = Some(seeds.attribute.to_string());
    Ok(m)
}

impl AxisModel {
    pub fn z_of(&self, community: &str) -> Option<f64> {
        self.communities
            .iter()
            .position(|c| c == community)
            .map(|i| self.z[i])
    }

    /// Binds the z-scores to a corpus vocabulary for fast scoring.
    pub fn scorer(&self, vocab: &Vocabulary) -> AxisScorer {
        let by_name: HashMap<&str, f64> = self
            .communities
            .iter()
            .map(String::as_str)
            .zip(self.z.iter().copied())
            .collect();
        AxisScorer {
            z: vocab
                .names()
                .iter()
                .map(|n| by_name.get(n.as_str()).copied())
                .collect(),
            threshold: self.threshold,
            calibrator: self.calibrator.clone(),
        }
    }
}

/// An [`AxisModel`] aligned to a vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisScorer {
    z: Vec<Option<f64>>,
    pub threshold: f64,
    pub calibrator: Option<IsotonicMap>,
}

impl AxisScorer {
    pub fn from_z(z: Vec<Option<f64>>, threshold: f64) -> Self {
        Self {
            z,
            threshold,
            calibrator: None,
        }
    }

    /// Activity-weighted mean z-score over the communities that have one.
    pub fn score_user(&self, x: &ActivityVector) -> Result<f64> {
        let (mut num, mut den) = (0.0, 0.0);
        for (j, c) in x.iter() {
            if let Some(Some(z)) = self.z.get(j) {
                num += c as f64 * z;
                den += c as f64;
            }
        }
        if den == 0.0 {
            return Err(Error::data(format!(
                "user `{}` has no community with an axis score",
                x.user_id
            )));
        }
        Ok(num / den)
    }

    /// `(scored, ignored)` entry counts for a user.
    pub fn coverage(&self, x: &ActivityVector) -> (usize, usize) {
        let scored = x
            .iter()
            .filter(|(j, _)| matches!(self.z.get(*j), Some(Some(_))))
            .count();
        (scored, x.nnz() - scored)
    }

    /// Logistic squashing with unit slope centred on the threshold, unless
    /// a calibrator is attached.
    pub fn to_proba(&self, score: f64) -> f64 {
        let squashed = 1.0 / (1.0 + (-(score - self.threshold)).exp());
        match &self.calibrator {
            Some(map) => map.apply_one(squashed),
            None => squashed,
        }
    }

    pub fn score_to_proba(&self, scores: &[f64]) -> Vec<f64> {
        scores.iter().map(|&s| self.to_proba(s)).collect()
    }
}

impl Classifier for AxisScorer {
    fn score(&self, x: &ActivityVector) -> Result<f64> {
        Ok(self.to_proba(self.score_user(x)?))
    }

    fn predict(&self, x: &ActivityVector) -> Result<u8> {
        Ok((self.score_user(x)? > self.threshold) as u8)
    }

    fn is_calibrated(&self) -> bool {
        self.calibrator.is_some()
    }
}

/// A fixed, pre-built axis; "fitting" ignores the training rows.
#[derive(Debug, Clone)]
pub struct AxisLearner {
    pub model: AxisModel,
}

impl Learner for AxisLearner {
    fn name(&self) -> String {
        "WA".into()
    }

    fn fit(&self, train: &Corpus) -> Result<Box<dyn Classifier>> {
        Ok(Box::new(self.model.scorer(train.vocab())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    fn toy() -> EmbeddingTable {
        EmbeddingTable::new(vec![
            ("a".into(), vec![1.0, 0.0]),
            ("b".into(), vec![-1.0, 0.0]),
            ("c".into(), vec![0.0, 1.0]),
            ("d".into(), vec![1.0, 1.0]),
            ("e".into(), vec![-2.0, 1.0]),
        ])
        .unwrap()
    }

    #[test]
    fn identical_poles_rejected() {
        assert!(build_axis(&toy(), &s(&["a"]), &s(&["a"]), Projection::Cosine).is_err());
    }

    #[test]
    fn pole_community_gets_max_z() {
        let m = build_axis(&toy(), &s(&["a"]), &s(&["b"]), Projection::Cosine).unwrap();
        let za = m.z_of("a").unwrap();
        assert!(m.z.iter().all(|&z| z <= za));
    }

    #[test]
    fn hand_computed_z_scores() {
        // axis (2,0); cosines: a 1, b -1, c 0, d 1/√2, e -2/√5
        let cos = [1.0, -1.0, 0.0, 1.0 / 2f64.sqrt(), -2.0 / 5f64.sqrt()];
        let mean = cos.iter().sum::<f64>() / 5.0;
        let std = (cos.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / 5.0).sqrt();
        let m = build_axis(&toy(), &s(&["a"]), &s(&["b"]), Projection::Cosine).unwrap();
        for (z, c) in m.z.iter().zip(cos) {
            assert!((z - (c - mean) / std).abs() < 1e-12);
        }
        let mean_z = m.z.iter().sum::<f64>() / 5.0;
        let std_z = (m.z.iter().map(|z| (z - mean_z).powi(2)).sum::<f64>() / 5.0).sqrt();
        assert!(mean_z.abs() < 1e-9 && (std_z - 1.0).abs() < 1e-9);
    }

    #[test]
    fn swapping_poles_negates() {
        for proj in [Projection::Cosine, Projection::Dot] {
            let m1 = build_axis(&toy(), &s(&["a", "d"]), &s(&["e"]), proj).unwrap();
            let m2 = build_axis(&toy(), &s(&["e"]), &s(&["a", "d"]), proj).unwrap();
            for (x, y) in m1.z.iter().zip(&m2.z) {
                assert!((x + y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn seed_orientation_matches_class_coding() {
        let seeds = SeedSets {
            attribute: crate::labeling::Attribute::Gender,
            pole_a: s(&["b"]),
            pole_b: s(&["a"]),
            threshold: 3,
        };
        let m = build_axis_from_seeds(&toy(), &seeds, Projection::Cosine).unwrap();
        assert!(m.z_of("a").unwrap() > 0.0 && m.z_of("b").unwrap() < 0.0);
        assert_eq!(m.attribute.as_deref(), Some("gender"));
    }

    #[test]
    fn weighted_average_scoring() {
        let scorer = AxisScorer::from_z(vec![Some(1.0), Some(-0.5), None], 0.0);
        let x = ActivityVector::from_pairs("u", [(0, 2), (1, 1)]).unwrap();
        assert!((scorer.score_user(&x).unwrap() - 0.5).abs() < 1e-15);
        let single = AxisScorer::from_z(vec![Some(1.7)], 0.0);
        let y = ActivityVector::from_pairs("u", [(0, 4)]).unwrap();
        assert_eq!(single.score_user(&y).unwrap(), 1.7);
        let none = ActivityVector::from_pairs("u", [(2, 4)]).unwrap();
        assert!(scorer.score_user(&none).is_err());
        let mixed = ActivityVector::from_pairs("u", [(0, 1), (2, 4)]).unwrap();
        assert_eq!(scorer.coverage(&mixed), (1, 1));
        assert_eq!(scorer.score_user(&mixed).unwrap(), 1.0);
    }

    #[test]
    fn threshold_ties_go_to_class_zero() {
        let scorer = AxisScorer::from_z(vec![Some(0.0), Some(1e6)], 0.0);
        let at = ActivityVector::from_pairs("u", [(0, 1)]).unwrap();
        assert_eq!(scorer.predict(&at).unwrap(), 0);
        assert_eq!(scorer.score(&at).unwrap(), 0.5);
        let far = ActivityVector::from_pairs("u", [(1, 1)]).unwrap();
        assert_eq!(scorer.predict(&far).unwrap(), 1);
        assert!(scorer.score(&far).unwrap() > 0.999_999);
        let p = scorer.score_to_proba(&[-3.0, -1.0, 0.0, 2.0, 50.0]);
        assert!(p.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn tsv_loading() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.tsv");
        fs::write(&p, "a\t1\t0\nb\t-1\t0.5\n").unwrap();
        let t = EmbeddingTable::load_tsv(&p).unwrap();
        assert_eq!(t.dim(), 2);
        assert_eq!(t.get("b").unwrap(), &[-1.0, 0.5]);
        fs::write(&p, "a\t1\tx\n").unwrap();
        assert!(matches!(
            EmbeddingTable::load_tsv(&p),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
