use std::sync::Arc;

use super::{ActivityVector, Vocabulary};
use crate::error::{Error, Result};

/// Label value for rows without a known class.
pub const UNLABELED: i32 = -1;

/// Activity rows over a shared vocabulary, with optional class labels.
///
/// Rows always have total activity of at least one and only reference
/// indices inside the vocabulary.
#[derive(Debug, Clone)]
pub struct Corpus {
    vocab: Arc<Vocabulary>,
    rows: Vec<ActivityVector>,
    labels: Vec<i32>,
    k: usize,
}

impl Corpus {
    pub fn new(
        vocab: Arc<Vocabulary>,
        rows: Vec<ActivityVector>,
        labels: Vec<i32>,
        k: usize,
    ) -> Result<Self> {
        if k < 2 {
            return Err(Error::arg(format!(
                "class count must be at least 2, got {k}"
            )));
        }
        if rows.len() != labels.len() {
            return Err(Error::data(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let d = vocab.len();
        for (row, &label) in rows.iter().zip(&labels) {
            if let Some(max) = row.max_index() {
                if max >= d {
                    return Err(Error::data(format!(
                        "user `{}` references index {max} outside vocabulary of size {d}",
                        row.user_id
                    )));
                }
            }
            if row.total() == 0 {
                return Err(Error::data(format!(
                    "user `{}` has no activity",
                    row.user_id
                )));
            }
            if label < UNLABELED || label >= k as i32 {
                return Err(Error::data(format!(
                    "label {label} for user `{}` outside -1..{}",
                    row.user_id,
                    k - 1
                )));
            }
        }
        Ok(Self {
            vocab,
            rows,
            labels,
            k,
        })
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn rows(&self) -> &[ActivityVector] {
        &self.rows
    }

    pub fn labels(&self) -> &[i32] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.vocab.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ActivityVector, i32)> {
        self.rows.iter().zip(self.labels.iter().copied())
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.k];
        for &l in &self.labels {
            if l >= 0 {
                counts[l as usize] += 1;
            }
        }
        counts
    }

    pub fn n_unlabeled(&self) -> usize {
        self.labels.iter().filter(|&&l| l == UNLABELED).count()
    }

    pub fn n_labeled(&self) -> usize {
        self.len() - self.n_unlabeled()
    }

    /// Indices of rows carrying `class`.
    pub fn class_indices(&self, class: i32) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.labels[i] == class)
            .collect()
    }

    pub fn subset(&self, indices: &[usize]) -> Corpus {
        Corpus {
            vocab: Arc::clone(&self.vocab),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            k: self.k,
        }
    }

    pub fn labeled_only(&self) -> Corpus {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| self.labels[i] >= 0).collect();
        self.subset(&idx)
    }

    pub fn with_labels(&self, labels: Vec<i32>) -> Result<Corpus> {
        Corpus::new(Arc::clone(&self.vocab), self.rows.clone(), labels, self.k)
    }

    /// Fraction of labeled rows in class 1 (binary corpora).
    pub fn prevalence(&self) -> Option<f64> {
        let counts = self.class_counts();
        let n: usize = counts.iter().sum();
        (n > 0 && self.k == 2).then(|| counts[1] as f64 / n as f64)
    }
}
