use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Arc;

use super::Comment;
use crate::data::{ActivityVector, Corpus, Vocabulary, UNLABELED};
use crate::error::Result;

/// Counts comments per user and community. Without a vocabulary every
/// community seen is used, in name order; with one, other communities are
/// dropped. Users come out in id order, unlabeled, and users whose comments
/// all fall outside the vocabulary are left out.
pub fn activity_corpus(
    comments: &[Comment],
    vocab: Option<&Vocabulary>,
    exclude: &HashSet<String>,
) -> Result<Corpus> {
    let vocab = match vocab {
        Some(v) => v.clone(),
        None => {
            let names: BTreeSet<&str> = comments
                .iter()
                .filter(|c| !exclude.contains(&c.user))
                .map(|c| c.community.as_str())
                .collect();
            Vocabulary::new(names)?
        }
    };
    let mut counts: BTreeMap<&str, BTreeMap<usize, u64>> = BTreeMap::new();
    for c in comments {
        if exclude.contains(&c.user) {
            continue;
        }
        if let Some(j) = vocab.get(&c.community) {
            *counts
                .entry(c.user.as_str())
                .or_default()
                .entry(j)
                .or_default() += 1;
        }
    }
    let rows = counts
        .into_iter()
        .map(|(user, row)| ActivityVector::from_pairs(user, row))
        .collect::<Result<Vec<_>>>()?;
    let n = rows.len();
    Corpus::new(Arc::new(vocab), rows, vec![UNLABELED; n], 2)
}
