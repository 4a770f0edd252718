use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest per-community count we accept (2³¹ − 1).
pub const MAX_COUNT: u64 = i32::MAX as u64;

/// A user's participation counts in canonical form: indices strictly
/// increasing, every count at least one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityVector {
    pub user_id: String,
    entries: Vec<(u32, u32)>,
}

impl ActivityVector {
    /// Builds a canonical vector from arbitrary `(index, count)` pairs.
    /// Duplicate indices are summed and zero counts dropped.
    pub fn from_pairs<I>(user_id: impl Into<String>, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, u64)>,
    {
        let user_id = user_id.into();
        let mut raw: Vec<(usize, u64)> = pairs.into_iter().filter(|&(_, c)| c > 0).collect();
        raw.sort_by_key(|&(i, _)| i);
        let mut entries: Vec<(u32, u32)> = Vec::with_capacity(raw.len());
        let mut last: Option<(usize, u64)> = None;
        for (idx, count) in raw {
            match last.as_mut() {
                Some((li, lc)) if *li == idx => *lc += count,
                _ => {
                    if let Some(prev) = last.take() {
                        entries.push(Self::checked(&user_id, prev)?);
                    }
                    last = Some((idx, count));
                }
            }
        }
        if let Some(prev) = last {
            entries.push(Self::checked(&user_id, prev)?);
        }
        Ok(Self { user_id, entries })
    }

    fn checked(user: &str, (idx, count): (usize, u64)) -> Result<(u32, u32)> {
        if count > MAX_COUNT {
            return Err(Error::data(format!(
                "count overflow for user `{user}` at index {idx}"
            )));
        }
        let idx = u32::try_from(idx).map_err(|_| Error::data(format!("index {idx} too large")))?;
        Ok((idx, count as u32))
    }

    pub fn entries(&self) -> &[(u32, u32)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.entries.iter().map(|&(i, c)| (i as usize, c as u64))
    }

    /// Total activity `a = Σ counts`.
    pub fn total(&self) -> u64 {
        self.entries.iter().map(|&(_, c)| c as u64).sum()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn count(&self, idx: usize) -> u64 {
        match self
            .entries
            .binary_search_by_key(&(idx as u32), |&(i, _)| i)
        {
            Ok(pos) => self.entries[pos].1 as u64,
            Err(_) => 0,
        }
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|&(i, _)| i as usize)
    }

    /// Adds another vector's counts into this one.
    pub fn merge(&self, other: &ActivityVector) -> Result<Self> {
        Self::from_pairs(self.user_id.clone(), self.iter().chain(other.iter()))
    }

    pub fn to_dense(&self, d: usize) -> Vec<u64> {
        let mut out = vec![0; d];
        for (i, c) in self.iter() {
            out[i] = c;
        }
        out
    }
}
