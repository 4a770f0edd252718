use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Ordered community vocabulary; position defines the feature index.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::data("vocabulary is empty"));
        }
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::data(format!(
                    "duplicate community `{name}` in vocabulary"
                )));
            }
        }
        Ok(Self { names, index })
    }

    /// One community name per line; blank lines are skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::new(text.lines().map(str::trim).filter(|l| !l.is_empty()))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_is_inverse_of_order() {
        let v = Vocabulary::new(["a", "b", "c"]).unwrap();
        for (i, n) in v.names().iter().enumerate() {
            assert_eq!(v.get(n), Some(i));
        }
        assert_eq!(v.get("z"), None);
    }

    #[test]
    fn rejects_duplicates_and_empty() {
        assert!(Vocabulary::new(["a", "a"]).is_err());
        assert!(Vocabulary::new(Vec::<String>::new()).is_err());
    }
}
