//! Corpus ingestion from JSONL records or `user,community,count` triplets.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ActivityVector, Corpus, Vocabulary, UNLABELED};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum CorpusFormat {
    Jsonl,
    /// Counts CSV with header `user,community,count`, plus an optional
    /// `user,label` CSV.
    Triplets {
        labels: Option<PathBuf>,
    },
}

/// What the loader dropped or merged on the way in.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LoadReport {
    pub rows: usize,
    pub dropped_entries: usize,
    pub unknown_communities: usize,
    pub rejected_users: Vec<String>,
    pub merged_records: usize,
}

#[derive(Deserialize)]
struct JsonRecord {
    user: String,
    counts: BTreeMap<String, i64>,
    #[serde(default)]
    label: Option<i64>,
}

#[derive(Serialize)]
struct JsonRecordOut<'a> {
    user: &'a str,
    counts: BTreeMap<&'a str, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<i32>,
}

struct UserAccum {
    counts: HashMap<usize, u64>,
    label: i32,
    records: usize,
}

struct Builder<'v> {
    vocab: &'v Vocabulary,
    k: usize,
    order: Vec<String>,
    users: HashMap<String, UserAccum>,
    unknown: std::collections::HashSet<String>,
    report: LoadReport,
}

impl<'v> Builder<'v> {
    fn new(vocab: &'v Vocabulary, k: usize) -> Self {
        Self {
            vocab,
            k,
            order: Vec::new(),
            users: HashMap::new(),
            unknown: Default::default(),
            report: LoadReport::default(),
        }
    }

    fn check_label(&self, line: usize, label: i64) -> Result<i32> {
        if label < UNLABELED as i64 || label >= self.k as i64 {
            return Err(Error::Parse {
                line,
                message: format!("label {label} outside -1..{}", self.k - 1),
            });
        }
        Ok(label as i32)
    }

    fn user(&mut self, user: &str) -> &mut UserAccum {
        if !self.users.contains_key(user) {
            self.order.push(user.to_string());
            self.users.insert(
                user.to_string(),
                UserAccum {
                    counts: HashMap::new(),
                    label: UNLABELED,
                    records: 0,
                },
            );
        }
        self.users.get_mut(user).expect("inserted above")
    }

    fn add_count(&mut self, line: usize, user: &str, community: &str, count: i64) -> Result<()> {
        if count < 1 {
            return Err(Error::Parse {
                line,
                message: format!("count {count} for `{community}` must be >= 1"),
            });
        }
        match self.vocab.get(community) {
            Some(idx) => {
                let acc = self.user(user);
                let slot = acc.counts.entry(idx).or_insert(0);
                *slot = slot.saturating_add(count as u64);
            }
            None => {
                self.report.dropped_entries += 1;
                self.unknown.insert(community.to_string());
                self.user(user);
            }
        }
        Ok(())
    }

    fn set_label(&mut self, user: &str, label: i32) -> Result<()> {
        let acc = self.user(user);
        if label == UNLABELED {
            return Ok(());
        }
        if acc.label != UNLABELED && acc.label != label {
            return Err(Error::data(format!(
                "conflicting labels {} and {label} for user `{user}`",
                acc.label
            )));
        }
        acc.label = label;
        Ok(())
    }

    fn finish(mut self) -> Result<(Corpus, LoadReport)> {
        let mut rows = Vec::with_capacity(self.order.len());
        let mut labels = Vec::with_capacity(self.order.len());
        for user in &self.order {
            let acc = &self.users[user];
            if acc.records > 1 {
                self.report.merged_records += acc.records - 1;
            }
            if acc.counts.is_empty() {
                self.report.rejected_users.push(user.clone());
                continue;
            }
            rows.push(ActivityVector::from_pairs(
                user.clone(),
                acc.counts.iter().map(|(&i, &c)| (i, c)),
            )?);
            labels.push(acc.label);
        }
        self.report.rows = rows.len();
        self.report.unknown_communities = self.unknown.len();
        if self.report.dropped_entries > 0 {
            log::warn!(
                "dropped {} entries over {} communities outside the vocabulary",
                self.report.dropped_entries,
                self.report.unknown_communities
            );
        }
        if !self.report.rejected_users.is_empty() {
            log::warn!(
                "rejected {} users with no in-vocabulary activity",
                self.report.rejected_users.len()
            );
        }
        let corpus = Corpus::new(Arc::new(self.vocab.clone()), rows, labels, self.k)?;
        Ok((corpus, self.report))
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

/// Loads a corpus, dropping communities outside `vocab` and merging repeated
/// users by summing their counts.
pub fn load_corpus(
    path: impl AsRef<Path>,
    format: &CorpusFormat,
    vocab: &Vocabulary,
    k: usize,
) -> Result<(Corpus, LoadReport)> {
    let path = path.as_ref();
    match format {
        CorpusFormat::Jsonl => read_jsonl(open(path)?, path, vocab, k),
        CorpusFormat::Triplets { labels } => read_triplets(path, labels.as_deref(), vocab, k),
    }
}

pub fn read_jsonl<R: BufRead>(
    reader: R,
    path: &Path,
    vocab: &Vocabulary,
    k: usize,
) -> Result<(Corpus, LoadReport)> {
    let mut b = Builder::new(vocab, k);
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let label = match rec.label {
            Some(l) => b.check_label(lineno, l)?,
            None => UNLABELED,
        };
        b.user(&rec.user).records += 1;
        for (community, count) in &rec.counts {
            b.add_count(lineno, &rec.user, community, *count)?;
        }
        b.set_label(&rec.user, label)?;
    }
    b.finish()
}

fn read_triplets(
    counts: &Path,
    labels: Option<&Path>,
    vocab: &Vocabulary,
    k: usize,
) -> Result<(Corpus, LoadReport)> {
    let mut b = Builder::new(vocab, k);
    let mut rdr = csv::Reader::from_reader(open(counts)?);
    let header = rdr.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if header.iter().collect::<Vec<_>>() != ["user", "community", "count"] {
        return Err(Error::Parse {
            line: 1,
            message: "expected header `user,community,count`".into(),
        });
    }
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let count: i64 = rec[2].trim().parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad count `{}`", &rec[2]),
        })?;
        b.user(&rec[0]).records += 1;
        b.add_count(line, &rec[0], &rec[1], count)?;
    }
    // every user appears on several triplet lines by construction
    for acc in b.users.values_mut() {
        acc.records = 1;
    }
    if let Some(lpath) = labels {
        let mut rdr = csv::Reader::from_reader(open(lpath)?);
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            let label: i64 = rec[1].trim().parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad label `{}`", &rec[1]),
            })?;
            let label = b.check_label(line, label)?;
            if b.users.contains_key(&rec[0]) {
                b.set_label(&rec[0], label)?;
            }
        }
    }
    b.finish()
}

/// Writes a corpus in the JSONL record format read by [`load_corpus`].
pub fn write_jsonl(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let vocab = corpus.vocab();
    for (row, label) in corpus.iter() {
        let rec = JsonRecordOut {
            user: &row.user_id,
            counts: row.iter().map(|(i, c)| (vocab.name(i), c)).collect(),
            label: (label != UNLABELED).then_some(label),
        };
        serde_json::to_writer(&mut w, &rec).map_err(|e| Error::data(e.to_string()))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_vocab(vocab: &Vocabulary, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = vocab.names().join("\n");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads a `user,label` CSV.
pub fn read_labels_csv(path: impl AsRef<Path>) -> Result<Vec<(String, i32)>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_reader(open(path)?);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let label = rec[1].trim().parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad label `{}`", &rec[1]),
        })?;
        out.push((rec[0].to_string(), label));
    }
    Ok(out)
}

pub fn write_labels_csv<'a>(
    path: impl AsRef<Path>,
    labels: impl IntoIterator<Item = (&'a str, i32)>,
) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::data(e.to_string()))?;
    w.write_record(["user", "label"])
        .map_err(|e| Error::data(e.to_string()))?;
    for (user, label) in labels {
        w.write_record([user, &label.to_string()])
            .map_err(|e| Error::data(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn vocab() -> Vocabulary {
        Vocabulary::new(["a", "b"]).unwrap()
    }

    fn load(text: &str) -> Result<(Corpus, LoadReport)> {
        read_jsonl(Cursor::new(text), Path::new("mem"), &vocab(), 2)
    }

    #[test]
    fn direct_encoding() {
        let (c, _) = load(r#"{"user":"u1","counts":{"a":2,"b":1},"label":0}"#).unwrap();
        assert_eq!(c.rows()[0].entries(), &[(0, 2), (1, 1)]);
        assert_eq!(c.labels(), &[0]);
    }

    #[test]
    fn empty_counts_rejected_and_reported() {
        let (c, r) =
            load("{\"user\":\"u1\",\"counts\":{}}\n{\"user\":\"u2\",\"counts\":{\"a\":1}}")
                .unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(r.rejected_users, vec!["u1".to_string()]);
    }

    #[test]
    fn unknown_communities_dropped_with_count() {
        let (c, r) = load(r#"{"user":"u1","counts":{"a":1,"zz":4,"yy":1}}"#).unwrap();
        assert_eq!(c.rows()[0].total(), 1);
        assert_eq!(r.dropped_entries, 2);
        assert_eq!(r.unknown_communities, 2);
        assert_eq!(c.labels(), &[UNLABELED]);
    }

    #[test]
    fn three_line_merge_matches_manual_sum() {
        let text = r#"{"user":"u1","counts":{"a":2},"label":1}
{"user":"u2","counts":{"b":5}}
{"user":"u1","counts":{"a":3,"b":1}}"#;
        let (c, r) = load(text).unwrap();
        // manual merge: u1 = {a: 2+3, b: 1}, label 1; u2 = {b: 5}, unlabeled
        assert_eq!(c.rows()[0].user_id, "u1");
        assert_eq!(c.rows()[0].entries(), &[(0, 5), (1, 1)]);
        assert_eq!(c.labels(), &[1, UNLABELED]);
        assert_eq!(c.rows()[1].entries(), &[(1, 5)]);
        assert_eq!(r.merged_records, 1);
    }

    #[test]
    fn label_conflict_is_error() {
        let text = "{\"user\":\"u1\",\"counts\":{\"a\":2},\"label\":1}\n{\"user\":\"u1\",\"counts\":{\"a\":1},\"label\":0}";
        assert!(matches!(load(text), Err(Error::Data(_))));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = "{\"user\":\"u1\",\"counts\":{\"a\":2}}\nnot json";
        match load(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn label_out_of_range() {
        let text = r#"{"user":"u1","counts":{"a":2},"label":2}"#;
        assert!(matches!(load(text), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn merged_overflow_is_error() {
        let text = format!(
            "{{\"user\":\"u\",\"counts\":{{\"a\":{m}}}}}\n{{\"user\":\"u\",\"counts\":{{\"a\":1}}}}",
            m = i32::MAX
        );
        assert!(load(&text).is_err());
    }

    #[test]
    fn triplets_with_labels() {
        let dir = tempfile::tempdir().unwrap();
        let counts = dir.path().join("counts.csv");
        let labels = dir.path().join("labels.csv");
        std::fs::write(
            &counts,
            "user,community,count\nu1,a,2\nu1,b,1\nu2,b,3\nu1,a,1\nu3,q,9\n",
        )
        .unwrap();
        std::fs::write(&labels, "user,label\nu2,1\nu9,0\n").unwrap();
        let fmt = CorpusFormat::Triplets {
            labels: Some(labels),
        };
        let (c, r) = load_corpus(&counts, &fmt, &vocab(), 2).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.rows()[0].entries(), &[(0, 3), (1, 1)]);
        assert_eq!(c.labels(), &[UNLABELED, 1]);
        assert_eq!(r.rejected_users, vec!["u3".to_string()]);
    }

    #[test]
    fn jsonl_write_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let text = "{\"user\":\"u1\",\"counts\":{\"a\":2,\"b\":1},\"label\":0}\n{\"user\":\"u2\",\"counts\":{\"b\":5}}";
        let (c, _) = load(text).unwrap();
        let p = dir.path().join("c.jsonl");
        write_jsonl(&c, &p).unwrap();
        let (c2, _) = load_corpus(&p, &CorpusFormat::Jsonl, &vocab(), 2).unwrap();
        assert_eq!(c.rows(), c2.rows());
        assert_eq!(c.labels(), c2.labels());
    }
}
