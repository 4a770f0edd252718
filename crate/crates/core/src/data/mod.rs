//! Sparse activity data: vocabulary, per-user count vectors, corpora,
//! loaders and resampling.

mod corpus;
mod load;
mod split;
mod vector;
mod vocab;

pub use corpus::{Corpus, UNLABELED};
pub use load::{
    load_corpus, read_jsonl, read_labels_csv, write_jsonl, write_labels_csv, write_vocab,
    CorpusFormat, LoadReport,
};
pub use split::{random_oversample, split, stratified_bootstrap, stratified_folds, SplitSpec};
pub use vector::{ActivityVector, MAX_COUNT};
pub use vocab::Vocabulary;
