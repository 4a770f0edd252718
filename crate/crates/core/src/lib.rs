//! Inferring demographic attributes of online users from the communities
//! they are active in.

pub mod axis;
pub mod bayes;
pub mod calibrate;
pub mod classifier;
pub mod data;
pub mod error;
pub mod eval;
pub mod labeling;
pub mod persist;
pub mod quantify;
pub mod rng;
pub mod stats;
pub mod synth;

pub use classifier::{Classifier, Learner};
pub use data::{ActivityVector, Corpus, Vocabulary};
pub use error::{Error, ErrorKind, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
