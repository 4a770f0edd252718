//! Shared workloads for the benchmarks.

use selfdecl::bayes::{fit_supervised, NaiveBayes, NbConfig};
use selfdecl::synth::{generate, SynthSpec};
use selfdecl::{Classifier, Corpus};

pub fn corpus(n: usize, d: usize) -> Corpus {
    generate(&SynthSpec {
        n,
        d,
        seed: 5,
        ..Default::default()
    })
    .expect("valid spec")
    .0
}

pub fn model(corpus: &Corpus, log_normal: bool) -> NaiveBayes {
    fit_supervised(
        corpus,
        &NbConfig {
            log_normal,
            ..Default::default()
        },
    )
    .expect("labeled corpus")
    .0
}

/// Model scores and true labels, as fed to calibration and ROC code.
pub fn scores_and_labels(n: usize) -> (Vec<f64>, Vec<u8>) {
    let c = corpus(n, 50);
    let scores = model(&c, false).score_all(c.rows()).expect("scorable rows");
    (scores, c.labels().iter().map(|&l| l as u8).collect())
}
