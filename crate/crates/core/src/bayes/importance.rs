use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_supervised, NbConfig};
use crate::data::{stratified_bootstrap, Corpus};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::stats::mean_std;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogOddsStat {
    pub mean: f64,
    pub std: f64,
}

/// Bootstrap spread of per-community log-odds: `rounds` class-stratified
/// resamples of the labeled rows, each refit with `cfg`.
pub fn feature_log_odds_dispersion(
    corpus: &Corpus,
    cfg: &NbConfig,
    rounds: usize,
    seed: u64,
) -> Result<Vec<LogOddsStat>> {
    if rounds < 2 {
        return Err(Error::arg(
            "log-odds dispersion needs at least 2 bootstrap rounds",
        ));
    }
    let labeled = corpus.labeled_only();
    let draws: Vec<Vec<f64>> = (0..rounds)
        .into_par_iter()
        .map(|b| {
            let sample = stratified_bootstrap(&labeled, derive_seed(seed, b as u64));
            let (model, _) = fit_supervised(&sample, cfg)?;
            model.feature_log_odds()
        })
        .collect::<Result<_>>()?;
    let d = corpus.d();
    Ok((0..d)
        .map(|j| {
            let col: Vec<f64> = draws.iter().map(|row| row[j]).collect();
            let (mean, std) = mean_std(&col);
            LogOddsStat { mean, std }
        })
        .collect())
}
