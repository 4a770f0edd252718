//! Common interface over the fitted binary scorers (Naive Bayes, axis
//! baseline, majority) used by the quantification and evaluation code.

use rayon::prelude::*;

use crate::calibrate::IsotonicMap;
use crate::data::{ActivityVector, Corpus};
use crate::error::Result;

pub trait Classifier: Send + Sync {
    /// Class-1 score in [0, 1]; a calibrated probability when
    /// [`Classifier::is_calibrated`] holds.
    fn score(&self, x: &ActivityVector) -> Result<f64>;

    /// Hard decision; ties go to class 0.
    fn predict(&self, x: &ActivityVector) -> Result<u8> {
        Ok((self.score(x)? > 0.5) as u8)
    }

    fn is_calibrated(&self) -> bool {
        false
    }

    fn score_all(&self, rows: &[ActivityVector]) -> Result<Vec<f64>> {
        rows.par_iter().map(|x| self.score(x)).collect()
    }

    fn predict_all(&self, rows: &[ActivityVector]) -> Result<Vec<u8>> {
        rows.par_iter().map(|x| self.predict(x)).collect()
    }
}

impl<C: Classifier + ?Sized> Classifier for Box<C> {
    fn score(&self, x: &ActivityVector) -> Result<f64> {
        (**self).score(x)
    }

    fn predict(&self, x: &ActivityVector) -> Result<u8> {
        (**self).predict(x)
    }

    fn is_calibrated(&self) -> bool {
        (**self).is_calibrated()
    }
}

impl<C: Classifier + ?Sized> Classifier for &C {
    fn score(&self, x: &ActivityVector) -> Result<f64> {
        (**self).score(x)
    }

    fn predict(&self, x: &ActivityVector) -> Result<u8> {
        (**self).predict(x)
    }

    fn is_calibrated(&self) -> bool {
        (**self).is_calibrated()
    }
}

/// Something that turns a training corpus into a [`Classifier`].
pub trait Learner: Sync {
    fn name(&self) -> String;

    fn fit(&self, train: &Corpus) -> Result<Box<dyn Classifier>>;
}

impl<L: Learner + ?Sized> Learner for Box<L> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn fit(&self, train: &Corpus) -> Result<Box<dyn Classifier>> {
        (**self).fit(train)
    }
}

/// Any classifier with an isotonic map applied to its scores. Hard
/// decisions are those of the wrapped classifier.
pub struct Calibrated<C> {
    pub inner: C,
    pub map: IsotonicMap,
}

impl<C: Classifier> Classifier for Calibrated<C> {
    fn score(&self, x: &ActivityVector) -> Result<f64> {
        Ok(self.map.apply_one(self.inner.score(x)?))
    }

    fn predict(&self, x: &ActivityVector) -> Result<u8> {
        self.inner.predict(x)
    }

    fn is_calibrated(&self) -> bool {
        true
    }
}
