//! Isotonic calibration (pool-adjacent-violators) and reliability reporting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Monotone score-to-probability map.
///
/// Pooled blocks map to a constant; between adjacent blocks the map
/// interpolates linearly. Inputs outside the breakpoint range are clamped
/// to the end values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IsoRepr", into = "IsoRepr")]
pub struct IsotonicMap {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

const ISO_SCHEMA: &str = "iso/1";

#[derive(Serialize, Deserialize)]
struct IsoRepr {
    schema: String,
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<IsoRepr> for IsotonicMap {
    type Error = Error;

    fn try_from(r: IsoRepr) -> Result<Self> {
        if r.schema != ISO_SCHEMA {
            return Err(Error::ModelFormat(format!(
                "expected schema {ISO_SCHEMA}, found {}",
                r.schema
            )));
        }
        IsotonicMap::new(r.breakpoints, r.values)
    }
}

impl From<IsotonicMap> for IsoRepr {
    fn from(m: IsotonicMap) -> Self {
        IsoRepr {
            schema: ISO_SCHEMA.into(),
            breakpoints: m.breakpoints,
            values: m.values,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Block {
    sum: f64,
    weight: f64,
    lo: f64,
    hi: f64,
}

impl Block {
    fn mean(&self) -> f64 {
        self.sum / self.weight
    }
}

impl IsotonicMap {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::data(
                "isotonic map needs matching, non-empty breakpoints and values",
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::data(
                "isotonic breakpoints must be strictly increasing",
            ));
        }
        if values.windows(2).any(|w| w[0] > w[1]) || values.iter().any(|v| !(0.0..=1.0).contains(v))
        {
            return Err(Error::data(
                "isotonic values must be non-decreasing within [0, 1]",
            ));
        }
        Ok(Self {
            breakpoints,
            values,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn apply_one(&self, s: f64) -> f64 {
        let bp = &self.breakpoints;
        let last = bp.len() - 1;
        if s <= bp[0] {
            return self.values[0];
        }
        if s >= bp[last] {
            return self.values[last];
        }
        // bp[j] <= s < bp[j + 1]
        let j = bp.partition_point(|&b| b <= s) - 1;
        let t = (s - bp[j]) / (bp[j + 1] - bp[j]);
        let v = self.values[j] + t * (self.values[j + 1] - self.values[j]);
        v.clamp(self.values[j], self.values[j + 1])
    }

    pub fn apply(&self, scores: &[f64]) -> Vec<f64> {
        scores.iter().map(|&s| self.apply_one(s)).collect()
    }
}

/// Least-squares monotone fit of binary labels against scores.
pub fn fit_isotonic(scores: &[f64], labels: &[u8]) -> Result<IsotonicMap> {
    if scores.len() != labels.len() {
        return Err(Error::arg("scores and labels differ in length"));
    }
    if scores.len() < 2 {
        return Err(Error::data("isotonic fit needs at least 2 samples"));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::data("isotonic fit needs finite scores"));
    }
    let positives = labels.iter().filter(|&&l| l == 1).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::data("isotonic fit needs both classes"));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // tied scores always share a value, so they enter as one block
    let mut groups: Vec<Block> = Vec::new();
    for &i in &order {
        let (x, y) = (scores[i], labels[i] as f64);
        match groups.last_mut() {
            Some(g) if g.hi == x => {
                g.sum += y;
                g.weight += 1.0;
            }
            _ => groups.push(Block {
                sum: y,
                weight: 1.0,
                lo: x,
                hi: x,
            }),
        }
    }

    let mut stack: Vec<Block> = Vec::with_capacity(groups.len());
    for g in groups {
        stack.push(g);
        while stack.len() >= 2 {
            let n = stack.len();
            if stack[n - 2].mean() < stack[n - 1].mean() {
                break;
            }
            let top = stack.pop().expect("len >= 2");
            let prev = stack.last_mut().expect("len >= 1");
            prev.sum += top.sum;
            prev.weight += top.weight;
            prev.hi = top.hi;
        }
    }

    let mut breakpoints = Vec::with_capacity(2 * stack.len());
    let mut values = Vec::with_capacity(2 * stack.len());
    for b in &stack {
        let v = b.mean().clamp(0.0, 1.0);
        breakpoints.push(b.lo);
        values.push(v);
        if b.hi > b.lo {
            breakpoints.push(b.hi);
            values.push(v);
        }
    }
    IsotonicMap::new(breakpoints, values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub mean_score: Option<f64>,
    pub positive_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityReport {
    pub bins: Vec<ReliabilityBin>,
    /// Count-weighted mean of |mean score − positive rate| over non-empty bins.
    pub ece: f64,
}

/// Equal-width reliability curve on [0, 1].
pub fn reliability(scores: &[f64], labels: &[u8], n_bins: usize) -> Result<ReliabilityReport> {
    if n_bins < 2 {
        return Err(Error::arg("reliability needs at least 2 bins"));
    }
    if scores.len() != labels.len() {
        return Err(Error::arg("scores and labels differ in length"));
    }
    let mut sums = vec![(0usize, 0.0f64, 0.0f64); n_bins];
    for (&s, &y) in scores.iter().zip(labels) {
        let s = s.clamp(0.0, 1.0);
        let b = ((s * n_bins as f64) as usize).min(n_bins - 1);
        sums[b].0 += 1;
        sums[b].1 += s;
        sums[b].2 += y as f64;
    }
    let n = scores.len().max(1) as f64;
    let mut ece = 0.0;
    let bins = sums
        .iter()
        .enumerate()
        .map(|(b, &(count, s, y))| {
            let (mean_score, positive_rate) = if count > 0 {
                let (m, r) = (s / count as f64, y / count as f64);
                ece += count as f64 / n * (m - r).abs();
                (Some(m), Some(r))
            } else {
                (None, None)
            };
            ReliabilityBin {
                lo: b as f64 / n_bins as f64,
                hi: (b + 1) as f64 / n_bins as f64,
                count,
                mean_score,
                positive_rate,
            }
        })
        .collect();
    Ok(ReliabilityReport { bins, ece })
}
