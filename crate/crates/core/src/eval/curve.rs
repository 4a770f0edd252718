use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calibrate::ReliabilityReport;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Roc,
    Learning,
    Calibration,
    Robustness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    /// `None` marks a point with nothing to measure.
    pub y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_std: Option<f64>,
    /// Fraction of rows kept, for robustness sweeps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retained: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveData {
    pub kind: CurveKind,
    pub model: String,
    pub points: Vec<CurvePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auc: Option<f64>,
}

impl CurveData {
    pub fn from_xy(kind: CurveKind, model: impl Into<String>, xy: &[(f64, f64)]) -> Self {
        Self {
            kind,
            model: model.into(),
            points: xy
                .iter()
                .map(|&(x, y)| CurvePoint {
                    x,
                    y: Some(y),
                    y_std: None,
                    retained: None,
                })
                .collect(),
            auc: None,
        }
    }

    /// Reliability curve over the non-empty bins.
    pub fn from_reliability(model: impl Into<String>, r: &ReliabilityReport) -> Self {
        let points = r
            .bins
            .iter()
            .filter_map(|b| match (b.mean_score, b.positive_rate) {
                (Some(x), Some(y)) => Some(CurvePoint {
                    x,
                    y: Some(y),
                    y_std: None,
                    retained: None,
                }),
                _ => None,
            })
            .collect();
        Self {
            kind: CurveKind::Calibration,
            model: model.into(),
            points,
            auc: None,
        }
    }

    /// `x,y,y_std` rows; missing values are left empty.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        let mut out = String::from("x,y,y_std\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{}", p.x, opt(p.y), opt(p.y_std));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}
