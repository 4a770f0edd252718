use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::protocol::{MetricReport, MetricStat};
use super::quant::QuantOutcome;

/// One model's row in a results table. A row whose protocol failed keeps
/// the error message instead of metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub model: String,
    pub metrics: BTreeMap<String, MetricStat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ReportRow {
    pub fn failed(model: impl Into<String>, error: impl ToString) -> Self {
        Self {
            model: model.into(),
            metrics: BTreeMap::new(),
            error: Some(error.to_string()),
        }
    }
}

impl From<&MetricReport> for ReportRow {
    fn from(r: &MetricReport) -> Self {
        let metrics =
            BTreeMap::from([("f1".to_string(), r.f1), ("roc_auc".to_string(), r.roc_auc)]);
        Self {
            model: r.model.clone(),
            metrics,
            error: None,
        }
    }
}

impl From<&QuantOutcome> for ReportRow {
    fn from(q: &QuantOutcome) -> Self {
        let metrics = BTreeMap::from([(
            "mae".to_string(),
            MetricStat {
                mean: q.mae,
                std: q.std,
            },
        )]);
        Self {
            model: format!("{} {}", q.model, q.method),
            metrics,
            error: None,
        }
    }
}

/// Models by metrics for one attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTable {
    pub title: String,
    pub attribute: Option<String>,
    pub rows: Vec<ReportRow>,
}
