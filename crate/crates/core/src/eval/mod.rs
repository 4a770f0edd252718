//! Metrics, resampling protocols and report shapes.

mod curve;
mod metrics;
mod protocol;
mod quant;
mod report;

pub use curve::{CurveData, CurveKind, CurvePoint};
pub use metrics::{f1, roc_auc, roc_curve};
pub use protocol::{
    bootstrap_eval, cv_roc, robustness_sweep, score_labeled, BootstrapSpec, DistantLearner,
    Majority, MajorityLearner, MetricReport, MetricStat, Scored,
};
pub use quant::{learning_curve, run_quant_protocol, QuantOutcome, QuantProtocol};
pub use report::{ReportRow, ReportTable};
