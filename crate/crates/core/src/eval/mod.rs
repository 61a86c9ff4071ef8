//! Round-trip evaluation: codec reconstructions, pluggable MOS scoring,
//! per-language aggregation and the comparison table and figure.

mod aggregate;
mod harness;
mod report;
mod scorer;

pub use aggregate::{aggregate, LanguageReport, ALL};
pub use harness::{evaluate, roundtrip, ClipScore, EvalRun, RECON_DIR, SIDECAR};
pub use report::{render_figure, render_report, render_table, ModelSummary};
pub use scorer::{stub_score, ScorerSpec, MOS_RANGE, PATH_PLACEHOLDER};
