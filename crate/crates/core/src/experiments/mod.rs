//! End-to-end experiments: ratio tables against the mixed inequality,
//! growth-rate probes over witness families, and the exhaustive search for
//! the bilinear `(l_2, l_1)` constant over sign matrices.

mod admissibility;
mod config;
mod probe;
mod report;
mod search;
mod verify;

pub use admissibility::{admissibility_report, AdmissibilityReport};
pub use config::{ExperimentConfig, OutputFormat, SpecConfig};
pub use probe::{fit_loglog_slope, probe_optimality, GrowthPoint, GrowthReport, GrowthRow, ProbeOptions, Verdict};
pub use report::{format_sig12, growth_csv, verify_csv};
pub use search::{search_constant, ConstantSearchReport};
pub use verify::{scalar_mixed_spec, verify_inequality, RatioRow, VerifyReport, ORLICZ_TOLERANCE};
