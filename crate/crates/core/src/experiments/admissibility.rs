use serde::Serialize;

use crate::error::Result;
use crate::exponents::{dual_space_cotype, orl_thresholds, ExponentTuple, ExtExp, ProblemSpec};

/// Thresholds of a problem, rendered both exactly and for humans.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub m: usize,
    pub p: Vec<ExtExp>,
    /// 1-based summation order.
    pub sigma: Vec<usize>,
    pub inner: ExtExp,
    pub mu: ExtExp,
    pub dual_cotype: ExtExp,
    /// Smallest admissible `(q_1, .., q_{m-1})`.
    pub thresholds: ExponentTuple,
    pub degenerate: bool,
    pub summary: String,
}

pub fn admissibility_report(spec: &ProblemSpec) -> Result<AdmissibilityReport> {
    let th = orl_thresholds(spec)?;
    let last = spec.p()[spec.sigma()[spec.m() - 1]];
    let degenerate = th.mu == ExtExp::ONE;
    let mut summary = format!("minimal q = {}, inner exponent {}", th.thresholds, th.inner);
    if degenerate {
        summary.push_str(" (degenerate: p_sigma(m) = 1 forces every q_i = inf)");
    }
    Ok(AdmissibilityReport {
        m: spec.m(),
        p: spec.p().to_vec(),
        sigma: spec.sigma().iter().map(|a| a + 1).collect(),
        inner: th.inner,
        mu: th.mu,
        dual_cotype: dual_space_cotype(last)?,
        thresholds: th.thresholds,
        degenerate,
        summary,
    })
}
