use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::exponents::{conjugate, orl_admissible, Admissibility, ExponentTuple, ExtExp, ProblemSpec};
use crate::opnorm::{opnorm_auto, Method, OpNormOptions};
use crate::parallel;
use crate::tensor::{CoefficientTensor, MixedNormSpec};

/// Absolute slack allowed above `sqrt(2) * ||A||` in the bilinear `l_inf` case.
pub const ORLICZ_TOLERANCE: f64 = 1e-9;

/// Mixed-norm spec of the scalar inequality: order `sigma`, exponents
/// `(q_1, .., q_{m-1}, p_sigma(m)*)`.
pub fn scalar_mixed_spec(spec: &ProblemSpec, q: &ExponentTuple) -> Result<MixedNormSpec> {
    if q.len() != spec.m() - 1 {
        return domain(format!("expected {} exponents, got {}", spec.m() - 1, q.len()));
    }
    let last = spec.p()[spec.sigma()[spec.m() - 1]];
    let mut exps = q.clone();
    exps.push(conjugate(last)?);
    MixedNormSpec::new(spec.sigma().to_vec(), exps)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioRow {
    pub index: usize,
    pub dims: Vec<usize>,
    pub mixed_norm: f64,
    pub opnorm: f64,
    pub opnorm_exact: bool,
    pub method: Method,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub admissibility: Admissibility,
    pub rows: Vec<RatioRow>,
    pub max_ratio: f64,
    /// Whether the `sqrt(2)` bound was asserted on the exact rows.
    pub orlicz_bound_checked: bool,
}

/// Ratio of the mixed norm to the operator norm for each instance.
///
/// For the real bilinear `l_inf` problem with `q_1 >= 2`, every row with an
/// exact operator norm must satisfy `mixed <= sqrt(2) ||A|| + 1e-9`; a
/// violation is returned as [`Error::HardAssertion`].
pub fn verify_inequality(
    spec: &ProblemSpec,
    q: &ExponentTuple,
    instances: &[CoefficientTensor],
    opts: &OpNormOptions,
) -> Result<VerifyReport> {
    let admissibility = orl_admissible(spec, q)?;
    let mixed_spec = scalar_mixed_spec(spec, q)?;
    if let Some(t) = instances.iter().find(|t| t.rank() != spec.m()) {
        return Err(Error::RankMismatch {
            expected: spec.m(),
            actual: t.rank(),
        });
    }
    let results = parallel::map_ordered(instances, |t| -> Result<(f64, crate::OpNormEstimate)> {
        Ok((t.mixed_norm(&mixed_spec)?, opnorm_auto(t, spec.p(), opts)?))
    });
    let mut rows = Vec::with_capacity(instances.len());
    for (index, (t, res)) in instances.iter().zip(results).enumerate() {
        let (mixed, est) = res?;
        rows.push(RatioRow {
            index,
            dims: t.dims().to_vec(),
            mixed_norm: mixed,
            opnorm: est.value,
            opnorm_exact: est.exact,
            method: est.method,
            ratio: ratio(mixed, est.value),
        });
    }
    let check = spec.is_orlicz() && q.entries()[0] >= ExtExp::TWO;
    if check {
        let bound = std::f64::consts::SQRT_2;
        if let Some(row) = rows
            .iter()
            .find(|r| r.opnorm_exact && r.mixed_norm > bound * r.opnorm + ORLICZ_TOLERANCE)
        {
            return Err(Error::HardAssertion(format!(
                "instance {}: mixed norm {} exceeds sqrt(2) * {}",
                row.index, row.mixed_norm, row.opnorm
            )));
        }
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(VerifyReport {
        admissibility,
        rows,
        max_ratio,
        orlicz_bound_checked: check,
    })
}

pub(crate) fn ratio(mixed: f64, opnorm: f64) -> f64 {
    if opnorm == 0.0 {
        // only the zero form has norm 0, and its mixed norm is 0 too
        0.0
    } else {
        mixed / opnorm
    }
}
