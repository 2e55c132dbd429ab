use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exponents::{ExponentTuple, ExtExp, ProblemSpec};
use crate::opnorm::{
    diagonal_coefficients, enumeration_applies, lift_vector_valued, opnorm_auto, Method, OpNormOptions,
};
use crate::parallel;
use crate::tensor::{Field, MixedNormSpec};
use crate::witness::{FamilyDescriptor, Instance};

use super::verify::{ratio, scalar_mixed_spec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Bounded,
    Growing,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Bounded => "bounded",
            Verdict::Growing => "growing",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeOptions {
    pub opnorm: OpNormOptions,
    /// Log-log slope above which the ratio counts as growing.
    pub slope_threshold: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            opnorm: OpNormOptions::default(),
            slope_threshold: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthRow {
    pub n: usize,
    pub seed: u64,
    pub mixed_norm: f64,
    pub opnorm: f64,
    pub opnorm_exact: bool,
    pub method: Method,
    pub ratio: f64,
}

/// Median ratio over seeds at one size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthPoint {
    pub n: usize,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub rows: Vec<GrowthRow>,
    pub points: Vec<GrowthPoint>,
    pub slope: f64,
    pub r_squared: f64,
    pub verdict: Verdict,
    pub warnings: Vec<String>,
}

/// Least-squares slope and `r^2` of `ln y` against `ln x`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return domain("slope fit needs at least two points");
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return domain("slope fit needs positive sizes and ratios");
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return domain("slope fit needs at least two distinct sizes");
    }
    let slope = sxy / sxx;
    let ss_tot: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = logs
        .iter()
        .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
        .sum();
    let r2 = if ss_tot <= f64::EPSILON * f64::EPSILON { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok((slope, r2))
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        0.5 * (xs[k / 2 - 1] + xs[k / 2])
    }
}

// splitmix64 finalizer, so each (seed, n) pair gets its own stream
fn instance_seed(seed: u64, n: usize) -> u64 {
    let mut z = seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Measures how the ratio mixed-norm / operator-norm scales with `n` over a
/// witness family and classifies it as bounded or growing.
///
/// Scalar families use the mixed spec of `spec` with exponents
/// `(q_1, .., q_{m-1}, p_sigma(m)*)`. Vector-valued families (a codomain
/// `l_r`) take `q = (q_1, .., q_m)` in natural order, aggregate the codomain
/// axis innermost with `l_r`, and use the norm of the lifted scalar form.
pub fn probe_optimality(
    spec: &ProblemSpec,
    q: &ExponentTuple,
    family: &FamilyDescriptor,
    n_range: &[usize],
    seeds: &[u64],
    opts: &ProbeOptions,
) -> Result<GrowthReport> {
    if n_range.len() < 4 {
        return domain(format!("growth probe needs at least 4 sizes, got {}", n_range.len()));
    }
    let mut sizes = n_range.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() != n_range.len() {
        return domain("sizes must be distinct");
    }
    if family.m != spec.m() {
        return Err(Error::RankMismatch {
            expected: spec.m(),
            actual: family.m,
        });
    }
    let seeds: Vec<u64> = match (family.is_random(), seeds.is_empty()) {
        (true, true) => return domain("random families need at least one seed"),
        (true, false) => seeds.to_vec(),
        (false, _) => vec![seeds.first().copied().unwrap_or(0)],
    };
    let mixed_spec = if family.is_vector_valued() {
        if q.len() != spec.m() {
            return domain(format!("vector-valued probe needs q_1..q_{}, got {} exponents", spec.m(), q.len()));
        }
        let mut exps = q.clone();
        exps.push(family.codomain_r.expect("vector-valued"));
        MixedNormSpec::natural(exps.entries().to_vec())?
    } else {
        scalar_mixed_spec(spec, q)?
    };

    let mut warnings = Vec::new();
    // sizes whose l_inf operator norm cannot be enumerated exactly are dropped
    let needs_enumeration = !family.is_vector_valued()
        && spec.p().iter().all(ExtExp::is_infinite)
        && spec.field() == Field::Real;
    if needs_enumeration {
        let probe_seed = instance_seed(seeds[0], 0);
        let mut keep = sizes.len();
        for (i, &n) in sizes.iter().enumerate() {
            if let Instance::Scalar(t) = family.instance(n, probe_seed, spec.p())? {
                if diagonal_coefficients(&t).is_none() && !enumeration_applies(&t, spec.p(), opts.opnorm.budget) {
                    keep = i;
                    break;
                }
            }
        }
        if keep < sizes.len() {
            let msg = format!(
                "enumeration budget {} exceeded at n = {}; truncating sizes to {:?}",
                opts.opnorm.budget,
                sizes[keep],
                &sizes[..keep]
            );
            log::warn!("{msg}");
            warnings.push(msg);
            sizes.truncate(keep);
        }
        if sizes.len() < 2 {
            return Err(Error::Budget {
                what: "sizes left after truncation",
                needed: 2,
                budget: sizes.len() as u128,
            });
        }
    }

    let jobs: Vec<(usize, u64)> = sizes
        .iter()
        .flat_map(|&n| seeds.iter().map(move |&s| (n, s)))
        .collect();
    let results = parallel::map_ordered(&jobs, |&(n, seed)| -> Result<GrowthRow> {
        let instance = family.instance(n, instance_seed(seed, n), spec.p())?;
        let (mixed, est) = match instance {
            Instance::Scalar(t) => (t.mixed_norm(&mixed_spec)?, opnorm_auto(&t, spec.p(), &opts.opnorm)?),
            Instance::Vector(v) => {
                let (lt, lp) = lift_vector_valued(&v)?;
                (v.tensor().mixed_norm(&mixed_spec)?, opnorm_auto(&lt, &lp, &opts.opnorm)?)
            }
        };
        Ok(GrowthRow {
            n,
            seed,
            mixed_norm: mixed,
            opnorm: est.value,
            opnorm_exact: est.exact,
            method: est.method,
            ratio: ratio(mixed, est.value),
        })
    });
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    let points: Vec<GrowthPoint> = sizes
        .iter()
        .map(|&n| GrowthPoint {
            n,
            ratio: median(rows.iter().filter(|r| r.n == n).map(|r| r.ratio).collect()),
        })
        .collect();
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.n as f64, p.ratio)).collect();
    let (slope, r_squared) = fit_loglog_slope(&xy)?;
    Ok(GrowthReport {
        rows,
        points,
        slope,
        r_squared,
        verdict: if slope > opts.slope_threshold { Verdict::Growing } else { Verdict::Bounded },
        warnings,
    })
}
