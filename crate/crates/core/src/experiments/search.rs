use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::exponents::ExtExp;
use crate::parallel;
use crate::tensor::{lq_norm, CoefficientTensor};

/// Best ratio `mixed_(2,1)(A) / ||A||` over `n x n` sign matrices.
///
/// Sign matrices are not known to be extremal at general `n`, so
/// `best_ratio` is a certified lower bound on the size-`n` constant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantSearchReport {
    pub n: usize,
    pub reduce_symmetry: bool,
    pub classes: u64,
    pub best_ratio: f64,
    pub best_mixed_norm: f64,
    pub best_opnorm: f64,
    pub argmax: CoefficientTensor,
    pub elapsed_secs: Option<f64>,
}

const CHUNK: u64 = 1 << 12;

fn sign_matrix(n: usize, class: u64, reduce: bool) -> Vec<i64> {
    let mut a = vec![1i64; n * n];
    if reduce {
        for i in 1..n {
            for j in 1..n {
                let bit = (i - 1) * (n - 1) + (j - 1);
                if class >> bit & 1 == 1 {
                    a[i * n + j] = -1;
                }
            }
        }
    } else {
        for (b, x) in a.iter_mut().enumerate() {
            if class >> b & 1 == 1 {
                *x = -1;
            }
        }
    }
    a
}

/// `max_y sum_i |sum_j a_ij y_j|` over sign vectors with `y_0 = +1`, in Gray order.
fn sign_opnorm(a: &[i64], n: usize) -> i64 {
    let mut y = vec![1i64; n];
    let mut v: Vec<i64> = a.chunks_exact(n).map(|row| row.iter().sum()).collect();
    let mut best: i64 = v.iter().map(|x| x.abs()).sum();
    let total = 1u64 << (n - 1);
    for step in 1..total {
        let j = step.trailing_zeros() as usize + 1;
        for (i, vi) in v.iter_mut().enumerate() {
            *vi -= 2 * a[i * n + j] * y[j];
        }
        y[j] = -y[j];
        best = best.max(v.iter().map(|x| x.abs()).sum());
    }
    best
}

fn mixed_2_1(a: &[i64], n: usize) -> f64 {
    let rows: Vec<f64> = a
        .chunks_exact(n)
        .map(|row| row.iter().map(|x| x.abs() as f64).sum())
        .collect();
    lq_norm(&rows, ExtExp::TWO)
}

/// Exhaustive search over real `n x n` sign matrices.
///
/// With `reduce_symmetry`, the first row and column are fixed to `+1`: row
/// and column negations preserve both norms, so each of the
/// `2^{(n-1)^2}` classes is visited once.
pub fn search_constant(n: usize, reduce_symmetry: bool, budget: u128) -> Result<ConstantSearchReport> {
    if n == 0 {
        return domain("n must be positive");
    }
    #[cfg(not(target_arch = "wasm32"))]
    let started = std::time::Instant::now();
    let cells = if reduce_symmetry { (n - 1) * (n - 1) } else { n * n };
    let bits = cells + n - 1;
    let needed = if bits < 100 { 1u128 << bits } else { u128::MAX };
    if needed > budget || cells >= 64 {
        return Err(Error::Budget {
            what: "sign-matrix classes x sign vectors",
            needed,
            budget,
        });
    }
    let classes = 1u64 << cells;
    let chunks = classes.div_ceil(CHUNK);
    let best_per_chunk = parallel::map_range(chunks as usize, |c| {
        let lo = c as u64 * CHUNK;
        let hi = (lo + CHUNK).min(classes);
        let mut best = (0.0f64, lo, 0i64, 0.0f64);
        for class in lo..hi {
            let a = sign_matrix(n, class, reduce_symmetry);
            let op = sign_opnorm(&a, n);
            let mixed = mixed_2_1(&a, n);
            let r = mixed / op as f64;
            if r > best.0 {
                best = (r, class, op, mixed);
            }
        }
        best
    });
    let (best_ratio, class, op, mixed) = best_per_chunk
        .into_iter()
        .fold((0.0, 0, 0, 0.0), |b, c| if c.0 > b.0 { c } else { b });
    let argmax = CoefficientTensor::from_real(
        vec![n, n],
        sign_matrix(n, class, reduce_symmetry).iter().map(|&x| x as f64).collect(),
    )?;
    #[cfg(not(target_arch = "wasm32"))]
    let elapsed_secs = Some(started.elapsed().as_secs_f64());
    #[cfg(target_arch = "wasm32")]
    let elapsed_secs = None;
    Ok(ConstantSearchReport {
        n,
        reduce_symmetry,
        classes,
        best_ratio,
        best_mixed_norm: mixed,
        best_opnorm: op as f64,
        argmax,
        elapsed_secs,
    })
}
