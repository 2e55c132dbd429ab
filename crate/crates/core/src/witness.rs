//! Witness families: diagonal forms (scalar and `l_r`-valued), pinned
//! diagonals, Sylvester-Hadamard matrices and seeded random sign tensors.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exponents::ExtExp;
use crate::opnorm::VectorValuedOp;
use crate::tensor::{checked_len, CoefficientTensor};

fn weights_or_ones(n: usize, weights: Option<&[f64]>) -> Result<Vec<f64>> {
    match weights {
        None => Ok(vec![1.0; n]),
        Some(c) if c.len() == n => Ok(c.to_vec()),
        Some(c) => domain(format!("{} diagonal weights for n = {n}", c.len())),
    }
}

fn diagonal_tensor(rank: usize, c: &[f64]) -> Result<CoefficientTensor> {
    let n = c.len();
    if n == 0 {
        return domain("diagonal witness needs n >= 1");
    }
    let dims = vec![n; rank];
    let len = checked_len(&dims)?;
    let step = (len - 1) / (n - 1).max(1);
    let mut data = vec![0.0; len];
    for (j, &cj) in c.iter().enumerate() {
        data[j * step] = cj;
    }
    CoefficientTensor::from_real(dims, data)
}

/// `T[j, .., j] = c_j` on `m` axes of length `n` (`c` defaults to ones).
pub fn diagonal_witness(m: usize, n: usize, weights: Option<&[f64]>) -> Result<CoefficientTensor> {
    if m == 0 {
        return domain("arity must be positive");
    }
    diagonal_tensor(m, &weights_or_ones(n, weights)?)
}

/// `A_n(x^(1), .., x^(m)) = sum_j c_j x_j^(1) .. x_j^(m) e_j` with values in
/// `l_r^n`; stored as `T[j, .., j, j] = c_j` on `m + 1` axes.
pub fn diagonal_vector_witness(
    p: Vec<ExtExp>,
    n: usize,
    weights: Option<&[f64]>,
    r: ExtExp,
) -> Result<VectorValuedOp> {
    if p.is_empty() {
        return domain("arity must be positive");
    }
    let t = diagonal_tensor(p.len() + 1, &weights_or_ones(n, weights)?)?;
    VectorValuedOp::new(p, r, t)
}

/// Ones at `T[0, .., 0, j, .., j]`: the first `pins` indices are fixed to the
/// first coordinate and the remaining `m - pins` indices coincide.
pub fn pinned_diagonal_witness(m: usize, n: usize, pins: usize) -> Result<CoefficientTensor> {
    if pins == 0 || pins >= m {
        return domain(format!("pin count {pins} outside 1..={}", m.saturating_sub(1)));
    }
    if n == 0 {
        return domain("n must be positive");
    }
    CoefficientTensor::from_fn(vec![n; m], |ix| {
        let (pinned, free) = ix.split_at(pins);
        let on = pinned.iter().all(|&i| i == 0) && free.iter().all(|&i| i == free[0]);
        if on {
            1.0
        } else {
            0.0
        }
    })
}

/// Sylvester matrix `H_0 = [1]`, `H_{k+1} = [[H_k, H_k], [H_k, -H_k]]`.
pub fn hadamard_witness(k: u32) -> Result<CoefficientTensor> {
    if k > 13 {
        return Err(Error::Budget {
            what: "hadamard order 2^k",
            needed: 1u128 << (2 * k.min(60)),
            budget: crate::tensor::MAX_ENTRIES as u128,
        });
    }
    let n = 1usize << k;
    // entry (i, j) = (-1)^{popcount(i & j)}
    CoefficientTensor::from_fn(vec![n, n], |ix| {
        if (ix[0] & ix[1]).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    })
}

/// I.i.d. `+-1` entries from ChaCha8 seeded with `seed`: entry `i` (row-major)
/// is `-1` exactly when the top bit of the `i`-th `next_u32` output is set.
pub fn random_sign_tensor(dims: &[usize], seed: u64) -> Result<CoefficientTensor> {
    let len = checked_len(dims)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..len)
        .map(|_| if rng.next_u32() >> 31 == 1 { -1.0 } else { 1.0 })
        .collect();
    CoefficientTensor::from_real(dims.to_vec(), data)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Diagonal,
    PinnedDiagonal,
    Hadamard,
    RandomSign,
}

/// Family descriptor as it appears in experiment configs.
///
/// With `codomain_r` set, the diagonal family emits `l_r`-valued operators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyDescriptor {
    pub kind: FamilyKind,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pins: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codomain_r: Option<ExtExp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl FamilyDescriptor {
    pub fn new(kind: FamilyKind, m: usize) -> Self {
        FamilyDescriptor {
            kind,
            m,
            n: None,
            pins: None,
            seed: None,
            codomain_r: None,
            weights: None,
        }
    }

    pub fn is_random(&self) -> bool {
        self.kind == FamilyKind::RandomSign
    }

    pub fn is_vector_valued(&self) -> bool {
        self.codomain_r.is_some()
    }

    /// The member of size `n`; `seed` only affects random families and
    /// `p` only vector-valued ones (the input exponents of the operator).
    pub fn instance(&self, n: usize, seed: u64, p: &[ExtExp]) -> Result<Instance> {
        if n == 0 {
            return domain("n must be positive");
        }
        let weights = self.weights.as_deref();
        if let Some(r) = self.codomain_r {
            if self.kind != FamilyKind::Diagonal {
                return domain("only the diagonal family has a vector-valued mode");
            }
            if p.len() != self.m {
                return Err(Error::RankMismatch {
                    expected: self.m,
                    actual: p.len(),
                });
            }
            return Ok(Instance::Vector(diagonal_vector_witness(p.to_vec(), n, weights, r)?));
        }
        let t = match self.kind {
            FamilyKind::Diagonal => diagonal_witness(self.m, n, weights)?,
            FamilyKind::PinnedDiagonal => pinned_diagonal_witness(self.m, n, self.pins.unwrap_or(1))?,
            FamilyKind::Hadamard => {
                if self.m != 2 || !n.is_power_of_two() {
                    return domain(format!("hadamard family needs m = 2 and n a power of two, got m = {}, n = {n}", self.m));
                }
                hadamard_witness(n.trailing_zeros())?
            }
            FamilyKind::RandomSign => random_sign_tensor(&vec![n; self.m], seed)?,
        };
        Ok(Instance::Scalar(t))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instance {
    Scalar(CoefficientTensor),
    Vector(VectorValuedOp),
}
