//! Dense coefficient tensors and nested mixed `l_q` norms.
//!
//! A tensor of rank `m` with dims `(n_1, .., n_m)` stores the coefficients
//! `A(e_{j_1}, .., e_{j_m})` in row-major order (last axis contiguous).

use std::borrow::Cow;
use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Error, Result};
use crate::exponents::{check_permutation, ExponentTuple, ExtExp};
use crate::scalar::Scalar;

/// Largest number of stored entries a tensor may have.
pub const MAX_ENTRIES: usize = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Entries {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTensor {
    dims: Vec<usize>,
    entries: Entries,
}

pub(crate) fn checked_len(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return domain("tensor rank must be at least 1");
    }
    if let Some(k) = dims.iter().position(|&n| n == 0) {
        return domain(format!("axis {k} has length 0"));
    }
    let mut len: u128 = 1;
    for &n in dims {
        len = len.saturating_mul(n as u128);
    }
    if len > MAX_ENTRIES as u128 {
        return Err(Error::Budget {
            what: "tensor entries",
            needed: len,
            budget: MAX_ENTRIES as u128,
        });
    }
    Ok(len as usize)
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

impl CoefficientTensor {
    pub fn from_real(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        Self::build(dims, Entries::Real(data))
    }

    pub fn from_complex(dims: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        Self::build(dims, Entries::Complex(data))
    }

    fn build(dims: Vec<usize>, entries: Entries) -> Result<Self> {
        let len = checked_len(&dims)?;
        let (actual, finite) = match &entries {
            Entries::Real(d) => (d.len(), d.iter().all(|x| x.is_finite())),
            Entries::Complex(d) => (d.len(), d.iter().all(|z| Scalar::is_finite(*z))),
        };
        if actual != len {
            return domain(format!("dims {dims:?} need {len} entries, got {actual}"));
        }
        if !finite {
            return domain("tensor entries must be finite");
        }
        Ok(CoefficientTensor { dims, entries })
    }

    pub fn zeros(dims: Vec<usize>, field: Field) -> Result<Self> {
        let len = checked_len(&dims)?;
        let entries = match field {
            Field::Real => Entries::Real(vec![0.0; len]),
            Field::Complex => Entries::Complex(vec![Complex64::new(0.0, 0.0); len]),
        };
        Ok(CoefficientTensor { dims, entries })
    }

    /// Real tensor with entry `f(index)` at each multi-index.
    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len = checked_len(&dims)?;
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0; dims.len()];
        for _ in 0..len {
            data.push(f(&idx));
            advance(&mut idx, &dims);
        }
        Self::from_real(dims, data)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(vec![n, n], |ix| if ix[0] == ix[1] { 1.0 } else { 0.0 })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        match &self.entries {
            Entries::Real(d) => d.len(),
            Entries::Complex(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn field(&self) -> Field {
        match self.entries {
            Entries::Real(_) => Field::Real,
            Entries::Complex(_) => Field::Complex,
        }
    }

    pub fn entries(&self) -> &Entries {
        &self.entries
    }

    pub fn real_entries(&self) -> Option<&[f64]> {
        match &self.entries {
            Entries::Real(d) => Some(d),
            Entries::Complex(_) => None,
        }
    }

    pub fn complex_entries(&self) -> Cow<'_, [Complex64]> {
        match &self.entries {
            Entries::Real(d) => Cow::Owned(d.iter().map(|&x| Complex64::new(x, 0.0)).collect()),
            Entries::Complex(d) => Cow::Borrowed(d),
        }
    }

    pub fn abs_entries(&self) -> Vec<f64> {
        match &self.entries {
            Entries::Real(d) => d.iter().map(|x| x.abs()).collect(),
            Entries::Complex(d) => d.iter().map(|z| z.norm()).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.abs_entries().into_iter().fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.max_abs() == 0.0
    }

    pub fn offset(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.rank() {
            return Err(Error::RankMismatch {
                expected: self.rank(),
                actual: index.len(),
            });
        }
        let mut off = 0;
        for (k, (&i, &n)) in index.iter().zip(&self.dims).enumerate() {
            if i >= n {
                return Err(Error::Index(format!("index {i} on axis {k} of length {n}")));
            }
            off = off * n + i;
        }
        Ok(off)
    }

    pub fn get(&self, index: &[usize]) -> Result<Complex64> {
        let off = self.offset(index)?;
        Ok(match &self.entries {
            Entries::Real(d) => Complex64::new(d[off], 0.0),
            Entries::Complex(d) => d[off],
        })
    }

    pub fn scale(&self, alpha: f64) -> Self {
        let entries = match &self.entries {
            Entries::Real(d) => Entries::Real(d.iter().map(|x| x * alpha).collect()),
            Entries::Complex(d) => Entries::Complex(d.iter().map(|z| z * alpha).collect()),
        };
        CoefficientTensor {
            dims: self.dims.clone(),
            entries,
        }
    }

    /// Places `self` at the origin of a zero tensor with larger dims.
    pub fn embed(&self, dims: &[usize]) -> Result<Self> {
        if dims.len() != self.rank() {
            return Err(Error::RankMismatch {
                expected: self.rank(),
                actual: dims.len(),
            });
        }
        if let Some(k) = (0..dims.len()).find(|&k| dims[k] < self.dims[k]) {
            return Err(Error::Index(format!(
                "cannot embed axis {k} of length {} into length {}",
                self.dims[k], dims[k]
            )));
        }
        let mut out = Self::zeros(dims.to_vec(), self.field())?;
        let target = strides(dims);
        let mut idx = vec![0; self.rank()];
        for src in 0..self.len() {
            let dst: usize = idx.iter().zip(&target).map(|(i, s)| i * s).sum();
            match (&mut out.entries, &self.entries) {
                (Entries::Real(o), Entries::Real(s)) => o[dst] = s[src],
                (Entries::Complex(o), Entries::Complex(s)) => o[dst] = s[src],
                _ => unreachable!("embedding keeps the field"),
            }
            advance(&mut idx, &self.dims);
        }
        Ok(out)
    }

    /// Sub-block with the given index range on every axis.
    pub fn slice(&self, ranges: &[Range<usize>]) -> Result<Self> {
        if ranges.len() != self.rank() {
            return Err(Error::RankMismatch {
                expected: self.rank(),
                actual: ranges.len(),
            });
        }
        for (k, r) in ranges.iter().enumerate() {
            if r.start >= r.end || r.end > self.dims[k] {
                return Err(Error::Index(format!(
                    "range {r:?} on axis {k} of length {}",
                    self.dims[k]
                )));
            }
        }
        let dims: Vec<usize> = ranges.iter().map(|r| r.end - r.start).collect();
        let src_strides = strides(&self.dims);
        let len = checked_len(&dims)?;
        let mut idx = vec![0; dims.len()];
        let mut offsets = Vec::with_capacity(len);
        for _ in 0..len {
            offsets.push(
                idx.iter()
                    .zip(ranges)
                    .zip(&src_strides)
                    .map(|((i, r), s)| (i + r.start) * s)
                    .sum::<usize>(),
            );
            advance(&mut idx, &dims);
        }
        let entries = match &self.entries {
            Entries::Real(d) => Entries::Real(offsets.iter().map(|&o| d[o]).collect()),
            Entries::Complex(d) => Entries::Complex(offsets.iter().map(|&o| d[o]).collect()),
        };
        Ok(CoefficientTensor { dims, entries })
    }

    /// Nested mixed norm, see [`MixedNormSpec`].
    pub fn mixed_norm(&self, spec: &MixedNormSpec) -> Result<f64> {
        if spec.order.len() != self.rank() {
            return Err(Error::RankMismatch {
                expected: self.rank(),
                actual: spec.order.len(),
            });
        }
        let (mut data, mut dims) = permute_axes(&self.abs_entries(), &self.dims, &spec.order);
        for exp in spec.exps.entries().iter().rev() {
            let inner = dims.pop().expect("one axis per exponent");
            data = data.chunks_exact(inner).map(|block| lq_norm(block, *exp)).collect();
        }
        Ok(data[0])
    }

    /// `l_q` norm of all entries flattened.
    pub fn flat_norm(&self, q: ExtExp) -> f64 {
        lq_norm(&self.abs_entries(), q)
    }
}

fn advance(idx: &mut [usize], dims: &[usize]) {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < dims[k] {
            return;
        }
        idx[k] = 0;
    }
}

/// Reorders axes so that output axis `k` is input axis `order[k]`.
pub(crate) fn permute_axes<T: Copy>(data: &[T], dims: &[usize], order: &[usize]) -> (Vec<T>, Vec<usize>) {
    let new_dims: Vec<usize> = order.iter().map(|&a| dims[a]).collect();
    if order.iter().enumerate().all(|(k, &a)| k == a) {
        return (data.to_vec(), new_dims);
    }
    let src = strides(dims);
    let src_in_order: Vec<usize> = order.iter().map(|&a| src[a]).collect();
    let mut out = Vec::with_capacity(data.len());
    let mut idx = vec![0; dims.len()];
    for _ in 0..data.len() {
        let off: usize = idx.iter().zip(&src_in_order).map(|(i, s)| i * s).sum();
        out.push(data[off]);
        advance(&mut idx, &new_dims);
    }
    (out, new_dims)
}

/// `(sum |x|^q)^{1/q}` of nonnegative values, the maximum for `q = inf`.
/// Values are rescaled by their maximum before taking powers.
pub fn lq_norm(xs: &[f64], q: ExtExp) -> f64 {
    let max = xs.iter().copied().fold(0.0, f64::max);
    if q.is_infinite() || max == 0.0 {
        return max;
    }
    if q == ExtExp::ONE {
        return xs.iter().sum();
    }
    let qf = q.to_f64();
    let s: f64 = if q == ExtExp::TWO {
        xs.iter().map(|x| (x / max) * (x / max)).sum()
    } else {
        xs.iter().map(|x| (x / max).powf(qf)).sum()
    };
    max * s.powf(q.recip_f64())
}

/// Summation order (outermost axis first) and one exponent per axis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixedNormSpec {
    order: Vec<usize>,
    exps: ExponentTuple,
}

impl MixedNormSpec {
    /// `order` holds 0-based axes, outermost first; `exps[k]` applies to `order[k]`.
    pub fn new(order: Vec<usize>, exps: ExponentTuple) -> Result<Self> {
        check_permutation(&order, order.len())?;
        if exps.len() != order.len() {
            return domain(format!(
                "{} exponents for {} axes",
                exps.len(),
                order.len()
            ));
        }
        Ok(MixedNormSpec { order, exps })
    }

    /// Natural axis order `0, 1, .., m-1`.
    pub fn natural(exps: Vec<ExtExp>) -> Result<Self> {
        let m = exps.len();
        Self::new((0..m).collect(), ExponentTuple::new(exps)?)
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn exps(&self) -> &ExponentTuple {
        &self.exps
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EntryJson {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Serialize, Deserialize)]
struct TensorJson {
    dims: Vec<usize>,
    field: Field,
    entries: Vec<EntryJson>,
}

impl Serialize for CoefficientTensor {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = match &self.entries {
            Entries::Real(d) => d.iter().map(|&x| EntryJson::Real(x)).collect(),
            Entries::Complex(d) => d.iter().map(|z| EntryJson::Complex([z.re, z.im])).collect(),
        };
        TensorJson {
            dims: self.dims.clone(),
            field: self.field(),
            entries,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CoefficientTensor {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = TensorJson::deserialize(deserializer)?;
        let built = match raw.field {
            Field::Real => {
                let data = raw
                    .entries
                    .into_iter()
                    .map(|e| match e {
                        EntryJson::Real(x) => Ok(x),
                        EntryJson::Complex(_) => Err(D::Error::custom("complex entry in a real tensor")),
                    })
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                CoefficientTensor::from_real(raw.dims, data)
            }
            Field::Complex => {
                let data = raw
                    .entries
                    .into_iter()
                    .map(|e| match e {
                        EntryJson::Real(x) => Complex64::new(x, 0.0),
                        EntryJson::Complex([re, im]) => Complex64::new(re, im),
                    })
                    .collect();
                CoefficientTensor::from_complex(raw.dims, data)
            }
        };
        built.map_err(D::Error::custom)
    }
}
