//! Operator norms `sup |A(x^(1), .., x^(m))|` over products of `l_p` unit balls.
//!
//! Three routes are provided. [`opnorm_exact_signs`] enumerates the extreme
//! points of real `l_inf` balls; [`opnorm_diagonal_closed_form`] evaluates
//! the generalized Hölder bound for diagonal forms, which is attained;
//! [`opnorm_ascent`] is a multistart alternating maximization whose slot
//! updates are exact Hölder extremizers and which returns a lower bound.

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Serialize, Serializer};

use crate::error::{domain, Error, Result};
use crate::exponents::{conjugate, ExtExp};
use crate::parallel;
use crate::scalar::Scalar;
use crate::tensor::{lq_norm, strides, CoefficientTensor, Entries, Field};

/// Default cap on the number of sign vectors (or classes) enumerated.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactEnumeration,
    DiagonalClosedForm,
    AlternatingAscent,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::ExactEnumeration => "exact-enumeration",
            Method::DiagonalClosedForm => "diagonal-closed-form",
            Method::AlternatingAscent => "alternating-ascent",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OpNormEstimate {
    pub value: f64,
    pub method: Method,
    /// False for ascent values, which are lower bounds.
    pub exact: bool,
    /// One unit vector per slot at which `value` is attained.
    #[serde(serialize_with = "serialize_certificate")]
    pub certificate: Vec<Vec<Complex64>>,
    /// Sign vectors enumerated, or sweeps of the best ascent start.
    pub iterations: u64,
    pub starts: usize,
}

fn serialize_certificate<S: Serializer>(
    cert: &[Vec<Complex64>],
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    let real = cert.iter().flatten().all(|z| z.im == 0.0);
    let value: Vec<serde_json::Value> = cert
        .iter()
        .map(|v| {
            v.iter()
                .map(|z| {
                    if real {
                        serde_json::json!(z.re)
                    } else {
                        serde_json::json!([z.re, z.im])
                    }
                })
                .collect()
        })
        .collect();
    value.serialize(serializer)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct AscentOptions {
    pub starts: usize,
    pub seed: u64,
    /// Relative per-sweep improvement below which a start stops.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for AscentOptions {
    fn default() -> Self {
        AscentOptions {
            starts: 32,
            seed: 0,
            tol: 1e-12,
            max_sweeps: 200,
        }
    }
}

fn check_exponents(t: &CoefficientTensor, p: &[ExtExp]) -> Result<()> {
    if p.len() != t.rank() {
        return Err(Error::RankMismatch {
            expected: t.rank(),
            actual: p.len(),
        });
    }
    if let Some(e) = p.iter().find(|e| !e.is_space_exponent()) {
        return domain(format!("space exponent {e} is below 1"));
    }
    Ok(())
}

/// Contracts every axis except `keep` against the vectors in `xs`.
fn slot_functional<S: Scalar>(data: &[S], dims: &[usize], xs: &[Vec<S>], keep: usize) -> Vec<S> {
    let mut buf: Vec<S> = data.to_vec();
    for k in (keep + 1..dims.len()).rev() {
        let n = dims[k];
        let x = &xs[k];
        buf = buf
            .chunks_exact(n)
            .map(|row| row.iter().zip(x).fold(S::zero(), |acc, (&a, &b)| acc + a * b))
            .collect();
    }
    for k in 0..keep {
        let n = dims[k];
        let rest = buf.len() / n;
        let mut out = vec![S::zero(); rest];
        for (j, &xj) in xs[k].iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(&buf[j * rest..(j + 1) * rest]) {
                *o = *o + a * xj;
            }
        }
        buf = out;
    }
    buf
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| acc + x * y)
}

/// `A(x^(1), .., x^(m))` for arbitrary (complex) evaluation vectors.
pub fn evaluate_form(t: &CoefficientTensor, xs: &[Vec<Complex64>]) -> Result<Complex64> {
    if xs.len() != t.rank() {
        return Err(Error::RankMismatch {
            expected: t.rank(),
            actual: xs.len(),
        });
    }
    for (k, (x, &n)) in xs.iter().zip(t.dims()).enumerate() {
        if x.len() != n {
            return Err(Error::Index(format!("vector {k} has length {}, axis has {n}", x.len())));
        }
    }
    let data = t.complex_entries();
    let g = slot_functional(&data, t.dims(), xs, 0);
    Ok(dot(&g, &xs[0]))
}

/// `l_p` norm of a complex vector.
pub fn vector_norm(x: &[Complex64], p: ExtExp) -> f64 {
    let abs: Vec<f64> = x.iter().map(|z| z.norm()).collect();
    lq_norm(&abs, p)
}

/// Exact norm of a real form on a product of `l_inf` balls.
///
/// Axis 0 is solved in closed form (componentwise sign of the contracted
/// fiber); axes `1..m` run over sign vectors with the first coordinate fixed
/// to `+1`, visited in Gray-code order so each step flips one coordinate.
pub fn opnorm_exact_signs(t: &CoefficientTensor, budget: u128) -> Result<OpNormEstimate> {
    let data = t
        .real_entries()
        .ok_or_else(|| Error::Domain("sign enumeration needs a real tensor".into()))?;
    let dims = t.dims();
    let n0 = dims[0];
    let cols = data.len() / n0;
    let inner_dims = &dims[1..];
    let inner_strides = strides(inner_dims);

    // bit -> (axis among 1..m, coordinate >= 1)
    let bits: Vec<(usize, usize)> = inner_dims
        .iter()
        .enumerate()
        .flat_map(|(k, &n)| (1..n).map(move |j| (k, j)))
        .collect();
    let needed = 1u128.checked_shl(bits.len() as u32).filter(|_| bits.len() < 127);
    let total = match needed {
        Some(total) if total <= budget => total as u64,
        _ => {
            return Err(Error::Budget {
                what: "sign vectors",
                needed: needed.unwrap_or(u128::MAX),
                budget,
            })
        }
    };

    let mut w = vec![1.0f64; cols];
    let mut v: Vec<f64> = data.chunks_exact(cols).map(|row| row.iter().sum()).collect();
    let mut best = v.iter().map(|x| x.abs()).sum::<f64>();
    let mut best_step = 0u64;
    for step in 1..total {
        let (k, j) = bits[step.trailing_zeros() as usize];
        let stride = inner_strides[k];
        let block = stride * inner_dims[k];
        for outer in (0..cols).step_by(block) {
            for c in outer + j * stride..outer + (j + 1) * stride {
                let wc = w[c];
                for (r, vr) in v.iter_mut().enumerate() {
                    *vr -= 2.0 * data[r * cols + c] * wc;
                }
                w[c] = -wc;
            }
        }
        let val: f64 = v.iter().map(|x| x.abs()).sum();
        if val > best {
            best = val;
            best_step = step;
        }
    }

    let gray = best_step ^ (best_step >> 1);
    let mut signs: Vec<Vec<f64>> = inner_dims.iter().map(|&n| vec![1.0; n]).collect();
    for (b, &(k, j)) in bits.iter().enumerate() {
        if gray >> b & 1 == 1 {
            signs[k][j] = -1.0;
        }
    }
    let mut xs: Vec<Vec<f64>> = vec![vec![1.0; n0]];
    xs.extend(signs);
    let fiber = slot_functional(data, dims, &xs, 0);
    xs[0] = fiber.iter().map(|g| g.aligning_phase()).collect();
    let value: f64 = fiber.iter().map(|x| x.abs()).sum();
    Ok(OpNormEstimate {
        value,
        method: Method::ExactEnumeration,
        exact: true,
        certificate: to_complex_vectors(&xs),
        iterations: total,
        starts: 1,
    })
}

fn to_complex_vectors<S: Scalar>(xs: &[Vec<S>]) -> Vec<Vec<Complex64>> {
    xs.iter().map(|x| x.iter().map(|s| s.to_complex()).collect()).collect()
}

/// Exact norm of the diagonal form `sum_j c_j x_j^(1) .. x_j^(m)` on
/// `l_{p_1} x .. x l_{p_m}`: `||c||_t` with `1/t = 1 - sum 1/p_k` when the
/// sum is below 1, and `max |c_j|` otherwise.
pub fn opnorm_diagonal_closed_form<S: Scalar>(c: &[S], p: &[ExtExp]) -> Result<OpNormEstimate> {
    if p.is_empty() || c.is_empty() {
        return domain("diagonal form needs at least one slot and one coefficient");
    }
    if let Some(e) = p.iter().find(|e| !e.is_space_exponent()) {
        return domain(format!("space exponent {e} is below 1"));
    }
    if !c.iter().all(|z| z.is_finite()) {
        return domain("diagonal coefficients must be finite");
    }
    let n = c.len();
    let abs: Vec<f64> = c.iter().map(|z| z.modulus()).collect();
    let max = abs.iter().copied().fold(0.0, f64::max);
    let sum: Ratio<i64> = p.iter().map(|e| e.recip()).sum();
    let one = Ratio::<i64>::one();

    let canonical = |j: usize| -> Vec<Vec<Complex64>> {
        (0..p.len())
            .map(|k| {
                let mut x = vec![Complex64::new(0.0, 0.0); n];
                x[j] = if k == 0 { c[j].aligning_phase().to_complex() } else { Complex64::new(1.0, 0.0) };
                x
            })
            .collect()
    };

    let (value, certificate) = if max == 0.0 {
        (0.0, canonical(0))
    } else if sum >= one {
        let jstar = abs.iter().position(|&a| a == max).expect("max is attained");
        (max, canonical(jstar))
    } else {
        let t = ExtExp::from_recip(one - sum)?;
        let tf = t.to_f64();
        let cert = p
            .iter()
            .enumerate()
            .map(|(k, pk)| {
                let power = tf * pk.recip_f64();
                let raw: Vec<f64> = abs.iter().map(|a| (a / max).powf(power)).collect();
                let norm = lq_norm(&raw, *pk);
                raw.iter()
                    .zip(c)
                    .map(|(&x, z)| {
                        let x = Complex64::new(x / norm, 0.0);
                        if k == 0 {
                            x * z.aligning_phase().to_complex()
                        } else {
                            x
                        }
                    })
                    .collect()
            })
            .collect();
        (lq_norm(&abs, t), cert)
    };
    Ok(OpNormEstimate {
        value,
        method: Method::DiagonalClosedForm,
        exact: true,
        certificate,
        iterations: 0,
        starts: 0,
    })
}

/// The coefficients `c_j = T[j, .., j]` when `T` is square and vanishes off
/// the main diagonal.
pub fn diagonal_coefficients(t: &CoefficientTensor) -> Option<Vec<Complex64>> {
    let n = t.dims()[0];
    if t.dims().iter().any(|&d| d != n) {
        return None;
    }
    let step: usize = strides(t.dims()).iter().sum();
    let is_diag = |off: usize| off.is_multiple_of(step);
    match t.entries() {
        Entries::Real(d) => {
            if d.iter().enumerate().any(|(o, &x)| x != 0.0 && !is_diag(o)) {
                return None;
            }
            Some((0..n).map(|j| Complex64::new(d[j * step], 0.0)).collect())
        }
        Entries::Complex(d) => {
            if d.iter().enumerate().any(|(o, z)| (z.re != 0.0 || z.im != 0.0) && !is_diag(o)) {
                return None;
            }
            Some((0..n).map(|j| d[j * step]).collect())
        }
    }
}

/// Objective trace and final vectors of one ascent start.
#[derive(Clone, Debug)]
pub struct AscentRun<S> {
    pub value: f64,
    pub vectors: Vec<Vec<S>>,
    /// Objective after every slot update, in order.
    pub trace: Vec<f64>,
    pub sweeps: usize,
}

/// Maximizer of `|sum g_j x_j|` over the `l_p` unit ball; `None` when `g = 0`.
fn holder_extremizer<S: Scalar>(g: &[S], p: ExtExp) -> Option<Vec<S>> {
    let abs: Vec<f64> = g.iter().map(|z| z.modulus()).collect();
    let max = abs.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return None;
    }
    if p.is_infinite() {
        return Some(g.iter().map(|z| z.aligning_phase()).collect());
    }
    if p == ExtExp::ONE {
        // lowest index on ties
        let j = abs.iter().position(|&a| a == max).expect("max is attained");
        let mut x = vec![S::zero(); g.len()];
        x[j] = g[j].aligning_phase();
        return Some(x);
    }
    let pc = conjugate(p).expect("space exponent").to_f64();
    let w: Vec<f64> = abs.iter().map(|a| (a / max).powf(pc - 1.0)).collect();
    let norm = lq_norm(&w, p);
    Some(g.iter().zip(&w).map(|(z, &wj)| z.aligning_phase().scale(wj / norm)).collect())
}

fn random_unit_vector<S: Scalar, R: Rng>(n: usize, p: ExtExp, rng: &mut R, complex: bool) -> Vec<S> {
    loop {
        let x: Vec<Complex64> = (0..n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = if complex { rng.sample(StandardNormal) } else { 0.0 };
                Complex64::new(re, im)
            })
            .collect();
        let norm = vector_norm(&x, p);
        if norm > 0.0 {
            return x
                .iter()
                .map(|z| S::from_parts(z.re / norm, z.im / norm))
                .collect();
        }
    }
}

/// One alternating-ascent run from the given initial vectors.
pub fn ascent_from<S: Scalar>(
    data: &[S],
    dims: &[usize],
    p: &[ExtExp],
    mut xs: Vec<Vec<S>>,
    tol: f64,
    max_sweeps: usize,
) -> AscentRun<S> {
    let m = dims.len();
    let mut trace = Vec::with_capacity(max_sweeps * m);
    let mut value = {
        let g = slot_functional(data, dims, &xs, 0);
        dot(&g, &xs[0]).modulus()
    };
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        let before = value;
        for k in 0..m {
            let g = slot_functional(data, dims, &xs, k);
            if let Some(x) = holder_extremizer(&g, p[k]) {
                xs[k] = x;
            }
            value = dot(&g, &xs[k]).modulus();
            trace.push(value);
        }
        sweeps += 1;
        if value - before <= tol * value.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    let g = slot_functional(data, dims, &xs, 0);
    AscentRun {
        value: dot(&g, &xs[0]).modulus(),
        vectors: xs,
        trace,
        sweeps,
    }
}

fn multistart<S: Scalar>(
    data: &[S],
    dims: &[usize],
    p: &[ExtExp],
    opts: &AscentOptions,
    complex: bool,
) -> OpNormEstimate {
    // start 0 is the canonical point at the largest entry
    let argmax = data
        .iter()
        .enumerate()
        .fold((0, -1.0), |(bi, bv), (i, z)| if z.modulus() > bv { (i, z.modulus()) } else { (bi, bv) })
        .0;
    let st = strides(dims);
    let starts = opts.starts.max(1);
    let runs = parallel::map_range(starts, |s| {
        let init: Vec<Vec<S>> = if s == 0 {
            dims.iter()
                .zip(&st)
                .map(|(&n, &stride)| {
                    let mut x = vec![S::zero(); n];
                    x[(argmax / stride) % n] = S::from_f64(1.0);
                    x
                })
                .collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(s as u64);
            dims.iter()
                .zip(p)
                .map(|(&n, &pk)| random_unit_vector(n, pk, &mut rng, complex))
                .collect()
        };
        ascent_from(data, dims, p, init, opts.tol, opts.max_sweeps)
    });
    let best = runs
        .iter()
        .enumerate()
        .fold(0, |b, (i, r)| if r.value > runs[b].value { i } else { b });
    OpNormEstimate {
        value: runs[best].value,
        method: Method::AlternatingAscent,
        exact: false,
        certificate: to_complex_vectors(&runs[best].vectors),
        iterations: runs[best].sweeps as u64,
        starts,
    }
}

/// Multistart alternating Hölder ascent; the value is a lower bound.
pub fn opnorm_ascent(t: &CoefficientTensor, p: &[ExtExp], opts: &AscentOptions) -> Result<OpNormEstimate> {
    check_exponents(t, p)?;
    if t.is_zero() {
        let certificate = t
            .dims()
            .iter()
            .map(|&n| {
                let mut x = vec![Complex64::new(0.0, 0.0); n];
                x[0] = Complex64::new(1.0, 0.0);
                x
            })
            .collect();
        return Ok(OpNormEstimate {
            value: 0.0,
            method: Method::AlternatingAscent,
            exact: false,
            certificate,
            iterations: 0,
            starts: 0,
        });
    }
    Ok(match t.entries() {
        Entries::Real(d) => multistart(d, t.dims(), p, opts, false),
        Entries::Complex(d) => multistart(d, t.dims(), p, opts, true),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OpNormOptions {
    pub ascent: AscentOptions,
    pub budget: u128,
}

impl Default for OpNormOptions {
    fn default() -> Self {
        OpNormOptions {
            ascent: AscentOptions::default(),
            budget: DEFAULT_ENUMERATION_BUDGET,
        }
    }
}

/// Whether sign enumeration applies to `t` on `p` within `budget`.
pub fn enumeration_applies(t: &CoefficientTensor, p: &[ExtExp], budget: u128) -> bool {
    let bits: usize = t.dims()[1..].iter().map(|n| n - 1).sum();
    t.field() == Field::Real
        && p.iter().all(ExtExp::is_infinite)
        && bits < 127
        && (1u128 << bits) <= budget
}

/// Picks the strongest applicable method: closed form for diagonal tensors,
/// sign enumeration for real `l_inf` problems within budget, ascent otherwise.
pub fn opnorm_auto(t: &CoefficientTensor, p: &[ExtExp], opts: &OpNormOptions) -> Result<OpNormEstimate> {
    check_exponents(t, p)?;
    if let Some(c) = diagonal_coefficients(t) {
        return opnorm_diagonal_closed_form(&c, p);
    }
    if enumeration_applies(t, p, opts.budget) {
        return opnorm_exact_signs(t, opts.budget);
    }
    opnorm_ascent(t, p, &opts.ascent)
}

/// An `l_r`-valued m-linear operator on `l_{p_1} x .. x l_{p_m}`; the last
/// tensor axis holds codomain coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorValuedOp {
    p: Vec<ExtExp>,
    r: ExtExp,
    tensor: CoefficientTensor,
}

impl VectorValuedOp {
    pub fn new(p: Vec<ExtExp>, r: ExtExp, tensor: CoefficientTensor) -> Result<Self> {
        if tensor.rank() != p.len() + 1 {
            return Err(Error::RankMismatch {
                expected: p.len() + 1,
                actual: tensor.rank(),
            });
        }
        if !r.is_space_exponent() {
            return domain(format!("codomain exponent {r} is below 1"));
        }
        if let Some(e) = p.iter().find(|e| !e.is_space_exponent()) {
            return domain(format!("space exponent {e} is below 1"));
        }
        Ok(VectorValuedOp { p, r, tensor })
    }

    pub fn m(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self) -> &[ExtExp] {
        &self.p
    }

    pub fn r(&self) -> ExtExp {
        self.r
    }

    pub fn codomain_dim(&self) -> usize {
        *self.tensor.dims().last().expect("rank >= 1")
    }

    pub fn tensor(&self) -> &CoefficientTensor {
        &self.tensor
    }
}

/// Views an `l_r`-valued operator as the scalar (m+1)-linear form on
/// `l_{p_1} x .. x l_{p_m} x l_{r*}`; the two have equal norms because
/// `||v||_r = sup { |<v, y>| : ||y||_{r*} <= 1 }`.
pub fn lift_vector_valued(v: &VectorValuedOp) -> Result<(CoefficientTensor, Vec<ExtExp>)> {
    let mut p = v.p.clone();
    p.push(conjugate(v.r)?);
    Ok((v.tensor.clone(), p))
}
