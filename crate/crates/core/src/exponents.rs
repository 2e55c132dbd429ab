//! Exponent calculus in exact rationals.
//!
//! Every exponent is held through its reciprocal, so `q = inf` is the
//! reciprocal `0` and comparisons at a threshold (`q_1 = 4` against a
//! threshold of `4`) are decided exactly.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Error, Result};
use crate::tensor::Field;

pub type Rational = Ratio<i64>;

/// An exponent in `(0, inf]`, stored as its exact reciprocal.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExtExp {
    recip: Rational,
}

impl ExtExp {
    pub const INFINITY: ExtExp = ExtExp {
        recip: Ratio::new_raw(0, 1),
    };
    pub const ONE: ExtExp = ExtExp {
        recip: Ratio::new_raw(1, 1),
    };
    pub const TWO: ExtExp = ExtExp {
        recip: Ratio::new_raw(1, 2),
    };

    /// Builds an exponent from its reciprocal `1/q`; `0` encodes `inf`.
    pub fn from_recip(recip: Rational) -> Result<Self> {
        if recip.is_negative() {
            return domain(format!("reciprocal {recip} is negative"));
        }
        Ok(ExtExp { recip })
    }

    /// The exponent `num/den`, which must be positive.
    pub fn from_ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return domain("zero denominator");
        }
        let value = Rational::new(num, den);
        if !value.is_positive() {
            return domain(format!("exponent {value} is not positive"));
        }
        Ok(ExtExp {
            recip: value.recip(),
        })
    }

    pub fn from_int(n: i64) -> Result<Self> {
        Self::from_ratio(n, 1)
    }

    pub fn recip(&self) -> Rational {
        self.recip
    }

    pub fn is_infinite(&self) -> bool {
        self.recip.is_zero()
    }

    /// The exponent as an exact rational, `None` for `inf`.
    pub fn value(&self) -> Option<Rational> {
        (!self.is_infinite()).then(|| self.recip.recip())
    }

    pub fn recip_f64(&self) -> f64 {
        self.recip.to_f64().unwrap_or(f64::NAN)
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_infinite() {
            f64::INFINITY
        } else {
            1.0 / self.recip_f64()
        }
    }

    /// True for exponents in `[1, inf]`, the range allowed for `l_p` indices.
    pub fn is_space_exponent(&self) -> bool {
        self.recip <= Rational::one()
    }

    fn require_space(&self, what: &str) -> Result<()> {
        if self.is_space_exponent() {
            Ok(())
        } else {
            domain(format!("{what} = {self} is below 1"))
        }
    }

    /// Strict parser: `inf`, integers and `a/b`. Decimal literals are rejected.
    pub fn parse_exact(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.contains(['.', 'e', 'E']) && !is_inf_token(s) {
            return Err(Error::Parse(format!(
                "'{s}': decimal exponents are not accepted here, use an integer or a/b"
            )));
        }
        Self::parse_lenient(s)
    }

    /// Like [`ExtExp::parse_exact`] but also accepts decimal literals such as
    /// `1.2`, converted exactly to `6/5`.
    pub fn parse_lenient(s: &str) -> Result<Self> {
        let s = s.trim();
        if is_inf_token(s) {
            return Ok(Self::INFINITY);
        }
        let bad = || Error::Parse(format!("'{s}' is not an exponent (inf, n, a/b or decimal)"));
        let value = if let Some((a, b)) = s.split_once('/') {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            if b == 0 {
                return Err(bad());
            }
            Rational::new(a, b)
        } else if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) || frac.len() > 15 {
                return Err(bad());
            }
            let int: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
            let scale = 10i64.pow(frac.len() as u32);
            let frac: i64 = frac.parse().map_err(|_| bad())?;
            let num = int
                .checked_mul(scale)
                .and_then(|v| v.checked_add(frac))
                .ok_or_else(bad)?;
            Rational::new(num, scale)
        } else {
            Rational::from_integer(s.parse().map_err(|_| bad())?)
        };
        if !value.is_positive() {
            return Err(Error::Parse(format!("exponent '{s}' must be positive")));
        }
        Ok(ExtExp {
            recip: value.recip(),
        })
    }

    /// Serialized form: `"inf"` or `"num/den"`.
    pub fn to_fraction_string(&self) -> String {
        match self.value() {
            None => "inf".to_string(),
            Some(v) => format!("{}/{}", v.numer(), v.denom()),
        }
    }
}

fn is_inf_token(s: &str) -> bool {
    matches!(s, "inf" | "Inf" | "INF" | "infinity" | "∞")
}

impl Ord for ExtExp {
    // larger exponent <=> smaller reciprocal
    fn cmp(&self, other: &Self) -> Ordering {
        other.recip.cmp(&self.recip)
    }
}

impl PartialOrd for ExtExp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ExtExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            None => f.write_str("inf"),
            Some(v) => write!(f, "{v}"),
        }
    }
}

impl fmt::Debug for ExtExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExtExp({self})")
    }
}

impl FromStr for ExtExp {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse_lenient(s)
    }
}

impl Serialize for ExtExp {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_fraction_string())
    }
}

impl<'de> Deserialize<'de> for ExtExp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        ExtExp::parse_lenient(&s).map_err(serde::de::Error::custom)
    }
}

/// Parses a comma-separated exponent list with the given element parser.
pub fn parse_list(s: &str, parse: fn(&str) -> Result<ExtExp>) -> Result<Vec<ExtExp>> {
    s.split(',').map(parse).collect()
}

/// An ordered, nonempty list of exponents, outermost aggregation first.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "Vec<ExtExp>", into = "Vec<ExtExp>")]
pub struct ExponentTuple(Vec<ExtExp>);

impl ExponentTuple {
    pub fn new(entries: Vec<ExtExp>) -> Result<Self> {
        if entries.is_empty() {
            return domain("exponent tuple is empty");
        }
        Ok(ExponentTuple(entries))
    }

    pub fn entries(&self) -> &[ExtExp] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, e: ExtExp) {
        self.0.push(e);
    }
}

impl TryFrom<Vec<ExtExp>> for ExponentTuple {
    type Error = Error;
    fn try_from(v: Vec<ExtExp>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ExponentTuple> for Vec<ExtExp> {
    fn from(t: ExponentTuple) -> Self {
        t.0
    }
}

impl fmt::Display for ExponentTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str(")")
    }
}

/// Arity, space exponents, summation order and scalar field of a problem.
///
/// `sigma[k]` is the tensor axis (0-based) aggregated at nesting depth `k`;
/// `sigma[0]` is outermost and `sigma[m-1]` innermost.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProblemSpec {
    p: Vec<ExtExp>,
    sigma: Vec<usize>,
    field: Field,
}

impl ProblemSpec {
    pub fn new(p: Vec<ExtExp>, sigma: Vec<usize>, field: Field) -> Result<Self> {
        let m = p.len();
        if m < 2 {
            return domain(format!("arity must be at least 2, got {m}"));
        }
        for (k, e) in p.iter().enumerate() {
            e.require_space(&format!("p_{}", k + 1))?;
        }
        check_permutation(&sigma, m)?;
        Ok(ProblemSpec { p, sigma, field })
    }

    /// Identity summation order over the real field.
    pub fn with_identity(p: Vec<ExtExp>) -> Result<Self> {
        let m = p.len();
        Self::new(p, (0..m).collect(), Field::Real)
    }

    /// The bilinear form on `c_0 x c_0` with natural order.
    pub fn orlicz() -> Self {
        Self::with_identity(vec![ExtExp::INFINITY; 2]).expect("valid")
    }

    pub fn m(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self) -> &[ExtExp] {
        &self.p
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Space exponents in summation order, `p_sigma(1), ..., p_sigma(m)`.
    pub fn p_in_order(&self) -> Vec<ExtExp> {
        self.sigma.iter().map(|&a| self.p[a]).collect()
    }

    pub fn is_orlicz(&self) -> bool {
        self.m() == 2 && self.p.iter().all(ExtExp::is_infinite) && self.field == Field::Real
    }
}

pub(crate) fn check_permutation(order: &[usize], m: usize) -> Result<()> {
    if order.len() != m {
        return domain(format!("permutation has {} entries, expected {m}", order.len()));
    }
    let mut seen = vec![false; m];
    for &a in order {
        if a >= m || seen[a] {
            return domain(format!("{order:?} is not a permutation of 0..{m}"));
        }
        seen[a] = true;
    }
    Ok(())
}

/// `s*` with `1/s + 1/s* = 1`.
pub fn conjugate(p: ExtExp) -> Result<ExtExp> {
    p.require_space("conjugated exponent")?;
    ExtExp::from_recip(Rational::one() - p.recip)
}

fn recip_sum(s: &[ExtExp]) -> Result<Rational> {
    if s.is_empty() {
        return domain("threshold of an empty exponent list");
    }
    Ok(s.iter().map(|e| e.recip).sum())
}

/// `delta^{s_k..s_m} = 1 / max{1 - sum 1/s_i, 0}`.
pub fn delta(s: &[ExtExp]) -> Result<ExtExp> {
    let sum = recip_sum(s)?;
    ExtExp::from_recip((Rational::one() - sum).max(Rational::zero()))
}

/// `lambda_r^{s_k..s_m} = 1 / max{1/r - sum 1/s_i, 0}` for `r >= 2`.
pub fn lambda(r: ExtExp, s: &[ExtExp]) -> Result<ExtExp> {
    if r.recip > Rational::new(1, 2) {
        return domain(format!("lambda needs r >= 2, got {r}"));
    }
    let sum = recip_sum(s)?;
    ExtExp::from_recip((r.recip - sum).max(Rational::zero()))
}

/// `min{p, 2}`.
pub fn mu(p_last: ExtExp) -> Result<ExtExp> {
    p_last.require_space("p_sigma(m)")?;
    ExtExp::from_recip(p_last.recip.max(Rational::new(1, 2)))
}

/// Cotype of the dual of `X_p`: `max{p*, 2}`, which is `inf` for `p = 1`.
pub fn dual_space_cotype(p: ExtExp) -> Result<ExtExp> {
    let pc = conjugate(p)?;
    ExtExp::from_recip(pc.recip.min(Rational::new(1, 2)))
}

/// Thresholds of the scalar mixed inequality for a problem.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrlThresholds {
    /// Innermost exponent `p_sigma(m)*`.
    pub inner: ExtExp,
    pub mu: ExtExp,
    /// `thresholds[i] = delta^{p_sigma(i), ..., p_sigma(m-1), mu}`.
    pub thresholds: ExponentTuple,
}

pub fn orl_thresholds(spec: &ProblemSpec) -> Result<OrlThresholds> {
    let ordered = spec.p_in_order();
    let m = ordered.len();
    let last = ordered[m - 1];
    let mu = mu(last)?;
    let thresholds = (0..m - 1)
        .map(|i| {
            let mut s = ordered[i..m - 1].to_vec();
            s.push(mu);
            delta(&s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OrlThresholds {
        inner: conjugate(last)?,
        mu,
        thresholds: ExponentTuple::new(thresholds)?,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PositionVerdict {
    pub q: ExtExp,
    pub threshold: ExtExp,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Admissibility {
    pub positions: Vec<PositionVerdict>,
    pub admissible: bool,
    /// Set when `p_sigma(m) = 1`: every threshold is `inf`.
    pub degenerate: bool,
}

/// Checks `q_i >= delta^{p_sigma(i), ..., p_sigma(m-1), mu}` position by position.
pub fn orl_admissible(spec: &ProblemSpec, q: &ExponentTuple) -> Result<Admissibility> {
    let m = spec.m();
    if q.len() != m - 1 {
        return domain(format!("expected {} exponents q_1..q_{}, got {}", m - 1, m - 1, q.len()));
    }
    let th = orl_thresholds(spec)?;
    let positions: Vec<_> = q
        .entries()
        .iter()
        .zip(th.thresholds.entries())
        .map(|(&q, &threshold)| PositionVerdict {
            q,
            threshold,
            pass: q.is_infinite() || q >= threshold,
        })
        .collect();
    Ok(Admissibility {
        admissible: positions.iter().all(|v| v.pass),
        positions,
        degenerate: th.mu == ExtExp::ONE,
    })
}

/// `thresholds[i] = lambda_r^{p_i, ..., p_m}` for the `l_r`-valued inequality.
pub fn cotcrit_thresholds(p: &[ExtExp], r: ExtExp) -> Result<ExponentTuple> {
    if p.is_empty() {
        return domain("empty exponent list");
    }
    let th = (0..p.len()).map(|i| lambda(r, &p[i..])).collect::<Result<Vec<_>>>()?;
    ExponentTuple::new(th)
}
