//! Browser bindings. Every export takes plain strings and numbers and returns
//! a JSON string, or throws a string message.

use mixnorm::experiments::{admissibility_report, probe_optimality, search_constant, ProbeOptions};
use mixnorm::exponents::{parse_list, ExponentTuple, ExtExp, ProblemSpec};
use mixnorm::opnorm::DEFAULT_ENUMERATION_BUDGET;
use mixnorm::witness::{FamilyDescriptor, FamilyKind};
use mixnorm::Field;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Work cap for the page: keeps every call well under a second.
pub const WEB_BUDGET: u128 = 1 << 22;

fn exps(s: &str) -> Result<Vec<ExtExp>, String> {
    parse_list(s, ExtExp::parse_lenient).map_err(|e| e.to_string())
}

fn ints<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| x.trim().parse().map_err(|_| format!("bad integer '{x}'")))
        .collect()
}

fn to_json(v: &impl Serialize) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

fn spec(p: &str, sigma: &str) -> Result<ProblemSpec, String> {
    let p: Vec<ExtExp> = parse_list(p, ExtExp::parse_exact).map_err(|e| e.to_string())?;
    let sigma: Vec<usize> = if sigma.trim().is_empty() {
        (0..p.len()).collect()
    } else {
        ints::<usize>(sigma)?
            .into_iter()
            .map(|a| a.checked_sub(1).ok_or("sigma is 1-based".to_string()))
            .collect::<Result<_, _>>()?
    };
    ProblemSpec::new(p, sigma, Field::Real).map_err(|e| e.to_string())
}

/// Minimal admissible exponents for `p` (comma list) and a 1-based `sigma`
/// (empty for the identity).
pub fn thresholds_json(p: &str, sigma: &str) -> Result<String, String> {
    to_json(&admissibility_report(&spec(p, sigma)?).map_err(|e| e.to_string())?)
}

/// Growth of the ratio along a family. `r` is empty for scalar forms.
pub fn probe_json(p: &str, q: &str, family: &str, r: &str, sizes: &str, seeds: &str) -> Result<String, String> {
    let spec = spec(p, "")?;
    let kind = match family {
        "diagonal" => FamilyKind::Diagonal,
        "pinned-diagonal" => FamilyKind::PinnedDiagonal,
        "hadamard" => FamilyKind::Hadamard,
        "random-sign" => FamilyKind::RandomSign,
        other => return Err(format!("unknown family '{other}'")),
    };
    let mut fam = FamilyDescriptor::new(kind, spec.m());
    if !r.trim().is_empty() {
        fam.codomain_r = Some(ExtExp::parse_lenient(r).map_err(|e| e.to_string())?);
    }
    let q = ExponentTuple::new(exps(q)?).map_err(|e| e.to_string())?;
    let mut opts = ProbeOptions::default();
    opts.opnorm.budget = WEB_BUDGET;
    let report = probe_optimality(&spec, &q, &fam, &ints(sizes)?, &ints(seeds)?, &opts).map_err(|e| e.to_string())?;
    to_json(&report)
}

/// Exhaustive sign-matrix search at size `n`.
pub fn search_json(n: usize) -> Result<String, String> {
    let budget = WEB_BUDGET.min(DEFAULT_ENUMERATION_BUDGET);
    to_json(&search_constant(n, true, budget).map_err(|e| e.to_string())?)
}

#[wasm_bindgen]
pub fn thresholds(p: &str, sigma: &str) -> Result<String, JsValue> {
    thresholds_json(p, sigma).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn probe(p: &str, q: &str, family: &str, r: &str, sizes: &str, seeds: &str) -> Result<String, JsValue> {
    probe_json(p, q, family, r, sizes, seeds).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn search(n: usize) -> Result<String, JsValue> {
    search_json(n).map_err(|e| JsValue::from_str(&e))
}
