//! Acceptance criteria. Run with
//! `cargo test -p mixnorm --test acceptance -- --nocapture --test-threads 1`
//! to see one PASS/FAIL line per criterion.

use std::f64::consts::SQRT_2;
use std::time::{Duration, Instant};

use mixnorm::experiments::{probe_optimality, search_constant, verify_inequality, ProbeOptions, Verdict};
use mixnorm::exponents::{
    cotcrit_thresholds, delta, dual_space_cotype, lambda, mu, orl_thresholds, parse_list, ExponentTuple, ExtExp,
    ProblemSpec,
};
use mixnorm::opnorm::{
    evaluate_form, lift_vector_valued, opnorm_ascent, opnorm_auto, opnorm_diagonal_closed_form, opnorm_exact_signs,
    vector_norm, AscentOptions, Method, OpNormOptions, DEFAULT_ENUMERATION_BUDGET,
};
use mixnorm::parallel::with_jobs;
use mixnorm::tensor::{CoefficientTensor, MixedNormSpec};
use mixnorm::witness::{diagonal_vector_witness, diagonal_witness, hadamard_witness, random_sign_tensor, FamilyDescriptor, FamilyKind};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn e(s: &str) -> ExtExp {
    ExtExp::parse_lenient(s).unwrap()
}

fn list(s: &str) -> Vec<ExtExp> {
    parse_list(s, ExtExp::parse_lenient).unwrap()
}

fn tuple(s: &str) -> ExponentTuple {
    ExponentTuple::new(list(s)).unwrap()
}

/// Collects named checks and prints a single verdict line.
struct Criterion {
    id: u32,
    title: &'static str,
    failures: Vec<String>,
    checks: usize,
    started: Instant,
}

impl Criterion {
    fn new(id: u32, title: &'static str) -> Self {
        Criterion { id, title, failures: Vec::new(), checks: 0, started: Instant::now() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn finish(self, limit: Duration) {
        let elapsed = self.started.elapsed();
        let mut failures = self.failures;
        if elapsed > limit {
            failures.push(format!("runtime {elapsed:?} over {limit:?}"));
        }
        let status = if failures.is_empty() { "PASS" } else { "FAIL" };
        println!(
            "[{status}] criterion {}: {} ({} checks, {:.2?})",
            self.id, self.title, self.checks, elapsed
        );
        for f in &failures {
            println!("       - {f}");
        }
        assert!(failures.is_empty(), "criterion {} failed: {failures:#?}", self.id);
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn random_real_matrix(rng: &mut ChaCha8Rng, n: usize, k: usize) -> CoefficientTensor {
    CoefficientTensor::from_real(vec![n, k], (0..n * k).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

#[test]
fn criterion_1_orlicz_constant() {
    let mut c = Criterion::new(1, "bilinear (l2,l1) constant sqrt(2), real field");
    let budget = DEFAULT_ENUMERATION_BUDGET;

    let t = Instant::now();
    let r2 = search_constant(2, true, budget).unwrap();
    c.check((r2.best_ratio - SQRT_2).abs() <= 1e-12, || format!("n=2 ratio {}", r2.best_ratio));
    c.check(t.elapsed() < Duration::from_secs(1), || format!("n=2 took {:?}", t.elapsed()));
    c.check(r2.classes == 2, || format!("n=2 classes {}", r2.classes));

    let mut argmaxes = vec![r2.argmax.clone()];
    for n in [3, 4] {
        let t = Instant::now();
        let r = search_constant(n, true, budget).unwrap();
        println!("       n={n}: best ratio {:.12} over {} classes", r.best_ratio, r.classes);
        c.check((1.0..=SQRT_2 + 1e-12).contains(&r.best_ratio), || format!("n={n} ratio {}", r.best_ratio));
        c.check(t.elapsed() < Duration::from_secs(60), || format!("n={n} took {:?}", t.elapsed()));
        argmaxes.push(r.argmax);
    }

    // every instance family used anywhere in the suites
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut corpus: Vec<CoefficientTensor> = (0..=4).map(|k| hadamard_witness(k).unwrap()).collect();
    corpus.extend((1..=8).map(|n| CoefficientTensor::identity(n).unwrap()));
    corpus.extend((0..100).map(|s| random_sign_tensor(&[8, 8], s).unwrap()));
    corpus.extend((0..200).map(|i| random_real_matrix(&mut rng, 2 + i % 7, 2 + (i / 7) % 7)));
    corpus.extend(argmaxes.iter().flat_map(|a| (a.dims()[0]..=6).map(move |n| a.embed(&[n, n]).unwrap())));
    for n in [4, 6, 8, 12, 16] {
        corpus.extend((1..=8).map(|s| random_sign_tensor(&[n, n], s * 1000 + n as u64).unwrap()));
    }
    let report = verify_inequality(&ProblemSpec::orlicz(), &tuple("2"), &corpus, &OpNormOptions::default());
    match report {
        Ok(r) => {
            c.check(r.rows.iter().all(|row| row.opnorm_exact), || "non-exact operator norm in corpus".into());
            let worst = r.rows.iter().map(|row| row.mixed_norm - SQRT_2 * row.opnorm).fold(f64::MIN, f64::max);
            println!("       {} instances, max ratio {:.12}, worst slack {worst:.3e}", r.rows.len(), r.max_ratio);
            c.check(worst <= 1e-9, || format!("slack {worst}"));
        }
        Err(err) => c.check(false, || format!("verify failed: {err}")),
    }
    c.finish(Duration::from_secs(120));
}

#[test]
fn criterion_2_threshold_formulas() {
    let mut c = Criterion::new(2, "exact threshold formulas and the delta/lambda/mu identity");
    let th = orl_thresholds(&ProblemSpec::orlicz()).unwrap();
    c.check(th.thresholds.entries() == [e("2")] && th.inner == e("1"), || format!("orlicz {th:?}"));
    let th = orl_thresholds(&ProblemSpec::with_identity(list("inf,inf,inf")).unwrap()).unwrap();
    c.check(th.thresholds.entries() == [e("2"), e("2")] && th.inner == e("1"), || format!("m=3 {th:?}"));
    let th = orl_thresholds(&ProblemSpec::with_identity(list("4,4")).unwrap()).unwrap();
    c.check(th.thresholds.entries() == [e("4")] && th.inner == e("4/3"), || format!("(4,4) {th:?}"));

    // 10 last-slot exponents x 10 prefixes = 100 grid points
    let lasts = list("1,6/5,4/3,3/2,2,5/2,3,4,7,inf");
    let prefixes = [
        "inf", "2", "4", "3/2", "inf,inf", "4,4", "3,6", "8,8,8", "5/2,inf,7", "12,12,12,12",
    ];
    let mut points = 0;
    for &p in &lasts {
        for s in prefixes {
            let s = list(s);
            let mut with_mu = s.clone();
            with_mu.push(mu(p).unwrap());
            let lhs = delta(&with_mu).unwrap();
            let rhs = lambda(dual_space_cotype(p).unwrap(), &s).unwrap();
            points += 1;
            c.check(lhs == rhs, || format!("p={p}, s={s:?}: delta {lhs} vs lambda {rhs}"));
            // 1 - 1/max{p*,2} = 1/mu
            let r = dual_space_cotype(p).unwrap();
            c.check(Ratio::from_integer(1) - r.recip() == mu(p).unwrap().recip(), || format!("cotype identity at p={p}"));
        }
    }
    c.check(points == 100, || format!("{points} grid points"));
    c.finish(Duration::from_secs(1));
}

#[test]
fn criterion_3_diagonal_oracle_vs_ascent() {
    let mut c = Criterion::new(3, "ascent vs diagonal closed form");
    let cases = [("4,4", 2usize), ("2,2,2", 3), ("3,4,12", 3)];
    for (p, m) in cases {
        let shown = tuple(p);
        let p = list(p);
        let mut rng = ChaCha8Rng::seed_from_u64(31 + m as u64);
        let mut matched = 0;
        for inst in 0..20 {
            let n = 2 + inst % 9;
            let w: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let t = diagonal_witness(m, n, Some(&w)).unwrap();
            let oracle = opnorm_diagonal_closed_form(&w, &p).unwrap().value;
            let opts = AscentOptions { starts: 32, seed: inst as u64, ..Default::default() };
            let est = opnorm_ascent(&t, &p, &opts).unwrap();
            if rel_err(est.value, oracle) <= 1e-6 {
                matched += 1;
            }
            c.check(est.value <= oracle + 1e-9, || format!("p={shown} n={n}: ascent {} above oracle {oracle}", est.value));
        }
        println!("       p={shown}: {matched}/20 within 1e-6");
        c.check(matched >= 19, || format!("p={shown}: only {matched}/20 matched"));
    }
    c.finish(Duration::from_secs(60));
}

#[test]
fn criterion_4_vector_valued_witness() {
    let mut c = Criterion::new(4, "l_r-valued diagonal witness: mixed norm, lifted norm, verdicts");
    let grid: [(&str, &str); 8] = [
        ("inf,inf", "2"),
        ("4,4", "2"),
        ("8,8", "2"),
        ("8,8", "3"),
        ("4,inf", "2"),
        ("3,6", "4"),
        ("inf,inf", "4"),
        ("6,inf,inf", "2"),
    ];
    let mut points = 0;
    for (p_str, r_str) in grid {
        let p = list(p_str);
        let r = e(r_str);
        let m = p.len();
        let s: Ratio<i64> = p.iter().map(|x| x.recip()).sum();
        let gap = (r.recip() - s).max(Ratio::from_integer(0));
        let gap_f = *gap.numer() as f64 / *gap.denom() as f64;
        let lam = cotcrit_thresholds(&p, r).unwrap().entries()[0];
        let sizes: Vec<usize> = if m == 2 { vec![4, 8, 16, 32] } else { vec![4, 6, 8, 12] };

        for &n in &sizes {
            let v = diagonal_vector_witness(p.clone(), n, None, r).unwrap();
            let (lt, lp) = lift_vector_valued(&v).unwrap();
            let est = opnorm_auto(&lt, &lp, &OpNormOptions::default()).unwrap();
            let closed = (n as f64).powf(gap_f);
            c.check(est.method == Method::DiagonalClosedForm && (est.value - closed).abs() <= 1e-9 * closed.max(1.0), || {
                format!("p={p_str} r={r_str} n={n}: lifted {} vs {closed}", est.value)
            });
            if n <= 8 {
                let asc = opnorm_ascent(&lt, &lp, &AscentOptions::default()).unwrap();
                c.check(rel_err(asc.value, closed) <= 1e-6, || {
                    format!("p={p_str} r={r_str} n={n}: ascent {} vs {closed}", asc.value)
                });
            }
            for q1 in ["1", "2", "3", "inf"] {
                let mut exps = vec![e(q1)];
                exps.extend(std::iter::repeat_n(ExtExp::INFINITY, m - 1));
                exps.push(r);
                let mixed = v.tensor().mixed_norm(&MixedNormSpec::natural(exps).unwrap()).unwrap();
                // n^{1/q_1} checked through its integer power where q_1 is an integer
                let ok = match e(q1).value() {
                    None => mixed == 1.0,
                    Some(q) => {
                        let k = q.to_integer() as i32;
                        rel_err(mixed.powi(k), n as f64) <= 1e-12
                    }
                };
                c.check(ok, || format!("p={p_str} r={r_str} n={n} q1={q1}: mixed {mixed}"));
            }
        }

        let mut fam = FamilyDescriptor::new(FamilyKind::Diagonal, m);
        fam.codomain_r = Some(r);
        let spec = ProblemSpec::with_identity(p.clone()).unwrap();
        let mut q1s = list("1,2,4,inf");
        if !lam.is_infinite() && !q1s.contains(&lam) {
            q1s.push(lam);
        }
        for q1 in q1s {
            let mut q = vec![q1];
            q.extend(std::iter::repeat_n(ExtExp::INFINITY, m - 1));
            let report = probe_optimality(&spec, &ExponentTuple::new(q).unwrap(), &fam, &sizes, &[0], &ProbeOptions::default()).unwrap();
            let expected_slope = q1.recip_f64() - gap_f;
            let expect_growing = !q1.is_infinite() && q1 < lam;
            points += 1;
            c.check((report.slope - expected_slope).abs() <= 0.02, || {
                format!("p={p_str} r={r_str} q1={q1}: slope {} vs {expected_slope}", report.slope)
            });
            c.check((report.verdict == Verdict::Growing) == expect_growing, || {
                format!("p={p_str} r={r_str} q1={q1} (lambda {lam}): verdict {}", report.verdict)
            });
        }
    }
    println!("       {points} (p, r, q_1) probe points");
    c.finish(Duration::from_secs(120));
}

#[test]
fn criterion_5_orlicz_exponent_probe() {
    let mut c = Criterion::new(5, "random-sign growth probe at q = 1.2 and q = 2");
    let family = FamilyDescriptor::new(FamilyKind::RandomSign, 2);
    let sizes = [4, 6, 8, 12, 16];
    let seeds: Vec<u64> = (1..=8).collect();
    let opts = ProbeOptions::default();
    let low = probe_optimality(&ProblemSpec::orlicz(), &tuple("1.2"), &family, &sizes, &seeds, &opts).unwrap();
    let two = probe_optimality(&ProblemSpec::orlicz(), &tuple("2"), &family, &sizes, &seeds, &opts).unwrap();
    println!("       q=1.2 slope {:.4} ({}), q=2 slope {:.4} ({})", low.slope, low.verdict, two.slope, two.verdict);
    for p in &two.points {
        println!("       n={:>2}: median ratio at q=2 {:.6}", p.n, p.ratio);
    }
    c.check(low.rows.iter().chain(&two.rows).all(|r| r.opnorm_exact), || "non-exact opnorm".into());
    c.check((low.slope - 1.0 / 3.0).abs() <= 0.12, || format!("q=1.2 slope {}", low.slope));
    c.check(low.verdict == Verdict::Growing, || format!("q=1.2 verdict {}", low.verdict));
    c.check(two.slope.abs() <= 0.05, || format!("q=2 slope {}", two.slope));
    c.check(two.verdict == Verdict::Bounded, || format!("q=2 verdict {}", two.verdict));
    let worst = two.rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    c.check(worst <= SQRT_2 + 1e-12, || format!("q=2 ratio {worst}"));
    c.finish(Duration::from_secs(300));
}

#[test]
fn criterion_6_property_suites() {
    let mut c = Criterion::new(6, "tensor and operator-norm invariants, determinism under --jobs 1/4");
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let exps_pool = list("1,6/5,3/2,2,3,5,inf");

    // tensor invariants
    for _ in 0..200 {
        let dims: Vec<usize> = (0..3).map(|_| rng.random_range(1..5)).collect();
        let len: usize = dims.iter().product();
        let t = CoefficientTensor::from_real(dims.clone(), (0..len).map(|_| rng.random_range(-3.0..3.0)).collect()).unwrap();
        let mut order = vec![0, 1, 2];
        let shift = rng.random_range(0..3);
        order.rotate_left(shift);
        let exps: Vec<ExtExp> = (0..3).map(|_| exps_pool[rng.random_range(0..exps_pool.len())]).collect();
        let spec = MixedNormSpec::new(order.clone(), ExponentTuple::new(exps.clone()).unwrap()).unwrap();
        let base = t.mixed_norm(&spec).unwrap();

        let k = rng.random_range(0..3);
        let mut bigger = exps.clone();
        bigger[k] = ExtExp::from_recip(bigger[k].recip() / 2).unwrap();
        let up = t.mixed_norm(&MixedNormSpec::new(order.clone(), ExponentTuple::new(bigger).unwrap()).unwrap()).unwrap();
        c.check(up <= base * (1.0 + 1e-12), || format!("monotonicity {up} > {base}"));

        let alpha = rng.random_range(-4.0..4.0);
        let scaled = t.scale(alpha).mixed_norm(&spec).unwrap();
        c.check(rel_err(scaled, alpha.abs() * base) <= 1e-12, || format!("homogeneity {scaled} vs {}", alpha.abs() * base));

        let q = exps[0];
        let flat = t.flat_norm(q);
        for ord in [vec![0, 1, 2], vec![2, 0, 1], vec![1, 2, 0]] {
            let all = t.mixed_norm(&MixedNormSpec::new(ord, ExponentTuple::new(vec![q; 3]).unwrap()).unwrap()).unwrap();
            c.check(rel_err(all, flat) <= 1e-12, || format!("collapse {all} vs {flat}"));
        }

        let n = dims[0];
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let d = diagonal_witness(3, n, Some(&w)).unwrap();
        let got = d.mixed_norm(&spec).unwrap();
        let want = mixnorm::tensor::lq_norm(&w.iter().map(|x| x.abs()).collect::<Vec<_>>(), exps[0]);
        c.check(rel_err(got, want) <= 1e-12, || format!("diagonal identity {got} vs {want}"));
    }

    // mixed Hölder interpolation for the 4/3 norm
    let m12 = MixedNormSpec::natural(list("1,2")).unwrap();
    let m21 = MixedNormSpec::natural(list("2,1")).unwrap();
    for _ in 0..1000 {
        let (a, b) = (rng.random_range(1..9), rng.random_range(1..9));
        let t = random_real_matrix(&mut rng, a, b);
        let lhs = t.flat_norm(e("4/3"));
        let rhs = (t.mixed_norm(&m12).unwrap() * t.mixed_norm(&m21).unwrap()).sqrt();
        c.check(lhs <= rhs * (1.0 + 1e-12), || format!("4/3 interpolation {lhs} > {rhs}"));
    }

    // operator-norm invariants
    let inf2 = [ExtExp::INFINITY; 2];
    for i in 0..40 {
        let t = random_real_matrix(&mut rng, 2 + i % 6, 2 + (i / 6) % 6);
        let exact = opnorm_exact_signs(&t, DEFAULT_ENUMERATION_BUDGET).unwrap();
        let opts = AscentOptions { starts: 8, seed: i as u64, ..Default::default() };
        let asc = opnorm_ascent(&t, &inf2, &opts).unwrap();
        c.check(asc.value <= exact.value + 1e-9, || format!("ascent {} above exact {}", asc.value, exact.value));
        c.check(exact.value >= t.max_abs() && asc.value >= t.max_abs(), || "entry bound".into());
        for est in [&exact, &asc] {
            let at = evaluate_form(&t, &est.certificate).unwrap().norm();
            c.check(rel_err(at, est.value) <= 1e-10, || format!("certificate value {at} vs {}", est.value));
            for x in &est.certificate {
                c.check((vector_norm(x, ExtExp::INFINITY) - 1.0).abs() <= 1e-10, || "certificate norm".into());
            }
        }
        let fin = [e("3"), e("3/2")];
        let asc = opnorm_ascent(&t, &fin, &opts).unwrap();
        for (x, pk) in asc.certificate.iter().zip(&fin) {
            c.check((vector_norm(x, *pk) - 1.0).abs() <= 1e-10, || format!("certificate norm in l_{pk}"));
        }
    }
    let grid = list("1,5/4,3/2,2,3,4,8,inf");
    let w: Vec<f64> = (0..7).map(|_| rng.random_range(-1.0..1.0)).collect();
    for a in 0..grid.len() {
        for b in 0..grid.len() {
            let here = opnorm_diagonal_closed_form(&w, &[grid[a], grid[b]]).unwrap().value;
            if a + 1 < grid.len() {
                let up = opnorm_diagonal_closed_form(&w, &[grid[a + 1], grid[b]]).unwrap().value;
                c.check(up >= here * (1.0 - 1e-12), || format!("ball monotonicity at {} {}", grid[a], grid[b]));
            }
        }
    }

    // determinism under worker counts
    let run = || {
        let fam = FamilyDescriptor::new(FamilyKind::RandomSign, 2);
        let probe = probe_optimality(&ProblemSpec::orlicz(), &tuple("2"), &fam, &[4, 6, 8, 10], &[1, 2, 3], &ProbeOptions::default()).unwrap();
        let spec3 = ProblemSpec::with_identity(list("3,4,inf")).unwrap();
        let fam3 = FamilyDescriptor::new(FamilyKind::RandomSign, 3);
        let probe3 = probe_optimality(&spec3, &tuple("3,2"), &fam3, &[2, 3, 4, 5], &[7, 8], &ProbeOptions::default()).unwrap();
        let mut search = search_constant(4, true, DEFAULT_ENUMERATION_BUDGET).unwrap();
        search.elapsed_secs = None;
        (probe, probe3, search)
    };
    let one = with_jobs(1, run);
    let four = with_jobs(4, run);
    c.check(one == four, || "reports differ between 1 and 4 workers".into());
    c.finish(Duration::from_secs(120));
}
