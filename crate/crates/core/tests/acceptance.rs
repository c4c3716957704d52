//! Acceptance criteria, one printed PASS/FAIL line each.
//!
//! Run with `cargo test -p toric-mirror --test acceptance -- --nocapture`.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use toric_mirror::builtins::{builtin, BUILTIN_NAMES};
use toric_mirror::fan::Toric;
use toric_mirror::mirror::{self, MirrorEngine};
use toric_mirror::seidel;
use toric_mirror::series::{rat, Rational, RingDescriptor, SeriesMatrix, TruncatedSeries};
use toric_mirror::verify;

type Outcome = Result<String, String>;

fn toric(name: &str) -> Arc<Toric> {
    Arc::new(builtin(name).unwrap().toric().unwrap())
}

fn engine(name: &str, order: u32) -> MirrorEngine {
    MirrorEngine::new(toric(name), order).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn k_series(t: &Toric, order: u32, terms: &[(Vec<i64>, Rational)]) -> TruncatedSeries {
    TruncatedSeries::from_terms(t.k_ring(), order, terms.iter().cloned()).unwrap()
}

fn q1_geometric(t: &Toric, order: u32, from: i64) -> TruncatedSeries {
    let terms: Vec<(Vec<i64>, Rational)> = (from..=i64::from(order)).map(|k| (vec![k, 0], Rational::one())).collect();
    k_series(t, order, &terms)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let n = 8;
    let e = engine("f2", n);
    let t = e.toric().clone();
    let one = TruncatedSeries::one(t.k_ring(), n);
    let zero = TruncatedSeries::zero(t.k_ring(), n);
    let f2 = k_series(&t, n, &[(vec![0, 0], rat(1, 1)), (vec![1, 0], rat(1, 1))]);
    let expected_f = vec![one.clone(), f2, one.clone(), one.clone()];
    ensure(e.corrections().f == expected_f, || "correction terms differ from (1, 1+q1, 1, 1)".into())?;

    // W = z1 + z2 + z3 + z4 + q1 z2, with q1 = z2^-2 z3 z4
    let w_terms = vec![
        (vec![1, 0, 0, 0], rat(1, 1)),
        (vec![0, 1, 0, 0], rat(1, 1)),
        (vec![0, 0, 1, 0], rat(1, 1)),
        (vec![0, 0, 0, 1], rat(1, 1)),
        (vec![0, -1, 1, 1], rat(1, 1)),
    ];
    let w = TruncatedSeries::from_terms(t.disc_ring(), t.disc_order(n), w_terms).unwrap();
    ensure(e.potential().total == w, || format!("W = {}", e.potential().total.pretty("z")))?;

    // columns of the F2 lift matrix: S^_2 = D_2/(1-q1), S^_{3,4} = D_{3,4} - q1/(1-q1) D_2
    let geo = q1_geometric(&t, n, 0);
    let tail = -&q1_geometric(&t, n, 1);
    let expected = [
        vec![one.clone(), zero.clone(), zero.clone(), zero.clone()],
        vec![zero.clone(), geo, zero.clone(), zero.clone()],
        vec![zero.clone(), tail.clone(), one.clone(), zero.clone()],
        vec![zero.clone(), tail, zero, one],
    ];
    let closed = seidel::seidel_lifts_closed(&e).map_err(|x| x.to_string())?;
    for (j, (got, want)) in closed.iter().zip(&expected).enumerate() {
        ensure(&got.coeffs == want, || format!("lift {} differs", j + 1))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("f, W and lift matrix exact at order 8 in {:.3}s", elapsed.as_secs_f64()))
}

fn criterion_2() -> Outcome {
    let n = 8;
    for name in ["p1", "p2", "f0", "f1"] {
        let e = engine(name, n);
        let t = e.toric().clone();
        let one = TruncatedSeries::one(t.k_ring(), n);
        let zero = TruncatedSeries::zero(t.k_ring(), n);
        let map = e.mirror_map();
        ensure(map.forward.iter().all(TruncatedSeries::is_zero), || format!("{name}: g != 0"))?;
        ensure(map.inverse.iter().all(|u| *u == one), || format!("{name}: inverse map not identity"))?;
        ensure(e.g0().iter().all(TruncatedSeries::is_zero), || format!("{name}: g0 != 0"))?;
        ensure(e.corrections().f.iter().all(|f| *f == one), || format!("{name}: f != 1"))?;
        let routes = [seidel::seidel_lifts_closed(&e), seidel::seidel_lifts_jacobi(&e)];
        for lifts in routes {
            let lifts = lifts.map_err(|x| x.to_string())?;
            for (j, l) in lifts.iter().enumerate() {
                for (i, c) in l.coeffs.iter().enumerate() {
                    let want = if i == j { &one } else { &zero };
                    ensure(c == want, || format!("{name}: lift {} not D_{}", j + 1, j + 1))?;
                }
            }
        }
    }
    Ok("P1, P2, F0, F1 trivial at order 8".into())
}

fn criterion_3() -> Outcome {
    let mut counts = Vec::new();
    for name in ["f2", "p1xf2"] {
        let e = engine(name, 6);
        let a = seidel::seidel_lifts_closed(&e).map_err(|x| x.to_string())?;
        let b = seidel::seidel_lifts_jacobi(&e).map_err(|x| x.to_string())?;
        ensure(a == b, || format!("{name}: routes differ"))?;
        let terms: usize = a.iter().flat_map(|l| &l.coeffs).map(TruncatedSeries::len).sum();
        counts.push(format!("{name}: {terms} coefficients"));
    }
    Ok(counts.join(", "))
}

fn criterion_4() -> Outcome {
    for name in BUILTIN_NAMES {
        let e = engine(name, 6);
        let check = verify::check_degeneration(&e).map_err(|x| x.to_string())?;
        ensure(check.pass, || format!("{name}: {:?}", &check.failures[..check.failures.len().min(3)]))?;
    }
    let e = engine("f2", 6);
    let t = e.toric().clone();
    let mut f = e.corrections().f.clone();
    f[1] = k_series(&t, 6, &[(vec![0, 0], rat(1, 1)), (vec![1, 0], rat(2, 1))]);
    let bad = mirror::potential_from(&t, &f).map_err(|x| x.to_string())?;
    let lifts = seidel::seidel_lifts_closed(&e).map_err(|x| x.to_string())?;
    let failures = seidel::verify_degeneration(&t, &lifts, &bad).map_err(|x| x.to_string())?;
    let located = failures.iter().find(|x| {
        let j = x.j.unwrap();
        x.exp == t.embed_class(&[1, 0], Some(j))
    });
    let hit = located.ok_or_else(|| "corrupted f2 not located at q1 z_j".to_string())?;
    Ok(format!(
        "all builtins pass; corrupted f2 caught at j={} k={} exp={:?} coeff={}",
        hit.j.unwrap() + 1,
        hit.k.unwrap() + 1,
        hit.exp,
        hit.coeff
    ))
}

/// Independent expansion of the F2 I-function `1/z` term.
///
/// Elements are maps `(power of z, divisor index or none) -> coefficient`
/// with `D_i D_j = 0`.
mod i_oracle {
    use super::*;

    pub type Elt = BTreeMap<(i64, Option<usize>), Rational>;

    fn mul(a: &Elt, b: &Elt) -> Elt {
        let mut out = Elt::new();
        for ((za, da), ca) in a {
            for ((zb, db), cb) in b {
                let d = match (da, db) {
                    (Some(_), Some(_)) => continue,
                    (Some(i), None) | (None, Some(i)) => Some(*i),
                    (None, None) => None,
                };
                *out.entry((za + zb, d)).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// `D_i + k z`.
    fn linear(i: usize, k: i64) -> Elt {
        let mut e = Elt::new();
        e.insert((0, Some(i)), Rational::one());
        if k != 0 {
            e.insert((1, None), rat(k, 1));
        }
        e
    }

    /// `1 / (D_i + k z) = 1/(k z) - D_i/(k z)^2` for `k != 0`.
    fn inverse_linear(i: usize, k: i64) -> Elt {
        let mut e = Elt::new();
        e.insert((-1, None), rat(1, k));
        e.insert((-2, Some(i)), rat(-1, k * k));
        e
    }

    /// The coefficients of `D_i / z` and of `1/z` in the `y^d` summand.
    pub fn one_over_z(l: &[i64]) -> (Vec<Rational>, Rational) {
        let mut acc = Elt::new();
        acc.insert((0, None), Rational::one());
        for (i, &li) in l.iter().enumerate() {
            if li >= 0 {
                for k in 1..=li {
                    acc = mul(&acc, &inverse_linear(i, k));
                }
            } else {
                for k in li + 1..=0 {
                    acc = mul(&acc, &linear(i, k));
                }
            }
        }
        let get = |key: (i64, Option<usize>)| acc.get(&key).cloned().unwrap_or_else(Rational::zero);
        ((0..l.len()).map(|i| get((-1, Some(i)))).collect(), get((-1, None)))
    }
}

fn criterion_5() -> Outcome {
    for name in BUILTIN_NAMES {
        let e = engine(name, 6);
        let check = verify::check_w_batyrev(&e).map_err(|x| x.to_string())?;
        ensure(check.pass, || format!("{name}: {:?}", &check.failures[..check.failures.len().min(3)]))?;
    }
    // F2: g from the oracle expansion, then y1 = q1/(1+q1)^2 and y2 = q2(1+q1)
    let n = 4;
    let e = engine("f2", n);
    let t = e.toric().clone();
    let m = [[0i64, -2, 1, 1], [1, 1, 0, 0]];
    let mut g = [Vec::new(), Vec::new()];
    for d1 in 0..=n as i64 {
        for d2 in 0..=(n as i64 - d1) {
            let l = [d2, d2 - 2 * d1, d1, d1];
            let (lin, scalar) = i_oracle::one_over_z(&l);
            ensure(scalar.is_zero() || (d1, d2) == (0, 0), || format!("scalar 1/z term at {:?}", (d1, d2)))?;
            for a in 0..2 {
                let c: Rational = (0..4).map(|i| &lin[i] * rat(m[a][i], 1)).sum();
                if !c.is_zero() {
                    g[a].push((vec![d1, d2], c));
                }
            }
        }
    }
    let g: Vec<TruncatedSeries> = g.iter().map(|terms| k_series(&t, n, terms)).collect();
    ensure(e.mirror_map().forward == g, || "engine g differs from the oracle expansion".into())?;
    let one = TruncatedSeries::one(t.k_ring(), n);
    let y1 = k_series(&t, n, &[(vec![1, 0], rat(1, 1))]);
    let q1 = &y1 * &g[0].exp().unwrap();
    let s = &one + &q1;
    ensure(&q1 * &(&s * &s).invert().unwrap() == y1, || "y1 != q1/(1+q1)^2".into())?;
    ensure(&g[1].exp().unwrap() * &s == one, || "y2 != q2 (1+q1)".into())?;
    Ok("all builtins at order 6; F2 mirror map certified against the oracle at order 4".into())
}

fn criterion_6() -> Outcome {
    for name in BUILTIN_NAMES {
        let e = engine(name, 6);
        let check = verify::check_frks_relations(&e).map_err(|x| x.to_string())?;
        ensure(check.pass, || format!("{name}: {:?}", &check.failures[..check.failures.len().min(3)]))?;
    }
    Ok("all builtins, every basis vector of M, every j, order 6".into())
}

fn criterion_7() -> Outcome {
    let cases: [(&str, &[usize]); 2] = [("f2", &[0, 2, 3]), ("p1xf2", &[0, 2, 3, 4, 5])];
    for (name, vertices) in cases {
        let e = engine(name, 6);
        let got: Vec<usize> = e.toric().fan_polytope_vertices().iter().copied().collect();
        ensure(got == vertices, || format!("{name}: vertices {got:?}"))?;
        let one = TruncatedSeries::one(e.toric().k_ring(), 6);
        for &j in vertices {
            ensure(e.corrections().f[j] == one, || format!("{name}: f_{} != 1", j + 1))?;
        }
        ensure(e.corrections().f[1] != one, || format!("{name}: f_2 unexpectedly trivial"))?;
    }
    Ok("F2 vertices {1,3,4}, P1xF2 vertices {1,3,4,5,6}: f_j = 1 there".into())
}

fn criterion_8() -> Outcome {
    for name in BUILTIN_NAMES {
        let e = engine(name, 6);
        let check = verify::check_gi2_closure(&e).map_err(|x| x.to_string())?;
        ensure(check.pass, || format!("{name}: {:?}", &check.failures[..check.failures.len().min(3)]))?;
    }
    Ok("B_j = f_j S~_j satisfies the relations and equals D~_j on all builtins".into())
}

const CASES: usize = 1000;

fn random_series(rng: &mut ChaCha8Rng, ring: &Arc<RingDescriptor>, order: u32, constant: Option<Rational>) -> TruncatedSeries {
    let n = ring.variable_count();
    let count = rng.gen_range(0..6);
    let mut terms = Vec::new();
    for _ in 0..count {
        let e: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=2)).collect();
        let c = rat(rng.gen_range(-5..=5), rng.gen_range(1..=4));
        terms.push((e, c));
    }
    let mut s = TruncatedSeries::from_terms(ring, order, terms).unwrap();
    if let Some(c0) = constant {
        let shift = c0 - s.constant_term();
        s = &s + &TruncatedSeries::constant(ring, order, shift);
    }
    s
}

fn property_suite(name: &str, mut body: impl FnMut(&mut ChaCha8Rng) -> Result<(), String>) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ name.len() as u64);
    for case in 0..CASES {
        body(&mut rng).map_err(|e| format!("{name} case {case}: {e}"))?;
    }
    Ok(format!("{name} x{CASES}"))
}

fn criterion_9() -> Outcome {
    let ring = RingDescriptor::orthant(3);
    let order = 5;
    let mut done = Vec::new();
    done.push(property_suite("ring laws", |rng| {
        let a = random_series(rng, &ring, order, None);
        let b = random_series(rng, &ring, order, None);
        let c = random_series(rng, &ring, order, None);
        ensure(&(&a * &b) * &c == &a * &(&b * &c), || "associativity".into())?;
        ensure(&a * &b == &b * &a, || "commutativity".into())?;
        ensure(&a * &(&b + &c) == &(&a * &b) + &(&a * &c), || "distributivity".into())?;
        ensure(&(&a + &b) - &b == a, || "additive inverse".into())
    })?);
    done.push(property_suite("exp/log/invert", |rng| {
        let s = random_series(rng, &ring, order, Some(Rational::zero()));
        let u = random_series(rng, &ring, order, Some(Rational::one()));
        let c0 = rat(rng.gen_range(1..=4), rng.gen_range(1..=3));
        let v = random_series(rng, &ring, order, Some(c0));
        ensure(s.exp().unwrap().log().unwrap() == s, || "log(exp s) != s".into())?;
        ensure(u.log().unwrap().exp().unwrap() == u, || "exp(log u) != u".into())?;
        ensure(&v * &v.invert().unwrap() == TruncatedSeries::one(&ring, order), || "v v^-1 != 1".into())?;
        ensure(s.exp().unwrap() == s.exp_taylor().unwrap(), || "exp routes differ".into())?;
        ensure(u.log().unwrap() == u.log_taylor().unwrap(), || "log routes differ".into())
    })?);
    done.push(property_suite("substitution homomorphism", |rng| {
        let a = random_series(rng, &ring, order, None);
        let b = random_series(rng, &ring, order, None);
        let units: Vec<TruncatedSeries> = (0..3)
            .map(|_| {
                let c0 = rat(rng.gen_range(1..=3), 1);
                random_series(rng, &ring, order, Some(c0))
            })
            .collect();
        let sub = |x: &TruncatedSeries| x.substitute(&units).unwrap();
        ensure(sub(&(&a * &b)) == &sub(&a) * &sub(&b), || "products".into())?;
        ensure(sub(&(&a + &b)) == &sub(&a) + &sub(&b), || "sums".into())
    })?);
    done.push(property_suite("matrix inverse", |rng| {
        let n = rng.gen_range(1..=3);
        // unimodular-ish constant part: identity plus a strictly upper triangular shift
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let c0 = if i == j {
                    rat(rng.gen_range(1..=3), 1)
                } else if j > i {
                    rat(rng.gen_range(-2..=2), 1)
                } else {
                    Rational::zero()
                };
                let mut s = random_series(rng, &ring, order, None);
                s = &s + &TruncatedSeries::constant(&ring, order, c0 - s.constant_term());
                entries.push(s);
            }
        }
        let a = SeriesMatrix::new(n, n, entries).unwrap();
        let inv = a.invert().unwrap();
        let id = SeriesMatrix::identity(&ring, order, n);
        ensure(a.checked_mul(&inv).unwrap() == id, || "A A^-1 != I".into())?;
        ensure(inv.checked_mul(&a).unwrap() == id, || "A^-1 A != I".into())
    })?);
    Ok(done.join(", "))
}

fn criterion_10(earlier: &[bool]) -> Outcome {
    // shadows of the out-of-scope results are criteria 3 to 6
    ensure(earlier[2..6].iter().all(|&x| x), || "a toric shadow criterion (3-6) failed".into())?;
    Ok("general degeneration formula, virtual cycles and quantum-product relations are out of scope; toric shadows (3-6) pass".into())
}

#[test]
fn acceptance() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("F2 golden pipeline", criterion_1),
        ("Fano suite", criterion_2),
        ("route agreement", criterion_3),
        ("degeneration identity", criterion_4),
        ("w-Batyrev relation", criterion_5),
        ("frks relation identity", criterion_6),
        ("vertex vanishing", criterion_7),
        ("GI2 closure", criterion_8),
        ("kernel property suites", criterion_9),
    ];
    let mut results = Vec::new();
    for (k, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        match &outcome {
            Ok(msg) => println!("criterion {}: PASS {name}: {msg}", k + 1),
            Err(msg) => println!("criterion {}: FAIL {name}: {msg}", k + 1),
        }
        results.push(outcome.is_ok());
    }
    let last = criterion_10(&results);
    match &last {
        Ok(msg) => println!("criterion 10: PASS scope boundary: {msg}"),
        Err(msg) => println!("criterion 10: FAIL scope boundary: {msg}"),
    }
    results.push(last.is_ok());
    assert!(results.iter().all(|&x| x), "acceptance failures: {results:?}");
}
