//! The identity suite run by `verify`, and its JSON report.

use std::sync::Arc;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::fan::Toric;
use crate::linalg;
use crate::mirror::{MirrorEngine, Result};
use crate::seidel::{self, Failure, H2Element, RelationSpan};
use crate::series::TruncatedSeries;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub failures: Vec<Failure>,
}

impl CheckResult {
    fn new(name: &str, failures: Vec<Failure>) -> Self {
        Self { name: name.into(), pass: failures.is_empty(), failures }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub fan_hash: String,
    pub order: u32,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable report")
    }
}

/// SHA-256 of the fan's canonical form together with its divisor basis.
pub fn fan_hash(toric: &Toric) -> String {
    let rows: Vec<String> = toric
        .divisor_matrix()
        .rows()
        .iter()
        .map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>().join(","))
        .collect();
    let text = format!("{};basis=[{}]", toric.fan().canonical_string(), rows.join(";"));
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn series_failures(j: Option<usize>, k: Option<usize>, diff: &TruncatedSeries) -> Vec<Failure> {
    Failure::from_series(j, k, diff)
}

fn element_failures(j: Option<usize>, a: &H2Element, b: &H2Element) -> Vec<Failure> {
    a.coeffs
        .iter()
        .zip(&b.coeffs)
        .enumerate()
        .flat_map(|(k, (x, y))| series_failures(j, Some(k), &(x - y)))
        .collect()
}

fn one(engine: &MirrorEngine) -> TruncatedSeries {
    TruncatedSeries::one(engine.toric().k_ring(), engine.order())
}

fn zero(engine: &MirrorEngine) -> TruncatedSeries {
    TruncatedSeries::zero(engine.toric().k_ring(), engine.order())
}

pub fn check_degeneration(engine: &MirrorEngine) -> Result<CheckResult> {
    let lifts = seidel::seidel_lifts_closed(engine)?;
    let failures = seidel::verify_degeneration(engine.toric(), &lifts, engine.potential())?;
    Ok(CheckResult::new("degeneration", failures))
}

/// `prod_j f_j^{<D_j, d>} = prod_a u_a^{d_a}` for every extremal curve class.
pub fn check_w_batyrev(engine: &MirrorEngine) -> Result<CheckResult> {
    let toric = engine.toric();
    let f = &engine.corrections().f;
    let u = &engine.mirror_map().inverse;
    let mut failures = Vec::new();
    for d in &toric.cones().mori_generators {
        let l = toric.pairings(d);
        let mut lhs = one(engine);
        let mut rhs = one(engine);
        for (j, &lj) in l.iter().enumerate() {
            let p = f[j].pow(u32::try_from(lj.unsigned_abs()).expect("small pairing"));
            if lj > 0 {
                lhs = &lhs * &p;
            } else if lj < 0 {
                rhs = &rhs * &p;
            }
        }
        for (a, &da) in d.iter().enumerate() {
            rhs = &rhs * &u[a].pow(u32::try_from(da).expect("effective class"));
        }
        failures.extend(series_failures(None, None, &(&lhs - &rhs)));
    }
    Ok(CheckResult::new("w_batyrev", failures))
}

/// `sum_j c_j X_j = 0` for every relation `c` among the toric divisors.
fn relation_failures(toric: &Toric, elements: &[H2Element]) -> Vec<Failure> {
    seidel::divisor_relations(toric)
        .iter()
        .enumerate()
        .flat_map(|(idx, c)| {
            seidel::combine(elements, c)
                .coeffs
                .iter()
                .enumerate()
                .flat_map(|(b, s)| series_failures(Some(idx), Some(b), s))
                .collect::<Vec<_>>()
        })
        .collect()
}

pub fn check_linear_relations(engine: &MirrorEngine) -> Result<CheckResult> {
    let batyrev = seidel::batyrev_elements(engine)?;
    Ok(CheckResult::new("linear_relations", relation_failures(engine.toric(), &batyrev)))
}

/// `sum_i <phi, b_i> z_i dw_j/dz_i = <phi, b_j> w_j` in `R`, with `phi`
/// running over the standard basis of the dual lattice.
pub fn check_frks_relations(engine: &MirrorEngine) -> Result<CheckResult> {
    let toric = engine.toric();
    let w = engine.potential();
    let mut failures = Vec::new();
    for phi in 0..toric.n() {
        for (j, wj) in w.terms.iter().enumerate() {
            let mut acc = wj.scale(&linalg::q(-toric.fan().ray(j)[phi]));
            for i in 0..toric.m() {
                let c = toric.fan().ray(i)[phi];
                if c != 0 {
                    acc = acc.checked_add(&wj.log_derivative(i)?.scale(&linalg::q(c)))?;
                }
            }
            failures.extend(series_failures(Some(j), Some(phi), &acc));
        }
    }
    Ok(CheckResult::new("frks_relations", failures))
}

/// `frks(S^_j) = e_j` and `frks(f_j S^_j) = f_j e_j`, with closed-formula lifts.
pub fn check_frks_seidel(engine: &MirrorEngine) -> Result<CheckResult> {
    let lifts = seidel::seidel_lifts_closed(engine)?;
    let f = &engine.corrections().f;
    let mut failures = Vec::new();
    for (j, lift) in lifts.iter().enumerate() {
        let image = seidel::frks(engine.jacobi(), &lift.coeffs)?;
        let scaled: Vec<TruncatedSeries> = lift.coeffs.iter().map(|c| c * &f[j]).collect();
        let image_w = seidel::frks(engine.jacobi(), &scaled)?;
        for k in 0..image.len() {
            let (e, ew) = if j == k { (one(engine), f[j].clone()) } else { (zero(engine), zero(engine)) };
            failures.extend(series_failures(Some(j), Some(k), &(&image[k] - &e)));
            failures.extend(series_failures(Some(j), Some(k), &(&image_w[k] - &ew)));
        }
    }
    Ok(CheckResult::new("frks_seidel", failures))
}

pub fn check_route_agreement(engine: &MirrorEngine) -> Result<CheckResult> {
    let closed = seidel::seidel_lifts_closed(engine)?;
    let jacobi = seidel::seidel_lifts_jacobi(engine)?;
    let failures = closed
        .iter()
        .zip(&jacobi)
        .enumerate()
        .flat_map(|(j, (a, b))| {
            a.coeffs
                .iter()
                .zip(&b.coeffs)
                .enumerate()
                .flat_map(|(i, (x, y))| series_failures(Some(j), Some(i), &(x - y)))
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(CheckResult::new("route_agreement", failures))
}

pub fn check_vertex_vanishing(engine: &MirrorEngine) -> Result<CheckResult> {
    let f = &engine.corrections().f;
    let failures = engine
        .toric()
        .fan_polytope_vertices()
        .iter()
        .flat_map(|&j| series_failures(Some(j), None, &(&f[j] - &one(engine))))
        .collect();
    Ok(CheckResult::new("vertex_vanishing", failures))
}

/// For Fano fans the mirror map, the `g_0` series and the corrections are
/// trivial and the lifts are the divisors themselves. Vacuous otherwise.
pub fn check_fano_triviality(engine: &MirrorEngine) -> Result<CheckResult> {
    let mut failures = Vec::new();
    if engine.toric().is_fano() {
        let asym = engine.asymptotics();
        for g in asym.g.iter().chain(std::iter::once(&asym.g00)).chain(engine.g0()) {
            failures.extend(series_failures(None, None, g));
        }
        for (j, f) in engine.corrections().f.iter().enumerate() {
            failures.extend(series_failures(Some(j), None, &(f - &one(engine))));
        }
        for (j, lift) in seidel::seidel_lifts_closed(engine)?.iter().enumerate() {
            for (i, c) in lift.coeffs.iter().enumerate() {
                let e = if i == j { one(engine) } else { zero(engine) };
                failures.extend(series_failures(Some(j), Some(i), &(c - &e)));
            }
        }
    }
    Ok(CheckResult::new("fano_triviality", failures))
}

pub fn check_lift_projection(engine: &MirrorEngine) -> Result<CheckResult> {
    let toric = engine.toric();
    let seidel_el = seidel::seidel_elements(engine)?;
    let lifts = seidel::seidel_lifts_closed(engine)?;
    let failures = lifts
        .iter()
        .zip(&seidel_el)
        .enumerate()
        .flat_map(|(j, (l, s))| element_failures(Some(j), &l.project(toric), s))
        .collect();
    Ok(CheckResult::new("lift_projection", failures))
}

/// `B_j = f_j S~_j` satisfies the divisor relations, agrees with `S~_j` at
/// vertex rays, and equals `D~_j`.
pub fn check_gi2_closure(engine: &MirrorEngine) -> Result<CheckResult> {
    let toric = engine.toric();
    let s = seidel::seidel_elements(engine)?;
    let d = seidel::batyrev_elements(engine)?;
    let b: Vec<H2Element> =
        s.iter().zip(&engine.corrections().f).map(|(x, f)| x.scale_by(f)).collect();
    let mut failures = relation_failures(toric, &b);
    for &j in toric.fan_polytope_vertices() {
        failures.extend(element_failures(Some(j), &b[j], &s[j]));
    }
    for j in 0..toric.m() {
        failures.extend(element_failures(Some(j), &b[j], &d[j]));
    }
    Ok(CheckResult::new("gi2_closure", failures))
}

pub fn check_mirror_round_trip(engine: &MirrorEngine) -> Result<CheckResult> {
    let failures = engine
        .mirror_map()
        .round_trip_defect()?
        .iter()
        .enumerate()
        .flat_map(|(a, d)| series_failures(Some(a), None, d))
        .collect();
    Ok(CheckResult::new("mirror_round_trip", failures))
}

/// `A[k][i] z_k` against the logarithmic derivative of `w_k` taken in `R`.
pub fn check_jacobi_cross(engine: &MirrorEngine) -> Result<CheckResult> {
    let toric = engine.toric();
    let w = engine.potential();
    let a = engine.jacobi();
    let order = w.total.order();
    let mut failures = Vec::new();
    for (k, wk) in w.terms.iter().enumerate() {
        for i in 0..toric.m() {
            let lifted = a.get(k, i).map_into(toric.disc_ring(), order, |d| toric.embed_class(d, Some(k)))?;
            let diff = wk.log_derivative(i)?.checked_sub(&lifted)?;
            failures.extend(series_failures(Some(k), Some(i), &diff));
        }
    }
    Ok(CheckResult::new("jacobi_cross_check", failures))
}

/// Reduction modulo the relation span annihilates the span, is idempotent,
/// and leaves the unit vectors off the pivot columns in place at degree 0.
pub fn check_reduction(engine: &MirrorEngine) -> Result<CheckResult> {
    let toric = engine.toric();
    let span = RelationSpan::new(toric, &engine.corrections().f)?;
    let mut failures = Vec::new();
    for (phi, g) in span.generators.iter().enumerate() {
        for (j, x) in span.reduce(g)?.iter().enumerate() {
            failures.extend(series_failures(Some(j), Some(phi), x));
        }
    }
    let lifts = seidel::seidel_lifts_closed(engine)?;
    for (j, lift) in lifts.iter().enumerate() {
        let image = seidel::frks(engine.jacobi(), &lift.coeffs)?;
        let reduced = span.reduce(&image)?;
        let twice = span.reduce(&reduced)?;
        for (k, (x, y)) in reduced.iter().zip(&twice).enumerate() {
            failures.extend(series_failures(Some(j), Some(k), &(x - y)));
            if span.pivots().contains(&k) {
                failures.extend(series_failures(Some(j), Some(k), x));
            }
        }
        if !span.pivots().contains(&j) {
            for (k, x) in reduced.iter().enumerate() {
                let e = if j == k { one(engine) } else { zero(engine) };
                failures.extend(series_failures(Some(j), Some(k), &(&x.truncate(0) - &e.truncate(0))));
            }
        }
    }
    Ok(CheckResult::new("relation_reduction", failures))
}

pub fn check_scalar_part(engine: &MirrorEngine) -> Result<CheckResult> {
    let failures = series_failures(None, None, &engine.asymptotics().g00);
    Ok(CheckResult::new("ifunction_scalar_part", failures))
}

pub fn run_verification(toric: Arc<Toric>, order: u32) -> Result<VerificationReport> {
    let engine = MirrorEngine::new(toric, order)?;
    verification_report(&engine)
}

pub fn verification_report(engine: &MirrorEngine) -> Result<VerificationReport> {
    let checks = vec![
        check_degeneration(engine)?,
        check_w_batyrev(engine)?,
        check_linear_relations(engine)?,
        check_frks_relations(engine)?,
        check_frks_seidel(engine)?,
        check_route_agreement(engine)?,
        check_vertex_vanishing(engine)?,
        check_fano_triviality(engine)?,
        check_lift_projection(engine)?,
        check_gi2_closure(engine)?,
        check_mirror_round_trip(engine)?,
        check_jacobi_cross(engine)?,
        check_reduction(engine)?,
        check_scalar_part(engine)?,
    ];
    Ok(VerificationReport { fan_hash: fan_hash(engine.toric()), order: engine.order(), checks })
}
