//! Batyrev and Seidel elements, their lifts, and the Kodaira-Spencer side.

use itertools::Itertools;
use num::Zero;
use serde::Serialize;

use crate::fan::Toric;
use crate::linalg;
use crate::mirror::{self, MirrorEngine, PotentialFunction, Result};
use crate::series::{Exponent, SeriesError, SeriesMatrix, TruncatedSeries};

/// A class in `H^2(X) (x) K`, coordinates in the basis `p_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct H2Element {
    pub coeffs: Vec<TruncatedSeries>,
}

/// A class in `H^2(X, L) (x) K`, coordinates in the basis `D_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedSeidelElement {
    pub coeffs: Vec<TruncatedSeries>,
}

impl H2Element {
    pub fn scale_by(&self, s: &TruncatedSeries) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }
}

impl LiftedSeidelElement {
    /// Image under `D_i -> sum_a m_{a,i} p_a`.
    pub fn project(&self, toric: &Toric) -> H2Element {
        let coeffs = (0..toric.r())
            .map(|a| {
                let mut acc = TruncatedSeries::zero(self.coeffs[0].ring(), self.coeffs[0].order());
                for (i, c) in self.coeffs.iter().enumerate() {
                    let mai = toric.divisor_matrix().entry(a, i);
                    if mai != 0 {
                        acc = &acc + &c.scale(&linalg::q(mai));
                    }
                }
                acc
            })
            .collect();
        H2Element { coeffs }
    }
}

/// `J[a][b] = d log q_b / d log y_a`, as series in `q`.
pub fn log_jacobian(engine: &MirrorEngine) -> Result<Vec<Vec<TruncatedSeries>>> {
    let map = engine.mirror_map();
    let r = map.forward.len();
    let (ring, order) = (engine.toric().k_ring().clone(), engine.order());
    (0..r)
        .map(|a| {
            (0..r)
                .map(|b| {
                    let mut e = map.forward[b].log_derivative(a)?;
                    if a == b {
                        e = &e + &TruncatedSeries::one(&ring, order);
                    }
                    map.to_q(&e)
                })
                .collect()
        })
        .collect()
}

/// `D~_j = sum_a m_{a,j} p~_a` with `p~_a = sum_b J[a][b] p_b`.
pub fn batyrev_elements(engine: &MirrorEngine) -> Result<Vec<H2Element>> {
    let toric = engine.toric();
    let jac = log_jacobian(engine)?;
    let (ring, order) = (toric.k_ring().clone(), engine.order());
    Ok((0..toric.m())
        .map(|j| {
            let coeffs = (0..toric.r())
                .map(|b| {
                    let mut acc = TruncatedSeries::zero(&ring, order);
                    for (a, row) in jac.iter().enumerate() {
                        let maj = toric.divisor_matrix().entry(a, j);
                        if maj != 0 {
                            acc = &acc + &row[b].scale(&linalg::q(maj));
                        }
                    }
                    acc
                })
                .collect();
            H2Element { coeffs }
        })
        .collect())
}

/// `S~_j = exp(-g_0^{(j)}(y(q))) D~_j`.
pub fn seidel_elements(engine: &MirrorEngine) -> Result<Vec<H2Element>> {
    let batyrev = batyrev_elements(engine)?;
    batyrev
        .iter()
        .zip(engine.g0_in_q())
        .map(|(d, g)| Ok(d.scale_by(&(-g).exp()?)))
        .collect()
}

/// Lifts from the inverse Jacobi matrix: `S^_j = sum_i (A^{-1})_{i,j} D_i`.
pub fn seidel_lifts_jacobi(engine: &MirrorEngine) -> Result<Vec<LiftedSeidelElement>> {
    let inv = engine.jacobi().invert()?;
    Ok((0..inv.cols())
        .map(|j| LiftedSeidelElement { coeffs: (0..inv.rows()).map(|i| inv.get(i, j).clone()).collect() })
        .collect())
}

/// Lifts from the closed hypergeometric formula, transported to `q`.
pub fn seidel_lifts_closed(engine: &MirrorEngine) -> Result<Vec<LiftedSeidelElement>> {
    let toric = engine.toric();
    let (m, order) = (toric.m(), engine.order());
    let ring = toric.k_ring();
    let map = engine.mirror_map();
    (0..m)
        .map(|j| {
            let prefactor = (-&engine.g0()[j]).exp()?;
            let coeffs = (0..m)
                .map(|i| {
                    let mut inner = mirror::closed_lift_sum(toric, i, j, order)?;
                    inner = -&inner;
                    if i == j {
                        inner = &inner + &TruncatedSeries::one(ring, order);
                    }
                    map.to_q(&(&prefactor * &inner))
                })
                .collect::<Result<_>>()?;
            Ok(LiftedSeidelElement { coeffs })
        })
        .collect()
}

/// One failing coefficient of an identity check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub exp: Exponent,
    pub coeff: String,
}

impl Failure {
    pub fn from_series(j: Option<usize>, k: Option<usize>, s: &TruncatedSeries) -> Vec<Self> {
        s.terms()
            .map(|(e, c)| Failure { j, k, exp: e.clone(), coeff: c.to_string() })
            .collect()
    }
}

fn embed_in_disc(toric: &Toric, s: &TruncatedSeries, disc_order: u32) -> Result<TruncatedSeries> {
    Ok(s.map_into(toric.disc_ring(), disc_order, |d| toric.embed_class(d, None))?)
}

/// Checks `sum_i S^_j[i] z_i dw_k/dz_i = delta_{jk} z_j` in the ring `R`.
/// Returns the nonzero coefficients of the differences; ray indices in the
/// failures are 0-based.
pub fn verify_degeneration(
    toric: &Toric,
    lifts: &[LiftedSeidelElement],
    potential: &PotentialFunction,
) -> Result<Vec<Failure>> {
    let disc_order = potential.total.order();
    let ring = toric.disc_ring();
    let m = toric.m();
    let derivs: Vec<Vec<TruncatedSeries>> = potential
        .terms
        .iter()
        .map(|w| (0..m).map(|i| w.log_derivative(i)).collect::<std::result::Result<_, _>>())
        .collect::<std::result::Result<_, _>>()?;
    let mut failures = Vec::new();
    for (j, lift) in lifts.iter().enumerate() {
        let embedded: Vec<TruncatedSeries> =
            lift.coeffs.iter().map(|c| embed_in_disc(toric, c, disc_order)).collect::<Result<_>>()?;
        for (k, dk) in derivs.iter().enumerate() {
            let mut acc = TruncatedSeries::zero(ring, disc_order);
            for (s, d) in embedded.iter().zip(dk) {
                acc = acc.checked_add(&s.checked_mul(d)?)?;
            }
            if j == k {
                let mut e = vec![0i64; m];
                e[j] = 1;
                acc = acc.checked_sub(&TruncatedSeries::monomial(ring, disc_order, e, linalg::q(1))?)?;
            }
            failures.extend(Failure::from_series(Some(j), Some(k), &acc));
        }
    }
    Ok(failures)
}

/// `frks(sum_i c_i D_i)_j = sum_i c_i A[j][i]`.
pub fn frks(jacobi: &SeriesMatrix, element: &[TruncatedSeries]) -> Result<Vec<TruncatedSeries>> {
    if element.len() != jacobi.cols() {
        return Err(SeriesError::Shape(format!("{} coefficients for {} divisors", element.len(), jacobi.cols())).into());
    }
    (0..jacobi.rows())
        .map(|j| {
            let mut acc = TruncatedSeries::zero(jacobi.ring(), jacobi.order());
            for (i, c) in element.iter().enumerate() {
                acc = acc.checked_add(&c.checked_mul(jacobi.get(j, i))?)?;
            }
            Ok(acc)
        })
        .collect()
}

/// The relations `v_phi = (<phi, b_j> f_j)_j` for `phi` running over the
/// standard basis of the dual lattice, with a fixed reduction scheme.
#[derive(Debug, Clone)]
pub struct RelationSpan {
    pub generators: Vec<Vec<TruncatedSeries>>,
    pivots: Vec<usize>,
    pivot_inverse: SeriesMatrix,
}

impl RelationSpan {
    pub fn new(toric: &Toric, f: &[TruncatedSeries]) -> Result<Self> {
        let (n, m) = (toric.n(), toric.m());
        let generators: Vec<Vec<TruncatedSeries>> = (0..n)
            .map(|phi| (0..m).map(|j| f[j].scale(&linalg::q(toric.fan().ray(j)[phi]))).collect())
            .collect();
        let pivots = (0..m)
            .combinations(n)
            .find(|p| {
                let rows: Vec<Vec<i64>> = p.iter().map(|&j| toric.fan().ray(j).to_vec()).collect();
                !linalg::det(&rows).is_zero()
            })
            .expect("rays span the lattice");
        let block = SeriesMatrix::from_rows(
            generators.iter().map(|g| pivots.iter().map(|&j| g[j].clone()).collect()).collect(),
        )?;
        let pivot_inverse = block.invert()?;
        Ok(Self { generators, pivots, pivot_inverse })
    }

    /// Columns on which every reduced vector vanishes.
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Subtracts the unique span element agreeing with `x` on the pivots.
    pub fn reduce(&self, x: &[TruncatedSeries]) -> Result<Vec<TruncatedSeries>> {
        let n = self.generators.len();
        let lambda: Vec<TruncatedSeries> = (0..n)
            .map(|phi| {
                let mut acc = TruncatedSeries::zero(self.pivot_inverse.ring(), self.pivot_inverse.order());
                for (t, &p) in self.pivots.iter().enumerate() {
                    acc = acc.checked_add(&x[p].checked_mul(self.pivot_inverse.get(t, phi))?)?;
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        x.iter()
            .enumerate()
            .map(|(j, xj)| {
                let mut acc = xj.clone();
                for (phi, l) in lambda.iter().enumerate() {
                    acc = acc.checked_sub(&l.checked_mul(&self.generators[phi][j])?)?;
                }
                Ok(acc)
            })
            .collect()
    }
}

pub fn reduce_mod_relations(span: &RelationSpan, x: &[TruncatedSeries]) -> Result<Vec<TruncatedSeries>> {
    span.reduce(x)
}

/// Integer vectors `c` with `sum_j c_j D_j = 0`.
pub fn divisor_relations(toric: &Toric) -> Vec<Vec<i64>> {
    linalg::integer_kernel(toric.divisor_matrix().rows(), toric.m())
}

/// `sum_j c_j X_j` for a list of `H^2` elements.
pub fn combine(elements: &[H2Element], c: &[i64]) -> H2Element {
    let first = &elements[0].coeffs[0];
    let coeffs = (0..elements[0].coeffs.len())
        .map(|b| {
            let mut acc = TruncatedSeries::zero(first.ring(), first.order());
            for (e, &cj) in elements.iter().zip(c) {
                if cj != 0 {
                    acc = &acc + &e.coeffs[b].scale(&linalg::q(cj));
                }
            }
            acc
        })
        .collect();
    H2Element { coeffs }
}

pub fn is_zero_element(x: &[TruncatedSeries]) -> bool {
    x.iter().all(TruncatedSeries::is_zero)
}
