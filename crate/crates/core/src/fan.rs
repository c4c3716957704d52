//! Smooth complete fans, their divisor data, curve classes and cones.
//!
//! [`Fan`] is the raw combinatorial input. [`Toric`] bundles a fan that
//! passed every gate (smooth, complete, projective, semi-positive) with a
//! validated nef integral divisor basis; everything downstream works from it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use num::{Signed, ToPrimitive};
use num_complex::Complex64;
use thiserror::Error;

use crate::cone;
use crate::linalg;
use crate::series::{Exponent, Rational, RingDescriptor, ShiftedCone, Support};

/// Largest coefficient sum used when searching for a unimodular nef basis.
pub const BASIS_SEARCH_HEIGHT: i64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Smooth,
    Complete,
    Projective,
    SemiPositive,
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gate::Smooth => "smooth",
            Gate::Complete => "complete",
            Gate::Projective => "projective",
            Gate::SemiPositive => "semi-positive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FanError {
    #[error("lattice dimension must be positive")]
    ZeroDimension,
    #[error("fan has no rays")]
    NoRays,
    #[error("fan has no maximal cones")]
    NoCones,
    #[error("ray {ray} has {len} entries, expected {dim}")]
    RayLength { ray: usize, len: usize, dim: usize },
    #[error("ray {0} not primitive")]
    NotPrimitive(usize),
    #[error("rays {0} and {1} coincide")]
    DuplicateRay(usize, usize),
    #[error("maximal cone {cone} has {len} rays, expected {dim}")]
    ConeSize { cone: usize, len: usize, dim: usize },
    #[error("maximal cone {cone} refers to ray {ray}, which does not exist")]
    ConeIndex { cone: usize, ray: usize },
    #[error("maximal cone {cone} repeats ray {ray}")]
    ConeRepeat { cone: usize, ray: usize },
    #[error("maximal cones {0} and {1} coincide")]
    DuplicateCone(usize, usize),
    #[error("ray {0} lies in no maximal cone")]
    UnusedRay(usize),
    #[error("fan is not {gate}: {detail}")]
    GateFailed { gate: Gate, detail: String },
    #[error("wall {wall:?} lies in {count} maximal cones")]
    BadWall { wall: Vec<usize>, count: usize },
    #[error("divisor matrix rejected: {0}")]
    InvalidBasis(String),
    #[error(
        "no unimodular nef basis found among combinations of nef generators with coefficient sum <= {0}; supply [basis] divisor_matrix"
    )]
    BasisSearchFailed(i64),
    #[error("lift is not a Kähler class: {0}")]
    NonKahlerLift(String),
    #[error("coordinate z_{0} must satisfy 0 < |z| < 1")]
    OutsideDisc(usize),
    #[error("expected {expected} entries, got {got}")]
    Length { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, FanError>;

/// Rays and maximal cones of a fan in `Z^n`; cone indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fan {
    dim: usize,
    rays: Vec<Vec<i64>>,
    max_cones: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FanReport {
    pub smooth: bool,
    pub complete: bool,
    pub projective: bool,
    pub semi_positive: bool,
    pub fano: bool,
}

impl FanReport {
    pub fn first_failure(&self) -> Option<Gate> {
        [
            (self.smooth, Gate::Smooth),
            (self.complete, Gate::Complete),
            (self.projective, Gate::Projective),
            (self.semi_positive, Gate::SemiPositive),
        ]
        .into_iter()
        .find(|(ok, _)| !ok)
        .map(|(_, g)| g)
    }
}

/// The class of the torus-invariant curve over a wall, recorded by its
/// intersection numbers with the toric divisors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WallCurve {
    /// Ray indices spanning the wall.
    pub wall: Vec<usize>,
    /// The two rays completing the wall to a maximal cone.
    pub opposite: (usize, usize),
    /// `pairings[i] = <D_i, C>`.
    pub pairings: Vec<i64>,
}

impl WallCurve {
    pub fn c1(&self) -> i64 {
        self.pairings.iter().sum()
    }
}

impl Fan {
    pub fn new(dim: usize, rays: Vec<Vec<i64>>, max_cones: Vec<Vec<usize>>) -> Result<Self> {
        if dim == 0 {
            return Err(FanError::ZeroDimension);
        }
        if rays.is_empty() {
            return Err(FanError::NoRays);
        }
        if max_cones.is_empty() {
            return Err(FanError::NoCones);
        }
        for (i, ray) in rays.iter().enumerate() {
            if ray.len() != dim {
                return Err(FanError::RayLength { ray: i + 1, len: ray.len(), dim });
            }
            if linalg::gcd_all(ray) != 1 {
                return Err(FanError::NotPrimitive(i + 1));
            }
        }
        for (i, j) in (0..rays.len()).tuple_combinations() {
            if rays[i] == rays[j] {
                return Err(FanError::DuplicateRay(i + 1, j + 1));
            }
        }
        let mut cones = Vec::with_capacity(max_cones.len());
        for (c, cone) in max_cones.iter().enumerate() {
            if cone.len() != dim {
                return Err(FanError::ConeSize { cone: c + 1, len: cone.len(), dim });
            }
            if let Some(&bad) = cone.iter().find(|&&i| i >= rays.len()) {
                return Err(FanError::ConeIndex { cone: c + 1, ray: bad + 1 });
            }
            let sorted: Vec<usize> = cone.iter().copied().sorted().collect();
            if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
                return Err(FanError::ConeRepeat { cone: c + 1, ray: w[0] + 1 });
            }
            if let Some(prev) = cones.iter().position(|p| *p == sorted) {
                return Err(FanError::DuplicateCone(prev + 1, c + 1));
            }
            cones.push(sorted);
        }
        let used: BTreeSet<usize> = cones.iter().flatten().copied().collect();
        if let Some(i) = (0..rays.len()).find(|i| !used.contains(i)) {
            return Err(FanError::UnusedRay(i + 1));
        }
        Ok(Self { dim, rays, max_cones: cones })
    }

    /// Lattice rank `n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Ray count `m`.
    pub fn ray_count(&self) -> usize {
        self.rays.len()
    }

    /// Picard rank `m - n` of the toric variety (meaningful once complete).
    pub fn picard_rank(&self) -> usize {
        self.rays.len().saturating_sub(self.dim)
    }

    pub fn rays(&self) -> &[Vec<i64>] {
        &self.rays
    }

    pub fn ray(&self, i: usize) -> &[i64] {
        &self.rays[i]
    }

    /// Maximal cones as sorted 0-based index lists.
    pub fn max_cones(&self) -> &[Vec<usize>] {
        &self.max_cones
    }

    /// Each wall with the maximal cones containing it, as `(cone, opposite ray)`.
    pub fn walls(&self) -> BTreeMap<Vec<usize>, Vec<(usize, usize)>> {
        let mut out: BTreeMap<Vec<usize>, Vec<(usize, usize)>> = BTreeMap::new();
        for (c, cone) in self.max_cones.iter().enumerate() {
            for &skip in cone {
                let wall: Vec<usize> = cone.iter().copied().filter(|&i| i != skip).collect();
                out.entry(wall).or_default().push((c, skip));
            }
        }
        out
    }

    fn cone_matrix(&self, cone: &[usize]) -> Vec<Vec<i64>> {
        cone.iter().map(|&i| self.rays[i].clone()).collect()
    }

    pub fn is_smooth(&self) -> bool {
        self.max_cones
            .iter()
            .all(|c| linalg::det(&self.cone_matrix(c)).abs() == num::BigInt::from(1))
    }

    pub fn is_complete(&self) -> bool {
        !self.max_cones.is_empty() && self.walls().values().all(|v| v.len() == 2)
    }

    /// One class per wall. Requires a smooth fan whose walls each lie in
    /// exactly two maximal cones.
    pub fn wall_curves(&self) -> Result<Vec<WallCurve>> {
        if !self.is_smooth() {
            return Err(FanError::GateFailed {
                gate: Gate::Smooth,
                detail: "a maximal cone has determinant other than ±1".into(),
            });
        }
        let m = self.rays.len();
        let mut out = Vec::new();
        for (wall, cones) in self.walls() {
            if cones.len() != 2 {
                return Err(FanError::BadWall { wall, count: cones.len() });
            }
            let ((c, i), (_, j)) = (cones[0], cones[1]);
            let sigma = &self.max_cones[c];
            // b_j in the basis of sigma
            let a = linalg::to_q_matrix(&linalg::transpose(&self.cone_matrix(sigma)));
            let b: Vec<Rational> = self.rays[j].iter().map(|&x| linalg::q(x)).collect();
            let coeffs = linalg::solve(&a, &b).expect("unimodular cone");
            let mut pairings = vec![0i64; m];
            pairings[j] = 1;
            for (k, ck) in sigma.iter().zip(&coeffs) {
                pairings[*k] = -ck.to_integer().to_i64().expect("small coefficient");
            }
            out.push(WallCurve { wall, opposite: (i.min(j), i.max(j)), pairings });
        }
        Ok(out)
    }

    /// Integer basis of the relations among the rays, one relation per row
    /// (`r x m`). Its columns give the divisor classes in the dual basis.
    pub fn relation_basis(&self) -> Vec<Vec<i64>> {
        let b = linalg::transpose(&self.rays);
        linalg::integer_kernel(&b, self.rays.len())
    }

    pub fn validate(&self) -> FanReport {
        let smooth = self.is_smooth();
        let complete = self.is_complete();
        let mut report =
            FanReport { smooth, complete, projective: false, semi_positive: false, fano: false };
        if !(smooth && complete) {
            return report;
        }
        let walls = self.wall_curves().expect("smooth complete fan");
        let r = self.picard_rank();
        let m0 = self.relation_basis();
        let r0 = linalg::integer_right_inverse(&m0, self.rays.len()).expect("saturated kernel");
        let mori: Vec<Vec<i64>> = walls.iter().map(|w| class_coordinates(&r0, &w.pairings)).collect();
        let nef = cone::dual_cone_rays(&mori, r);
        report.projective = linalg::rank_z(&mori) == r && linalg::rank_z(&nef) == r;
        report.semi_positive = walls.iter().all(|w| w.c1() >= 0);
        report.fano = walls.iter().all(|w| w.c1() > 0);
        report
    }

    /// Indices `i` such that `b_i` is a vertex of the convex hull of all rays.
    pub fn fan_polytope_vertices(&self) -> BTreeSet<usize> {
        let lifted: Vec<Vec<i64>> =
            self.rays.iter().map(|b| b.iter().copied().chain([1]).collect()).collect();
        (0..self.rays.len())
            .filter(|&i| {
                let others: Vec<Vec<i64>> = lifted
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != i)
                    .map(|(_, v)| v.clone())
                    .collect();
                !cone::in_cone_by_combination(&others, &lifted[i])
            })
            .collect()
    }

    /// Stable textual form used for hashing.
    pub fn canonical_string(&self) -> String {
        let rays = self.rays.iter().map(|r| r.iter().join(",")).join(";");
        let cones = self.max_cones.iter().map(|c| c.iter().join(",")).join(";");
        format!("dim={};rays=[{}];cones=[{}]", self.dim, rays, cones)
    }
}

/// Coordinates `R^T l` of a class given by divisor pairings `l`, where `R` is
/// a right inverse of the divisor matrix.
fn class_coordinates(right_inverse: &[Vec<i64>], pairings: &[i64]) -> Vec<i64> {
    let r = right_inverse.first().map_or(0, Vec::len);
    (0..r)
        .map(|a| right_inverse.iter().zip(pairings).map(|(row, l)| row[a] * l).sum())
        .collect()
}

/// Generators of the Mori cone and the nef cone in a fixed basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConePair {
    /// Extremal curve classes, coordinates `d_a = <p_a, C>`.
    pub mori_generators: Vec<Vec<i64>>,
    /// Primitive nef classes, coordinates in the basis `p_a`.
    pub nef_generators: Vec<Vec<i64>>,
}

impl ConePair {
    fn from_classes(classes: &[Vec<i64>], r: usize) -> Self {
        Self {
            mori_generators: cone::extremal_rays(classes, r),
            nef_generators: cone::dual_cone_rays(classes, r),
        }
    }

    pub fn mori_contains(&self, d: &[i64]) -> bool {
        self.nef_generators.iter().all(|h| linalg::dot(h, d) >= 0)
    }

    pub fn nef_contains(&self, x: &[Rational]) -> bool {
        self.mori_generators.iter().all(|g| !rational_pairing(x, g).is_negative())
    }

    pub fn ample_contains(&self, x: &[Rational]) -> bool {
        self.mori_generators.iter().all(|g| rational_pairing(x, g).is_positive())
    }
}

fn rational_pairing(x: &[Rational], d: &[i64]) -> Rational {
    x.iter().zip(d).map(|(a, &b)| a * linalg::q(b)).sum()
}

/// A presentation `D_i = sum_a m[a][i] p_a` of the toric divisors in a nef
/// integral basis of `H^2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisorMatrix {
    rows: Vec<Vec<i64>>,
    right_inverse: Vec<Vec<i64>>,
}

impl DivisorMatrix {
    /// Validates a user-supplied matrix against the fan's rays and walls.
    pub fn checked(fan: &Fan, walls: &[WallCurve], rows: Vec<Vec<i64>>) -> Result<Self> {
        let (m, r) = (fan.ray_count(), fan.picard_rank());
        if rows.len() != r {
            return Err(FanError::InvalidBasis(format!("expected {r} rows, got {}", rows.len())));
        }
        for (a, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(FanError::InvalidBasis(format!(
                    "row {} has {} entries, expected {m}",
                    a + 1,
                    row.len()
                )));
            }
            let relation: Vec<i64> =
                (0..fan.dim()).map(|k| (0..m).map(|i| row[i] * fan.ray(i)[k]).sum()).collect();
            if relation.iter().any(|&x| x != 0) {
                return Err(FanError::InvalidBasis(format!(
                    "row {} does not annihilate the rays",
                    a + 1
                )));
            }
        }
        let right_inverse = linalg::integer_right_inverse(&rows, m).ok_or_else(|| {
            FanError::InvalidBasis("rows do not form an integral basis of H^2".into())
        })?;
        for w in walls {
            let d = class_coordinates(&right_inverse, &w.pairings);
            if let Some(a) = d.iter().position(|&x| x < 0) {
                return Err(FanError::InvalidBasis(format!(
                    "row {} is not nef: pairs to {} with the curve over wall {:?}",
                    a + 1,
                    d[a],
                    w.wall.iter().map(|i| i + 1).collect::<Vec<_>>()
                )));
            }
        }
        Ok(Self { rows, right_inverse })
    }

    /// Searches small nonnegative combinations of nef generators for a
    /// unimodular basis.
    pub fn derive(fan: &Fan, walls: &[WallCurve]) -> Result<Self> {
        let (m, r) = (fan.ray_count(), fan.picard_rank());
        let m0 = fan.relation_basis();
        let r0 = linalg::integer_right_inverse(&m0, m).expect("saturated kernel");
        let classes: Vec<Vec<i64>> = walls.iter().map(|w| class_coordinates(&r0, &w.pairings)).collect();
        let nef = cone::dual_cone_rays(&classes, r);
        let mut candidates: Vec<Vec<i64>> = Vec::new();
        for height in 1..=BASIS_SEARCH_HEIGHT {
            let mut level: Vec<Vec<i64>> = compositions(nef.len(), height)
                .into_iter()
                .map(|c| {
                    let v: Vec<i64> = (0..r)
                        .map(|b| c.iter().zip(&nef).map(|(ct, g)| ct * g[b]).sum())
                        .collect();
                    linalg::primitive(&v)
                })
                .filter(|v| v.iter().any(|&x| x != 0))
                .collect();
            level.sort();
            level.dedup();
            let before = candidates.len();
            for v in level {
                if !candidates.contains(&v) {
                    candidates.push(v);
                }
            }
            if candidates.len() == before {
                continue;
            }
            for subset in (0..candidates.len()).combinations(r) {
                let v: Vec<Vec<i64>> = subset.iter().map(|&k| candidates[k].clone()).collect();
                if linalg::det(&v).abs() != num::BigInt::from(1) {
                    continue;
                }
                // p_a = sum_b v[a][b] p'_b, so D_i has p-coordinates V^{-T} M0[:, i]
                let vt_inv = linalg::inverse(&linalg::to_q_matrix(&linalg::transpose(&v)))
                    .expect("unimodular");
                let rows: Vec<Vec<i64>> = (0..r)
                    .map(|a| {
                        (0..m)
                            .map(|i| {
                                let x: Rational =
                                    (0..r).map(|b| &vt_inv[a][b] * linalg::q(m0[b][i])).sum();
                                x.to_integer().to_i64().expect("small entry")
                            })
                            .collect()
                    })
                    .collect();
                if let Ok(dm) = Self::checked(fan, walls, rows) {
                    return Ok(dm);
                }
            }
        }
        Err(FanError::BasisSearchFailed(BASIS_SEARCH_HEIGHT))
    }

    /// `r x m`.
    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn entry(&self, a: usize, i: usize) -> i64 {
        self.rows[a][i]
    }

    /// `m x r` integer matrix with `M R = I`.
    pub fn right_inverse(&self) -> &[Vec<i64>] {
        &self.right_inverse
    }
}

/// All vectors in `Z>=0^k` with entries summing to `total`.
fn compositions(k: usize, total: i64) -> Vec<Vec<i64>> {
    if k == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(k - 1, total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentPolytopeSpec {
    pub lift: Vec<Rational>,
    /// `(b_i, -c_i)`, read as `<b_i, v> <= -c_i`.
    pub halfspaces: Vec<(Vec<i64>, Rational)>,
}

/// A point of the open-closed moduli space in polar form.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenClosedPoint {
    pub q: Vec<Complex64>,
    pub eta: Vec<f64>,
    pub h: Vec<Complex64>,
}

/// A fan that passed every gate, with its divisor basis and derived data.
#[derive(Debug, Clone)]
pub struct Toric {
    fan: Fan,
    report: FanReport,
    walls: Vec<WallCurve>,
    basis: DivisorMatrix,
    cones: ConePair,
    vertices: BTreeSet<usize>,
    k_ring: Arc<RingDescriptor>,
    disc_ring: Arc<RingDescriptor>,
    disc_scale: i64,
}

impl Toric {
    /// Gates the fan and fixes a divisor basis (the given one, or a derived one).
    pub fn new(fan: Fan, divisor_matrix: Option<Vec<Vec<i64>>>) -> Result<Self> {
        let report = fan.validate();
        if let Some(gate) = report.first_failure() {
            return Err(FanError::GateFailed { gate, detail: gate_detail(&fan, gate) });
        }
        let walls = fan.wall_curves()?;
        let basis = match divisor_matrix {
            Some(rows) => DivisorMatrix::checked(&fan, &walls, rows)?,
            None => DivisorMatrix::derive(&fan, &walls)?,
        };
        let r = fan.picard_rank();
        let classes: Vec<Vec<i64>> =
            walls.iter().map(|w| class_coordinates(basis.right_inverse(), &w.pairings)).collect();
        let cones = ConePair::from_classes(&classes, r);
        let (weights, scale) = disc_weights(&fan, &basis);
        let k_ring = RingDescriptor::orthant(r);
        let disc_ring = RingDescriptor::new(
            weights,
            Support::Shifted(ShiftedCone {
                embedding: basis.rows().to_vec(),
                inequalities: cones.nef_generators.clone(),
                scale,
            }),
        )
        .expect("ample grading");
        let vertices = fan.fan_polytope_vertices();
        Ok(Self { fan, report, walls, basis, cones, vertices, k_ring, disc_ring, disc_scale: scale })
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn report(&self) -> FanReport {
        self.report
    }

    pub fn wall_curves(&self) -> &[WallCurve] {
        &self.walls
    }

    pub fn divisor_matrix(&self) -> &DivisorMatrix {
        &self.basis
    }

    pub fn cones(&self) -> &ConePair {
        &self.cones
    }

    pub fn fan_polytope_vertices(&self) -> &BTreeSet<usize> {
        &self.vertices
    }

    pub fn n(&self) -> usize {
        self.fan.dim()
    }

    pub fn m(&self) -> usize {
        self.fan.ray_count()
    }

    pub fn r(&self) -> usize {
        self.fan.picard_rank()
    }

    pub fn is_fano(&self) -> bool {
        self.report.fano
    }

    /// `<D_i, d>` for a class with coordinates `d_a = <p_a, d>`.
    pub fn pairing(&self, i: usize, d: &[i64]) -> i64 {
        d.iter().enumerate().map(|(a, &da)| self.basis.entry(a, i) * da).sum()
    }

    /// `(<D_1, d>, ..., <D_m, d>)`.
    pub fn pairings(&self, d: &[i64]) -> Vec<i64> {
        (0..self.m()).map(|i| self.pairing(i, d)).collect()
    }

    pub fn c1(&self, d: &[i64]) -> i64 {
        self.pairings(d).iter().sum()
    }

    pub fn in_ne(&self, d: &[i64]) -> bool {
        d.len() == self.r() && self.cones.mori_contains(d)
    }

    /// Effective classes with `sum(d) <= order`, sorted by degree then
    /// lexicographically.
    pub fn enumerate_ne(&self, order: u32) -> Vec<Vec<i64>> {
        let mut out: Vec<Vec<i64>> = (0..=i64::from(order))
            .flat_map(|s| compositions(self.r(), s))
            .filter(|d| self.in_ne(d))
            .collect();
        out.sort_by(|a, b| (a.iter().sum::<i64>(), a).cmp(&(b.iter().sum::<i64>(), b)));
        out
    }

    /// The ring `K` of power series in `q_1..q_r`.
    pub fn k_ring(&self) -> &Arc<RingDescriptor> {
        &self.k_ring
    }

    /// The ring `R` in `z_1..z_m`, supported on `NE + (Z>=0)^m`.
    pub fn disc_ring(&self) -> &Arc<RingDescriptor> {
        &self.disc_ring
    }

    /// Grading of `q^d` in `R` per unit of nef degree.
    pub fn disc_scale(&self) -> i64 {
        self.disc_scale
    }

    /// Largest order in `R` whose terms `q^d z^e` all have `sum(d) <= order`.
    pub fn disc_order(&self, order: u32) -> u32 {
        let c = u32::try_from(self.disc_scale).expect("positive scale");
        c * (order + 1) - 1
    }

    /// Order in `K` sufficient for `disc_order` of `order + padding` to
    /// contain every `q^d z_j` with `sum(d) <= order`.
    pub fn disc_padding(&self) -> u32 {
        let c = self.disc_scale;
        let w = self.disc_ring.weights().iter().copied().max().unwrap_or(0);
        u32::try_from((w + c - 1) / c).expect("small padding")
    }

    /// `z`-exponent of `q^d z_j` (or of `q^d` when `j` is `None`).
    pub fn embed_class(&self, d: &[i64], j: Option<usize>) -> Exponent {
        let mut e = self.pairings(d);
        if let Some(j) = j {
            e[j] += 1;
        }
        e
    }

    /// `kappa(x) = sum_i x_i D_i` in the basis `p_a`.
    pub fn kappa(&self, x: &[Rational]) -> Vec<Rational> {
        (0..self.r())
            .map(|a| x.iter().enumerate().map(|(i, xi)| xi * linalg::q(self.basis.entry(a, i))).sum())
            .collect()
    }

    /// Halfspaces `<b_i, v> <= -c_i`. The lift must make `kappa(-c)` ample,
    /// which is the orientation under which these halfspaces bound a
    /// nonempty polytope.
    pub fn moment_polytope(&self, lift: &[Rational]) -> Result<MomentPolytopeSpec> {
        if lift.len() != self.m() {
            return Err(FanError::Length { expected: self.m(), got: lift.len() });
        }
        let neg: Vec<Rational> = lift.iter().map(|c| -c).collect();
        let omega = self.kappa(&neg);
        if !self.cones.ample_contains(&omega) {
            let shown = omega.iter().map(ToString::to_string).join(", ");
            return Err(FanError::NonKahlerLift(format!(
                "kappa(-c) = ({shown}) is not in the interior of the nef cone"
            )));
        }
        let halfspaces = self
            .fan
            .rays()
            .iter()
            .zip(lift)
            .map(|(b, c)| (b.clone(), -c.clone()))
            .collect();
        Ok(MomentPolytopeSpec { lift: lift.to_vec(), halfspaces })
    }

    pub fn opcl_decompose(&self, z: &[Complex64]) -> Result<OpenClosedPoint> {
        if z.len() != self.m() {
            return Err(FanError::Length { expected: self.m(), got: z.len() });
        }
        for (i, zi) in z.iter().enumerate() {
            let a = zi.norm();
            if !(a > 0.0 && a < 1.0) {
                return Err(FanError::OutsideDisc(i + 1));
            }
        }
        let eta = z.iter().map(|zi| -zi.norm().ln()).collect();
        let h = z.iter().map(|zi| zi / zi.norm()).collect();
        let q = (0..self.r())
            .map(|a| {
                z.iter()
                    .enumerate()
                    .map(|(i, zi)| zi.powi(i32::try_from(self.basis.entry(a, i)).expect("small")))
                    .product()
            })
            .collect();
        Ok(OpenClosedPoint { q, eta, h })
    }
}

fn gate_detail(fan: &Fan, gate: Gate) -> String {
    match gate {
        Gate::Smooth => {
            let bad = fan
                .max_cones()
                .iter()
                .find(|c| linalg::det(&fan.cone_matrix(c)).abs() != num::BigInt::from(1))
                .map(|c| c.iter().map(|i| i + 1).collect::<Vec<_>>())
                .unwrap_or_default();
            format!("maximal cone {bad:?} does not span the lattice")
        }
        Gate::Complete => {
            let bad = fan
                .walls()
                .into_iter()
                .find(|(_, v)| v.len() != 2)
                .map(|(w, v)| (w.iter().map(|i| i + 1).collect::<Vec<_>>(), v.len()));
            match bad {
                Some((w, k)) => format!("wall {w:?} lies in {k} maximal cone(s)"),
                None => "no maximal cones".into(),
            }
        }
        Gate::Projective => "the nef cone has empty interior".into(),
        Gate::SemiPositive => {
            let walls = fan.wall_curves().unwrap_or_default();
            match walls.iter().find(|w| w.c1() < 0) {
                Some(w) => format!(
                    "first Chern class pairs to {} with the curve over wall {:?}",
                    w.c1(),
                    w.wall.iter().map(|i| i + 1).collect::<Vec<_>>()
                ),
                None => "negative first Chern class pairing".into(),
            }
        }
    }
}

/// Weights `w` with `sum_i w_i D_i = c * sum_a p_a`: the sum over maximal
/// cones of the lift of `sum_a p_a` vanishing on that cone, made primitive
/// together with `c`.
fn disc_weights(fan: &Fan, basis: &DivisorMatrix) -> (Vec<i64>, i64) {
    let (m, r) = (fan.ray_count(), fan.picard_rank());
    let mut w = vec![0i64; m];
    for cone in fan.max_cones() {
        let outside: Vec<usize> = (0..m).filter(|i| !cone.contains(i)).collect();
        let a: Vec<Vec<Rational>> = (0..r)
            .map(|row| outside.iter().map(|&i| linalg::q(basis.entry(row, i))).collect())
            .collect();
        let ones = vec![linalg::q(1); r];
        let sol = linalg::solve(&a, &ones).expect("unimodular complement");
        for (&i, x) in outside.iter().zip(&sol) {
            assert!(x.is_integer(), "integral lift");
            w[i] += x.to_integer().to_i64().expect("small");
        }
    }
    let c = i64::try_from(fan.max_cones().len()).expect("small");
    let g = num::Integer::gcd(&linalg::gcd_all(&w), &c);
    (w.iter().map(|x| x / g).collect(), c / g)
}

impl fmt::Display for FanReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "smooth: {}\ncomplete: {}\nprojective: {}\nsemi_positive: {}\nfano: {}",
            self.smooth, self.complete, self.projective, self.semi_positive, self.fano
        )
    }
}
