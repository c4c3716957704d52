//! Mirror map, hypergeometric correction terms and the disc potential.

use std::sync::{Arc, OnceLock};

use num::{One, Zero};
use thiserror::Error;

use crate::fan::Toric;
use crate::linalg;
use crate::series::{Rational, SeriesError, SeriesMatrix, TruncatedSeries};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MirrorError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("ray index {index} out of range (fan has {count} rays)")]
    RayIndex { index: usize, count: usize },
    #[error("out of model: {0}")]
    OutOfModel(String),
}

pub type Result<T> = std::result::Result<T, MirrorError>;

/// Truncation of `z^s (a0 + sum_i a_i D_i / z)` at cohomological degree two.
#[derive(Debug, Clone)]
struct Leading {
    s: i64,
    a0: Rational,
    a: Vec<Rational>,
}

impl Leading {
    fn one(m: usize) -> Self {
        Self { s: 0, a0: Rational::one(), a: vec![Rational::zero(); m] }
    }

    /// `D_i + k z`.
    fn linear(m: usize, i: usize, k: i64) -> Self {
        let mut a = vec![Rational::zero(); m];
        a[i] = Rational::one();
        Self { s: 1, a0: linalg::q(k), a }
    }

    fn mul(&self, o: &Self) -> Self {
        Self {
            s: self.s + o.s,
            a0: &self.a0 * &o.a0,
            a: self.a.iter().zip(&o.a).map(|(x, y)| &self.a0 * y + &o.a0 * x).collect(),
        }
    }

    fn inv(&self) -> Self {
        let inv0 = self.a0.recip();
        let sq = &inv0 * &inv0;
        Self { s: -self.s, a0: inv0, a: self.a.iter().map(|x| -(x * &sq)).collect() }
    }
}

/// Hypergeometric factor of the `y^d` term with divisor pairings `l`.
fn hypergeometric_factor(l: &[i64]) -> Leading {
    let m = l.len();
    let mut out = Leading::one(m);
    for (i, &li) in l.iter().enumerate() {
        if li < 0 {
            for k in li + 1..=0 {
                out = out.mul(&Leading::linear(m, i, k));
            }
        } else {
            for k in 1..=li {
                out = out.mul(&Leading::linear(m, i, k).inv());
            }
        }
    }
    out
}

/// The `1/z` coefficient of the I-function, split into its `H^2` part
/// (`g`, in the basis `p_a`) and its scalar part `g00`.
#[derive(Debug, Clone, PartialEq)]
pub struct Asymptotics {
    pub g: Vec<TruncatedSeries>,
    pub g00: TruncatedSeries,
}

impl Asymptotics {
    /// Whether the scalar part is nonzero, which the mirror map ignores.
    pub fn has_scalar_defect(&self) -> bool {
        !self.g00.is_zero()
    }
}

pub fn ifunction_asymptotics(toric: &Toric, order: u32) -> Result<Asymptotics> {
    let ring = toric.k_ring();
    let (r, m) = (toric.r(), toric.m());
    let mut g: Vec<Vec<(Vec<i64>, Rational)>> = vec![Vec::new(); r];
    let mut g00 = Vec::new();
    for d in toric.enumerate_ne(order) {
        if d.iter().all(|&x| x == 0) {
            continue;
        }
        let l = toric.pairings(&d);
        match l.iter().sum::<i64>() {
            0 => {
                let f = hypergeometric_factor(&l);
                debug_assert_eq!(f.s, 0);
                for (a, ga) in g.iter_mut().enumerate() {
                    let c: Rational = (0..m)
                        .map(|i| &f.a[i] * linalg::q(toric.divisor_matrix().entry(a, i)))
                        .sum();
                    if !c.is_zero() {
                        ga.push((d.clone(), c));
                    }
                }
            }
            1 => {
                let f = hypergeometric_factor(&l);
                debug_assert_eq!(f.s, -1);
                if !f.a0.is_zero() {
                    g00.push((d.clone(), f.a0));
                }
            }
            _ => {}
        }
    }
    Ok(Asymptotics {
        g: g.into_iter()
            .map(|t| TruncatedSeries::from_terms(ring, order, t))
            .collect::<std::result::Result<_, _>>()?,
        g00: TruncatedSeries::from_terms(ring, order, g00)?,
    })
}

fn factorial(n: i64) -> Rational {
    (1..=n).fold(Rational::one(), |acc, k| acc * linalg::q(k))
}

/// Effective classes `d` with `<c1, d> = 0`, `<D_j, d> < 0` and
/// `<D_i, d> >= 0` for `i != j`, with their pairings.
fn single_negative_classes(toric: &Toric, j: usize, order: u32) -> Vec<(Vec<i64>, Vec<i64>)> {
    toric
        .enumerate_ne(order)
        .into_iter()
        .filter_map(|d| {
            let l = toric.pairings(&d);
            let ok = l.iter().sum::<i64>() == 0
                && l[j] < 0
                && l.iter().enumerate().all(|(i, &x)| i == j || x >= 0);
            ok.then_some((d, l))
        })
        .collect()
}

/// `(-1)^{l_j} (-l_j - 1)! / prod_{i != j} l_i!`.
fn g0_coefficient(l: &[i64], j: usize) -> Rational {
    let sign = if l[j] % 2 == 0 { Rational::one() } else { -Rational::one() };
    let den = l
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != j)
        .fold(Rational::one(), |acc, (_, &x)| acc * factorial(x));
    sign * factorial(-l[j] - 1) / den
}

/// The hypergeometric series `g_0^{(j)}(y)`.
pub fn g0_series(toric: &Toric, j: usize, order: u32) -> Result<TruncatedSeries> {
    if j >= toric.m() {
        return Err(MirrorError::RayIndex { index: j, count: toric.m() });
    }
    let terms = single_negative_classes(toric, j, order)
        .into_iter()
        .map(|(d, l)| (d, g0_coefficient(&l, j)));
    Ok(TruncatedSeries::from_terms(toric.k_ring(), order, terms)?)
}

/// The inner sum of the closed lift formula for the pair `(i, j)`:
/// `sum_d (-1)^{l_i} l_j (-l_i - 1)! / prod_{k != i} l_k! y^d` over the
/// classes of [`g0_series`] for `i`.
pub fn closed_lift_sum(toric: &Toric, i: usize, j: usize, order: u32) -> Result<TruncatedSeries> {
    let terms = single_negative_classes(toric, i, order)
        .into_iter()
        .map(|(d, l)| (d, g0_coefficient(&l, i) * linalg::q(l[j])));
    Ok(TruncatedSeries::from_terms(toric.k_ring(), order, terms)?)
}

/// `log q_a = log y_a + g_a(y)` and its inverse `y_a = q_a u_a(q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MirrorMap {
    pub forward: Vec<TruncatedSeries>,
    pub inverse: Vec<TruncatedSeries>,
    pub g00: TruncatedSeries,
}

impl MirrorMap {
    pub fn from_asymptotics(asym: &Asymptotics) -> Result<Self> {
        let forward = asym.g.clone();
        let (ring, order) = (asym.g00.ring().clone(), asym.g00.order());
        let neg_exp: Vec<TruncatedSeries> =
            forward.iter().map(|g| (-g).exp()).collect::<std::result::Result<_, _>>()?;
        let mut u: Vec<TruncatedSeries> =
            forward.iter().map(|_| TruncatedSeries::one(&ring, order)).collect();
        // each pass fixes one more degree
        for _ in 0..=order {
            u = neg_exp.iter().map(|e| e.substitute(&u)).collect::<std::result::Result<_, _>>()?;
        }
        Ok(Self { forward, inverse: u, g00: asym.g00.clone() })
    }

    /// Rewrites a series in `y` as a series in `q`.
    pub fn to_q(&self, s: &TruncatedSeries) -> Result<TruncatedSeries> {
        Ok(s.substitute(&self.inverse)?)
    }

    /// The units `q_a / y_a = exp(g_a(y))`, as series in `y`.
    pub fn forward_units(&self) -> Result<Vec<TruncatedSeries>> {
        Ok(self.forward.iter().map(TruncatedSeries::exp).collect::<std::result::Result<_, _>>()?)
    }

    /// `y_a(q(y)) / y_a - 1` for each `a`; zero exactly when the inverse is right.
    pub fn round_trip_defect(&self) -> Result<Vec<TruncatedSeries>> {
        let fwd = self.forward_units()?;
        let one = TruncatedSeries::one(self.g00.ring(), self.g00.order());
        self.inverse
            .iter()
            .zip(&fwd)
            .map(|(u, e)| Ok(&(e * &u.substitute(&fwd)?) - &one))
            .collect()
    }
}

pub fn mirror_map(toric: &Toric, order: u32) -> Result<MirrorMap> {
    MirrorMap::from_asymptotics(&ifunction_asymptotics(toric, order)?)
}

/// The correction terms `f_j(q)`, one unit series per ray.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionTerms {
    pub f: Vec<TruncatedSeries>,
}

pub fn correction_terms(toric: &Toric, order: u32) -> Result<CorrectionTerms> {
    let map = mirror_map(toric, order)?;
    let g0: Vec<TruncatedSeries> =
        (0..toric.m()).map(|j| g0_series(toric, j, order)).collect::<Result<_>>()?;
    corrections_from(&map, &g0)
}

fn corrections_from(map: &MirrorMap, g0: &[TruncatedSeries]) -> Result<CorrectionTerms> {
    let f = g0.iter().map(|g| map.to_q(&g.exp()?)).collect::<Result<_>>()?;
    Ok(CorrectionTerms { f })
}

/// `W = sum_j f_j z_j` in the ring `R`, with `q^d` read as `z^{iota(d)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialFunction {
    pub f: Vec<TruncatedSeries>,
    pub terms: Vec<TruncatedSeries>,
    pub total: TruncatedSeries,
}

/// Builds `W` from arbitrary correction terms over the `K` ring of `toric`.
pub fn potential_from(toric: &Toric, f: &[TruncatedSeries]) -> Result<PotentialFunction> {
    if f.len() != toric.m() {
        return Err(SeriesError::Shape(format!("{} correction terms for {} rays", f.len(), toric.m())).into());
    }
    let order = f[0].order();
    let disc_order = toric.disc_order(order);
    let terms: Vec<TruncatedSeries> = f
        .iter()
        .enumerate()
        .map(|(j, fj)| {
            Ok(fj.map_into(toric.disc_ring(), disc_order, |d| toric.embed_class(d, Some(j)))?)
        })
        .collect::<Result<_>>()?;
    let mut total = TruncatedSeries::zero(toric.disc_ring(), disc_order);
    for t in &terms {
        total = total.checked_add(t)?;
    }
    Ok(PotentialFunction { f: f.to_vec(), terms, total })
}

pub fn potential(toric: &Toric, order: u32) -> Result<PotentialFunction> {
    potential_from(toric, &correction_terms(toric, order)?.f)
}

/// `A[k][i] = delta_{ik} f_k + sum_a m_{a,i} q_a df_k/dq_a`, so that
/// `z_i dw_k/dz_i = A[k][i] z_k`.
pub fn jacobi_matrix_from(toric: &Toric, f: &[TruncatedSeries]) -> Result<SeriesMatrix> {
    let m = toric.m();
    let mut rows = Vec::with_capacity(m);
    for (k, fk) in f.iter().enumerate() {
        let derivs: Vec<TruncatedSeries> =
            (0..toric.r()).map(|a| fk.log_derivative(a)).collect::<std::result::Result<_, _>>()?;
        let mut row = Vec::with_capacity(m);
        for i in 0..m {
            let mut entry = if i == k { fk.clone() } else { TruncatedSeries::zero(fk.ring(), fk.order()) };
            for (a, da) in derivs.iter().enumerate() {
                let c = toric.divisor_matrix().entry(a, i);
                if c != 0 {
                    entry = &entry + &da.scale(&linalg::q(c));
                }
            }
            row.push(entry);
        }
        rows.push(row);
    }
    Ok(SeriesMatrix::from_rows(rows)?)
}

pub fn jacobi_matrix(toric: &Toric, order: u32) -> Result<SeriesMatrix> {
    jacobi_matrix_from(toric, &correction_terms(toric, order)?.f)
}

/// The open Gromov-Witten invariant `n_{beta_i + d}`: the `q^d` coefficient
/// of `f_i`.
pub fn open_gw(toric: &Toric, f: &CorrectionTerms, i: usize, d: &[i64]) -> Result<Rational> {
    if i >= toric.m() {
        return Err(MirrorError::RayIndex { index: i, count: toric.m() });
    }
    if d.len() != toric.r() {
        return Err(MirrorError::OutOfModel(format!(
            "class has {} coordinates, expected {}",
            d.len(),
            toric.r()
        )));
    }
    if !toric.in_ne(d) {
        return Err(MirrorError::OutOfModel(format!("{d:?} is not an effective class")));
    }
    let c1 = toric.c1(d);
    if c1 != 0 {
        return Err(MirrorError::OutOfModel(format!(
            "first Chern class pairs to {c1} with {d:?}; only classes with pairing 0 are encoded"
        )));
    }
    let order = f.f[i].order();
    if d.iter().sum::<i64>() > i64::from(order) {
        return Err(MirrorError::OutOfModel(format!("{d:?} exceeds the truncation order {order}")));
    }
    Ok(f.f[i].coeff(d))
}

/// All mirror-side data of one fan at one truncation order, computed once.
#[derive(Debug)]
pub struct MirrorEngine {
    toric: Arc<Toric>,
    order: u32,
    asymptotics: Asymptotics,
    map: MirrorMap,
    g0: Vec<TruncatedSeries>,
    g0_q: Vec<TruncatedSeries>,
    corrections: CorrectionTerms,
    potential: OnceLock<PotentialFunction>,
    jacobi: OnceLock<SeriesMatrix>,
}

impl MirrorEngine {
    pub fn new(toric: Arc<Toric>, order: u32) -> Result<Self> {
        let asymptotics = ifunction_asymptotics(&toric, order)?;
        let map = MirrorMap::from_asymptotics(&asymptotics)?;
        let g0: Vec<TruncatedSeries> =
            (0..toric.m()).map(|j| g0_series(&toric, j, order)).collect::<Result<_>>()?;
        let g0_q = g0.iter().map(|g| map.to_q(g)).collect::<Result<_>>()?;
        let corrections = corrections_from(&map, &g0)?;
        Ok(Self {
            toric,
            order,
            asymptotics,
            map,
            g0,
            g0_q,
            corrections,
            potential: OnceLock::new(),
            jacobi: OnceLock::new(),
        })
    }

    pub fn toric(&self) -> &Arc<Toric> {
        &self.toric
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn asymptotics(&self) -> &Asymptotics {
        &self.asymptotics
    }

    pub fn mirror_map(&self) -> &MirrorMap {
        &self.map
    }

    /// `g_0^{(j)}` as series in `y`.
    pub fn g0(&self) -> &[TruncatedSeries] {
        &self.g0
    }

    /// `g_0^{(j)}(y(q))`.
    pub fn g0_in_q(&self) -> &[TruncatedSeries] {
        &self.g0_q
    }

    pub fn corrections(&self) -> &CorrectionTerms {
        &self.corrections
    }

    pub fn potential(&self) -> &PotentialFunction {
        self.potential.get_or_init(|| {
            potential_from(&self.toric, &self.corrections.f).expect("terms lie in the disc ring")
        })
    }

    pub fn jacobi(&self) -> &SeriesMatrix {
        self.jacobi.get_or_init(|| {
            jacobi_matrix_from(&self.toric, &self.corrections.f).expect("square correction data")
        })
    }

    pub fn open_gw(&self, i: usize, d: &[i64]) -> Result<Rational> {
        open_gw(&self.toric, &self.corrections, i, d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::Fan;
    use crate::series::rat;

    fn f2() -> Toric {
        Toric::new(
            Fan::new(
                2,
                vec![vec![0, 1], vec![0, -1], vec![1, 0], vec![-1, -2]],
                vec![vec![0, 2], vec![2, 1], vec![1, 3], vec![3, 0]],
            )
            .unwrap(),
            Some(vec![vec![0, -2, 1, 1], vec![1, 1, 0, 0]]),
        )
        .unwrap()
    }

    fn p2() -> Toric {
        Toric::new(
            Fan::new(2, vec![vec![1, 0], vec![0, 1], vec![-1, -1]], vec![vec![0, 1], vec![1, 2], vec![2, 0]])
                .unwrap(),
            None,
        )
        .unwrap()
    }

    fn ser(t: &Toric, order: u32, terms: &[(&[i64], i64, i64)]) -> TruncatedSeries {
        TruncatedSeries::from_terms(
            t.k_ring(),
            order,
            terms.iter().map(|(e, n, d)| (e.to_vec(), rat(*n, *d))),
        )
        .unwrap()
    }

    #[test]
    fn leading_inverse_is_inverse() {
        let x = Leading::linear(3, 1, 4);
        let p = x.mul(&x.inv());
        assert_eq!(p.s, 0);
        assert_eq!(p.a0, Rational::one());
        assert!(p.a.iter().all(Zero::is_zero));
    }

    #[test]
    fn p2_is_trivial() {
        let t = p2();
        let a = ifunction_asymptotics(&t, 6).unwrap();
        assert!(a.g[0].is_zero() && a.g00.is_zero());
        for j in 0..3 {
            assert!(g0_series(&t, j, 6).unwrap().is_zero());
        }
    }

    #[test]
    fn f2_g0() {
        let t = f2();
        assert_eq!(g0_series(&t, 1, 2).unwrap(), ser(&t, 2, &[(&[1, 0], 1, 1), (&[2, 0], 3, 2)]));
        for j in [0, 2, 3] {
            assert!(g0_series(&t, j, 6).unwrap().is_zero());
        }
    }

    #[test]
    fn f2_mirror_map() {
        let t = f2();
        let n = 5;
        let map = mirror_map(&t, n).unwrap();
        let q1 = ser(&t, n, &[(&[1, 0], 1, 1)]);
        let one = TruncatedSeries::one(t.k_ring(), n);
        let s = &one + &q1;
        // y1 = q1 / (1 + q1)^2, y2 = q2 (1 + q1)
        assert_eq!(map.inverse[0], (&s * &s).invert().unwrap());
        assert_eq!(map.inverse[1], s);
        // q1 = y1 + 2 y1^2 + 5 y1^3 + 14 y1^4
        let q_of_y = map.forward_units().unwrap()[0].clone();
        assert_eq!(
            q_of_y.truncate(3),
            ser(&t, 3, &[(&[0, 0], 1, 1), (&[1, 0], 2, 1), (&[2, 0], 5, 1), (&[3, 0], 14, 1)])
        );
        for d in map.round_trip_defect().unwrap() {
            assert!(d.is_zero());
        }
    }

    #[test]
    fn f2_forward_matches_g0() {
        // the H^2 part of the 1/z term is minus the g0 series pushed through D_j
        let t = f2();
        let a = ifunction_asymptotics(&t, 6).unwrap();
        for (k, gk) in a.g.iter().enumerate() {
            let mut expect = TruncatedSeries::zero(t.k_ring(), 6);
            for j in 0..4 {
                let c = t.divisor_matrix().entry(k, j);
                expect = &expect - &g0_series(&t, j, 6).unwrap().scale(&linalg::q(c));
            }
            assert_eq!(*gk, expect);
        }
        assert!(a.g00.is_zero());
    }

    #[test]
    fn f2_corrections_and_potential() {
        let t = f2();
        let c = correction_terms(&t, 6).unwrap();
        let one = TruncatedSeries::one(t.k_ring(), 6);
        let q1 = ser(&t, 6, &[(&[1, 0], 1, 1)]);
        assert_eq!(c.f, vec![one.clone(), &one + &q1, one.clone(), one]);
        let w = potential_from(&t, &c.f).unwrap();
        let mut expected = Vec::new();
        for j in 0..4 {
            let mut e = vec![0; 4];
            e[j] = 1;
            expected.push((e, Rational::one()));
        }
        expected.push((vec![0, -1, 1, 1], Rational::one()));
        let ring = t.disc_ring();
        assert_eq!(w.total, TruncatedSeries::from_terms(ring, t.disc_order(6), expected).unwrap());
    }

    #[test]
    fn f2_jacobi_row() {
        let t = f2();
        let a = jacobi_matrix(&t, 4).unwrap();
        let one = TruncatedSeries::one(t.k_ring(), 4);
        let q1 = ser(&t, 4, &[(&[1, 0], 1, 1)]);
        assert_eq!(a.row(1), &[TruncatedSeries::zero(t.k_ring(), 4), &one - &q1, q1.clone(), q1][..]);
        for k in [0, 2, 3] {
            for i in 0..4 {
                let want = if i == k { one.clone() } else { TruncatedSeries::zero(t.k_ring(), 4) };
                assert_eq!(*a.get(k, i), want);
            }
        }
    }

    #[test]
    fn open_gw_values() {
        let t = Arc::new(f2());
        let e = MirrorEngine::new(t, 4).unwrap();
        assert_eq!(e.open_gw(0, &[0, 0]).unwrap(), Rational::one());
        assert_eq!(e.open_gw(1, &[1, 0]).unwrap(), Rational::one());
        assert_eq!(e.open_gw(1, &[2, 0]).unwrap(), Rational::zero());
        assert!(matches!(e.open_gw(1, &[0, 1]), Err(MirrorError::OutOfModel(_))));
        assert!(matches!(e.open_gw(1, &[9, 0]), Err(MirrorError::OutOfModel(_))));
    }

    #[test]
    fn truncation_is_stable() {
        let t = f2();
        let lo = mirror_map(&t, 3).unwrap();
        let hi = mirror_map(&t, 5).unwrap();
        for (a, b) in lo.inverse.iter().zip(&hi.inverse) {
            assert_eq!(*a, b.truncate(3));
        }
    }
}
