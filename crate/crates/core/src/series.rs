//! Truncated multivariate power series with exact rational coefficients.
//!
//! A series lives in a ring described by a [`RingDescriptor`]: a number of
//! variables, a strictly positive linear grading, and a support cone that
//! every stored exponent must lie in. Two supports are used:
//!
//! - [`Support::Orthant`]: ordinary power series, used for the Kähler
//!   parameters `q` and the mirror coordinates `y`.
//! - [`Support::Shifted`]: exponents in `NE(X)_Z + (Z>=0)^m`, used for the
//!   disc variables `z`. Exponents there may have negative entries.
//!
//! Every operation truncates at the series' order: monomials whose grading
//! exceeds the order are dropped. Coefficient maps are sparse and never store
//! zeros, so structural equality is mathematical equality.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::{BigInt, BigRational, One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;

pub type Rational = BigRational;
pub type Exponent = Vec<i64>;

pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("series live in different rings")]
    RingMismatch,
    #[error("truncation orders differ ({0} vs {1})")]
    OrderMismatch(u32, u32),
    #[error("exp requires a series without constant term")]
    NonzeroConstant,
    #[error("log requires constant term 1")]
    ConstantNotOne,
    #[error("series with zero constant term is not invertible")]
    NotInvertible,
    #[error("substitution image for variable {0} is not a unit multiple of a variable")]
    NotUnitMonomial(usize),
    #[error("variable index {index} out of range for {count} variables")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("exponent {0:?} is outside the support of the ring")]
    OutsideSupport(Exponent),
    #[error("constant part of the matrix is singular")]
    SingularConstant,
    #[error("matrix shape mismatch: {0}")]
    Shape(String),
    #[error("invalid ring: {0}")]
    InvalidRing(String),
    #[error("malformed series record: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, SeriesError>;

/// The cone `emb(C) + (Z>=0)^m` where `C` is a cone of classes in `Z^r`
/// cut out by integer inequalities and contained in the nonnegative orthant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftedCone {
    /// `r x m`; the class with coordinates `d` embeds as `d^T * embedding`.
    pub embedding: Vec<Vec<i64>>,
    /// `<h, d> >= 0` for every row `h`.
    pub inequalities: Vec<Vec<i64>>,
    /// The grading of `emb(d)` equals `scale * sum(d)`.
    pub scale: i64,
}

impl ShiftedCone {
    pub fn embed(&self, d: &[i64]) -> Exponent {
        let m = self.embedding.first().map_or(0, Vec::len);
        (0..m)
            .map(|i| d.iter().zip(&self.embedding).map(|(da, row)| da * row[i]).sum())
            .collect()
    }

    pub fn base_contains(&self, d: &[i64]) -> bool {
        d.iter().all(|&x| x >= 0) && self.inequalities.iter().all(|h| linalg::dot(h, d) >= 0)
    }

    /// Classes in the base cone with `sum(d) <= bound`.
    pub fn base_points(&self, bound: i64) -> Vec<Vec<i64>> {
        let r = self.embedding.len();
        let mut out = Vec::new();
        let mut cur = vec![0i64; r];
        fn rec(a: usize, left: i64, cur: &mut Vec<i64>, cone: &ShiftedCone, out: &mut Vec<Vec<i64>>) {
            if a == cur.len() {
                if cone.base_contains(cur) {
                    out.push(cur.clone());
                }
                return;
            }
            for x in 0..=left {
                cur[a] = x;
                rec(a + 1, left - x, cur, cone, out);
            }
            cur[a] = 0;
        }
        if bound >= 0 {
            rec(0, bound, &mut cur, self, &mut out);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Support {
    Orthant,
    Shifted(ShiftedCone),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingDescriptor {
    variable_count: usize,
    weights: Vec<i64>,
    support: Support,
}

impl RingDescriptor {
    pub fn new(weights: Vec<i64>, support: Support) -> Result<Arc<Self>> {
        if weights.is_empty() {
            return Err(SeriesError::InvalidRing("no variables".into()));
        }
        if weights.iter().any(|&w| w <= 0) {
            return Err(SeriesError::InvalidRing("grading weights must be positive".into()));
        }
        if let Support::Shifted(cone) = &support {
            if cone.scale <= 0 {
                return Err(SeriesError::InvalidRing("nonpositive class grading".into()));
            }
            for row in &cone.embedding {
                if row.len() != weights.len() {
                    return Err(SeriesError::InvalidRing("embedding width mismatch".into()));
                }
                if linalg::dot(row, &weights) != cone.scale {
                    return Err(SeriesError::InvalidRing(
                        "grading is not proportional to class degree".into(),
                    ));
                }
            }
        }
        Ok(Arc::new(Self { variable_count: weights.len(), weights, support }))
    }

    /// Power series ring in `n` variables with total-degree grading.
    pub fn orthant(n: usize) -> Arc<Self> {
        Self::new(vec![1; n], Support::Orthant).expect("valid orthant ring")
    }

    pub fn variable_count(&self) -> usize {
        self.variable_count
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn grading(&self, e: &[i64]) -> i64 {
        linalg::dot(&self.weights, e)
    }

    pub fn contains(&self, e: &[i64]) -> bool {
        if e.len() != self.variable_count {
            return false;
        }
        match &self.support {
            Support::Orthant => e.iter().all(|&x| x >= 0),
            Support::Shifted(cone) => {
                let g = self.grading(e);
                if g < 0 {
                    return false;
                }
                cone.base_points(g / cone.scale).iter().any(|d| {
                    let emb = cone.embed(d);
                    e.iter().zip(&emb).all(|(x, y)| x >= y)
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithKind {
    Add,
    Sub,
    Mul,
}

/// One coefficient record of the JSON serialization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    pub exp: Vec<i64>,
    pub num: String,
    pub den: String,
}

#[derive(Debug, Clone)]
pub struct TruncatedSeries {
    ring: Arc<RingDescriptor>,
    order: u32,
    coeffs: BTreeMap<Exponent, Rational>,
}

impl PartialEq for TruncatedSeries {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.same_ring(other) && self.coeffs == other.coeffs
    }
}

impl Eq for TruncatedSeries {}

impl TruncatedSeries {
    pub fn zero(ring: &Arc<RingDescriptor>, order: u32) -> Self {
        Self { ring: ring.clone(), order, coeffs: BTreeMap::new() }
    }

    pub fn constant(ring: &Arc<RingDescriptor>, order: u32, c: Rational) -> Self {
        let mut s = Self::zero(ring, order);
        if !c.is_zero() {
            s.coeffs.insert(vec![0; ring.variable_count()], c);
        }
        s
    }

    pub fn one(ring: &Arc<RingDescriptor>, order: u32) -> Self {
        Self::constant(ring, order, Rational::one())
    }

    /// `c * x^e`, or zero if `e` lies above the truncation order.
    pub fn monomial(ring: &Arc<RingDescriptor>, order: u32, e: Exponent, c: Rational) -> Result<Self> {
        Self::from_terms(ring, order, [(e, c)])
    }

    /// The `i`-th variable.
    pub fn variable(ring: &Arc<RingDescriptor>, order: u32, i: usize) -> Result<Self> {
        let n = ring.variable_count();
        if i >= n {
            return Err(SeriesError::IndexOutOfRange { index: i, count: n });
        }
        let mut e = vec![0; n];
        e[i] = 1;
        Self::monomial(ring, order, e, Rational::one())
    }

    /// Builds a series from terms, summing repeated exponents and dropping
    /// those above the order. Every exponent must lie in the support.
    pub fn from_terms<I>(ring: &Arc<RingDescriptor>, order: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, Rational)>,
    {
        let mut s = Self::zero(ring, order);
        for (e, c) in terms {
            if !ring.contains(&e) {
                return Err(SeriesError::OutsideSupport(e));
            }
            if ring.grading(&e) <= i64::from(order) {
                s.add_term(e, c);
            }
        }
        Ok(s)
    }

    fn add_term(&mut self, e: Exponent, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn ring(&self) -> &Arc<RingDescriptor> {
        &self.ring
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn same_ring(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.ring, &other.ring) || self.ring == other.ring
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Rational)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, e: &[i64]) -> Rational {
        self.coeffs.get(e).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&vec![0; self.ring.variable_count()])
    }

    /// Lowest grading among the stored terms.
    pub fn valuation(&self) -> Option<i64> {
        self.coeffs.keys().map(|e| self.ring.grading(e)).min()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if !self.same_ring(other) {
            return Err(SeriesError::RingMismatch);
        }
        if self.order != other.order {
            return Err(SeriesError::OrderMismatch(self.order, other.order));
        }
        Ok(())
    }

    pub fn arith(&self, other: &Self, kind: ArithKind) -> Result<Self> {
        match kind {
            ArithKind::Add => self.checked_add(other),
            ArithKind::Sub => self.checked_sub(other),
            ArithKind::Mul => self.checked_mul(other),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (e, c) in &other.coeffs {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (e, c) in &other.coeffs {
            out.add_term(e.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let n = i64::from(self.order);
        fn graded(s: &TruncatedSeries) -> Vec<(i64, &Exponent, &Rational)> {
            let mut v: Vec<(i64, &Exponent, &Rational)> =
                s.coeffs.iter().map(|(e, c)| (s.ring.grading(e), e, c)).collect();
            v.sort_by_key(|t| t.0);
            v
        }
        let (a, b) = (graded(self), graded(other));
        let mut acc: BTreeMap<Exponent, Rational> = BTreeMap::new();
        for (ga, ea, ca) in &a {
            for (gb, eb, cb) in &b {
                if ga + gb > n {
                    break;
                }
                let e: Exponent = ea.iter().zip(eb.iter()).map(|(x, y)| x + y).collect();
                let prod = *ca * *cb;
                acc.entry(e).and_modify(|c| *c += &prod).or_insert(prod);
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(Self { ring: self.ring.clone(), order: self.order, coeffs: acc })
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ring, self.order);
        }
        let coeffs = self.coeffs.iter().map(|(e, x)| (e.clone(), x * c)).collect();
        Self { ring: self.ring.clone(), order: self.order, coeffs }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut result = Self::one(&self.ring, self.order);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Drops every term of grading above `order` and lowers the order.
    pub fn truncate(&self, order: u32) -> Self {
        let order = order.min(self.order);
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(e, _)| self.ring.grading(e) <= i64::from(order))
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        Self { ring: self.ring.clone(), order, coeffs }
    }

    /// Graded Euler operator: `x^e -> grading(e) * x^e`.
    pub fn euler(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter_map(|(e, c)| {
                let g = self.ring.grading(e);
                (g != 0).then(|| (e.clone(), c * BigRational::from_integer(g.into())))
            })
            .collect();
        Self { ring: self.ring.clone(), order: self.order, coeffs }
    }

    /// `x_i d/dx_i`, i.e. `c x^e -> c e_i x^e`.
    pub fn log_derivative(&self, i: usize) -> Result<Self> {
        let n = self.ring.variable_count();
        if i >= n {
            return Err(SeriesError::IndexOutOfRange { index: i, count: n });
        }
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(e, _)| e[i] != 0)
            .map(|(e, c)| (e.clone(), c * BigRational::from_integer(e[i].into())))
            .collect();
        Ok(Self { ring: self.ring.clone(), order: self.order, coeffs })
    }

    /// `exp(s)` by the order-raising recursion `E(u) = u E(s)`, where `E` is
    /// the graded Euler operator.
    pub fn exp(&self) -> Result<Self> {
        if !self.constant_term().is_zero() {
            return Err(SeriesError::NonzeroConstant);
        }
        let n = self.order as usize;
        let es = self.euler();
        let mut driver: Vec<(usize, &Exponent, &Rational)> = es
            .coeffs
            .iter()
            .map(|(e, c)| (self.ring.grading(e) as usize, e, c))
            .collect();
        driver.sort_by_key(|t| t.0);
        let zero = vec![0i64; self.ring.variable_count()];
        let mut layers: Vec<Vec<(Exponent, Rational)>> = vec![vec![(zero, Rational::one())]];
        for g in 1..=n {
            let mut acc: BTreeMap<Exponent, Rational> = BTreeMap::new();
            for &(ge, e, c) in &driver {
                if ge > g {
                    break;
                }
                for (f, u) in &layers[g - ge] {
                    let key: Exponent = e.iter().zip(f).map(|(x, y)| x + y).collect();
                    let t = c * u;
                    acc.entry(key).and_modify(|v| *v += &t).or_insert(t);
                }
            }
            let inv_g = rat(1, g as i64);
            layers.push(
                acc.into_iter()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(e, c)| (e, c * &inv_g))
                    .collect(),
            );
        }
        let coeffs = layers.into_iter().flatten().collect();
        Ok(Self { ring: self.ring.clone(), order: self.order, coeffs })
    }

    /// `exp(s)` summed as a truncated Taylor series (Horner form).
    pub fn exp_taylor(&self) -> Result<Self> {
        if !self.constant_term().is_zero() {
            return Err(SeriesError::NonzeroConstant);
        }
        let one = Self::one(&self.ring, self.order);
        let mut r = one.clone();
        for k in (1..=self.order).rev() {
            r = &one + &(self * &r).scale(&rat(1, i64::from(k)));
        }
        Ok(r)
    }

    /// Multiplicative inverse of a series with nonzero constant term.
    pub fn invert(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(SeriesError::NotInvertible);
        }
        let inv0 = c0.recip();
        let one = Self::one(&self.ring, self.order);
        // self = c0 (1 - t) with t of positive grading.
        let t = &one - &self.scale(&inv0);
        let mut r = one.clone();
        for _ in 0..self.order {
            r = &one + &(&t * &r);
        }
        Ok(r.scale(&inv0))
    }

    /// `log(u)` for `u(0) = 1`, via `E(log u) = E(u) / u`.
    pub fn log(&self) -> Result<Self> {
        if !self.constant_term().is_one() {
            return Err(SeriesError::ConstantNotOne);
        }
        let v = &self.euler() * &self.invert()?;
        let coeffs = v
            .coeffs
            .into_iter()
            .map(|(e, c)| {
                let g = self.ring.grading(&e);
                (e, c / BigRational::from_integer(g.into()))
            })
            .collect();
        Ok(Self { ring: self.ring.clone(), order: self.order, coeffs })
    }

    /// `log(1 + t) = t - t^2/2 + ...` summed directly.
    pub fn log_taylor(&self) -> Result<Self> {
        if !self.constant_term().is_one() {
            return Err(SeriesError::ConstantNotOne);
        }
        let t = self - &Self::one(&self.ring, self.order);
        let mut r = Self::zero(&self.ring, self.order);
        let mut power = t.clone();
        for k in 1..=self.order {
            let sign = if k % 2 == 1 { 1 } else { -1 };
            r = &r + &power.scale(&rat(sign, i64::from(k)));
            power = &power * &t;
        }
        Ok(r)
    }

    /// Substitutes `x_a -> x_a * units[a]` in an ordinary power series.
    ///
    /// All units must share one ring (the target) whose variable count and
    /// weights match this series' ring, and have nonzero constant terms.
    pub fn substitute(&self, units: &[TruncatedSeries]) -> Result<Self> {
        if self.ring.support() != &Support::Orthant {
            return Err(SeriesError::InvalidRing("substitution needs an orthant ring".into()));
        }
        let n = self.ring.variable_count();
        if units.len() != n {
            return Err(SeriesError::Shape(format!("{} images for {} variables", units.len(), n)));
        }
        let target = units[0].ring.clone();
        for (a, u) in units.iter().enumerate() {
            if !u.same_ring(&units[0]) {
                return Err(SeriesError::RingMismatch);
            }
            if u.order != self.order {
                return Err(SeriesError::OrderMismatch(self.order, u.order));
            }
            if u.constant_term().is_zero() {
                return Err(SeriesError::NotUnitMonomial(a));
            }
        }
        if target.variable_count() != n || target.weights() != self.ring.weights() {
            return Err(SeriesError::RingMismatch);
        }
        let images: Vec<Self> = units
            .iter()
            .enumerate()
            .map(|(a, u)| Ok(&Self::variable(&target, self.order, a)? * u))
            .collect::<Result<_>>()?;
        let mut powers: Vec<Vec<Self>> = images
            .iter()
            .map(|_| vec![Self::one(&target, self.order)])
            .collect();
        let mut out = Self::zero(&target, self.order);
        for (e, c) in &self.coeffs {
            let mut term = Self::constant(&target, self.order, c.clone());
            for (a, &k) in e.iter().enumerate() {
                let k = k as usize;
                while powers[a].len() <= k {
                    let next = powers[a].last().unwrap() * &images[a];
                    powers[a].push(next);
                }
                if k > 0 {
                    term = &term * &powers[a][k];
                }
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// Re-homes the terms in another ring through an exponent map.
    pub fn map_into(
        &self,
        ring: &Arc<RingDescriptor>,
        order: u32,
        f: impl Fn(&Exponent) -> Exponent,
    ) -> Result<Self> {
        Self::from_terms(ring, order, self.coeffs.iter().map(|(e, c)| (f(e), c.clone())))
    }

    pub fn to_records(&self) -> Vec<TermRecord> {
        self.coeffs
            .iter()
            .map(|(e, c)| TermRecord {
                exp: e.clone(),
                num: c.numer().to_string(),
                den: c.denom().to_string(),
            })
            .collect()
    }

    /// JSON array of `{"exp", "num", "den"}` records sorted by exponent.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_records()).expect("records serialize")
    }

    pub fn from_records(ring: &Arc<RingDescriptor>, order: u32, records: &[TermRecord]) -> Result<Self> {
        let mut terms = Vec::with_capacity(records.len());
        for r in records {
            let num: BigInt = r.num.parse().map_err(|_| SeriesError::Malformed(r.num.clone()))?;
            let den: BigInt = r.den.parse().map_err(|_| SeriesError::Malformed(r.den.clone()))?;
            if !den.is_positive() {
                return Err(SeriesError::Malformed(format!("denominator {den}")));
            }
            if r.exp.len() != ring.variable_count() {
                return Err(SeriesError::Malformed(format!("exponent {:?}", r.exp)));
            }
            terms.push((r.exp.clone(), BigRational::new(num, den)));
        }
        Self::from_terms(ring, order, terms)
    }

    pub fn from_json(ring: &Arc<RingDescriptor>, order: u32, json: &str) -> Result<Self> {
        let records: Vec<TermRecord> =
            serde_json::from_str(json).map_err(|e| SeriesError::Malformed(e.to_string()))?;
        Self::from_records(ring, order, &records)
    }

    /// Human-readable form with variables `{var}1, {var}2, ...`, terms ordered
    /// by grading and then lexicographically.
    pub fn pretty(&self, var: &str) -> String {
        if self.coeffs.is_empty() {
            return "0".to_string();
        }
        let mut terms: Vec<_> = self.coeffs.iter().collect();
        terms.sort_by(|a, b| self.ring.grading(a.0).cmp(&self.ring.grading(b.0)).then(b.0.cmp(a.0)));
        let mut out = String::new();
        for (k, (e, c)) in terms.into_iter().enumerate() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != 0)
                .map(|(i, &x)| if x == 1 { format!("{var}{}", i + 1) } else { format!("{var}{}^{x}", i + 1) })
                .collect();
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if mono.is_empty() {
                out.push_str(&abs.to_string());
            } else {
                if !abs.is_one() {
                    out.push_str(&abs.to_string());
                    out.push('*');
                }
                out.push_str(&mono.join("*"));
            }
        }
        out
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + O(deg {})", self.pretty("x"), self.order + 1)
    }
}

// Operator forms panic on ring/order mismatch; use the `checked_*` methods
// when the operands are not known to be compatible.
macro_rules! binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl std::ops::$tr<&TruncatedSeries> for &TruncatedSeries {
            type Output = TruncatedSeries;
            fn $method(self, rhs: &TruncatedSeries) -> TruncatedSeries {
                self.$checked(rhs).expect("incompatible series operands")
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl std::ops::Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        self.scale(&-Rational::one())
    }
}

/// Rectangular matrix of series over a common ring and order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<TruncatedSeries>,
}

impl SeriesMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<TruncatedSeries>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(SeriesError::Shape(format!("{} entries for {rows}x{cols}", entries.len())));
        }
        for e in &entries[1..] {
            entries[0].check_compatible(e)?;
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn from_rows(rows: Vec<Vec<TruncatedSeries>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(SeriesError::Shape("ragged rows".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn identity(ring: &Arc<RingDescriptor>, order: u32, n: usize) -> Self {
        let entries = (0..n * n)
            .map(|k| {
                if k / n == k % n {
                    TruncatedSeries::one(ring, order)
                } else {
                    TruncatedSeries::zero(ring, order)
                }
            })
            .collect();
        Self { rows: n, cols: n, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &TruncatedSeries {
        &self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[TruncatedSeries] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn ring(&self) -> &Arc<RingDescriptor> {
        self.entries[0].ring()
    }

    pub fn order(&self) -> u32 {
        self.entries[0].order()
    }

    pub fn transpose(&self) -> Self {
        let entries = (0..self.cols)
            .flat_map(|j| (0..self.rows).map(move |i| (i, j)))
            .map(|(i, j)| self.get(i, j).clone())
            .collect();
        Self { rows: self.cols, cols: self.rows, entries }
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(SeriesError::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        self.entries[0].check_compatible(&other.entries[0])?;
        let mut entries = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = TruncatedSeries::zero(self.ring(), self.order());
                for k in 0..self.cols {
                    let (a, b) = (self.get(i, k), other.get(k, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &(a * b);
                    }
                }
                entries.push(acc);
            }
        }
        Ok(Self { rows: self.rows, cols: other.cols, entries })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(SeriesError::Shape("difference of unequal shapes".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.checked_sub(b))
            .collect::<Result<_>>()?;
        Ok(Self { rows: self.rows, cols: self.cols, entries })
    }

    pub fn constant_part(&self) -> Vec<Vec<Rational>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).constant_term()).collect())
            .collect()
    }

    fn scalar_left_mul(c: &[Vec<Rational>], m: &Self) -> Self {
        let mut entries = Vec::with_capacity(c.len() * m.cols);
        for row in c {
            for j in 0..m.cols {
                let mut acc = TruncatedSeries::zero(m.ring(), m.order());
                for (k, ck) in row.iter().enumerate() {
                    if !ck.is_zero() {
                        acc = &acc + &m.get(k, j).scale(ck);
                    }
                }
                entries.push(acc);
            }
        }
        Self { rows: c.len(), cols: m.cols, entries }
    }

    /// Inverse over the series ring: the constant part is inverted exactly
    /// and the remainder is absorbed by a truncated Neumann series.
    pub fn invert(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(SeriesError::Shape("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let c = self.constant_part();
        let cinv = linalg::inverse(&c).ok_or(SeriesError::SingularConstant)?;
        let (ring, order) = (self.ring().clone(), self.order());
        // positive part P = M - C; T = -C^{-1} P; M^{-1} = (sum T^k) C^{-1}
        let mut positive = self.clone();
        for i in 0..n {
            for j in 0..n {
                let cst = TruncatedSeries::constant(&ring, order, c[i][j].clone());
                positive.entries[i * n + j] = self.get(i, j) - &cst;
            }
        }
        let neg_cinv: Vec<Vec<Rational>> =
            cinv.iter().map(|row| row.iter().map(|x| -x).collect()).collect();
        let t = Self::scalar_left_mul(&neg_cinv, &positive);
        let id = Self::identity(&ring, order, n);
        let mut r = id.clone();
        for _ in 0..order {
            let tr = t.checked_mul(&r)?;
            r = Self {
                rows: n,
                cols: n,
                entries: id.entries.iter().zip(&tr.entries).map(|(a, b)| a + b).collect(),
            };
        }
        let cinv_series = Self::new(
            n,
            n,
            cinv.iter()
                .flatten()
                .map(|x| TruncatedSeries::constant(&ring, order, x.clone()))
                .collect(),
        )?;
        r.checked_mul(&cinv_series)
    }
}
