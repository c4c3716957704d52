//! Dense exact linear algebra over the rationals and the integers.
//!
//! Matrices here are tiny (ranks of Picard groups, lattice dimensions), so
//! everything is plain Gaussian elimination on `Vec<Vec<_>>`.

use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};

use crate::series::Rational;

pub type QMatrix = Vec<Vec<Rational>>;
pub type ZMatrix = Vec<Vec<i64>>;

pub fn q(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn to_q_matrix(m: &[Vec<i64>]) -> QMatrix {
    m.iter().map(|row| row.iter().map(|&x| q(x)).collect()).collect()
}

pub fn transpose<T: Clone>(m: &[Vec<T>]) -> Vec<Vec<T>> {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len())
        .map(|j| m.iter().map(|row| row[j].clone()).collect())
        .collect()
}

/// Reduced row echelon form in place; returns the pivot columns.
fn rref(m: &mut QMatrix) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = &m[r][j] * &f;
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &[Vec<Rational>]) -> usize {
    let mut work = m.to_vec();
    rref(&mut work).len()
}

pub fn rank_z(m: &[Vec<i64>]) -> usize {
    rank(&to_q_matrix(m))
}

pub fn inverse(m: &[Vec<Rational>]) -> Option<QMatrix> {
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return None;
    }
    let mut aug: QMatrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Some solution of `a x = b`, or `None` if the system is inconsistent.
/// Free variables are set to zero.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut aug: QMatrix = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug[r][cols].clone();
    }
    Some(x)
}

/// One-dimensional kernel generator of an integer matrix, scaled to a
/// primitive integer vector. `None` unless the kernel has dimension one.
pub fn kernel_line(m: &[Vec<i64>], cols: usize) -> Option<Vec<i64>> {
    let mut work = to_q_matrix(m);
    let pivots = rref(&mut work);
    if cols - pivots.len() != 1 {
        return None;
    }
    let free = (0..cols).find(|c| !pivots.contains(c))?;
    let mut v = vec![Rational::zero(); cols];
    v[free] = Rational::one();
    for (r, &c) in pivots.iter().enumerate() {
        v[c] = -work[r][free].clone();
    }
    Some(primitive_from_rational(&v))
}

/// Clears denominators and divides by the content.
pub fn primitive_from_rational(v: &[Rational]) -> Vec<i64> {
    let lcm = v
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    ints.iter()
        .map(|x| {
            let y = if g.is_zero() { x.clone() } else { x / &g };
            y.to_i64().expect("lattice vector entry exceeds i64")
        })
        .collect()
}

pub fn primitive(v: &[i64]) -> Vec<i64> {
    let g = v.iter().fold(0i64, |acc, &x| acc.gcd(&x));
    if g == 0 {
        v.to_vec()
    } else {
        v.iter().map(|x| x / g).collect()
    }
}

pub fn gcd_all(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |acc, &x| acc.gcd(&x))
}

/// Determinant by fraction-free elimination.
pub fn det(m: &[Vec<i64>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Column echelon form `a * u = h` with `u` unimodular.
///
/// Returns `(h, u, rank)`; the first `rank` columns of `h` are the pivot
/// columns and the remaining columns of `u` span the integer kernel of `a`.
pub fn column_echelon(a: &[Vec<i64>], cols: usize) -> (Vec<Vec<i128>>, Vec<Vec<i128>>, usize) {
    let rows = a.len();
    let mut h: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut u: Vec<Vec<i128>> = (0..cols)
        .map(|i| (0..cols).map(|j| i128::from(i == j)).collect())
        .collect();
    let col_op = |mat: &mut Vec<Vec<i128>>, c: usize, j: usize, x: i128, y: i128, s: i128, t: i128| {
        for row in mat.iter_mut() {
            let (vc, vj) = (row[c], row[j]);
            row[c] = x * vc + y * vj;
            row[j] = s * vc + t * vj;
        }
    };
    let mut c = 0;
    for i in 0..rows {
        if c == cols {
            break;
        }
        for j in c + 1..cols {
            let (av, bv) = (h[i][c], h[i][j]);
            if bv == 0 {
                continue;
            }
            let (g, x, y) = ext_gcd(av, bv);
            let (s, t) = (-bv / g, av / g);
            col_op(&mut h, c, j, x, y, s, t);
            col_op(&mut u, c, j, x, y, s, t);
        }
        if h[i][c] == 0 {
            continue;
        }
        if h[i][c] < 0 {
            for row in h.iter_mut().chain(u.iter_mut()) {
                row[c] = -row[c];
            }
        }
        c += 1;
    }
    (h, u, c)
}

fn narrow(x: i128) -> i64 {
    i64::try_from(x).expect("lattice computation overflowed i64")
}

/// Saturated integer basis of `{x in Z^cols : a x = 0}`.
pub fn integer_kernel(a: &[Vec<i64>], cols: usize) -> Vec<Vec<i64>> {
    let (_, u, rank) = column_echelon(a, cols);
    (rank..cols)
        .map(|j| (0..cols).map(|i| narrow(u[i][j])).collect())
        .collect()
}

/// Integer right inverse `x` (cols x rows) with `a x = I`, if one exists.
pub fn integer_right_inverse(a: &[Vec<i64>], cols: usize) -> Option<ZMatrix> {
    let rows = a.len();
    let (h, u, rank) = column_echelon(a, cols);
    if rank != rows || (0..rows).any(|i| h[i][i] != 1) {
        return None;
    }
    // h restricted to its first `rows` columns is unit lower triangular;
    // invert it by forward substitution.
    let mut hinv = vec![vec![0i128; rows]; rows];
    for k in 0..rows {
        for i in 0..rows {
            let mut s: i128 = i128::from(i == k);
            for j in 0..i {
                s -= h[i][j] * hinv[j][k];
            }
            hinv[i][k] = s;
        }
    }
    let mut x = vec![vec![0i64; rows]; cols];
    for (i, xi) in x.iter_mut().enumerate() {
        for (k, xik) in xi.iter_mut().enumerate() {
            *xik = narrow((0..rows).map(|j| u[i][j] * hinv[j][k]).sum());
        }
    }
    Some(x)
}

pub fn mat_vec(m: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

pub fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn is_nonneg(x: &Rational) -> bool {
    !x.is_negative()
}
