//! Rational polyhedral cones given by generators: dual cones and extremal rays.
//!
//! Dimensions are at most a handful, so extreme rays of the dual are found by
//! enumerating `(dim - 1)`-subsets of generator hyperplanes and keeping the
//! kernel lines that satisfy every inequality.

use itertools::Itertools;

use crate::linalg;

/// Primitive generators of `{x : <g, x> >= 0 for all g in gens}`, sorted.
///
/// Complete when `gens` spans the space (the dual is then pointed); otherwise
/// only the rays of the dual meeting the enumerated hyperplane intersections
/// are returned, which is enough to detect the dual's dimension.
pub fn dual_cone_rays(gens: &[Vec<i64>], dim: usize) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = Vec::new();
    let admissible = |v: &[i64]| gens.iter().all(|g| linalg::dot(g, v) >= 0);
    let mut consider = |v: Vec<i64>| {
        for s in [1, -1] {
            let cand: Vec<i64> = v.iter().map(|x| s * x).collect();
            if admissible(&cand) && !out.contains(&cand) {
                out.push(cand);
            }
        }
    };
    match dim {
        0 => {}
        1 => consider(vec![1]),
        _ => {
            for subset in gens.iter().combinations(dim - 1) {
                let rows: Vec<Vec<i64>> = subset.into_iter().cloned().collect();
                if let Some(line) = linalg::kernel_line(&rows, dim) {
                    consider(line);
                }
            }
        }
    }
    out.sort();
    out
}

/// Extremal rays of the pointed full-dimensional cone generated by `gens`,
/// as primitive vectors.
pub fn extremal_rays(gens: &[Vec<i64>], dim: usize) -> Vec<Vec<i64>> {
    let dual = dual_cone_rays(gens, dim);
    let mut out: Vec<Vec<i64>> = gens
        .iter()
        .map(|g| linalg::primitive(g))
        .filter(|g| g.iter().any(|&x| x != 0))
        .filter(|g| {
            let tight: Vec<Vec<i64>> =
                dual.iter().filter(|h| linalg::dot(h, g) == 0).cloned().collect();
            dim == 1 || linalg::rank_z(&tight) == dim - 1
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Whether `x` is a nonnegative rational combination of `gens`, decided by
/// Carathéodory: some linearly independent subset carries it with
/// nonnegative coefficients.
pub fn in_cone_by_combination(gens: &[Vec<i64>], x: &[i64]) -> bool {
    if x.iter().all(|&v| v == 0) {
        return true;
    }
    let dim = x.len();
    for k in 1..=dim.min(gens.len()) {
        for subset in gens.iter().combinations(k) {
            let cols: Vec<Vec<i64>> = subset.into_iter().cloned().collect();
            if linalg::rank_z(&cols) < k {
                continue;
            }
            let a = linalg::to_q_matrix(&linalg::transpose(&cols));
            let b: Vec<_> = x.iter().map(|&v| linalg::q(v)).collect();
            if let Some(lambda) = linalg::solve(&a, &b) {
                if lambda.iter().all(linalg::is_nonneg) {
                    return true;
                }
            }
        }
    }
    false
}
