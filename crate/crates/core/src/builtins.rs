//! Example fans shipped with the library, each with a pinned divisor basis.

use crate::fan::{Fan, Result, Toric};

pub const BUILTIN_NAMES: [&str; 7] = ["p1", "p2", "f0", "f1", "f2", "p1xp2", "p1xf2"];

/// A named fan: rays, 0-based maximal cones and a nef divisor basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Builtin {
    pub name: &'static str,
    pub description: &'static str,
    pub dim: usize,
    pub rays: Vec<Vec<i64>>,
    pub max_cones: Vec<Vec<usize>>,
    pub divisor_matrix: Vec<Vec<i64>>,
}

impl Builtin {
    pub fn fan(&self) -> Fan {
        Fan::new(self.dim, self.rays.clone(), self.max_cones.clone()).expect("well-formed builtin")
    }

    pub fn toric(&self) -> Result<Toric> {
        Toric::new(self.fan(), Some(self.divisor_matrix.clone()))
    }
}

/// Cones of a Hirzebruch-type surface fan with rays ordered
/// `(0,1), (0,-1), (1,0), (-1,-k)`: `{1,3}, {3,2}, {2,4}, {4,1}`.
fn quad_cones() -> Vec<Vec<usize>> {
    vec![vec![0, 2], vec![2, 1], vec![1, 3], vec![3, 0]]
}

fn product_cones(a: &[Vec<usize>], b: &[Vec<usize>], shift: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for x in a {
        for y in b {
            out.push(x.iter().copied().chain(y.iter().map(|i| i + shift)).collect());
        }
    }
    out
}

pub fn builtin(name: &str) -> Option<Builtin> {
    let b = match name {
        "p1" => Builtin {
            name: "p1",
            description: "projective line",
            dim: 1,
            rays: vec![vec![1], vec![-1]],
            max_cones: vec![vec![0], vec![1]],
            divisor_matrix: vec![vec![1, 1]],
        },
        "p2" => Builtin {
            name: "p2",
            description: "projective plane",
            dim: 2,
            rays: vec![vec![1, 0], vec![0, 1], vec![-1, -1]],
            max_cones: vec![vec![0, 1], vec![1, 2], vec![2, 0]],
            divisor_matrix: vec![vec![1, 1, 1]],
        },
        "f0" => Builtin {
            name: "f0",
            description: "P1 x P1",
            dim: 2,
            rays: vec![vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]],
            max_cones: quad_cones(),
            divisor_matrix: vec![vec![1, 1, 0, 0], vec![0, 0, 1, 1]],
        },
        "f1" => Builtin {
            name: "f1",
            description: "Hirzebruch surface F1 (P2 blown up at a point)",
            dim: 2,
            rays: vec![vec![0, 1], vec![0, -1], vec![1, 0], vec![-1, -1]],
            max_cones: quad_cones(),
            divisor_matrix: vec![vec![0, -1, 1, 1], vec![1, 1, 0, 0]],
        },
        "f2" => Builtin {
            name: "f2",
            description: "Hirzebruch surface F2",
            dim: 2,
            rays: vec![vec![0, 1], vec![0, -1], vec![1, 0], vec![-1, -2]],
            max_cones: quad_cones(),
            divisor_matrix: vec![vec![0, -2, 1, 1], vec![1, 1, 0, 0]],
        },
        "p1xp2" => Builtin {
            name: "p1xp2",
            description: "P1 x P2",
            dim: 3,
            rays: vec![vec![1, 0, 0], vec![-1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![0, -1, -1]],
            max_cones: product_cones(&[vec![0], vec![1]], &[vec![0, 1], vec![1, 2], vec![2, 0]], 2),
            divisor_matrix: vec![vec![1, 1, 0, 0, 0], vec![0, 0, 1, 1, 1]],
        },
        "p1xf2" => Builtin {
            name: "p1xf2",
            description: "P1 x F2",
            dim: 3,
            rays: vec![
                vec![0, 1, 0],
                vec![0, -1, 0],
                vec![1, 0, 0],
                vec![-1, -2, 0],
                vec![0, 0, 1],
                vec![0, 0, -1],
            ],
            max_cones: product_cones(&quad_cones(), &[vec![0], vec![1]], 4),
            divisor_matrix: vec![
                vec![0, -2, 1, 1, 0, 0],
                vec![1, 1, 0, 0, 0, 0],
                vec![0, 0, 0, 0, 1, 1],
            ],
        },
        _ => return None,
    };
    Some(b)
}

pub fn all_builtins() -> Vec<Builtin> {
    BUILTIN_NAMES.iter().map(|n| builtin(n).expect("listed")).collect()
}
