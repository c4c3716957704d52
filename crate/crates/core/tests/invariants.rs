use std::sync::Arc;

use proptest::prelude::*;

use toric_mirror::builtins::{all_builtins, builtin, BUILTIN_NAMES};
use toric_mirror::cone;
use toric_mirror::fan::Toric;
use toric_mirror::linalg;
use toric_mirror::mirror::{self, MirrorEngine};
use toric_mirror::seidel::{self, RelationSpan};
use toric_mirror::series::{rat, TruncatedSeries};

fn toric(name: &str) -> Arc<Toric> {
    Arc::new(builtin(name).unwrap().toric().unwrap())
}

#[test]
fn wall_classes_are_ray_relations() {
    for b in all_builtins() {
        let t = b.toric().unwrap();
        for w in t.wall_curves() {
            for k in 0..t.n() {
                let s: i64 = (0..t.m()).map(|i| w.pairings[i] * t.fan().ray(i)[k]).sum();
                assert_eq!(s, 0, "{}", b.name);
            }
            assert_eq!(w.pairings[w.opposite.0], 1);
            assert_eq!(w.pairings[w.opposite.1], 1);
            let support_ok = w
                .pairings
                .iter()
                .enumerate()
                .all(|(i, &x)| x == 0 || w.wall.contains(&i) || i == w.opposite.0 || i == w.opposite.1);
            assert!(support_ok, "{}", b.name);
        }
    }
}

#[test]
fn divisor_rows_annihilate_rays() {
    for b in all_builtins() {
        let t = b.toric().unwrap();
        for row in t.divisor_matrix().rows() {
            for k in 0..t.n() {
                let s: i64 = (0..t.m()).map(|i| row[i] * t.fan().ray(i)[k]).sum();
                assert_eq!(s, 0);
            }
        }
    }
}

#[test]
fn cones_are_dual() {
    for b in all_builtins() {
        let t = b.toric().unwrap();
        let c = t.cones();
        for g in &c.mori_generators {
            assert!(c.nef_generators.iter().all(|h| linalg::dot(g, h) >= 0));
            assert!(c.nef_generators.iter().any(|h| linalg::dot(g, h) > 0), "{}", b.name);
        }
        for h in &c.nef_generators {
            assert!(c.mori_generators.iter().any(|g| linalg::dot(g, h) > 0), "{}", b.name);
        }
        assert_eq!(linalg::rank_z(&c.nef_generators), t.r());
    }
}

#[test]
fn enumerate_ne_is_exhaustive() {
    for b in all_builtins() {
        let t = b.toric().unwrap();
        let order = 5u32;
        let got = t.enumerate_ne(order);
        let r = t.r();
        let mut box_points = vec![vec![]];
        for _ in 0..r {
            box_points = box_points
                .into_iter()
                .flat_map(|p: Vec<i64>| {
                    (0..=i64::from(order)).map(move |x| {
                        let mut q = p.clone();
                        q.push(x);
                        q
                    })
                })
                .collect();
        }
        let mut expected: Vec<Vec<i64>> = box_points
            .into_iter()
            .filter(|d| d.iter().sum::<i64>() <= i64::from(order))
            .filter(|d| cone::in_cone_by_combination(&t.cones().mori_generators, d))
            .collect();
        expected.sort_by_key(|d| (d.iter().sum::<i64>(), d.clone()));
        assert_eq!(got, expected, "{}", b.name);
    }
}

#[test]
fn semi_positivity_of_builtins() {
    for b in all_builtins() {
        let t = b.toric().unwrap();
        assert!(t.wall_curves().iter().all(|w| w.c1() >= 0));
    }
    let f2 = toric("f2");
    let fibre = f2.wall_curves().iter().find(|w| w.pairings == vec![0, -2, 1, 1]).unwrap();
    assert_eq!(fibre.c1(), 0);
}

#[test]
fn fano_detection_gives_trivial_data() {
    for name in BUILTIN_NAMES {
        let t = toric(name);
        if !t.is_fano() {
            continue;
        }
        let e = MirrorEngine::new(t, 6).unwrap();
        assert!(e.mirror_map().forward.iter().all(TruncatedSeries::is_zero));
        assert!(e.asymptotics().g00.is_zero());
        assert!(e.corrections().f.iter().all(|f| f.len() == 1 && f.constant_term() == rat(1, 1)));
    }
}

#[test]
fn product_fan_inherits_f2_corrections() {
    let f2 = MirrorEngine::new(toric("f2"), 6).unwrap();
    let prod = MirrorEngine::new(toric("p1xf2"), 6).unwrap();
    for j in 0..4 {
        let terms: Vec<(Vec<i64>, String)> = prod.corrections().f[j]
            .terms()
            .map(|(e, c)| {
                assert_eq!(e[2], 0);
                (e[..2].to_vec(), c.to_string())
            })
            .collect();
        let want: Vec<(Vec<i64>, String)> =
            f2.corrections().f[j].terms().map(|(e, c)| (e.clone(), c.to_string())).collect();
        assert_eq!(terms, want);
    }
    for j in 4..6 {
        assert_eq!(prod.corrections().f[j], TruncatedSeries::one(prod.toric().k_ring(), 6));
    }
}

#[test]
fn potential_support_and_unit_terms() {
    for name in BUILTIN_NAMES {
        let e = MirrorEngine::new(toric(name), 5).unwrap();
        let w = e.potential();
        let ring = e.toric().disc_ring();
        for (j, term) in w.terms.iter().enumerate() {
            let mut unit = vec![0; e.toric().m()];
            unit[j] = 1;
            assert_eq!(term.coeff(&unit), rat(1, 1), "{name}");
            for (exp, _) in term.terms() {
                assert!(ring.contains(exp), "{name}: {exp:?}");
            }
        }
    }
}

#[test]
fn truncation_stability() {
    for name in BUILTIN_NAMES {
        let lo = MirrorEngine::new(toric(name), 3).unwrap();
        let hi = MirrorEngine::new(toric(name), 5).unwrap();
        for (a, b) in lo.corrections().f.iter().zip(&hi.corrections().f) {
            assert_eq!(*a, b.truncate(3));
        }
        for (a, b) in lo.mirror_map().forward.iter().zip(&hi.mirror_map().forward) {
            assert_eq!(*a, b.truncate(3));
        }
    }
}

#[test]
fn frks_images_of_lifts() {
    for name in BUILTIN_NAMES {
        let e = MirrorEngine::new(toric(name), 5).unwrap();
        let lifts = seidel::seidel_lifts_closed(&e).unwrap();
        let f = &e.corrections().f;
        for (j, l) in lifts.iter().enumerate() {
            let img = seidel::frks(e.jacobi(), &l.coeffs).unwrap();
            for (k, c) in img.iter().enumerate() {
                let want = if j == k { 1 } else { 0 };
                assert!(c.len() <= 1 && c.constant_term() == rat(want, 1), "{name}");
            }
        }
        // frks(delta_phi) = (<phi, b_j> f_j)_j
        for phi in 0..e.toric().n() {
            let coeffs: Vec<TruncatedSeries> = (0..e.toric().m())
                .map(|i| {
                    TruncatedSeries::constant(e.toric().k_ring(), 5, linalg::q(e.toric().fan().ray(i)[phi]))
                })
                .collect();
            let img = seidel::frks(e.jacobi(), &coeffs).unwrap();
            for (j, c) in img.iter().enumerate() {
                assert_eq!(*c, f[j].scale(&linalg::q(e.toric().fan().ray(j)[phi])), "{name}");
            }
        }
    }
}

#[test]
fn reduction_at_degree_zero() {
    for name in BUILTIN_NAMES {
        let e = MirrorEngine::new(toric(name), 4).unwrap();
        let span = RelationSpan::new(e.toric(), &e.corrections().f).unwrap();
        let lifts = seidel::seidel_lifts_closed(&e).unwrap();
        for (j, l) in lifts.iter().enumerate() {
            let img = seidel::frks(e.jacobi(), &l.coeffs).unwrap();
            let red = span.reduce(&img).unwrap();
            for (k, x) in red.iter().enumerate() {
                let c = x.constant_term();
                if span.pivots().contains(&k) {
                    assert!(x.is_zero(), "{name}");
                } else if !span.pivots().contains(&j) {
                    assert_eq!(c, rat(i64::from(j == k), 1), "{name}");
                }
            }
        }
    }
}

fn random_vector(t: &Toric, order: u32, coeffs: &[i64]) -> Vec<TruncatedSeries> {
    (0..t.m())
        .map(|j| {
            let terms = coeffs
                .iter()
                .enumerate()
                .skip(j)
                .step_by(t.m())
                .map(|(k, &c)| (vec![(k % 3) as i64; t.r()], rat(c, 1)));
            TruncatedSeries::from_terms(t.k_ring(), order, terms).unwrap()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reduction_is_a_projector_modulo_relations(
        which in 0usize..BUILTIN_NAMES.len(),
        coeffs in proptest::collection::vec(-4i64..=4, 12),
        mult in proptest::collection::vec(-3i64..=3, 3),
    ) {
        let t = toric(BUILTIN_NAMES[which]);
        let e = MirrorEngine::new(t.clone(), 3).unwrap();
        let span = RelationSpan::new(&t, &e.corrections().f).unwrap();
        let x = random_vector(&t, 3, &coeffs);
        let rx = span.reduce(&x).unwrap();
        prop_assert_eq!(&span.reduce(&rx).unwrap(), &rx);
        let mut y = x.clone();
        for (phi, g) in span.generators.iter().enumerate() {
            let c = linalg::q(mult[phi % mult.len()]);
            for (yj, gj) in y.iter_mut().zip(g) {
                *yj = &*yj + &gj.scale(&c);
            }
        }
        prop_assert_eq!(span.reduce(&y).unwrap(), rx.clone());
        for &p in span.pivots() {
            prop_assert!(rx[p].is_zero());
        }
    }

    #[test]
    fn open_gw_matches_correction_coefficients(which in 0usize..BUILTIN_NAMES.len()) {
        let t = toric(BUILTIN_NAMES[which]);
        let e = MirrorEngine::new(t.clone(), 4).unwrap();
        for d in t.enumerate_ne(4) {
            for i in 0..t.m() {
                let got = e.open_gw(i, &d);
                if t.c1(&d) == 0 {
                    prop_assert_eq!(got.unwrap(), e.corrections().f[i].coeff(&d));
                } else {
                    prop_assert!(matches!(got, Err(mirror::MirrorError::OutOfModel(_))));
                }
            }
        }
    }
}

#[test]
fn g0_is_zero_for_vertices() {
    for name in BUILTIN_NAMES {
        let t = toric(name);
        for &j in t.fan_polytope_vertices() {
            assert!(mirror::g0_series(&t, j, 6).unwrap().is_zero(), "{name} {j}");
        }
    }
}

#[test]
fn linear_relations_of_batyrev_elements() {
    for name in BUILTIN_NAMES {
        let e = MirrorEngine::new(toric(name), 5).unwrap();
        let b = seidel::batyrev_elements(&e).unwrap();
        for c in seidel::divisor_relations(e.toric()) {
            assert!(seidel::combine(&b, &c).coeffs.iter().all(TruncatedSeries::is_zero), "{name}");
        }
    }
}
