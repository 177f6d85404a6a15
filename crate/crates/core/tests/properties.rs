//! Property-based invariants of the projection core: idempotence,
//! nonexpansiveness, the variational inequality, cone orthogonality, the
//! Moreau decomposition, and the bipolar identity.

use proptest::prelude::*;

use alterproj::geometry::{self, ConvexSet};
use alterproj::linalg;
use alterproj::vector::Vector;

type V = Vector<f64>;

fn vecs(dim: usize, count: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(
        prop::collection::vec(-5.0f64..5.0, dim),
        1..=count,
    )
}

fn point(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, dim)
}

/// Any supported set kind in the given dimension; may be degenerate
/// (dependent generators, duplicate normals) on purpose.
fn convex_set(dim: usize) -> impl Strategy<Value = ConvexSet<f64>> {
    prop_oneof![
        vecs(dim, dim).prop_filter_map("needs independent vectors", move |raw| {
            let raw: Vec<V> = raw.into_iter().map(V::new).collect();
            let basis = linalg::orthonormalize(&raw, 1e-8);
            (!basis.is_empty()).then_some(ConvexSet::LinearSubspace { basis })
        }),
        (vecs(dim, dim), point(dim)).prop_filter_map(
            "needs independent vectors",
            move |(raw, off)| {
                let raw: Vec<V> = raw.into_iter().map(V::new).collect();
                let basis = linalg::orthonormalize(&raw, 1e-8);
                (!basis.is_empty()).then_some(ConvexSet::AffineSubspace {
                    basis,
                    offset: V::new(off),
                })
            }
        ),
        (point(dim), -3.0f64..3.0).prop_filter_map("needs nonzero normal", |(n, off)| {
            V::new(n).normalized().map(|normal| ConvexSet::HalfSpace {
                normal,
                offset: off,
            })
        }),
        (point(dim), 0.0f64..4.0).prop_map(|(c, r)| ConvexSet::Ball {
            center: V::new(c),
            radius: r,
        }),
        generated_cone(dim),
        generated_cone(dim).prop_map(|c| geometry::polar(&c).unwrap()),
    ]
}

fn generated_cone(dim: usize) -> impl Strategy<Value = ConvexSet<f64>> {
    vecs(dim, 2 * dim).prop_filter_map("needs a nonzero generator", |raw| {
        let generators: Vec<V> = raw
            .into_iter()
            .map(V::new)
            .filter(|v| v.norm() > 1e-6)
            .collect();
        (!generators.is_empty()).then_some(ConvexSet::GeneratedCone { generators })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn projection_idempotent((s, x) in (2usize..=5).prop_flat_map(|d| (convex_set(d), point(d)))) {
        let x = V::new(x);
        let p = geometry::project(&s, &x).unwrap();
        let pp = geometry::project(&s, &p).unwrap();
        prop_assert!(pp.dist(&p) <= 1e-10, "idempotence residual {}", pp.dist(&p));
    }

    #[test]
    fn projection_nonexpansive(
        (s, x, y) in (2usize..=5).prop_flat_map(|d| (convex_set(d), point(d), point(d)))
    ) {
        let (x, y) = (V::new(x), V::new(y));
        let px = geometry::project(&s, &x).unwrap();
        let py = geometry::project(&s, &y).unwrap();
        prop_assert!(px.dist(&py) <= x.dist(&y) + 1e-10);
    }

    #[test]
    fn variational_inequality(
        (s, x, seed) in (2usize..=5).prop_flat_map(|d| (convex_set(d), point(d), any::<u64>()))
    ) {
        use rand::SeedableRng;
        let x = V::new(x);
        let p = geometry::project(&s, &x).unwrap();
        let r = x.sub(&p);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for a in alterproj::analysis::sample_members(&s, 20, &mut rng).unwrap() {
            let inner = r.dot(&a.sub(&p));
            prop_assert!(inner <= 1e-10 * x.norm().max(1.0) * a.norm().max(1.0),
                "VI violated: {inner}");
        }
    }

    #[test]
    fn cone_orthogonality(
        (c, x) in (2usize..=5).prop_flat_map(|d| (generated_cone(d), point(d)))
    ) {
        let x = V::new(x);
        let p = geometry::project(&c, &x).unwrap();
        let inner = x.sub(&p).dot(&p).abs();
        prop_assert!(inner <= 1e-10 * x.norm_sq().max(1.0), "orthogonality residual {inner}");
    }

    #[test]
    fn moreau_decomposition(
        (c, x) in (2usize..=8).prop_flat_map(|d| (generated_cone(d), point(d)))
    ) {
        let x = V::new(x);
        let rep = geometry::moreau_check(&c, &x).unwrap();
        prop_assert!(rep.decomposition_residual <= 1e-10);
        prop_assert!(rep.orthogonality_residual <= 1e-10 * x.norm_sq().max(1.0));
    }

    #[test]
    fn bipolar_identity(
        (c, x) in (2usize..=5).prop_flat_map(|d| (generated_cone(d), point(d)))
    ) {
        let x = V::new(x);
        let cc = geometry::polar(&geometry::polar(&c).unwrap()).unwrap();
        let p1 = geometry::project(&c, &x).unwrap();
        let p2 = geometry::project(&cc, &x).unwrap();
        prop_assert!(p1.dist(&p2) <= 1e-8, "bipolar residual {}", p1.dist(&p2));
    }
}

/// The generic core works at f32 precision too (looser tolerances).
#[test]
fn f32_smoke() {
    type V32 = Vector<f32>;
    let cone = ConvexSet::GeneratedCone {
        generators: vec![V32::new(vec![1.0, 0.0]), V32::new(vec![1.0, 1.0])],
    };
    let p = geometry::project(&cone, &V32::new(vec![0.0, 1.0])).unwrap();
    assert!((p[0] - 0.5).abs() < 1e-5 && (p[1] - 0.5).abs() < 1e-5);
    let rep = geometry::moreau_check(&cone, &V32::new(vec![-0.3, 0.9])).unwrap();
    assert!(rep.decomposition_residual < 1e-5);
}
