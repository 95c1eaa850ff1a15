use super::*;
use crate::scalar::Scalar;
use crate::Exact;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(n: i64) -> Exact {
    <Exact as Scalar>::from_int(n)
}

fn qr(n: i64, d: i64) -> Exact {
    <Exact as Scalar>::from_ratio(n, d)
}

fn fcone(gens: &[&[f64]]) -> GeneratedCone<f64> {
    GeneratedCone::new(gens.iter().map(|g| g.to_vec()).collect()).unwrap()
}

fn fpoly(gens: &[&[f64]]) -> GeneratedPolytope<f64> {
    GeneratedPolytope::new(gens.iter().map(|g| g.to_vec()).collect()).unwrap()
}

#[test]
fn quadrant_membership_with_certificates() {
    let cone = fcone(&[&[1.0, 0.0], &[0.0, 1.0]]);
    let inside = cone.membership(&[2.0, 3.0], MembershipMode::Closed).unwrap();
    assert!(inside.member);
    let coeffs = inside.coefficients.unwrap();
    assert!((coeffs[0] - 2.0).abs() < 1e-9 && (coeffs[1] - 3.0).abs() < 1e-9);

    let outside = cone.membership(&[-1.0, 0.0], MembershipMode::Closed).unwrap();
    assert!(!outside.member);
    let u = outside.separating.unwrap();
    let pairing_y = -u[0];
    assert!(pairing_y > 1e-9, "separating functional must be positive on y");
    for g in cone.generators() {
        assert!(dot(g, &u) <= 1e-9, "separating functional must be nonpositive on generators");
    }
}

#[test]
fn relint_needs_every_generator_direction() {
    // 0 is in the closed cone but not its relative interior: the third
    // generator can never appear with a positive coefficient in a zero sum.
    let cone = fcone(&[&[1.0, 0.0], &[-1.0, 0.0], &[0.0, 1.0]]);
    let closed = cone.membership(&[0.0, 0.0], MembershipMode::Closed).unwrap();
    assert!(closed.member);
    let relint = cone.membership(&[0.0, 0.0], MembershipMode::Relint).unwrap();
    assert!(!relint.member);
    assert!(relint.slack.unwrap().abs() < 1e-9);
    assert!(!cone.zero_in_relint());

    let line = fcone(&[&[1.0], &[-1.0]]);
    assert!(line.zero_in_relint());
    let res = line.membership(&[0.0], MembershipMode::Relint).unwrap();
    // Slack is capped at one, and the cap is attained on a full line.
    assert!((res.slack.unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn zero_cone_contains_origin_in_relint() {
    let zero = fcone(&[&[0.0, 0.0]]);
    assert!(zero.zero_in_relint());
    let faces = zero.enumerate_faces().unwrap();
    assert_eq!(faces.len(), 1);
    assert_eq!(faces[0].dim, 0);

    let ray = fcone(&[&[1.0, 0.0]]);
    assert!(!ray.zero_in_relint());
}

#[test]
fn separating_functional_matches_gordan_alternative() {
    let cone = fcone(&[&[1.0, 0.0], &[0.0, 1.0]]);
    let u = cone.separating_functional().unwrap();
    for g in cone.generators() {
        assert!(dot(g, &u) <= -1.0 + 1e-9);
    }
    // Origin in the hull of {1, -1} kills every separating functional.
    let line = fcone(&[&[1.0], &[-1.0]]);
    assert!(line.separating_functional().is_none());
}

#[test]
fn quadrant_face_lattice() {
    let cone = fcone(&[&[1.0, 0.0], &[0.0, 1.0]]);
    let faces = cone.enumerate_faces().unwrap();
    // Apex, two rays, improper.
    assert_eq!(faces.len(), 4);
    assert_eq!(faces[0].indices, Vec::<usize>::new());
    assert_eq!(faces[0].dim, 0);
    assert_eq!(faces[1].indices, vec![0]);
    assert_eq!(faces[2].indices, vec![1]);
    assert_eq!(faces[3].indices, vec![0, 1]);
    assert_eq!(faces[3].dim, 2);
    assert!(faces[3].witness.iter().all(|v| *v == 0.0));
    // Every proper face's witness is verifiably exposing.
    for f in &faces[..3] {
        for (j, g) in cone.generators().iter().enumerate() {
            let v = dot(g, &f.witness);
            if f.indices.contains(&j) {
                assert!(v.abs() <= 1e-9);
            } else {
                assert!(v <= -1.0 + 1e-9);
            }
        }
    }
    assert!(faces[3].contains(&faces[1]) && !faces[1].contains(&faces[2]));
}

#[test]
fn line_cone_has_only_the_improper_face() {
    let line = fcone(&[&[1.0], &[-1.0]]);
    let faces = line.enumerate_faces().unwrap();
    assert_eq!(faces.len(), 1);
    assert_eq!(faces[0].indices, vec![0, 1]);
    assert_eq!(faces[0].dim, 1);
}

#[test]
fn segment_polytope_faces() {
    let seg = fpoly(&[&[1.0], &[-1.0]]);
    let faces = seg.enumerate_faces().unwrap();
    assert_eq!(faces.len(), 3);
    assert_eq!(faces[0].indices, vec![0]);
    assert_eq!(faces[0].dim, 0);
    assert_eq!(faces[1].indices, vec![1]);
    assert_eq!(faces[2].indices, vec![0, 1]);
    assert_eq!(faces[2].dim, 1);
}

#[test]
fn triangle_face_poset() {
    let tri = fpoly(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
    let faces = tri.enumerate_faces().unwrap();
    // Three vertices, three edges, improper.
    assert_eq!(faces.len(), 7);
    let vertices = faces.iter().filter(|f| f.indices.len() == 1).count();
    let edges = faces.iter().filter(|f| f.indices.len() == 2).count();
    assert_eq!((vertices, edges), (3, 3));
    for f in &faces {
        let expect = match f.indices.len() {
            1 => 0,
            2 => 1,
            3 => 2,
            _ => unreachable!(),
        };
        assert_eq!(f.dim, expect);
    }
    let improper = faces.last().unwrap();
    assert!(faces.iter().all(|f| improper.contains(f)));
}

#[test]
fn exposed_face_selection() {
    let cone = fcone(&[&[1.0, 0.0], &[0.0, 1.0]]);
    let apex = cone.exposed_face(&[-1.0, -1.0]).unwrap();
    assert!(apex.indices.is_empty());
    let ray = cone.exposed_face(&[0.0, -1.0]).unwrap();
    assert_eq!(ray.indices, vec![0]);
    assert!(matches!(
        cone.exposed_face(&[1.0, 0.0]),
        Err(ConvexError::UnboundedSupport)
    ));
    assert!(matches!(cone.exposed_face(&[0.0, 0.0]), Err(ConvexError::ZeroFunctional)));

    let seg = fpoly(&[&[1.0], &[-1.0]]);
    let v = seg.exposed_face(&[1.0]).unwrap();
    assert_eq!(v.indices, vec![0]);
}

#[test]
fn min_norm_point_on_a_segment() {
    let seg = fpoly(&[&[1.0, 0.0], &[0.0, 1.0]]);
    let mnp = seg.min_norm_point();
    assert!((mnp.point[0] - 0.5).abs() < 1e-10);
    assert!((mnp.point[1] - 0.5).abs() < 1e-10);
    assert!((mnp.norm() - 0.5f64.sqrt()).abs() < 1e-10);
    let s: f64 = mnp.coefficients.iter().sum();
    assert!((s - 1.0).abs() < 1e-10);

    // Same segment, exact arithmetic: the answer is exactly (1/2, 1/2).
    let seg_q =
        GeneratedPolytope::new(vec![vec![q(1), q(0)], vec![q(0), q(1)]]).unwrap();
    let mnp_q = seg_q.min_norm_point();
    assert_eq!(mnp_q.point, vec![qr(1, 2), qr(1, 2)]);
    assert_eq!(mnp_q.norm_sq, qr(1, 2));
}

#[test]
fn min_norm_point_inside_hull_is_origin() {
    let poly = GeneratedPolytope::new(vec![
        vec![q(1), q(1)],
        vec![q(-1), q(0)],
        vec![q(0), q(-1)],
    ])
    .unwrap();
    let mnp = poly.min_norm_point();
    assert_eq!(mnp.point, vec![q(0), q(0)]);
    assert_eq!(mnp.norm_sq, q(0));
}

#[test]
fn closest_point_projects_onto_the_hull() {
    let seg = fpoly(&[&[0.0, 0.0], &[1.0, 0.0]]);
    let res = seg.closest_point(&[2.0, 1.0]);
    assert!((res.point[0] - 1.0).abs() < 1e-10);
    assert!(res.point[1].abs() < 1e-10);
    assert!((res.norm_sq - 2.0).abs() < 1e-10);
}

#[test]
fn min_norm_satisfies_variational_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..40 {
        let n = rng.gen_range(2..=7);
        let d = rng.gen_range(1..=4);
        let gens: Vec<Vec<f64>> =
            (0..n).map(|_| (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
        let poly = GeneratedPolytope::new(gens.clone()).unwrap();
        let mnp = poly.min_norm_point();
        let z = &mnp.point;
        for g in &gens {
            // Optimality: every generator sits on the far side of z.
            let lhs = dot(g, z) - dot(z, z);
            assert!(lhs >= -1e-8, "variational inequality violated: {lhs}");
        }
        let s: f64 = mnp.coefficients.iter().sum();
        assert!((s - 1.0).abs() < 1e-9);
        assert!(mnp.coefficients.iter().all(|&c| c >= -1e-12));
    }
}

#[test]
fn gordan_alternative_is_exact_in_exact_mode() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..30 {
        let n = rng.gen_range(1..=5);
        let gens: Vec<Vec<Exact>> = (0..n)
            .map(|_| {
                (0..3)
                    .map(|_| qr(rng.gen_range(-9..=9), rng.gen_range(1..=9)))
                    .collect()
            })
            .collect();
        let cone = GeneratedCone::new(gens.clone()).unwrap();
        let poly = GeneratedPolytope::new(gens).unwrap();
        let separated = cone.separating_functional().is_some();
        let zero_in_hull = poly
            .membership(&[q(0), q(0), q(0)], MembershipMode::Closed)
            .unwrap()
            .member;
        assert_ne!(separated, zero_in_hull, "exactly one side of the alternative holds");
    }
}

#[test]
fn float_and_exact_modes_agree_on_rational_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let pool: Vec<Vec<(i64, i64)>> = (0..5)
        .map(|_| (0..3).map(|_| (rng.gen_range(-6..=6), rng.gen_range(1..=6))).collect())
        .collect();
    for mask in 1u32..32 {
        let sel: Vec<&Vec<(i64, i64)>> =
            (0..5).filter(|&i| mask & (1 << i) != 0).map(|i| &pool[i]).collect();
        let gens_q: Vec<Vec<Exact>> =
            sel.iter().map(|g| g.iter().map(|&(a, b)| qr(a, b)).collect()).collect();
        let gens_f: Vec<Vec<f64>> =
            sel.iter().map(|g| g.iter().map(|&(a, b)| a as f64 / b as f64).collect()).collect();
        let cq = GeneratedCone::new(gens_q).unwrap();
        let cf = GeneratedCone::new(gens_f).unwrap();
        assert_eq!(cq.zero_in_relint(), cf.zero_in_relint(), "mask {mask}");
        assert_eq!(
            cq.separating_functional().is_some(),
            cf.separating_functional().is_some(),
            "mask {mask}"
        );
    }
}

#[test]
fn face_enumeration_respects_the_generator_cap() {
    let gens: Vec<Vec<f64>> = (0..21).map(|i| vec![i as f64, 1.0]).collect();
    let cone = GeneratedCone::new(gens).unwrap();
    assert!(matches!(
        cone.enumerate_faces(),
        Err(ConvexError::TooManyGenerators { n: 21, max: 20 })
    ));
}

#[test]
fn dimension_mismatch_is_rejected() {
    assert!(matches!(
        GeneratedCone::new(vec![vec![1.0], vec![1.0, 2.0]]),
        Err(ConvexError::DimensionMismatch { expected: 1, got: 2 })
    ));
    assert!(matches!(
        GeneratedCone::<f64>::new(vec![]),
        Err(ConvexError::EmptyGenerators)
    ));
    let cone = fcone(&[&[1.0, 0.0]]);
    assert!(cone.membership(&[1.0], MembershipMode::Closed).is_err());
}
