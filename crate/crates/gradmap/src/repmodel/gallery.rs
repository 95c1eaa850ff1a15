//! Built-in example representations.
//!
//! Four families: the diagonal torus of GL(n) on R^n, the trace-free
//! diagonal torus of SL(n) on R^n, SL(2,R) on R^2, and SL(2,R) on binary
//! forms of degree d. The SL(2) entries carry the full symmetric
//! generator pair and a parametrized rotation action, so they exercise
//! every noncompact code path; the torus entries are abelian-only.
//!
//! Binary forms use the scaled monomial basis `sqrt(C(d,k)) x^(d-k) y^k`,
//! the unique scaling (up to a global factor) in which the rotation
//! action is orthogonal and the induced generators stay symmetric. Torus
//! weights are unchanged by the scaling.

use super::{build_representation, RepError, Representation};
use crate::linalg::{Mat, SymMatrix};
use thiserror::Error;

/// Largest torus rank and largest binary-forms degree accepted.
pub const MAX_TORUS_RANK: usize = 8;
pub const MAX_FORMS_DEGREE: usize = 10;

#[derive(Debug, Error)]
pub enum GalleryError {
    #[error("unknown gallery name: {0}")]
    UnknownName(String),
    #[error("bad gallery parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Rep(#[from] RepError),
}

/// Parametrized orthogonal family attached to the built-in SL(2) reps:
/// the image of the rotation circle in the representation.
#[derive(Debug, Clone, PartialEq)]
pub enum KAction {
    /// Rotations acting on the defining plane.
    PlaneRotation,
    /// Rotations acting on binary forms of the given degree.
    BinaryRotation { degree: usize },
}

impl KAction {
    /// Representing matrix of the rotation by `theta`.
    pub fn matrix(&self, theta: f64) -> Mat {
        match *self {
            KAction::PlaneRotation => {
                let (s, c) = theta.sin_cos();
                Mat::from_rows(&[vec![c, -s], vec![s, c]])
            }
            KAction::BinaryRotation { degree } => binary_rotation_matrix(degree, theta),
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut v = 1.0f64;
    for j in 0..k.min(n - k) {
        v = v * (n - j) as f64 / (j + 1) as f64;
    }
    v
}

/// Coordinates of the form `sum_k a_k x^(d-k) y^k` in the scaled basis.
pub fn form_coords(d: usize, monomial_coeffs: &[f64]) -> Vec<f64> {
    assert_eq!(monomial_coeffs.len(), d + 1, "degree-{d} form needs {} coefficients", d + 1);
    monomial_coeffs
        .iter()
        .enumerate()
        .map(|(k, &a)| a / binomial(d, k).sqrt())
        .collect()
}

/// Matrix of the rotation by `theta` on degree-`d` forms in the scaled
/// basis: substitute the rotated variables into each monomial and expand.
fn binary_rotation_matrix(d: usize, theta: f64) -> Mat {
    let (s, c) = theta.sin_cos();
    let n = d + 1;
    let mut m = Mat::zeros(n, n);
    for j in 0..n {
        // Image of x^(d-j) y^j under (x, y) -> (cx + sy, -sx + cy).
        let mut coeffs = vec![0.0f64; n];
        for p in 0..=(d - j) {
            let left = binomial(d - j, p) * c.powi((d - j - p) as i32) * s.powi(p as i32);
            for q in 0..=j {
                let right = binomial(j, q) * (-s).powi((j - q) as i32) * c.powi(q as i32);
                coeffs[p + q] += left * right;
            }
        }
        for i in 0..n {
            m[(i, j)] = coeffs[i] * (binomial(d, j) / binomial(d, i)).sqrt();
        }
    }
    m
}

fn diag(entries: &[f64]) -> SymMatrix {
    SymMatrix::diagonal(entries)
}

/// Diagonal torus of GL(n) acting on R^n; weights are the coordinate
/// functionals.
pub fn torus_gl(n: usize) -> Result<Representation, GalleryError> {
    if n == 0 || n > MAX_TORUS_RANK {
        return Err(GalleryError::BadParams(format!(
            "torus_gl rank must be in 1..={MAX_TORUS_RANK}, got {n}"
        )));
    }
    let gens: Vec<SymMatrix> = (0..n)
        .map(|a| {
            let mut e = vec![0.0; n];
            e[a] = 1.0;
            diag(&e)
        })
        .collect();
    Ok(build_representation(gens)?.with_label(&format!("torus_gl({n})")))
}

/// Trace-free diagonal torus of SL(n) acting on R^n; the weights are the
/// coordinate functionals restricted to the trace-zero diagonal, so they
/// sum to zero.
pub fn torus_sl(n: usize) -> Result<Representation, GalleryError> {
    if n < 2 || n > MAX_TORUS_RANK {
        return Err(GalleryError::BadParams(format!(
            "torus_sl rank must be in 2..={MAX_TORUS_RANK}, got {n}"
        )));
    }
    let gens: Vec<SymMatrix> = (0..n - 1)
        .map(|a| {
            let mut e = vec![0.0; n];
            e[a] = 1.0;
            e[a + 1] = -1.0;
            diag(&e)
        })
        .collect();
    Ok(build_representation(gens)?.with_label(&format!("torus_sl({n})")))
}

/// SL(2,R) on R^2: abelian part diag(1,-1), second symmetric generator
/// the off-diagonal reflection, rotations as the compact family.
pub fn sl2_standard() -> Result<Representation, GalleryError> {
    let h = diag(&[1.0, -1.0]);
    let e2 = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])
        .expect("constant generator is symmetric");
    Ok(build_representation(vec![h])?
        .with_p_gens(vec![e2])?
        .with_k_action(KAction::PlaneRotation)
        .with_label("sl2_standard"))
}

/// SL(2,R) on binary forms of degree d in the scaled monomial basis.
/// The torus generator is diagonal with weights d, d-2, ..., -d; the
/// second generator is the symmetric tridiagonal induced by the
/// off-diagonal reflection.
pub fn sl2_binary_forms(d: usize) -> Result<Representation, GalleryError> {
    if d == 0 || d > MAX_FORMS_DEGREE {
        return Err(GalleryError::BadParams(format!(
            "binary forms degree must be in 1..={MAX_FORMS_DEGREE}, got {d}"
        )));
    }
    let n = d + 1;
    let h: Vec<f64> = (0..n).map(|k| (d as f64) - 2.0 * k as f64).collect();
    let mut e2 = Mat::zeros(n, n);
    for k in 0..d {
        let v = (((k + 1) * (d - k)) as f64).sqrt();
        e2[(k, k + 1)] = v;
        e2[(k + 1, k)] = v;
    }
    let e2 = SymMatrix::from_mat(e2).expect("tridiagonal generator is symmetric");
    Ok(build_representation(vec![diag(&h)])?
        .with_p_gens(vec![e2])?
        .with_k_action(KAction::BinaryRotation { degree: d })
        .with_label(&format!("sl2_binary_forms({d})")))
}

/// Gallery names with one-line descriptions, for listings.
pub fn list() -> Vec<(&'static str, &'static str)> {
    vec![
        ("torus_gl(n)", "diagonal torus of GL(n) on R^n"),
        ("torus_sl(n)", "trace-free diagonal torus of SL(n) on R^n"),
        ("sl2_standard", "SL(2,R) on R^2 with full symmetric pair and rotations"),
        ("sl2_binary_forms(d)", "SL(2,R) on degree-d binary forms"),
    ]
}

/// Builds a gallery entry by name; parameters follow the listing.
pub fn build(name: &str, params: &[i64]) -> Result<Representation, GalleryError> {
    let need = |k: usize| -> Result<usize, GalleryError> {
        if params.len() != k {
            return Err(GalleryError::BadParams(format!(
                "{name} takes {k} parameter(s), got {}",
                params.len()
            )));
        }
        if k == 0 {
            return Ok(0);
        }
        usize::try_from(params[0])
            .map_err(|_| GalleryError::BadParams(format!("{name} parameter must be positive")))
    };
    match name {
        "torus_gl" => torus_gl(need(1)?),
        "torus_sl" => torus_sl(need(1)?),
        "sl2_standard" => {
            need(0)?;
            sl2_standard()
        }
        "sl2_binary_forms" => sl2_binary_forms(need(1)?),
        other => Err(GalleryError::UnknownName(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymMatrix;
    use crate::repmodel::ProjPoint;
    use crate::scalar::Scalar;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn frobenius_dot(a: &Mat, b: &Mat) -> f64 {
        let mut s = 0.0;
        for r in 0..a.nrows() {
            for c in 0..a.ncols() {
                s += a[(r, c)] * b[(r, c)];
            }
        }
        s
    }

    #[test]
    fn torus_weights_match_coordinate_functionals() {
        let gl2 = torus_gl(2).unwrap();
        assert_eq!(gl2.weights(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(gl2.exact_weights().is_some());

        let sl3 = torus_sl(3).unwrap();
        assert_eq!(sl3.abelian_dim(), 2);
        // Restricted coordinate functionals sum to zero.
        let mut sum = vec![0.0; 2];
        for row in sl3.weights() {
            sum[0] += row[0];
            sum[1] += row[1];
        }
        assert!(sum[0].abs() < 1e-12 && sum[1].abs() < 1e-12);
        // Trace pairings of diag(1,-1,0) and diag(0,1,-1).
        let g = sl3.gram();
        assert_eq!(
            [g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]],
            [2.0, -1.0, -1.0, 2.0]
        );
    }

    #[test]
    fn sl2_standard_weights_and_dual_moment() {
        let rep = sl2_standard().unwrap();
        assert_eq!(rep.weights(), &[vec![1.0], vec![-1.0]]);
        let pg = rep.p_gram().unwrap();
        assert_eq!([pg[(0, 0)], pg[(0, 1)], pg[(1, 1)]], [2.0, 0.0, 2.0]);

        // Dual pairings on a projective representative [x : y].
        let (x, y) = (0.8f64, 0.6f64);
        let d = rep.moment_p_dual(&[x, y]).unwrap();
        assert!((d[0] - (x * x - y * y)).abs() < 1e-12);
        assert!((d[1] - 2.0 * x * y).abs() < 1e-12);
        let norm = (d[0] * d[0] + d[1] * d[1]).sqrt();
        assert!((norm - 1.0).abs() < 1e-12, "dual image of the circle has unit norm");
    }

    #[test]
    fn binary_forms_weight_ladder() {
        let rep = sl2_binary_forms(4).unwrap();
        assert_eq!(rep.dim(), 5);
        let w: Vec<f64> = rep.weights().iter().map(|r| r[0]).collect();
        assert_eq!(w, vec![4.0, 2.0, 0.0, -2.0, -4.0]);
        let exact = rep.exact_weights().expect("integer weights certify");
        assert_eq!(exact[0][0], <crate::Exact as Scalar>::from_int(4));
        // Trace norms: both generators have squared norm 40 in degree 4.
        let g = rep.gram();
        let pg = rep.p_gram().unwrap();
        assert!((g[(0, 0)] - 40.0).abs() < 1e-12);
        assert!((pg[(1, 1)] - 40.0).abs() < 1e-12);
        assert!(pg[(0, 1)].abs() < 1e-12);
    }

    #[test]
    fn form_coords_scales_monomials() {
        // (x + y)^4 has monomial coefficients (1, 4, 6, 4, 1).
        let c = form_coords(4, &[1.0, 4.0, 6.0, 4.0, 1.0]);
        let expect = [1.0, 2.0, 6.0f64.sqrt(), 2.0, 1.0];
        for (a, b) in c.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rotations_are_orthogonal_and_multiplicative() {
        for (action, n) in [
            (KAction::PlaneRotation, 2usize),
            (KAction::BinaryRotation { degree: 4 }, 5),
            (KAction::BinaryRotation { degree: 3 }, 4),
        ] {
            for theta in [0.0, 0.3, 1.1, 2.7, -0.9] {
                let k = action.matrix(theta);
                let ktk = k.transpose().matmul(&k);
                let id = Mat::identity(n);
                assert!(ktk.sub(&id).max_abs() < 1e-12, "orthogonality at {theta}");
            }
            let a = action.matrix(0.4);
            let b = action.matrix(0.9);
            let ab = a.matmul(&b);
            let sum = action.matrix(1.3);
            assert!(ab.sub(&sum).max_abs() < 1e-10, "homomorphism property");
        }
    }

    #[test]
    fn rotation_conjugates_torus_into_the_symmetric_span() {
        // On the plane: R(t) H R(t)^T = cos(2t) H + sin(2t) E2.
        let rep = sl2_standard().unwrap();
        let k = rep.k_action().unwrap().matrix(0.35);
        let h = rep.p_basis().unwrap()[0].mat().clone();
        let e2 = rep.p_basis().unwrap()[1].mat().clone();
        let conj = k.matmul(&h).matmul(&k.transpose());
        let expect = h.scaled((0.7f64).cos()).add(&e2.scaled((0.7f64).sin()));
        assert!(conj.sub(&expect).max_abs() < 1e-12);
    }

    #[test]
    fn dual_moment_is_rotation_equivariant() {
        // mu(k x) must equal the conjugated-basis pairing of mu(x).
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for rep in [sl2_standard().unwrap(), sl2_binary_forms(4).unwrap()] {
            let n = rep.dim();
            let basis = rep.p_basis().unwrap().to_vec();
            let pg = rep.p_gram().unwrap().clone();
            for _ in 0..25 {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                if x.iter().map(|a| a * a).sum::<f64>() < 1e-2 {
                    continue;
                }
                let theta = rng.gen_range(0.0..std::f64::consts::TAU);
                let k = rep.k_action().unwrap().matrix(theta);
                let d = rep.moment_p_dual(&x).unwrap();
                // Element with trace pairings d, conjugated by k.
                let c = crate::linalg::solve_dense(&pg, &d).unwrap();
                let mut elt = Mat::zeros(n, n);
                for (cb, e) in c.iter().zip(&basis) {
                    elt = elt.add(&e.mat().scaled(*cb));
                }
                let conj = k.matmul(&elt).matmul(&k.transpose());
                let expected: Vec<f64> =
                    basis.iter().map(|e| frobenius_dot(e.mat(), &conj)).collect();
                let kx = k.matvec(&x);
                let got = rep.moment_p_dual(&kx).unwrap();
                for (a, b) in got.iter().zip(&expected) {
                    assert!((a - b).abs() < 1e-9, "equivariance defect {}", (a - b).abs());
                }
            }
        }
    }

    #[test]
    fn rotation_moves_the_plus_form_to_a_monomial() {
        // Rotating by -pi/4 sends (x+y)^4 to a multiple of a pure power,
        // the coordinate form of its instability.
        let rep = sl2_binary_forms(4).unwrap();
        let p = ProjPoint::new(form_coords(4, &[1.0, 4.0, 6.0, 4.0, 1.0])).unwrap();
        let k = rep.k_action().unwrap().matrix(-std::f64::consts::FRAC_PI_4);
        let moved = ProjPoint::new(k.matvec(p.coords())).unwrap();
        let mc = moved.coords();
        let off: f64 = mc[1..].iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(off < 1e-12, "image concentrates on one monomial line");
        assert!((mc[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_parameters_are_rejected() {
        assert!(matches!(torus_gl(0), Err(GalleryError::BadParams(_))));
        assert!(matches!(torus_sl(1), Err(GalleryError::BadParams(_))));
        assert!(matches!(sl2_binary_forms(11), Err(GalleryError::BadParams(_))));
        assert!(matches!(build("nope", &[]), Err(GalleryError::UnknownName(_))));
        assert!(matches!(build("sl2_standard", &[3]), Err(GalleryError::BadParams(_))));
        assert!(matches!(build("torus_gl", &[-2]), Err(GalleryError::BadParams(_))));
        assert!(build("sl2_binary_forms", &[4]).is_ok());
    }

    #[test]
    fn generators_commute_with_nothing_hidden() {
        // The SL(2) pair must not commute; the builder only requires the
        // abelian part to commute, and the p extension is unchecked here.
        let rep = sl2_standard().unwrap();
        let h = rep.p_basis().unwrap()[0].clone();
        let e2 = rep.p_basis().unwrap()[1].clone();
        assert!(crate::linalg::commutator_norm(&h, &e2) > 1.0);
        // Sanity: building a rep on the NON-commuting pair fails.
        let bad = build_representation(vec![
            SymMatrix::diagonal(&[1.0, -1.0]),
            SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(),
        ]);
        assert!(bad.is_err());
    }
}
