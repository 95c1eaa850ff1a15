//! Finitely generated cones and polytopes with certificates.
//!
//! All predicates run over a [`Scalar`] type: exact rationals decide
//! membership and faces exactly, floats decide them against the scalar's
//! feasibility tolerance. Every boolean answer carries a certificate - a
//! coefficient vector, a separating functional, or an exposing functional -
//! so callers can re-verify independently.
//!
//! The cone generated by `f_1, ..., f_n` is the set of nonnegative
//! combinations; its relative interior is the set of strictly positive
//! combinations. Duplicate generators are kept as distinct indices so that
//! weight multiplicity survives in face index sets.

mod simplex;

pub use simplex::{rank, solve_lp, solve_square, LpOutcome};

use crate::scalar::Scalar;
use thiserror::Error;

/// Most generators [`enumerate_faces`](GeneratedCone::enumerate_faces)
/// accepts before refusing: the search is exponential in the count.
pub const MAX_FACE_GENERATORS: usize = 20;

/// Relative duality-gap threshold at which the min-norm search stops in
/// float mode (exact mode stops at gap zero).
pub const MIN_NORM_GAP_TOL: f64 = 1e-12;

const MAX_WOLFE_ITERS: usize = 10_000;

#[derive(Debug, Error)]
pub enum ConvexError {
    #[error("generator list is empty")]
    EmptyGenerators,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("face enumeration supports at most {max} generators, got {n}")]
    TooManyGenerators { n: usize, max: usize },
    #[error("support is unbounded along the functional (positive pairing with a generator)")]
    UnboundedSupport,
    #[error("functional is zero")]
    ZeroFunctional,
}

/// Membership query flavor: the closed set, or its relative interior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MembershipMode {
    Closed,
    Relint,
}

/// Answer to a membership query, with whichever certificate applies.
#[derive(Debug, Clone)]
pub struct MembershipResult<T> {
    pub member: bool,
    /// Combination coefficients witnessing membership (all strictly
    /// positive in relint mode). Present on relint rejections too, where
    /// they witness the maximal-slack combination.
    pub coefficients: Option<Vec<T>>,
    /// For a closed-mode rejection: a functional `u` with `<u, y> > 0`
    /// and `<u, f_i> <= 0` for every generator. Queries lifted from a
    /// polytope return the affine version in one higher dimension.
    pub separating: Option<Vec<T>>,
    /// Maximized uniform slack from a relint query.
    pub slack: Option<T>,
}

/// A face of a generated cone or polytope.
///
/// `indices` lists the generators lying on the face (sorted, over the
/// original input indexing); `witness` is an exposing functional, zero for
/// the improper face; `dim` is the linear (cone) or affine (polytope)
/// dimension of the face.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceDescriptor<T> {
    pub indices: Vec<usize>,
    pub witness: Vec<T>,
    pub dim: usize,
}

impl<T> FaceDescriptor<T> {
    /// Face inclusion. For faces of one generating set this subset test
    /// is exactly the geometric partial order.
    pub fn contains(&self, other: &FaceDescriptor<T>) -> bool {
        other.indices.iter().all(|i| self.indices.binary_search(i).is_ok())
    }
}

/// Min-norm or closest-point result over a polytope.
#[derive(Debug, Clone)]
pub struct MinNormPoint<T> {
    /// The optimal point, inside the polytope.
    pub point: Vec<T>,
    /// Squared distance to the query point (the origin for min-norm).
    pub norm_sq: T,
    /// Barycentric coefficients over the full generator list.
    pub coefficients: Vec<T>,
}

impl<T: Scalar> MinNormPoint<T> {
    pub fn norm(&self) -> f64 {
        self.norm_sq.to_f64().sqrt()
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

fn check_gens<T>(gens: &[Vec<T>]) -> Result<usize, ConvexError> {
    let first = gens.first().ok_or(ConvexError::EmptyGenerators)?;
    let dim = first.len();
    for g in gens {
        if g.len() != dim {
            return Err(ConvexError::DimensionMismatch { expected: dim, got: g.len() });
        }
    }
    Ok(dim)
}

/// Cone of nonnegative combinations of the generators.
#[derive(Debug, Clone)]
pub struct GeneratedCone<T> {
    gens: Vec<Vec<T>>,
    dim: usize,
}

/// Convex hull of the generators.
#[derive(Debug, Clone)]
pub struct GeneratedPolytope<T> {
    gens: Vec<Vec<T>>,
    dim: usize,
}

// ── shared membership machinery ──────────────────────────────────────────

/// Feasibility of `sum_j lambda_j g_j = y, lambda >= 0`.
fn membership_closed<T: Scalar>(gens: &[Vec<T>], y: &[T]) -> MembershipResult<T> {
    let dim = gens[0].len();
    let n = gens.len();
    let mut a = vec![vec![T::zero(); n]; dim];
    for (j, g) in gens.iter().enumerate() {
        for (i, v) in g.iter().enumerate() {
            a[i][j] = v.clone();
        }
    }
    let c = vec![T::zero(); n];
    match solve_lp(&a, y, &c) {
        LpOutcome::Optimal { x, .. } => MembershipResult {
            member: true,
            coefficients: Some(x),
            separating: None,
            slack: None,
        },
        LpOutcome::Infeasible { farkas } => MembershipResult {
            member: false,
            coefficients: None,
            separating: Some(farkas),
            slack: None,
        },
        LpOutcome::Unbounded => unreachable!("feasibility problem has zero objective"),
    }
}

/// Maximize the uniform slack `eps` subject to
/// `sum_j (s_j + eps) g_j = y, s >= 0, eps <= 1`. Assumes closed
/// membership already holds, which forces the optimum `eps* >= 0`.
fn membership_relint<T: Scalar>(gens: &[Vec<T>], y: &[T]) -> MembershipResult<T> {
    let dim = gens[0].len();
    let n = gens.len();
    // Variables: s_0..s_{n-1}, eps+, eps-, cap slack w.
    let ncols = n + 3;
    let mut a = vec![vec![T::zero(); ncols]; dim + 1];
    for (j, g) in gens.iter().enumerate() {
        for (i, v) in g.iter().enumerate() {
            a[i][j] = v.clone();
        }
    }
    for i in 0..dim {
        let gsum = gens.iter().fold(T::zero(), |acc, g| acc + g[i].clone());
        a[i][n] = gsum.clone();
        a[i][n + 1] = -gsum;
    }
    a[dim][n] = T::one();
    a[dim][n + 1] = -T::one();
    a[dim][n + 2] = T::one();
    let mut b: Vec<T> = y.to_vec();
    b.push(T::one());
    let mut c = vec![T::zero(); ncols];
    c[n] = -T::one();
    c[n + 1] = T::one();
    match solve_lp(&a, &b, &c) {
        LpOutcome::Optimal { x, objective } => {
            let eps = -objective;
            let coeffs: Vec<T> = (0..n).map(|j| x[j].clone() + eps.clone()).collect();
            MembershipResult {
                member: eps.is_positive_tol(),
                coefficients: Some(coeffs),
                separating: None,
                slack: Some(eps),
            }
        }
        LpOutcome::Infeasible { .. } => {
            unreachable!("relint query runs only after closed membership holds")
        }
        LpOutcome::Unbounded => unreachable!("slack is capped"),
    }
}

fn membership_impl<T: Scalar>(
    gens: &[Vec<T>],
    y: &[T],
    mode: MembershipMode,
) -> MembershipResult<T> {
    let closed = membership_closed(gens, y);
    match mode {
        MembershipMode::Closed => closed,
        MembershipMode::Relint => {
            if !closed.member {
                return MembershipResult { slack: None, ..closed };
            }
            membership_relint(gens, y)
        }
    }
}

/// Feasibility of `<g_j, xi> <= -1` for all `j`; `None` exactly when the
/// origin lies in the convex hull of the generators (Gordan alternative).
fn separating_impl<T: Scalar>(gens: &[Vec<T>]) -> Option<Vec<T>> {
    let dim = gens[0].len();
    let n = gens.len();
    // Variables: xi+, xi- (dim each), slack t_j per generator.
    let ncols = 2 * dim + n;
    let mut a = vec![vec![T::zero(); ncols]; n];
    for (j, g) in gens.iter().enumerate() {
        for (i, v) in g.iter().enumerate() {
            a[j][i] = v.clone();
            a[j][dim + i] = -v.clone();
        }
        a[j][2 * dim + j] = T::one();
    }
    let b = vec![-T::one(); n];
    let c = vec![T::zero(); ncols];
    match solve_lp(&a, &b, &c) {
        LpOutcome::Optimal { x, .. } => {
            Some((0..dim).map(|i| x[i].clone() - x[dim + i].clone()).collect())
        }
        LpOutcome::Infeasible { .. } => None,
        LpOutcome::Unbounded => unreachable!("feasibility problem has zero objective"),
    }
}

/// Exposing-functional feasibility for a candidate proper face `j_set`.
/// Homogeneous (cone) version fixes the support value at zero; the
/// polytope version carries it as a free variable.
fn face_witness<T: Scalar>(
    gens: &[Vec<T>],
    on_face: &[bool],
    homogeneous: bool,
) -> Option<Vec<T>> {
    let dim = gens[0].len();
    let n = gens.len();
    let off_count = on_face.iter().filter(|&&b| !b).count();
    // Variables: u+, u- (dim each), then (h+, h-) unless homogeneous,
    // then one slack per off-face generator.
    let h_cols = if homogeneous { 0 } else { 2 };
    let ncols = 2 * dim + h_cols + off_count;
    let mut a = vec![vec![T::zero(); ncols]; n];
    let mut b = Vec::with_capacity(n);
    let mut slack = 0;
    for (j, g) in gens.iter().enumerate() {
        for (i, v) in g.iter().enumerate() {
            a[j][i] = v.clone();
            a[j][dim + i] = -v.clone();
        }
        if !homogeneous {
            a[j][2 * dim] = -T::one();
            a[j][2 * dim + 1] = T::one();
        }
        if on_face[j] {
            b.push(T::zero());
        } else {
            a[j][2 * dim + h_cols + slack] = T::one();
            slack += 1;
            b.push(-T::one());
        }
    }
    let c = vec![T::zero(); ncols];
    match solve_lp(&a, &b, &c) {
        LpOutcome::Optimal { x, .. } => {
            Some((0..dim).map(|i| x[i].clone() - x[dim + i].clone()).collect())
        }
        LpOutcome::Infeasible { .. } => None,
        LpOutcome::Unbounded => unreachable!("feasibility problem has zero objective"),
    }
}

fn cone_face_dim<T: Scalar>(gens: &[Vec<T>], indices: &[usize]) -> usize {
    let rows: Vec<Vec<T>> = indices.iter().map(|&j| gens[j].clone()).collect();
    rank(&rows)
}

fn polytope_face_dim<T: Scalar>(gens: &[Vec<T>], indices: &[usize]) -> usize {
    if indices.len() <= 1 {
        return 0;
    }
    let base = &gens[indices[0]];
    let rows: Vec<Vec<T>> = indices[1..]
        .iter()
        .map(|&j| gens[j].iter().zip(base).map(|(a, b)| a.clone() - b.clone()).collect())
        .collect();
    rank(&rows)
}

/// Brute-force face enumeration shared by both set types. `include_empty`
/// admits the empty index set as a candidate (the apex of a cone).
fn enumerate_faces_impl<T: Scalar>(
    gens: &[Vec<T>],
    homogeneous: bool,
) -> Result<Vec<FaceDescriptor<T>>, ConvexError> {
    let n = gens.len();
    if n > MAX_FACE_GENERATORS {
        return Err(ConvexError::TooManyGenerators { n, max: MAX_FACE_GENERATORS });
    }
    let dim_ambient = gens[0].len();
    let mut faces = Vec::new();
    let full_mask: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    for mask in 0..full_mask {
        // The empty set is a candidate apex for cones only.
        if mask == 0 && !homogeneous {
            continue;
        }
        let on_face: Vec<bool> = (0..n).map(|j| mask & (1 << j) != 0).collect();
        if let Some(u) = face_witness(gens, &on_face, homogeneous) {
            let indices: Vec<usize> = (0..n).filter(|&j| on_face[j]).collect();
            let dim = if homogeneous {
                cone_face_dim(gens, &indices)
            } else {
                polytope_face_dim(gens, &indices)
            };
            faces.push(FaceDescriptor { indices, witness: u, dim });
        }
    }
    // The improper face: the whole set, exposed by the zero functional.
    let all: Vec<usize> = (0..n).collect();
    let dim = if homogeneous {
        cone_face_dim(gens, &all)
    } else {
        polytope_face_dim(gens, &all)
    };
    faces.push(FaceDescriptor { indices: all, witness: vec![T::zero(); dim_ambient], dim });
    faces.sort_by(|a, b| {
        a.indices.len().cmp(&b.indices.len()).then_with(|| a.indices.cmp(&b.indices))
    });
    Ok(faces)
}

fn exposed_face_impl<T: Scalar>(
    gens: &[Vec<T>],
    u: &[T],
    homogeneous: bool,
) -> Result<FaceDescriptor<T>, ConvexError> {
    let dim_ambient = gens[0].len();
    if u.len() != dim_ambient {
        return Err(ConvexError::DimensionMismatch { expected: dim_ambient, got: u.len() });
    }
    if u.iter().all(|v| v.is_zero()) {
        return Err(ConvexError::ZeroFunctional);
    }
    let vals: Vec<T> = gens.iter().map(|g| dot(g, u)).collect();
    let scale = vals.iter().map(|v| v.abs()).fold(T::one(), |a, b| if b > a { b } else { a });
    let tol = T::feas_tol() * scale;
    let sup = if homogeneous {
        // The support value over a cone is 0 when finite.
        let max = vals.iter().cloned().fold(vals[0].clone(), |a, b| if b > a { b } else { a });
        if max > tol {
            return Err(ConvexError::UnboundedSupport);
        }
        T::zero()
    } else {
        vals.iter().cloned().fold(vals[0].clone(), |a, b| if b > a { b } else { a })
    };
    let indices: Vec<usize> = (0..gens.len())
        .filter(|&j| {
            let gap = sup.clone() - vals[j].clone();
            !(gap > tol)
        })
        .collect();
    let dim = if homogeneous {
        cone_face_dim(gens, &indices)
    } else {
        polytope_face_dim(gens, &indices)
    };
    Ok(FaceDescriptor { indices, witness: u.to_vec(), dim })
}

// ── cones ────────────────────────────────────────────────────────────────

impl<T: Scalar> GeneratedCone<T> {
    /// The zero cone is represented by a single zero generator.
    pub fn new(gens: Vec<Vec<T>>) -> Result<Self, ConvexError> {
        let dim = check_gens(&gens)?;
        Ok(GeneratedCone { gens, dim })
    }

    pub fn generators(&self) -> &[Vec<T>] {
        &self.gens
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// Membership of `y`, in the closed cone or its relative interior.
    /// The relint certificate maximizes the uniform coefficient slack.
    pub fn membership(
        &self,
        y: &[T],
        mode: MembershipMode,
    ) -> Result<MembershipResult<T>, ConvexError> {
        if y.len() != self.dim {
            return Err(ConvexError::DimensionMismatch { expected: self.dim, got: y.len() });
        }
        Ok(membership_impl(&self.gens, y, mode))
    }

    /// Whether the origin is a strictly positive combination of the
    /// generators. Downstream this decides closedness of torus orbits.
    pub fn zero_in_relint(&self) -> bool {
        let origin = vec![T::zero(); self.dim];
        membership_impl(&self.gens, &origin, MembershipMode::Relint).member
    }

    /// A functional pairing `<= -1` with every generator, when one exists.
    /// `None` exactly when the origin lies in the generators' convex hull.
    pub fn separating_functional(&self) -> Option<Vec<T>> {
        separating_impl(&self.gens)
    }

    /// All faces, each with an LP-verified exposing functional, sorted by
    /// (generator count, index set). Includes the improper face; includes
    /// the apex exactly when some functional is strictly negative on all
    /// generators.
    pub fn enumerate_faces(&self) -> Result<Vec<FaceDescriptor<T>>, ConvexError> {
        enumerate_faces_impl(&self.gens, true)
    }

    /// The face exposed by `u`, which must support the cone: every pairing
    /// `<g_j, u>` must be nonpositive, else the support is unbounded.
    pub fn exposed_face(&self, u: &[T]) -> Result<FaceDescriptor<T>, ConvexError> {
        exposed_face_impl(&self.gens, u, true)
    }
}

// ── polytopes ────────────────────────────────────────────────────────────

impl<T: Scalar> GeneratedPolytope<T> {
    pub fn new(gens: Vec<Vec<T>>) -> Result<Self, ConvexError> {
        let dim = check_gens(&gens)?;
        Ok(GeneratedPolytope { gens, dim })
    }

    pub fn generators(&self) -> &[Vec<T>] {
        &self.gens
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// Membership of `y` in the hull (or its relative interior), decided
    /// on the homogenization: barycentric weights are cone coefficients of
    /// the lifted generators `(g_j, 1)`.
    pub fn membership(
        &self,
        y: &[T],
        mode: MembershipMode,
    ) -> Result<MembershipResult<T>, ConvexError> {
        if y.len() != self.dim {
            return Err(ConvexError::DimensionMismatch { expected: self.dim, got: y.len() });
        }
        let lifted: Vec<Vec<T>> = self
            .gens
            .iter()
            .map(|g| {
                let mut v = g.clone();
                v.push(T::one());
                v
            })
            .collect();
        let mut ylift = y.to_vec();
        ylift.push(T::one());
        Ok(membership_impl(&lifted, &ylift, mode))
    }

    /// All faces with LP-verified exposing functionals, sorted by
    /// (generator count, index set); the empty set is not a face here.
    pub fn enumerate_faces(&self) -> Result<Vec<FaceDescriptor<T>>, ConvexError> {
        enumerate_faces_impl(&self.gens, false)
    }

    pub fn exposed_face(&self, u: &[T]) -> Result<FaceDescriptor<T>, ConvexError> {
        exposed_face_impl(&self.gens, u, false)
    }

    /// Min-norm point of the hull.
    pub fn min_norm_point(&self) -> MinNormPoint<T> {
        self.closest_point(&vec![T::zero(); self.dim])
    }

    /// Closest point of the hull to `y`, by Wolfe's min-norm-point
    /// algorithm on the shifted generators. Exact in exact mode.
    pub fn closest_point(&self, y: &[T]) -> MinNormPoint<T> {
        let shifted: Vec<Vec<T>> =
            self.gens.iter().map(|g| g.iter().zip(y).map(|(a, b)| a.clone() - b.clone()).collect()).collect();
        let (coeffs, _zshift, norm_sq) = wolfe_min_norm(&shifted);
        let mut point = y.to_vec();
        for (j, w) in coeffs.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for i in 0..self.dim {
                point[i] = point[i].clone() + w.clone() * (self.gens[j][i].clone() - y[i].clone());
            }
        }
        MinNormPoint { point, norm_sq, coefficients: coeffs }
    }
}

/// Wolfe's min-norm-point algorithm over the hull of `pts`.
/// Returns (barycentric coefficients, optimal point, squared norm).
fn wolfe_min_norm<T: Scalar>(pts: &[Vec<T>]) -> (Vec<T>, Vec<T>, T) {
    let n = pts.len();
    let dim = pts[0].len();
    let sq: Vec<T> = pts.iter().map(|p| dot(p, p)).collect();
    let scale = sq.iter().fold(T::one(), |a, b| if *b > a { b.clone() } else { a });
    // 1e-12, zero in exact mode; see MIN_NORM_GAP_TOL.
    let tiny = if T::EXACT { T::zero() } else { T::from_ratio(1, 1_000_000_000_000) };
    let gap_tol = tiny.clone() * scale;
    let drop_tol = tiny;

    // Start from the generator of least norm (first such index).
    let mut start = 0;
    for j in 1..n {
        if sq[j] < sq[start] {
            start = j;
        }
    }
    let mut support: Vec<usize> = vec![start];
    let mut weights: Vec<T> = vec![T::one()];

    let current = |support: &[usize], weights: &[T]| -> Vec<T> {
        let mut x = vec![T::zero(); dim];
        for (k, &j) in support.iter().enumerate() {
            for i in 0..dim {
                x[i] = x[i].clone() + weights[k].clone() * pts[j][i].clone();
            }
        }
        x
    };

    for _ in 0..MAX_WOLFE_ITERS {
        let x = current(&support, &weights);
        let xx = dot(&x, &x);
        // Most violated vertex (Bland-like: strict improvement, first index).
        let mut best = 0;
        let mut best_val = dot(&x, &pts[0]);
        for j in 1..n {
            let v = dot(&x, &pts[j]);
            if v < best_val {
                best_val = v;
                best = j;
            }
        }
        let gap = xx.clone() - best_val;
        if !(gap > gap_tol) || support.contains(&best) {
            break;
        }
        support.push(best);
        weights.push(T::zero());

        // Minor cycles: project onto the affine hull of the support,
        // walking back to the boundary whenever a weight would go negative.
        loop {
            let k = support.len();
            let mut sys = vec![vec![T::zero(); k + 1]; k + 1];
            let mut rhs = vec![T::zero(); k + 1];
            rhs[0] = T::one();
            for i in 0..k {
                sys[0][i + 1] = T::one();
                sys[i + 1][0] = T::one();
                for j in 0..k {
                    sys[i + 1][j + 1] = dot(&pts[support[i]], &pts[support[j]]);
                }
            }
            let sol = solve_square(&sys, &rhs);
            let y: Vec<T> = match sol {
                Some(s) => s[1..].to_vec(),
                None => {
                    // Affinely dependent support: drop the newest point.
                    support.pop();
                    weights.pop();
                    break;
                }
            };
            if y.iter().all(|w| *w > drop_tol) {
                weights = y;
                break;
            }
            // Largest step keeping all weights nonnegative.
            let mut theta: Option<T> = None;
            for i in 0..k {
                if y[i] <= drop_tol {
                    let denom = weights[i].clone() - y[i].clone();
                    if denom.is_zero() {
                        continue;
                    }
                    let t = weights[i].clone() / denom;
                    theta = match theta {
                        None => Some(t),
                        Some(b) => Some(if t < b { t } else { b }),
                    };
                }
            }
            let theta = theta.unwrap_or_else(T::zero);
            for i in 0..k {
                let step = theta.clone() * (y[i].clone() - weights[i].clone());
                weights[i] = weights[i].clone() + step;
            }
            // Remove zeroed points, keeping at least one.
            let mut idx = 0;
            while idx < support.len() && support.len() > 1 {
                if !(weights[idx] > drop_tol) {
                    support.remove(idx);
                    weights.remove(idx);
                } else {
                    idx += 1;
                }
            }
            // Renormalize float drift in the barycentric sum.
            if !T::EXACT {
                let s = weights.iter().fold(T::zero(), |a, b| a + b.clone());
                if !s.is_zero() {
                    for w in &mut weights {
                        *w = w.clone() / s.clone();
                    }
                }
            }
        }
    }

    let x = current(&support, &weights);
    let norm_sq = dot(&x, &x);
    let mut coeffs = vec![T::zero(); n];
    for (k, &j) in support.iter().enumerate() {
        coeffs[j] = coeffs[j].clone() + weights[k].clone();
    }
    (coeffs, x, norm_sq)
}

#[cfg(test)]
mod tests;
