//! Stability analysis over the weight data of a representation.
//!
//! Classifies points by where the origin sits relative to their support
//! cone or polytope, producing checkable certificates in every branch:
//! interior combination coefficients for closed orbits, a separating
//! functional (a one-parameter subgroup driving the point to zero) for the
//! null cone, the face of the cone holding the origin for the boundary
//! class, and a balancing group element for polystable projective points.
//! Also splits the null cone into maximal coordinate subspaces, tabulates
//! the face-to-limit-orbit correspondence, searches for destabilizing
//! noncompact directions, and samples the dual image of a full group orbit.

use std::collections::{HashMap, HashSet};
use std::f64::consts::TAU;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::convexgeom::{
    rank, solve_lp, ConvexError, FaceDescriptor, GeneratedCone, GeneratedPolytope,
    LpOutcome, MembershipMode, MAX_FACE_GENERATORS,
};
use crate::flows::{self, FlowError, FlowOpts};
use crate::linalg::{dot, eigh_symmetric, norm, solve_dense, LinalgError, SymMatrix};
use crate::repmodel::{
    KnVariant, ProjPoint, RepError, Representation, Support, SUPPORT_TOL,
};
use crate::scalar::Scalar;
use crate::Exact;

/// Eigenvalue clustering tolerance when reading level data off a
/// noncompact direction.
pub const EIG_LEVEL_TOL: f64 = 1e-9;

/// Random starting directions tried by the destabilization sphere search.
pub const DESTAB_SPHERE_SEEDS: usize = 256;

/// Local descent steps spent on each sphere seed.
pub const DESTAB_DESCENT_STEPS: usize = 100;

/// A maximal weight this far below zero certifies destabilization.
pub const DESTAB_ACCEPT_TOL: f64 = 1e-8;

/// Radius of the ball of abelian coordinates sampled by `khull_sample`.
pub const KHULL_A_RADIUS: f64 = 3.0;

/// Tolerance for the dual-cloud projection check in `khull_sample`.
pub const KHULL_PROJECTION_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum StabilityError {
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Convex(#[from] ConvexError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("point is not in the null cone, no direction drives it to zero")]
    NotInNullCone,
    #[error("requested face is not in the support cone's face lattice")]
    UnknownFace,
    #[error("direction is zero")]
    ZeroDirection,
    #[error("representation carries no noncompact generator family")]
    MissingPData,
    #[error("representation carries no rotation action")]
    MissingKAction,
    #[error("exact weight data is unavailable for this representation")]
    ExactWeightsUnavailable,
}

// ── classes and certificates ─────────────────────────────────────────────

/// Arithmetic backing the polyhedral decisions of a classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Arithmetic {
    #[default]
    Float,
    Exact,
}

/// Verdict for a vector orbit: closed, collapsing to zero, or neither.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearClass {
    ClosedOrbit,
    NullCone,
    NonclosedNonnull,
}

/// Verdict for a projective point under the abelian data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectiveClass {
    Stable,
    PolystableNotStable,
    SemistableNotPolystable,
    Unstable,
}

/// Combined classification tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityClass {
    Linear(LinearClass),
    Projective(ProjectiveClass),
}

impl StabilityClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            StabilityClass::Linear(LinearClass::ClosedOrbit) => "closed_orbit",
            StabilityClass::Linear(LinearClass::NullCone) => "null_cone",
            StabilityClass::Linear(LinearClass::NonclosedNonnull) => "nonclosed_nonnull",
            StabilityClass::Projective(ProjectiveClass::Stable) => "stable",
            StabilityClass::Projective(ProjectiveClass::PolystableNotStable) => {
                "polystable_not_stable"
            }
            StabilityClass::Projective(ProjectiveClass::SemistableNotPolystable) => {
                "semistable_not_polystable"
            }
            StabilityClass::Projective(ProjectiveClass::Unstable) => "unstable",
        }
    }
}

/// Classification of one point, with whichever certificates apply.
///
/// `zero_coefficients` expresses the origin over the support weights
/// (strictly positive entries when the class demanded relative interior);
/// `destabilizing_xi` satisfies a pairing `<= -1` with every support
/// weight in the linear null-cone case and is unit-normalized with
/// `lambda < 0` in the projective unstable case; `zero_face` is the face
/// of the support cone whose relative interior holds the origin;
/// `balancing_xi` moves a polystable point onto the zero of the abelian
/// gradient map, with the residual gradient norm recorded.
#[derive(Debug, Clone)]
pub struct PointAnalysis {
    pub support: Support,
    pub class: StabilityClass,
    pub arithmetic: Arithmetic,
    pub zero_coefficients: Option<Vec<f64>>,
    pub zero_slack: Option<f64>,
    pub destabilizing_xi: Option<Vec<f64>>,
    pub lambda: Option<f64>,
    pub zero_face: Option<FaceDescriptor<f64>>,
    pub balancing_xi: Option<Vec<f64>>,
    pub balancing_residual: Option<f64>,
    pub stabilizer_dim: Option<usize>,
}

fn to_f64_vec<T: Scalar>(v: &[T]) -> Vec<f64> {
    v.iter().map(Scalar::to_f64).collect()
}

fn float_rows(rep: &Representation, indices: &[usize]) -> Vec<Vec<f64>> {
    indices.iter().map(|&i| rep.weights()[i].clone()).collect()
}

fn exact_rows(
    rep: &Representation,
    indices: &[usize],
) -> Result<Vec<Vec<Exact>>, StabilityError> {
    let w = rep.exact_weights().ok_or(StabilityError::ExactWeightsUnavailable)?;
    Ok(indices.iter().map(|&i| w[i].clone()).collect())
}

// ── linear classification ────────────────────────────────────────────────

struct LinearCore<T> {
    class: LinearClass,
    zero_coefficients: Option<Vec<T>>,
    zero_slack: Option<T>,
    separating: Option<Vec<T>>,
    zero_face: Option<FaceDescriptor<T>>,
    weight_rank: usize,
}

/// Feasibility witness for the lineality face: a functional vanishing on
/// the rows indexed by `face` and pairing `<= -1` with every other row.
/// Found by phase-one simplex over the split `u = u+ - u-` with slacks.
fn lineality_witness<T: Scalar>(rows: &[Vec<T>], face: &[usize]) -> Option<Vec<T>> {
    let m = rows[0].len();
    let outside: Vec<usize> =
        (0..rows.len()).filter(|i| !face.contains(i)).collect();
    let ncols = 2 * m + outside.len();
    let mut a: Vec<Vec<T>> = Vec::with_capacity(rows.len());
    let mut b: Vec<T> = Vec::with_capacity(rows.len());
    for (pos, i) in face.iter().chain(outside.iter()).enumerate() {
        let mut row = vec![T::zero(); ncols];
        for j in 0..m {
            row[j] = rows[*i][j].clone();
            row[m + j] = -rows[*i][j].clone();
        }
        if pos >= face.len() {
            row[2 * m + (pos - face.len())] = T::one();
            b.push(-T::one());
        } else {
            b.push(T::zero());
        }
        a.push(row);
    }
    let c = vec![T::zero(); ncols];
    match solve_lp(&a, &b, &c) {
        LpOutcome::Optimal { x, .. } => {
            Some((0..m).map(|j| x[j].clone() - x[m + j].clone()).collect())
        }
        _ => None,
    }
}

fn classify_linear_core<T: Scalar>(rows: &[Vec<T>]) -> Result<LinearCore<T>, StabilityError> {
    let m = rows[0].len();
    let weight_rank = rank(rows);
    let cone = GeneratedCone::new(rows.to_vec())?;
    let origin = vec![T::zero(); m];
    let rel = cone.membership(&origin, MembershipMode::Relint)?;
    if rel.member {
        return Ok(LinearCore {
            class: LinearClass::ClosedOrbit,
            zero_coefficients: rel.coefficients,
            zero_slack: rel.slack,
            separating: None,
            zero_face: None,
            weight_rank,
        });
    }
    if let Some(xi) = cone.separating_functional() {
        return Ok(LinearCore {
            class: LinearClass::NullCone,
            zero_coefficients: None,
            zero_slack: None,
            separating: Some(xi),
            zero_face: None,
            weight_rank,
        });
    }
    // The origin sits on a proper face of the cone: its minimal face is
    // the lineality part, the rows whose negatives stay inside.
    let mut face: Vec<usize> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let neg: Vec<T> = r.iter().map(|v| -v.clone()).collect();
        if cone.membership(&neg, MembershipMode::Closed)?.member {
            face.push(i);
        }
    }
    let witness =
        lineality_witness(rows, &face).unwrap_or_else(|| vec![T::zero(); m]);
    let face_rows: Vec<Vec<T>> = face.iter().map(|&i| rows[i].clone()).collect();
    let dim = rank(&face_rows);
    Ok(LinearCore {
        class: LinearClass::NonclosedNonnull,
        zero_coefficients: None,
        zero_slack: None,
        separating: None,
        zero_face: Some(FaceDescriptor { indices: face, witness, dim }),
        weight_rank,
    })
}

/// Classifies the orbit closure of a vector: `closed_orbit` when the
/// origin is interior to the support cone (or the vector is zero),
/// `null_cone` when a functional separates it, the boundary class
/// otherwise. Certificates are produced in the requested arithmetic and
/// stored as floats.
pub fn classify_point_linear(
    rep: &Representation,
    x: &[f64],
    arithmetic: Arithmetic,
) -> Result<PointAnalysis, StabilityError> {
    let m = rep.abelian_dim();
    let support = rep.support_of(x, SUPPORT_TOL)?;
    if support.is_empty() {
        return Ok(PointAnalysis {
            support,
            class: StabilityClass::Linear(LinearClass::ClosedOrbit),
            arithmetic,
            zero_coefficients: None,
            zero_slack: None,
            destabilizing_xi: None,
            lambda: None,
            zero_face: None,
            balancing_xi: None,
            balancing_residual: None,
            stabilizer_dim: Some(m),
        });
    }
    let core = match arithmetic {
        Arithmetic::Float => classify_linear_core(&float_rows(rep, &support.indices))?,
        Arithmetic::Exact => {
            let core = classify_linear_core(&exact_rows(rep, &support.indices)?)?;
            LinearCore {
                class: core.class,
                zero_coefficients: core.zero_coefficients.as_deref().map(to_f64_vec),
                zero_slack: core.zero_slack.map(|s| s.to_f64()),
                separating: core.separating.as_deref().map(to_f64_vec),
                zero_face: core.zero_face.map(|f| FaceDescriptor {
                    indices: f.indices,
                    witness: to_f64_vec(&f.witness),
                    dim: f.dim,
                }),
                weight_rank: core.weight_rank,
            }
        }
    };
    // Re-index the lineality face to the ambient eigenbasis numbering.
    let zero_face = core.zero_face.map(|f| FaceDescriptor {
        indices: f.indices.iter().map(|&pos| support.indices[pos]).collect(),
        witness: f.witness,
        dim: f.dim,
    });
    Ok(PointAnalysis {
        class: StabilityClass::Linear(core.class),
        arithmetic,
        zero_coefficients: core.zero_coefficients,
        zero_slack: core.zero_slack,
        destabilizing_xi: core.separating,
        lambda: None,
        zero_face,
        balancing_xi: None,
        balancing_residual: None,
        stabilizer_dim: Some(m - core.weight_rank),
        support,
    })
}

// ── projective classification ────────────────────────────────────────────

struct ProjectiveCore<T> {
    class: ProjectiveClass,
    zero_coefficients: Option<Vec<T>>,
    zero_slack: Option<T>,
    separating: Option<Vec<T>>,
    weight_rank: usize,
}

fn classify_projective_core<T: Scalar>(
    rows: &[Vec<T>],
) -> Result<ProjectiveCore<T>, StabilityError> {
    let m = rows[0].len();
    let weight_rank = rank(rows);
    let poly = GeneratedPolytope::new(rows.to_vec())?;
    let origin = vec![T::zero(); m];
    let rel = poly.membership(&origin, MembershipMode::Relint)?;
    if rel.member {
        let class = if weight_rank == m {
            ProjectiveClass::Stable
        } else {
            ProjectiveClass::PolystableNotStable
        };
        return Ok(ProjectiveCore {
            class,
            zero_coefficients: rel.coefficients,
            zero_slack: rel.slack,
            separating: None,
            weight_rank,
        });
    }
    let closed = poly.membership(&origin, MembershipMode::Closed)?;
    if closed.member {
        return Ok(ProjectiveCore {
            class: ProjectiveClass::SemistableNotPolystable,
            zero_coefficients: closed.coefficients,
            zero_slack: None,
            separating: None,
            weight_rank,
        });
    }
    // Outside the hull a uniformly negative functional exists; a float
    // boundary disagreement between the two solves falls back to the
    // semistable verdict rather than emitting an unverified certificate.
    match GeneratedCone::new(rows.to_vec())?.separating_functional() {
        Some(xi) => Ok(ProjectiveCore {
            class: ProjectiveClass::Unstable,
            zero_coefficients: None,
            zero_slack: None,
            separating: Some(xi),
            weight_rank,
        }),
        None => Ok(ProjectiveCore {
            class: ProjectiveClass::SemistableNotPolystable,
            zero_coefficients: None,
            zero_slack: None,
            separating: None,
            weight_rank,
        }),
    }
}

/// Classifies a projective point against its weight polytope: unstable
/// when the origin is outside (with a unit certificate direction and its
/// maximal weight), semistable on the boundary, polystable inside, stable
/// when additionally the support weights span. Polystable points get a
/// constructive balancing certificate from the gradient-map inversion.
pub fn classify_point_projective(
    rep: &Representation,
    p: &ProjPoint,
    arithmetic: Arithmetic,
) -> Result<PointAnalysis, StabilityError> {
    let m = rep.abelian_dim();
    let support = rep.support_of(p.coords(), SUPPORT_TOL)?;
    let core = match arithmetic {
        Arithmetic::Float => classify_projective_core(&float_rows(rep, &support.indices))?,
        Arithmetic::Exact => {
            let core = classify_projective_core(&exact_rows(rep, &support.indices)?)?;
            ProjectiveCore {
                class: core.class,
                zero_coefficients: core.zero_coefficients.as_deref().map(to_f64_vec),
                zero_slack: core.zero_slack.map(|s| s.to_f64()),
                separating: core.separating.as_deref().map(to_f64_vec),
                weight_rank: core.weight_rank,
            }
        }
    };
    let mut analysis = PointAnalysis {
        class: StabilityClass::Projective(core.class),
        arithmetic,
        zero_coefficients: core.zero_coefficients,
        zero_slack: core.zero_slack,
        destabilizing_xi: None,
        lambda: None,
        zero_face: None,
        balancing_xi: None,
        balancing_residual: None,
        stabilizer_dim: Some(m - core.weight_rank),
        support,
    };
    match core.class {
        ProjectiveClass::Stable | ProjectiveClass::PolystableNotStable => {
            let target = vec![0.0; m];
            let result =
                flows::invert_moment(rep, p.coords(), &target, KnVariant::Projective, 1e-8);
            let newton = match result {
                Ok(n) => n,
                Err(FlowError::MaxIterations { best }) => best,
                Err(e) => return Err(e.into()),
            };
            analysis.balancing_residual = Some(newton.residual);
            analysis.balancing_xi = Some(newton.xi);
        }
        ProjectiveClass::Unstable => {
            if let Some(raw) = core.separating {
                let s = norm(&raw);
                let unit: Vec<f64> = raw.iter().map(|v| v / s).collect();
                let lambda = analysis
                    .support
                    .indices
                    .iter()
                    .map(|&i| dot(&rep.weights()[i], &unit))
                    .fold(f64::NEG_INFINITY, f64::max);
                analysis.destabilizing_xi = Some(unit);
                analysis.lambda = Some(lambda);
            }
        }
        ProjectiveClass::SemistableNotPolystable => {}
    }
    Ok(analysis)
}

// ── maximal weight ───────────────────────────────────────────────────────

/// A direction to measure growth against: abelian coordinates, or a
/// symmetric element given by its matrix.
#[derive(Debug, Clone)]
pub enum MaxWeightDirection<'a> {
    Abelian(&'a [f64]),
    PElement(&'a SymMatrix),
}

/// The asymptotic exponential rate of `exp(t xi) p`: the largest
/// eigenvalue of the direction whose eigenspace sees a nonzero component
/// of the point. Abelian directions read the rate off the support weights
/// directly; general symmetric elements are eigendecomposed.
pub fn maximal_weight(
    rep: &Representation,
    p: &ProjPoint,
    dir: MaxWeightDirection,
) -> Result<f64, StabilityError> {
    match dir {
        MaxWeightDirection::Abelian(xi) => {
            if norm(xi) == 0.0 {
                return Err(StabilityError::ZeroDirection);
            }
            if xi.len() != rep.abelian_dim() {
                return Err(RepError::DimensionMismatch {
                    expected: rep.abelian_dim(),
                    got: xi.len(),
                }
                .into());
            }
            let supp = rep.support_of(p.coords(), SUPPORT_TOL)?;
            Ok(supp
                .indices
                .iter()
                .map(|&i| dot(&rep.weights()[i], xi))
                .fold(f64::NEG_INFINITY, f64::max))
        }
        MaxWeightDirection::PElement(s) => {
            if s.frobenius() == 0.0 {
                return Err(StabilityError::ZeroDirection);
            }
            if s.n() != rep.dim() {
                return Err(RepError::DimensionMismatch {
                    expected: rep.dim(),
                    got: s.n(),
                }
                .into());
            }
            let eig = eigh_symmetric(s, EIG_LEVEL_TOL);
            let comps = eig.vectors.tr_matvec(p.coords());
            for cluster in &eig.clusters {
                let mass: f64 = cluster.iter().map(|&j| comps[j] * comps[j]).sum();
                if mass.sqrt() > SUPPORT_TOL {
                    return Ok(eig.values[cluster[0]]);
                }
            }
            // A unit point always has full mass somewhere; unreachable
            // short of a broken eigendecomposition.
            Err(StabilityError::ZeroDirection)
        }
    }
}

// ── degeneration witnesses ───────────────────────────────────────────────

/// Degeneration target: the origin, or a face of the support cone named
/// by the ambient eigenbasis indices of its generators.
#[derive(Debug, Clone)]
pub enum WitnessTarget {
    Zero,
    Face(Vec<usize>),
}

/// A verified one-parameter degeneration `lim exp(t xi) a x`.
#[derive(Debug, Clone)]
pub struct Witness {
    /// Abelian coordinates of the group element, zero meaning identity.
    pub a: Vec<f64>,
    pub xi: Vec<f64>,
    pub predicted_limit: Vec<f64>,
    /// Distance between the predicted limit and the numerically
    /// integrated point at t = 40.
    pub limit_error: f64,
}

/// Produces the direction degenerating `x` onto the requested target and
/// numerically confirms the limit: the separating functional for the
/// origin, the face's exposing functional otherwise. The limit onto a
/// face keeps exactly the coordinates indexed by the face.
pub fn hm_witness(
    rep: &Representation,
    x: &[f64],
    target: WitnessTarget,
) -> Result<Witness, StabilityError> {
    let m = rep.abelian_dim();
    let supp = rep.support_of(x, SUPPORT_TOL)?;
    if supp.is_empty() {
        return Err(match target {
            WitnessTarget::Zero => StabilityError::NotInNullCone,
            WitnessTarget::Face(_) => StabilityError::UnknownFace,
        });
    }
    let rows = float_rows(rep, &supp.indices);
    let cone = GeneratedCone::new(rows)?;
    let (xi, predicted) = match target {
        WitnessTarget::Zero => {
            let xi = cone.separating_functional().ok_or(StabilityError::NotInNullCone)?;
            (xi, vec![0.0; rep.dim()])
        }
        WitnessTarget::Face(mut indices) => {
            indices.sort_unstable();
            indices.dedup();
            let mut positions = Vec::with_capacity(indices.len());
            for i in &indices {
                match supp.indices.binary_search(i) {
                    Ok(pos) => positions.push(pos),
                    Err(_) => return Err(StabilityError::UnknownFace),
                }
            }
            let faces = cone.enumerate_faces()?;
            let face = faces
                .into_iter()
                .find(|f| f.indices == positions)
                .ok_or(StabilityError::UnknownFace)?;
            let predicted = rep.component_restriction(x, &indices)?;
            (face.witness, predicted)
        }
    };
    debug_assert_eq!(xi.len(), m);
    let z = rep.act(&xi, 40.0, x)?;
    let limit_error = z
        .iter()
        .zip(&predicted)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(Witness { a: vec![0.0; m], xi, predicted_limit: predicted, limit_error })
}

// ── face-to-orbit tables ─────────────────────────────────────────────────

/// One face of the support cone or polytope with the orbit limit data
/// attached to it.
#[derive(Debug, Clone)]
pub struct FaceOrbitRow {
    /// Face with indices renumbered to the ambient eigenbasis.
    pub face: FaceDescriptor<f64>,
    /// The limit vector keeping exactly the face's coordinates.
    pub limit: Vec<f64>,
    /// Gradient-map value of the limit.
    pub moment: Vec<f64>,
    /// Whether the moment passed relative-interior membership over the
    /// face's own generators.
    pub relint_ok: bool,
}

fn reindexed(face: &FaceDescriptor<f64>, supp: &Support) -> FaceDescriptor<f64> {
    FaceDescriptor {
        indices: face.indices.iter().map(|&pos| supp.indices[pos]).collect(),
        witness: face.witness.clone(),
        dim: face.dim,
    }
}

/// Tabulates every face of the support cone with its limit vector and the
/// limit's gradient-map value, re-verifying that the value lands in the
/// face's relative interior. The zero vector gets the single apex row.
pub fn face_orbit_table(
    rep: &Representation,
    x: &[f64],
) -> Result<Vec<FaceOrbitRow>, StabilityError> {
    let m = rep.abelian_dim();
    let supp = rep.support_of(x, SUPPORT_TOL)?;
    if supp.is_empty() {
        return Ok(vec![FaceOrbitRow {
            face: FaceDescriptor { indices: vec![], witness: vec![0.0; m], dim: 0 },
            limit: vec![0.0; rep.dim()],
            moment: vec![0.0; m],
            relint_ok: true,
        }]);
    }
    let rows = float_rows(rep, &supp.indices);
    let cone = GeneratedCone::new(rows.clone())?;
    let mut out = Vec::new();
    for face in cone.enumerate_faces()? {
        let global: Vec<usize> =
            face.indices.iter().map(|&pos| supp.indices[pos]).collect();
        let limit = rep.component_restriction(x, &global)?;
        let moment = rep.moment(&limit)?;
        let relint_ok = if face.indices.is_empty() {
            norm(&moment) <= 1e-9
        } else {
            let sub: Vec<Vec<f64>> =
                face.indices.iter().map(|&pos| rows[pos].clone()).collect();
            GeneratedCone::new(sub)?
                .membership(&moment, MembershipMode::Relint)?
                .member
        };
        out.push(FaceOrbitRow { face: reindexed(&face, &supp), limit, moment, relint_ok });
    }
    Ok(out)
}

/// Projective analogue over the faces of the support polytope: limits are
/// coordinate restrictions of the representative, moments are the
/// projective gradient-map values.
pub fn face_orbit_table_projective(
    rep: &Representation,
    p: &ProjPoint,
) -> Result<Vec<FaceOrbitRow>, StabilityError> {
    let supp = rep.support_of(p.coords(), SUPPORT_TOL)?;
    let rows = float_rows(rep, &supp.indices);
    let poly = GeneratedPolytope::new(rows.clone())?;
    let mut out = Vec::new();
    for face in poly.enumerate_faces()? {
        let global: Vec<usize> =
            face.indices.iter().map(|&pos| supp.indices[pos]).collect();
        let restricted = rep.component_restriction(p.coords(), &global)?;
        let limit_point = ProjPoint::new(restricted)?;
        let moment = rep.moment_projective(&limit_point)?;
        let sub: Vec<Vec<f64>> =
            face.indices.iter().map(|&pos| rows[pos].clone()).collect();
        let relint_ok = GeneratedPolytope::new(sub)?
            .membership(&moment, MembershipMode::Relint)?
            .member;
        out.push(FaceOrbitRow {
            face: reindexed(&face, &supp),
            limit: limit_point.coords().to_vec(),
            moment,
            relint_ok,
        });
    }
    Ok(out)
}

// ── null-cone decomposition ──────────────────────────────────────────────

/// One maximal coordinate subspace of the null cone.
#[derive(Debug, Clone)]
pub struct NullConeComponent {
    /// Functional pairing `<= -1` with every weight indexed by `indices`.
    pub xi: Vec<f64>,
    /// Ambient eigenbasis indices spanning the subspace, ascending.
    pub indices: Vec<usize>,
    /// Eigenbasis columns spanning the subspace.
    pub basis: Vec<Vec<f64>>,
}

/// The null cone as a union of maximal coordinate subspaces.
#[derive(Debug, Clone)]
pub struct NullConeDecomposition {
    pub components: Vec<NullConeComponent>,
}

impl NullConeDecomposition {
    /// Whether a support index set lies inside one of the subspaces.
    /// Agrees with the per-point classification for nonzero vectors.
    pub fn contains_support(&self, supp: &Support) -> bool {
        self.components.iter().any(|c| {
            supp.indices.iter().all(|i| c.indices.binary_search(i).is_ok())
        })
    }
}

/// Splits the null cone into maximal coordinate subspaces: index sets
/// admitting a functional uniformly negative on their weights, pruned to
/// the maximal ones. Search is top-down from the full index set, skipping
/// subsets of sets already known feasible.
pub fn null_cone_decomposition(
    rep: &Representation,
) -> Result<NullConeDecomposition, StabilityError> {
    let n = rep.dim();
    if n > MAX_FACE_GENERATORS {
        return Err(ConvexError::TooManyGenerators { n, max: MAX_FACE_GENERATORS }.into());
    }
    let weights = rep.weights();
    let mut feasible: HashMap<u32, Vec<f64>> = HashMap::new();
    let mut visited: HashSet<u32> = HashSet::new();
    let mut stack: Vec<u32> = vec![(1u32 << n) - 1];
    while let Some(mask) = stack.pop() {
        if mask == 0 || !visited.insert(mask) {
            continue;
        }
        let rows: Vec<Vec<f64>> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| weights[i].clone())
            .collect();
        match GeneratedCone::new(rows)?.separating_functional() {
            Some(xi) => {
                feasible.insert(mask, xi);
            }
            None => {
                for i in 0..n {
                    if mask & (1 << i) != 0 {
                        stack.push(mask & !(1 << i));
                    }
                }
            }
        }
    }
    let mut masks: Vec<u32> = feasible
        .keys()
        .copied()
        .filter(|&m| !feasible.keys().any(|&o| o != m && o & m == m))
        .collect();
    masks.sort_by_key(|&m| (std::cmp::Reverse(m.count_ones()), m));
    let components = masks
        .into_iter()
        .map(|mask| {
            let indices: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let basis = indices.iter().map(|&i| rep.basis().col(i)).collect();
            NullConeComponent { xi: feasible[&mask].clone(), indices, basis }
        })
        .collect();
    Ok(NullConeDecomposition { components })
}

// ── reductive destabilization ────────────────────────────────────────────

/// Which stage of the search produced a destabilizing direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DestabilizeRoute {
    /// A separating functional over the support weights already works.
    AbelianSeparating,
    /// The negative dual gradient value at the flow limit works.
    FlowAssisted,
    /// Randomized sphere search with local descent on the maximal weight.
    SphereSearch,
}

/// A certified destabilizing noncompact direction.
#[derive(Debug, Clone)]
pub struct Destabilization {
    /// Unit-trace-norm symmetric element.
    pub xi: SymMatrix,
    /// Coordinates of `xi` over the noncompact generator family.
    pub coefficients: Vec<f64>,
    /// Maximal weight of the point against `xi`; certified negative.
    pub lambda: f64,
    pub route: DestabilizeRoute,
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(1e-12);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// Normalizes coefficient vectors to unit trace norm against the gram
/// matrix of the generator family. Returns false for a degenerate draw.
fn trace_normalize(c: &mut [f64], gram: &crate::linalg::Mat) -> bool {
    let gc = gram.matvec(c);
    let s2 = dot(c, &gc);
    if s2 <= 1e-24 {
        return false;
    }
    let s = s2.sqrt();
    for v in c.iter_mut() {
        *v /= s;
    }
    true
}

/// Searches for a noncompact direction with negative maximal weight, so
/// the cone representative of `p` degenerates to zero. Three stages: a
/// separating functional over the support weights, the negated dual
/// gradient value at the norm-square flow limit, then a seeded randomized
/// sphere search with annealed local descent. Returns `None` when the
/// budget runs out; that is not a semistability certificate.
pub fn destabilize_reductive(
    rep: &Representation,
    p: &ProjPoint,
    seed: u64,
) -> Result<Option<Destabilization>, StabilityError> {
    let p_basis = rep.p_basis().ok_or(StabilityError::MissingPData)?;
    let p_gram = rep.p_gram().ok_or(StabilityError::MissingPData)?;
    let m = rep.abelian_dim();
    let nb = p_basis.len();

    let supp = rep.support_of(p.coords(), SUPPORT_TOL)?;
    let rows = float_rows(rep, &supp.indices);
    if let Some(xi_a) = GeneratedCone::new(rows.clone())?.separating_functional() {
        let mat = rep.weight_data().abelian_element(&xi_a);
        let s = mat.trace_pairing(&mat).sqrt();
        let lambda = rows
            .iter()
            .map(|r| dot(r, &xi_a))
            .fold(f64::NEG_INFINITY, f64::max)
            / s;
        let mut coefficients = vec![0.0; nb];
        for a in 0..m {
            coefficients[a] = xi_a[a] / s;
        }
        return Ok(Some(Destabilization {
            xi: mat.scaled(1.0 / s),
            coefficients,
            lambda,
            route: DestabilizeRoute::AbelianSeparating,
        }));
    }

    let trace = flows::norm_square_flow(rep, p, &FlowOpts::default())?;
    let d = rep.moment_p_dual(trace.limit.coords())?;
    if norm(&d) > DESTAB_ACCEPT_TOL {
        if let Some(c) = solve_dense(p_gram, &d) {
            let s2 = dot(&c, &d);
            if s2 > 0.0 {
                let s = s2.sqrt();
                let coefficients: Vec<f64> = c.iter().map(|v| -v / s).collect();
                let mat = SymMatrix::combine(p_basis, &coefficients);
                let lambda =
                    maximal_weight(rep, p, MaxWeightDirection::PElement(&mat))?;
                if lambda < -DESTAB_ACCEPT_TOL {
                    return Ok(Some(Destabilization {
                        xi: mat,
                        coefficients,
                        lambda,
                        route: DestabilizeRoute::FlowAssisted,
                    }));
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eval = |c: &[f64]| -> Result<f64, StabilityError> {
        let mat = SymMatrix::combine(p_basis, c);
        maximal_weight(rep, p, MaxWeightDirection::PElement(&mat))
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..DESTAB_SPHERE_SEEDS {
        let mut c: Vec<f64> = (0..nb).map(|_| gaussian(&mut rng)).collect();
        if !trace_normalize(&mut c, p_gram) {
            continue;
        }
        let mut lam = eval(&c)?;
        for step in 0..DESTAB_DESCENT_STEPS {
            let sigma = 0.3 * 0.97f64.powi(step as i32);
            let mut cand: Vec<f64> =
                c.iter().map(|v| v + sigma * gaussian(&mut rng)).collect();
            if !trace_normalize(&mut cand, p_gram) {
                continue;
            }
            let lam_cand = eval(&cand)?;
            if lam_cand < lam {
                c = cand;
                lam = lam_cand;
            }
        }
        let better = best.as_ref().map_or(true, |(b, _)| lam < *b);
        if better {
            best = Some((lam, c));
        }
        if lam < -DESTAB_ACCEPT_TOL {
            break;
        }
    }
    if let Some((lambda, coefficients)) = best {
        if lambda < -DESTAB_ACCEPT_TOL {
            let xi = SymMatrix::combine(p_basis, &coefficients);
            return Ok(Some(Destabilization {
                xi,
                coefficients,
                lambda,
                route: DestabilizeRoute::SphereSearch,
            }));
        }
    }
    Ok(None)
}

// ── orbit hull sampling ──────────────────────────────────────────────────

/// Dual-coordinate cloud sampled over a full group orbit, with its
/// abelian-projection check and, in two dual dimensions, the convex hull.
#[derive(Debug, Clone)]
pub struct KHullSample {
    pub cloud: Vec<Vec<f64>>,
    /// Largest distance from an abelian projection to the full weight
    /// polytope; theory puts every projection inside.
    pub projection_max_violation: f64,
    pub hull_area: Option<f64>,
    pub hull_vertices: Option<Vec<Vec<f64>>>,
    pub min_moment_norm: f64,
    pub max_moment_norm: f64,
}

/// Uniform draw from the ball of the given radius.
fn ball_sample(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..dim).map(|_| gaussian(rng)).collect();
        let n = norm(&g);
        if n > 1e-12 {
            let r = radius * rng.gen::<f64>().powf(1.0 / dim as f64);
            return g.iter().map(|v| r * v / n).collect();
        }
    }
}

/// Andrew's monotone chain; returns the hull vertices counterclockwise.
fn convex_hull_2d(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return pts.into_iter().map(|(x, y)| vec![x, y]).collect();
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower.into_iter().map(|(x, y)| vec![x, y]).collect()
}

fn polygon_area(vertices: &[Vec<f64>]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let mut a = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        a += vertices[i][0] * vertices[j][1] - vertices[j][0] * vertices[i][1];
    }
    a.abs() / 2.0
}

/// Samples the dual gradient-map values over `k . a . p` with `a` drawn
/// from a ball in abelian coordinates and `k` from the attached rotation
/// circle (skipped when `a_only`). Verifies that the abelian projection
/// of every sample lands in the full weight polytope, and reports the
/// planar hull when the dual space is two-dimensional.
pub fn khull_sample(
    rep: &Representation,
    p: &ProjPoint,
    n_samples: usize,
    a_only: bool,
    seed: u64,
) -> Result<KHullSample, StabilityError> {
    rep.p_basis().ok_or(StabilityError::MissingPData)?;
    let k_action = if a_only {
        None
    } else {
        Some(rep.k_action().ok_or(StabilityError::MissingKAction)?)
    };
    let m = rep.abelian_dim();
    let full_poly = GeneratedPolytope::new(rep.weights().to_vec())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cloud = Vec::with_capacity(n_samples);
    let mut violation: f64 = 0.0;
    let mut min_norm = f64::INFINITY;
    let mut max_norm: f64 = 0.0;
    for _ in 0..n_samples {
        let xi = ball_sample(&mut rng, m, KHULL_A_RADIUS);
        let mut y = rep.act(&xi, 1.0, p.coords())?;
        if let Some(ka) = k_action {
            let theta = TAU * rng.gen::<f64>();
            y = ka.matrix(theta).matvec(&y);
        }
        let d = rep.moment_p_dual(&y)?;
        let dist = full_poly.closest_point(&d[..m]).norm();
        violation = violation.max(dist);
        let dn = norm(&d);
        min_norm = min_norm.min(dn);
        max_norm = max_norm.max(dn);
        cloud.push(d);
    }
    let (hull_area, hull_vertices) = if cloud.first().map_or(false, |d| d.len() == 2) {
        let hull = convex_hull_2d(&cloud);
        (Some(polygon_area(&hull)), Some(hull))
    } else {
        (None, None)
    };
    Ok(KHullSample {
        cloud,
        projection_max_violation: violation,
        hull_area,
        hull_vertices,
        min_moment_norm: min_norm,
        max_moment_norm: max_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_exp_apply;
    use crate::repmodel::gallery;

    fn sl2() -> Representation {
        gallery::build("sl2_standard", &[]).unwrap()
    }

    fn gl(n: i64) -> Representation {
        gallery::build("torus_gl", &[n]).unwrap()
    }

    fn slt(n: i64) -> Representation {
        gallery::build("torus_sl", &[n]).unwrap()
    }

    fn quartics() -> Representation {
        gallery::build("sl2_binary_forms", &[4]).unwrap()
    }

    fn proj(v: &[f64]) -> ProjPoint {
        ProjPoint::new(v.to_vec()).unwrap()
    }

    #[test]
    fn weights_over_the_support_drive_the_maximal_weight() {
        let rep = sl2();
        let p = proj(&[1.0, 1.0]);
        let lam = maximal_weight(&rep, &p, MaxWeightDirection::Abelian(&[1.0])).unwrap();
        assert!((lam - 1.0).abs() < 1e-12);
        let mat = SymMatrix::diagonal(&[1.0, -1.0]);
        let lam = maximal_weight(&rep, &p, MaxWeightDirection::PElement(&mat)).unwrap();
        assert!((lam - 1.0).abs() < 1e-12);

        let rep3 = gl(3);
        let p = proj(&[1.0, 0.0, 1.0]);
        let mat = SymMatrix::diagonal(&[2.0, 1.0, -3.0]);
        let lam = maximal_weight(&rep3, &p, MaxWeightDirection::PElement(&mat)).unwrap();
        assert!((lam - 2.0).abs() < 1e-12);
        let lam =
            maximal_weight(&rep3, &p, MaxWeightDirection::Abelian(&[2.0, 1.0, -3.0])).unwrap();
        assert!((lam - 2.0).abs() < 1e-12);

        let p = proj(&[0.0, 1.0]);
        let lam = maximal_weight(&rep, &p, MaxWeightDirection::Abelian(&[1.0])).unwrap();
        assert!((lam + 1.0).abs() < 1e-12);

        let err = maximal_weight(&rep, &p, MaxWeightDirection::Abelian(&[0.0]));
        assert!(matches!(err, Err(StabilityError::ZeroDirection)));
    }

    #[test]
    fn the_maximal_weight_matches_the_asymptotic_slope() {
        let reps = vec![sl2(), quartics(), gl(2), slt(3)];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for rep in &reps {
            let n = rep.dim();
            let m = rep.abelian_dim();
            let mut done = 0;
            while done < 25 {
                let v: Vec<f64> =
                    (0..n).map(|_| 0.3 + 0.7 * rng.gen::<f64>()).collect();
                let xi: Vec<f64> =
                    (0..m).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
                if norm(&xi) < 0.1 {
                    continue;
                }
                let p = ProjPoint::new(v).unwrap();
                // A clear gap between the top two pairings keeps the
                // asymptotic slope close at finite time.
                let supp = rep.support_of(p.coords(), SUPPORT_TOL).unwrap();
                let mut pairings: Vec<f64> = supp
                    .indices
                    .iter()
                    .map(|&i| dot(&rep.weights()[i], &xi))
                    .collect();
                pairings.sort_by(|a, b| b.partial_cmp(a).unwrap());
                if pairings.len() > 1 && pairings[0] - pairings[1] < 0.3 {
                    continue;
                }
                let lam =
                    maximal_weight(rep, &p, MaxWeightDirection::Abelian(&xi)).unwrap();
                let kn = rep
                    .kempf_ness(p.coords(), &xi, KnVariant::Projective)
                    .unwrap();
                assert!(
                    (lam - kn.d1(30.0)).abs() < 1e-6,
                    "slope mismatch on {}: {} vs {}",
                    rep.label(),
                    lam,
                    kn.d1(30.0)
                );
                done += 1;
            }
        }
    }

    #[test]
    fn closed_orbits_are_certified_by_interior_combinations() {
        let rep = sl2();
        let a = classify_point_linear(&rep, &[1.0, 1.0], Arithmetic::Float).unwrap();
        assert_eq!(a.class, StabilityClass::Linear(LinearClass::ClosedOrbit));
        assert_eq!(a.stabilizer_dim, Some(0));
        let coeffs = a.zero_coefficients.unwrap();
        assert!(coeffs.iter().all(|&c| c > 0.0));
        assert!(a.zero_slack.unwrap() > 0.0);

        // The orbit norm indeed attains an interior minimum.
        let mut best = (f64::INFINITY, 0usize);
        let grid: Vec<f64> = (0..41).map(|i| -2.0 + 0.1 * i as f64).collect();
        for (k, t) in grid.iter().enumerate() {
            let y = rep.act(&[1.0], *t, &[1.0, 1.0]).unwrap();
            let n = norm(&y);
            if n < best.0 {
                best = (n, k);
            }
        }
        assert!(best.1 > 0 && best.1 < grid.len() - 1);

        let zero = classify_point_linear(&rep, &[0.0, 0.0], Arithmetic::Float).unwrap();
        assert_eq!(zero.class, StabilityClass::Linear(LinearClass::ClosedOrbit));
        assert_eq!(zero.stabilizer_dim, Some(1));
        assert!(zero.support.is_empty());
    }

    #[test]
    fn null_cone_points_carry_a_decaying_direction() {
        let rep = sl2();
        for arithmetic in [Arithmetic::Float, Arithmetic::Exact] {
            let a = classify_point_linear(&rep, &[1.0, 0.0], arithmetic).unwrap();
            assert_eq!(a.class, StabilityClass::Linear(LinearClass::NullCone));
            let xi = a.destabilizing_xi.unwrap();
            assert!((xi[0] + 1.0).abs() < 1e-12);
            let z = rep.act(&xi, 40.0, &[1.0, 0.0]).unwrap();
            assert!(norm(&z) < 1e-6);
        }
    }

    #[test]
    fn boundary_orbits_identify_the_lineality_face() {
        let one = || Exact::from_int(1);
        let weights = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0]];
        let exact = vec![
            vec![one(), Exact::from_int(0)],
            vec![-one(), Exact::from_int(0)],
            vec![Exact::from_int(0), one()],
        ];
        let rep = crate::repmodel::from_weights(weights, None, Some(exact)).unwrap();
        let x = [1.0, 1.0, 1.0];
        for arithmetic in [Arithmetic::Float, Arithmetic::Exact] {
            let a = classify_point_linear(&rep, &x, arithmetic).unwrap();
            assert_eq!(
                a.class,
                StabilityClass::Linear(LinearClass::NonclosedNonnull),
                "{arithmetic:?}"
            );
            let face = a.zero_face.unwrap();
            assert_eq!(face.indices, vec![0, 1]);
            assert_eq!(face.dim, 1);
            // The witness flattens the point onto the lineality part.
            let w = &face.witness;
            assert!(dot(w, &[1.0, 0.0]).abs() < 1e-9);
            assert!(dot(w, &[0.0, 1.0]) <= -1.0 + 1e-9);
            let z = rep.act(w, 40.0, &x).unwrap();
            let v = rep.component_restriction(&x, &face.indices).unwrap();
            let err: f64 =
                z.iter().zip(&v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            assert!(err < 1e-6);
        }
    }

    #[test]
    fn projective_classes_match_the_polytope_position() {
        let rep = sl2();
        let stable = classify_point_projective(&rep, &proj(&[1.0, 1.0]), Arithmetic::Float)
            .unwrap();
        assert_eq!(stable.class, StabilityClass::Projective(ProjectiveClass::Stable));
        assert_eq!(stable.stabilizer_dim, Some(0));
        assert!(stable.balancing_residual.unwrap() <= 1e-8);

        let unstable =
            classify_point_projective(&rep, &proj(&[1.0, 0.0]), Arithmetic::Float).unwrap();
        assert_eq!(
            unstable.class,
            StabilityClass::Projective(ProjectiveClass::Unstable)
        );
        let xi = unstable.destabilizing_xi.unwrap();
        assert!((xi[0] + 1.0).abs() < 1e-12);
        assert!((unstable.lambda.unwrap() + 1.0).abs() < 1e-12);

        let forms = quartics();
        let mid = gallery::form_coords(4, &[0.0, 0.0, 1.0, 0.0, 0.0]);
        let poly =
            classify_point_projective(&forms, &proj(&mid), Arithmetic::Float).unwrap();
        assert_eq!(
            poly.class,
            StabilityClass::Projective(ProjectiveClass::PolystableNotStable)
        );
        assert_eq!(poly.stabilizer_dim, Some(1));
        assert!(poly.balancing_residual.unwrap() <= 1e-8);

        let edge = gallery::form_coords(4, &[0.0, 1.0, 1.0, 0.0, 0.0]);
        let semi =
            classify_point_projective(&forms, &proj(&edge), Arithmetic::Float).unwrap();
        assert_eq!(
            semi.class,
            StabilityClass::Projective(ProjectiveClass::SemistableNotPolystable)
        );
        assert!(semi.zero_coefficients.is_some());
    }

    #[test]
    fn exact_and_float_classifications_agree() {
        let rep = slt(3);
        let decomp_pts: Vec<Vec<f64>> = {
            let mut pts = Vec::new();
            for a in -1..=1 {
                for b in -1..=1 {
                    for c in -1..=1 {
                        let v = vec![a as f64, b as f64, c as f64];
                        if norm(&v) > 0.0 {
                            pts.push(v);
                        }
                    }
                }
            }
            pts
        };
        for x in &decomp_pts {
            let f = classify_point_linear(&rep, x, Arithmetic::Float).unwrap();
            let e = classify_point_linear(&rep, x, Arithmetic::Exact).unwrap();
            assert_eq!(f.class, e.class, "x = {x:?}");
        }
        let forms = quartics();
        for coeffs in [[1.0, 0.0, 0.0, 0.0, 1.0], [0.0, 1.0, 0.0, 0.0, 0.0]] {
            let p = proj(&gallery::form_coords(4, &coeffs));
            let f = classify_point_projective(&forms, &p, Arithmetic::Float).unwrap();
            let e = classify_point_projective(&forms, &p, Arithmetic::Exact).unwrap();
            assert_eq!(f.class, e.class);
        }
    }

    #[test]
    fn scaling_leaves_every_verdict_fixed() {
        let rep = sl2();
        for x in [[1.0, 1.0], [1.0, 0.0]] {
            let base = classify_point_linear(&rep, &x, Arithmetic::Float).unwrap();
            for c in [1e-3, 17.0, -2.0] {
                let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
                let a = classify_point_linear(&rep, &scaled, Arithmetic::Float).unwrap();
                assert_eq!(a.class, base.class);
                assert_eq!(a.support.indices, base.support.indices);
            }
        }
    }

    #[test]
    fn witnesses_reach_their_declared_limits() {
        let rep = sl2();
        let w = hm_witness(&rep, &[1.0, 0.0], WitnessTarget::Zero).unwrap();
        assert!((w.xi[0] + 1.0).abs() < 1e-12);
        assert!(w.a.iter().all(|&v| v == 0.0));
        assert!(w.limit_error < 1e-6);
        assert!(matches!(
            hm_witness(&rep, &[1.0, 1.0], WitnessTarget::Zero),
            Err(StabilityError::NotInNullCone)
        ));

        let rep2 = gl(2);
        let ray = hm_witness(&rep2, &[1.0, 1.0], WitnessTarget::Face(vec![0])).unwrap();
        assert!((ray.xi[0]).abs() < 1e-12 && (ray.xi[1] + 1.0).abs() < 1e-12);
        assert_eq!(ray.predicted_limit, vec![1.0, 0.0]);
        assert!(ray.limit_error < 1e-6);

        let apex = hm_witness(&rep2, &[1.0, 1.0], WitnessTarget::Face(vec![])).unwrap();
        assert!((apex.xi[0] + 1.0).abs() < 1e-12 && (apex.xi[1] + 1.0).abs() < 1e-12);
        assert_eq!(apex.predicted_limit, vec![0.0, 0.0]);
        assert!(apex.limit_error < 1e-6);

        let full = hm_witness(&rep2, &[1.0, 1.0], WitnessTarget::Face(vec![0, 1])).unwrap();
        assert_eq!(full.predicted_limit, vec![1.0, 1.0]);
        assert!(full.limit_error < 1e-12);

        assert!(matches!(
            hm_witness(&rep2, &[1.0, 1.0], WitnessTarget::Face(vec![5])),
            Err(StabilityError::UnknownFace)
        ));
        assert!(matches!(
            hm_witness(&rep2, &[1.0, 0.0], WitnessTarget::Face(vec![1])),
            Err(StabilityError::UnknownFace)
        ));
    }

    #[test]
    fn every_face_row_restricts_and_projects_consistently() {
        let rep2 = gl(2);
        let rows = face_orbit_table(&rep2, &[1.0, 1.0]).unwrap();
        assert_eq!(rows.len(), 4);
        for row in &rows {
            assert!(row.relint_ok, "face {:?}", row.face.indices);
            let z = rep2.act(&row.face.witness, 40.0, &[1.0, 1.0]).unwrap();
            let err: f64 = z
                .iter()
                .zip(&row.limit)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            assert!(err < 1e-6);
        }
        let apex = rows.iter().find(|r| r.face.indices.is_empty()).unwrap();
        assert_eq!(apex.limit, vec![0.0, 0.0]);
        assert_eq!(apex.moment, vec![0.0, 0.0]);
        let full = rows.iter().find(|r| r.face.indices == vec![0, 1]).unwrap();
        assert_eq!(full.limit, vec![1.0, 1.0]);

        let rep = sl2();
        let rows = face_orbit_table(&rep, &[1.0, 1.0]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].face.indices, vec![0, 1]);
        assert!(norm(&rows[0].moment) < 1e-12);
        assert!(rows[0].relint_ok);

        let rows = face_orbit_table(&rep, &[0.0, 0.0]).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].face.indices.is_empty());
        assert!(rows[0].relint_ok);

        let prows = face_orbit_table_projective(&rep2, &proj(&[1.0, 1.0])).unwrap();
        assert_eq!(prows.len(), 3);
        for row in &prows {
            assert!(row.relint_ok, "face {:?}", row.face.indices);
        }
    }

    #[test]
    fn the_null_cone_splits_into_maximal_coordinate_subspaces() {
        let rep = sl2();
        let d = null_cone_decomposition(&rep).unwrap();
        assert_eq!(d.components.len(), 2);
        let idx: Vec<Vec<usize>> =
            d.components.iter().map(|c| c.indices.clone()).collect();
        assert!(idx.contains(&vec![0]) && idx.contains(&vec![1]));
        for c in &d.components {
            assert_eq!(c.basis.len(), 1);
            // Random points of the subspace decay under the functional.
            let mut x = vec![0.0; rep.dim()];
            for (k, &i) in c.indices.iter().enumerate() {
                x[i] = 0.7 + 0.1 * k as f64;
            }
            let z = rep.act(&c.xi, 40.0, &x).unwrap();
            assert!(norm(&z) < 1e-6 * norm(&x));
        }

        let d2 = null_cone_decomposition(&gl(2)).unwrap();
        assert_eq!(d2.components.len(), 1);
        assert_eq!(d2.components[0].indices, vec![0, 1]);
        assert!(d2.components[0].xi.iter().all(|&v| v < 0.0));

        let d3 = null_cone_decomposition(&slt(3)).unwrap();
        assert_eq!(d3.components.len(), 3);
        for c in &d3.components {
            assert_eq!(c.indices.len(), 2);
        }
    }

    #[test]
    fn grid_classification_agrees_with_the_decomposition() {
        for rep in [sl2(), slt(3)] {
            let decomp = null_cone_decomposition(&rep).unwrap();
            let n = rep.dim();
            let levels: Vec<f64> = vec![-2.0, -1.0, 0.0, 1.0, 2.0];
            let mut stack = vec![Vec::new()];
            while let Some(prefix) = stack.pop() {
                if prefix.len() == n {
                    if norm(&prefix) == 0.0 {
                        continue;
                    }
                    let a = classify_point_linear(&rep, &prefix, Arithmetic::Float)
                        .unwrap();
                    let in_cone = a.class
                        == StabilityClass::Linear(LinearClass::NullCone);
                    assert_eq!(
                        in_cone,
                        decomp.contains_support(&a.support),
                        "x = {prefix:?}"
                    );
                    continue;
                }
                for &v in &levels {
                    let mut next = prefix.clone();
                    next.push(v);
                    stack.push(next);
                }
            }
        }
    }

    #[test]
    fn generic_supports_span_the_full_cone() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for rep in [slt(3), quartics()] {
            let n = rep.dim();
            for _ in 0..100 {
                let x: Vec<f64> = (0..n)
                    .map(|_| {
                        let s = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                        s * (0.2 + 0.8 * rng.gen::<f64>())
                    })
                    .collect();
                let supp = rep.support_of(&x, SUPPORT_TOL).unwrap();
                assert_eq!(supp.len(), n);
            }
        }
    }

    #[test]
    fn group_and_torus_moment_cones_agree() {
        let rep = sl2();
        let ka = rep.k_action().unwrap().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = [1.0, 1.0];
        let mut group_signs = (false, false);
        let mut orbit_point = None;
        for _ in 0..200 {
            let t = 2.0 * rng.gen::<f64>() - 1.0;
            let theta = TAU * rng.gen::<f64>();
            let y = ka.matrix(theta).matvec(&rep.act(&[1.0], t, &x).unwrap());
            let mu = rep.moment(&y).unwrap();
            if mu[0] > 1e-6 {
                group_signs.0 = true;
            }
            if mu[0] < -1e-6 {
                group_signs.1 = true;
            }
            let nrm = norm(&y);
            if orbit_point.is_none()
                && y.iter().all(|v| v.abs() > 0.1 * nrm)
            {
                orbit_point = Some(y);
            }
        }
        assert!(group_signs.0 && group_signs.1);
        // One sampled orbit point with full support sweeps the same cone
        // along its torus orbit alone.
        let v = orbit_point.unwrap();
        let mut torus_signs = (false, false);
        for k in 0..60 {
            let t = -3.0 + 0.1 * k as f64;
            let mu = rep.moment(&rep.act(&[1.0], t, &v).unwrap()).unwrap();
            if mu[0] > 1e-6 {
                torus_signs.0 = true;
            }
            if mu[0] < -1e-6 {
                torus_signs.1 = true;
            }
        }
        assert_eq!(group_signs, torus_signs);
    }

    #[test]
    fn reductive_destabilization_routes() {
        let forms = quartics();

        // A support weight set strictly on one side: the separating
        // functional route fires and its rate is exact.
        let p = proj(&gallery::form_coords(4, &[0.0, 1.0, 0.0, 0.0, 0.0]));
        let d = destabilize_reductive(&forms, &p, 1).unwrap().unwrap();
        assert_eq!(d.route, DestabilizeRoute::AbelianSeparating);
        assert!((d.lambda + 1.0 / 10.0f64.sqrt()).abs() < 1e-9);
        assert!((d.xi.trace_pairing(&d.xi) - 1.0).abs() < 1e-9);
        let z = sym_exp_apply(&d.xi, 30.0, p.coords());
        assert!(norm(&z) < 1e-3);

        // A rotated weight vector: the torus route fails (full support),
        // the flow route finds the conjugate direction with the optimal
        // rate.
        let p = proj(&gallery::form_coords(4, &[1.0, 4.0, 6.0, 4.0, 1.0]));
        let d = destabilize_reductive(&forms, &p, 1).unwrap().unwrap();
        assert_eq!(d.route, DestabilizeRoute::FlowAssisted);
        assert!((d.lambda + 4.0 / 40.0f64.sqrt()).abs() < 1e-6);
        let z = sym_exp_apply(&d.xi, 30.0, p.coords());
        assert!(norm(&z) < 1e-2);

        // The balanced quartic is a zero of the full gradient map: no
        // direction certifies decay and the whole budget runs dry.
        let p = proj(&gallery::form_coords(4, &[0.0, 0.0, 1.0, 0.0, 0.0]));
        assert!(destabilize_reductive(&forms, &p, 1).unwrap().is_none());

        // The plane representation has no semistable points at all: even
        // the torus-stable point degenerates along a rotated direction.
        let rep = sl2();
        let d = destabilize_reductive(&rep, &proj(&[1.0, 1.0]), 1).unwrap().unwrap();
        assert!(d.lambda < -0.5);
        let z = sym_exp_apply(&d.xi, 30.0, &[1.0, 1.0]);
        assert!(norm(&z) < 1e-3);

        let torus_only = gl(2);
        assert!(matches!(
            destabilize_reductive(&torus_only, &proj(&[1.0, 1.0]), 1),
            Err(StabilityError::MissingPData)
        ));
    }

    #[test]
    fn sampled_hulls_fill_the_dual_disc() {
        let rep = sl2();
        let s = khull_sample(&rep, &proj(&[1.0, 0.0]), 2000, false, 7).unwrap();
        assert!(s.projection_max_violation <= KHULL_PROJECTION_TOL);
        assert!(s.min_moment_norm > 1.0 - 1e-9 && s.max_moment_norm < 1.0 + 1e-9);
        let area = s.hull_area.unwrap();
        assert!((area - std::f64::consts::PI).abs() < 0.02, "area {area}");

        // The other open-orbit point samples the same circle.
        let s2 = khull_sample(&rep, &proj(&[1.0, 1.0]), 2000, false, 7).unwrap();
        assert!((s2.hull_area.unwrap() - std::f64::consts::PI).abs() < 0.02);
        assert!(s2.min_moment_norm > 1.0 - 1e-9);
    }

    #[test]
    fn torus_only_sampling_spreads_across_the_interior() {
        let rep = sl2();
        let s = khull_sample(&rep, &proj(&[1.0, 1.0]), 1000, true, 9).unwrap();
        assert!(s.projection_max_violation <= KHULL_PROJECTION_TOL);
        let first: Vec<f64> = s.cloud.iter().map(|d| d[0]).collect();
        let max = first.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = first.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max > 0.9 && min < -0.9, "spread [{min}, {max}]");
        // Every abelian value stays strictly inside the open interval.
        assert!(first.iter().all(|v| v.abs() < 1.0));
    }

    #[test]
    fn missing_structure_is_reported() {
        let rep = gl(2);
        assert!(matches!(
            khull_sample(&rep, &proj(&[1.0, 1.0]), 10, false, 1),
            Err(StabilityError::MissingPData)
        ));
        let forms = quartics();
        let p = proj(&gallery::form_coords(4, &[0.0, 0.0, 1.0, 0.0, 0.0]));
        // Exact classification needs published exact weights.
        let weights = vec![vec![0.5, 0.0], vec![0.0, 0.25]];
        let plain = crate::repmodel::from_weights(weights, None, None).unwrap();
        assert!(matches!(
            classify_point_linear(&plain, &[1.0, 1.0], Arithmetic::Exact),
            Err(StabilityError::ExactWeightsUnavailable)
        ));
        let _ = classify_point_projective(&forms, &p, Arithmetic::Exact).unwrap();
    }
}
