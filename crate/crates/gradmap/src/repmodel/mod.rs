//! Representations of abelian symmetric families and their gradient maps.
//!
//! A representation is built from commuting symmetric generators spanning
//! an abelian subalgebra, optionally extended by further symmetric
//! generators (the noncompact directions) and a parametrized orthogonal
//! action for the built-in examples. Building runs the simultaneous
//! diagonalizer once; everything downstream evaluates through the cached
//! weight table, so gradient maps and Kempf-Ness values are closed-form.
//!
//! Conventions fixed here and used by every caller:
//! - functionals on the abelian part are coordinate vectors against the
//!   declared generator basis, and norms of such coordinate vectors are
//!   Euclidean; the trace-form Gram matrix is kept alongside for the
//!   places where matrix geometry genuinely enters,
//! - the noncompact dual value of a point is the tuple of normalized
//!   pairings `<E_b x, x> / |x|^2` over the declared generator list,
//!   whose leading entries are always the abelian generators.

pub mod gallery;

use crate::linalg::{
    exp_action, simultaneous_diagonalize, solve_dense, LinalgError, Mat, SymMatrix, WeightData,
};
use crate::scalar::rationalize;
use crate::Exact;
use gallery::KAction;
use thiserror::Error;

/// Relative coordinate threshold below which a component is treated as
/// absent from the support.
pub const SUPPORT_TOL: f64 = 1e-9;

/// Relative commutator tolerance accepted when validating generators.
pub const COMMUTATOR_TOL: f64 = 1e-10;

/// Unit-norm drift allowed in a stored projective representative.
pub const PROJ_NORM_TOL: f64 = 1e-12;

/// Largest denominator tried when certifying rational weights.
const RATIONALIZE_MAX_DEN: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum RepError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero vector has no projective class")]
    ZeroVector,
    #[error("noncompact generator {index} is not symmetric")]
    PGenNotSymmetric { index: usize },
    #[error("trace form is degenerate on the declared noncompact span")]
    DegeneratePSpan,
    #[error("representation declares no noncompact generators")]
    MissingPData,
}

/// Index set of the nonvanishing coordinates of a point, with the margin
/// of the thresholding decision echoed for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    /// Eigenbasis indices with `|x_i| > tol * |x|`, ascending.
    pub indices: Vec<usize>,
    /// The kept coordinates, aligned with `indices`.
    pub coords: Vec<f64>,
    /// Smallest kept ratio `|x_i| / |x|`; 0 when the support is empty.
    pub smallest_kept: f64,
    /// Largest dropped ratio `|x_i| / |x|`; 0 when nothing was dropped.
    pub largest_dropped: f64,
}

impl Support {
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }
}

/// A point of projective space, stored as a unit representative with the
/// first coordinate above the support threshold made positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjPoint {
    v: Vec<f64>,
}

impl ProjPoint {
    pub fn new(v: Vec<f64>) -> Result<Self, RepError> {
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !(norm > 1e-14) || !norm.is_finite() {
            return Err(RepError::ZeroVector);
        }
        let mut v: Vec<f64> = v.iter().map(|a| a / norm).collect();
        if let Some(lead) = v.iter().find(|a| a.abs() > SUPPORT_TOL) {
            if *lead < 0.0 {
                for a in &mut v {
                    *a = -*a;
                }
            }
        }
        Ok(ProjPoint { v })
    }

    pub fn coords(&self) -> &[f64] {
        &self.v
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    /// Chordal distance between projective classes: the representative
    /// sign ambiguity is quotiented out.
    pub fn distance(&self, other: &ProjPoint) -> f64 {
        let mut diff = 0.0f64;
        let mut sum = 0.0f64;
        for (a, b) in self.v.iter().zip(&other.v) {
            diff += (a - b) * (a - b);
            sum += (a + b) * (a + b);
        }
        diff.sqrt().min(sum.sqrt())
    }
}

/// A built representation: weight table, optional noncompact extension,
/// optional parametrized orthogonal action, optional certified rational
/// weights. Immutable once built; evaluation methods are pure.
#[derive(Debug, Clone)]
pub struct Representation {
    weight_data: WeightData,
    gram_inv: Mat,
    /// Full noncompact generator list; the abelian generators come first.
    p_basis: Option<Vec<SymMatrix>>,
    /// Trace-form Gram matrix over `p_basis`.
    p_gram: Option<Mat>,
    k_action: Option<KAction>,
    exact_weights: Option<Vec<Vec<Exact>>>,
    label: String,
}

/// Validates and diagonalizes commuting symmetric generators, then tries
/// to certify the weight table as exactly rational.
pub fn build_representation(gens: Vec<SymMatrix>) -> Result<Representation, RepError> {
    let weight_data = simultaneous_diagonalize(&gens, COMMUTATOR_TOL)?;
    let gram_inv = invert_posdef(&weight_data.gram).ok_or(RepError::DegeneratePSpan)?;
    let exact_weights = certify_rational_weights(&gens, &weight_data.weights);
    Ok(Representation {
        weight_data,
        gram_inv,
        p_basis: None,
        p_gram: None,
        k_action: None,
        exact_weights,
        label: String::new(),
    })
}

/// Builds a representation directly from a weight table: generator `a` is
/// reconstructed as `sum_i w[i][a] v_i v_i^T` over the given orthonormal
/// basis (identity by default). Exact rows, when supplied, are trusted as
/// the definition rather than re-certified.
pub fn from_weights(
    weights: Vec<Vec<f64>>,
    basis: Option<Mat>,
    exact: Option<Vec<Vec<Exact>>>,
) -> Result<Representation, RepError> {
    let n = weights.len();
    if n == 0 {
        return Err(RepError::DimensionMismatch { expected: 1, got: 0 });
    }
    let m = weights[0].len();
    for row in &weights {
        if row.len() != m {
            return Err(RepError::DimensionMismatch { expected: m, got: row.len() });
        }
    }
    if let Some(ex) = &exact {
        if ex.len() != n || ex.iter().any(|r| r.len() != m) {
            return Err(RepError::DimensionMismatch { expected: n, got: ex.len() });
        }
    }
    let basis = basis.unwrap_or_else(|| Mat::identity(n));
    if basis.nrows() != n || basis.ncols() != n {
        return Err(RepError::DimensionMismatch { expected: n, got: basis.nrows() });
    }
    let mut abelian = Vec::with_capacity(m);
    for a in 0..m {
        let mut e = Mat::zeros(n, n);
        for i in 0..n {
            let vi = basis.col(i);
            for r in 0..n {
                for c in 0..n {
                    e[(r, c)] += weights[i][a] * vi[r] * vi[c];
                }
            }
        }
        abelian.push(SymMatrix::from_mat(e)?);
    }
    let mut gram = Mat::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            gram[(a, b)] = abelian[a].trace_pairing(&abelian[b]);
        }
    }
    let gram_inv = invert_posdef(&gram).ok_or(RepError::DegeneratePSpan)?;
    let weight_data =
        WeightData { basis, weights, abelian_basis: abelian, gram };
    Ok(Representation {
        weight_data,
        gram_inv,
        p_basis: None,
        p_gram: None,
        k_action: None,
        exact_weights: exact,
        label: String::new(),
    })
}

fn invert_posdef(g: &Mat) -> Option<Mat> {
    let m = g.nrows();
    let mut inv = Mat::zeros(m, m);
    for c in 0..m {
        let mut rhs = vec![0.0; m];
        rhs[c] = 1.0;
        let col = solve_dense(g, &rhs)?;
        inv.set_col(c, &col);
    }
    Some(inv)
}

/// Rational certification: every generator entry and every weight must
/// rationalize, and for each distinct candidate row the exact joint
/// kernel of the shifted generators must have dimension equal to the
/// row's multiplicity. Returns the certified table or nothing.
fn certify_rational_weights(
    gens: &[SymMatrix],
    weights: &[Vec<f64>],
) -> Option<Vec<Vec<Exact>>> {
    let n = gens[0].n();
    let m = gens.len();
    let mut exact_gens: Vec<Vec<Vec<Exact>>> = Vec::with_capacity(m);
    for g in gens {
        let mat = g.mat();
        let mut rows = Vec::with_capacity(n);
        for r in 0..n {
            let mut row = Vec::with_capacity(n);
            for c in 0..n {
                row.push(rationalize(mat[(r, c)], RATIONALIZE_MAX_DEN)?);
            }
            rows.push(row);
        }
        exact_gens.push(rows);
    }
    let mut candidates: Vec<Vec<Exact>> = Vec::with_capacity(n);
    for row in weights {
        let mut ex = Vec::with_capacity(m);
        for &w in row {
            ex.push(rationalize(w, RATIONALIZE_MAX_DEN)?);
        }
        candidates.push(ex);
    }
    // Group identical candidate rows and check each multiplicity against
    // the exact joint eigenspace dimension.
    let mut remaining: Vec<usize> = (0..n).collect();
    while let Some(&i) = remaining.first() {
        let row = candidates[i].clone();
        let mult = remaining.iter().filter(|&&j| candidates[j] == row).count();
        remaining.retain(|&j| candidates[j] != row);
        // Stack (E_a - r_a I) over all generators; kernel dim = n - rank.
        let mut stacked: Vec<Vec<Exact>> = Vec::with_capacity(m * n);
        for (a, eg) in exact_gens.iter().enumerate() {
            for r in 0..n {
                let mut shifted = eg[r].clone();
                shifted[r] = shifted[r].clone() - row[a].clone();
                stacked.push(shifted);
            }
        }
        let kernel_dim = n - crate::convexgeom::rank(&stacked);
        if kernel_dim != mult {
            return None;
        }
    }
    Some(candidates)
}

impl Representation {
    /// Extends the representation by noncompact generators beyond the
    /// abelian ones; the stored list keeps the abelian generators first.
    pub fn with_p_gens(mut self, extra: Vec<SymMatrix>) -> Result<Self, RepError> {
        let n = self.dim();
        for (index, g) in extra.iter().enumerate() {
            if g.n() != n {
                return Err(RepError::PGenNotSymmetric { index });
            }
        }
        let mut basis = self.weight_data.abelian_basis.clone();
        basis.extend(extra);
        let k = basis.len();
        let mut gram = Mat::zeros(k, k);
        for a in 0..k {
            for b in 0..k {
                gram[(a, b)] = basis[a].trace_pairing(&basis[b]);
            }
        }
        if invert_posdef(&gram).is_none() {
            return Err(RepError::DegeneratePSpan);
        }
        self.p_basis = Some(basis);
        self.p_gram = Some(gram);
        Ok(self)
    }

    pub fn with_k_action(mut self, k: KAction) -> Self {
        self.k_action = Some(k);
        self
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.weight_data.dim()
    }

    pub fn abelian_dim(&self) -> usize {
        self.weight_data.abelian_dim()
    }

    /// Weight rows, one per eigenvector, each of length `abelian_dim`.
    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weight_data.weights
    }

    pub fn exact_weights(&self) -> Option<&[Vec<Exact>]> {
        self.exact_weights.as_deref()
    }

    pub fn weight_data(&self) -> &WeightData {
        &self.weight_data
    }

    pub fn basis(&self) -> &Mat {
        &self.weight_data.basis
    }

    pub fn gram(&self) -> &Mat {
        &self.weight_data.gram
    }

    pub fn gram_inv(&self) -> &Mat {
        &self.gram_inv
    }

    pub fn abelian_basis(&self) -> &[SymMatrix] {
        &self.weight_data.abelian_basis
    }

    pub fn p_basis(&self) -> Option<&[SymMatrix]> {
        self.p_basis.as_deref()
    }

    pub fn p_gram(&self) -> Option<&Mat> {
        self.p_gram.as_ref()
    }

    pub fn k_action(&self) -> Option<&KAction> {
        self.k_action.as_ref()
    }

    /// Coordinates of `x` in the weight eigenbasis.
    pub fn coords(&self, x: &[f64]) -> Result<Vec<f64>, RepError> {
        self.check_dim(x)?;
        Ok(self.weight_data.coords(x))
    }

    pub fn from_coords(&self, c: &[f64]) -> Result<Vec<f64>, RepError> {
        self.check_dim(c)?;
        Ok(self.weight_data.from_coords(c))
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), RepError> {
        if x.len() != self.dim() {
            return Err(RepError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    /// Support of `x` at the relative threshold `tol` (callers pass
    /// [`SUPPORT_TOL`] unless probing the margin).
    pub fn support_of(&self, x: &[f64], tol: f64) -> Result<Support, RepError> {
        let c = self.coords(x)?;
        let norm = c.iter().map(|a| a * a).sum::<f64>().sqrt();
        let mut indices = Vec::new();
        let mut coords = Vec::new();
        let mut smallest_kept = 0.0f64;
        let mut largest_dropped = 0.0f64;
        if norm > 0.0 {
            smallest_kept = f64::INFINITY;
            for (i, &ci) in c.iter().enumerate() {
                let ratio = ci.abs() / norm;
                if ratio > tol {
                    indices.push(i);
                    coords.push(ci);
                    smallest_kept = smallest_kept.min(ratio);
                } else {
                    largest_dropped = largest_dropped.max(ratio);
                }
            }
            if indices.is_empty() {
                smallest_kept = 0.0;
            }
        }
        Ok(Support { indices, coords, smallest_kept, largest_dropped })
    }

    /// The zeroed-out copy of `x` keeping only the given eigenbasis
    /// components, returned in ambient coordinates.
    pub fn component_restriction(&self, x: &[f64], keep: &[usize]) -> Result<Vec<f64>, RepError> {
        let c = self.coords(x)?;
        let mut kept = vec![0.0; c.len()];
        for &i in keep {
            kept[i] = c[i];
        }
        Ok(self.weight_data.from_coords(&kept))
    }

    /// Gradient map value on the abelian part: `sum_i x_i^2 alpha_i` in
    /// declared coordinates.
    pub fn moment(&self, x: &[f64]) -> Result<Vec<f64>, RepError> {
        let c = self.coords(x)?;
        let m = self.abelian_dim();
        let mut mu = vec![0.0; m];
        for (i, row) in self.weights().iter().enumerate() {
            let w = c[i] * c[i];
            for a in 0..m {
                mu[a] += w * row[a];
            }
        }
        Ok(mu)
    }

    /// Normalized gradient map of a projective point; always lies in the
    /// convex hull of the support weights.
    pub fn moment_projective(&self, p: &ProjPoint) -> Result<Vec<f64>, RepError> {
        self.moment(p.coords())
    }

    /// Noncompact dual value `(<E_b x, x> / |x|^2)_b` over the full
    /// generator list, abelian entries first.
    pub fn moment_p_dual(&self, x: &[f64]) -> Result<Vec<f64>, RepError> {
        self.check_dim(x)?;
        let basis = self.p_basis.as_ref().ok_or(RepError::MissingPData)?;
        let nsq: f64 = x.iter().map(|a| a * a).sum();
        if !(nsq > 0.0) {
            return Err(RepError::ZeroVector);
        }
        Ok(basis
            .iter()
            .map(|e| {
                let ex = e.apply(x);
                x.iter().zip(&ex).map(|(a, b)| a * b).sum::<f64>() / nsq
            })
            .collect())
    }

    /// Abelian group element `exp(sum_a xi_a E_a)` applied to `x`, taken
    /// at time `t` along the one-parameter subgroup.
    pub fn act(&self, xi: &[f64], t: f64, x: &[f64]) -> Result<Vec<f64>, RepError> {
        Ok(exp_action(&self.weight_data, xi, t, x)?)
    }

    /// Closed-form Kempf-Ness evaluator for `x` along `exp(t xi)`.
    pub fn kempf_ness(
        &self,
        x: &[f64],
        xi: &[f64],
        variant: KnVariant,
    ) -> Result<KempfNess, RepError> {
        let c = self.coords(x)?;
        if xi.len() != self.abelian_dim() {
            return Err(RepError::DimensionMismatch {
                expected: self.abelian_dim(),
                got: xi.len(),
            });
        }
        let norm_sq: f64 = c.iter().map(|a| a * a).sum();
        if variant == KnVariant::Projective && !(norm_sq > 0.0) {
            return Err(RepError::ZeroVector);
        }
        let terms: Vec<(f64, f64)> = c
            .iter()
            .zip(self.weights())
            .map(|(&ci, row)| {
                let pair: f64 = row.iter().zip(xi).map(|(w, v)| w * v).sum();
                (ci * ci, pair)
            })
            .collect();
        Ok(KempfNess { terms, norm_sq, variant })
    }
}

/// Which Kempf-Ness function a [`KempfNess`] evaluator computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnVariant {
    Linear,
    Projective,
}

/// One-variable restriction of a Kempf-Ness function to `exp(t xi)`,
/// with analytic first and second derivatives. The projective variant is
/// evaluated in shifted exponential form and stays finite for any `t`.
#[derive(Debug, Clone)]
pub struct KempfNess {
    /// Pairs `(x_i^2, alpha_i(xi))`.
    terms: Vec<(f64, f64)>,
    norm_sq: f64,
    variant: KnVariant,
}

impl KempfNess {
    pub fn value(&self, t: f64) -> f64 {
        match self.variant {
            KnVariant::Linear => {
                0.5 * self
                    .terms
                    .iter()
                    .map(|&(sq, a)| sq * ((2.0 * t * a).exp() - 1.0))
                    .sum::<f64>()
            }
            KnVariant::Projective => {
                let shift = self.shift(t);
                let s: f64 = self
                    .terms
                    .iter()
                    .filter(|&&(sq, _)| sq > 0.0)
                    .map(|&(sq, a)| sq * (2.0 * t * a - shift).exp())
                    .sum();
                0.5 * (shift + s.ln() - self.norm_sq.ln())
            }
        }
    }

    pub fn d1(&self, t: f64) -> f64 {
        match self.variant {
            KnVariant::Linear => self
                .terms
                .iter()
                .map(|&(sq, a)| sq * a * (2.0 * t * a).exp())
                .sum::<f64>(),
            KnVariant::Projective => {
                let (s0, s1, _) = self.shifted_sums(t);
                s1 / s0
            }
        }
    }

    pub fn d2(&self, t: f64) -> f64 {
        match self.variant {
            KnVariant::Linear => self
                .terms
                .iter()
                .map(|&(sq, a)| 2.0 * sq * a * a * (2.0 * t * a).exp())
                .sum::<f64>(),
            KnVariant::Projective => {
                let (s0, s1, s2) = self.shifted_sums(t);
                let mean = s1 / s0;
                2.0 * (s2 / s0 - mean * mean)
            }
        }
    }

    /// Largest exponent over the support; subtracting it keeps every
    /// exponential at or below one.
    fn shift(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .filter(|&&(sq, _)| sq > 0.0)
            .map(|&(_, a)| 2.0 * t * a)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn shifted_sums(&self, t: f64) -> (f64, f64, f64) {
        let shift = self.shift(t);
        let mut s0 = 0.0;
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for &(sq, a) in self.terms.iter().filter(|&&(sq, _)| sq > 0.0) {
            let e = sq * (2.0 * t * a - shift).exp();
            s0 += e;
            s1 += e * a;
            s2 += e * a * a;
        }
        (s0, s1, s2)
    }
}
