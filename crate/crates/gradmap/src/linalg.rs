//! Dense symmetric linear algebra for small representation spaces.
//!
//! Everything here is sized for ambient dimensions in the tens to low
//! hundreds: a cyclic Jacobi eigensolver, simultaneous diagonalization of a
//! commuting symmetric family, and the weight-basis exponential action
//!
//! ```text
//! exp(t xi) x = sum_i e^{t a_i(xi)} <x, v_i> v_i
//! ```
//!
//! where `{v_i}` is a common orthonormal eigenbasis and `a_i` the weight
//! functionals recorded in [`WeightData`].

use thiserror::Error;

/// Relative off-diagonal Frobenius mass at which Jacobi sweeps stop.
pub const EIG_OFF_TOL: f64 = 1e-12;

/// Relative gap (against the spectral radius) under which two eigenvalues
/// are treated as one cluster.
pub const CLUSTER_REL_TOL: f64 = 1e-9;

/// Relative asymmetry tolerated by [`SymMatrix::new`].
const SYM_CHECK_TOL: f64 = 1e-12;

/// Relative reconstruction residual allowed per generator after
/// simultaneous diagonalization.
pub const WEIGHT_RESIDUAL_TOL: f64 = 1e-8;

const MAX_JACOBI_SWEEPS: usize = 64;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not symmetric (relative asymmetry {asym:.3e})")]
    NotSymmetric { asym: f64 },
    #[error("generators {i} and {j} do not commute to tolerance")]
    NotCommuting { i: usize, j: usize },
    #[error("generators are linearly dependent under the trace form")]
    DegenerateGenerators,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

// ── vectors ──────────────────────────────────────────────────────────────

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += s * x`
pub fn axpy(s: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

// ── dense matrices ───────────────────────────────────────────────────────

/// Row-major dense matrix. Minimal by design: just the operations the
/// eigensolver and the representation layer need.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Mat { nrows, ncols, data: vec![0.0; nrows * ncols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = if nrows == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            assert_eq!(r.len(), ncols, "ragged rows");
            data.extend_from_slice(r);
        }
        Mat { nrows, ncols, data }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.ncols..(r + 1) * self.ncols]
    }

    pub fn col(&self, c: usize) -> Vec<f64> {
        (0..self.nrows).map(|r| self[(r, c)]).collect()
    }

    pub fn set_col(&mut self, c: usize, v: &[f64]) {
        assert_eq!(v.len(), self.nrows);
        for r in 0..self.nrows {
            self[(r, c)] = v[r];
        }
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.ncols, self.nrows);
        for r in 0..self.nrows {
            for c in 0..self.ncols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows).map(|r| dot(self.row(r), x)).collect()
    }

    /// `self^T x` without forming the transpose.
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows);
        let mut out = vec![0.0; self.ncols];
        for r in 0..self.nrows {
            axpy(x[r], self.row(r), &mut out);
        }
        out
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.ncols, other.nrows);
        let mut out = Mat::zeros(self.nrows, other.ncols);
        for r in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self[(r, k)];
                if a == 0.0 {
                    continue;
                }
                for c in 0..other.ncols {
                    out[(r, c)] += a * other[(k, c)];
                }
            }
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn scaled(&self, s: f64) -> Mat {
        let mut m = self.clone();
        for x in &mut m.data {
            *x *= s;
        }
        m
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut m = self.clone();
        for (a, b) in m.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        m
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut m = self.clone();
        for (a, b) in m.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        m
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.ncols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.ncols + c]
    }
}

/// Solve `A x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when the pivot falls below `1e-14 * max|A|`.
pub fn solve_dense(a: &Mat, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    assert_eq!(n, b.len());
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    let floor = 1e-14 * m.max_abs().max(1e-300);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            m[(i, col)].abs().partial_cmp(&m[(j, col)].abs()).unwrap()
        })?;
        if m[(piv, col)].abs() < floor {
            return None;
        }
        if piv != col {
            for c in 0..n {
                let tmp = m[(col, c)];
                m[(col, c)] = m[(piv, c)];
                m[(piv, c)] = tmp;
            }
            rhs.swap(col, piv);
        }
        let d = m[(col, col)];
        for r in col + 1..n {
            let f = m[(r, col)] / d;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                let v = m[(col, c)];
                m[(r, c)] -= f * v;
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = rhs[r];
        for c in r + 1..n {
            s -= m[(r, c)] * x[c];
        }
        x[r] = s / m[(r, r)];
    }
    Some(x)
}

// ── symmetric matrices ───────────────────────────────────────────────────

/// Square matrix certified symmetric at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    mat: Mat,
}

impl SymMatrix {
    /// Accepts `entries` of length `n*n`, row-major. The relative asymmetry
    /// `max|a_ij - a_ji| / max|a_ij|` must not exceed `1e-12`; entries are
    /// symmetrized afterwards so downstream code sees exact symmetry.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self, LinalgError> {
        if entries.len() != n * n {
            return Err(LinalgError::DimensionMismatch { expected: n * n, got: entries.len() });
        }
        let mut mat = Mat { nrows: n, ncols: n, data: entries };
        let scale = mat.max_abs().max(1e-300);
        let mut asym = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                asym = asym.max((mat[(i, j)] - mat[(j, i)]).abs());
            }
        }
        if asym > SYM_CHECK_TOL * scale {
            return Err(LinalgError::NotSymmetric { asym: asym / scale });
        }
        for i in 0..n {
            for j in i + 1..n {
                let v = 0.5 * (mat[(i, j)] + mat[(j, i)]);
                mat[(i, j)] = v;
                mat[(j, i)] = v;
            }
        }
        Ok(SymMatrix { mat })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(LinalgError::DimensionMismatch { expected: n, got: r.len() });
            }
            entries.extend_from_slice(r);
        }
        SymMatrix::new(n, entries)
    }

    pub fn from_mat(m: Mat) -> Result<Self, LinalgError> {
        if m.nrows != m.ncols {
            return Err(LinalgError::DimensionMismatch { expected: m.nrows, got: m.ncols });
        }
        SymMatrix::new(m.nrows, m.data)
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut mat = Mat::zeros(n, n);
        for i in 0..n {
            mat[(i, i)] = d[i];
        }
        SymMatrix { mat }
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix { mat: Mat::zeros(n, n) }
    }

    pub fn n(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &Mat {
        &self.mat
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.mat.matvec(x)
    }

    pub fn frobenius(&self) -> f64 {
        self.mat.frobenius()
    }

    /// Trace-form pairing `tr(self * other)`.
    pub fn trace_pairing(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.n(), other.n());
        let n = self.n();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += self.mat[(i, j)] * other.mat[(j, i)];
            }
        }
        s
    }

    /// Linear combination `sum_a coeffs[a] * gens[a]`.
    pub fn combine(gens: &[SymMatrix], coeffs: &[f64]) -> SymMatrix {
        assert_eq!(gens.len(), coeffs.len());
        assert!(!gens.is_empty());
        let n = gens[0].n();
        let mut mat = Mat::zeros(n, n);
        for (g, &c) in gens.iter().zip(coeffs) {
            for i in 0..n {
                for j in 0..n {
                    mat[(i, j)] += c * g.mat[(i, j)];
                }
            }
        }
        SymMatrix { mat }
    }

    pub fn scaled(&self, s: f64) -> SymMatrix {
        SymMatrix { mat: self.mat.scaled(s) }
    }
}

/// Frobenius norm of the commutator `AB - BA`.
pub fn commutator_norm(a: &SymMatrix, b: &SymMatrix) -> f64 {
    let ab = a.mat.matmul(&b.mat);
    let ba = b.mat.matmul(&a.mat);
    ab.sub(&ba).frobenius()
}

// ── eigendecomposition ───────────────────────────────────────────────────

/// Result of [`eigh_symmetric`]: `vectors` holds orthonormal eigenvector
/// columns matching `values`, which are sorted in descending order.
/// `clusters` groups indices whose eigenvalues agree to within
/// `CLUSTER_REL_TOL` times the spectral radius.
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    pub vectors: Mat,
    pub values: Vec<f64>,
    pub clusters: Vec<Vec<usize>>,
}

/// Cyclic Jacobi eigensolver. `tol` is the relative off-diagonal Frobenius
/// target (use [`EIG_OFF_TOL`] unless there is a reason not to). Output is
/// deterministic: eigenvalues descend, and each eigenvector has its first
/// component of magnitude above `1e-12` made positive.
pub fn eigh_symmetric(s: &SymMatrix, tol: f64) -> EigDecomposition {
    let n = s.n();
    let mut a = s.mat.clone();
    let mut q = Mat::identity(n);
    let scale = a.frobenius().max(1e-300);
    let target = tol * scale;

    for _sweep in 0..MAX_JACOBI_SWEEPS {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if (2.0 * off).sqrt() <= target {
            break;
        }
        for p in 0..n {
            for r in p + 1..n {
                let apq = a[(p, r)];
                if apq.abs() <= target / (n as f64 * n as f64) {
                    continue;
                }
                // Classic Jacobi rotation annihilating a[(p, r)].
                let theta = (a[(r, r)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akr = a[(k, r)];
                    a[(k, p)] = c * akp - sn * akr;
                    a[(k, r)] = sn * akp + c * akr;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let ark = a[(r, k)];
                    a[(p, k)] = c * apk - sn * ark;
                    a[(r, k)] = sn * apk + c * ark;
                }
                for k in 0..n {
                    let qkp = q[(k, p)];
                    let qkr = q[(k, r)];
                    q[(k, p)] = c * qkp - sn * qkr;
                    q[(k, r)] = sn * qkp + c * qkr;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).unwrap());

    let mut vectors = Mat::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(a[(src, src)]);
        let mut col = q.col(src);
        if let Some(first) = col.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                for x in &mut col {
                    *x = -*x;
                }
            }
        }
        vectors.set_col(dst, &col);
    }

    let spectral_radius = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cluster_gap = CLUSTER_REL_TOL * spectral_radius;
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        match clusters.last_mut() {
            Some(cl) if (values[*cl.last().unwrap()] - values[i]).abs() <= cluster_gap => {
                cl.push(i)
            }
            _ => clusters.push(vec![i]),
        }
    }

    EigDecomposition { vectors, values, clusters }
}

/// Apply `exp(t xi)` to `x` for a single symmetric `xi`, through its
/// eigendecomposition. Exact for symmetric matrices up to solver accuracy.
pub fn sym_exp_apply(xi: &SymMatrix, t: f64, x: &[f64]) -> Vec<f64> {
    let eig = eigh_symmetric(xi, EIG_OFF_TOL);
    let c = eig.vectors.tr_matvec(x);
    let n = xi.n();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let w = (t * eig.values[i]).exp() * c[i];
        axpy(w, &eig.vectors.col(i), &mut out);
    }
    out
}

// ── simultaneous diagonalization ─────────────────────────────────────────

/// Common orthonormal eigenbasis of a commuting symmetric family, with the
/// weight functional of each basis vector recorded in generator coordinates.
///
/// `basis` holds the eigenvectors as columns; row `i` of `weights` is
/// `(a_i(E_1), ..., a_i(E_m))` for the generators `E_a` in `abelian_basis`.
/// Rows are sorted lexicographically descending, so the layout is a
/// deterministic function of the input. `gram` is the trace-form Gram matrix
/// `tr(E_a E_b)`; it is positive definite because the generators are
/// independent symmetric matrices.
#[derive(Debug, Clone)]
pub struct WeightData {
    pub basis: Mat,
    pub weights: Vec<Vec<f64>>,
    pub abelian_basis: Vec<SymMatrix>,
    pub gram: Mat,
}

impl WeightData {
    /// Ambient dimension `n`.
    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Number of generators `m`.
    pub fn abelian_dim(&self) -> usize {
        self.abelian_basis.len()
    }

    /// Pairing `a_i(xi)` of weight `i` against `xi` in generator coordinates.
    pub fn weight_pairing(&self, i: usize, xi: &[f64]) -> f64 {
        dot(&self.weights[i], xi)
    }

    /// Coordinates of `x` against the eigenbasis.
    pub fn coords(&self, x: &[f64]) -> Vec<f64> {
        self.basis.tr_matvec(x)
    }

    /// Reassemble an ambient vector from eigenbasis coordinates.
    pub fn from_coords(&self, c: &[f64]) -> Vec<f64> {
        self.basis.matvec(c)
    }

    /// The element `sum_a xi[a] E_a` of the abelian algebra.
    pub fn abelian_element(&self, xi: &[f64]) -> SymMatrix {
        SymMatrix::combine(&self.abelian_basis, xi)
    }
}

// Deterministic "generic" combination coefficients: square roots of primes,
// rotated by recursion depth so a degenerate combination at one level is
// not reused at the next.
fn generic_coeffs(m: usize, depth: usize) -> Vec<f64> {
    const PRIMES: [f64; 16] =
        [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0, 31.0, 37.0, 41.0, 43.0, 47.0, 53.0];
    (0..m).map(|a| PRIMES[(a + depth) % PRIMES.len()].sqrt()).collect()
}

/// Restrict `g` to the span of columns `cols` of `q`: `B = Q^T g Q`.
fn restrict(g: &SymMatrix, q: &Mat, cols: &[usize]) -> SymMatrix {
    let k = cols.len();
    let mut b = Mat::zeros(k, k);
    let images: Vec<Vec<f64>> = cols.iter().map(|&c| g.apply(&q.col(c))).collect();
    for (bi, img) in images.iter().enumerate() {
        for (bj, &cj) in cols.iter().enumerate() {
            b[(bi, bj)] = dot(img, &q.col(cj));
        }
    }
    // Rayleigh-Ritz restriction of a symmetric operator is symmetric.
    for i in 0..k {
        for j in i + 1..k {
            let v = 0.5 * (b[(i, j)] + b[(j, i)]);
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
    }
    SymMatrix { mat: b }
}

/// Rotate the `cols` block of `q` by the `k x k` orthogonal matrix `r`.
fn rotate_block(q: &mut Mat, cols: &[usize], r: &Mat) {
    let n = q.nrows();
    let k = cols.len();
    let mut new_cols = vec![vec![0.0; n]; k];
    for (j, nc) in new_cols.iter_mut().enumerate() {
        for (i, &ci) in cols.iter().enumerate() {
            axpy(r[(i, j)], &q.col(ci), nc);
        }
    }
    for (j, &cj) in cols.iter().enumerate() {
        q.set_col(cj, &new_cols[j]);
    }
}

/// Simultaneously diagonalize a commuting family of symmetric generators.
///
/// `comm_tol` bounds the allowed relative commutator: the family must
/// satisfy `|[E_a, E_b]| <= comm_tol * |E_a| * |E_b|`. Strategy: split the
/// space by a deterministic generic combination of the generators, then
/// refine every unresolved block against each generator in turn until all
/// restrictions are scalar. The recursion repairs any accidental eigenvalue
/// collision of the combination.
pub fn simultaneous_diagonalize(
    gens: &[SymMatrix],
    comm_tol: f64,
) -> Result<WeightData, LinalgError> {
    if gens.is_empty() {
        return Err(LinalgError::DegenerateGenerators);
    }
    let n = gens[0].n();
    for g in gens {
        if g.n() != n {
            return Err(LinalgError::DimensionMismatch { expected: n, got: g.n() });
        }
    }
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            let bound = comm_tol * gens[i].frobenius() * gens[j].frobenius();
            if commutator_norm(&gens[i], &gens[j]) > bound.max(1e-300) {
                return Err(LinalgError::NotCommuting { i, j });
            }
        }
    }

    let m = gens.len();
    let mut gram = Mat::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            gram[(a, b)] = gens[a].trace_pairing(&gens[b]);
        }
    }
    let gram_eig = eigh_symmetric(&SymMatrix { mat: gram.clone() }, EIG_OFF_TOL);
    let gram_max = gram_eig.values[0].max(1e-300);
    if gram_eig.values[m - 1] <= 1e-12 * gram_max {
        return Err(LinalgError::DegenerateGenerators);
    }

    // Work queue of unresolved column blocks of the accumulating basis.
    let mut q = Mat::identity(n);
    let mut queue: Vec<(Vec<usize>, usize)> = vec![((0..n).collect(), 0)];
    while let Some((cols, depth)) = queue.pop() {
        if cols.len() <= 1 {
            continue;
        }
        let mut split = None;
        if m > 1 {
            let combo = SymMatrix::combine(gens, &generic_coeffs(m, depth));
            let eig = eigh_symmetric(&restrict(&combo, &q, &cols), EIG_OFF_TOL);
            if eig.clusters.len() > 1 {
                split = Some(eig);
            }
        }
        if split.is_none() {
            for g in gens {
                let eig = eigh_symmetric(&restrict(g, &q, &cols), EIG_OFF_TOL);
                if eig.clusters.len() > 1 {
                    split = Some(eig);
                    break;
                }
            }
        }
        match split {
            Some(eig) => {
                rotate_block(&mut q, &cols, &eig.vectors);
                for cluster in &eig.clusters {
                    let child: Vec<usize> = cluster.iter().map(|&i| cols[i]).collect();
                    queue.push((child, depth + 1));
                }
            }
            // Every generator is scalar on this block: any orthonormal
            // basis of it consists of common eigenvectors.
            None => {}
        }
    }

    // Weights, then the canonical order: rows sorted lexicographically
    // descending with a dust-tolerant bucket rounding.
    let mut weights: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let v = q.col(i);
        weights.push(gens.iter().map(|g| dot(&g.apply(&v), &v)).collect());
    }
    let wscale = weights.iter().flatten().fold(0.0f64, |mx, w| mx.max(w.abs()));
    let bucket = (1e-8 * wscale).max(1e-300);
    let keys: Vec<Vec<i64>> = weights
        .iter()
        .map(|row| row.iter().map(|w| (w / bucket).round() as i64).collect())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| keys[j].cmp(&keys[i]).then(i.cmp(&j)));

    let mut basis = Mat::zeros(n, n);
    let mut sorted_weights = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = q.col(src);
        if let Some(first) = col.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                for x in &mut col {
                    *x = -*x;
                }
            }
        }
        basis.set_col(dst, &col);
        sorted_weights.push(weights[src].clone());
    }

    // Reconstruction residual guards the whole downstream pipeline: if it
    // fails, the family was not simultaneously diagonalizable to tolerance.
    for (a, g) in gens.iter().enumerate() {
        let mut recon = Mat::zeros(n, n);
        for i in 0..n {
            let v = basis.col(i);
            let w = sorted_weights[i][a];
            for r in 0..n {
                for c in 0..n {
                    recon[(r, c)] += w * v[r] * v[c];
                }
            }
        }
        let resid = recon.sub(g.mat()).frobenius();
        if resid > WEIGHT_RESIDUAL_TOL * g.frobenius().max(1e-300) {
            return Err(LinalgError::NotCommuting { i: a, j: a });
        }
    }

    Ok(WeightData { basis, weights: sorted_weights, abelian_basis: gens.to_vec(), gram })
}

/// Evaluate `exp(t xi) x` through the weight data, with `xi` given in
/// generator coordinates.
pub fn exp_action(
    w: &WeightData,
    xi: &[f64],
    t: f64,
    x: &[f64],
) -> Result<Vec<f64>, LinalgError> {
    if xi.len() != w.abelian_dim() {
        return Err(LinalgError::DimensionMismatch { expected: w.abelian_dim(), got: xi.len() });
    }
    if x.len() != w.dim() {
        return Err(LinalgError::DimensionMismatch { expected: w.dim(), got: x.len() });
    }
    let c = w.coords(x);
    let n = w.dim();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let factor = (t * w.weight_pairing(i, xi)).exp() * c[i];
        if factor != 0.0 {
            axpy(factor, &w.basis.col(i), &mut out);
        }
    }
    Ok(out)
}
