//! Orbit flows and moment inversion.
//!
//! Three ways of moving along an orbit toward a distinguished point: a
//! damped Newton solve for the group element realizing a prescribed moment
//! value, exact one-parameter limits by component zeroing, and the negative
//! gradient flow of the moment norm square on the projective sphere. The
//! minimum-norm query cross-checks the flow against convex geometry.

use crate::convexgeom::{GeneratedCone, GeneratedPolytope, MembershipMode};
use crate::linalg::{axpy, dot, eigh_symmetric, norm, solve_dense, Mat, SymMatrix, EIG_OFF_TOL};
use crate::repmodel::{KnVariant, ProjPoint, RepError, Representation, SUPPORT_TOL};
use thiserror::Error;

/// Default integrator step.
pub const DEFAULT_DT: f64 = 0.01;

/// Default integration horizon.
pub const DEFAULT_T_MAX: f64 = 200.0;

/// Default gradient-norm termination threshold.
pub const DEFAULT_STOP_TOL: f64 = 1e-10;

/// Rank cutoff for splitting off the stabilizer subalgebra.
pub const STABILIZER_RANK_TOL: f64 = 1e-10;

/// Newton iteration cap; the objective is a strictly convex exhaustion on
/// the complement of the stabilizer, so hitting this signals bad input.
pub const MAX_NEWTON_ITERS: usize = 100;

/// Per-step slack allowed on the energy before a step is rejected.
const MONOTONE_SLACK: f64 = 1e-13;

/// Halvings of the step size attempted before giving up on a step.
const MAX_HALVINGS: u32 = 20;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Convex(#[from] crate::convexgeom::ConvexError),
    #[error("target moment value lies outside the open image cone")]
    TargetNotInRelint,
    #[error("newton stalled at residual {} after {} iterations", best.residual, best.iterations)]
    MaxIterations { best: NewtonResult },
    #[error("energy increased by {increase:.3e} at t = {time:.4} despite step halving")]
    NonMonotone { time: f64, increase: f64 },
    #[error("direction is zero")]
    ZeroDirection,
}

/// Outcome of a moment inversion.
///
/// `xi` is expressed in abelian generator coordinates and lies in the
/// orthogonal complement of the stabilizer directions; `residual` is the
/// Euclidean distance between the achieved and requested moment values.
#[derive(Debug, Clone)]
pub struct NewtonResult {
    pub xi: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

// ── moment inversion ─────────────────────────────────────────────────────

/// Objective data for one Newton step: value, full-space gradient, and
/// full-space Hessian of `Psi(x, exp xi) - <c, xi>`.
struct NewtonEval {
    value: f64,
    grad: Vec<f64>,
    hess: Mat,
}

fn newton_eval(
    sq: &[f64],
    rows: &[&[f64]],
    c: &[f64],
    xi: &[f64],
    variant: KnVariant,
) -> NewtonEval {
    let m = c.len();
    let pair: Vec<f64> = rows.iter().map(|r| dot(r, xi)).collect();
    let mut grad = vec![0.0; m];
    let mut hess = Mat::zeros(m, m);
    let value;
    match variant {
        KnVariant::Linear => {
            let mut val = 0.0;
            for ((&s, &p), r) in sq.iter().zip(&pair).zip(rows) {
                let e = (2.0 * p).exp();
                val += 0.5 * s * (e - 1.0);
                let w = s * e;
                for a in 0..m {
                    grad[a] += w * r[a];
                    for b in 0..m {
                        hess[(a, b)] += 2.0 * w * r[a] * r[b];
                    }
                }
            }
            value = val - dot(c, xi);
        }
        KnVariant::Projective => {
            // Shifted softmax keeps every exponent non-positive.
            let shift = sq
                .iter()
                .zip(&pair)
                .map(|(&s, &p)| 2.0 * p + s.ln())
                .fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            let mut q = vec![0.0; sq.len()];
            for (i, (&s, &p)) in sq.iter().zip(&pair).enumerate() {
                q[i] = (2.0 * p + s.ln() - shift).exp();
                total += q[i];
            }
            let mut mu = vec![0.0; m];
            for (&qi, r) in q.iter().zip(rows) {
                let w = qi / total;
                for a in 0..m {
                    mu[a] += w * r[a];
                    for b in 0..m {
                        hess[(a, b)] += 2.0 * w * r[a] * r[b];
                    }
                }
            }
            for a in 0..m {
                grad[a] = mu[a] - c[a];
                for b in 0..m {
                    hess[(a, b)] -= 2.0 * mu[a] * mu[b];
                }
            }
            value = 0.5 * (shift + total.ln()) - dot(c, xi);
            return NewtonEval { value, grad, hess };
        }
    }
    for a in 0..m {
        grad[a] -= c[a];
    }
    NewtonEval { value, grad, hess }
}

/// Objective value alone, for line-search probes.
fn newton_value(sq: &[f64], rows: &[&[f64]], c: &[f64], xi: &[f64], variant: KnVariant) -> f64 {
    match variant {
        KnVariant::Linear => {
            let mut val = 0.0;
            for (&s, r) in sq.iter().zip(rows) {
                val += 0.5 * s * ((2.0 * dot(r, xi)).exp() - 1.0);
            }
            val - dot(c, xi)
        }
        KnVariant::Projective => {
            let shift = sq
                .iter()
                .zip(rows)
                .map(|(&s, r)| 2.0 * dot(r, xi) + s.ln())
                .fold(f64::NEG_INFINITY, f64::max);
            let total: f64 = sq
                .iter()
                .zip(rows)
                .map(|(&s, r)| (2.0 * dot(r, xi) + s.ln() - shift).exp())
                .sum();
            0.5 * (shift + total.ln()) - dot(c, xi)
        }
    }
}

/// Orthonormal basis of the complement of the stabilizer directions: the
/// row space of the given functionals, split off by an eigendecomposition
/// of their normal matrix at relative tolerance [`STABILIZER_RANK_TOL`].
fn stabilizer_complement(rows: &[Vec<f64>], m: usize) -> Vec<Vec<f64>> {
    let mut normal = SymMatrix::zeros(m);
    let mut entries = vec![0.0; m * m];
    for r in rows {
        for a in 0..m {
            for b in 0..m {
                entries[a * m + b] += r[a] * r[b];
            }
        }
    }
    if let Ok(s) = SymMatrix::new(m, entries) {
        normal = s;
    }
    let eig = eigh_symmetric(&normal, EIG_OFF_TOL);
    let lead = eig.values.first().copied().unwrap_or(0.0).max(1.0);
    (0..m)
        .filter(|&j| eig.values[j] > STABILIZER_RANK_TOL * lead)
        .map(|j| eig.vectors.col(j))
        .collect()
}

/// Finds `xi` orthogonal to the stabilizer with moment value `c` at
/// `exp(xi) x`, by damped Newton on the convex potential
/// `Psi(x, exp xi) - <c, xi>`. The target must lie in the relative
/// interior of the moment image (cone for the linear variant, weight
/// polytope for the projective one); convexity then guarantees a unique
/// minimizer and global convergence.
pub fn invert_moment(
    rep: &Representation,
    x: &[f64],
    c: &[f64],
    variant: KnVariant,
    tol: f64,
) -> Result<NewtonResult, FlowError> {
    let m = rep.abelian_dim();
    if c.len() != m {
        return Err(RepError::DimensionMismatch { expected: m, got: c.len() }.into());
    }
    let supp = rep.support_of(x, SUPPORT_TOL)?;
    if supp.is_empty() {
        return Err(RepError::ZeroVector.into());
    }
    let rows: Vec<Vec<f64>> = supp.indices.iter().map(|&i| rep.weights()[i].clone()).collect();
    let inside = match variant {
        KnVariant::Linear => {
            GeneratedCone::new(rows.clone())?.membership(c, MembershipMode::Relint)?.member
        }
        KnVariant::Projective => {
            GeneratedPolytope::new(rows.clone())?.membership(c, MembershipMode::Relint)?.member
        }
    };
    if !inside {
        return Err(FlowError::TargetNotInRelint);
    }

    let sq: Vec<f64> = supp.coords.iter().map(|a| a * a).collect();
    let row_refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    // Stabilizer directions pair to zero with every supported weight
    // (after recentering in the projective case), so the objective is
    // flat along them; Newton runs in the complement.
    let stab_rows: Vec<Vec<f64>> = match variant {
        KnVariant::Linear => rows.clone(),
        KnVariant::Projective => {
            rows.iter().map(|r| r.iter().zip(&rows[0]).map(|(a, b)| a - b).collect()).collect()
        }
    };
    let basis = stabilizer_complement(&stab_rows, m);

    let mut xi = vec![0.0; m];
    let mut best = NewtonResult { xi: xi.clone(), iterations: 0, residual: f64::INFINITY, converged: false };
    for iter in 0..=MAX_NEWTON_ITERS {
        let eval = newton_eval(&sq, &row_refs, c, &xi, variant);
        let residual = norm(&eval.grad);
        if residual < best.residual {
            best = NewtonResult { xi: xi.clone(), iterations: iter, residual, converged: false };
        }
        if residual <= tol {
            return Ok(NewtonResult { xi, iterations: iter, residual, converged: true });
        }
        if basis.is_empty() || iter == MAX_NEWTON_ITERS {
            break;
        }
        let k = basis.len();
        let grad_z: Vec<f64> = basis.iter().map(|b| dot(&eval.grad, b)).collect();
        let mut hess_z: Vec<Vec<f64>> = vec![vec![0.0; k]; k];
        for (r, br) in basis.iter().enumerate() {
            let hb = eval.hess.matvec(br);
            for (s, bs) in basis.iter().enumerate() {
                hess_z[r][s] = dot(bs, &hb);
            }
            hess_z[r][r] += 1e-12;
        }
        let rhs: Vec<f64> = grad_z.iter().map(|g| -g).collect();
        let mut dz = solve_dense(&Mat::from_rows(&hess_z), &rhs)
            .unwrap_or_else(|| rhs.clone());
        let mut slope = dot(&grad_z, &dz);
        if slope >= 0.0 {
            dz = rhs.clone();
            slope = -dot(&grad_z, &grad_z);
        }
        // In the quadratic basin the energy decrease falls below float
        // resolution, so a value-based line search cannot certify the
        // step; the undamped Newton step is safe there.
        if slope.abs() <= 1e-13 * (1.0 + eval.value.abs()) {
            for (b, &d) in basis.iter().zip(&dz) {
                axpy(d, b, &mut xi);
            }
            continue;
        }
        // Armijo backtracking; exp overflow in a probe shows up as an
        // infinite value and simply rejects the step.
        let mut step = 1.0;
        let mut moved = false;
        while step > 1e-18 {
            let mut cand = xi.clone();
            for (b, &d) in basis.iter().zip(&dz) {
                axpy(step * d, b, &mut cand);
            }
            let v = newton_value(&sq, &row_refs, c, &cand, variant);
            if v <= eval.value + 1e-4 * step * slope {
                xi = cand;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Err(FlowError::MaxIterations { best })
}

// ── exact one-parameter limits ───────────────────────────────────────────

/// Limit of a projective point under a one-parameter subgroup, with the
/// 1-based rank of the surviving weight level among all distinct levels of
/// the direction (top level first).
#[derive(Debug, Clone)]
pub struct OrbitLimit {
    pub stratum: usize,
    pub limit: ProjPoint,
    /// Weight level of the limit against the direction.
    pub level: f64,
    /// Projective distance to the numerically integrated point at t = 40.
    pub crosscheck: f64,
}

/// Computes `lim exp(t xi) p` exactly: coordinates pairing strictly below
/// the maximal level on the support are zeroed, everything else is kept.
/// The numeric cross-check integrates the normalized direction to t = 40
/// with a shifted exponential so no overflow can occur.
pub fn projective_limit(
    rep: &Representation,
    p: &ProjPoint,
    xi: &[f64],
) -> Result<OrbitLimit, FlowError> {
    let s = norm(xi);
    if !(s > 0.0) {
        return Err(FlowError::ZeroDirection);
    }
    let lam: Vec<f64> = rep.weights().iter().map(|r| dot(r, xi)).collect();
    let scale = lam.iter().fold(0.0f64, |acc, l| acc.max(l.abs())).max(1.0);
    let level_tol = 1e-9 * scale;

    let supp = rep.support_of(p.coords(), SUPPORT_TOL)?;
    let lmax = supp.indices.iter().map(|&i| lam[i]).fold(f64::NEG_INFINITY, f64::max);

    let coords = rep.coords(p.coords())?;
    let mut kept = vec![0.0; rep.dim()];
    for &i in &supp.indices {
        if lam[i] >= lmax - level_tol {
            kept[i] = coords[i];
        }
    }
    let limit = ProjPoint::new(rep.from_coords(&kept)?)?;

    // Rank of the limit level among the distinct levels, descending.
    let mut levels = lam.clone();
    levels.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut stratum = 0;
    let mut prev = f64::INFINITY;
    for &l in &levels {
        if prev - l > level_tol {
            stratum += 1;
            prev = l;
        }
        if (l - lmax).abs() <= level_tol {
            break;
        }
    }

    let mut flowed = vec![0.0; rep.dim()];
    for &i in &supp.indices {
        flowed[i] = coords[i] * (40.0 * (lam[i] - lmax) / s).exp();
    }
    let numeric = ProjPoint::new(rep.from_coords(&flowed)?)?;
    let crosscheck = numeric.distance(&limit);
    debug_assert!(crosscheck <= 1e-6, "component zeroing disagrees with integration");

    Ok(OrbitLimit { stratum, limit, level: lmax, crosscheck })
}

// ── gradient flow of the moment norm square ──────────────────────────────

/// Integration controls for [`norm_square_flow`].
#[derive(Debug, Clone)]
pub struct FlowOpts {
    pub dt: f64,
    pub t_max: f64,
    pub stop_tol: f64,
    /// Restrict the flow to the abelian directions even when the full
    /// generator family is available.
    pub abelian_only: bool,
    /// Co-integrate the group lift and record its consistency error.
    pub with_lift: bool,
}

impl Default for FlowOpts {
    fn default() -> Self {
        FlowOpts {
            dt: DEFAULT_DT,
            t_max: DEFAULT_T_MAX,
            stop_tol: DEFAULT_STOP_TOL,
            abelian_only: false,
            with_lift: false,
        }
    }
}

/// A completed flow run. `f_values` is non-increasing up to a per-step
/// slack of `1e-13 * max(1, |f|)`; `grad_norms` ends below the stop
/// tolerance exactly when the run converged before the horizon.
#[derive(Debug, Clone)]
pub struct FlowTrace {
    pub times: Vec<f64>,
    pub points: Vec<ProjPoint>,
    pub f_values: Vec<f64>,
    pub grad_norms: Vec<f64>,
    pub limit: ProjPoint,
    pub limit_mu_norm: f64,
    /// Fitted exponent of the tail distance to the limit, when the tail
    /// has enough resolvable points.
    pub decay_estimate: Option<f64>,
    /// Largest projective distance between the lifted start and the
    /// integrated point, when the lift was requested.
    pub lift_error: Option<f64>,
    /// Vector norms of the lifted start along the run.
    pub lift_norms: Option<Vec<f64>>,
}

/// Velocity field, energy, and lift generator at a sphere point.
struct FlowField<'a> {
    gens: Vec<&'a SymMatrix>,
}

impl FlowField<'_> {
    fn dual(&self, x: &[f64]) -> Vec<f64> {
        let nsq: f64 = dot(x, x);
        self.gens.iter().map(|e| dot(&e.apply(x), x) / nsq).collect()
    }

    fn energy(&self, x: &[f64]) -> f64 {
        0.5 * self.dual(x).iter().map(|d| d * d).sum::<f64>()
    }

    /// Negative gradient, tangent to the sphere at `x`. Used for the
    /// termination test and the recorded gradient norms.
    fn velocity(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dual(x);
        let mut mx = vec![0.0; x.len()];
        for (coef, e) in d.iter().zip(&self.gens) {
            axpy(*coef, &e.apply(x), &mut mx);
        }
        let radial = dot(&mx, x) / dot(x, x);
        let mut v = mx;
        axpy(-radial, x, &mut v);
        for a in &mut v {
            *a = -*a;
        }
        v
    }

    /// The un-projected linear field `-M(x) x`. Integration uses this form
    /// so the point and the lift share one transition operator per step:
    /// the radial component only rescales the representative, and the
    /// per-step renormalization removes it again. Integrating the tangent
    /// field instead would commit different truncation errors in the point
    /// and the lift and let them drift apart projectively.
    fn linear_velocity(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dual(x);
        let mut mx = vec![0.0; x.len()];
        for (coef, e) in d.iter().zip(&self.gens) {
            axpy(*coef, &e.apply(x), &mut mx);
        }
        for a in &mut mx {
            *a = -*a;
        }
        mx
    }

    /// Moment matrix at `x`, driving the lift equation `H' = -M H`.
    fn moment_matrix(&self, x: &[f64]) -> Mat {
        let d = self.dual(x);
        let n = x.len();
        let mut m = Mat::zeros(n, n);
        for (coef, e) in d.iter().zip(&self.gens) {
            for r in 0..n {
                for c in 0..n {
                    m[(r, c)] += coef * e.mat()[(r, c)];
                }
            }
        }
        m
    }
}

fn normalize(x: &mut [f64]) {
    let n = norm(x);
    if n > 0.0 {
        for a in x.iter_mut() {
            *a /= n;
        }
    }
}

/// One classical RK4 step of the point (and optionally the lift) over `h`.
fn rk4_step(field: &FlowField, x: &[f64], lift: Option<&Mat>, h: f64) -> (Vec<f64>, Option<Mat>) {
    let stage = |base: &[f64], k: &[f64], w: f64| -> Vec<f64> {
        let mut y = base.to_vec();
        axpy(w, k, &mut y);
        y
    };
    let k1 = field.linear_velocity(x);
    let x2 = stage(x, &k1, 0.5 * h);
    let k2 = field.linear_velocity(&x2);
    let x3 = stage(x, &k2, 0.5 * h);
    let k3 = field.linear_velocity(&x3);
    let x4 = stage(x, &k3, h);
    let k4 = field.linear_velocity(&x4);

    let mut out = x.to_vec();
    axpy(h / 6.0, &k1, &mut out);
    axpy(h / 3.0, &k2, &mut out);
    axpy(h / 3.0, &k3, &mut out);
    axpy(h / 6.0, &k4, &mut out);
    normalize(&mut out);

    let lifted = lift.map(|hm| {
        let l1 = field.moment_matrix(x).matmul(hm).scaled(-1.0);
        let l2 = field.moment_matrix(&x2).matmul(&hm.add(&l1.scaled(0.5 * h))).scaled(-1.0);
        let l3 = field.moment_matrix(&x3).matmul(&hm.add(&l2.scaled(0.5 * h))).scaled(-1.0);
        let l4 = field.moment_matrix(&x4).matmul(&hm.add(&l3.scaled(h))).scaled(-1.0);
        hm.add(&l1.scaled(h / 6.0))
            .add(&l2.scaled(h / 3.0))
            .add(&l3.scaled(h / 3.0))
            .add(&l4.scaled(h / 6.0))
    });
    (out, lifted)
}

/// Integrates the negative gradient flow of half the squared moment norm,
/// starting at `y`, on the unit sphere model of projective space. Uses the
/// full generator family when present (abelian directions first), falling
/// back to the abelian flow otherwise; each accepted step renormalizes the
/// point, and a step that increases the energy is retried at half size.
pub fn norm_square_flow(
    rep: &Representation,
    y: &ProjPoint,
    opts: &FlowOpts,
) -> Result<FlowTrace, FlowError> {
    let gens: Vec<&SymMatrix> = if !opts.abelian_only && rep.p_basis().is_some() {
        rep.p_basis().unwrap().iter().collect()
    } else {
        rep.abelian_basis().iter().collect()
    };
    let field = FlowField { gens };

    let mut x = y.coords().to_vec();
    normalize(&mut x);
    let start = x.clone();
    let mut lift = opts.with_lift.then(|| Mat::identity(rep.dim()));

    let mut times = Vec::new();
    let mut points = Vec::new();
    let mut f_values = Vec::new();
    let mut grad_norms = Vec::new();
    let mut lift_norms = opts.with_lift.then(Vec::new);
    let mut lift_error = opts.with_lift.then(|| 0.0f64);

    let mut t = 0.0;
    let mut record = |t: f64,
                      x: &[f64],
                      f: f64,
                      g: f64,
                      lift: Option<&Mat>,
                      lift_norms: &mut Option<Vec<f64>>,
                      lift_error: &mut Option<f64>|
     -> Result<ProjPoint, FlowError> {
        let p = ProjPoint::new(x.to_vec())?;
        times.push(t);
        points.push(p.clone());
        f_values.push(f);
        grad_norms.push(g);
        if let Some(hm) = lift {
            let hy = hm.matvec(&start);
            let hy_norm = norm(&hy);
            lift_norms.as_mut().unwrap().push(hy_norm);
            if hy_norm > 1e-300 {
                let err = ProjPoint::new(hy)?.distance(&p);
                let slot = lift_error.as_mut().unwrap();
                *slot = slot.max(err);
            }
        }
        Ok(p)
    };

    let mut f = field.energy(&x);
    let mut g = norm(&field.velocity(&x));
    let mut last =
        record(t, &x, f, g, lift.as_ref(), &mut lift_norms, &mut lift_error)?;

    while g > opts.stop_tol && t < opts.t_max {
        let mut h = opts.dt.min(opts.t_max - t);
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let (cand, cand_lift) = rk4_step(&field, &x, lift.as_ref(), h);
            let f_new = field.energy(&cand);
            if f_new <= f + MONOTONE_SLACK * f.abs().max(1.0) {
                x = cand;
                lift = cand_lift;
                t += h;
                f = f_new;
                accepted = true;
                break;
            }
            h *= 0.5;
        }
        if !accepted {
            let (cand, _) = rk4_step(&field, &x, None, h);
            let increase = field.energy(&cand) - f;
            return Err(FlowError::NonMonotone { time: t, increase });
        }
        g = norm(&field.velocity(&x));
        last = record(t, &x, f, g, lift.as_ref(), &mut lift_norms, &mut lift_error)?;
    }

    let limit = last.clone();
    let limit_mu_norm = norm(&field.dual(limit.coords()));
    let decay_estimate = fit_decay(&times, &points, &limit);

    Ok(FlowTrace {
        times,
        points,
        f_values,
        grad_norms,
        limit,
        limit_mu_norm,
        decay_estimate,
        lift_error,
        lift_norms,
    })
}

/// Least-squares slope of log distance against log time over the trailing
/// half of a trace; `None` when fewer than three tail points resolve above
/// the distance floor.
fn fit_decay(times: &[f64], points: &[ProjPoint], limit: &ProjPoint) -> Option<f64> {
    let t_end = *times.last()?;
    let tail: Vec<(f64, f64)> = times
        .iter()
        .zip(points)
        .filter(|(t, _)| **t >= 0.5 * t_end && **t > 0.0)
        .map(|(t, p)| (*t, p.distance(limit)))
        .filter(|(_, d)| *d > 1e-12)
        .map(|(t, d)| (t.ln(), d.ln()))
        .collect();
    if tail.len() < 3 {
        return None;
    }
    let n = tail.len() as f64;
    let mx = tail.iter().map(|(a, _)| a).sum::<f64>() / n;
    let my = tail.iter().map(|(_, b)| b).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (a, b) in &tail {
        cov += (a - mx) * (b - my);
        var += (a - mx) * (a - mx);
    }
    if var == 0.0 {
        return None;
    }
    Some(-cov / var)
}

// ── minimum norm over the abelian closure ────────────────────────────────

/// Two independent computations of the smallest moment norm over the
/// abelian orbit closure: the min-norm point of the support weight
/// polytope, and the limit norm of the abelian gradient flow.
#[derive(Debug, Clone)]
pub struct MinNormReport {
    /// Agreed value (the convex-geometric one; exact up to LP arithmetic).
    pub value: f64,
    pub dual_value: f64,
    pub flow_value: f64,
    pub discrepancy: f64,
    /// Whether the two methods agree to `1e-4`.
    pub ok: bool,
    /// Closest point of the weight polytope to the origin.
    pub minimizer: Vec<f64>,
    /// Flow limit realizing the infimum.
    pub limit: ProjPoint,
}

/// Computes `inf |mu|` over the closure of the abelian orbit of `p` by the
/// polytope method and by the flow, reporting both and their discrepancy.
pub fn orbit_min_norm(rep: &Representation, p: &ProjPoint) -> Result<MinNormReport, FlowError> {
    let supp = rep.support_of(p.coords(), SUPPORT_TOL)?;
    let rows: Vec<Vec<f64>> = supp.indices.iter().map(|&i| rep.weights()[i].clone()).collect();
    let poly = GeneratedPolytope::new(rows)?;
    let mn = poly.min_norm_point();
    let dual_value = mn.norm();

    let opts = FlowOpts { abelian_only: true, ..FlowOpts::default() };
    let trace = norm_square_flow(rep, p, &opts)?;
    let flow_value = trace.limit_mu_norm;

    let discrepancy = (dual_value - flow_value).abs();
    Ok(MinNormReport {
        value: dual_value,
        dual_value,
        flow_value,
        discrepancy,
        ok: discrepancy <= 1e-4,
        minimizer: mn.point,
        limit: trace.limit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repmodel::gallery;

    fn gl2() -> Representation {
        gallery::build("torus_gl", &[2]).unwrap()
    }

    fn sl2() -> Representation {
        gallery::build("torus_sl", &[2]).unwrap()
    }

    fn quartics() -> Representation {
        gallery::build("sl2_binary_forms", &[4]).unwrap()
    }

    #[test]
    fn inversion_matches_the_closed_form() {
        let rep = gl2();
        let r = invert_moment(&rep, &[1.0, 1.0], &[2.0, 3.0], KnVariant::Linear, 1e-10).unwrap();
        assert!(r.converged && r.residual <= 1e-10);
        assert!((r.xi[0] - 0.5 * 2.0f64.ln()).abs() < 1e-8);
        assert!((r.xi[1] - 0.5 * 3.0f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn inversion_at_the_target_is_immediate() {
        let rep = gl2();
        let x = [1.5, -0.5];
        let c = rep.moment(&x).unwrap();
        let r = invert_moment(&rep, &x, &c, KnVariant::Linear, 1e-10).unwrap();
        assert!(r.converged && r.iterations == 0);
        assert!(norm(&r.xi) == 0.0);
    }

    #[test]
    fn projective_inversion_balances_the_point() {
        let rep = sl2();
        let r = invert_moment(&rep, &[2.0, 1.0], &[0.0], KnVariant::Projective, 1e-10).unwrap();
        assert!(r.converged);
        assert!((r.xi[0] - 0.5 * 0.5f64.ln()).abs() < 1e-8);
        let moved = rep.act(&r.xi, 1.0, &[2.0, 1.0]).unwrap();
        let mu = rep.moment_projective(&ProjPoint::new(moved).unwrap()).unwrap();
        assert!(mu[0].abs() < 1e-9);
    }

    #[test]
    fn targets_on_the_image_boundary_are_rejected() {
        let rep = gl2();
        for c in [[1.0, 0.0], [0.0, 0.0], [-1.0, -1.0]] {
            let err = invert_moment(&rep, &[1.0, 1.0], &c, KnVariant::Linear, 1e-10);
            assert!(matches!(err, Err(FlowError::TargetNotInRelint)));
        }
    }

    #[test]
    fn inversion_converges_across_the_open_cone() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let rep = quartics();
        let x = [0.3, 1.1, -0.7, 0.2, 0.9];
        let supp = rep.support_of(&x, SUPPORT_TOL).unwrap();
        for _ in 0..100 {
            // Random strictly positive combinations land in the open cone.
            let mut c = vec![0.0; rep.abelian_dim()];
            for &i in &supp.indices {
                let w: f64 = rng.gen_range(0.1..2.0);
                axpy(w, &rep.weights()[i], &mut c);
            }
            let r = invert_moment(&rep, &x, &c, KnVariant::Linear, 1e-8).unwrap();
            assert!(r.converged, "residual {}", r.residual);
            assert!(r.iterations <= 60, "took {} iterations", r.iterations);
        }
    }

    #[test]
    fn stabilized_directions_are_left_untouched() {
        // A point on the first axis is fixed by the second generator, so
        // the solve must not drift along that direction.
        let rep = gl2();
        let r = invert_moment(&rep, &[1.0, 0.0], &[2.0, 0.0], KnVariant::Linear, 1e-10).unwrap();
        assert!(r.converged);
        assert!((r.xi[0] - 0.5 * 2.0f64.ln()).abs() < 1e-8);
        assert!(r.xi[1].abs() < 1e-14);
    }

    #[test]
    fn one_parameter_limits_zero_the_low_levels() {
        let rep = sl2();
        let p = ProjPoint::new(vec![1.0, 1.0]).unwrap();
        let out = projective_limit(&rep, &p, &[1.0]).unwrap();
        assert_eq!(out.stratum, 1);
        assert!(out.limit.distance(&ProjPoint::new(vec![1.0, 0.0]).unwrap()) < 1e-12);
        assert!(out.crosscheck <= 1e-6);

        let p = ProjPoint::new(vec![2.0, 1.0]).unwrap();
        let out = projective_limit(&rep, &p, &[-1.0]).unwrap();
        assert!(out.limit.distance(&ProjPoint::new(vec![0.0, 1.0]).unwrap()) < 1e-12);
    }

    #[test]
    fn fixed_points_are_their_own_limit() {
        let rep = sl2();
        let p = ProjPoint::new(vec![1.0, 0.0]).unwrap();
        let out = projective_limit(&rep, &p, &[1.0]).unwrap();
        assert_eq!(out.stratum, 1);
        assert!(out.limit.distance(&p) == 0.0);
        let out = projective_limit(&rep, &p, &[-1.0]).unwrap();
        assert_eq!(out.stratum, 2, "bottom level of the flipped direction");
        assert!(out.limit.distance(&p) == 0.0);
    }

    #[test]
    fn zero_directions_are_rejected() {
        let rep = sl2();
        let p = ProjPoint::new(vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            projective_limit(&rep, &p, &[0.0]),
            Err(FlowError::ZeroDirection)
        ));
    }

    #[test]
    fn balanced_points_are_stationary() {
        let rep = sl2();
        let p = ProjPoint::new(vec![1.0, 1.0]).unwrap();
        let trace = norm_square_flow(&rep, &p, &FlowOpts::default()).unwrap();
        assert_eq!(trace.times.len(), 1);
        assert!(trace.limit_mu_norm <= 1e-12);
        assert!(trace.decay_estimate.is_none());
    }

    #[test]
    fn semistable_points_flow_to_a_balanced_limit() {
        let rep = sl2();
        let p = ProjPoint::new(vec![2.0, 1.0]).unwrap();
        let trace = norm_square_flow(&rep, &p, &FlowOpts::default()).unwrap();
        assert!(trace.limit_mu_norm <= 1e-6);
        let balanced = ProjPoint::new(vec![1.0, 1.0]).unwrap();
        assert!(trace.limit.distance(&balanced) < 1e-5);
        for w in trace.f_values.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0));
        }
        assert!(trace.decay_estimate.unwrap() > 0.0);
    }

    #[test]
    fn weight_vectors_are_fixed_points_of_the_flow() {
        let rep = sl2();
        let p = ProjPoint::new(vec![1.0, 0.0]).unwrap();
        let trace = norm_square_flow(&rep, &p, &FlowOpts::default()).unwrap();
        assert_eq!(trace.times.len(), 1);
        assert!((trace.limit_mu_norm - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn the_lift_tracks_the_flow() {
        let rep = quartics();
        // x^4 + x^3 y: unstable (both support weights positive) and not an
        // eigenvector of its own moment matrix, so the flow genuinely moves.
        let coeffs = gallery::form_coords(4, &[1.0, 1.0, 0.0, 0.0, 0.0]);
        let p = ProjPoint::new(coeffs).unwrap();
        let opts = FlowOpts { with_lift: true, t_max: 40.0, ..FlowOpts::default() };
        let trace = norm_square_flow(&rep, &p, &opts).unwrap();
        assert!(trace.lift_error.unwrap() <= 1e-6);
        // Unstable start: the lifted vector norm decays in the tail.
        let norms = trace.lift_norms.as_ref().unwrap();
        let half = norms.len() / 2;
        for w in norms[half..].windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9));
        }
        assert!(norms.last().unwrap() < &norms[half]);
    }

    #[test]
    fn lifted_norms_of_balanced_orbits_stay_bounded_below() {
        let rep = quartics();
        // x^4 + y^4 has support weights {4, -4}: the origin is interior.
        let coeffs = gallery::form_coords(4, &[1.0, 0.0, 0.0, 0.0, 1.0]);
        let p = ProjPoint::new(coeffs).unwrap();
        let opts =
            FlowOpts { with_lift: true, t_max: 40.0, abelian_only: true, ..FlowOpts::default() };
        let trace = norm_square_flow(&rep, &p, &opts).unwrap();
        assert!(trace.lift_error.unwrap() <= 1e-6);
        let norms = trace.lift_norms.as_ref().unwrap();
        assert!(norms.iter().all(|n| *n > 0.5), "min {:?}", norms.iter().cloned().fold(f64::INFINITY, f64::min));
    }

    #[test]
    fn min_norm_methods_agree() {
        let rep = sl2();
        let balanced = orbit_min_norm(&rep, &ProjPoint::new(vec![1.0, 1.0]).unwrap()).unwrap();
        assert!(balanced.ok && balanced.value <= 1e-9);
        let fixed = orbit_min_norm(&rep, &ProjPoint::new(vec![1.0, 0.0]).unwrap()).unwrap();
        assert!(fixed.ok && (fixed.value - 1.0).abs() <= 1e-9);

        let rep = quartics();
        let coeffs = gallery::form_coords(4, &[1.0, 0.0, 0.0, 0.0, 1.0]);
        let p = ProjPoint::new(coeffs).unwrap();
        let rpt = orbit_min_norm(&rep, &p).unwrap();
        assert!(rpt.ok, "discrepancy {}", rpt.discrepancy);
        assert!(rpt.value <= 1e-6);
    }
}
