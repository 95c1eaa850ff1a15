//! Dense two-phase simplex over a generic ordered-field scalar.
//!
//! Pivot selection uses Bland's rule throughout, so exact-rational runs
//! terminate without cycling and float runs inherit the same determinism.
//! Infeasible systems come back with a Farkas certificate extracted from
//! the phase-one duals.

use crate::scalar::Scalar;

/// Outcome of `minimize c^T x  s.t.  A x = b, x >= 0`.
#[derive(Debug, Clone)]
pub enum LpOutcome<T> {
    Optimal { x: Vec<T>, objective: T },
    /// `farkas` is a row vector `z` with `z^T A <= 0` componentwise and
    /// `z^T b > 0`, certifying that no feasible point exists.
    Infeasible { farkas: Vec<T> },
    Unbounded,
}

const MAX_PIVOTS: usize = 50_000;

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

struct Tableau<T> {
    /// `rows x (ncols + 1)`; the trailing column is the rhs.
    body: Vec<Vec<T>>,
    /// Reduced costs, length `ncols + 1`; the trailing entry is the
    /// negated objective value.
    cost: Vec<T>,
    basis: Vec<usize>,
    ncols: usize,
}

impl<T: Scalar> Tableau<T> {
    fn rhs(&self, r: usize) -> &T {
        &self.body[r][self.ncols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.body[r][c].clone();
        for v in self.body[r].iter_mut() {
            *v = v.clone() / piv.clone();
        }
        for i in 0..self.body.len() {
            if i == r {
                continue;
            }
            let f = self.body[i][c].clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..=self.ncols {
                let delta = f.clone() * self.body[r][j].clone();
                self.body[i][j] = self.body[i][j].clone() - delta;
            }
        }
        let f = self.cost[c].clone();
        if !f.is_zero() {
            for j in 0..=self.ncols {
                let delta = f.clone() * self.body[r][j].clone();
                self.cost[j] = self.cost[j].clone() - delta;
            }
        }
        self.basis[r] = c;
    }

    /// Run Bland-rule pivoting to optimality. Columns for which
    /// `allowed` returns false never enter the basis.
    fn optimize(&mut self, allowed: impl Fn(usize) -> bool) -> Result<(), LpStall> {
        for _ in 0..MAX_PIVOTS {
            // Entering: smallest index with reduced cost below -tol.
            let entering = (0..self.ncols)
                .find(|&j| allowed(j) && self.cost[j].is_negative_tol());
            let Some(c) = entering else { return Ok(()) };
            // Leaving: smallest ratio, ties by smallest basis variable.
            let mut best: Option<(usize, T)> = None;
            for r in 0..self.body.len() {
                if !self.body[r][c].is_positive_tol() {
                    continue;
                }
                let ratio = self.rhs(r).clone() / self.body[r][c].clone();
                best = match best {
                    None => Some((r, ratio)),
                    Some((br, bratio)) => {
                        if ratio < bratio
                            || (ratio == bratio && self.basis[r] < self.basis[br])
                        {
                            Some((r, ratio))
                        } else {
                            Some((br, bratio))
                        }
                    }
                };
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return Err(LpStall::Unbounded),
            }
        }
        Err(LpStall::IterationCap)
    }
}

enum LpStall {
    Unbounded,
    IterationCap,
}

/// Solve `min c^T x  s.t.  A x = b, x >= 0` with `a` given row-wise.
pub fn solve_lp<T: Scalar>(a: &[Vec<T>], b: &[T], c: &[T]) -> LpOutcome<T> {
    let m = a.len();
    let n = if m == 0 { c.len() } else { a[0].len() };
    debug_assert!(a.iter().all(|row| row.len() == n));
    debug_assert_eq!(b.len(), m);
    debug_assert_eq!(c.len(), n);

    // Phase one: flip rows to make the rhs nonnegative, append artificial
    // variables, and minimize their sum.
    let mut flip = vec![false; m];
    let mut body: Vec<Vec<T>> = Vec::with_capacity(m);
    for i in 0..m {
        let neg = b[i].is_negative();
        flip[i] = neg;
        let mut row: Vec<T> = a[i]
            .iter()
            .map(|v| if neg { -v.clone() } else { v.clone() })
            .collect();
        for k in 0..m {
            row.push(if k == i { T::one() } else { T::zero() });
        }
        row.push(if neg { -b[i].clone() } else { b[i].clone() });
        body.push(row);
    }
    let ncols = n + m;
    let mut cost = vec![T::zero(); ncols + 1];
    // Reduced costs of the artificial objective against the artificial basis.
    for j in 0..=ncols {
        let mut s = T::zero();
        for row in body.iter() {
            s = s + row[j].clone();
        }
        if j < n {
            cost[j] = -s;
        } else if j < ncols {
            cost[j] = T::one() - s;
        } else {
            cost[j] = -s;
        }
    }
    let mut tab = Tableau { body, cost, basis: (n..n + m).collect(), ncols };
    match tab.optimize(|_| true) {
        Ok(()) => {}
        Err(LpStall::Unbounded) => unreachable!("phase one objective is bounded below"),
        Err(LpStall::IterationCap) => panic!("simplex iteration cap hit in phase one"),
    }

    let phase1 = -tab.cost[ncols].clone();
    if phase1.is_positive_tol() {
        // Farkas certificate from the phase-one duals: the reduced cost of
        // artificial column i is 1 - y_i, and flipped rows flip the sign back.
        let farkas: Vec<T> = (0..m)
            .map(|i| {
                let yi = T::one() - tab.cost[n + i].clone();
                if flip[i] {
                    -yi
                } else {
                    yi
                }
            })
            .collect();
        return LpOutcome::Infeasible { farkas };
    }

    // Drive leftover artificials out of the basis; a row where no
    // structural pivot exists is redundant and gets dropped.
    let mut r = 0;
    while r < tab.body.len() {
        if tab.basis[r] >= n {
            let piv = (0..n).find(|&j| {
                tab.body[r][j].is_positive_tol() || tab.body[r][j].is_negative_tol()
            });
            match piv {
                Some(c) => tab.pivot(r, c),
                None => {
                    tab.body.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    // Phase two: real costs reduced against the current basis.
    let mut cost = vec![T::zero(); ncols + 1];
    for j in 0..=ncols {
        let mut s = T::zero();
        for (r, row) in tab.body.iter().enumerate() {
            let cb = if tab.basis[r] < n { c[tab.basis[r]].clone() } else { T::zero() };
            s = s + cb * row[j].clone();
        }
        let cj = if j < n { c[j].clone() } else { T::zero() };
        cost[j] = cj - s;
    }
    tab.cost = cost;
    match tab.optimize(|j| j < n) {
        Ok(()) => {}
        Err(LpStall::Unbounded) => return LpOutcome::Unbounded,
        Err(LpStall::IterationCap) => panic!("simplex iteration cap hit in phase two"),
    }

    let mut x = vec![T::zero(); n];
    for (r, &bv) in tab.basis.iter().enumerate() {
        if bv < n {
            x[bv] = tab.rhs(r).clone();
        }
    }
    let objective = dot(c, &x);
    LpOutcome::Optimal { x, objective }
}

/// Rank of a row set, by Gaussian elimination with max-abs pivoting.
/// Float mode treats entries within `feas_tol` of the row-set scale as zero.
pub fn rank<T: Scalar>(rows: &[Vec<T>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut m: Vec<Vec<T>> = rows.to_vec();
    let ncols = m[0].len();
    let scale = m
        .iter()
        .flatten()
        .map(|v| v.abs())
        .fold(T::zero(), |a, b| if b > a { b } else { a });
    if scale.is_zero() {
        return 0;
    }
    let floor = T::feas_tol() * scale;
    let mut rank = 0;
    let mut row = 0;
    for col in 0..ncols {
        let Some(piv) = (row..m.len())
            .filter(|&r| m[r][col].abs() > floor)
            .max_by(|&r1, &r2| m[r1][col].abs().partial_cmp(&m[r2][col].abs()).unwrap())
        else {
            continue;
        };
        m.swap(row, piv);
        for r in row + 1..m.len() {
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone() / m[row][col].clone();
            for cc in col..ncols {
                let delta = f.clone() * m[row][cc].clone();
                m[r][cc] = m[r][cc].clone() - delta;
            }
        }
        rank += 1;
        row += 1;
        if row == m.len() {
            break;
        }
    }
    rank
}

/// Solve a square linear system by Gaussian elimination with max-abs
/// pivoting. `None` when the matrix is singular at the scalar's tolerance.
pub fn solve_square<T: Scalar>(a: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    let n = a.len();
    if n == 0 {
        return Some(Vec::new());
    }
    debug_assert!(a.iter().all(|row| row.len() == n));
    let mut m: Vec<Vec<T>> = a.to_vec();
    let mut rhs: Vec<T> = b.to_vec();
    let scale = m
        .iter()
        .flatten()
        .map(|v| v.abs())
        .fold(T::zero(), |acc, v| if v > acc { v } else { acc });
    if scale.is_zero() {
        return None;
    }
    let floor = T::feas_tol() * scale.clone();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r1, &r2| m[r1][col].abs().partial_cmp(&m[r2][col].abs()).unwrap())?;
        if !(m[piv][col].abs() > floor) || m[piv][col].is_zero() {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone() / m[col][col].clone();
            for cc in col..n {
                let delta = f.clone() * m[col][cc].clone();
                m[r][cc] = m[r][cc].clone() - delta;
            }
            let delta = f * rhs[col].clone();
            rhs[r] = rhs[r].clone() - delta;
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let mut s = rhs[r].clone();
        for cc in r + 1..n {
            s = s - m[r][cc].clone() * x[cc].clone();
        }
        x[r] = s / m[r][r].clone();
    }
    Some(x)
}
