//! Dense convex quadratic programming for small force-distribution problems.
//!
//! Solves
//!
//! ```text
//!     minimize    1/2 x' W x + c' x        (W diagonal, positive)
//!     subject to  E x  = d
//!                 G x >= h
//! ```
//!
//! with a dual active-set method: starting from the unconstrained minimizer,
//! equality rows and then violated inequality rows are brought into the
//! active set one at a time, taking primal/dual steps and dropping blocking
//! constraints, until every constraint holds and every inequality multiplier
//! is nonnegative. Each subproblem is solved exactly, so the method
//! terminates in finitely many steps on strictly convex problems and the
//! final iterate satisfies the KKT conditions to machine accuracy.
//!
//! The implementation works in the scaled variable `y = W^(1/2) x`, where the
//! Hessian is the identity and projections reduce to thin-QR least squares
//! against the active constraint normals.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Tolerance below which a projected constraint normal counts as dependent.
const Z_TOL: f64 = 1e-10;
/// Feasibility tolerance on row-normalized constraints.
const FEAS_TOL: f64 = 1e-10;

/// Reference to one constraint row of a [`QpProblem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintRef {
    Equality(usize),
    Inequality(usize),
}

impl std::fmt::Display for ConstraintRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConstraintRef::Equality(i) => write!(f, "equality[{i}]"),
            ConstraintRef::Inequality(i) => write!(f, "inequality[{i}]"),
        }
    }
}

#[derive(Debug, Error)]
pub enum QpError {
    #[error(
        "problem is infeasible: cannot satisfy {adding} together with the active set {active:?}"
    )]
    Infeasible {
        adding: ConstraintRef,
        active: Vec<ConstraintRef>,
    },
    #[error("active-set iteration limit {0} exceeded")]
    IterationLimit(usize),
    #[error("malformed problem: {0}")]
    BadProblem(String),
}

/// Strictly convex QP with a diagonal Hessian.
#[derive(Debug, Clone)]
pub struct QpProblem {
    /// Diagonal of `W`; all entries must be positive.
    pub weights: DVector<f64>,
    /// Linear cost term `c`.
    pub linear: DVector<f64>,
    /// Equality rows `E x = d`.
    pub eq_matrix: DMatrix<f64>,
    pub eq_rhs: DVector<f64>,
    /// Inequality rows `G x >= h`.
    pub ineq_matrix: DMatrix<f64>,
    pub ineq_rhs: DVector<f64>,
}

impl QpProblem {
    /// Minimum-norm problem: zero linear term, unit weights.
    pub fn min_norm(
        n: usize,
        eq_matrix: DMatrix<f64>,
        eq_rhs: DVector<f64>,
        ineq_matrix: DMatrix<f64>,
        ineq_rhs: DVector<f64>,
    ) -> Self {
        QpProblem {
            weights: DVector::from_element(n, 1.0),
            linear: DVector::zeros(n),
            eq_matrix,
            eq_rhs,
            ineq_matrix,
            ineq_rhs,
        }
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.component_mul(&self.weights).dot(x) + self.linear.dot(x)
    }

    fn validate(&self) -> Result<(), QpError> {
        let n = self.weights.len();
        if self.linear.len() != n {
            return Err(QpError::BadProblem(format!(
                "linear term has length {}, expected {n}",
                self.linear.len()
            )));
        }
        if self.weights.iter().any(|w| !(*w > 0.0)) {
            return Err(QpError::BadProblem("weights must be positive".into()));
        }
        for (mat, rhs, name) in [
            (&self.eq_matrix, &self.eq_rhs, "equality"),
            (&self.ineq_matrix, &self.ineq_rhs, "inequality"),
        ] {
            if mat.nrows() != rhs.len() {
                return Err(QpError::BadProblem(format!(
                    "{name} matrix has {} rows but rhs has {}",
                    mat.nrows(),
                    rhs.len()
                )));
            }
            if mat.nrows() > 0 && mat.ncols() != n {
                return Err(QpError::BadProblem(format!(
                    "{name} matrix has {} columns, expected {n}",
                    mat.ncols()
                )));
            }
            if mat.iter().any(|v| !v.is_finite()) || rhs.iter().any(|v| !v.is_finite()) {
                return Err(QpError::BadProblem(format!(
                    "{name} rows contain non-finite values"
                )));
            }
        }
        Ok(())
    }
}

/// Solution with multipliers and a scaled KKT residual.
#[derive(Debug, Clone)]
pub struct QpSolution {
    pub x: DVector<f64>,
    /// Multipliers of the equality rows (free sign).
    pub eq_multipliers: DVector<f64>,
    /// Multipliers of the inequality rows (nonnegative; zero when inactive).
    pub ineq_multipliers: DVector<f64>,
    pub iterations: usize,
    /// Scaled max-norm KKT residual over stationarity, feasibility, and
    /// complementarity.
    pub kkt_residual: f64,
}

/// Active constraint set with an incrementally maintained thin QR factor of
/// the active normals: adds append a Gram–Schmidt column, removals restore
/// triangularity with Givens rotations. Projections and dual responses then
/// cost O(n q) per iteration instead of a fresh O(n q^2) factorization.
struct ActiveSet {
    /// Which rows are active, in insertion order.
    members: Vec<ConstraintRef>,
    /// Dual value per active row (in scaled-normalized units).
    duals: Vec<f64>,
    /// Orthonormal basis of the active-normal span (thin Q columns).
    q_cols: Vec<DVector<f64>>,
    /// Upper-triangular R, column-major; `r[j]` has length `j + 1`.
    r_cols: Vec<Vec<f64>>,
}

impl ActiveSet {
    fn new() -> Self {
        ActiveSet {
            members: Vec::new(),
            duals: Vec::new(),
            q_cols: Vec::new(),
            r_cols: Vec::new(),
        }
    }

    /// Component of `a` orthogonal to the active span, plus `Q^T a`.
    /// One re-orthogonalization pass keeps the basis clean.
    fn project(&self, a: &DVector<f64>) -> (DVector<f64>, Vec<f64>) {
        let mut w = a.clone();
        let mut coeffs = vec![0.0; self.q_cols.len()];
        for pass in 0..2 {
            for (j, q) in self.q_cols.iter().enumerate() {
                let c = q.dot(&w);
                coeffs[j] += c;
                w.axpy(-c, q, 1.0);
            }
            if pass == 0 && w.norm() > 0.5 * a.norm() {
                break;
            }
        }
        (w, coeffs)
    }

    /// Solves `R r = Q^T a` by back-substitution: the coefficients such that
    /// `N r` is the projection of `a` onto the active span.
    fn dual_response(&self, qta: &[f64]) -> Vec<f64> {
        let q = self.r_cols.len();
        let mut r = qta.to_vec();
        for j in (0..q).rev() {
            r[j] /= self.r_cols[j][j];
            let rj = r[j];
            for i in 0..j {
                r[i] -= self.r_cols[j][i] * rj;
            }
        }
        r
    }

    /// Appends an active constraint; `w` and `qta` come from [`project`].
    /// Returns false when the normal is numerically dependent.
    fn push(&mut self, member: ConstraintRef, dual: f64, w: DVector<f64>, qta: Vec<f64>) -> bool {
        let rho = w.norm();
        if rho <= Z_TOL {
            return false;
        }
        self.q_cols.push(w / rho);
        let mut col = qta;
        col.push(rho);
        self.r_cols.push(col);
        self.members.push(member);
        self.duals.push(dual);
        true
    }

    /// Drops active constraint `idx`, restoring the QR structure.
    fn remove(&mut self, idx: usize) {
        self.members.remove(idx);
        self.duals.remove(idx);
        self.r_cols.remove(idx);
        // Columns idx.. now have one subdiagonal entry each; rotate it away.
        for j in idx..self.r_cols.len() {
            let col = &mut self.r_cols[j];
            // col currently has length j + 2 (rows 0..=j+1).
            let (a, b) = (col[j], col[j + 1]);
            let h = a.hypot(b);
            let (c, s) = if h <= f64::MIN_POSITIVE {
                (1.0, 0.0)
            } else {
                (a / h, b / h)
            };
            col[j] = h;
            col.truncate(j + 1);
            // Apply the same rotation to the remaining columns of R...
            for later in self.r_cols.iter_mut().skip(j + 1) {
                let (x, y) = (later[j], later[j + 1]);
                later[j] = c * x + s * y;
                later[j + 1] = -s * x + c * y;
            }
            // ...and to the corresponding pair of Q columns.
            let (left, right) = self.q_cols.split_at_mut(j + 1);
            let qa = &mut left[j];
            let qb = &mut right[0];
            for i in 0..qa.len() {
                let (x, y) = (qa[i], qb[i]);
                qa[i] = c * x + s * y;
                qb[i] = -s * x + c * y;
            }
        }
        self.q_cols.pop();
    }
}

/// Solves the QP with the dual active-set method.
pub fn solve(problem: &QpProblem) -> Result<QpSolution, QpError> {
    problem.validate()?;
    let n = problem.weights.len();
    let n_eq = problem.eq_matrix.nrows();
    let n_ineq = problem.ineq_matrix.nrows();

    // Scale: y = W^(1/2) x; constraint rows become n W^(-1/2), then each row
    // is normalized to unit length (zero rows are degenerate and checked).
    let w_sqrt: DVector<f64> = problem.weights.map(f64::sqrt);
    let c_scaled: DVector<f64> =
        DVector::from_iterator(n, problem.linear.iter().zip(&w_sqrt).map(|(c, s)| c / s));

    let mut rows: Vec<(ConstraintRef, DVector<f64>, f64)> = Vec::with_capacity(n_eq + n_ineq);
    let mut scales = Vec::with_capacity(n_eq + n_ineq);
    for i in 0..n_eq {
        let mut r = DVector::from_iterator(
            n,
            problem
                .eq_matrix
                .row(i)
                .iter()
                .zip(&w_sqrt)
                .map(|(v, s)| v / s),
        );
        let nrm = r.norm();
        let mut b = problem.eq_rhs[i];
        if nrm <= f64::EPSILON {
            if b.abs() > FEAS_TOL {
                return Err(QpError::Infeasible {
                    adding: ConstraintRef::Equality(i),
                    active: vec![],
                });
            }
            scales.push(1.0);
            rows.push((ConstraintRef::Equality(i), r, 0.0));
            continue;
        }
        r /= nrm;
        b /= nrm;
        scales.push(nrm);
        rows.push((ConstraintRef::Equality(i), r, b));
    }
    for i in 0..n_ineq {
        let mut r = DVector::from_iterator(
            n,
            problem
                .ineq_matrix
                .row(i)
                .iter()
                .zip(&w_sqrt)
                .map(|(v, s)| v / s),
        );
        let nrm = r.norm();
        let mut b = problem.ineq_rhs[i];
        if nrm <= f64::EPSILON {
            if b > FEAS_TOL {
                return Err(QpError::Infeasible {
                    adding: ConstraintRef::Inequality(i),
                    active: vec![],
                });
            }
            scales.push(1.0);
            rows.push((ConstraintRef::Inequality(i), r, 0.0));
            continue;
        }
        r /= nrm;
        b /= nrm;
        scales.push(nrm);
        rows.push((ConstraintRef::Inequality(i), r, b));
    }

    let scale_hint = rows.iter().map(|(_, _, b)| b.abs()).fold(1.0f64, f64::max);
    let feas_tol = FEAS_TOL * scale_hint;

    let mut y: DVector<f64> = -&c_scaled;
    let mut active = ActiveSet::new();
    let mut iterations = 0usize;
    let iteration_cap = 100 * (n_eq + n_ineq + 2);

    // Flip signs recorded for equalities processed from the `>` side.
    let mut eq_flip = vec![1.0f64; n_eq];

    let bring_in = |target: usize,
                    y: &mut DVector<f64>,
                    active: &mut ActiveSet,
                    eq_flip: &mut Vec<f64>,
                    iterations: &mut usize|
     -> Result<(), QpError> {
        let (cref, mut normal, mut bound) = {
            let (cref, normal, bound) = &rows[target];
            (*cref, normal.clone(), *bound)
        };
        let mut s = normal.dot(y) - bound;
        if let ConstraintRef::Equality(i) = cref {
            if s > 0.0 {
                normal = -normal;
                bound = -bound;
                s = -s;
                eq_flip[i] = -1.0;
            }
        }
        if matches!(cref, ConstraintRef::Inequality(_)) && s >= -feas_tol {
            return Ok(());
        }

        let mut u_target = 0.0f64;
        loop {
            *iterations += 1;
            if *iterations > iteration_cap {
                return Err(QpError::IterationLimit(iteration_cap));
            }

            // Direction in primal space and dual response of the active set.
            let (z, qta) = active.project(&normal);
            let r_coeffs = active.dual_response(&qta);

            // Dual blocking step: smallest ratio over active inequalities
            // whose dual would be driven negative.
            let mut t1 = f64::INFINITY;
            let mut blocker = None;
            for (k, member) in active.members.iter().enumerate() {
                if matches!(member, ConstraintRef::Inequality(_)) && r_coeffs[k] > Z_TOL {
                    let ratio = active.duals[k] / r_coeffs[k];
                    if ratio < t1 {
                        t1 = ratio;
                        blocker = Some(k);
                    }
                }
            }

            let zn = z.dot(&normal);
            let t2 = if zn > Z_TOL { -s / zn } else { f64::INFINITY };

            if !t1.is_finite() && !t2.is_finite() {
                // No direction reduces the violation: the target constraint
                // conflicts with the active set (or is redundant if already
                // satisfied).
                if s.abs() <= feas_tol {
                    return Ok(());
                }
                return Err(QpError::Infeasible {
                    adding: cref,
                    active: active.members.clone(),
                });
            }

            let t = t1.min(t2);
            if t.is_finite() && t > 0.0 {
                if t2.is_finite() {
                    y.axpy(t, &z, 1.0);
                    s = normal.dot(y) - bound;
                }
                for (k, d) in active.duals.iter_mut().enumerate() {
                    *d -= t * r_coeffs[k];
                }
                u_target += t;
            }

            if t2.is_finite() && (t - t2).abs() <= t2.abs() * 1e-12 + 1e-300 {
                // Full step: the constraint is now tight; make it active.
                if !active.push(cref, u_target, z, qta) {
                    return Err(QpError::IterationLimit(iteration_cap));
                }
                return Ok(());
            }
            // Partial (or pure dual) step: drop the blocking constraint.
            let k = blocker.expect("finite t1 implies a blocking constraint");
            active.remove(k);
        }
    };

    // Equalities first, then repeatedly the most violated inequality.
    for target in 0..n_eq {
        bring_in(target, &mut y, &mut active, &mut eq_flip, &mut iterations)?;
    }
    loop {
        let mut worst = None;
        let mut worst_violation = -feas_tol;
        for (idx, (cref, normal, bound)) in rows.iter().enumerate().skip(n_eq) {
            if active.members.contains(cref) {
                continue;
            }
            let s = normal.dot(&y) - bound;
            if s < worst_violation {
                worst_violation = s;
                worst = Some(idx);
            }
        }
        match worst {
            Some(idx) => bring_in(idx, &mut y, &mut active, &mut eq_flip, &mut iterations)?,
            None => break,
        }
    }

    // Unscale the solution and collect multipliers per original row.
    let x = DVector::from_iterator(n, y.iter().zip(&w_sqrt).map(|(v, s)| v / s));
    let mut eq_multipliers = DVector::zeros(n_eq);
    let mut ineq_multipliers = DVector::zeros(n_ineq);
    for (k, member) in active.members.iter().enumerate() {
        match member {
            ConstraintRef::Equality(i) => {
                eq_multipliers[*i] = eq_flip[*i] * active.duals[k] / scales[*i];
            }
            ConstraintRef::Inequality(i) => {
                ineq_multipliers[*i] = active.duals[k] / scales[n_eq + *i];
            }
        }
    }

    let kkt_residual = kkt_residual(problem, &x, &eq_multipliers, &ineq_multipliers);
    Ok(QpSolution {
        x,
        eq_multipliers,
        ineq_multipliers,
        iterations,
        kkt_residual,
    })
}

/// Scaled max-norm KKT residual of a candidate primal/dual triple.
pub fn kkt_residual(
    problem: &QpProblem,
    x: &DVector<f64>,
    eq_multipliers: &DVector<f64>,
    ineq_multipliers: &DVector<f64>,
) -> f64 {
    let wx = x.component_mul(&problem.weights);
    let mut grad = &wx + &problem.linear;
    let mut grad_scale: f64 = 1.0;
    grad_scale = grad_scale.max(wx.amax()).max(problem.linear.amax());
    if problem.eq_matrix.nrows() > 0 {
        let term = problem.eq_matrix.transpose() * eq_multipliers;
        grad_scale = grad_scale.max(term.amax());
        grad -= term;
    }
    if problem.ineq_matrix.nrows() > 0 {
        let term = problem.ineq_matrix.transpose() * ineq_multipliers;
        grad_scale = grad_scale.max(term.amax());
        grad -= term;
    }
    let mut residual: f64 = grad.amax() / grad_scale;

    if problem.eq_matrix.nrows() > 0 {
        let viol = (&problem.eq_matrix * x - &problem.eq_rhs).amax();
        residual = residual.max(viol / 1.0f64.max(problem.eq_rhs.amax()));
    }
    if problem.ineq_matrix.nrows() > 0 {
        let slack = &problem.ineq_matrix * x - &problem.ineq_rhs;
        let scale = 1.0f64.max(problem.ineq_rhs.amax());
        for (j, s) in slack.iter().enumerate() {
            residual = residual.max((-s).max(0.0) / scale);
            residual = residual
                .max((ineq_multipliers[j] * s).abs() / scale.max(ineq_multipliers[j].abs()));
            residual = residual.max((-ineq_multipliers[j]).max(0.0));
        }
    }
    residual
}
