//! Test-support oracles for the force-distribution QP.
//!
//! The oracle solves the same minimum-norm distribution problem as the
//! production solver, but by brute force: it enumerates every subset of
//! inequality constraints as a candidate active set, solves the resulting
//! equality-constrained problem with pseudo-inverse least squares, and
//! returns the unique candidate satisfying all KKT conditions. It shares no
//! code with the active-set solver, including the constraint assembly.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand::{Rng, RngExt};

/// Tolerance for oracle feasibility and dual-sign checks.
const ORACLE_TOL: f64 = 1e-7;

/// One contact point: (position, unit normal), world frame.
pub type OraclePoint = (Vector3<f64>, Vector3<f64>);
/// One belt: (suit anchor, unit pull direction), world frame.
pub type OracleBelt = (Vector3<f64>, Vector3<f64>);

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub forces: Vec<Vector3<f64>>,
    pub tensions: Vec<f64>,
    pub objective: f64,
}

fn cross_matrix(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Assembles the 6 x n equality system `A x = b` for the wrench balance,
/// independently of the production assembly.
fn assemble(
    force: &Vector3<f64>,
    moment: &Vector3<f64>,
    reference: &Vector3<f64>,
    points: &[OraclePoint],
    belts: &[OracleBelt],
) -> (DMatrix<f64>, DVector<f64>) {
    let n = 3 * points.len() + belts.len();
    let mut a = DMatrix::zeros(6, n);
    for (i, (pos, _)) in points.iter().enumerate() {
        for k in 0..3 {
            a[(k, 3 * i + k)] = 1.0;
        }
        a.view_mut((3, 3 * i), (3, 3))
            .copy_from(&cross_matrix(&(pos - reference)));
    }
    for (j, (anchor, dir)) in belts.iter().enumerate() {
        let col = 3 * points.len() + j;
        let m = (anchor - reference).cross(dir);
        for k in 0..3 {
            a[(k, col)] = dir[k];
            a[(3 + k, col)] = m[k];
        }
    }
    let mut b = DVector::zeros(6);
    b.fixed_rows_mut::<3>(0).copy_from(force);
    b.fixed_rows_mut::<3>(3).copy_from(moment);
    (a, b)
}

/// Pseudo-inverse solve of `M y = r` via SVD.
fn pinv_solve(m: &DMatrix<f64>, r: &DVector<f64>) -> DVector<f64> {
    let svd = m.clone().svd(true, true);
    svd.solve(r, 1e-12).expect("svd solve")
}

/// Brute-force minimum-norm solution of
///
/// ```text
///     min  sum |f_i|^2 + sum t_j^2
///     s.t. wrench balance, f_i . n_i >= 0, t_j >= 0
/// ```
///
/// Returns `None` when no active set yields a KKT point (infeasible).
pub fn oracle_distribute(
    force: &Vector3<f64>,
    moment: &Vector3<f64>,
    reference: &Vector3<f64>,
    points: &[OraclePoint],
    belts: &[OracleBelt],
) -> Option<OracleSolution> {
    let np = points.len();
    let nb = belts.len();
    let n = 3 * np + nb;
    let m_ineq = np + nb;
    assert!(m_ineq <= 16, "enumeration explodes past 16 inequalities");

    // Inequality rows: g_i^T x >= 0.
    let mut g_rows: Vec<DVector<f64>> = Vec::with_capacity(m_ineq);
    for (i, (_, normal)) in points.iter().enumerate() {
        let mut row = DVector::zeros(n);
        for k in 0..3 {
            row[3 * i + k] = normal[k];
        }
        g_rows.push(row);
    }
    for j in 0..nb {
        let mut row = DVector::zeros(n);
        row[3 * np + j] = 1.0;
        g_rows.push(row);
    }

    let (eq, rhs) = assemble(force, moment, reference, points, belts);
    let scale = 1.0f64.max(rhs.amax());

    let mut best: Option<OracleSolution> = None;
    for mask in 0u32..(1 << m_ineq) {
        let active: Vec<usize> = (0..m_ineq).filter(|i| mask & (1 << i) != 0).collect();
        let rows = 6 + active.len();
        let mut a = DMatrix::zeros(rows, n);
        a.view_mut((0, 0), (6, n)).copy_from(&eq);
        for (r, idx) in active.iter().enumerate() {
            a.row_mut(6 + r).copy_from(&g_rows[*idx].transpose());
        }
        let mut b = DVector::zeros(rows);
        b.rows_mut(0, 6).copy_from(&rhs);

        // Stationarity: x = A^T lambda; constraint: A A^T lambda = b.
        let aat = &a * a.transpose();
        let lambda = pinv_solve(&aat, &b);
        let x = a.transpose() * &lambda;

        // The candidate must actually satisfy the equalities.
        if (&a * &x - &b).amax() > ORACLE_TOL * scale {
            continue;
        }
        // Dual feasibility on the active inequalities (x = A^T lambda means
        // the multiplier of active row r is lambda[6 + r]).
        if active
            .iter()
            .enumerate()
            .any(|(r, _)| lambda[6 + r] < -ORACLE_TOL * scale.max(1.0))
        {
            continue;
        }
        // Primal feasibility on the inactive inequalities.
        if (0..m_ineq)
            .filter(|i| !active.contains(i))
            .any(|i| g_rows[i].dot(&x) < -ORACLE_TOL * scale)
        {
            continue;
        }

        let objective = x.dot(&x);
        match &best {
            Some(prev) if prev.objective <= objective => {}
            _ => {
                best = Some(OracleSolution {
                    forces: (0..np)
                        .map(|i| Vector3::new(x[3 * i], x[3 * i + 1], x[3 * i + 2]))
                        .collect(),
                    tensions: (0..nb).map(|j| x[3 * np + j]).collect(),
                    objective,
                });
            }
        }
    }
    best
}

/// Random force-distribution instance.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub force: Vector3<f64>,
    pub moment: Vector3<f64>,
    pub reference: Vector3<f64>,
    pub points: Vec<OraclePoint>,
    pub belts: Vec<OracleBelt>,
}

fn random_unit(rng: &mut impl Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 {
            return v / n;
        }
    }
}

/// Draws an instance with up to `max_points` contacts and up to 2 belts.
/// With `feasible`, the wrench is synthesized from a strictly feasible
/// force set, so a KKT point is guaranteed to exist.
pub fn random_instance(rng: &mut impl Rng, max_points: usize, feasible: bool) -> RandomInstance {
    let np = rng.random_range(1..=max_points.max(1));
    let nb = rng.random_range(0..=2usize);
    let reference = Vector3::new(
        rng.random_range(-0.2..0.2),
        rng.random_range(-0.2..0.2),
        rng.random_range(-0.2..0.2),
    );
    let points: Vec<OraclePoint> = (0..np)
        .map(|_| {
            (
                Vector3::new(
                    rng.random_range(-0.5..0.5),
                    rng.random_range(-0.5..0.5),
                    rng.random_range(-0.2..0.2),
                ),
                random_unit(rng),
            )
        })
        .collect();
    let belts: Vec<OracleBelt> = (0..nb)
        .map(|_| {
            (
                Vector3::new(
                    rng.random_range(-0.5..0.5),
                    rng.random_range(-0.5..0.5),
                    rng.random_range(-0.2..0.2),
                ),
                random_unit(rng),
            )
        })
        .collect();

    let (force, moment) = if feasible {
        let mut f = Vector3::zeros();
        let mut m = Vector3::zeros();
        for (pos, normal) in &points {
            // Normal push plus a bounded tangential component.
            let push = rng.random_range(0.5..10.0);
            let tangent = random_unit(rng).cross(normal) * rng.random_range(0.0..3.0);
            let fi = normal * push + tangent;
            f += fi;
            m += (pos - reference).cross(&fi);
        }
        for (anchor, dir) in &belts {
            let t = rng.random_range(0.0..8.0);
            f += dir * t;
            m += (anchor - reference).cross(&(dir * t));
        }
        (f, m)
    } else {
        (
            Vector3::new(
                rng.random_range(-20.0..20.0),
                rng.random_range(-20.0..20.0),
                rng.random_range(-20.0..20.0),
            ),
            Vector3::new(
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
            ),
        )
    };

    RandomInstance {
        force,
        moment,
        reference,
        points,
        belts,
    }
}
