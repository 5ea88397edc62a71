//! Newton–Euler segment wrenches and their distribution over contact points
//! and pull-only belts.
//!
//! Sign conventions: a segment's required wrench is the net force and moment
//! the wearer must apply to it. Contact forces are what the wearer applies to
//! the suit and may only push along the point normal; belt tensions pull the
//! suit anchor toward the body anchor. The wearer feels the equal and
//! opposite of every channel.

use nalgebra::{DMatrix, DVector, Matrix3, Unit, Vector3};
use thiserror::Error;

use crate::kinematics::{SegmentMotion, TrialKinematics};
use crate::model::{BodySegment, RegionId, SegmentId, SuitModel, SuitSegment};
use crate::qp::{self, ConstraintRef, QpError, QpProblem};

/// Relative bound on the equality residual of a returned solution.
pub const RESIDUAL_BOUND: f64 = 1e-6;
/// Required KKT residual of the QP solver.
pub const KKT_BOUND: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("no contact points or belts to distribute over")]
    NoSupport,
    #[error("wrench contains non-finite components")]
    NonFiniteWrench,
    #[error("infeasible force distribution: {detail}")]
    Infeasible { detail: String },
    #[error("QP solver failed: {0}")]
    Solver(QpError),
    #[error("solution accuracy {residual:.3e} exceeds bound {bound:.3e}")]
    Accuracy { residual: f64, bound: f64 },
    #[error("region `{0}` does not exist in the suit model")]
    UnknownRegion(RegionId),
    #[error("belt on {0} has coincident anchors; direction undefined")]
    DegenerateBelt(SegmentId),
    #[error("kinematics missing segment {0}")]
    MissingKinematics(SegmentId),
    #[error("sample {sample}: {source}")]
    AtSample {
        sample: usize,
        #[source]
        source: Box<DynamicsError>,
    },
}

/// Force and moment about a stated reference point, world frame.
#[derive(Debug, Clone, Copy)]
pub struct Wrench {
    /// N.
    pub force: Vector3<f64>,
    /// N·m about `reference_point`.
    pub moment: Vector3<f64>,
    /// World point the moment is taken about, m.
    pub reference_point: Vector3<f64>,
}

impl Wrench {
    pub fn is_finite(&self) -> bool {
        self.force.iter().all(|v| v.is_finite())
            && self.moment.iter().all(|v| v.is_finite())
            && self.reference_point.iter().all(|v| v.is_finite())
    }

    /// Same wrench expressed about a different reference point.
    pub fn about(&self, reference_point: Vector3<f64>) -> Wrench {
        let shift = self.reference_point - reference_point;
        Wrench {
            force: self.force,
            moment: self.moment + shift.cross(&self.force),
            reference_point,
        }
    }

    /// Combined magnitude used for relative residual bounds.
    pub fn magnitude(&self) -> f64 {
        (self.force.norm_squared() + self.moment.norm_squared()).sqrt()
    }
}

/// Net wrench the wearer must apply to hold a segment on its trajectory:
/// `F = m (a_com - g)`, `M = I a + w x (I w)` about the COM, world frame.
pub fn required_wrench(
    segment: &SuitSegment,
    motion: &SegmentMotion,
    gravity: &Vector3<f64>,
) -> Wrench {
    let rot = motion.rotation.matrix();
    let inertia_world: Matrix3<f64> = rot * segment.inertia * rot.transpose();
    let force = segment.mass * (motion.com_accel - gravity);
    let moment =
        inertia_world * motion.ang_acc + motion.ang_vel.cross(&(inertia_world * motion.ang_vel));
    Wrench {
        force,
        moment,
        reference_point: motion.com_position,
    }
}

/// One contact point in the world frame, tagged with its region.
#[derive(Debug, Clone)]
pub struct WorldContactPoint {
    pub region: RegionId,
    pub point_index: usize,
    pub position: Vector3<f64>,
    pub normal: Unit<Vector3<f64>>,
}

/// One belt line in the world frame.
#[derive(Debug, Clone)]
pub struct WorldBelt {
    pub segment: SegmentId,
    pub body_segment: BodySegment,
    /// Suit-side anchor, m.
    pub anchor: Vector3<f64>,
    /// Unit direction from the suit anchor toward the body anchor.
    pub direction: Unit<Vector3<f64>>,
}

/// Solved contact force at one point (what the wearer applies to the suit).
#[derive(Debug, Clone)]
pub struct SolvedContact {
    pub region: RegionId,
    pub point_index: usize,
    pub position: Vector3<f64>,
    pub normal: Unit<Vector3<f64>>,
    pub force: Vector3<f64>,
}

/// Solved belt tension.
#[derive(Debug, Clone)]
pub struct SolvedBelt {
    pub segment: SegmentId,
    pub body_segment: BodySegment,
    pub anchor: Vector3<f64>,
    pub direction: Unit<Vector3<f64>>,
    /// N, nonnegative.
    pub tension: f64,
}

/// Minimum-norm distribution of a wrench over contacts and belts.
#[derive(Debug, Clone)]
pub struct ContactSolution {
    pub contacts: Vec<SolvedContact>,
    pub belts: Vec<SolvedBelt>,
    /// Euclidean norm of the equality-constraint violation (force rows in N,
    /// moment rows in N·m).
    pub residual: f64,
    /// Value of the quadratic objective at the solution.
    pub objective: f64,
    /// Active-set iterations spent.
    pub iterations: usize,
}

/// Cost weights of the distribution objective.
#[derive(Debug, Clone, Copy)]
pub struct DistributeOptions {
    pub contact_weight: f64,
    pub belt_weight: f64,
}

impl Default for DistributeOptions {
    fn default() -> Self {
        DistributeOptions {
            contact_weight: 1.0,
            belt_weight: 1.0,
        }
    }
}

fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Distributes `wrench` over the given contact points and belts by solving
///
/// ```text
///     min  sum w_c |f_i|^2 + sum w_b t_j^2
///     s.t. sum f_i + sum t_j u_j               = F
///          sum r_i x f_i + sum t_j (r_j x u_j) = M
///          f_i . n_i >= 0,  t_j >= 0
/// ```
///
/// with positions taken relative to the wrench's reference point.
pub fn distribute_forces(
    wrench: &Wrench,
    contacts: &[WorldContactPoint],
    belts: &[WorldBelt],
    options: &DistributeOptions,
) -> Result<ContactSolution, DynamicsError> {
    if contacts.is_empty() && belts.is_empty() {
        return Err(DynamicsError::NoSupport);
    }
    if !wrench.is_finite() {
        return Err(DynamicsError::NonFiniteWrench);
    }
    let np = contacts.len();
    let nb = belts.len();
    let n = 3 * np + nb;

    let mut eq = DMatrix::zeros(6, n);
    for (i, c) in contacts.iter().enumerate() {
        let col = 3 * i;
        for k in 0..3 {
            eq[(k, col + k)] = 1.0;
        }
        let r = c.position - wrench.reference_point;
        eq.view_mut((3, col), (3, 3)).copy_from(&skew(&r));
    }
    for (j, b) in belts.iter().enumerate() {
        let col = 3 * np + j;
        let u = b.direction.into_inner();
        let r = b.anchor - wrench.reference_point;
        let m = r.cross(&u);
        for k in 0..3 {
            eq[(k, col)] = u[k];
            eq[(3 + k, col)] = m[k];
        }
    }
    let mut rhs = DVector::zeros(6);
    rhs.fixed_rows_mut::<3>(0).copy_from(&wrench.force);
    rhs.fixed_rows_mut::<3>(3).copy_from(&wrench.moment);

    // One push constraint per point, one tension sign per belt.
    let mut ineq = DMatrix::zeros(np + nb, n);
    for (i, c) in contacts.iter().enumerate() {
        let nvec = c.normal.into_inner();
        for k in 0..3 {
            ineq[(i, 3 * i + k)] = nvec[k];
        }
    }
    for j in 0..nb {
        ineq[(np + j, 3 * np + j)] = 1.0;
    }

    let mut weights = DVector::from_element(n, options.contact_weight.max(f64::MIN_POSITIVE));
    for j in 0..nb {
        weights[3 * np + j] = options.belt_weight.max(f64::MIN_POSITIVE);
    }

    let problem = QpProblem {
        weights,
        linear: DVector::zeros(n),
        eq_matrix: eq.clone(),
        eq_rhs: rhs.clone(),
        ineq_matrix: ineq,
        ineq_rhs: DVector::zeros(np + nb),
    };

    let sol = qp::solve(&problem).map_err(|e| match e {
        QpError::Infeasible { adding, active } => DynamicsError::Infeasible {
            detail: describe_constraints(&adding, &active, contacts, belts),
        },
        other => DynamicsError::Solver(other),
    })?;

    if sol.kkt_residual > KKT_BOUND {
        return Err(DynamicsError::Accuracy {
            residual: sol.kkt_residual,
            bound: KKT_BOUND,
        });
    }
    let residual = (&eq * &sol.x - &rhs).norm();
    let bound = RESIDUAL_BOUND * 1.0f64.max(wrench.magnitude());
    if residual > bound {
        return Err(DynamicsError::Accuracy { residual, bound });
    }

    let solved_contacts = contacts
        .iter()
        .enumerate()
        .map(|(i, c)| SolvedContact {
            region: c.region.clone(),
            point_index: c.point_index,
            position: c.position,
            normal: c.normal,
            force: Vector3::new(sol.x[3 * i], sol.x[3 * i + 1], sol.x[3 * i + 2]),
        })
        .collect();
    let solved_belts = belts
        .iter()
        .enumerate()
        .map(|(j, b)| SolvedBelt {
            segment: b.segment,
            body_segment: b.body_segment,
            anchor: b.anchor,
            direction: b.direction,
            tension: sol.x[3 * np + j],
        })
        .collect();

    Ok(ContactSolution {
        contacts: solved_contacts,
        belts: solved_belts,
        residual,
        objective: problem.objective(&sol.x),
        iterations: sol.iterations,
    })
}

fn describe_constraints(
    adding: &ConstraintRef,
    active: &[ConstraintRef],
    contacts: &[WorldContactPoint],
    belts: &[WorldBelt],
) -> String {
    let name = |c: &ConstraintRef| -> String {
        match c {
            ConstraintRef::Equality(i) if *i < 3 => {
                format!("force balance ({})", ["x", "y", "z"][*i])
            }
            ConstraintRef::Equality(i) => format!("moment balance ({})", ["x", "y", "z"][*i - 3]),
            ConstraintRef::Inequality(i) if *i < contacts.len() => {
                let c = &contacts[*i];
                format!("push-only contact {}#{}", c.region, c.point_index)
            }
            ConstraintRef::Inequality(i) => {
                let b = &belts[*i - contacts.len()];
                format!("pull-only belt {}->{}", b.segment, b.body_segment)
            }
        }
    };
    let active_names: Vec<String> = active.iter().map(&name).collect();
    format!(
        "{} cannot be satisfied together with {{{}}}",
        name(adding),
        active_names.join(", ")
    )
}

/// Ratio of summed tangential force norms to summed normal components over
/// the contacts of a solution; `None` when the normal sum vanishes.
pub fn tangential_ratio(solution: &ContactSolution) -> Option<f64> {
    let mut tangential = 0.0;
    let mut normal = 0.0;
    for c in &solution.contacts {
        let fn_ = c.force.dot(&c.normal);
        tangential += (c.force - c.normal.into_inner() * fn_).norm();
        normal += fn_;
    }
    if normal.abs() < 1e-12 {
        None
    } else {
        Some(tangential / normal)
    }
}

/// Tension in a single pull-only link plus the wrench it cannot carry.
#[derive(Debug, Clone)]
pub struct LinkLoad {
    pub segment: SegmentId,
    /// Body landmark for belts; `None` for suit-internal arm links.
    pub body_segment: Option<BodySegment>,
    pub anchor: Vector3<f64>,
    pub direction: Unit<Vector3<f64>>,
    /// N, clamped nonnegative.
    pub tension: f64,
    /// Norm of the wrench component the link cannot transmit.
    pub residual: f64,
}

/// Best-effort tension of a lone link supporting a segment: the projection
/// of the required force on the pull direction, clamped to tension. The
/// residual records the unsupported remainder (zero in static poses with the
/// anchor on the gravity line through the COM).
fn single_link_load(
    segment: SegmentId,
    body_segment: Option<BodySegment>,
    wrench: &Wrench,
    anchor: Vector3<f64>,
    direction: Unit<Vector3<f64>>,
) -> LinkLoad {
    let u = direction.into_inner();
    let tension = wrench.force.dot(&u).max(0.0);
    let force_residual = wrench.force - u * tension;
    let moment_residual = wrench.moment - (anchor - wrench.reference_point).cross(&(u * tension));
    LinkLoad {
        segment,
        body_segment,
        anchor,
        direction,
        tension,
        residual: (force_residual.norm_squared() + moment_residual.norm_squared()).sqrt(),
    }
}

/// Per-sample load state of the whole suit.
#[derive(Debug, Clone)]
pub struct SampleLoads {
    pub time: f64,
    /// Strict QP solutions: the torso assembly (FT and BP, rigidly
    /// co-moving, neck belts plus region contact points, arm suspension
    /// reactions folded in as external loads) first, then any
    /// region-carrying leg shells.
    pub solutions: Vec<ContactSolution>,
    /// Lone-belt leg shells: best-effort tensions with residuals.
    pub leg_belts: Vec<LinkLoad>,
    /// Arm suspensions; internal to the suit, not a wearer interface.
    pub arm_links: Vec<LinkLoad>,
    /// Tangential-to-normal diagnostic of the torso solve.
    pub tangential_ratio: Option<f64>,
}

impl SampleLoads {
    /// The torso assembly solution.
    pub fn trunk(&self) -> &ContactSolution {
        &self.solutions[0]
    }

    /// Resultant normal load of `region`, searching every strict solution.
    pub fn resultant(&self, region: &RegionId) -> Option<f64> {
        for sol in &self.solutions {
            if sol.contacts.iter().any(|c| &c.region == region) {
                let sum = sol
                    .contacts
                    .iter()
                    .filter(|c| &c.region == region)
                    .map(|c| c.force.dot(&c.normal))
                    .sum();
                return Some(sum);
            }
        }
        None
    }

    /// Total vertical force the wearer exerts on the suit across every
    /// interface channel (contacts and body belts; arm links are internal).
    pub fn total_vertical_interface(&self) -> f64 {
        let mut total = 0.0;
        for sol in &self.solutions {
            total += sol.contacts.iter().map(|c| c.force.z).sum::<f64>();
            total += sol
                .belts
                .iter()
                .map(|b| b.tension * b.direction.z)
                .sum::<f64>();
        }
        total
            + self
                .leg_belts
                .iter()
                .map(|b| b.tension * b.direction.z)
                .sum::<f64>()
    }

    /// Largest equality residual across the strictly solved groups and the
    /// lone-link approximations.
    pub fn max_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for sol in &self.solutions {
            r = r.max(sol.residual);
        }
        for b in &self.leg_belts {
            r = r.max(b.residual);
        }
        for a in &self.arm_links {
            r = r.max(a.residual);
        }
        r
    }
}

/// Interface loads simulated over a full trial.
#[derive(Debug, Clone)]
pub struct TrialLoads {
    pub regions: Vec<RegionId>,
    pub samples: Vec<SampleLoads>,
}

/// Runs the per-sample force distribution over a trial.
///
/// The torso shells (FT and BP) form one wrench-balance problem over the
/// region-of-interest contact points and the neck belts; arm suspension
/// loads enter it as external forces at the torso anchors. Leg shells
/// carrying a region of interest are solved strictly over their points plus
/// belt; bare leg shells fall back to the lone-link projection.
pub fn inverse_dynamics_trial(
    suit: &SuitModel,
    kin: &TrialKinematics,
    regions_of_interest: &[RegionId],
    gravity: &Vector3<f64>,
    options: &DistributeOptions,
) -> Result<TrialLoads, DynamicsError> {
    for id in regions_of_interest {
        if suit.region(id).is_none() {
            return Err(DynamicsError::UnknownRegion(id.clone()));
        }
    }
    for id in SegmentId::ALL {
        if !kin.segments.contains_key(&id) {
            return Err(DynamicsError::MissingKinematics(id));
        }
    }

    let trunk_ids = [SegmentId::FT, SegmentId::BP];
    let n = kin.times.len();
    let mut samples = Vec::with_capacity(n);

    for t in 0..n {
        let step = sample_loads(
            suit,
            kin,
            regions_of_interest,
            gravity,
            options,
            &trunk_ids,
            t,
        )
        .map_err(|source| DynamicsError::AtSample {
            sample: t,
            source: Box::new(source),
        })?;
        samples.push(step);
    }

    Ok(TrialLoads {
        regions: regions_of_interest.to_vec(),
        samples,
    })
}

fn sample_loads(
    suit: &SuitModel,
    kin: &TrialKinematics,
    regions_of_interest: &[RegionId],
    gravity: &Vector3<f64>,
    options: &DistributeOptions,
    trunk_ids: &[SegmentId; 2],
    t: usize,
) -> Result<SampleLoads, DynamicsError> {
    let motion = |id: SegmentId| -> &SegmentMotion { &kin.segments[&id][t] };

    // Arm suspensions first; their reactions load the torso.
    let ft_motion = motion(SegmentId::FT);
    let mut arm_links = Vec::new();
    let mut arm_reactions: Vec<(Vector3<f64>, Vector3<f64>)> = Vec::new();
    for susp in &suit.arm_suspensions {
        let arm_motion = motion(susp.arm);
        let seg = suit.segment(susp.arm);
        let wrench = required_wrench(seg, arm_motion, gravity);
        let arm_anchor = arm_motion.position + arm_motion.rotation * susp.arm_point;
        let ft_anchor = ft_motion.position + ft_motion.rotation * susp.torso_point;
        let line = ft_anchor - arm_anchor;
        if line.norm() < 1e-9 {
            return Err(DynamicsError::DegenerateBelt(susp.arm));
        }
        let dir = Unit::new_normalize(line);
        let load = single_link_load(susp.arm, None, &wrench, arm_anchor, dir);
        arm_reactions.push((-dir.into_inner() * load.tension, ft_anchor));
        arm_links.push(load);
    }

    // Torso assembly wrench about the FT COM.
    let reference = ft_motion.com_position;
    let mut force = Vector3::zeros();
    let mut moment = Vector3::zeros();
    for id in trunk_ids {
        let w = required_wrench(suit.segment(*id), motion(*id), gravity).about(reference);
        force += w.force;
        moment += w.moment;
    }
    for (f, at) in &arm_reactions {
        force -= f;
        moment -= (at - reference).cross(f);
    }
    let trunk_wrench = Wrench {
        force,
        moment,
        reference_point: reference,
    };

    let mut contacts = Vec::new();
    for rid in regions_of_interest {
        let region = suit.region(rid).expect("checked by caller");
        if !trunk_ids.contains(&region.segment) {
            continue;
        }
        let m = motion(region.segment);
        for (pi, p) in region.points.iter().enumerate() {
            contacts.push(WorldContactPoint {
                region: rid.clone(),
                point_index: pi,
                position: m.position + m.rotation * p.position,
                normal: Unit::new_unchecked(m.rotation * p.normal.into_inner()),
            });
        }
    }
    let mut belts = Vec::new();
    for (b, belt) in suit.belts.iter().enumerate() {
        if !trunk_ids.contains(&belt.segment) {
            continue;
        }
        let suit_pt = kin.belt_anchors[b].suit_world[t];
        let body_pt = kin.belt_anchors[b].body_world[t];
        let line = body_pt - suit_pt;
        if line.norm() < 1e-9 {
            return Err(DynamicsError::DegenerateBelt(belt.segment));
        }
        belts.push(WorldBelt {
            segment: belt.segment,
            body_segment: belt.body_segment,
            anchor: suit_pt,
            direction: Unit::new_normalize(line),
        });
    }
    let trunk = distribute_forces(&trunk_wrench, &contacts, &belts, options)?;
    let ratio = tangential_ratio(&trunk);
    let mut solutions = vec![trunk];

    // Leg shells.
    let mut leg_belts = Vec::new();
    for id in [
        SegmentId::RLU,
        SegmentId::LLU,
        SegmentId::RLL,
        SegmentId::LLL,
    ] {
        let m = motion(id);
        let wrench = required_wrench(suit.segment(id), m, gravity);
        let (b, belt) = suit
            .belts
            .iter()
            .enumerate()
            .find(|(_, b)| b.segment == id)
            .expect("validated model");
        let suit_pt = kin.belt_anchors[b].suit_world[t];
        let body_pt = kin.belt_anchors[b].body_world[t];
        let line = body_pt - suit_pt;
        if line.norm() < 1e-9 {
            return Err(DynamicsError::DegenerateBelt(id));
        }
        let dir = Unit::new_normalize(line);

        let roi: Vec<&RegionId> = regions_of_interest
            .iter()
            .filter(|rid| suit.region(rid).map(|r| r.segment) == Some(id))
            .collect();
        if roi.is_empty() {
            leg_belts.push(single_link_load(
                id,
                Some(belt.body_segment),
                &wrench,
                suit_pt,
                dir,
            ));
        } else {
            // Region-carrying leg shell: strict solve over its points + belt.
            let mut pts = Vec::new();
            for rid in roi {
                let region = suit.region(rid).unwrap();
                for (pi, p) in region.points.iter().enumerate() {
                    pts.push(WorldContactPoint {
                        region: rid.clone(),
                        point_index: pi,
                        position: m.position + m.rotation * p.position,
                        normal: Unit::new_unchecked(m.rotation * p.normal.into_inner()),
                    });
                }
            }
            let belt_world = [WorldBelt {
                segment: id,
                body_segment: belt.body_segment,
                anchor: suit_pt,
                direction: dir,
            }];
            let sol = distribute_forces(&wrench, &pts, &belt_world, options)?;
            solutions.push(sol);
        }
    }

    Ok(SampleLoads {
        time: kin.times[t],
        solutions,
        leg_belts,
        arm_links,
        tangential_ratio: ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_default_suit, Anthropometry};
    use approx::assert_abs_diff_eq;
    use nalgebra::Rotation3;

    fn static_motion(com: Vector3<f64>) -> SegmentMotion {
        SegmentMotion {
            rotation: Rotation3::identity(),
            position: com,
            com_position: com,
            com_accel: Vector3::zeros(),
            ang_vel: Vector3::zeros(),
            ang_acc: Vector3::zeros(),
        }
    }

    #[test]
    fn static_front_torso_requires_its_weight() {
        let suit = build_default_suit(&Anthropometry::default()).unwrap();
        let seg = suit.segment(SegmentId::FT);
        let w = required_wrench(
            seg,
            &static_motion(Vector3::zeros()),
            &crate::gravity_vector(),
        );
        assert_abs_diff_eq!(w.force.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.force.y, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.force.z, 93.23, epsilon = 1e-9);
        assert_abs_diff_eq!(w.moment.norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn free_fall_requires_nothing() {
        let suit = build_default_suit(&Anthropometry::default()).unwrap();
        let seg = suit.segment(SegmentId::BP);
        let mut motion = static_motion(Vector3::zeros());
        motion.com_accel = crate::gravity_vector();
        let w = required_wrench(seg, &motion, &crate::gravity_vector());
        assert_abs_diff_eq!(w.force.norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.moment.norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn principal_axis_spin_decouples() {
        let suit = build_default_suit(&Anthropometry::default()).unwrap();
        let seg = suit.segment(SegmentId::FT);
        let mut motion = static_motion(Vector3::zeros());
        motion.ang_vel = Vector3::new(0.0, 0.0, 2.0);
        motion.ang_acc = Vector3::new(0.0, 0.0, 5.0);
        let w = required_wrench(seg, &motion, &crate::gravity_vector());
        let expected_moment = seg.inertia[(2, 2)] * 5.0;
        assert_abs_diff_eq!(w.moment.z, expected_moment, epsilon = 1e-12);
        assert_abs_diff_eq!(w.moment.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.moment.y, 0.0, epsilon = 1e-12);
        // Force is pure weight support: m * (0 - g).
        assert_abs_diff_eq!(w.force.z, seg.weight(), epsilon = 1e-9);
    }

    fn vertical_point(region: &str, idx: usize, pos: Vector3<f64>) -> WorldContactPoint {
        WorldContactPoint {
            region: RegionId::from(region),
            point_index: idx,
            position: pos,
            normal: Unit::new_normalize(Vector3::z()),
        }
    }

    #[test]
    fn symmetric_pair_splits_evenly() {
        let wrench = Wrench {
            force: Vector3::new(0.0, 0.0, 10.0),
            moment: Vector3::zeros(),
            reference_point: Vector3::zeros(),
        };
        let pts = vec![
            vertical_point("r", 0, Vector3::new(-0.1, 0.0, 0.0)),
            vertical_point("r", 1, Vector3::new(0.1, 0.0, 0.0)),
        ];
        let sol = distribute_forces(&wrench, &pts, &[], &DistributeOptions::default()).unwrap();
        for c in &sol.contacts {
            assert_abs_diff_eq!(c.force.x, 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!(c.force.y, 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!(c.force.z, 5.0, epsilon = 1e-9);
        }
        assert!(sol.residual < 1e-6 * 10.0);
    }

    #[test]
    fn single_point_through_reference_carries_everything() {
        let wrench = Wrench {
            force: Vector3::new(0.0, 0.0, 10.0),
            moment: Vector3::zeros(),
            reference_point: Vector3::zeros(),
        };
        let pts = vec![vertical_point("r", 0, Vector3::zeros())];
        let sol = distribute_forces(&wrench, &pts, &[], &DistributeOptions::default()).unwrap();
        assert_abs_diff_eq!(sol.contacts[0].force.z, 10.0, epsilon = 1e-9);
        assert!(sol.residual < 1e-6);
    }

    #[test]
    fn four_point_square_matches_kkt_least_squares() {
        // Offset load over a square of vertical-normal points; no active
        // inequality, so the minimum-norm solution is A'(AA')^-1 b.
        let pts: Vec<WorldContactPoint> = [
            Vector3::new(-0.1, -0.1, 0.0),
            Vector3::new(0.1, -0.1, 0.0),
            Vector3::new(0.1, 0.1, 0.0),
            Vector3::new(-0.1, 0.1, 0.0),
        ]
        .iter()
        .enumerate()
        .map(|(i, p)| vertical_point("sq", i, *p))
        .collect();
        let wrench = Wrench {
            force: Vector3::new(0.0, 0.0, 40.0),
            moment: Vector3::new(0.4, -0.4, 0.0), // load center offset
            reference_point: Vector3::zeros(),
        };
        let sol = distribute_forces(&wrench, &pts, &[], &DistributeOptions::default()).unwrap();

        // Dense KKT oracle.
        let mut a = DMatrix::zeros(6, 12);
        for (i, p) in pts.iter().enumerate() {
            for k in 0..3 {
                a[(k, 3 * i + k)] = 1.0;
            }
            a.view_mut((3, 3 * i), (3, 3)).copy_from(&skew(&p.position));
        }
        let mut b = DVector::zeros(6);
        b.fixed_rows_mut::<3>(0).copy_from(&wrench.force);
        b.fixed_rows_mut::<3>(3).copy_from(&wrench.moment);
        let aat = &a * a.transpose();
        let lambda = aat.lu().solve(&b).unwrap();
        let x = a.transpose() * lambda;

        for (i, c) in sol.contacts.iter().enumerate() {
            for k in 0..3 {
                assert_abs_diff_eq!(c.force[k], x[3 * i + k], epsilon = 1e-6);
            }
            assert!(c.force.dot(&c.normal) >= -1e-9);
        }
    }

    #[test]
    fn impossible_pull_reports_infeasible() {
        // All normals up, downward net force required: contacts cannot pull.
        let wrench = Wrench {
            force: Vector3::new(0.0, 0.0, -10.0),
            moment: Vector3::zeros(),
            reference_point: Vector3::zeros(),
        };
        let pts = vec![
            vertical_point("r", 0, Vector3::new(-0.1, 0.0, 0.0)),
            vertical_point("r", 1, Vector3::new(0.1, 0.0, 0.0)),
        ];
        match distribute_forces(&wrench, &pts, &[], &DistributeOptions::default()) {
            Err(DynamicsError::Infeasible { detail }) => {
                assert!(
                    detail.contains("balance") || detail.contains("push-only"),
                    "detail: {detail}"
                );
            }
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn belt_takes_downward_load() {
        // A lone belt pulling straight down balances a net downward pull
        // that push-only contacts never could.
        let wrench = Wrench {
            force: Vector3::new(0.0, 0.0, -7.5),
            moment: Vector3::zeros(),
            reference_point: Vector3::zeros(),
        };
        let belts = [WorldBelt {
            segment: SegmentId::FT,
            body_segment: BodySegment::Neck,
            anchor: Vector3::zeros(),
            direction: Unit::new_normalize(-Vector3::z()),
        }];
        let sol = distribute_forces(&wrench, &[], &belts, &DistributeOptions::default()).unwrap();
        assert_abs_diff_eq!(sol.belts[0].tension, 7.5, epsilon = 1e-9);
    }

    #[test]
    fn tangential_ratio_cases() {
        let mk = |force: Vector3<f64>| ContactSolution {
            contacts: vec![SolvedContact {
                region: RegionId::from("r"),
                point_index: 0,
                position: Vector3::zeros(),
                normal: Unit::new_normalize(Vector3::z()),
                force,
            }],
            belts: vec![],
            residual: 0.0,
            objective: 0.0,
            iterations: 0,
        };
        assert_abs_diff_eq!(
            tangential_ratio(&mk(Vector3::new(0.0, 0.0, 3.0))).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        let at45 = Vector3::new(1.0, 0.0, 1.0);
        assert_abs_diff_eq!(tangential_ratio(&mk(at45)).unwrap(), 1.0, epsilon = 1e-12);
        assert!(tangential_ratio(&mk(Vector3::new(1.0, 0.0, 0.0))).is_none());
    }
}
