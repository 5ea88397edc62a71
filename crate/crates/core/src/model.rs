//! Rigid-body model of the suit: eight segments, pull-only belts, and
//! discretized contact regions, scaled to a wearer's anthropometry.
//!
//! Conventions: world and base frames are z-up, x forward, y left. Trunk
//! segments (FT, BP, RA, LA) use frames coincident with the base frame, so
//! their local coordinates read directly as base-frame offsets in the
//! reference standing pose; leg segments use frames with the origin at the
//! parent joint (hip or knee) and z pointing up the limb axis.

use nalgebra::{Matrix3, Unit, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::GRAVITY;

/// Identifier of one of the eight suit components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SegmentId {
    /// Right upper-leg shell.
    RLU,
    /// Right lower-leg shell.
    RLL,
    /// Left upper-leg shell.
    LLU,
    /// Left lower-leg shell.
    LLL,
    /// Back pad.
    BP,
    /// Right arm shell.
    RA,
    /// Left arm shell.
    LA,
    /// Front torso (chest and shoulders).
    FT,
}

impl SegmentId {
    /// All eight segment ids in canonical order.
    pub const ALL: [SegmentId; 8] = [
        SegmentId::RLU,
        SegmentId::RLL,
        SegmentId::LLU,
        SegmentId::LLL,
        SegmentId::BP,
        SegmentId::RA,
        SegmentId::LA,
        SegmentId::FT,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SegmentId::RLU => "RLU",
            SegmentId::RLL => "RLL",
            SegmentId::LLU => "LLU",
            SegmentId::LLL => "LLL",
            SegmentId::BP => "BP",
            SegmentId::RA => "RA",
            SegmentId::LA => "LA",
            SegmentId::FT => "FT",
        }
    }
}

impl std::fmt::Display for SegmentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SegmentId {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SegmentId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| ModelError::UnknownSegment(s.to_string()))
    }
}

/// Body landmark a belt may anchor to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodySegment {
    Neck,
    LeftHip,
    RightHip,
    LeftKnee,
    RightKnee,
}

impl std::fmt::Display for BodySegment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            BodySegment::Neck => "neck",
            BodySegment::LeftHip => "left_hip",
            BodySegment::RightHip => "right_hip",
            BodySegment::LeftKnee => "left_knee",
            BodySegment::RightKnee => "right_knee",
        };
        f.write_str(s)
    }
}

/// Identifier of a contact region; the two shoulder patches are built in,
/// additional regions may be named freely.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RegionId {
    LeftShoulder,
    RightShoulder,
    Custom(String),
}

impl RegionId {
    pub fn as_str(&self) -> &str {
        match self {
            RegionId::LeftShoulder => "left_shoulder",
            RegionId::RightShoulder => "right_shoulder",
            RegionId::Custom(s) => s,
        }
    }
}

impl std::fmt::Display for RegionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<&str> for RegionId {
    fn from(s: &str) -> Self {
        match s {
            "left_shoulder" => RegionId::LeftShoulder,
            "right_shoulder" => RegionId::RightShoulder,
            other => RegionId::Custom(other.to_string()),
        }
    }
}

impl Serialize for RegionId {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for RegionId {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        Ok(RegionId::from(s.as_str()))
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unknown segment id `{0}`")]
    UnknownSegment(String),
    #[error("segment {0}: mass must be positive, got {1}")]
    NonPositiveMass(SegmentId, f64),
    #[error("segment {0}: inertia is not positive semi-definite (min eigenvalue {1:.3e})")]
    IndefiniteInertia(SegmentId, f64),
    #[error("anthropometry: {0} must be positive, got {1}")]
    NonPositiveLength(&'static str, f64),
    #[error("model must contain exactly one segment per id; {0} appears {1} times")]
    SegmentMultiplicity(SegmentId, usize),
    #[error("segment {0} must carry exactly one belt anchored at {1}")]
    BeltRule(SegmentId, BodySegment),
    #[error("region {0}: contact normal at point {1} is not unit length (|n| = {2})")]
    NonUnitNormal(RegionId, usize, f64),
    #[error("region {0}: point grid deviates from the declared uniform patch layout")]
    IrregularGrid(RegionId),
    #[error("rotation matrix is not orthonormal (max |R^T R - I| = {0:.3e})")]
    NonOrthonormalRotation(f64),
    #[error("region {0}: empty point set")]
    EmptyRegion(RegionId),
}

/// Uniform-density primitive backing a segment's inertia.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SegmentGeometry {
    /// Rectangular slab; `size` holds the full edge lengths (m) along the
    /// segment axes.
    Box { size: [f64; 3] },
    /// Hollow cylinder with its axis along segment z; dimensions in m.
    CylinderShell {
        length: f64,
        outer_radius: f64,
        thickness: f64,
    },
}

impl SegmentGeometry {
    /// Inertia tensor (kg·m²) about the center of mass for mass `m`,
    /// assuming evenly distributed density.
    pub fn inertia(&self, m: f64) -> Matrix3<f64> {
        match *self {
            SegmentGeometry::Box { size: [a, b, c] } => Matrix3::from_diagonal(
                &Vector3::new(b * b + c * c, a * a + c * c, a * a + b * b).scale(m / 12.0),
            ),
            SegmentGeometry::CylinderShell {
                length,
                outer_radius,
                thickness,
            } => {
                let ro = outer_radius;
                let ri = (outer_radius - thickness).max(0.0);
                let rr = ro * ro + ri * ri;
                let transverse = m / 12.0 * (3.0 * rr + length * length);
                Matrix3::from_diagonal(&Vector3::new(transverse, transverse, m / 2.0 * rr))
            }
        }
    }
}

/// One rigid suit component.
#[derive(Debug, Clone)]
pub struct SuitSegment {
    pub id: SegmentId,
    /// Mass, kg.
    pub mass: f64,
    /// Center of mass in the segment frame, m.
    pub com_offset: Vector3<f64>,
    /// Inertia about the COM, kg·m², in segment axes.
    pub inertia: Matrix3<f64>,
    pub geometry: SegmentGeometry,
}

impl SuitSegment {
    fn new(
        id: SegmentId,
        weight_n: f64,
        com_offset: Vector3<f64>,
        geometry: SegmentGeometry,
    ) -> Self {
        let mass = weight_n / GRAVITY;
        SuitSegment {
            id,
            mass,
            com_offset,
            inertia: geometry.inertia(mass),
            geometry,
        }
    }

    /// Weight in N under standard gravity.
    pub fn weight(&self) -> f64 {
        self.mass * GRAVITY
    }
}

/// Pull-only link anchoring a suit segment to a body landmark. Force is
/// transmitted only along the line from `suit_point` toward `body_point`,
/// and only in tension.
#[derive(Debug, Clone)]
pub struct BeltConstraint {
    pub segment: SegmentId,
    /// Anchor on the suit, segment frame, m.
    pub suit_point: Vector3<f64>,
    /// Anchor on the body, body-segment frame, m.
    pub body_point: Vector3<f64>,
    pub body_segment: BodySegment,
}

/// Length of the taut arm suspension link in the reference pose, m. The arm
/// shell hangs this far below its torso pivot.
pub const ARM_LINK_DROP: f64 = 0.02;

/// Suspension link hanging an arm shell from the torso shell. Like a belt it
/// carries tension only, but both ends attach to suit segments, so its load
/// routes into the torso rather than directly into the wearer.
#[derive(Debug, Clone)]
pub struct ArmSuspension {
    pub arm: SegmentId,
    /// Attachment on the arm, arm frame, m.
    pub arm_point: Vector3<f64>,
    /// Attachment on the torso, FT frame, m.
    pub torso_point: Vector3<f64>,
}

/// Rectangular patch generating a uniform grid of contact points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionPatch {
    /// Patch center in the segment frame, m.
    pub center: [f64; 3],
    /// Unit axis of the first grid direction (segment frame).
    pub axis_u: [f64; 3],
    /// Unit axis of the second grid direction (segment frame).
    pub axis_v: [f64; 3],
    /// Patch extent along `axis_u` and `axis_v`, m.
    pub size: [f64; 2],
    /// Grid counts along `axis_u` and `axis_v`.
    pub grid: [usize; 2],
    /// Outward contact normal (segment frame); points from the wearer's
    /// surface into the suit, i.e. the direction the wearer can push.
    pub normal: [f64; 3],
}

impl RegionPatch {
    /// Cell-center grid: `grid[0] * grid[1]` points, uniformly spaced, with
    /// the point-set centroid at the patch center.
    pub fn points(&self) -> Vec<ContactPoint> {
        let center = Vector3::from(self.center);
        let u = Vector3::from(self.axis_u);
        let v = Vector3::from(self.axis_v);
        let n = Unit::new_normalize(Vector3::from(self.normal));
        let (nu, nv) = (self.grid[0], self.grid[1]);
        let (du, dv) = (self.size[0] / nu as f64, self.size[1] / nv as f64);
        let mut pts = Vec::with_capacity(nu * nv);
        for i in 0..nu {
            for j in 0..nv {
                let su = (i as f64 + 0.5) * du - self.size[0] / 2.0;
                let sv = (j as f64 + 0.5) * dv - self.size[1] / 2.0;
                pts.push(ContactPoint {
                    position: center + u * su + v * sv,
                    normal: n,
                });
            }
        }
        pts
    }
}

/// A single contact point: position and outward normal in the segment frame.
#[derive(Debug, Clone, Copy)]
pub struct ContactPoint {
    pub position: Vector3<f64>,
    pub normal: Unit<Vector3<f64>>,
}

/// Suit-fixed set of contact points on one segment.
#[derive(Debug, Clone)]
pub struct ContactRegion {
    pub id: RegionId,
    pub segment: SegmentId,
    pub points: Vec<ContactPoint>,
    /// Generating patch, kept for serialization and layout checks.
    pub patch: RegionPatch,
}

impl ContactRegion {
    pub fn from_patch(id: RegionId, segment: SegmentId, patch: RegionPatch) -> Self {
        let points = patch.points();
        ContactRegion {
            id,
            segment,
            points,
            patch,
        }
    }
}

/// Wearer dimensions the suit geometry and leg chains are scaled to.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Anthropometry {
    /// Base (lower back) to hip-joint offsets, base frame, m.
    pub base_to_hip_left: [f64; 3],
    pub base_to_hip_right: [f64; 3],
    /// Hip-to-knee length, m.
    pub thigh_length: f64,
    /// Knee-to-ankle length, m.
    pub shank_length: f64,
    /// Ankle-to-sole offset in the foot frame, m.
    pub ankle_to_sole: [f64; 3],
    /// Standing height, m.
    pub subject_height: f64,
    /// Body mass, kg.
    pub subject_mass: f64,
}

impl Default for Anthropometry {
    fn default() -> Self {
        // 1.69 m / 60 kg reference subject; limb fractions from standard
        // anthropometric tables.
        let h = 1.69;
        Anthropometry {
            base_to_hip_left: [0.0, 0.053 * h, -0.059 * h],
            base_to_hip_right: [0.0, -0.053 * h, -0.059 * h],
            thigh_length: 0.245 * h,
            shank_length: 0.246 * h,
            ankle_to_sole: [0.0, 0.0, -0.039 * h],
            subject_height: h,
            subject_mass: 60.0,
        }
    }
}

impl Anthropometry {
    pub fn validate(&self) -> Result<(), ModelError> {
        let checks = [
            ("thigh_length", self.thigh_length),
            ("shank_length", self.shank_length),
            ("subject_height", self.subject_height),
            ("subject_mass", self.subject_mass),
        ];
        for (name, v) in checks {
            if !(v > 0.0) {
                return Err(ModelError::NonPositiveLength(name, v));
            }
        }
        Ok(())
    }

    pub fn base_to_hip(&self, side: Side) -> Vector3<f64> {
        match side {
            Side::Left => Vector3::from(self.base_to_hip_left),
            Side::Right => Vector3::from(self.base_to_hip_right),
        }
    }

    /// Hip-to-sole distance with the leg straight, m.
    pub fn leg_length(&self) -> f64 {
        self.thigh_length + self.shank_length + Vector3::from(self.ankle_to_sole).norm()
    }
}

/// Origin of the neck anchor frame in the base frame, m. Scales with height.
pub fn neck_offset(anthro: &Anthropometry) -> Vector3<f64> {
    let h = anthro.subject_height;
    Vector3::new(-0.024 * h, 0.0, 0.26 * h)
}

/// Left/right selector used throughout the leg kinematics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// Sign of the y (leftward) axis for this side: +1 left, -1 right.
    pub fn lateral_sign(&self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }
}

/// Complete suit model: segments, belts, contact regions, arm suspensions,
/// and the anthropometry it was scaled to. Immutable after construction.
#[derive(Debug, Clone)]
pub struct SuitModel {
    pub anthropometry: Anthropometry,
    pub segments: Vec<SuitSegment>,
    pub belts: Vec<BeltConstraint>,
    pub regions: Vec<ContactRegion>,
    pub arm_suspensions: Vec<ArmSuspension>,
}

/// Factory weights (N) of the eight modeled suit components.
pub const SEGMENT_WEIGHTS_N: [(SegmentId, f64); 8] = [
    (SegmentId::RLU, 9.34),
    (SegmentId::RLL, 14.01),
    (SegmentId::LLU, 9.28),
    (SegmentId::LLL, 13.92),
    (SegmentId::BP, 12.21),
    (SegmentId::RA, 13.51),
    (SegmentId::LA, 13.51),
    (SegmentId::FT, 93.23),
];

/// Total factory weight of the modeled suit, N.
pub const TOTAL_WEIGHT_N: f64 = 179.01;

fn weight_of(id: SegmentId) -> f64 {
    SEGMENT_WEIGHTS_N
        .iter()
        .find(|(s, _)| *s == id)
        .map(|(_, w)| *w)
        .unwrap()
}

/// Builds the default suit scaled to `anthro`.
///
/// Trunk shells use frames coincident with the base frame; leg shells hang
/// from the hip/knee joints with z up the limb. Belt anchors default to the
/// segment's long axis so that the reference standing pose is exactly
/// supported; anchor coordinates are config-exposed for other placements.
pub fn build_default_suit(anthro: &Anthropometry) -> Result<SuitModel, ModelError> {
    anthro.validate()?;
    let h = anthro.subject_height;
    // Height fractions of the trunk landmarks (z above the base).
    let shoulder = Vector3::new(0.0, 0.107 * h, 0.225 * h);
    let neck = neck_offset(anthro);
    let arm_pivot_y = 0.137 * h;

    let leg_shell = |len: f64, r: f64| SegmentGeometry::CylinderShell {
        length: len,
        outer_radius: r * h / 1.69,
        thickness: 0.01,
    };

    // The FT and BP centers of mass are placed so that the combined torso
    // weight (front shell, back pad, and the arm loads routed through the
    // shoulder pivots) acts over the shoulder patch line; the shoulders
    // carry the torso nearly vertically, as they do on the physical suit.
    let segments = vec![
        SuitSegment::new(
            SegmentId::FT,
            weight_of(SegmentId::FT),
            Vector3::new(0.0059 * h, 0.0, 0.142 * h),
            SegmentGeometry::Box {
                size: [0.047 * h, 0.25 * h, 0.32 * h],
            },
        ),
        SuitSegment::new(
            SegmentId::BP,
            weight_of(SegmentId::BP),
            Vector3::new(-0.0473 * h, 0.0, 0.130 * h),
            SegmentGeometry::Box {
                size: [0.030 * h, 0.22 * h, 0.28 * h],
            },
        ),
        SuitSegment::new(
            SegmentId::RLU,
            weight_of(SegmentId::RLU),
            Vector3::new(0.0, 0.0, -anthro.thigh_length / 2.0),
            leg_shell(anthro.thigh_length, 0.07),
        ),
        SuitSegment::new(
            SegmentId::LLU,
            weight_of(SegmentId::LLU),
            Vector3::new(0.0, 0.0, -anthro.thigh_length / 2.0),
            leg_shell(anthro.thigh_length, 0.07),
        ),
        SuitSegment::new(
            SegmentId::RLL,
            weight_of(SegmentId::RLL),
            Vector3::new(0.0, 0.0, -anthro.shank_length / 2.0),
            leg_shell(anthro.shank_length, 0.06),
        ),
        SuitSegment::new(
            SegmentId::LLL,
            weight_of(SegmentId::LLL),
            Vector3::new(0.0, 0.0, -anthro.shank_length / 2.0),
            leg_shell(anthro.shank_length, 0.06),
        ),
        SuitSegment::new(
            SegmentId::RA,
            weight_of(SegmentId::RA),
            Vector3::new(0.0, 0.0, -0.165 * h),
            leg_shell(0.33 * h, 0.055),
        ),
        SuitSegment::new(
            SegmentId::LA,
            weight_of(SegmentId::LA),
            Vector3::new(0.0, 0.0, -0.165 * h),
            leg_shell(0.33 * h, 0.055),
        ),
    ];

    // Belts: FT and BP to the neck point; each leg shell to its parent joint.
    // Trunk anchors sit directly below the neck point, leg anchors on the
    // limb axis, so every belt line is vertical in the standing pose.
    let belts = vec![
        BeltConstraint {
            segment: SegmentId::FT,
            suit_point: Vector3::new(neck.x, 0.0, 0.24 * h),
            body_point: Vector3::zeros(),
            body_segment: BodySegment::Neck,
        },
        BeltConstraint {
            segment: SegmentId::BP,
            suit_point: Vector3::new(neck.x, 0.0, 0.235 * h),
            body_point: Vector3::zeros(),
            body_segment: BodySegment::Neck,
        },
        BeltConstraint {
            segment: SegmentId::RLU,
            suit_point: Vector3::zeros(),
            body_point: Vector3::new(0.0, 0.0, 0.02),
            body_segment: BodySegment::RightHip,
        },
        BeltConstraint {
            segment: SegmentId::LLU,
            suit_point: Vector3::zeros(),
            body_point: Vector3::new(0.0, 0.0, 0.02),
            body_segment: BodySegment::LeftHip,
        },
        BeltConstraint {
            segment: SegmentId::RLL,
            suit_point: Vector3::zeros(),
            body_point: Vector3::new(0.0, 0.0, 0.02),
            body_segment: BodySegment::RightKnee,
        },
        BeltConstraint {
            segment: SegmentId::LLL,
            suit_point: Vector3::zeros(),
            body_point: Vector3::new(0.0, 0.0, 0.02),
            body_segment: BodySegment::LeftKnee,
        },
    ];

    // Shoulder patches: fixed 160 x 70 mm sensor footprint on a 10 x 6
    // cell-center grid, normal up (the wearer pushes the shell upward).
    let patch = |y_sign: f64| RegionPatch {
        center: [0.0, y_sign * shoulder.y, shoulder.z],
        axis_u: [1.0, 0.0, 0.0],
        axis_v: [0.0, 1.0, 0.0],
        size: [0.16, 0.07],
        grid: [10, 6],
        normal: [0.0, 0.0, 1.0],
    };
    let regions = vec![
        ContactRegion::from_patch(RegionId::LeftShoulder, SegmentId::FT, patch(1.0)),
        ContactRegion::from_patch(RegionId::RightShoulder, SegmentId::FT, patch(-1.0)),
    ];

    let arm_suspensions = vec![
        ArmSuspension {
            arm: SegmentId::LA,
            arm_point: Vector3::zeros(),
            torso_point: Vector3::new(0.0, arm_pivot_y, shoulder.z + 0.02),
        },
        ArmSuspension {
            arm: SegmentId::RA,
            arm_point: Vector3::zeros(),
            torso_point: Vector3::new(0.0, -arm_pivot_y, shoulder.z + 0.02),
        },
    ];

    let model = SuitModel {
        anthropometry: anthro.clone(),
        segments,
        belts,
        regions,
        arm_suspensions,
    };
    model.validate()?;
    Ok(model)
}

impl SuitModel {
    pub fn segment(&self, id: SegmentId) -> &SuitSegment {
        self.segments
            .iter()
            .find(|s| s.id == id)
            .expect("validated model")
    }

    pub fn region(&self, id: &RegionId) -> Option<&ContactRegion> {
        self.regions.iter().find(|r| &r.id == id)
    }

    /// Sum of segment weights, N.
    pub fn total_weight(&self) -> f64 {
        self.segments.iter().map(|s| s.weight()).sum()
    }

    /// Checks every structural invariant of the model.
    pub fn validate(&self) -> Result<(), ModelError> {
        self.anthropometry.validate()?;
        for id in SegmentId::ALL {
            let count = self.segments.iter().filter(|s| s.id == id).count();
            if count != 1 {
                return Err(ModelError::SegmentMultiplicity(id, count));
            }
        }
        for seg in &self.segments {
            if !(seg.mass > 0.0) {
                return Err(ModelError::NonPositiveMass(seg.id, seg.mass));
            }
            let sym = (seg.inertia + seg.inertia.transpose()) / 2.0;
            let min_eig = sym
                .symmetric_eigenvalues()
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            if min_eig < -1e-9 {
                return Err(ModelError::IndefiniteInertia(seg.id, min_eig));
            }
        }
        let belt_rule = [
            (SegmentId::FT, BodySegment::Neck),
            (SegmentId::BP, BodySegment::Neck),
            (SegmentId::RLU, BodySegment::RightHip),
            (SegmentId::LLU, BodySegment::LeftHip),
            (SegmentId::RLL, BodySegment::RightKnee),
            (SegmentId::LLL, BodySegment::LeftKnee),
        ];
        for (seg, body) in belt_rule {
            let n = self
                .belts
                .iter()
                .filter(|b| b.segment == seg && b.body_segment == body)
                .count();
            if n != 1 {
                return Err(ModelError::BeltRule(seg, body));
            }
        }
        for region in &self.regions {
            if region.points.is_empty() {
                return Err(ModelError::EmptyRegion(region.id.clone()));
            }
            for (i, p) in region.points.iter().enumerate() {
                let nrm = p.normal.as_ref().norm();
                if (nrm - 1.0).abs() > 1e-9 {
                    return Err(ModelError::NonUnitNormal(region.id.clone(), i, nrm));
                }
            }
            // The declared patch must regenerate the stored points.
            let regen = region.patch.points();
            if regen.len() != region.points.len()
                || regen.iter().zip(&region.points).any(|(a, b)| {
                    (a.position - b.position).norm() > 1e-9
                        || (a.normal.as_ref() - b.normal.as_ref()).norm() > 1e-9
                })
            {
                return Err(ModelError::IrregularGrid(region.id.clone()));
            }
        }
        Ok(())
    }
}

/// Maps a region's points and normals into the world frame through a rigid
/// transform given as a rotation matrix and translation. The rotation must
/// be orthonormal.
pub fn region_points_world(
    region: &ContactRegion,
    rotation: &Matrix3<f64>,
    translation: &Vector3<f64>,
) -> Result<Vec<(Vector3<f64>, Unit<Vector3<f64>>)>, ModelError> {
    let dev = orthonormality_defect(rotation);
    if dev > 1e-6 {
        return Err(ModelError::NonOrthonormalRotation(dev));
    }
    Ok(region
        .points
        .iter()
        .map(|p| {
            (
                rotation * p.position + translation,
                Unit::new_unchecked(rotation * p.normal.as_ref()),
            )
        })
        .collect())
}

/// Max absolute entry of `R^T R - I`.
pub fn orthonormality_defect(rotation: &Matrix3<f64>) -> f64 {
    let d = rotation.transpose() * rotation - Matrix3::identity();
    d.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}
