//! Human–suit interface load computation from wearable-sensor kinematics.
//!
//! The library chains four stages:
//!
//! 1. [`model`] — rigid-body decomposition of a heavy protective suit into
//!    eight segments with belts, contact regions, and scaled anthropometry.
//! 2. [`estimator`] — a discrete Kalman filter fusing base-IMU acceleration
//!    with leg forward kinematics to recover base and foot positions in the
//!    world frame.
//! 3. [`dynamics`] — Newton–Euler segment wrenches distributed over contact
//!    points and pull-only belts by a convex quadratic program.
//! 4. [`analysis`] — resultant-load series, outlier rejection, and RMS
//!    comparison between simulated and measured loads.
//!
//! [`kinematics`] provides the leg chain and pose differentiation shared by
//! the estimator and the dynamics stage, [`config`]/[`io`] the on-disk
//! formats used by the batch pipeline.

pub mod analysis;
pub mod config;
pub mod dynamics;
pub mod estimator;
pub mod io;
pub mod kinematics;
pub mod model;
pub mod qp;
pub mod signal;

pub use analysis::{LoadSeries, LoadSource, MotionKind, OutlierMode, TrialStats};
pub use dynamics::{ContactSolution, Wrench};
pub use estimator::{FilterState, NoiseConfig};
pub use kinematics::{JointAngles, TrialRecording};
pub use model::{Anthropometry, RegionId, SegmentId, SuitModel};

/// Standard gravitational acceleration, m/s². World z-axis points up, so the
/// gravity vector is `(0, 0, -GRAVITY)`.
pub const GRAVITY: f64 = 9.81;

/// World-frame gravity vector, m/s².
pub fn gravity_vector() -> nalgebra::Vector3<f64> {
    nalgebra::Vector3::new(0.0, 0.0, -GRAVITY)
}
