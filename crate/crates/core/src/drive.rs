//! Differential-wheel steering model for wheeled mode.
//!
//! Sign convention: positive angular velocity is counter-clockwise viewed
//! from above, so the right side speeds up.

use serde::{Deserialize, Serialize};

/// Chassis parameters entering the steering model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChassisParams {
    /// Leg-to-leg track width (m).
    pub track_d: f64,
    /// Wheel radius (m).
    pub wheel_radius: f64,
    /// Joint speed per wheel speed; the belt stage runs 43:31.
    pub reduction_nt: f64,
}

impl ChassisParams {
    pub fn new(track_d: f64, wheel_radius: f64, reduction_nt: f64) -> Self {
        assert!(track_d > 0.0 && wheel_radius > 0.0 && reduction_nt > 0.0);
        ChassisParams { track_d, wheel_radius, reduction_nt }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("zero angular velocity: straight-line motion has no turning center")]
pub struct StraightLine;

/// Signed turning radius v/w of the instant center of rotation.
pub fn turning_radius(v: f64, w: f64) -> Result<f64, StraightLine> {
    if w == 0.0 {
        return Err(StraightLine);
    }
    Ok(v / w)
}

/// Joint angular velocities (left, right) for a body twist.
pub fn wheel_speeds(v: f64, w: f64, p: &ChassisParams) -> (f64, f64) {
    let denom = p.wheel_radius * p.reduction_nt;
    let right = (v + w * p.track_d / 2.0) / denom;
    let left = (v - w * p.track_d / 2.0) / denom;
    (left, right)
}
