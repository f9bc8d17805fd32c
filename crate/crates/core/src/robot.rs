//! Robot configuration presets and validation.

use crate::drive::ChassisParams;
use serde::{Deserialize, Serialize};

pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotConfig {
    pub name: String,
    pub n_legs: usize,
    /// Body length (m).
    pub body_length: f64,
    /// Hip-to-hip spacing between adjacent axles (m).
    pub hip_to_hip: f64,
    pub body_width: f64,
    /// Leg-to-leg track width (m).
    pub track_d: f64,
    pub body_height: f64,
    pub total_mass: f64,
    pub body_mass: f64,
    /// Mass of one wheel-leg module (kg).
    pub wheel_leg_mass: f64,
    pub battery_mass: f64,
    /// Closed wheel radius (m).
    pub wheel_radius: f64,
    /// Maximum wheel-leg radius in legged mode (m).
    pub max_wheel_leg_radius: f64,
    /// Belt stage: joint speed per wheel speed.
    pub reduction_nt: f64,
    /// Torque limit per drive motor (N*m).
    pub drive_torque_limit: f64,
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("invalid robot config: {}", violations.join("; "))]
pub struct ValidationError {
    pub violations: Vec<String>,
}

impl RobotConfig {
    /// Four-legged preset.
    pub fn quad_swheg() -> RobotConfig {
        RobotConfig {
            name: "quad_swheg".into(),
            n_legs: 4,
            body_length: 0.4,
            hip_to_hip: 0.3,
            body_width: 0.3,
            track_d: 0.39,
            body_height: 0.154,
            total_mass: 8.406,
            body_mass: 6.392,
            wheel_leg_mass: 0.336,
            battery_mass: 0.673,
            wheel_radius: 0.12,
            max_wheel_leg_radius: 0.125,
            reduction_nt: 43.0 / 31.0,
            drive_torque_limit: 3.0,
        }
    }

    /// Six-legged preset.
    pub fn hex_swheg() -> RobotConfig {
        RobotConfig {
            name: "hex_swheg".into(),
            n_legs: 6,
            body_length: 0.47,
            hip_to_hip: 0.2,
            body_width: 0.3,
            track_d: 0.46,
            body_height: 0.154,
            total_mass: 9.791,
            body_mass: 7.12,
            wheel_leg_mass: 0.336,
            battery_mass: 0.673,
            wheel_radius: 0.12,
            max_wheel_leg_radius: 0.125,
            reduction_nt: 43.0 / 31.0,
            drive_torque_limit: 3.0,
        }
    }

    pub fn preset(name: &str) -> Option<RobotConfig> {
        match name {
            "quad_swheg" => Some(RobotConfig::quad_swheg()),
            "hex_swheg" => Some(RobotConfig::hex_swheg()),
            _ => None,
        }
    }

    /// Collect every violated invariant.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let mut violations = Vec::new();
        if self.n_legs != 4 && self.n_legs != 6 {
            violations.push(format!("n_legs must be 4 or 6, got {}", self.n_legs));
        }
        for (name, v) in [
            ("body_length", self.body_length),
            ("hip_to_hip", self.hip_to_hip),
            ("body_width", self.body_width),
            ("track_d", self.track_d),
            ("body_height", self.body_height),
            ("total_mass", self.total_mass),
            ("body_mass", self.body_mass),
            ("wheel_leg_mass", self.wheel_leg_mass),
            ("battery_mass", self.battery_mass),
            ("wheel_radius", self.wheel_radius),
            ("max_wheel_leg_radius", self.max_wheel_leg_radius),
            ("reduction_nt", self.reduction_nt),
            ("drive_torque_limit", self.drive_torque_limit),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                violations.push(format!("{name} must be positive, got {v}"));
            }
        }
        // Catalog masses carry rounding: allow one percent of slack between
        // the total and the sum of the listed parts.
        let parts = self.body_mass + self.n_legs as f64 * self.wheel_leg_mass + self.battery_mass;
        if self.total_mass < parts * 0.99 {
            violations.push(format!(
                "total mass {} is below the sum of listed parts {:.3}",
                self.total_mass, parts
            ));
        }
        if self.max_wheel_leg_radius < self.wheel_radius {
            violations.push("legged radius below the closed wheel radius".into());
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ValidationError { violations })
        }
    }

    pub fn chassis(&self) -> ChassisParams {
        ChassisParams::new(self.track_d, self.wheel_radius, self.reduction_nt)
    }

    /// Axle x-offsets from the body center, front first.
    pub fn axle_offsets(&self) -> Vec<f64> {
        match self.n_legs {
            4 => vec![self.hip_to_hip / 2.0, -self.hip_to_hip / 2.0],
            6 => vec![self.hip_to_hip, 0.0, -self.hip_to_hip],
            n => panic!("unsupported leg count {n}"),
        }
    }

    /// Static load carried by one axle (N), uniform split.
    pub fn axle_load(&self) -> f64 {
        self.total_mass * GRAVITY / (self.n_legs as f64 / 2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_mirror_the_published_table() {
        let quad = RobotConfig::quad_swheg();
        assert_eq!(quad.total_mass, 8.406);
        assert_eq!(quad.track_d, 0.39);
        assert_eq!(quad.n_legs, 4);
        quad.validate().unwrap();

        let hex = RobotConfig::hex_swheg();
        assert_eq!(hex.total_mass, 9.791);
        assert_eq!(hex.n_legs, 6);
        assert_eq!(hex.track_d, 0.46);
        hex.validate().unwrap();
    }

    #[test]
    fn five_legs_is_rejected() {
        let mut cfg = RobotConfig::quad_swheg();
        cfg.n_legs = 5;
        let err = cfg.validate().unwrap_err();
        assert!(err.violations.iter().any(|v| v.contains("n_legs")));
    }

    #[test]
    fn validation_lists_every_violation() {
        let mut cfg = RobotConfig::quad_swheg();
        cfg.n_legs = 5;
        cfg.track_d = -1.0;
        cfg.total_mass = 1.0;
        let err = cfg.validate().unwrap_err();
        assert!(err.violations.len() >= 3, "{:?}", err.violations);
    }
}
