//! Three-layer control stack: a finite state machine over locomotion modes,
//! per-joint trajectory dispatch for the active mode, and PD tracking at
//! the joint level.
//!
//! One transformation clock drives the tendon servo of every wheel-leg
//! module: the per-tick command set carries a single servo angle, so all
//! modules transform in sync by construction.

use crate::drive::{wheel_speeds, ChassisParams};
use crate::gait::{
    gait_from_twist, joint_trajectory, ContactRegion, GaitError, GaitSpec, GaitType, LegId, Side,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransformDirection {
    Expand,
    Retract,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetMode {
    Wheeled,
    Legged,
    Synchronized,
}

/// Locomotion mode tracked by the instruction-layer state machine.
#[derive(Debug, Clone, PartialEq)]
pub enum RobotMode {
    Wheeled { v: f64, w: f64 },
    Legged { spec: GaitSpec, clock: f64 },
    TurningInPlace { spec: GaitSpec, clock: f64 },
    Synchronized { speed: f64, clock: f64 },
    Transforming { direction: TransformDirection, progress: f64, target: TargetMode },
}

impl RobotMode {
    pub fn label(&self) -> &'static str {
        match self {
            RobotMode::Wheeled { .. } => "wheeled",
            RobotMode::Legged { .. } => "legged",
            RobotMode::TurningInPlace { .. } => "turning_in_place",
            RobotMode::Synchronized { .. } => "synchronized",
            RobotMode::Transforming { .. } => "transforming",
        }
    }

    /// Whether the wheel-leg modules are expanded in this mode.
    pub fn is_expanded(&self) -> bool {
        matches!(
            self,
            RobotMode::Legged { .. } | RobotMode::TurningInPlace { .. } | RobotMode::Synchronized { .. }
        )
    }
}

/// High-level instruction consumed by the state machine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", content = "args", rename_all = "snake_case")]
pub enum Instruction {
    SetMode { mode: TargetMode },
    SetTwist { v: f64, w: f64 },
    SetGait { gait: GaitType, period_tc: f64 },
    Tick { dt: f64 },
}

/// A timestamped instruction, the unit of the replayable command stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedInstruction {
    pub timestamp: f64,
    #[serde(flatten)]
    pub instruction: Instruction,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum ControlError {
    #[error("illegal transition: {instruction} while {mode}")]
    IllegalTransition { mode: &'static str, instruction: String },
    #[error(transparent)]
    Gait(#[from] GaitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdGains {
    pub kp: f64,
    pub kd: f64,
    pub torque_limit: f64,
}

impl Default for PdGains {
    fn default() -> Self {
        PdGains { kp: 20.0, kd: 0.5, torque_limit: 3.0 }
    }
}

/// Static controller context: chassis, contact geometry and tuning.
#[derive(Debug, Clone)]
pub struct ControllerConfig {
    pub chassis: ChassisParams,
    pub region: ContactRegion,
    pub n_legs: usize,
    pub gains: PdGains,
    /// Wall time of one full transformation (s).
    pub transform_duration: f64,
    /// Servo angle spanning the tendon travel (rad).
    pub servo_travel: f64,
}

impl ControllerConfig {
    pub fn new(chassis: ChassisParams, n_legs: usize) -> Self {
        ControllerConfig {
            chassis,
            region: *ContactRegion::canonical(),
            n_legs,
            gains: PdGains::default(),
            transform_duration: 1.0,
            servo_travel: crate::linkage::Linkage::canonical().geometry().servo_travel(),
        }
    }
}

/// Advance the state machine by one instruction. Illegal edges leave the
/// mode unchanged and are reported as errors.
pub fn fsm_step(
    mode: &RobotMode,
    instruction: &Instruction,
    cfg: &ControllerConfig,
) -> Result<RobotMode, ControlError> {
    use Instruction::*;
    use RobotMode::*;
    let illegal = |what: &Instruction| ControlError::IllegalTransition {
        mode: mode.label(),
        instruction: format!("{what:?}"),
    };
    match (mode, instruction) {
        (Wheeled { v, w }, SetMode { mode: target }) => {
            if *target == TargetMode::Wheeled {
                return Ok(mode.clone());
            }
            // Wheels must be commanded to rest before transforming.
            if v.abs() > 1e-9 || w.abs() > 1e-9 {
                return Err(illegal(instruction));
            }
            Ok(Transforming { direction: TransformDirection::Expand, progress: 0.0, target: *target })
        }
        (Wheeled { .. }, SetTwist { v, w }) => Ok(Wheeled { v: *v, w: *w }),
        (Wheeled { .. }, SetGait { .. }) => Err(illegal(instruction)),
        (Wheeled { .. }, Tick { .. }) => Ok(mode.clone()),

        (Transforming { direction, progress, target }, Tick { dt }) => {
            let next = progress + dt / cfg.transform_duration;
            if next < 1.0 {
                return Ok(Transforming { direction: *direction, progress: next, target: *target });
            }
            Ok(match (direction, target) {
                (TransformDirection::Retract, _) | (_, TargetMode::Wheeled) => {
                    Wheeled { v: 0.0, w: 0.0 }
                }
                (TransformDirection::Expand, TargetMode::Legged) => {
                    // Hub angles re-home to the gait start before the clock
                    // runs: a fresh mode starts at clock zero.
                    let spec = GaitSpec::with_defaults(GaitType::default_for(cfg.n_legs), cfg.n_legs, 3.0)?;
                    Legged { spec, clock: 0.0 }
                }
                (TransformDirection::Expand, TargetMode::Synchronized) => {
                    Synchronized { speed: 0.0, clock: 0.0 }
                }
            })
        }
        (Transforming { .. }, _) => Err(illegal(instruction)),

        (Legged { spec, clock }, Tick { dt }) => {
            Ok(Legged { spec: spec.clone(), clock: clock + dt })
        }
        (Legged { .. }, SetTwist { v, w }) => {
            if *v == 0.0 && *w == 0.0 {
                return Err(illegal(instruction));
            }
            if *v == 0.0 {
                let spec =
                    gait_from_twist(0.0, *w, GaitType::TurnInPlace, cfg.n_legs, &cfg.chassis, &cfg.region)?;
                return Ok(TurningInPlace { spec, clock: 0.0 });
            }
            let gait = match mode {
                Legged { spec, .. } => spec.gait_type,
                _ => GaitType::default_for(cfg.n_legs),
            };
            let spec = gait_from_twist(*v, *w, gait, cfg.n_legs, &cfg.chassis, &cfg.region)?;
            Ok(Legged { spec, clock: 0.0 })
        }
        (Legged { .. }, SetGait { gait, period_tc }) => {
            let spec = GaitSpec::with_defaults(*gait, cfg.n_legs, *period_tc)?;
            Ok(Legged { spec, clock: 0.0 })
        }
        (Legged { .. }, SetMode { mode: target }) => match target {
            TargetMode::Wheeled => Ok(Transforming {
                direction: TransformDirection::Retract,
                progress: 0.0,
                target: TargetMode::Wheeled,
            }),
            TargetMode::Synchronized => Ok(Synchronized { speed: 0.0, clock: 0.0 }),
            TargetMode::Legged => Ok(mode.clone()),
        },

        (TurningInPlace { spec, clock }, Tick { dt }) => {
            Ok(TurningInPlace { spec: spec.clone(), clock: clock + dt })
        }
        (TurningInPlace { .. }, SetTwist { v, w }) => {
            fsm_step(&Legged { spec: dummy_spec(cfg)?, clock: 0.0 }, &SetTwist { v: *v, w: *w }, cfg)
        }
        (TurningInPlace { .. }, SetMode { .. }) => {
            fsm_step(&Legged { spec: dummy_spec(cfg)?, clock: 0.0 }, instruction, cfg)
        }
        (TurningInPlace { .. }, SetGait { .. }) => {
            fsm_step(&Legged { spec: dummy_spec(cfg)?, clock: 0.0 }, instruction, cfg)
        }

        (Synchronized { speed, clock }, Tick { dt }) => {
            Ok(Synchronized { speed: *speed, clock: clock + dt })
        }
        (Synchronized { .. }, SetTwist { v, w }) => {
            if *w != 0.0 {
                return Err(illegal(instruction));
            }
            Ok(Synchronized { speed: v / cfg.region.r_avg, clock: 0.0 })
        }
        (Synchronized { .. }, SetGait { gait, period_tc }) => {
            let spec = GaitSpec::with_defaults(*gait, cfg.n_legs, *period_tc)?;
            Ok(Legged { spec, clock: 0.0 })
        }
        (Synchronized { .. }, SetMode { mode: target }) => match target {
            TargetMode::Wheeled => Ok(Transforming {
                direction: TransformDirection::Retract,
                progress: 0.0,
                target: TargetMode::Wheeled,
            }),
            _ => Ok(mode.clone()),
        },
    }
}

impl GaitType {
    /// Default moving gait for a leg count: hexapods trot on triples.
    pub fn default_for(n_legs: usize) -> GaitType {
        if n_legs == 6 {
            GaitType::Tripod
        } else {
            GaitType::Trot
        }
    }
}

fn dummy_spec(cfg: &ControllerConfig) -> Result<GaitSpec, ControlError> {
    Ok(GaitSpec::with_defaults(GaitType::default_for(cfg.n_legs), cfg.n_legs, 3.0)?)
}

/// Per-joint command emitted by the planner layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JointCommand {
    Position { angle: f64, velocity: f64 },
    Velocity { velocity: f64 },
    Hold,
}

/// One tick's worth of joint targets: hub commands per leg plus the single
/// transformation servo angle shared by every module.
#[derive(Debug, Clone, PartialEq)]
pub struct TickCommands {
    pub legs: Vec<JointCommand>,
    pub transform_servo: f64,
}

/// Planner layer: joint targets for the current mode.
pub fn joint_targets(mode: &RobotMode, cfg: &ControllerConfig) -> Result<TickCommands, ControlError> {
    let legs = LegId::all(cfg.n_legs);
    match mode {
        RobotMode::Wheeled { v, w } => {
            let (left, right) = wheel_speeds(*v, *w, &cfg.chassis);
            let commands = legs
                .iter()
                .map(|leg| {
                    JointCommand::Velocity {
                        velocity: if leg.side == Side::Left { left } else { right },
                    }
                })
                .collect();
            Ok(TickCommands { legs: commands, transform_servo: 0.0 })
        }
        RobotMode::Legged { spec, clock } | RobotMode::TurningInPlace { spec, clock } => {
            let commands = legs
                .iter()
                .map(|leg| {
                    joint_trajectory(spec, *leg, *clock).map(|t| JointCommand::Position {
                        angle: t.angle,
                        velocity: t.velocity,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(TickCommands { legs: commands, transform_servo: cfg.servo_travel })
        }
        RobotMode::Synchronized { speed, clock } => {
            let commands = legs
                .iter()
                .map(|_| JointCommand::Position { angle: speed * clock, velocity: *speed })
                .collect();
            Ok(TickCommands { legs: commands, transform_servo: cfg.servo_travel })
        }
        RobotMode::Transforming { direction, progress, .. } => {
            // No gait targets mid-transformation: hubs hold while the one
            // transformation clock drives every module's servo.
            let t = progress.clamp(0.0, 1.0) * cfg.transform_duration;
            let servo = transformation_profile(*direction, t, cfg.transform_duration, cfg.servo_travel);
            Ok(TickCommands { legs: vec![JointCommand::Hold; cfg.n_legs], transform_servo: servo })
        }
    }
}

/// Cubic-eased servo angle between the two travel extremes. Expansion ends
/// at the mechanical stop.
pub fn transformation_profile(
    direction: TransformDirection,
    t: f64,
    duration: f64,
    servo_travel: f64,
) -> f64 {
    assert!(duration > 0.0);
    let u = (t / duration).clamp(0.0, 1.0);
    let eased = u * u * (3.0 - 2.0 * u);
    match direction {
        TransformDirection::Expand => servo_travel * eased,
        TransformDirection::Retract => servo_travel * (1.0 - eased),
    }
}

/// Behavior layer: PD torque for one joint, clamped to the actuator limit.
/// Velocity commands track with kp forced to zero.
pub fn pd_track(target: &JointCommand, angle: f64, velocity: f64, gains: &PdGains) -> f64 {
    let raw = match target {
        JointCommand::Position { angle: a, velocity: v } => {
            gains.kp * (a - angle) + gains.kd * (v - velocity)
        }
        JointCommand::Velocity { velocity: v } => gains.kd * (v - velocity),
        JointCommand::Hold => gains.kd * (0.0 - velocity),
    };
    raw.clamp(-gains.torque_limit, gains.torque_limit)
}

/// Shortest-path rehoming: the equivalent target angle nearest to `current`.
pub fn rehome_angle(target: f64, current: f64) -> f64 {
    let tau = crate::geom::TAU;
    let mut best = target + ((current - target) / tau).round() * tau;
    if (best - current).abs() > (best + tau - current).abs() {
        best += tau;
    }
    if (best - current).abs() > (best - tau - current).abs() {
        best -= tau;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gait::predict_twist;

    fn cfg() -> ControllerConfig {
        ControllerConfig::new(ChassisParams::new(0.39, 0.12, 43.0 / 31.0), 4)
    }

    #[test]
    fn wheeled_to_legged_passes_through_transforming() {
        let cfg = cfg();
        let mode = RobotMode::Wheeled { v: 0.0, w: 0.0 };
        let next = fsm_step(&mode, &Instruction::SetMode { mode: TargetMode::Legged }, &cfg).unwrap();
        match next {
            RobotMode::Transforming { direction: TransformDirection::Expand, progress, .. } => {
                assert_eq!(progress, 0.0)
            }
            other => panic!("expected transforming, got {other:?}"),
        }
    }

    #[test]
    fn moving_wheels_block_transformation() {
        let cfg = cfg();
        let mode = RobotMode::Wheeled { v: 0.4, w: 0.0 };
        let err = fsm_step(&mode, &Instruction::SetMode { mode: TargetMode::Legged }, &cfg);
        assert!(matches!(err, Err(ControlError::IllegalTransition { .. })));
    }

    #[test]
    fn transformation_completes_into_homed_legged_mode() {
        let cfg = cfg();
        let mode = RobotMode::Transforming {
            direction: TransformDirection::Expand,
            progress: 0.999,
            target: TargetMode::Legged,
        };
        let next = fsm_step(&mode, &Instruction::Tick { dt: 0.1 }, &cfg).unwrap();
        match next {
            RobotMode::Legged { clock, .. } => assert_eq!(clock, 0.0),
            other => panic!("expected legged, got {other:?}"),
        }
    }

    #[test]
    fn set_gait_while_wheeled_is_illegal() {
        let cfg = cfg();
        let mode = RobotMode::Wheeled { v: 0.0, w: 0.0 };
        let err = fsm_step(&mode, &Instruction::SetGait { gait: GaitType::Trot, period_tc: 3.0 }, &cfg);
        assert!(matches!(err, Err(ControlError::IllegalTransition { .. })));
    }

    #[test]
    fn legged_set_twist_round_trips_through_the_gait() {
        let cfg = cfg();
        let spec = GaitSpec::with_defaults(GaitType::Trot, 4, 3.0).unwrap();
        let mode = RobotMode::Legged { spec, clock: 1.2 };
        let next = fsm_step(&mode, &Instruction::SetTwist { v: 0.15, w: 0.05 }, &cfg).unwrap();
        match next {
            RobotMode::Legged { spec, .. } => {
                let twist = predict_twist(&spec, &cfg.chassis);
                assert!((twist.v_forward - 0.15).abs() < 1e-12);
                assert!((twist.w - 0.05).abs() < 1e-9);
            }
            other => panic!("expected legged, got {other:?}"),
        }
    }

    #[test]
    fn no_gait_targets_mid_transformation() {
        let cfg = cfg();
        for progress in [0.0, 0.3, 0.7] {
            let mode = RobotMode::Transforming {
                direction: TransformDirection::Expand,
                progress,
                target: TargetMode::Legged,
            };
            let cmds = joint_targets(&mode, &cfg).unwrap();
            assert!(cmds.legs.iter().all(|c| matches!(c, JointCommand::Hold)));
        }
    }

    #[test]
    fn transformation_profile_covers_the_travel() {
        let travel = cfg().servo_travel;
        let start = transformation_profile(TransformDirection::Expand, 0.0, 1.0, travel);
        let end = transformation_profile(TransformDirection::Expand, 1.0, 1.0, travel);
        assert_eq!(start, 0.0);
        assert!((end - travel).abs() < 1e-12);
        // Monotone in t.
        let mut last = -1.0;
        for i in 0..=40 {
            let v = transformation_profile(TransformDirection::Expand, i as f64 / 40.0, 1.0, travel);
            assert!(v >= last);
            last = v;
        }
        // Expansion ends at the mechanical stop: the final pose is singular.
        let link = crate::linkage::Linkage::canonical();
        let pose = link.fk_transform(end).unwrap();
        assert!(crate::linkage::singularity_margin(&pose) < 1e-3);
    }

    #[test]
    fn pd_track_matches_hand_values() {
        let gains = PdGains { kp: 20.0, kd: 0.0, torque_limit: 5.0 };
        let target = JointCommand::Position { angle: 0.1, velocity: 0.0 };
        assert!((pd_track(&target, 0.0, 0.0, &gains) - 2.0).abs() < 1e-12);
        // Zero error, zero torque.
        let target = JointCommand::Position { angle: 1.0, velocity: 0.5 };
        assert_eq!(pd_track(&target, 1.0, 0.5, &PdGains::default()), 0.0);
        // Saturation.
        let target = JointCommand::Position { angle: 100.0, velocity: 0.0 };
        assert_eq!(pd_track(&target, 0.0, 0.0, &PdGains::default()), 3.0);
        // Velocity mode ignores position error via kp = 0.
        let gains = PdGains { kp: 20.0, kd: 2.0, torque_limit: 5.0 };
        let target = JointCommand::Velocity { velocity: 1.0 };
        assert!((pd_track(&target, 50.0, 0.0, &gains) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn pd_output_is_lipschitz_in_state() {
        let gains = PdGains::default();
        let target = JointCommand::Position { angle: 0.3, velocity: 0.1 };
        let lipschitz = gains.kp + gains.kd;
        let mut rng = crate::geom::SplitMix64::new(3);
        for _ in 0..200 {
            let a1 = rng.next_range(-2.0, 2.0);
            let v1 = rng.next_range(-2.0, 2.0);
            let a2 = rng.next_range(-2.0, 2.0);
            let v2 = rng.next_range(-2.0, 2.0);
            let t1 = pd_track(&target, a1, v1, &gains);
            let t2 = pd_track(&target, a2, v2, &gains);
            let dist = (a1 - a2).abs() + (v1 - v2).abs();
            assert!((t1 - t2).abs() <= lipschitz * dist + 1e-12);
        }
    }

    #[test]
    fn single_transformation_clock_drives_all_modules() {
        let cfg = cfg();
        let mode = RobotMode::Transforming {
            direction: TransformDirection::Expand,
            progress: 0.42,
            target: TargetMode::Legged,
        };
        let cmds = joint_targets(&mode, &cfg).unwrap();
        // The command set carries exactly one servo angle for all modules.
        assert!(cmds.transform_servo > 0.0 && cmds.transform_servo < cfg.servo_travel);
    }

    #[test]
    fn rehome_takes_the_shortest_path() {
        let tau = crate::geom::TAU;
        assert!((rehome_angle(0.5, 4.0 * tau) - (4.0 * tau + 0.5)).abs() < 1e-12);
        assert!((rehome_angle(6.0, 0.0) - (6.0 - tau)).abs() < 1e-12);
    }
}
