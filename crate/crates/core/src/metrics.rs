//! Evaluation metrics over simulation traces: motion smoothness, a declared
//! electrical power model, specific resistance, and the three-strategy
//! route comparison.
//!
//! The power model is a stand-in for the hardware power sensor: idle
//! overhead plus motor mechanical power over an efficiency, plus per-terrain
//! rolling loss with a per-contact term. Its constants are calibrated only
//! to preserve qualitative orderings, never to reproduce measured watts.

use crate::controller::RobotMode;
use crate::gait::GaitSpec;
use crate::robot::{RobotConfig, GRAVITY};
use crate::sim::{run_scenario, ShapeMode, SimTrace, SimWorld};
use crate::terrain::{SurfaceClass, TerrainKind, TerrainProfile};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, thiserror::Error)]
pub enum MetricsError {
    #[error("trace has no rows")]
    EmptyTrace,
    #[error("speed must be positive")]
    ZeroSpeed,
    #[error("mass must be positive")]
    BadMass,
}

/// Smoothness cost series J(t) = Ks * (pitch^2 + roll^2) and its mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Smoothness {
    pub series: Vec<(f64, f64)>,
    pub mean: f64,
}

/// Evaluate the smoothness cost over a window of the trace (seconds from
/// the start; the whole trace if the window exceeds it).
pub fn smoothness(trace: &SimTrace, ks: f64, window: f64) -> Result<Smoothness, MetricsError> {
    if trace.rows.is_empty() {
        return Err(MetricsError::EmptyTrace);
    }
    let t0 = trace.rows[0].t;
    let series: Vec<(f64, f64)> = trace
        .rows
        .iter()
        .filter(|r| r.t - t0 <= window)
        .map(|r| (r.t, ks * (r.pitch * r.pitch + r.roll * r.roll)))
        .collect();
    let mean = series.iter().map(|(_, j)| j).sum::<f64>() / series.len() as f64;
    Ok(Smoothness { series, mean })
}

/// Dimensionless specific resistance P / (m g v).
pub fn specific_resistance(power: f64, mass: f64, speed: f64) -> Result<f64, MetricsError> {
    if !(speed > 0.0) {
        return Err(MetricsError::ZeroSpeed);
    }
    if !(mass > 0.0) {
        return Err(MetricsError::BadMass);
    }
    Ok(power / (mass * GRAVITY * speed))
}

/// Declared electrical power model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    /// Idle electronics overhead (W).
    pub idle_overhead_p0: f64,
    /// Motor drive efficiency in (0, 1].
    pub motor_efficiency_eta: f64,
    /// Rolling loss coefficient scaling the terrain class value.
    pub rolling_loss_scale: f64,
    /// Per-contact drag (W s/m): more wheels on the ground cost more.
    pub contact_loss: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        PowerModel {
            idle_overhead_p0: 6.0,
            motor_efficiency_eta: 0.65,
            rolling_loss_scale: 1.0,
            contact_loss: 2.0,
        }
    }
}

impl PowerModel {
    pub fn validate(&self) -> bool {
        self.idle_overhead_p0 >= 0.0
            && self.motor_efficiency_eta > 0.0
            && self.motor_efficiency_eta <= 1.0
    }
}

/// Instantaneous power series from a trace: P0 + sum |tau * omega| / eta
/// plus rolling losses.
pub fn estimate_power(
    trace: &SimTrace,
    model: &PowerModel,
    config: &RobotConfig,
    terrain: &TerrainProfile,
) -> Result<Vec<(f64, f64)>, MetricsError> {
    if trace.rows.is_empty() {
        return Err(MetricsError::EmptyTrace);
    }
    let weight = config.total_mass * GRAVITY;
    let mut out = Vec::with_capacity(trace.rows.len());
    for pair in trace.rows.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let speed = ((b.x - a.x) / (b.t - a.t)).abs();
        let mech: f64 = b.joints.iter().map(|j| (j.torque * j.velocity).abs()).sum();
        let contacts = b.joints.iter().filter(|j| j.contact).count() as f64;
        let rolling = model.rolling_loss_scale * terrain.rolling_resistance * weight * speed;
        let p = model.idle_overhead_p0
            + mech / model.motor_efficiency_eta
            + rolling
            + model.contact_loss * contacts * speed;
        out.push((b.t, p));
    }
    if out.is_empty() {
        out.push((trace.rows[0].t, model.idle_overhead_p0));
    }
    Ok(out)
}

pub fn mean_power(series: &[(f64, f64)]) -> f64 {
    if series.is_empty() {
        return 0.0;
    }
    series.iter().map(|(_, p)| p).sum::<f64>() / series.len() as f64
}

/// Route segment for the strategy comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteSegment {
    pub terrain: TerrainKind,
    pub surface: SurfaceClass,
    /// Forward distance to cover on this segment (m).
    pub length: f64,
}

/// Mode assignment policy over a route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    OnlyWheel,
    OnlyLeg,
    Integrated,
}

impl Strategy {
    pub fn label(self) -> &'static str {
        match self {
            Strategy::OnlyWheel => "only_wheel",
            Strategy::OnlyLeg => "only_leg",
            Strategy::Integrated => "integrated",
        }
    }

    /// Whether this strategy rides wheels on the given segment. The
    /// integrated strategy keeps wheels on flat and asphalt surfaces and
    /// legs everywhere else.
    fn wheels_on(self, seg: &RouteSegment) -> bool {
        match self {
            Strategy::OnlyWheel => true,
            Strategy::OnlyLeg => false,
            Strategy::Integrated => {
                matches!(seg.terrain, TerrainKind::Flat) && seg.surface.is_wheel_friendly()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyPlan {
    pub route: Vec<RouteSegment>,
    /// Commanded wheeled speed on wheel segments (m/s).
    pub wheel_speed: f64,
    /// Gait period driving legged segments (s).
    pub leg_period: f64,
}

impl StrategyPlan {
    /// Mixed route used by the comparison scenarios: fast flat approach, a
    /// rough patch, one step above the wheeled threshold, then flat again.
    pub fn mixed_demo() -> StrategyPlan {
        StrategyPlan {
            route: vec![
                RouteSegment { terrain: TerrainKind::Flat, surface: SurfaceClass::Flat, length: 6.0 },
                RouteSegment { terrain: TerrainKind::Flat, surface: SurfaceClass::Grass, length: 2.0 },
                RouteSegment {
                    terrain: TerrainKind::Step { height: 0.035 },
                    surface: SurfaceClass::Flat,
                    length: 1.5,
                },
                RouteSegment { terrain: TerrainKind::Flat, surface: SurfaceClass::Asphalt, length: 6.0 },
            ],
            wheel_speed: 0.8,
            leg_period: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyOutcome {
    pub strategy: Strategy,
    pub completed: bool,
    pub time_s: f64,
    pub energy_j: f64,
    /// Segment index the strategy failed on, if any.
    pub failed_segment: Option<usize>,
}

/// Transformation cost per direction: wall time and servo work against the
/// restore spring, integrated over the travel for every module.
pub fn transformation_cost(config: &RobotConfig) -> (f64, f64) {
    let link = crate::linkage::Linkage::canonical();
    let g = link.geometry();
    let closed = g.closed_angle();
    let n = 64;
    let mut work = 0.0;
    let mut last = link.spring_torque(closed);
    for i in 1..=n {
        let alpha = closed + (g.stop_angle - closed) * i as f64 / n as f64;
        let tau = link.spring_torque(alpha);
        work += 0.5 * (tau + last) * (g.stop_angle - closed) / n as f64;
        last = tau;
    }
    (1.0, work * config.n_legs as f64)
}

/// Simulate one strategy over the route, segment by segment. Wheeled
/// segments that contain a step above the wheeled threshold fail the
/// strategy there.
pub fn run_strategy(
    plan: &StrategyPlan,
    config: &RobotConfig,
    strategy: Strategy,
    model: &PowerModel,
) -> Result<StrategyOutcome, crate::sim::SimError> {
    let mut time = 0.0;
    let mut energy = 0.0;
    let mut wheels_deployed = true;
    let (t_transform, e_transform) = transformation_cost(config);

    for (idx, seg) in plan.route.iter().enumerate() {
        let use_wheels = strategy.wheels_on(seg);
        if use_wheels != wheels_deployed {
            time += t_transform;
            energy += e_transform + model.idle_overhead_p0 * t_transform;
            wheels_deployed = use_wheels;
        }
        let terrain = TerrainProfile::new(seg.terrain, seg.surface, 0.8);
        let (shape, mode) = if use_wheels {
            (ShapeMode::Wheeled, RobotMode::Wheeled { v: plan.wheel_speed, w: 0.0 })
        } else {
            match seg.terrain {
                TerrainKind::Flat => {
                    let spec = GaitSpec::with_defaults(
                        crate::gait::GaitType::default_for(config.n_legs),
                        config.n_legs,
                        plan.leg_period,
                    )
                    .expect("default gait builds");
                    (ShapeMode::Legged, RobotMode::Legged { spec, clock: 0.0 })
                }
                // Steps and stairs run the synchronized climbing controller.
                _ => (ShapeMode::Legged, RobotMode::Synchronized { speed: 2.0, clock: 0.0 }),
            }
        };
        let mut world = SimWorld::new(config.clone(), terrain, shape)?;
        let start_x = match seg.terrain {
            TerrainKind::Flat => 0.0,
            _ => -2.0 * config.wheel_radius - config.body_length / 2.0,
        };
        world.place_at(start_x)?;
        let goal_x = start_x + seg.length;
        let speed_guess = if use_wheels { plan.wheel_speed } else { 0.15 };
        let duration = (seg.length / speed_guess * 3.0).max(10.0);
        let out = crate::sim::run_scenario_for(world, mode, duration, 0.002, goal_x)?;
        let trace = out;
        let passed = !trace.stuck && trace.final_x() >= goal_x;
        let power = estimate_power(&trace, model, config, &terrain)
            .map_err(|e| crate::sim::SimError::Numerical(e.to_string()))?;
        let seg_time = trace.duration();
        time += seg_time;
        energy += mean_power(&power) * seg_time;
        if !passed {
            return Ok(StrategyOutcome {
                strategy,
                completed: false,
                time_s: time,
                energy_j: energy,
                failed_segment: Some(idx),
            });
        }
    }
    Ok(StrategyOutcome { strategy, completed: true, time_s: time, energy_j: energy, failed_segment: None })
}

/// Compare all three strategies on the plan.
pub fn compare_strategies(
    plan: &StrategyPlan,
    config: &RobotConfig,
    model: &PowerModel,
) -> Result<Vec<StrategyOutcome>, crate::sim::SimError> {
    [Strategy::OnlyWheel, Strategy::OnlyLeg, Strategy::Integrated]
        .iter()
        .map(|s| run_strategy(plan, config, *s, model))
        .collect()
}

/// Flat-ground scenario used by the smoothness and SR comparisons.
pub fn flat_trace(
    config: &RobotConfig,
    mode: RobotMode,
    shape: ShapeMode,
    duration: f64,
) -> Result<SimTrace, crate::sim::SimError> {
    let world = SimWorld::new(config.clone(), TerrainProfile::flat(), shape)?;
    run_scenario(world, mode, duration, 0.002)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gait::GaitType;

    fn flat() -> TerrainProfile {
        TerrainProfile::flat()
    }

    #[test]
    fn smoothness_hand_values() {
        let mut trace = SimTrace {
            dt: 0.1,
            n_legs: 4,
            mode_label: "test".into(),
            rows: vec![],
            stuck: false,
        };
        for i in 0..10 {
            trace.rows.push(crate::sim::TraceRow {
                t: i as f64 * 0.1,
                x: 0.0,
                z: 0.0,
                pitch: 0.1,
                roll: 0.05,
                joints: vec![],
                cum_work: 0.0,
                stalled: false,
            });
        }
        let s = smoothness(&trace, 1000.0, 10.0).unwrap();
        assert!((s.mean - 12.5).abs() < 1e-9);
        // Flat reference: zero pitch and roll cost nothing.
        for row in trace.rows.iter_mut() {
            row.pitch = 0.0;
            row.roll = 0.0;
        }
        let s = smoothness(&trace, 1000.0, 10.0).unwrap();
        assert_eq!(s.mean, 0.0);
        trace.rows.clear();
        assert!(matches!(smoothness(&trace, 1000.0, 10.0), Err(MetricsError::EmptyTrace)));
    }

    #[test]
    fn specific_resistance_values() {
        let sr = specific_resistance(60.0, 8.406, 1.0).unwrap();
        assert!((sr - 0.7277).abs() < 1e-4, "sr {sr}");
        // Definitional fixed point.
        let m = 5.0;
        let v = 0.7;
        let sr = specific_resistance(m * GRAVITY * v, m, v).unwrap();
        assert!((sr - 1.0).abs() < 1e-12);
        assert!(matches!(specific_resistance(10.0, 5.0, 0.0), Err(MetricsError::ZeroSpeed)));
    }

    #[test]
    fn sr_homogeneity_under_joint_scaling() {
        let base = specific_resistance(42.0, 7.0, 0.8).unwrap();
        for c in [0.5, 2.0, 10.0] {
            let scaled = specific_resistance(42.0 * c, 7.0 * c, 0.8).unwrap();
            assert!((scaled - base).abs() < 1e-12);
        }
    }

    #[test]
    fn sr_decreases_with_speed_under_affine_power() {
        // P = P0 + b v gives SR = P0/(mgv) + b/(mg), strictly decreasing.
        let p0 = 6.0;
        let b = 30.0;
        let m = 8.406;
        let mut last = f64::INFINITY;
        for i in 1..=20 {
            let v = 0.1 * i as f64;
            let sr = specific_resistance(p0 + b * v, m, v).unwrap();
            assert!(sr < last);
            last = sr;
        }
    }

    #[test]
    fn power_model_basics() {
        let model = PowerModel::default();
        // Robot at rest: only the idle overhead.
        let mut trace = SimTrace { dt: 0.1, n_legs: 4, mode_label: "t".into(), rows: vec![], stuck: false };
        for i in 0..5 {
            trace.rows.push(crate::sim::TraceRow {
                t: i as f64 * 0.1,
                x: 0.0,
                z: 0.0,
                pitch: 0.0,
                roll: 0.0,
                joints: vec![crate::sim::JointSample { angle: 0.0, velocity: 0.0, torque: 0.0, contact: false }; 4],
                cum_work: 0.0,
                stalled: false,
            });
        }
        let cfg = RobotConfig::quad_swheg();
        let p = estimate_power(&trace, &model, &cfg, &flat()).unwrap();
        for (_, w) in &p {
            assert!((w - model.idle_overhead_p0).abs() < 1e-12);
        }

        // Unit efficiency, one joint at 1 N*m, 2 rad/s -> 2 W mechanical.
        let ideal = PowerModel { idle_overhead_p0: 0.0, motor_efficiency_eta: 1.0, rolling_loss_scale: 0.0, contact_loss: 0.0 };
        for row in trace.rows.iter_mut() {
            row.joints[0].torque = 1.0;
            row.joints[0].velocity = 2.0;
        }
        let p = estimate_power(&trace, &ideal, &cfg, &flat()).unwrap();
        for (_, w) in &p {
            assert!((w - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn power_never_drops_below_idle() {
        let cfg = RobotConfig::quad_swheg();
        let model = PowerModel::default();
        let trace = flat_trace(&cfg, RobotMode::Wheeled { v: 0.5, w: 0.0 }, ShapeMode::Wheeled, 3.0).unwrap();
        let p = estimate_power(&trace, &model, &cfg, &flat()).unwrap();
        assert!(p.iter().all(|(_, w)| *w >= model.idle_overhead_p0 - 1e-12));
    }

    #[test]
    fn climb_energy_exceeds_potential_gain() {
        let cfg = RobotConfig::quad_swheg();
        let model = PowerModel::default();
        let terrain = TerrainProfile::step(0.02);
        let mut world = SimWorld::new(cfg.clone(), terrain, ShapeMode::Legged).unwrap();
        world.place_at(-0.4).unwrap();
        let trace = run_scenario(world, RobotMode::Synchronized { speed: 2.0, clock: 0.0 }, 8.0, 0.002).unwrap();
        let dz = trace.rows.last().unwrap().z - trace.rows.first().unwrap().z;
        let power = estimate_power(&trace, &model, &cfg, &terrain).unwrap();
        let energy = mean_power(&power) * trace.duration();
        assert!(energy >= cfg.total_mass * GRAVITY * dz);
    }

    #[test]
    fn flat_route_ranks_wheeled_cost_for_all_strategies() {
        let cfg = RobotConfig::quad_swheg();
        let plan = StrategyPlan {
            route: vec![RouteSegment {
                terrain: TerrainKind::Flat,
                surface: SurfaceClass::Flat,
                length: 3.0,
            }],
            wheel_speed: 0.6,
            leg_period: 2.5,
        };
        let out = compare_strategies(&plan, &cfg, &PowerModel::default()).unwrap();
        assert!(out.iter().all(|o| o.completed));
        let wheel = out.iter().find(|o| o.strategy == Strategy::OnlyWheel).unwrap();
        let integrated = out.iter().find(|o| o.strategy == Strategy::Integrated).unwrap();
        let leg = out.iter().find(|o| o.strategy == Strategy::OnlyLeg).unwrap();
        // Integrated stays on wheels for the whole route.
        assert!((wheel.time_s - integrated.time_s).abs() < 1e-9);
        assert!((wheel.energy_j - integrated.energy_j).abs() < 1e-9);
        assert!(leg.time_s > wheel.time_s);
    }

    #[test]
    fn smoothness_survives_resampling() {
        let cfg = RobotConfig::hex_swheg();
        let spec = GaitSpec::with_defaults(GaitType::Tripod, 6, 3.0).unwrap();
        let trace = flat_trace(&cfg, RobotMode::Legged { spec, clock: 0.0 }, ShapeMode::Legged, 6.0).unwrap();
        let full = smoothness(&trace, 1000.0, 6.0).unwrap();
        // Decimate by 2 (still well above twice the gait frequency).
        let mut half = trace.clone();
        half.rows = half.rows.iter().step_by(2).cloned().collect();
        let coarse = smoothness(&half, 1000.0, 6.0).unwrap();
        let rel = (full.mean - coarse.mean).abs() / full.mean.max(1e-12);
        assert!(rel < 0.01, "resampling shifted the mean by {rel}");
    }
}
