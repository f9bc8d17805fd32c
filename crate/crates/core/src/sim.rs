//! Planar quasi-static simulation of the robot negotiating flat ground,
//! steps and stairs in wheeled, legged and reversed-legged modes.
//!
//! The sagittal model carries (x, z, pitch); heading is locked by
//! construction. Each tick the controller supplies joint targets, rotors
//! track them kinematically, the body settles onto its supports by potential
//! minimization, and the tick is accepted only if every active contact
//! satisfies its friction cone and every motor stays inside its torque
//! limit. Recorded torques are the static demands (support moment plus
//! rolling drag); a rejected tick stalls the robot in place.
//!
//! Inter-axle tractive redistribution is not modeled: each climbing contact
//! must be sustainable on its own, matching the independent wheel
//! quasi-static picture.

use crate::controller::{
    fsm_step, joint_targets, ControlError, ControllerConfig, Instruction, JointCommand, RobotMode,
};
use crate::gait::{GaitSpec, LegId};
use crate::geom::{Arc, Vec2, TAU};
use crate::linkage::{Linkage, LinkagePose, LINK_RADIUS};
use crate::robot::{RobotConfig, GRAVITY};
use crate::terrain::TerrainProfile;
use serde::{Deserialize, Serialize};

/// Body advance below this over the stuck window flags the run stuck.
const STUCK_ADVANCE: f64 = 1e-3;
const MAX_PITCH: f64 = 0.6;

/// Contact geometry of one wheel-leg in the leg frame (hub at origin).
#[derive(Debug, Clone, PartialEq)]
pub struct WheelShape {
    pub arcs: Vec<Arc>,
    /// Spoke tips: small caps at the rim arc ends.
    pub caps: Vec<(Vec2, f64)>,
}

impl WheelShape {
    /// Ideal closed wheel: one full circle around the hub.
    pub fn wheeled(radius: f64) -> WheelShape {
        WheelShape {
            arcs: vec![Arc { center: Vec2::ZERO, radius, start_angle: 0.0, extent: TAU }],
            caps: vec![],
        }
    }

    /// Expanded S-profile from a linkage pose: both rim lobes plus tip caps.
    pub fn from_pose(pose: &LinkagePose) -> WheelShape {
        let mut arcs = vec![pose.rim];
        arcs.push(Arc {
            center: -pose.rim.center,
            radius: pose.rim.radius,
            start_angle: pose.rim.start_angle + std::f64::consts::PI,
            extent: pose.rim.extent,
        });
        let caps = arcs
            .iter()
            .flat_map(|a| {
                let (e0, e1) = a.endpoints();
                [(e0, LINK_RADIUS), (e1, LINK_RADIUS)]
            })
            .collect();
        WheelShape { arcs, caps }
    }

    /// Smallest outer radius over all directions: the yielded envelope a
    /// swing leg presents when its compliant rim gives way.
    pub fn min_radius(&self) -> f64 {
        let mut min_r = f64::INFINITY;
        let n = 2048;
        for i in 0..n {
            let dir = Vec2::unit(TAU * i as f64 / n as f64);
            let mut best: Option<f64> = None;
            for arc in &self.arcs {
                let b = dir.dot(arc.center);
                let c = arc.center.norm_sq() - arc.radius * arc.radius;
                let disc = b * b - c;
                if disc < 0.0 {
                    continue;
                }
                let sq = disc.sqrt();
                for t in [b + sq, b - sq] {
                    if t > 0.0 {
                        let p = dir * t;
                        if arc.contains_angle((p - arc.center).angle()) {
                            best = Some(best.map_or(t, |x: f64| x.max(t)));
                        }
                    }
                }
            }
            if let Some(r) = best {
                min_r = min_r.min(r);
            }
        }
        min_r
    }

    /// Mirror the chirality so the spoke tips lead under forward rolling.
    pub fn mirrored(&self) -> WheelShape {
        let arcs = self
            .arcs
            .iter()
            .map(|a| Arc {
                center: Vec2::new(-a.center.x, a.center.y),
                radius: a.radius,
                start_angle: std::f64::consts::PI - a.end_angle(),
                extent: a.extent,
            })
            .collect();
        let caps = self.caps.iter().map(|(p, r)| (Vec2::new(-p.x, p.y), *r)).collect();
        WheelShape { arcs, caps }
    }
}

/// Which leg geometry the expanded modes use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeMode {
    Wheeled,
    Legged,
    ReversedLegged,
}

impl ShapeMode {
    pub fn label(self) -> &'static str {
        match self {
            ShapeMode::Wheeled => "wheeled",
            ShapeMode::Legged => "legged",
            ShapeMode::ReversedLegged => "reversed_legged",
        }
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum SimError {
    #[error("time step {0} outside (0, 0.01]")]
    BadTimeStep(f64),
    #[error(transparent)]
    Terrain(#[from] crate::terrain::TerrainError),
    #[error(transparent)]
    Robot(#[from] crate::robot::ValidationError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error("equilibrium solve failed: {0}")]
    Numerical(String),
    #[error("threshold search bracket invalid: {0}")]
    Bracket(String),
}

/// One joint sample in a trace row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointSample {
    pub angle: f64,
    pub velocity: f64,
    pub torque: f64,
    pub contact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub x: f64,
    pub z: f64,
    pub pitch: f64,
    /// The sagittal model carries no roll.
    pub roll: f64,
    pub joints: Vec<JointSample>,
    /// Cumulative motor mechanical work (J), non-decreasing.
    pub cum_work: f64,
    pub stalled: bool,
}

/// Sampled time series of one scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub dt: f64,
    pub n_legs: usize,
    pub mode_label: String,
    pub rows: Vec<TraceRow>,
    pub stuck: bool,
}

impl SimTrace {
    pub fn final_x(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.x)
    }

    pub fn average_speed(&self) -> f64 {
        match (self.rows.first(), self.rows.last()) {
            (Some(a), Some(b)) if b.t > a.t => (b.x - a.x) / (b.t - a.t),
            _ => 0.0,
        }
    }

    pub fn total_work(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.cum_work)
    }

    pub fn duration(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.t)
    }
}

/// Simulation state of one robot on one terrain.
#[derive(Debug, Clone)]
pub struct SimWorld {
    pub robot: RobotConfig,
    pub terrain: TerrainProfile,
    pub shape_mode: ShapeMode,
    pub x: f64,
    pub z: f64,
    pub pitch: f64,
    /// Rotor angles per leg in `LegId::all` order (wheel side).
    pub rotors: Vec<f64>,
    pub servo_angle: f64,
    cum_work: f64,
    canonical_poses: ShapeCache,
}

#[derive(Debug, Clone)]
struct ShapeCache {
    wheeled: WheelShape,
    legged: WheelShape,
    reversed: WheelShape,
    /// Yielded envelope used by passive catch contacts of swing legs.
    yield_disc: WheelShape,
}

impl SimWorld {
    pub fn new(robot: RobotConfig, terrain: TerrainProfile, shape_mode: ShapeMode) -> Result<SimWorld, SimError> {
        robot.validate()?;
        terrain.validate()?;
        let link = Linkage::canonical();
        let expanded = link.fk_transform(link.geometry().servo_travel()).expect("canonical expands");
        let legged = WheelShape::from_pose(&expanded);
        let cache = ShapeCache {
            wheeled: WheelShape::wheeled(robot.wheel_radius),
            reversed: legged.mirrored(),
            yield_disc: WheelShape::wheeled(legged.min_radius()),
            legged,
        };
        let n = robot.n_legs;
        let start_servo = match shape_mode {
            ShapeMode::Wheeled => 0.0,
            _ => link.geometry().servo_travel(),
        };
        // The world starts unsettled at the origin; `place_at` (or the
        // first simulation tick) projects it onto its supports.
        Ok(SimWorld {
            robot,
            terrain,
            shape_mode,
            x: 0.0,
            z: 0.0,
            pitch: 0.0,
            rotors: vec![0.0; n],
            servo_angle: start_servo,
            cum_work: 0.0,
            canonical_poses: cache,
        })
    }

    /// Place the body at x with rotors unchanged and settle onto supports.
    pub fn place_at(&mut self, x: f64) -> Result<(), SimError> {
        self.x = x;
        self.settle()
    }

    fn settle(&mut self) -> Result<(), SimError> {
        let shape = self.active_shape();
        let (z, pitch, _) = self.solve_pose(&shape, None)?;
        self.z = z;
        self.pitch = pitch;
        Ok(())
    }

    fn active_shape(&self) -> WheelShape {
        match self.shape_mode {
            ShapeMode::Wheeled => self.canonical_poses.wheeled.clone(),
            ShapeMode::Legged => self.canonical_poses.legged.clone(),
            ShapeMode::ReversedLegged => self.canonical_poses.reversed.clone(),
        }
    }

    fn axle_of_leg(&self, leg_index: usize) -> usize {
        let n_axles = self.robot.n_legs / 2;
        leg_index % n_axles
    }

    /// Solve (z, pitch) resting pose given per-leg stance eligibility.
    /// Returns the pose and the per-leg support candidates.
    fn solve_pose(
        &self,
        shape: &WheelShape,
        stance: Option<&[StanceFilter]>,
    ) -> Result<(f64, f64, Vec<Option<SupportCandidate>>), SimError> {
        let offsets = self.robot.axle_offsets();
        let mut pitch = self.pitch;
        let mut z = self.z;
        let mut residual;
        for iter in 0..60 {
            let mut per_leg: Vec<Option<SupportCandidate>> = vec![None; self.rotors.len()];
            let mut axle_support: Vec<Option<f64>> = vec![None; offsets.len()];
            for (leg_idx, rotor) in self.rotors.iter().enumerate() {
                let axle = self.axle_of_leg(leg_idx);
                let filter = stance.map(|s| s[leg_idx]);
                if filter.is_some_and(|f| f.skipped()) {
                    continue;
                }
                let hub_x = self.x + offsets[axle] * pitch.cos();
                let leg_shape = if matches!(filter, Some(StanceFilter::Catch)) {
                    &self.canonical_poses.yield_disc
                } else {
                    shape
                };
                if let Some(cand) =
                    best_support(leg_shape, *rotor, hub_x, &self.terrain, filter, leg_idx)
                {
                    let s = axle_support[axle].get_or_insert(cand.hub_z);
                    if cand.hub_z > *s {
                        *s = cand.hub_z;
                    }
                    per_leg[leg_idx] = Some(cand);
                }
            }
            let active: Vec<(f64, f64)> = axle_support
                .iter()
                .enumerate()
                .filter_map(|(i, s)| s.map(|z| (offsets[i], z)))
                .collect();
            if active.len() < 2 {
                return Err(SimError::Numerical("fewer than two supported axles".into()));
            }
            let (new_z, new_pitch) = rest_pose(&active)?;
            residual = (new_z - z).abs() + (new_pitch - pitch).abs();
            // Damped projection keeps alternating support sets from cycling.
            let relax = if iter < 6 { 1.0 } else { 0.5 };
            z += relax * (new_z - z);
            pitch += relax * (new_pitch - pitch);
            if residual < 1e-8 {
                // Keep only the legs actually touching at the solved pose.
                for (leg_idx, cand) in per_leg.iter_mut().enumerate() {
                    let axle = self.axle_of_leg(leg_idx);
                    if let (Some(c), Some(s)) = (cand.as_ref(), axle_support[axle]) {
                        if c.hub_z < s - 1e-6 {
                            *cand = None;
                        }
                    }
                }
                return Ok((z, pitch, per_leg));
            }
            if iter == 59 && residual > 1e-4 {
                return Err(SimError::Numerical("pose projection did not converge".into()));
            }
        }
        // Accepted at loose tolerance after damping.
        let mut per_leg: Vec<Option<SupportCandidate>> = vec![None; self.rotors.len()];
        for (leg_idx, rotor) in self.rotors.iter().enumerate() {
            let axle = self.axle_of_leg(leg_idx);
            let filter = stance.map(|s| s[leg_idx]);
            if filter.is_some_and(|f| f.skipped()) {
                continue;
            }
            let hub_x = self.x + offsets[axle] * pitch.cos();
            let leg_shape = if matches!(filter, Some(StanceFilter::Catch)) {
                &self.canonical_poses.yield_disc
            } else {
                shape
            };
            per_leg[leg_idx] = best_support(leg_shape, *rotor, hub_x, &self.terrain, filter, leg_idx);
        }
        Ok((z, pitch, per_leg))
    }

    /// Whether any contact-eligible feature crosses a riser wall at the
    /// given pose. Walls block horizontal motion, which the support solve
    /// cannot express.
    fn penetrates_wall(
        &self,
        shape: &WheelShape,
        x: f64,
        z: f64,
        pitch: f64,
        stance: &[StanceFilter],
    ) -> bool {
        let corners = self.terrain.corners();
        if corners.is_empty() {
            return false;
        }
        let offsets = self.robot.axle_offsets();
        for (leg_idx, rotor) in self.rotors.iter().enumerate() {
            if stance[leg_idx].skipped() {
                continue;
            }
            let axle = self.axle_of_leg(leg_idx);
            let hub = Vec2::new(x + offsets[axle] * pitch.cos(), z + offsets[axle] * pitch.sin());
            for &(cx, cz) in &corners {
                let lower = self.terrain.elevation(cx - 1e-9);
                let wall_a = Vec2::new(cx, lower - 1.0);
                let wall_b = Vec2::new(cx, cz - 5e-4);
                for arc in &shape.arcs {
                    let world = Arc {
                        center: hub + arc.center.rotated(-rotor),
                        radius: arc.radius,
                        start_angle: arc.start_angle - rotor,
                        extent: arc.extent,
                    };
                    if world.distance_to_segment(wall_a, wall_b) < 1e-9 {
                        return true;
                    }
                }
                for (cap_center, cap_r) in &shape.caps {
                    let p = hub + cap_center.rotated(-rotor);
                    if crate::geom::point_segment_distance(p, wall_a, wall_b) < cap_r - 1e-9 {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// Gait stance filter for one leg in the sagittal collapse.
#[derive(Debug, Clone, Copy, PartialEq)]
enum StanceFilter {
    /// Contact allowed anywhere on the shape, contact drives the body.
    Full,
    /// Contact restricted to the rim window [lo, hi] in leg-frame polar
    /// angle (radians, mod 2*pi); drives the body.
    Window { lo: f64, hi: f64 },
    /// Swing leg: its full shape can passively catch the body (it scuffs
    /// rather than drives).
    Catch,
    /// Leg not part of the planar section (the mirrored side of a gait).
    Omitted,
}

impl StanceFilter {
    fn admits(self, polar: f64) -> bool {
        match self {
            StanceFilter::Full | StanceFilter::Catch => true,
            StanceFilter::Omitted => false,
            StanceFilter::Window { lo, hi } => {
                let mut rel = (polar - lo) % TAU;
                if rel < 0.0 {
                    rel += TAU;
                }
                rel <= (hi - lo) + 1e-9
            }
        }
    }

    fn driving(self) -> bool {
        matches!(self, StanceFilter::Full | StanceFilter::Window { .. })
    }

    fn skipped(self) -> bool {
        matches!(self, StanceFilter::Omitted)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct SupportCandidate {
    leg_index: usize,
    /// Hub height required for this contact.
    hub_z: f64,
    /// Contact point relative to the hub (world frame).
    contact_rel: Vec2,
    /// Outward contact normal (pointing into the wheel).
    normal: Vec2,
    /// Whether this contact propels the body (stance) or just carries it.
    driving: bool,
}

/// Highest support requirement over all feature/terrain pairs of one leg.
fn best_support(
    shape: &WheelShape,
    rotor: f64,
    hub_x: f64,
    terrain: &TerrainProfile,
    filter: Option<StanceFilter>,
    leg_index: usize,
) -> Option<SupportCandidate> {
    let filter = filter.unwrap_or(StanceFilter::Full);
    let driving = filter.driving();
    let mut best: Option<SupportCandidate> = None;
    let mut consider = |hub_z: f64, contact_rel: Vec2, normal: Vec2| {
        // Leg-frame polar angle of the contact point for the gait window.
        let leg_frame = contact_rel.rotated(rotor);
        if !filter.admits(leg_frame.angle()) {
            return;
        }
        if best.is_none_or(|b| hub_z > b.hub_z) {
            best = Some(SupportCandidate { leg_index, hub_z, contact_rel, normal, driving });
        }
    };

    // Floor spans between risers, each at constant elevation.
    let corners = terrain.corners();
    let mut floors: Vec<(f64, f64, f64)> = Vec::new();
    let far = 1e6;
    if corners.is_empty() {
        floors.push((-far, far, 0.0));
    } else {
        floors.push((-far, corners[0].0, terrain.elevation(corners[0].0 - 1e-9)));
        for i in 0..corners.len() {
            let x0 = corners[i].0;
            let x1 = if i + 1 < corners.len() { corners[i + 1].0 } else { far };
            floors.push((x0, x1, corners[i].1));
        }
    }

    for arc in &shape.arcs {
        let c = arc.center.rotated(-rotor);
        let spin_start = arc.start_angle - rotor;
        let in_span = |ang: f64| {
            let mut rel = (ang - spin_start) % TAU;
            if rel < 0.0 {
                rel += TAU;
            }
            rel <= arc.extent + 1e-12
        };
        for &(x0, x1, elev) in &floors {
            // Arc bottom point.
            if in_span(-std::f64::consts::FRAC_PI_2) {
                let px = hub_x + c.x;
                if px >= x0 && px <= x1 {
                    consider(elev - (c.y - arc.radius), Vec2::new(c.x, c.y - arc.radius), Vec2::new(0.0, 1.0));
                }
            }
            // Right floor edge (the base of the next riser): the arc point
            // straight above it. The left edge is the riser corner and is
            // handled by the corner candidates with the proper normal.
            if x1 < far - 1.0 {
                let dx = x1 - hub_x - c.x;
                if dx.abs() <= arc.radius {
                    let dy = -(arc.radius * arc.radius - dx * dx).sqrt();
                    let ang = dy.atan2(dx);
                    if in_span(ang) {
                        let rel = Vec2::new(c.x + dx, c.y + dy);
                        consider(elev - rel.y, rel, Vec2::new(0.0, 1.0));
                    }
                }
            }
        }
        // Riser corners wrapping the arc.
        for &(cx, cz) in &corners {
            let dx = hub_x + c.x - cx;
            if dx.abs() < arc.radius {
                let dz = (arc.radius * arc.radius - dx * dx).sqrt();
                // Hub height so the corner lies on the arc, hub above.
                let hub_z = cz - c.y + dz;
                let contact_rel = Vec2::new(cx - hub_x, cz - hub_z);
                let normal = Vec2::new(dx, dz) * (1.0 / arc.radius);
                let ang = (contact_rel - c).angle();
                if in_span(ang) {
                    consider(hub_z, contact_rel, normal);
                }
            }
        }
    }

    for (cap_center, cap_r) in &shape.caps {
        let p = cap_center.rotated(-rotor);
        for &(x0, x1, elev) in &floors {
            let px = hub_x + p.x;
            if px >= x0 && px <= x1 {
                consider(elev - (p.y - cap_r), Vec2::new(p.x, p.y - cap_r), Vec2::new(0.0, 1.0));
            }
        }
        for &(cx, cz) in &corners {
            let dx = hub_x + p.x - cx;
            if dx.abs() < *cap_r {
                let dz = (cap_r * cap_r - dx * dx).sqrt();
                let hub_z = cz - p.y + dz;
                let contact_rel = Vec2::new(cx - hub_x, cz - hub_z);
                let normal = Vec2::new(dx, dz) * (1.0 / cap_r);
                consider(hub_z, contact_rel, normal);
            }
        }
    }
    best
}

/// Resting (z, pitch) minimizing body height subject to axle supports.
fn rest_pose(active: &[(f64, f64)]) -> Result<(f64, f64), SimError> {
    // Vertex enumeration of the 2-variable LP: minimize z with
    // z + dx_i * t >= s_i and |t| <= MAX_PITCH. The t in the constraint is
    // sin(pitch); supports are hub heights above the axle line.
    let mut best: Option<(f64, f64)> = None;
    let feasible = |z: f64, t: f64| {
        active.iter().all(|&(dx, s)| z + dx * t >= s - 1e-9) && t.abs() <= MAX_PITCH + 1e-12
    };
    let mut try_vertex = |z: f64, t: f64| {
        if feasible(z, t) && best.is_none_or(|(bz, _)| z < bz) {
            best = Some((z, t));
        }
    };
    for (i, &(dxi, si)) in active.iter().enumerate() {
        for &(dxj, sj) in active.iter().skip(i + 1) {
            if (dxi - dxj).abs() < 1e-12 {
                continue;
            }
            let t = (si - sj) / (dxi - dxj);
            let z = si - dxi * t;
            try_vertex(z, t);
        }
        for t in [-MAX_PITCH, MAX_PITCH] {
            try_vertex(si - dxi * t, t);
        }
    }
    let (z, t) = best.ok_or_else(|| SimError::Numerical("no feasible resting pose".into()))?;
    Ok((z, t.asin()))
}

/// Min-norm normal force distribution over the active contacts: balances
/// weight and pitch moment about the center of mass.
fn normal_forces(contacts: &[(f64, f64)], weight: f64, x_cg: f64) -> Option<Vec<f64>> {
    // contacts: (x_world, _); solve N = lambda + mu * (x - x_cg).
    let k = contacts.len() as f64;
    if contacts.is_empty() {
        return None;
    }
    let sx: f64 = contacts.iter().map(|(x, _)| x - x_cg).sum();
    let sxx: f64 = contacts.iter().map(|(x, _)| (x - x_cg) * (x - x_cg)).sum();
    let det = k * sxx - sx * sx;
    let (lambda, mu) = if det.abs() < 1e-12 {
        (weight / k, 0.0)
    } else {
        // Solve [k sx; sx sxx] [lambda mu]^T = [weight, 0].
        let lambda = weight * sxx / det;
        let mu = -weight * sx / det;
        (lambda, mu)
    };
    let forces: Vec<f64> = contacts.iter().map(|(x, _)| lambda + mu * (x - x_cg)).collect();
    Some(forces)
}

/// Result of one scenario run plus the world in its final state.
pub struct ScenarioOutcome {
    pub trace: SimTrace,
    pub world: SimWorld,
    pub mode: RobotMode,
    /// Instructions the state machine rejected, with reasons.
    pub rejected: Vec<String>,
}

pub(crate) struct RunOptions {
    /// Early exit once the body passes this x.
    pub pass_x: Option<f64>,
    /// Window for the stuck detector (s).
    pub stuck_window: f64,
    /// Timestamped instructions applied when their time comes due.
    pub script: Vec<crate::controller::TimedInstruction>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { pass_x: None, stuck_window: 6.0, script: Vec::new() }
    }
}

/// Run a scenario with an early exit once the body passes `goal_x`.
pub fn run_scenario_for(
    world: SimWorld,
    mode: RobotMode,
    duration: f64,
    dt: f64,
    goal_x: f64,
) -> Result<SimTrace, SimError> {
    run_scenario_opts(world, mode, duration, dt, RunOptions {
        pass_x: Some(goal_x),
        stuck_window: 4.0,
        script: Vec::new(),
    })
    .map(|o| o.trace)
}

/// Run a scenario driven by a replayable instruction stream. Instructions
/// are applied in timestamp order as their time comes due; illegal
/// transitions are skipped and reported in the outcome.
pub fn run_scenario_script(
    world: SimWorld,
    mode: RobotMode,
    script: Vec<crate::controller::TimedInstruction>,
    duration: f64,
    dt: f64,
) -> Result<(SimTrace, Vec<String>), SimError> {
    let mut sorted = script;
    sorted.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
    let out = run_scenario_opts(world, mode, duration, dt, RunOptions {
        pass_x: None,
        stuck_window: f64::INFINITY,
        script: sorted,
    })?;
    Ok((out.trace, out.rejected))
}

/// Advance a scenario under a fixed controller mode seed. The mode is
/// stepped by ticks internally (transformations progress, gait clocks run).
pub fn run_scenario(
    world: SimWorld,
    mode: RobotMode,
    duration: f64,
    dt: f64,
) -> Result<SimTrace, SimError> {
    run_scenario_opts(world, mode, duration, dt, RunOptions::default()).map(|o| o.trace)
}

pub(crate) fn run_scenario_opts(
    mut world: SimWorld,
    mut mode: RobotMode,
    duration: f64,
    dt: f64,
    opts: RunOptions,
) -> Result<ScenarioOutcome, SimError> {
    if !(dt > 0.0 && dt <= 0.01) {
        return Err(SimError::BadTimeStep(dt));
    }
    let cfg = ControllerConfig::new(world.robot.chassis(), world.robot.n_legs);
    let n_steps = (duration / dt).round() as usize;
    let n_legs = world.robot.n_legs;
    let legs = LegId::all(n_legs);
    let link = Linkage::canonical();
    // Torque limits are specified wheel-side, matching the step oracle.
    let wheel_torque_limit = world.robot.drive_torque_limit;
    let mu_limit = 1.0 / (1.0 + world.terrain.friction_mu * world.terrain.friction_mu).sqrt();

    let mut rows = Vec::with_capacity(n_steps + 1);
    let mut stuck = false;
    let mut stuck_anchor = (0.0_f64, world.x, world.z);
    let mode_label = mode.label().to_string();
    let mut rejected = Vec::new();
    let mut script_cursor = 0usize;

    for step in 0..=n_steps {
        let t = step as f64 * dt;
        while script_cursor < opts.script.len() && opts.script[script_cursor].timestamp <= t {
            let timed = &opts.script[script_cursor];
            match fsm_step(&mode, &timed.instruction, &cfg) {
                Ok(next) => mode = next,
                Err(e) => rejected.push(format!("t={}: {e}", timed.timestamp)),
            }
            script_cursor += 1;
        }
        if step > 0 {
            mode = fsm_step(&mode, &Instruction::Tick { dt }, &cfg)?;
        }
        let cmds = joint_targets(&mode, &cfg)?;

        // Desired rotor motion this tick (wheel side).
        let mut desired: Vec<f64> = world.rotors.clone();
        for (j, cmd) in cmds.legs.iter().enumerate() {
            match cmd {
                JointCommand::Position { angle, .. } => {
                    desired[j] = crate::controller::rehome_angle(*angle, world.rotors[j]);
                }
                JointCommand::Velocity { velocity } => {
                    // Velocity commands are joint-side; the belt stage gears
                    // wheel speed up from the joint by the reduction ratio.
                    desired[j] = world.rotors[j] + velocity * world.robot.reduction_nt * dt;
                }
                JointCommand::Hold => {}
            }
        }

        // Transformation reshapes the wheel quasi-statically.
        let shape = match &mode {
            RobotMode::Transforming { .. } => {
                world.servo_angle = cmds.transform_servo;
                let pose = link
                    .fk_transform(world.servo_angle)
                    .map_err(|e| SimError::Numerical(format!("transform pose: {e}")))?;
                WheelShape::from_pose(&pose)
            }
            RobotMode::Wheeled { .. } => {
                world.servo_angle = 0.0;
                world.canonical_poses.wheeled.clone()
            }
            _ => {
                world.servo_angle = cmds.transform_servo;
                world.active_shape()
            }
        };

        // Stance eligibility per leg.
        let stance: Vec<StanceFilter> = match &mode {
            RobotMode::Legged { spec, clock } | RobotMode::TurningInPlace { spec, clock } => {
                let stable = stance_statically_stable(spec, *clock, &world.robot);
                legs.iter().map(|leg| gait_filter(spec, *leg, *clock, stable)).collect()
            }
            _ => vec![StanceFilter::Full; n_legs],
        };

        // Tentatively advance rotors and settle the pose.
        let prev_rotors = world.rotors.clone();
        let prev_x = world.x;
        world.rotors = desired.clone();
        let solved = world.solve_pose(&shape, Some(&stance));
        let (new_z, new_pitch, supports) = match solved {
            Ok(v) => v,
            Err(SimError::Numerical(_)) => {
                // Unsupported configuration: hold in place this tick.
                world.rotors = prev_rotors.clone();
                let row_stalled = record_row(&world, t, &prev_rotors, &prev_rotors, dt, &[], true);
                rows.push(row_stalled);
                continue;
            }
            Err(e) => return Err(e),
        };

        // Riser walls block horizontal motion; a pose crossing one stalls.
        let blocked = world.penetrates_wall(&shape, world.x, new_z, new_pitch, &stance);

        // Static checks on the active contacts.
        let offsets = world.robot.axle_offsets();
        let contacts: Vec<&SupportCandidate> = supports.iter().flatten().collect();
        let contact_points: Vec<(f64, f64)> = contacts
            .iter()
            .map(|c| {
                let off = offsets[world.axle_of_leg(c.leg_index)];
                let hub_x = world.x + off * new_pitch.cos();
                let hub_z = new_z + off * new_pitch.sin();
                (hub_x + c.contact_rel.x, hub_z + c.contact_rel.y)
            })
            .collect();
        let weight = world.robot.total_mass * GRAVITY;
        let forces = normal_forces(&contact_points, weight, world.x);

        let mut ok = forces.is_some() && !blocked;
        let mut torques = vec![0.0; n_legs];
        if let Some(forces) = &forces {
            for ((cand, n_force), point) in contacts.iter().zip(forces).zip(&contact_points) {
                if *n_force < -1e-6 {
                    ok = false;
                }
                // Friction cone at inclined (corner) contacts.
                if cand.normal.y < mu_limit - 1e-9 {
                    ok = false;
                }
                let axle = world.axle_of_leg(cand.leg_index);
                let hub_x = world.x + offsets[axle] * new_pitch.cos();
                let roll_radius = -cand.contact_rel.y;
                let demand = n_force * (point.0 - hub_x).abs()
                    + world.terrain.rolling_resistance * n_force * roll_radius.abs();
                torques[cand.leg_index] += demand;
                if torques[cand.leg_index] > wheel_torque_limit {
                    ok = false;
                }
            }
        }

        if !ok {
            // The body cannot advance, but the wheels keep churning: an
            // unsustainable contact slips in place instead of deadlocking
            // the rotor phase. Slipping motors still spend work, capped at
            // the torque limit.
            world.z = new_z;
            world.pitch = new_pitch;
            for (j, tau) in torques.iter().enumerate() {
                let applied = tau.min(wheel_torque_limit);
                world.cum_work += (applied * (desired[j] - prev_rotors[j])).abs();
            }
            let mut row = record_row(&world, t, &desired, &prev_rotors, dt, &[], true);
            for (j, tau) in torques.iter().enumerate() {
                row.joints[j].torque = tau.min(wheel_torque_limit);
            }
            rows.push(row);
        } else {
            // Rolling advance: normal-force weighted over the contacts.
            let forces = forces.unwrap();
            let mut advance = 0.0;
            let mut total_n = 0.0;
            for (cand, n_force) in contacts.iter().zip(&forces) {
                if !cand.driving {
                    // Passive catch contacts carry load but scuff in place.
                    continue;
                }
                let j = cand.leg_index;
                let dtheta = desired[j] - prev_rotors[j];
                let roll_radius = -cand.contact_rel.y;
                advance += n_force * dtheta * roll_radius;
                total_n += n_force;
            }
            if total_n > 1e-9 {
                world.x = prev_x + advance / total_n;
            }
            world.z = new_z;
            world.pitch = new_pitch;
            // Mechanical work of the rotor motors.
            for (j, tau) in torques.iter().enumerate() {
                world.cum_work += (tau * (desired[j] - prev_rotors[j])).abs();
            }
            let contact_flags: Vec<usize> = contacts.iter().map(|c| c.leg_index).collect();
            let mut row = record_row(&world, t, &desired, &prev_rotors, dt, &contact_flags, false);
            for (j, tau) in torques.iter().enumerate() {
                row.joints[j].torque = *tau;
            }
            rows.push(row);
        }

        // Stuck detection over a sliding window; climbing counts as
        // progress even when the horizontal advance is momentarily tiny.
        if t - stuck_anchor.0 >= opts.stuck_window {
            let moved = (world.x - stuck_anchor.1).hypot(world.z - stuck_anchor.2);
            if moved < STUCK_ADVANCE {
                stuck = true;
                break;
            }
            stuck_anchor = (t, world.x, world.z);
        }
        if let Some(px) = opts.pass_x {
            if world.x >= px {
                break;
            }
        }
    }

    Ok(ScenarioOutcome {
        trace: SimTrace { dt, n_legs, mode_label, rows, stuck },
        world,
        mode,
        rejected,
    })
}

/// Whether the plan-view stance polygon holds the center of mass strictly
/// inside. A diagonal pair or a one-sided set cannot balance the body.
fn stance_statically_stable(spec: &GaitSpec, clock: f64, robot: &RobotConfig) -> bool {
    let legs = LegId::all(robot.n_legs);
    let offsets = robot.axle_offsets();
    let n_axles = offsets.len();
    let points: Vec<Vec2> = legs
        .iter()
        .enumerate()
        .filter(|(_, leg)| spec.in_stance(**leg, clock))
        .map(|(i, leg)| {
            let y = match leg.side {
                crate::gait::Side::Right => -robot.track_d / 2.0,
                crate::gait::Side::Left => robot.track_d / 2.0,
            };
            Vec2::new(offsets[i % n_axles], y)
        })
        .collect();
    if points.len() < 3 {
        return false;
    }
    // Origin strictly inside the convex hull: no half-plane through any
    // support pair separates it from the rest.
    let margin = 1e-6;
    for (i, a) in points.iter().enumerate() {
        for b in points.iter().skip(i + 1) {
            let n = (*b - *a).perp();
            if n.norm() < 1e-12 {
                continue;
            }
            let side_origin = n.dot(-*a);
            let mut all_opposite = true;
            for p in &points {
                if n.dot(*p - *a) * side_origin.signum() > margin {
                    all_opposite = false;
                    break;
                }
            }
            if all_opposite && side_origin.abs() > margin {
                return false;
            }
            if side_origin.abs() <= margin {
                // Center of mass on a support line: check whether the rest
                // of the points straddle it.
                let pos = points.iter().any(|p| n.dot(*p - *a) > margin);
                let neg = points.iter().any(|p| n.dot(*p - *a) < -margin);
                if !(pos && neg) {
                    return false;
                }
            }
        }
    }
    true
}

/// Sagittal collapse of a gait. When the stance set balances the body, each
/// axle rides on its in-stance leg from either side; when it cannot
/// (diagonal support), the section tracks the right-side legs and the body
/// falls onto the yielded envelopes of the swing legs, which is where the
/// pitch disturbance of sparsely supported gaits comes from.
fn gait_filter(spec: &GaitSpec, leg: LegId, clock: f64, stable: bool) -> StanceFilter {
    if spec.gait_type == crate::gait::GaitType::Synchronized {
        return StanceFilter::Full;
    }
    let in_stance = spec.in_stance(leg, clock);
    let window = StanceFilter::Window {
        lo: spec.theta_s - std::f64::consts::FRAC_PI_2,
        hi: spec.theta_f - std::f64::consts::FRAC_PI_2,
    };
    if stable {
        if in_stance {
            window
        } else {
            StanceFilter::Omitted
        }
    } else {
        if leg.side == crate::gait::Side::Left {
            return StanceFilter::Omitted;
        }
        if in_stance {
            window
        } else {
            StanceFilter::Catch
        }
    }
}

fn record_row(
    world: &SimWorld,
    t: f64,
    rotors: &[f64],
    prev: &[f64],
    dt: f64,
    contact_legs: &[usize],
    stalled: bool,
) -> TraceRow {
    TraceRow {
        t,
        x: world.x,
        z: world.z,
        pitch: world.pitch,
        roll: 0.0,
        joints: rotors
            .iter()
            .zip(prev)
            .enumerate()
            .map(|(j, (a, p))| JointSample {
                angle: *a,
                velocity: (a - p) / dt,
                torque: 0.0,
                contact: contact_legs.contains(&j),
            })
            .collect(),
        cum_work: world.cum_work,
        stalled,
    }
}

/// Independent quasi-static oracle for the wheeled step threshold: a rigid
/// disc of radius `r` carrying load `w` per wheel with motor torque `tau`
/// and friction `mu` can mount a step of height h when the contact force at
/// the corner stays in the friction cone and the gravity moment about the
/// corner stays below the motor torque.
pub fn wheeled_step_oracle(r: f64, load_per_wheel: f64, tau_limit: f64, mu: f64) -> f64 {
    let h_friction = r * (1.0 - 1.0 / (1.0 + mu * mu).sqrt());
    let ratio = tau_limit / load_per_wheel;
    let h_torque = if ratio >= r { r } else { r - (r * r - ratio * ratio).sqrt() };
    h_friction.min(h_torque)
}

/// Scenario used by threshold search and the strategy comparison: approach
/// a step from x0 and try to pass it.
fn step_scenario(
    config: &RobotConfig,
    shape_mode: ShapeMode,
    height: f64,
    duration: f64,
) -> Result<(SimTrace, f64), SimError> {
    let terrain = TerrainProfile::step(height);
    let mut world = SimWorld::new(config.clone(), terrain, shape_mode)?;
    let start_x = -3.0 * config.wheel_radius - config.body_length / 2.0;
    world.place_at(start_x)?;
    let pass_x = config.body_length / 2.0 + 2.0 * config.wheel_radius;
    let mode = threshold_mode(config, shape_mode);
    let out = run_scenario_opts(world, mode, duration, 0.002, RunOptions {
        pass_x: Some(pass_x),
        stuck_window: 3.0,
        script: Vec::new(),
    })?;
    Ok((out.trace, pass_x))
}

fn threshold_mode(_config: &RobotConfig, shape_mode: ShapeMode) -> RobotMode {
    match shape_mode {
        ShapeMode::Wheeled => RobotMode::Wheeled { v: 0.25, w: 0.0 },
        // Step and stair climbing run the synchronized legged controller.
        _ => RobotMode::Synchronized { speed: 2.0, clock: 0.0 },
    }
}

/// Highest climbable step for the mode, to 0.5 mm, by bisection on the
/// scenario outcome.
pub fn step_threshold(
    config: &RobotConfig,
    shape_mode: ShapeMode,
    search_range: f64,
) -> Result<f64, SimError> {
    assert!(search_range > 0.0);
    let duration = 20.0;
    let passes = |h: f64| -> Result<bool, SimError> {
        match step_scenario(config, shape_mode, h, duration) {
            Ok((trace, pass_x)) => Ok(!trace.stuck && trace.final_x() >= pass_x),
            // An unresolvable static configuration cannot pass the step.
            Err(SimError::Numerical(_)) => Ok(false),
            Err(e) => Err(e),
        }
    };
    let mut lo = 1e-4;
    let mut hi = search_range;
    if !passes(lo)? {
        return Err(SimError::Bracket("mode fails even a negligible step".into()));
    }
    if passes(hi)? {
        return Err(SimError::Bracket(format!("mode passes the whole range {search_range}")));
    }
    while hi - lo > 5e-4 {
        let mid = 0.5 * (lo + hi);
        if passes(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Feasibility map of a stair sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SozMap {
    pub heights: Vec<f64>,
    pub depths: Vec<f64>,
    pub modes: Vec<ShapeMode>,
    /// results[mode][height_idx][depth_idx]
    pub results: Vec<Vec<Vec<bool>>>,
}

impl SozMap {
    pub fn passes(&self, mode_idx: usize, h_idx: usize, d_idx: usize) -> bool {
        self.results[mode_idx][h_idx][d_idx]
    }

    /// Highest passable height per depth column for a mode.
    pub fn frontier(&self, mode_idx: usize) -> Vec<Option<f64>> {
        (0..self.depths.len())
            .map(|d| {
                (0..self.heights.len())
                    .rev()
                    .find(|h| self.results[mode_idx][*h][d])
                    .map(|h| self.heights[h])
            })
            .collect()
    }
}

/// Run a five-stair scenario for one cell. The robot reaches the stairs at
/// an uncontrolled rotor phase, so the cell passes if any of a few arrival
/// phases climbs through.
pub fn stair_cell(config: &RobotConfig, shape_mode: ShapeMode, height: f64, depth: f64) -> Result<bool, SimError> {
    let terrain = TerrainProfile::stairs(height, depth, 5);
    let pass_x = terrain.end_x() + config.body_length / 2.0 + 2.0 * config.wheel_radius;
    let start_x = -3.0 * config.wheel_radius - config.body_length / 2.0;
    let duration = 40.0;
    // The S-profile repeats every half turn, so arrival phases live in
    // [0, pi).
    for k in 0..6 {
        let phase = std::f64::consts::PI * k as f64 / 6.0;
        let mut world = SimWorld::new(config.clone(), terrain, shape_mode)?;
        for rotor in world.rotors.iter_mut() {
            *rotor = phase;
        }
        world.place_at(start_x)?;
        let mode = threshold_mode(config, shape_mode);
        let out = match run_scenario_opts(world, mode, duration, 0.002, RunOptions {
            pass_x: Some(pass_x),
            stuck_window: 3.0,
            script: Vec::new(),
        }) {
            Ok(o) => o,
            Err(SimError::Numerical(_)) => continue,
            Err(e) => return Err(e),
        };
        if !out.trace.stuck && out.trace.final_x() >= pass_x {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Sweep stair height x depth x mode; cells run independently and errors
/// mark the cell impassable without aborting the sweep.
pub fn stair_sweep(
    config: &RobotConfig,
    heights: &[f64],
    depths: &[f64],
    modes: &[ShapeMode],
) -> SozMap {
    assert!(!heights.is_empty() && !depths.is_empty());
    let cells: Vec<(usize, usize, usize)> = modes
        .iter()
        .enumerate()
        .flat_map(|(m, _)| {
            heights
                .iter()
                .enumerate()
                .flat_map(move |(h, _)| depths.iter().enumerate().map(move |(d, _)| (m, h, d)))
        })
        .collect();
    let flat: Vec<bool> = crate::exec::map_slice(&cells, |(m, h, d)| {
        stair_cell(config, modes[*m], heights[*h], depths[*d]).unwrap_or(false)
    });
    let mut results = vec![vec![vec![false; depths.len()]; heights.len()]; modes.len()];
    for ((m, h, d), pass) in cells.into_iter().zip(flat) {
        results[m][h][d] = pass;
    }
    SozMap { heights: heights.to_vec(), depths: depths.to_vec(), modes: modes.to_vec(), results }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gait::GaitType;

    fn quad() -> RobotConfig {
        RobotConfig::quad_swheg()
    }

    #[test]
    fn flat_wheeled_speed_tracks_the_command() {
        let world = SimWorld::new(quad(), TerrainProfile::flat(), ShapeMode::Wheeled).unwrap();
        let mode = RobotMode::Wheeled { v: 0.4, w: 0.0 };
        let trace = run_scenario(world, mode, 4.0, 0.002).unwrap();
        assert!(!trace.stuck);
        let v = trace.average_speed();
        assert!((v - 0.4).abs() / 0.4 < 0.01, "speed {v}");
        // A rolling wheel on flat ground holds its height and pitch.
        let z0 = trace.rows[10].z;
        for row in &trace.rows {
            assert!((row.z - z0).abs() < 1e-9);
            assert!(row.pitch.abs() < 1e-9);
        }
    }

    #[test]
    fn flat_tripod_speed_matches_the_twist_model() {
        let hex = RobotConfig::hex_swheg();
        let spec = GaitSpec::with_defaults(GaitType::Tripod, 6, 3.0).unwrap();
        let predicted =
            crate::gait::predict_twist(&spec, &hex.chassis()).v_forward;
        let world = SimWorld::new(hex, TerrainProfile::flat(), ShapeMode::Legged).unwrap();
        let mode = RobotMode::Legged { spec, clock: 0.0 };
        let trace = run_scenario(world, mode, 9.0, 0.002).unwrap();
        assert!(!trace.stuck);
        let v = trace.average_speed();
        assert!(
            (v - predicted).abs() / predicted < 0.10,
            "sim {v} vs predicted {predicted}"
        );
    }

    #[test]
    fn tall_step_sets_the_stuck_flag() {
        let (trace, _) = step_scenario(&quad(), ShapeMode::Wheeled, 0.06, 20.0).unwrap();
        assert!(trace.stuck);
    }

    #[test]
    fn wheeled_threshold_matches_the_static_oracle() {
        let cfg = quad();
        let oracle = wheeled_step_oracle(
            cfg.wheel_radius,
            cfg.total_mass * GRAVITY / 4.0,
            cfg.drive_torque_limit,
            0.8,
        );
        let sim = step_threshold(&cfg, ShapeMode::Wheeled, 0.08).unwrap();
        assert!(
            (sim - oracle).abs() <= 1e-3,
            "sim {sim} vs oracle {oracle}"
        );
    }

    #[test]
    fn threshold_ordering_wheeled_legged_reversed() {
        let cfg = quad();
        let wheeled = step_threshold(&cfg, ShapeMode::Wheeled, 0.08).unwrap();
        let legged = step_threshold(&cfg, ShapeMode::Legged, 0.15).unwrap();
        let reversed = step_threshold(&cfg, ShapeMode::ReversedLegged, 0.30).unwrap();
        assert!(
            wheeled < legged && legged < reversed,
            "thresholds {wheeled} {legged} {reversed}"
        );
    }

    #[test]
    fn energy_is_never_below_the_climb() {
        let terrain = TerrainProfile::step(0.02);
        let cfg = quad();
        let mut world = SimWorld::new(cfg.clone(), terrain, ShapeMode::Legged).unwrap();
        world.place_at(-0.4).unwrap();
        let mode = RobotMode::Synchronized { speed: 2.0, clock: 0.0 };
        let trace = run_scenario(world, mode, 8.0, 0.002).unwrap();
        let dz = trace.rows.last().unwrap().z - trace.rows.first().unwrap().z;
        if dz > 0.0 {
            let pe = cfg.total_mass * GRAVITY * dz;
            assert!(trace.total_work() >= pe * 0.99, "work {} pe {}", trace.total_work(), pe);
        }
        // Work is non-decreasing.
        for w in trace.rows.windows(2) {
            assert!(w[1].cum_work >= w[0].cum_work);
        }
    }

    #[test]
    fn traces_are_deterministic() {
        let run = || {
            let world = SimWorld::new(quad(), TerrainProfile::flat(), ShapeMode::Wheeled).unwrap();
            run_scenario(world, RobotMode::Wheeled { v: 0.3, w: 0.0 }, 2.0, 0.002).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn threshold_search_rejects_bad_brackets() {
        let cfg = quad();
        // A range the wheeled mode passes entirely cannot bracket.
        let err = step_threshold(&cfg, ShapeMode::Wheeled, 0.005);
        assert!(matches!(err, Err(SimError::Bracket(_))));
    }

    #[test]
    fn normal_force_distribution_balances_exactly() {
        let contacts = vec![(0.15, 0.0), (-0.15, 0.0), (0.02, 0.0)];
        let w = 82.46;
        let forces = normal_forces(&contacts, w, 0.0).unwrap();
        let sum: f64 = forces.iter().sum();
        let moment: f64 = forces.iter().zip(&contacts).map(|(n, (x, _))| n * x).sum();
        assert!((sum - w).abs() < 1e-9, "force residual {}", (sum - w).abs());
        assert!(moment.abs() < 1e-9, "moment residual {}", moment.abs());
    }

    #[test]
    fn instruction_script_changes_the_commanded_speed() {
        let world = SimWorld::new(quad(), TerrainProfile::flat(), ShapeMode::Wheeled).unwrap();
        let script = vec![
            crate::controller::TimedInstruction {
                timestamp: 1.0,
                instruction: crate::controller::Instruction::SetTwist { v: 0.6, w: 0.0 },
            },
        ];
        let (trace, rejected) = run_scenario_script(
            world,
            RobotMode::Wheeled { v: 0.2, w: 0.0 },
            script,
            3.0,
            0.002,
        )
        .unwrap();
        assert!(rejected.is_empty());
        let x_at = |t: f64| {
            trace
                .rows
                .iter()
                .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
                .unwrap()
                .x
        };
        let early = (x_at(0.9) - x_at(0.4)) / 0.5;
        let late = (x_at(2.9) - x_at(2.4)) / 0.5;
        assert!((early - 0.2).abs() < 0.01, "early speed {early}");
        assert!((late - 0.6).abs() < 0.01, "late speed {late}");

        // Illegal instructions are reported, not applied.
        let world = SimWorld::new(quad(), TerrainProfile::flat(), ShapeMode::Wheeled).unwrap();
        let script = vec![crate::controller::TimedInstruction {
            timestamp: 0.5,
            instruction: crate::controller::Instruction::SetGait {
                gait: crate::gait::GaitType::Trot,
                period_tc: 3.0,
            },
        }];
        let (_, rejected) =
            run_scenario_script(world, RobotMode::Wheeled { v: 0.2, w: 0.0 }, script, 1.0, 0.002)
                .unwrap();
        assert_eq!(rejected.len(), 1);
    }

    #[test]
    fn degenerate_stairs_pass_in_every_mode() {
        let cfg = quad();
        for mode in [ShapeMode::Wheeled, ShapeMode::Legged, ShapeMode::ReversedLegged] {
            assert!(stair_cell(&cfg, mode, 1e-4, 0.25, ).unwrap(), "mode {mode:?}");
        }
    }
}
