//! Kinematics and quasi-statics of one tendon-driven four-bar wheel-leg
//! transformation module.
//!
//! Model layout (planar, hub at the origin):
//!
//! * `O` — wheel hub, ground pivot of the follower link.
//! * `A` — second ground pivot on the center rod, `ground_offset_oa` from O.
//! * Input link `A–B` (length `l_ab`), driven by the tendon. The tendon is
//!   routed so its pull acts with moment arm `l_ab` about A; winding the
//!   servo winch by one radian displaces the tendon by `winch_radius`.
//! * Follower link `O–C` (length `l_oc`).
//! * Coupler body: pivots at B and C, extended collinearly past C to the
//!   spoke mount D (`l_cd`). The compliant rim is a half-circle arc rigidly
//!   carried by the coupler, passing through B and D.
//!
//! A module carries two such mechanisms, point-symmetric about the hub; the
//! second spoke is the reflection of the first through O. The externally
//! measurable expansion extent `dist_bc` is the spacing between the marker
//! joints B of the two mechanisms (2|OB|), which grows strictly as the
//! module expands.
//!
//! Branch convention: the passive dyad is always solved on the expanding
//! branch, with C on the counter-clockwise side of the chord O–B.

use crate::geom::{Arc, SplitMix64, Vec2};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// Normalized margin below which a pose is flagged singular.
pub const SINGULARITY_TOL: f64 = 1e-3;
/// Capsule radius used for link bodies in interference checks.
pub const LINK_RADIUS: f64 = 0.004;
/// Required clearance between non-adjacent bodies.
pub const INTERFERENCE_CLEARANCE: f64 = 0.001;
/// Closure residual bound guaranteed by the closed-form solve.
pub const CLOSURE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpokeArc {
    /// Rim arc radius in meters.
    pub radius: f64,
    /// Angular extent of one rim arc; the S-leg uses half-circle rims (pi).
    pub extent: f64,
}

/// Link lengths, stop and tendon parameters of one wheel-leg module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkageGeometry {
    /// Hub-to-input-pivot spacing along the center rod (m).
    pub ground_offset_oa: f64,
    /// Input link A-B, also the tendon moment arm (m).
    pub l_ab: f64,
    /// Coupler pivot spacing B-C (m).
    pub l_bc: f64,
    /// Coupler extension C-D to the spoke mount (m).
    pub l_cd: f64,
    /// Follower link O-C (m).
    pub l_oc: f64,
    pub spoke_arc: SpokeArc,
    /// Input angle of the mechanical stop on link 1 (rad).
    pub stop_angle: f64,
    /// Servo winch radius (m).
    pub winch_radius: f64,
    /// Tendon displacement between wheeled and legged mode (m).
    pub tendon_travel_max: f64,
    /// Torsional restore spring stiffness (N*m/rad).
    pub spring_k: f64,
    /// Spring deflection already present at the wheeled pose (rad).
    pub spring_preload: f64,
}

impl LinkageGeometry {
    /// Input angle of the wheeled (fully retracted) pose.
    pub fn closed_angle(&self) -> f64 {
        self.stop_angle - self.tendon_travel_max / self.l_ab
    }

    /// Servo angle corresponding to full tendon travel.
    pub fn servo_travel(&self) -> f64 {
        self.tendon_travel_max / self.winch_radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointPositions {
    pub a: Vec2,
    pub b: Vec2,
    pub c: Vec2,
    pub d: Vec2,
}

/// One closed-chain pose on the working branch.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkagePose {
    pub servo_angle: f64,
    pub input_angle: f64,
    pub joints: JointPositions,
    pub coupler_angle: f64,
    pub follower_angle: f64,
    /// Spacing between the transformation markers carried at joint B of this
    /// mechanism and of its point-reflected twin (2|OB|). This is the
    /// externally measurable transformation extent.
    pub dist_bc: f64,
    /// Hub-to-spoke-mount distance |OD|.
    pub dist_od: f64,
    /// Rim arc of this spoke in world coordinates (twin is its reflection).
    pub rim: Arc,
    pub singular: bool,
    pub interfering: bool,
}

impl LinkagePose {
    /// Outer rim radius seen from the hub in direction `polar`, over both
    /// spokes. `None` if no rim material lies in that direction.
    pub fn outer_radius(&self, polar: f64) -> Option<f64> {
        let dir = Vec2::unit(polar);
        let mut best: Option<f64> = None;
        for arc in [self.rim, reflect_arc(&self.rim)] {
            if let Some(r) = ray_arc_radius(dir, &arc) {
                best = Some(best.map_or(r, |b: f64| b.max(r)));
            }
        }
        best
    }

    /// Sampled polar profile (angle, outer radius) over the full circle.
    pub fn rim_radius_profile(&self, samples: usize) -> Vec<(f64, Option<f64>)> {
        (0..samples)
            .map(|i| {
                let ang = crate::geom::TAU * i as f64 / samples as f64;
                (ang, self.outer_radius(ang))
            })
            .collect()
    }

    pub fn max_outer_radius(&self) -> f64 {
        // Max of |center| + radius is attained within the span iff the
        // outward apex direction lies in the arc; endpoints bound it else.
        let arc = &self.rim;
        let mut best = f64::MIN;
        let c = arc.center;
        if c.norm() > 1e-15 && arc.contains_angle(c.angle()) {
            best = c.norm() + arc.radius;
        }
        let (e0, e1) = arc.endpoints();
        best.max(e0.norm()).max(e1.norm())
    }

    /// Largest deviation of the rim from a hub-centered circle of radius `r`.
    pub fn rim_deviation_from_circle(&self, r: f64, samples: usize) -> f64 {
        let arc = &self.rim;
        let mut worst: f64 = 0.0;
        for i in 0..=samples {
            let ang = arc.start_angle + arc.extent * i as f64 / samples as f64;
            let p = arc.point_at(ang);
            worst = worst.max((p.norm() - r).abs());
        }
        worst
    }
}

fn reflect_arc(arc: &Arc) -> Arc {
    Arc {
        center: -arc.center,
        radius: arc.radius,
        start_angle: arc.start_angle + PI,
        extent: arc.extent,
    }
}

/// Radius along `dir` (unit) at which the ray from the origin meets the arc.
fn ray_arc_radius(dir: Vec2, arc: &Arc) -> Option<f64> {
    // Solve |t*dir - center| = radius for t >= 0, keep the outermost hit
    // whose direction from the arc center lies in the span.
    let b = dir.dot(arc.center);
    let c = arc.center.norm_sq() - arc.radius * arc.radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    for t in [b + sq, b - sq] {
        if t <= 0.0 {
            continue;
        }
        let p = dir * t;
        if arc.contains_angle((p - arc.center).angle()) {
            return Some(t);
        }
    }
    None
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum LinkageError {
    #[error("servo angle {angle} outside travel [0, {max}]")]
    Range { angle: f64, max: f64 },
    #[error("four-bar cannot close at input angle {input_angle}{}", sample_index.map(|i| format!(" (sample {i})")).unwrap_or_default())]
    Assembly { input_angle: f64, sample_index: Option<usize> },
    #[error("tendon lever arm below 1e-9 m")]
    Degenerate,
    #[error("invalid linkage geometry: {0}")]
    InvalidGeometry(String),
}

/// Validated linkage with the rim arc frame resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct Linkage {
    geom: LinkageGeometry,
    /// Rim arc center in the coupler frame (origin at B, +x towards C).
    arc_center_local: Vec2,
    /// Sign of the arc-center side in the coupler frame.
    arc_side: f64,
}

impl Linkage {
    pub fn new(geom: LinkageGeometry) -> Result<Self, LinkageError> {
        let g = &geom;
        let positive = [
            ("ground_offset_oa", g.ground_offset_oa),
            ("l_ab", g.l_ab),
            ("l_bc", g.l_bc),
            ("l_cd", g.l_cd),
            ("l_oc", g.l_oc),
            ("spoke_arc.radius", g.spoke_arc.radius),
            ("winch_radius", g.winch_radius),
            ("tendon_travel_max", g.tendon_travel_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(LinkageError::InvalidGeometry(format!("{name} must be > 0, got {v}")));
            }
        }
        if g.spring_k < 0.0 || g.spring_preload < 0.0 {
            return Err(LinkageError::InvalidGeometry("spring parameters must be nonnegative".into()));
        }
        if (g.spoke_arc.extent - PI).abs() > 1e-6 {
            return Err(LinkageError::InvalidGeometry(
                "spoke arc extent must be pi (half-circle rim)".into(),
            ));
        }
        let chord = g.l_bc + g.l_cd;
        if chord > 2.0 * g.spoke_arc.radius - 1e-5 {
            return Err(LinkageError::InvalidGeometry(
                "coupler chord B-D too long for the rim radius".into(),
            ));
        }
        let closed = g.closed_angle();
        if !(g.stop_angle > closed) {
            return Err(LinkageError::InvalidGeometry("stop angle below closed angle".into()));
        }

        // Resolve the rim arc center side: the wheeled pose must put the arc
        // center at the hub, so pick the side that lands nearer to O.
        let half = chord / 2.0;
        let h = (g.spoke_arc.radius * g.spoke_arc.radius - half * half).sqrt();
        let mut best: Option<(f64, Vec2, f64)> = None;
        for side in [1.0, -1.0] {
            let local = Vec2::new(half, side * h);
            let probe = Linkage { geom: geom.clone(), arc_center_local: local, arc_side: side };
            let pose = probe.solve_input(closed)?;
            let dist = pose.rim.center.norm();
            if best.as_ref().is_none_or(|(d, _, _)| dist < *d) {
                best = Some((dist, local, side));
            }
        }
        let (_, arc_center_local, arc_side) = best.unwrap();
        let link = Linkage { geom, arc_center_local, arc_side };

        // The chain must close over the whole travel and hit the stop on the
        // working branch.
        for i in 0..=64 {
            let alpha = closed + (link.geom.stop_angle - closed) * i as f64 / 64.0;
            link.solve_input(alpha)
                .map_err(|_| LinkageError::InvalidGeometry(format!("chain does not close at input angle {alpha}")))?;
        }
        Ok(link)
    }

    pub fn geometry(&self) -> &LinkageGeometry {
        &self.geom
    }

    /// The canonical geometry produced by the design search, shipped with
    /// the repository as a versioned config file.
    pub fn canonical() -> Linkage {
        static CANONICAL: &str = include_str!("../configs/canonical_linkage.toml");
        let geom: LinkageGeometry =
            toml::from_str(CANONICAL).expect("embedded canonical geometry parses");
        Linkage::new(geom).expect("embedded canonical geometry is valid")
    }

    fn input_pivot(&self) -> Vec2 {
        Vec2::new(self.geom.ground_offset_oa, 0.0)
    }

    /// Solve the passive dyad at a given input angle (closed form).
    fn solve_input(&self, input_angle: f64) -> Result<LinkagePose, LinkageError> {
        let g = &self.geom;
        let a = self.input_pivot();
        let (b, c, coupler_angle, follower_angle) =
            solve_dyad_raw(g.ground_offset_oa, g.l_ab, g.l_bc, g.l_oc, input_angle)
                .ok_or(LinkageError::Assembly { input_angle, sample_index: None })?;
        let d = c + (c - b).normalized() * g.l_cd;

        let margin = (coupler_angle - follower_angle).sin().abs();
        let rim = self.rim_arc(b, coupler_angle);

        let servo_angle = (input_angle - g.closed_angle()) * g.l_ab / g.winch_radius;
        Ok(LinkagePose {
            servo_angle,
            input_angle,
            joints: JointPositions { a, b, c, d },
            coupler_angle,
            follower_angle,
            dist_bc: 2.0 * b.norm(),
            dist_od: d.norm(),
            rim,
            singular: margin < SINGULARITY_TOL,
            interfering: false,
        })
    }

    fn rim_arc(&self, b: Vec2, coupler_angle: f64) -> Arc {
        let x = Vec2::unit(coupler_angle);
        let center = b + x * self.arc_center_local.x + x.perp() * self.arc_center_local.y;
        // Apex points away from the center side of the chord.
        let apex_dir_local = -FRAC_PI_2 * self.arc_side;
        let apex_dir = coupler_angle + apex_dir_local;
        Arc {
            center,
            radius: self.geom.spoke_arc.radius,
            start_angle: apex_dir - self.geom.spoke_arc.extent / 2.0,
            extent: self.geom.spoke_arc.extent,
        }
    }

    /// Forward kinematics from a servo angle, with flags populated.
    pub fn fk_transform(&self, servo_angle: f64) -> Result<LinkagePose, LinkageError> {
        let max = self.geom.servo_travel();
        if !(servo_angle >= -1e-12 && servo_angle <= max * (1.0 + 1e-12)) {
            return Err(LinkageError::Range { angle: servo_angle, max });
        }
        let alpha = self.geom.closed_angle() + servo_angle.clamp(0.0, max) * self.geom.winch_radius / self.geom.l_ab;
        let mut pose = self.solve_input(alpha)?;
        pose.servo_angle = servo_angle;
        pose.interfering = self.check_interference(&pose);
        Ok(pose)
    }

    /// Poses sampled uniformly over the servo travel.
    pub fn workspace(&self, n_samples: usize) -> Result<Vec<LinkagePose>, LinkageError> {
        assert!(n_samples >= 2, "workspace needs at least the two extreme poses");
        let max = self.geom.servo_travel();
        (0..n_samples)
            .map(|i| {
                let servo = max * i as f64 / (n_samples - 1) as f64;
                self.fk_transform(servo).map_err(|e| match e {
                    LinkageError::Assembly { input_angle, .. } => {
                        LinkageError::Assembly { input_angle, sample_index: Some(i) }
                    }
                    other => other,
                })
            })
            .collect()
    }

    /// Torque the restore spring exerts towards the wheeled pose.
    pub fn spring_torque(&self, input_angle: f64) -> f64 {
        self.geom.spring_k * (input_angle - self.geom.closed_angle() + self.geom.spring_preload)
    }

    /// Static tendon tension holding `pose` against the spring and a ground
    /// force applied at the spoke mount D.
    ///
    /// At the singular (fully expanded) pose the structure takes the ground
    /// load and the tension reduces to spring torque over the lever arm,
    /// independent of the applied force.
    pub fn required_tendon_tension(
        &self,
        pose: &LinkagePose,
        ground_force: Vec2,
    ) -> Result<f64, LinkageError> {
        if self.geom.l_ab < 1e-9 {
            return Err(LinkageError::Degenerate);
        }
        let tau_spring = self.spring_torque(pose.input_angle);
        if pose.singular {
            return Ok(tau_spring / self.geom.l_ab);
        }
        let d_dot = self.mount_velocity(pose);
        Ok((tau_spring - ground_force.dot(d_dot)) / self.geom.l_ab)
    }

    /// dD/d(input angle) on the working branch.
    fn mount_velocity(&self, pose: &LinkagePose) -> Vec2 {
        let g = &self.geom;
        let (dgamma, _dbeta) = self.passive_rates(pose);
        let e_alpha = Vec2::unit(pose.input_angle).perp();
        let e_gamma = Vec2::unit(pose.coupler_angle).perp();
        e_alpha * g.l_ab + e_gamma * ((g.l_bc + g.l_cd) * dgamma)
    }

    /// (dgamma/dalpha, dbeta/dalpha) from the closure constraint.
    fn passive_rates(&self, pose: &LinkagePose) -> (f64, f64) {
        let g = &self.geom;
        let u = Vec2::unit(pose.coupler_angle).perp() * g.l_bc;
        let v = Vec2::unit(pose.follower_angle).perp() * (-g.l_oc);
        let rhs = Vec2::unit(pose.input_angle).perp() * (-g.l_ab);
        let det = u.cross(v);
        let dgamma = rhs.cross(v) / det;
        let dbeta = u.cross(rhs) / det;
        (dgamma, dbeta)
    }

    /// d(margin)/d(input angle), for consistency checks against finite
    /// differences.
    pub fn margin_gradient(&self, pose: &LinkagePose) -> f64 {
        let (dgamma, dbeta) = self.passive_rates(pose);
        let delta = pose.coupler_angle - pose.follower_angle;
        delta.sin().signum() * delta.cos() * (dgamma - dbeta)
    }

    /// Clearance test between bodies that share a motion plane. The link
    /// plates are laminated in offset planes (input, follower and the twin
    /// mechanism stack side by side, and the spoke tips sweep past each
    /// other when expanding), so the checked pairs are the ones a plate stack
    /// cannot separate: the rim band against the chassis rod it wraps, the
    /// follower sweeping inside its own rim band, and proper crossings of
    /// the two rim bands away from their seam.
    fn check_interference(&self, pose: &LinkagePose) -> bool {
        let j = &pose.joints;
        let min_gap = 2.0 * LINK_RADIUS + INTERFERENCE_CLEARANCE;
        let rod_end = self.geom.ground_offset_oa + 0.015;
        if pose.rim.distance_to_segment(Vec2::new(-rod_end, 0.0), Vec2::new(rod_end, 0.0)) < min_gap {
            return true;
        }
        if pose.rim.distance_to_segment(Vec2::ZERO, j.c) < min_gap {
            return true;
        }
        rims_cross(&pose.rim, &reflect_arc(&pose.rim))
    }
}

/// Whether two rim arcs properly cross, ignoring the seam neighborhoods
/// where the arcs are designed to abut.
fn rims_cross(a: &Arc, b: &Arc) -> bool {
    let d = b.center - a.center;
    let dist = d.norm();
    if dist < 1e-12 || dist >= a.radius + b.radius {
        return false;
    }
    // Intersection points of the two supporting circles (equal radii here).
    let t = (dist * dist + a.radius * a.radius - b.radius * b.radius) / (2.0 * dist);
    let h_sq = a.radius * a.radius - t * t;
    if h_sq <= 0.0 {
        return false;
    }
    let h = h_sq.sqrt();
    let u = d * (1.0 / dist);
    let seam_margin = 2.0 * LINK_RADIUS / a.radius;
    for sign in [1.0, -1.0] {
        let p = a.center + u * t + u.perp() * (h * sign);
        let in_span_interior = |arc: &Arc| {
            let ang = (p - arc.center).angle();
            let mut rel = (ang - arc.start_angle) % crate::geom::TAU;
            if rel < 0.0 {
                rel += crate::geom::TAU;
            }
            rel > seam_margin && rel < arc.extent - seam_margin
        };
        if in_span_interior(a) && in_span_interior(b) {
            return true;
        }
    }
    false
}

/// Closed-form solve of the passive dyad: returns (B, C, coupler angle,
/// follower angle) on the expanding branch, or None if the chain cannot
/// close. Shared by the pose solver and the design search hot loops.
pub(crate) fn solve_dyad_raw(
    ground_offset: f64,
    l_ab: f64,
    l_bc: f64,
    l_oc: f64,
    input_angle: f64,
) -> Option<(Vec2, Vec2, f64, f64)> {
    let a = Vec2::new(ground_offset, 0.0);
    let b = a + Vec2::unit(input_angle) * l_ab;
    let d_ob = b.norm();
    if d_ob < 1e-12 {
        return None;
    }
    let t = (d_ob * d_ob + l_oc * l_oc - l_bc * l_bc) / (2.0 * d_ob);
    let h_sq = l_oc * l_oc - t * t;
    // Tolerate tiny negative discriminants at the singular extremes.
    if h_sq < -1e-9 * l_oc * l_oc {
        return None;
    }
    let h = h_sq.max(0.0).sqrt();
    let u = b * (1.0 / d_ob);
    // Expanding branch: C on the counter-clockwise side of chord O-B.
    let c = u * t + u.perp() * h;
    Some((b, c, (c - b).angle(), c.angle()))
}

/// Normalized transmission margin of a pose: |det J| over the passive link
/// lengths, which reduces to |sin(coupler - follower)|. Zero at singularity.
pub fn singularity_margin(pose: &LinkagePose) -> f64 {
    (pose.coupler_angle - pose.follower_angle).sin().abs()
}

/// Deterministic random ground forces with |F| <= `max_norm`.
pub fn random_ground_forces(count: usize, max_norm: f64, seed: u64) -> Vec<Vec2> {
    let mut rng = SplitMix64::new(seed);
    (0..count)
        .map(|_| {
            let ang = rng.next_range(0.0, crate::geom::TAU);
            let mag = rng.next_range(0.0, max_norm);
            Vec2::unit(ang) * mag
        })
        .collect()
}
