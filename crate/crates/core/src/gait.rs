//! Clock-driven periodic joint trajectories for legged mode, and the
//! twist model that maps gait timing to body motion.
//!
//! Each wheel-leg sweeps the contact region [theta_s, theta_f] at a slow
//! constant rate during stance and covers the remaining revolution fast, so
//! the hub angle advances exactly one turn per period. Positive k_delta
//! lengthens the stance of the right side, slowing it down, which turns the
//! robot to the right under the forward convention.

use crate::drive::ChassisParams;
use crate::geom::TAU;
use crate::linkage::{Linkage, LinkagePose};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

pub const K_BASIC_DEFAULT: f64 = 0.65;
/// Stance lower bound: duty factor never drops below one half.
pub const MIN_DUTY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GaitType {
    Walk,
    Trot,
    Tripod,
    TurnInPlace,
    Synchronized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LegPosition {
    Front,
    Middle,
    Rear,
}

/// Leg identity; middle legs exist only on six-legged configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegId {
    pub side: Side,
    pub position: LegPosition,
}

impl LegId {
    pub const fn new(side: Side, position: LegPosition) -> Self {
        LegId { side, position }
    }

    /// Legs of an n-legged robot in table order.
    pub fn all(n_legs: usize) -> Vec<LegId> {
        use LegPosition::*;
        use Side::*;
        match n_legs {
            4 => vec![
                LegId::new(Right, Front),
                LegId::new(Right, Rear),
                LegId::new(Left, Front),
                LegId::new(Left, Rear),
            ],
            6 => vec![
                LegId::new(Right, Front),
                LegId::new(Right, Middle),
                LegId::new(Right, Rear),
                LegId::new(Left, Front),
                LegId::new(Left, Middle),
                LegId::new(Left, Rear),
            ],
            _ => panic!("unsupported leg count {n_legs}"),
        }
    }

    pub fn index(&self, n_legs: usize) -> usize {
        LegId::all(n_legs).iter().position(|l| l == self).expect("leg defined for this count")
    }

    pub fn label(&self) -> &'static str {
        use LegPosition::*;
        use Side::*;
        match (self.side, self.position) {
            (Right, Front) => "RF",
            (Right, Middle) => "RM",
            (Right, Rear) => "RR",
            (Left, Front) => "LF",
            (Left, Middle) => "LM",
            (Left, Rear) => "LR",
        }
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum GaitError {
    #[error("gait {0:?} is not defined for {1} legs")]
    UndefinedPair(GaitType, usize),
    #[error("invalid gait spec: {0}")]
    Spec(String),
    #[error("requested turn rate needs |k_delta| beyond the stance bound; max attainable |w| is {max_abs_w}")]
    Infeasible { max_abs_w: f64 },
    #[error("twist must request motion")]
    ZeroTwist,
}

/// Per-leg phase offsets as fractions of the period, in `LegId::all` order.
pub fn phase_table(gait_type: GaitType, n_legs: usize) -> Result<Vec<f64>, GaitError> {
    match (gait_type, n_legs) {
        (GaitType::Walk, 4) => Ok(vec![0.0, 0.25, 0.5, 0.75]),
        (GaitType::Trot, 4) => Ok(vec![0.0, 0.5, 0.5, 0.0]),
        (GaitType::Tripod, 6) => Ok(vec![0.0, 0.5, 0.0, 0.5, 0.0, 0.5]),
        (GaitType::TurnInPlace, 4) => Ok(vec![0.0, 0.5, 0.5, 0.0]),
        (GaitType::TurnInPlace, 6) => Ok(vec![0.0, 0.5, 0.0, 0.5, 0.0, 0.5]),
        (GaitType::Synchronized, n @ (4 | 6)) => Ok(vec![0.0; n]),
        (g, n) => Err(GaitError::UndefinedPair(g, n)),
    }
}

/// Contact-region parameters derived from an expanded wheel-leg pose: the
/// polar window of one rim lobe whose outer radius stays within 95% of the
/// lobe maximum, mapped into hub-angle coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactRegion {
    pub theta_s: f64,
    pub theta_f: f64,
    pub r_avg: f64,
}

impl ContactRegion {
    pub fn from_expanded_pose(pose: &LinkagePose) -> ContactRegion {
        let arc = &pose.rim;
        let n = 2048;
        let radii: Vec<(f64, f64)> = (0..=n)
            .map(|i| {
                let ang = arc.start_angle + arc.extent * i as f64 / n as f64;
                let p = arc.point_at(ang);
                (p.angle(), p.norm())
            })
            .collect();
        let max_r = radii.iter().map(|(_, r)| *r).fold(f64::MIN, f64::max);
        let cutoff = 0.95 * max_r;
        let peak = radii
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .map(|(i, _)| i)
            .unwrap();
        let mut lo = peak;
        while lo > 0 && radii[lo - 1].1 >= cutoff {
            lo -= 1;
        }
        let mut hi = peak;
        while hi < n && radii[hi + 1].1 >= cutoff {
            hi += 1;
        }
        let span: Vec<&(f64, f64)> = radii[lo..=hi].iter().collect();
        let r_avg = span.iter().map(|(_, r)| r).sum::<f64>() / span.len() as f64;
        // Unwrap the polar angles along the lobe so the window is contiguous.
        let mut polar_lo = radii[lo].0;
        let mut prev = polar_lo;
        let mut polar_hi = polar_lo;
        for &&(ang, _) in span.iter().skip(1) {
            let mut a = ang;
            while a < prev - std::f64::consts::PI {
                a += TAU;
            }
            while a > prev + std::f64::consts::PI {
                a -= TAU;
            }
            prev = a;
            polar_hi = a;
        }
        if polar_hi < polar_lo {
            std::mem::swap(&mut polar_lo, &mut polar_hi);
        }
        // A rim point at polar angle psi touches the ground at hub angle
        // psi + pi/2 under forward (clockwise) rolling.
        let span_width = polar_hi - polar_lo;
        let mut theta_s = (polar_lo + std::f64::consts::FRAC_PI_2) % TAU;
        if theta_s <= 0.0 {
            theta_s += TAU;
        }
        if theta_s + span_width >= TAU {
            theta_s = (TAU - span_width) * 0.5;
        }
        ContactRegion { theta_s, theta_f: theta_s + span_width, r_avg }
    }

    /// Region of the canonical geometry's expanded pose.
    pub fn canonical() -> &'static ContactRegion {
        static REGION: OnceLock<ContactRegion> = OnceLock::new();
        REGION.get_or_init(|| {
            let link = Linkage::canonical();
            let pose = link.fk_transform(link.geometry().servo_travel()).unwrap();
            ContactRegion::from_expanded_pose(&pose)
        })
    }
}

/// Timing and geometry of one legged gait.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitSpec {
    pub gait_type: GaitType,
    pub n_legs: usize,
    /// Gait period (s).
    pub period_tc: f64,
    /// Shared stance fraction of the period.
    pub k_basic: f64,
    /// Side-signed stance fraction: positive lengthens the right stance.
    pub k_delta: f64,
    /// Contact-region entry angle (rad).
    pub theta_s: f64,
    /// Contact-region exit angle (rad).
    pub theta_f: f64,
    /// Mean contact radius (m).
    pub r_avg: f64,
    /// Per-leg phase offsets as fractions of the period.
    pub phase_offsets: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointTarget {
    pub angle: f64,
    pub velocity: f64,
}

impl GaitSpec {
    pub fn new(
        gait_type: GaitType,
        n_legs: usize,
        period_tc: f64,
        k_basic: f64,
        k_delta: f64,
        region: &ContactRegion,
    ) -> Result<GaitSpec, GaitError> {
        let spec = GaitSpec {
            gait_type,
            n_legs,
            period_tc,
            k_basic,
            k_delta,
            theta_s: region.theta_s,
            theta_f: region.theta_f,
            r_avg: region.r_avg,
            phase_offsets: phase_table(gait_type, n_legs)?,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Canonical-geometry gait with default duty factor.
    pub fn with_defaults(gait_type: GaitType, n_legs: usize, period_tc: f64) -> Result<GaitSpec, GaitError> {
        GaitSpec::new(gait_type, n_legs, period_tc, K_BASIC_DEFAULT, 0.0, ContactRegion::canonical())
    }

    pub fn validate(&self) -> Result<(), GaitError> {
        if !(self.period_tc > 0.0) {
            return Err(GaitError::Spec("period must be positive".into()));
        }
        if !(self.theta_s > 0.0 && self.theta_s < self.theta_f && self.theta_f < TAU) {
            return Err(GaitError::Spec("need 0 < theta_s < theta_f < 2*pi".into()));
        }
        if self.k_basic - self.k_delta.abs() < MIN_DUTY - 1e-12 {
            return Err(GaitError::Spec(format!(
                "stance fraction {} - |{}| below the 1/2 duty bound",
                self.k_basic, self.k_delta
            )));
        }
        if self.k_basic + self.k_delta.abs() >= 1.0 {
            return Err(GaitError::Spec("stance fraction reaches the full period".into()));
        }
        if !(self.r_avg > 0.0) {
            return Err(GaitError::Spec("contact radius must be positive".into()));
        }
        let expect = phase_table(self.gait_type, self.n_legs)?;
        if self.phase_offsets != expect {
            return Err(GaitError::Spec("phase offsets do not match the gait table".into()));
        }
        Ok(())
    }

    /// Stance duration of one side (s).
    pub fn stance_time(&self, side: Side) -> f64 {
        let sign = match side {
            Side::Right => 1.0,
            Side::Left => -1.0,
        };
        (self.k_basic + sign * self.k_delta) * self.period_tc
    }

    /// Whether the leg is in its stance window at time `t`.
    pub fn in_stance(&self, leg: LegId, t: f64) -> bool {
        if self.gait_type == GaitType::Synchronized {
            return true;
        }
        let local = self.local_time(leg, t);
        local < self.stance_time(leg.side)
    }

    fn local_time(&self, leg: LegId, t: f64) -> f64 {
        let offset = self.phase_offsets[leg.index(self.n_legs)] * self.period_tc;
        let u = (t + offset) / self.period_tc;
        let frac = u - u.floor();
        frac * self.period_tc
    }
}

/// Hub angle and rate of one leg at time `t`. The angle accumulates
/// 2*pi per period; stance sweeps [theta_s, theta_f] at constant rate.
pub fn joint_trajectory(spec: &GaitSpec, leg: LegId, t: f64) -> Result<JointTarget, GaitError> {
    spec.validate()?;
    if spec.gait_type == GaitType::Synchronized {
        let rate = TAU / spec.period_tc;
        return Ok(JointTarget { angle: rate * t, velocity: rate });
    }
    let offset = spec.phase_offsets[leg.index(spec.n_legs)] * spec.period_tc;
    let u = (t + offset) / spec.period_tc;
    let cycles = u.floor();
    let local = (u - cycles) * spec.period_tc;

    let sweep = spec.theta_f - spec.theta_s;
    let t_s = spec.stance_time(leg.side);
    let (profile, velocity) = if local < t_s {
        (spec.theta_s + sweep * local / t_s, sweep / t_s)
    } else {
        let fast_sweep = TAU - sweep;
        let fast_time = spec.period_tc - t_s;
        (spec.theta_f + fast_sweep * (local - t_s) / fast_time, fast_sweep / fast_time)
    };
    let mut angle = TAU * cycles + profile;
    let mut vel = velocity;
    if spec.gait_type == GaitType::TurnInPlace && leg.side == Side::Left {
        // In-place turning mirrors the left side.
        angle = -angle;
        vel = -vel;
    }
    Ok(JointTarget { angle, velocity: vel })
}

/// Hub angle in synchronized mode: every leg on every axle tracks the same
/// constant-velocity ramp.
pub fn synchronized_trajectory(speed: f64, _leg: LegId, t: f64) -> f64 {
    speed * t
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Twist {
    pub v_forward: f64,
    pub w: f64,
}

/// Average body twist implied by the gait timing.
pub fn predict_twist(spec: &GaitSpec, chassis: &ChassisParams) -> Twist {
    let sweep = spec.theta_f - spec.theta_s;
    let v_right = spec.r_avg * sweep / spec.stance_time(Side::Right);
    let v_left = spec.r_avg * sweep / spec.stance_time(Side::Left);
    match spec.gait_type {
        GaitType::TurnInPlace => Twist {
            v_forward: 0.5 * (v_right - v_left),
            w: (v_right + v_left) / chassis.track_d,
        },
        _ => Twist {
            v_forward: 0.5 * (v_right + v_left),
            w: (v_right - v_left) / chassis.track_d,
        },
    }
}

/// Solve gait timing for a requested twist with the default duty factor:
/// the period comes from the forward speed, the stance skew from the turn
/// rate. The forward speed is reproduced exactly; a turn rate that needs a
/// stance skew beyond the duty bound is an error.
pub fn gait_from_twist(
    v: f64,
    w: f64,
    gait_type: GaitType,
    n_legs: usize,
    chassis: &ChassisParams,
    region: &ContactRegion,
) -> Result<GaitSpec, GaitError> {
    let k_basic = K_BASIC_DEFAULT;
    let sweep = region.theta_f - region.theta_s;
    if v == 0.0 && w == 0.0 {
        return Err(GaitError::ZeroTwist);
    }
    if gait_type == GaitType::TurnInPlace || v == 0.0 {
        // Mirrored sides: w = 2 * V_side / track. The left side runs the
        // mirrored trajectory, which turns counter-clockwise; a clockwise
        // spin uses the mirrored mount and is not expressible here.
        if w <= 0.0 {
            return Err(GaitError::Spec(
                "in-place turning is defined counter-clockwise; mirror the sides for clockwise".into(),
            ));
        }
        let v_side = w * chassis.track_d / 2.0;
        let period = region.r_avg * sweep / (k_basic * v_side);
        return GaitSpec::new(GaitType::TurnInPlace, n_legs, period, k_basic, 0.0, region);
    }
    if v < 0.0 {
        return Err(GaitError::Spec("forward speed must be positive for moving gaits".into()));
    }
    let k_delta = -w * chassis.track_d * k_basic / (2.0 * v);
    let max_delta = k_basic - MIN_DUTY;
    if k_delta.abs() > max_delta + 1e-12 {
        return Err(GaitError::Infeasible {
            max_abs_w: 2.0 * max_delta * v / (k_basic * chassis.track_d),
        });
    }
    let period = region.r_avg * sweep * k_basic / (v * (k_basic * k_basic - k_delta * k_delta));
    GaitSpec::new(gait_type, n_legs, period, k_basic, k_delta, region)
}
