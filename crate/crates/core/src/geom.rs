//! Planar geometry primitives shared by the linkage model and the terrain
//! stepper: vectors, segments (capsule axes) and circular arcs.

use serde::{Deserialize, Serialize};

pub const TAU: f64 = std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector at `angle` radians from the +x axis.
    pub fn unit(angle: f64) -> Self {
        Vec2 { x: angle.cos(), y: angle.sin() }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the planar cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2 { x: self.x / n, y: self.y / n }
    }

    /// Rotate counter-clockwise by `angle` radians.
    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2 { x: c * self.x - s * self.y, y: s * self.x + c * self.y }
    }

    pub fn perp(self) -> Vec2 {
        Vec2 { x: -self.y, y: self.x }
    }

    pub fn dist(self, other: Vec2) -> f64 {
        (self - other).norm()
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2 { x: self.x + o.x, y: self.y + o.y }
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2 { x: self.x - o.x, y: self.y - o.y }
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2 { x: self.x * s, y: self.y * s }
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2 { x: -self.x, y: -self.y }
    }
}

/// Closest point on segment [a, b] to `p`.
pub fn closest_on_segment(a: Vec2, b: Vec2, p: Vec2) -> Vec2 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return a;
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    a + ab * t
}

pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    p.dist(closest_on_segment(a, b, p))
}

/// Minimum distance between segments [a1, b1] and [a2, b2].
pub fn segment_segment_distance(a1: Vec2, b1: Vec2, a2: Vec2, b2: Vec2) -> f64 {
    let d1 = b1 - a1;
    let d2 = b2 - a2;
    let denom = d1.cross(d2);
    if denom.abs() > 1e-15 {
        // proper intersection test
        let r = a2 - a1;
        let t = r.cross(d2) / denom;
        let u = r.cross(d1) / denom;
        if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
            return 0.0;
        }
    }
    let mut best = point_segment_distance(a1, a2, b2);
    best = best.min(point_segment_distance(b1, a2, b2));
    best = best.min(point_segment_distance(a2, a1, b1));
    best.min(point_segment_distance(b2, a1, b1))
}

/// Circular arc: points `center + radius * unit(angle)` for `angle` in
/// `[start_angle, start_angle + extent]` (extent > 0, counter-clockwise).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub center: Vec2,
    pub radius: f64,
    pub start_angle: f64,
    pub extent: f64,
}

impl Arc {
    pub fn point_at(&self, angle: f64) -> Vec2 {
        self.center + Vec2::unit(angle) * self.radius
    }

    pub fn end_angle(&self) -> f64 {
        self.start_angle + self.extent
    }

    /// Whether the direction `angle` (any branch) falls inside the arc span.
    pub fn contains_angle(&self, angle: f64) -> bool {
        let mut rel = (angle - self.start_angle) % TAU;
        if rel < 0.0 {
            rel += TAU;
        }
        rel <= self.extent + 1e-12
    }

    pub fn endpoints(&self) -> (Vec2, Vec2) {
        (self.point_at(self.start_angle), self.point_at(self.end_angle()))
    }

    /// Distance from `p` to the nearest point of the arc (not the full circle).
    pub fn distance_to_point(&self, p: Vec2) -> f64 {
        let rel = p - self.center;
        if rel.norm() > 1e-15 && self.contains_angle(rel.angle()) {
            return (rel.norm() - self.radius).abs();
        }
        let (e0, e1) = self.endpoints();
        p.dist(e0).min(p.dist(e1))
    }

    /// Minimum distance between the arc and segment [a, b].
    pub fn distance_to_segment(&self, a: Vec2, b: Vec2) -> f64 {
        // Candidate pairs: segment endpoints to the arc, arc endpoints to
    // the segment, the foot of the center on the segment against the
        // in-span circle point, and direct crossings.
        let mut best = self.distance_to_point(a).min(self.distance_to_point(b));
        let (e0, e1) = self.endpoints();
        best = best.min(point_segment_distance(e0, a, b));
        best = best.min(point_segment_distance(e1, a, b));
        let foot = closest_on_segment(a, b, self.center);
        let rel = foot - self.center;
        if rel.norm() > 1e-15 && self.contains_angle(rel.angle()) {
            best = best.min((rel.norm() - self.radius).abs());
        }
        // Segment-circle intersections inside the span mean contact.
        let ab = b - a;
        let len_sq = ab.norm_sq();
        if len_sq > 1e-30 {
            let rel_a = a - self.center;
            let qb = 2.0 * rel_a.dot(ab);
            let qc = rel_a.norm_sq() - self.radius * self.radius;
            let disc = qb * qb - 4.0 * len_sq * qc;
            if disc >= 0.0 {
                let sq = disc.sqrt();
                for t in [(-qb - sq) / (2.0 * len_sq), (-qb + sq) / (2.0 * len_sq)] {
                    if (0.0..=1.0).contains(&t) {
                        let p = a + ab * t;
                        if self.contains_angle((p - self.center).angle()) {
                            return 0.0;
                        }
                    }
                }
            }
        }
        best
    }
}

/// Deterministic xorshift-style generator used for seeded sampling in tests
/// and search. Not cryptographic.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_distance_parallel() {
        let d = segment_segment_distance(
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, 1.0),
        );
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn segment_distance_crossing_is_zero() {
        let d = segment_segment_distance(
            Vec2::new(-1.0, -1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 1.0),
            Vec2::new(1.0, -1.0),
        );
        assert_eq!(d, 0.0);
    }

    #[test]
    fn arc_point_distance_inside_span() {
        let arc = Arc { center: Vec2::ZERO, radius: 1.0, start_angle: 0.0, extent: std::f64::consts::PI };
        // Point straight up, within span: distance to circle.
        assert!((arc.distance_to_point(Vec2::new(0.0, 2.0)) - 1.0).abs() < 1e-12);
        // Point straight down, outside span: distance to nearest endpoint.
        let d = arc.distance_to_point(Vec2::new(0.0, -1.0));
        assert!((d - 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn splitmix_is_deterministic() {
        let mut a = SplitMix64::new(42);
        let mut b = SplitMix64::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }
}
