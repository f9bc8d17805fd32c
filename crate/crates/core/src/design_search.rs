//! Constrained sampling-and-ranking search over linkage geometries.
//!
//! Candidates are drawn from a seeded low-discrepancy stream over the
//! parameter bounds. For each draw the input link length is solved so the
//! retracted pose centers the rim on the hub, the mechanical stop is placed
//! just short of the fold singularity, and the full requirement set is
//! evaluated on a sampled workspace. Near-feasible candidates get a local
//! coordinate refinement pass. Everything is deterministic for a fixed
//! (requirements, budget, seed) triple, and the refinement membership rule
//! depends only on the candidate itself so that growing the budget can only
//! improve the top of the ranking.

use crate::exec;
use crate::geom::Vec2;
use crate::linkage::{
    singularity_margin, Linkage, LinkageGeometry, LinkagePose, SpokeArc, SINGULARITY_TOL,
};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Margin value the stop angle is calibrated to (half the singular flag
/// tolerance, so the expanded pose always flags singular).
const STOP_MARGIN_TARGET: f64 = 5e-4;
/// Workspace samples used for requirement evaluation.
const EVAL_SAMPLES: usize = 100;
/// Candidates with a violation score under this fixed threshold are refined.
const REFINE_SCORE_THRESHOLD: f64 = 3.0;
/// Spring stiffness of the restore spring (N*m/rad).
const SPRING_K: f64 = 0.43;
/// Mass of one wheel-leg module (kg), sets the wheeled-mode holding preload.
const MODULE_MASS: f64 = 0.336;
/// Tendon travel between the two modes (m).
const TENDON_TRAVEL: f64 = 0.034;
/// Winch radius: full travel in just under 300 degrees of servo rotation.
const WINCH_RADIUS: f64 = 0.0065;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    fn lerp(&self, t: f64) -> f64 {
        self.lo + (self.hi - self.lo) * t
    }

    fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Search-space bounds for the free link lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterBounds {
    pub ground_offset_oa: Interval,
    pub l_ab: Interval,
    pub l_bc: Interval,
    pub l_cd: Interval,
    pub l_oc: Interval,
}

impl Default for ParameterBounds {
    fn default() -> Self {
        // Engineering guesses around a 0.12 m wheel; the coupler chord must
        // span close to the rim diameter for the retracted circle to close.
        ParameterBounds {
            ground_offset_oa: Interval::new(0.002, 0.050),
            l_ab: Interval::new(0.030, 0.135),
            l_bc: Interval::new(0.015, 0.130),
            l_cd: Interval::new(0.100, 0.225),
            l_oc: Interval::new(0.002, 0.105),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignRequirements {
    /// Rim circle radius in wheeled mode (m).
    pub closed_radius: f64,
    /// Allowed rim deviation from that circle (m).
    pub closed_radius_tol: f64,
    /// Target maximum wheel-leg radius in legged mode (m).
    pub expanded_radius: f64,
    pub expanded_radius_tol: f64,
    /// Floor on the compliant (unbacked) rim extent in legged mode (rad).
    pub min_compliant_arc: f64,
    /// Normalized margin bound for the expanded singular pose.
    pub singularity_tolerance: f64,
    /// Body clearance for the interference test (m).
    pub clearance: f64,
    pub bounds: ParameterBounds,
}

impl Default for DesignRequirements {
    fn default() -> Self {
        DesignRequirements {
            closed_radius: 0.12,
            closed_radius_tol: 1e-3,
            expanded_radius: 0.125,
            expanded_radius_tol: 5e-4,
            min_compliant_arc: 1.5,
            singularity_tolerance: SINGULARITY_TOL,
            clearance: 0.001,
            bounds: ParameterBounds::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    /// Unbacked rim extent in the expanded pose (rad).
    pub compliant_arc: f64,
    /// Hub-to-spoke-mount distance in the expanded pose (m).
    pub expanded_od: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequirementResidual {
    pub requirement: String,
    pub residual: f64,
    pub tolerance: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignCandidate {
    pub geometry: LinkageGeometry,
    pub objective: Objective,
    pub feasible: bool,
    pub violation_report: Vec<RequirementResidual>,
    /// Index in the sample stream this candidate came from.
    pub sample_index: usize,
    /// Whether local refinement produced this candidate.
    pub refined: bool,
}

impl DesignCandidate {
    fn total_link_length(&self) -> f64 {
        let g = &self.geometry;
        g.ground_offset_oa + g.l_ab + g.l_bc + g.l_cd + g.l_oc
    }

    fn violation_score(&self) -> f64 {
        self.violation_report
            .iter()
            .filter(|r| !r.ok)
            .map(|r| r.residual / r.tolerance.max(1e-6))
            .sum()
    }

    /// Ranking key, larger is better.
    fn rank_key(&self) -> (bool, f64, f64) {
        (self.feasible, self.objective.compliant_arc, self.objective.expanded_od)
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum SearchError {
    #[error("no feasible design within budget {budget}; bounds are too tight")]
    NoFeasibleDesign {
        budget: usize,
        /// Closest misses, for diagnosing which requirement blocks.
        near_misses: Vec<DesignCandidate>,
    },
    #[error("budget must be at least 1")]
    EmptyBudget,
}

#[derive(Debug, Clone, Copy)]
struct Params {
    ground_offset_oa: f64,
    l_ab: f64,
    l_bc: f64,
    l_cd: f64,
    l_oc: f64,
}

/// Radical-inverse (van der Corput) sequence in the given base.
fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    let mut scale = inv;
    while i > 0 {
        out += (i % base) as f64 * scale;
        i /= base;
        scale *= inv;
        inv = 1.0 / base as f64;
    }
    out
}

/// Seeded Halton point in (0,1)^4 via Cranley-Patterson rotation.
fn halton_point(index: u64, shifts: &[f64; 4]) -> [f64; 4] {
    const BASES: [u64; 4] = [2, 3, 5, 7];
    let mut p = [0.0; 4];
    for d in 0..4 {
        p[d] = (radical_inverse(index + 1, BASES[d]) + shifts[d]).fract();
    }
    p
}

fn seed_shifts(seed: u64) -> [f64; 4] {
    let mut rng = crate::geom::SplitMix64::new(seed);
    [rng.next_f64(), rng.next_f64(), rng.next_f64(), rng.next_f64()]
}

/// Dyad margin at a raw input angle, without constructing a full linkage.
fn dyad_margin(p: &Params, alpha: f64) -> Option<f64> {
    crate::linkage::solve_dyad_raw(p.ground_offset_oa, p.l_ab, p.l_bc, p.l_oc, alpha)
        .map(|(_, _, gamma, beta)| (gamma - beta).sin().abs())
}

/// Place the stop just short of the extension singularity (dyad fully
/// unfolded, the stable expanded pose) and derive the remaining geometry
/// fields. Cheap closed-form path; full validation happens in `evaluate`.
fn build_geometry(p: &Params, req: &DesignRequirements) -> Option<LinkageGeometry> {
    let radius = req.closed_radius;
    let chord = p.l_bc + p.l_cd;
    if chord >= 2.0 * radius - 1e-5 {
        return None;
    }
    let ext = p.l_bc + p.l_oc;
    // Input angle (below the rod axis, approaching it) at which |OB|
    // reaches the dyad extension.
    let cos_stop = (ext * ext - p.ground_offset_oa * p.ground_offset_oa - p.l_ab * p.l_ab)
        / (2.0 * p.ground_offset_oa * p.l_ab);
    if !(-1.0 + 1e-9..=1.0 - 1e-9).contains(&cos_stop) {
        return None;
    }
    let alpha_ext = -cos_stop.acos();

    // Bisect the stop back from the extension until the margin hits the
    // target.
    let mut lo = alpha_ext - 0.2;
    let lo_margin = dyad_margin(p, lo)?;
    if lo_margin < STOP_MARGIN_TARGET {
        return None;
    }
    let mut hi = alpha_ext;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        match dyad_margin(p, mid) {
            Some(m) if m > STOP_MARGIN_TARGET => lo = mid,
            _ => hi = mid,
        }
    }
    let stop_angle = lo;
    let closed_angle = stop_angle - TENDON_TRAVEL / p.l_ab;
    // Keep the whole travel on the monotone side of the input circle, clear
    // of the rod line on both ends; |OB| is then smallest at the closed end,
    // so one fold check covers the travel.
    if closed_angle <= -PI + 0.02 || stop_angle >= -0.01 {
        return None;
    }
    let fold = (p.l_bc - p.l_oc).abs();
    let (b_closed, _, _, _) =
        crate::linkage::solve_dyad_raw(p.ground_offset_oa, p.l_ab, p.l_bc, p.l_oc, closed_angle)?;
    if b_closed.norm() < fold + 1e-4 {
        return None;
    }

    Some(LinkageGeometry {
        ground_offset_oa: p.ground_offset_oa,
        l_ab: p.l_ab,
        l_bc: p.l_bc,
        l_cd: p.l_cd,
        l_oc: p.l_oc,
        spoke_arc: SpokeArc { radius, extent: PI },
        stop_angle,
        winch_radius: WINCH_RADIUS,
        tendon_travel_max: TENDON_TRAVEL,
        spring_k: SPRING_K,
        spring_preload: MODULE_MASS * 9.81 * p.l_ab / SPRING_K,
    })
}

/// |rim center - hub| at the retracted pose, minimized over the two arc
/// mounting sides. In this hot path the stop is approximated by the exact
/// extension angle; the margin back-off shifts it by under a microradian.
fn closed_center_norm(p: &Params, req: &DesignRequirements) -> f64 {
    let radius = req.closed_radius;
    let chord = p.l_bc + p.l_cd;
    if chord >= 2.0 * radius - 1e-5 {
        return f64::INFINITY;
    }
    let ext = p.l_bc + p.l_oc;
    let cos_stop = (ext * ext - p.ground_offset_oa * p.ground_offset_oa - p.l_ab * p.l_ab)
        / (2.0 * p.ground_offset_oa * p.l_ab);
    if !(-1.0 + 1e-9..=1.0 - 1e-9).contains(&cos_stop) {
        return f64::INFINITY;
    }
    let alpha_ext = -cos_stop.acos();
    let closed_angle = alpha_ext - TENDON_TRAVEL / p.l_ab;
    if closed_angle <= -PI + 0.02 || alpha_ext >= -0.01 {
        return f64::INFINITY;
    }
    let (b, _, gamma, _) =
        match crate::linkage::solve_dyad_raw(p.ground_offset_oa, p.l_ab, p.l_bc, p.l_oc, closed_angle) {
            Some(s) => s,
            None => return f64::INFINITY,
        };
    if b.norm() < (p.l_bc - p.l_oc).abs() + 1e-4 {
        return f64::INFINITY;
    }
    let half = chord / 2.0;
    let h = (radius * radius - half * half).sqrt();
    let x = Vec2::unit(gamma);
    let c_plus = b + x * half + x.perp() * h;
    let c_minus = b + x * half - x.perp() * h;
    c_plus.norm().min(c_minus.norm())
}

/// Fraction of the rim arc in the expanded pose that sits clear of the rigid
/// links backing it, in radians of arc extent.
fn compliant_arc_extent(expanded: &LinkagePose) -> f64 {
    let j = &expanded.joints;
    let segs = [(j.a, j.b), (Vec2::ZERO, j.c), (j.b, j.d)];
    let backing = crate::linkage::LINK_RADIUS + 1e-3;
    let n = 256;
    let mut free = 0usize;
    for i in 0..=n {
        let ang = expanded.rim.start_angle + expanded.rim.extent * i as f64 / n as f64;
        let pt = expanded.rim.point_at(ang);
        let backed = segs
            .iter()
            .any(|(p, q)| crate::geom::point_segment_distance(pt, *p, *q) < backing);
        if !backed {
            free += 1;
        }
    }
    expanded.rim.extent * free as f64 / (n + 1) as f64
}

fn evaluate(geom: &LinkageGeometry, req: &DesignRequirements, sample_index: usize, refined: bool) -> DesignCandidate {
    let mut report = Vec::new();
    let mut objective = Objective { compliant_arc: 0.0, expanded_od: 0.0 };

    let link = match Linkage::new(geom.clone()) {
        Ok(l) => l,
        Err(_) => {
            report.push(RequirementResidual {
                requirement: "assembly".into(),
                residual: f64::INFINITY,
                tolerance: 0.0,
                ok: false,
            });
            return DesignCandidate {
                geometry: geom.clone(),
                objective,
                feasible: false,
                violation_report: report,
                sample_index,
                refined,
            };
        }
    };
    let poses = match link.workspace(EVAL_SAMPLES) {
        Ok(p) => p,
        Err(_) => {
            report.push(RequirementResidual {
                requirement: "assembly".into(),
                residual: f64::INFINITY,
                tolerance: 0.0,
                ok: false,
            });
            return DesignCandidate {
                geometry: geom.clone(),
                objective,
                feasible: false,
                violation_report: report,
                sample_index,
                refined,
            };
        }
    };

    let closed = &poses[0];
    let expanded = poses.last().unwrap();

    let mut push = |requirement: &'static str, residual: f64, tolerance: f64| {
        report.push(RequirementResidual { requirement: requirement.into(), residual, tolerance, ok: residual <= tolerance });
    };

    // Requirement 1: wheeled mode forms the target circle.
    push(
        "closed_circle_radius",
        closed.rim_deviation_from_circle(req.closed_radius, 256),
        req.closed_radius_tol,
    );
    // Requirement 4: singular when fully expanded.
    push("expanded_singularity", singularity_margin(expanded), req.singularity_tolerance);
    // Requirement 5: no interference during deformation.
    let interfering = poses.iter().filter(|p| p.interfering).count();
    push("interference_free", interfering as f64, 0.0);
    // Requirement 3 envelope: maximum wheel-leg radius matches the target.
    push(
        "expanded_radius_envelope",
        (expanded.max_outer_radius() - req.expanded_radius).abs(),
        req.expanded_radius_tol,
    );
    // Requirement 2: compliant rim floor.
    let compliant = compliant_arc_extent(expanded);
    push("compliant_arc_floor", (req.min_compliant_arc - compliant).max(0.0), 0.0);
    // Transformation extent must be strictly monotone in the servo angle.
    let min_diff = poses
        .windows(2)
        .map(|w| w[1].dist_bc - w[0].dist_bc)
        .fold(f64::INFINITY, f64::min);
    push("dist_bc_monotone", (-min_diff).max(0.0), 0.0);
    // Workspace health: only the final sample is singular, the retracted
    // pose keeps a healthy margin and the margin decays monotonically over
    // the last tenth of the travel.
    let early_singular = poses[..EVAL_SAMPLES - 1].iter().filter(|p| p.singular).count();
    push("single_singular_sample", early_singular as f64, 0.0);
    push("retracted_margin_floor", (0.1 - singularity_margin(closed)).max(0.0), 0.0);
    let tail_start = EVAL_SAMPLES - EVAL_SAMPLES / 10;
    let tail_violations = poses[tail_start..]
        .windows(2)
        .filter(|w| singularity_margin(&w[1]) > singularity_margin(&w[0]))
        .count();
    push("margin_tail_monotone", tail_violations as f64, 0.0);

    objective = Objective { compliant_arc: compliant, expanded_od: expanded.dist_od };
    let feasible = report.iter().all(|r| r.ok);
    DesignCandidate {
        geometry: geom.clone(),
        objective,
        feasible,
        violation_report: report,
        sample_index,
        refined,
    }
}

/// Minimize `f` over [0, 1] with a coarse grid and golden-section polish.
fn minimize_unit<F: Fn(f64) -> f64>(f: F, grid: usize, polish: usize) -> (f64, f64) {
    let mut best_t = 0.0;
    let mut best_v = f64::INFINITY;
    for k in 0..=grid {
        let t = k as f64 / grid as f64;
        let v = f(t);
        if v < best_v {
            best_v = v;
            best_t = t;
        }
    }
    let mut lo = (best_t - 1.0 / grid as f64).max(0.0);
    let mut hi = (best_t + 1.0 / grid as f64).min(1.0);
    for _ in 0..polish {
        let m1 = lo + (hi - lo) * 0.382;
        let m2 = lo + (hi - lo) * 0.618;
        if f(m1) < f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let t = 0.5 * (lo + hi);
    (t, f(t))
}

/// Well-conditioned search coordinates. The coupler chord and the fold
/// length are tied to the closed-circle and expansion requirements, so they
/// are sampled directly and the raw link lengths are derived.
#[derive(Debug, Clone, Copy)]
struct ShapeCoords {
    /// Coupler chord length B-D.
    chord: f64,
    /// Follower length.
    l_oc: f64,
    /// Expanded rim-center offset the fold is placed for.
    center_offset: f64,
}

impl ShapeCoords {
    /// Derive the link lengths: the dyad extension is placed so the rim
    /// center sits `center_offset` from the hub at the singular stop.
    /// Ground offset and input link are solved afterwards. Returns None
    /// when the coordinates leave the bounds box.
    fn to_params(self, bounds: &ParameterBounds, req: &DesignRequirements) -> Option<Params> {
        let r = req.closed_radius;
        let half = self.chord / 2.0;
        if half >= r {
            return None;
        }
        let h = (r * r - half * half).sqrt();
        if h > self.center_offset {
            return None;
        }
        let ext = half + (self.center_offset * self.center_offset - h * h).sqrt();
        let l_bc = ext - self.l_oc;
        let l_cd = self.chord - l_bc;
        if l_bc <= 0.0 || l_cd <= 0.0 {
            return None;
        }
        let inside = |iv: Interval, v: f64| v >= iv.lo - 1e-12 && v <= iv.hi + 1e-12;
        if !inside(bounds.l_bc, l_bc) || !inside(bounds.l_cd, l_cd) || !inside(bounds.l_oc, self.l_oc) {
            return None;
        }
        Some(Params {
            ground_offset_oa: 0.0,
            l_ab: 0.0,
            l_bc,
            l_cd,
            l_oc: self.l_oc,
        })
    }

    fn from_params(p: &Params, req: &DesignRequirements) -> ShapeCoords {
        let half = (p.l_bc + p.l_cd) / 2.0;
        let r = req.closed_radius;
        let h_sq = (r * r - half * half).max(0.0);
        let ext = p.l_bc + p.l_oc;
        let center_offset = ((ext - half) * (ext - half) + h_sq).sqrt();
        ShapeCoords { chord: p.l_bc + p.l_cd, l_oc: p.l_oc, center_offset }
    }
}

/// Solve ground offset and input link so the retracted rim centers on the
/// hub (nested 1-D minimizations of the 2-D centering residual) over the
/// given brackets.
fn solve_mount_links_in(
    params: Params,
    a_iv: Interval,
    lab_iv: Interval,
    req: &DesignRequirements,
    grid: usize,
    polish: usize,
) -> Params {
    let center_for = |a: f64, l_ab: f64| -> f64 {
        let mut p = params;
        p.ground_offset_oa = a;
        p.l_ab = l_ab;
        closed_center_norm(&p, req)
    };
    let best_lab_for = |a: f64| -> (f64, f64) {
        let (t, v) = minimize_unit(|t| center_for(a, lab_iv.lerp(t)), grid, polish);
        (lab_iv.lerp(t), v)
    };
    let (ta, _) = minimize_unit(|t| best_lab_for(a_iv.lerp(t)).1, grid, polish);
    let a = a_iv.lerp(ta);
    let (l_ab, _) = best_lab_for(a);
    let mut out = params;
    out.ground_offset_oa = a;
    out.l_ab = l_ab;
    out
}

fn solve_mount_links(params: Params, bounds: &ParameterBounds, req: &DesignRequirements) -> Params {
    solve_mount_links_in(params, bounds.ground_offset_oa, bounds.l_ab, req, 12, 20)
}

fn infeasible_candidate(params: &Params, req: &DesignRequirements, index: usize, refined: bool) -> DesignCandidate {
    DesignCandidate {
        geometry: placeholder_geometry(params, req),
        objective: Objective { compliant_arc: 0.0, expanded_od: 0.0 },
        feasible: false,
        violation_report: vec![RequirementResidual {
            requirement: "assembly".into(),
            residual: f64::INFINITY,
            tolerance: 0.0,
            ok: false,
        }],
        sample_index: index,
        refined,
    }
}

fn construct_from_coords(
    coords: ShapeCoords,
    bounds: &ParameterBounds,
    req: &DesignRequirements,
    index: usize,
    refined: bool,
) -> DesignCandidate {
    let base = match coords.to_params(bounds, req) {
        Some(p) => p,
        None => {
            let fallback = Params {
                ground_offset_oa: bounds.ground_offset_oa.lo,
                l_ab: bounds.l_ab.lo,
                l_bc: bounds.l_bc.lo,
                l_cd: bounds.l_cd.lo,
                l_oc: bounds.l_oc.lo,
            };
            return infeasible_candidate(&fallback, req, index, refined);
        }
    };
    let params = solve_mount_links(base, bounds, req);
    match build_geometry(&params, req) {
        Some(geom) => evaluate(&geom, req, index, refined),
        None => infeasible_candidate(&params, req, index, refined),
    }
}

/// Map a low-discrepancy draw to shape coordinates and evaluate.
fn construct_candidate(p4: [f64; 4], bounds: &ParameterBounds, req: &DesignRequirements, index: usize) -> DesignCandidate {
    // Fully collapsed bounds pin the candidate; evaluate it directly.
    let widths = [
        bounds.ground_offset_oa.width(),
        bounds.l_ab.width(),
        bounds.l_bc.width(),
        bounds.l_cd.width(),
        bounds.l_oc.width(),
    ];
    if widths.iter().all(|w| *w < 1e-5) {
        let params = Params {
            ground_offset_oa: bounds.ground_offset_oa.lerp(0.5),
            l_ab: bounds.l_ab.lerp(0.5),
            l_bc: bounds.l_bc.lerp(0.5),
            l_cd: bounds.l_cd.lerp(0.5),
            l_oc: bounds.l_oc.lerp(0.5),
        };
        return match build_geometry(&params, req) {
            Some(geom) => evaluate(&geom, req, index, false),
            None => infeasible_candidate(&params, req, index, false),
        };
    }
    let r = req.closed_radius;
    let offset_target = req.expanded_radius - r;
    // Jitter the expansion offset inside its tolerance band; the chord can
    // then range up to the rim diameter.
    let center_offset = offset_target + (p4[2] - 0.5) * 0.004;
    let chord_min = 2.0 * (r * r - center_offset * center_offset).max(0.0).sqrt();
    let chord_max = (2.0 * r - 5e-6).min(bounds.l_bc.hi + bounds.l_cd.hi);
    if chord_min >= chord_max {
        return infeasible_candidate(
            &Params {
                ground_offset_oa: bounds.ground_offset_oa.lo,
                l_ab: bounds.l_ab.lo,
                l_bc: bounds.l_bc.lo,
                l_cd: bounds.l_cd.lo,
                l_oc: bounds.l_oc.lo,
            },
            req,
            index,
            false,
        );
    }
    let coords = ShapeCoords {
        chord: chord_min + (chord_max - chord_min) * p4[0],
        l_oc: bounds.l_oc.lerp(p4[1]),
        center_offset,
    };
    construct_from_coords(coords, bounds, req, index, false)
}

fn placeholder_geometry(p: &Params, req: &DesignRequirements) -> LinkageGeometry {
    LinkageGeometry {
        ground_offset_oa: p.ground_offset_oa,
        l_ab: p.l_ab.max(1e-3),
        l_bc: p.l_bc,
        l_cd: p.l_cd,
        l_oc: p.l_oc,
        spoke_arc: SpokeArc { radius: req.closed_radius, extent: PI },
        stop_angle: 1.0,
        winch_radius: WINCH_RADIUS,
        tendon_travel_max: TENDON_TRAVEL,
        spring_k: SPRING_K,
        spring_preload: 0.1,
    }
}

fn better_candidate(a: &DesignCandidate, b: &DesignCandidate) -> bool {
    // Lexicographic: feasibility, then less violation, then objective.
    match (a.feasible, b.feasible) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => a.violation_score() < b.violation_score(),
        (true, true) => {
            a.rank_key().1 > b.rank_key().1
                || (a.rank_key().1 == b.rank_key().1 && a.rank_key().2 > b.rank_key().2)
        }
    }
}

/// Cyclic coordinate descent in the shape coordinates, with the mount links
/// re-solved for rim centering at every trial. Violations are driven to
/// zero first, then the objective is pushed while staying feasible.
fn refine(seed: &DesignCandidate, req: &DesignRequirements) -> DesignCandidate {
    let bounds = &req.bounds;
    let g = &seed.geometry;
    let p = Params {
        ground_offset_oa: g.ground_offset_oa,
        l_ab: g.l_ab,
        l_bc: g.l_bc,
        l_cd: g.l_cd,
        l_oc: g.l_oc,
    };
    let mut coords = ShapeCoords::from_params(&p, req);
    let mut current = seed.clone();
    let mut mount = (g.ground_offset_oa, g.l_ab);

    // Trial construction re-solves the mount links in a local bracket around
    // the incumbent; the full-box solve already ran for the raw seed.
    let try_coords = |c: ShapeCoords, mount: (f64, f64)| -> Option<DesignCandidate> {
        let base = c.to_params(bounds, req)?;
        let a_iv = Interval::new(
            (mount.0 - 0.004).max(bounds.ground_offset_oa.lo),
            (mount.0 + 0.004).min(bounds.ground_offset_oa.hi),
        );
        let lab_iv = Interval::new(
            (mount.1 - 0.010).max(bounds.l_ab.lo),
            (mount.1 + 0.010).min(bounds.l_ab.hi),
        );
        let solved = solve_mount_links_in(base, a_iv, lab_iv, req, 8, 14);
        let geom = build_geometry(&solved, req)?;
        Some(evaluate(&geom, req, seed.sample_index, true))
    };

    let get = |c: &ShapeCoords, i: usize| [c.chord, c.l_oc, c.center_offset][i];
    let set = |c: &mut ShapeCoords, i: usize, v: f64| match i {
        0 => c.chord = v,
        1 => c.l_oc = v,
        _ => c.center_offset = v,
    };
    let mut steps = [2e-4_f64, bounds.l_oc.width() * 0.05, 5e-4];
    for _cycle in 0..24 {
        let mut improved = false;
        for (i, step) in steps.clone().iter().enumerate() {
            for dir in [1.0, -1.0] {
                let mut trial = coords;
                set(&mut trial, i, get(&coords, i) + dir * step);
                if let Some(cand) = try_coords(trial, mount) {
                    if better_candidate(&cand, &current) {
                        mount = (cand.geometry.ground_offset_oa, cand.geometry.l_ab);
                        current = cand;
                        coords = trial;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            for s in steps.iter_mut() {
                *s *= 0.5;
            }
            if steps.iter().all(|s| *s < 1e-9) {
                break;
            }
        }
    }
    if better_candidate(&current, seed) {
        current
    } else {
        seed.clone()
    }
}

/// Run the search. Returns all evaluated candidates (raw and refined),
/// ranked best-first by (feasible, compliant_arc, expanded_od), with ties
/// broken by total link length and stream index.
pub fn search_design(
    req: &DesignRequirements,
    budget: usize,
    seed: u64,
) -> Result<Vec<DesignCandidate>, SearchError> {
    if budget == 0 {
        return Err(SearchError::EmptyBudget);
    }
    let shifts = seed_shifts(seed);
    let mut candidates = exec::map_indexed(budget, |i| {
        construct_candidate(halton_point(i as u64, &shifts), &req.bounds, req, i)
    });

    let refine_seeds: Vec<DesignCandidate> = candidates
        .iter()
        .filter(|c| c.feasible || c.violation_score() < REFINE_SCORE_THRESHOLD)
        .cloned()
        .collect();
    let refined = exec::map_slice(&refine_seeds, |c| refine(c, req));
    candidates.extend(refined);

    candidates.sort_by(|a, b| {
        let (af, ac, ao) = a.rank_key();
        let (bf, bc, bo) = b.rank_key();
        bf.cmp(&af)
            .then(bc.total_cmp(&ac))
            .then(bo.total_cmp(&ao))
            .then(a.total_link_length().total_cmp(&b.total_link_length()))
            .then(a.sample_index.cmp(&b.sample_index))
            .then(a.refined.cmp(&b.refined))
    });

    if !candidates.iter().any(|c| c.feasible) {
        let mut near: Vec<DesignCandidate> = candidates
            .iter()
            .filter(|c| c.violation_score().is_finite())
            .cloned()
            .collect();
        near.sort_by(|a, b| a.violation_score().total_cmp(&b.violation_score()));
        near.truncate(5);
        return Err(SearchError::NoFeasibleDesign { budget, near_misses: near });
    }
    Ok(candidates)
}

/// Serialize a geometry as the canonical config text.
pub fn geometry_toml(geom: &LinkageGeometry) -> String {
    toml::to_string_pretty(geom).expect("geometry serializes")
}
