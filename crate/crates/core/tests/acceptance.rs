//! Acceptance suite: one test per criterion, each printing a PASS line and
//! enforcing its runtime budget. Run with
//! `cargo test --release --test acceptance -- --nocapture`.

use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::Instant;

/// The criteria run one at a time so their runtime budgets are meaningful
/// on small machines.
fn exclusive() -> MutexGuard<'static, ()> {
    static LOCK: OnceLock<Mutex<()>> = OnceLock::new();
    LOCK.get_or_init(|| Mutex::new(())).lock().unwrap_or_else(|e| e.into_inner())
}

use swheg_core::controller::RobotMode;
use swheg_core::design_search::{search_design, DesignRequirements};
use swheg_core::drive::wheel_speeds;
use swheg_core::gait::{
    gait_from_twist, joint_trajectory, predict_twist, ContactRegion, GaitSpec, GaitType, LegId,
    LegPosition, Side,
};
use swheg_core::geom::{SplitMix64, Vec2, TAU};
use swheg_core::linkage::{random_ground_forces, singularity_margin, Linkage};
use swheg_core::metrics::{
    compare_strategies, estimate_power, mean_power, smoothness, specific_resistance, PowerModel,
    Strategy, StrategyPlan,
};
use swheg_core::robot::{RobotConfig, GRAVITY};
use swheg_core::sim::{
    run_scenario, stair_sweep, step_threshold, wheeled_step_oracle, ShapeMode, SimWorld,
};
use swheg_core::terrain::TerrainProfile;

fn report(n: usize, what: &str, elapsed: f64, budget: f64) {
    println!("ACCEPTANCE {n} PASS ({elapsed:.2} s / {budget:.0} s budget): {what}");
    assert!(elapsed < budget, "criterion {n} exceeded its {budget} s runtime budget: {elapsed:.2} s");
}

#[test]
fn criterion_01_transformation_map() {
    let _guard = exclusive();
    let start = Instant::now();
    let link = Linkage::canonical();
    let poses = link.workspace(200).expect("workspace over the full travel");
    // Strictly monotone and smooth expansion.
    for w in poses.windows(2) {
        let step = w[1].dist_bc - w[0].dist_bc;
        assert!(step > 0.0, "dist_bc must be strictly monotone");
        assert!(step < 1e-3, "dist_bc must vary smoothly, step {step}");
    }
    // Ideal round trip: expand then contract, bitwise equal poses.
    let max = link.geometry().servo_travel();
    for i in (0..=50).rev() {
        let servo = max * i as f64 / 50.0;
        let again = link.fk_transform(servo).unwrap();
        assert_eq!(again, link.fk_transform(servo).unwrap(), "zero hysteresis");
    }
    report(1, "transformation map monotone, smooth, zero hysteresis", start.elapsed().as_secs_f64(), 1.0);
}

#[test]
fn criterion_02_singular_force_independence() {
    let _guard = exclusive();
    let start = Instant::now();
    let link = Linkage::canonical();
    let pose = link.fk_transform(link.geometry().servo_travel()).unwrap();
    assert!(pose.singular);
    let forces = random_ground_forces(100, 5.0 * GRAVITY, 4242);
    let tensions: Vec<f64> = forces
        .iter()
        .map(|f| link.required_tendon_tension(&pose, *f).unwrap())
        .collect();
    let min = tensions.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = tensions.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = (max - min) / max.abs().max(1e-30);
    assert!(spread < 1e-9, "tension spread {spread}");
    report(2, "tendon tension at singularity independent of 100 random ground forces", start.elapsed().as_secs_f64(), 1.0);
}

#[test]
#[cfg_attr(debug_assertions, ignore = "runtime budgets assume a release build")]
fn criterion_03_design_search() {
    let _guard = exclusive();
    let start = Instant::now();
    let req = DesignRequirements::default();
    let ranked = search_design(&req, 10_000, 42).expect("search finds feasible designs");
    let feasible = ranked.iter().filter(|c| c.feasible).count();
    assert!(feasible >= 1);
    let top = &ranked[0];
    assert!(top.feasible);
    let link = Linkage::new(top.geometry.clone()).unwrap();
    let closed = link.fk_transform(0.0).unwrap();
    assert!(closed.rim_deviation_from_circle(0.12, 512) <= 1e-3, "closed rim within 1 mm of the 0.12 m circle");
    let expanded = link.fk_transform(link.geometry().servo_travel()).unwrap();
    assert!(singularity_margin(&expanded) < 1e-3, "singular at full expansion");
    report(
        3,
        &format!("design search: {feasible} feasible candidates, top meets all requirements"),
        start.elapsed().as_secs_f64(),
        60.0,
    );
}

#[test]
fn criterion_04_drive_identities() {
    let _guard = exclusive();
    let start = Instant::now();
    let p = RobotConfig::quad_swheg().chassis();
    let mut rng = SplitMix64::new(99);
    for _ in 0..1000 {
        let v = rng.next_range(-3.0, 3.0);
        let w = rng.next_range(-6.0, 6.0);
        let (l, r) = wheel_speeds(v, w, &p);
        assert!(((r - l) * p.wheel_radius * p.reduction_nt - w * p.track_d).abs() < 1e-12);
    }
    let (l, r) = wheel_speeds(0.0, 2.0, &p);
    assert_eq!(l, -r, "zero forward speed mirrors the sides");
    report(4, "differential identities to 1e-12 over 1000 random twists", start.elapsed().as_secs_f64(), 10.0);
}

#[test]
fn criterion_05_gait_properties() {
    let _guard = exclusive();
    let start = Instant::now();
    // Periodicity: one extra turn per period, to floating round-off.
    let spec = GaitSpec::with_defaults(GaitType::Tripod, 6, 3.0).unwrap();
    let mut rng = SplitMix64::new(5);
    for leg in LegId::all(6) {
        for _ in 0..40 {
            let t = rng.next_range(0.0, 60.0);
            let a = joint_trajectory(&spec, leg, t).unwrap().angle;
            let b = joint_trajectory(&spec, leg, t + spec.period_tc).unwrap().angle;
            assert!((b - a - TAU).abs() < 1e-9);
        }
    }
    // Tripod coverage for duty >= 1/2.
    for duty in [0.5, 0.65] {
        let spec = GaitSpec::new(GaitType::Tripod, 6, 3.0, duty, 0.0, ContactRegion::canonical()).unwrap();
        let legs = LegId::all(6);
        for i in 0..1500 {
            let t = spec.period_tc * i as f64 / 1500.0;
            let a = [legs[0], legs[2], legs[4]].iter().all(|l| spec.in_stance(*l, t));
            let b = [legs[1], legs[3], legs[5]].iter().all(|l| spec.in_stance(*l, t));
            assert!(a || b, "a full tripod must stay grounded at duty {duty}");
        }
    }
    // Twist round trip exact in v.
    let chassis = RobotConfig::hex_swheg().chassis();
    let region = ContactRegion::canonical();
    for (v, w) in [(0.08, 0.0), (0.15, 0.1), (0.3, -0.15)] {
        let spec = gait_from_twist(v, w, GaitType::Tripod, 6, &chassis, region).unwrap();
        let twist = predict_twist(&spec, &chassis);
        assert!((twist.v_forward - v).abs() < 1e-12, "round trip exact in v");
    }
    // Flat-ground sim speed within 10% of the timing model for five specs.
    let hex = RobotConfig::hex_swheg();
    for period in [2.0, 2.5, 3.0, 4.0, 5.0] {
        let spec = GaitSpec::with_defaults(GaitType::Tripod, 6, period).unwrap();
        let predicted = predict_twist(&spec, &hex.chassis()).v_forward;
        let world = SimWorld::new(hex.clone(), TerrainProfile::flat(), ShapeMode::Legged).unwrap();
        let trace = run_scenario(world, RobotMode::Legged { spec, clock: 0.0 }, 3.0 * period, 0.002).unwrap();
        let v = trace.average_speed();
        let rel = (v - predicted).abs() / predicted;
        assert!(rel < 0.10, "period {period}: sim {v:.4} vs model {predicted:.4} ({rel:.3})");
    }
    report(5, "gait periodicity, tripod coverage, twist round trip, sim speed within 10%", start.elapsed().as_secs_f64(), 120.0);
}

#[test]
#[cfg_attr(debug_assertions, ignore = "runtime budgets assume a release build")]
fn criterion_06_step_thresholds() {
    let _guard = exclusive();
    let start = Instant::now();
    let cfg = RobotConfig::quad_swheg();
    let wheeled = step_threshold(&cfg, ShapeMode::Wheeled, 0.08).unwrap();
    let legged = step_threshold(&cfg, ShapeMode::Legged, 0.15).unwrap();
    let reversed = step_threshold(&cfg, ShapeMode::ReversedLegged, 0.30).unwrap();
    assert!(
        wheeled < legged && legged < reversed,
        "ordering wheeled {wheeled:.4} < legged {legged:.4} < reversed {reversed:.4}"
    );
    let oracle = wheeled_step_oracle(cfg.wheel_radius, cfg.total_mass * GRAVITY / 4.0, cfg.drive_torque_limit, 0.8);
    assert!(
        (wheeled - oracle).abs() <= 1e-3,
        "wheeled threshold {wheeled:.4} vs oracle {oracle:.4}"
    );
    report(
        6,
        &format!("thresholds {:.1} < {:.1} < {:.1} mm, wheeled matches the static oracle", wheeled * 1e3, legged * 1e3, reversed * 1e3),
        start.elapsed().as_secs_f64(),
        120.0,
    );
}

#[test]
#[cfg_attr(debug_assertions, ignore = "runtime budgets assume a release build")]
fn criterion_07_soz_sweep() {
    let _guard = exclusive();
    let start = Instant::now();
    let cfg = RobotConfig::quad_swheg();
    let heights: Vec<f64> = (1..=20).map(|i| 0.06 * i as f64 / 20.0).collect();
    // Tread depths from half a wheel diameter up; much smaller treads put
    // several risers inside one wheel contact, which is out of scope.
    let depths: Vec<f64> = (0..20).map(|i| 0.125 + 0.025 * i as f64).collect();
    let modes = [ShapeMode::Wheeled, ShapeMode::Legged, ShapeMode::ReversedLegged];
    let map = stair_sweep(&cfg, &heights, &depths, &modes);
    // Fixed depth: lowering the height never flips pass into fail.
    for mi in 0..modes.len() {
        for di in 0..depths.len() {
            let mut seen_fail = false;
            for hi in 0..heights.len() {
                let pass = map.passes(mi, hi, di);
                if seen_fail {
                    assert!(!pass, "mode {mi} depth {di}: pass above a failing height");
                }
                if !pass {
                    seen_fail = true;
                }
            }
        }
    }
    // Legged feasible region contains the wheeled region.
    let mut wheeled_pass = 0;
    for hi in 0..heights.len() {
        for di in 0..depths.len() {
            if map.passes(0, hi, di) {
                wheeled_pass += 1;
                assert!(map.passes(1, hi, di), "legged must cover wheeled cell ({hi}, {di})");
            }
        }
    }
    assert!(wheeled_pass > 0, "sweep must contain passable wheeled cells");
    report(7, "20x20x3 stair sweep: height-monotone columns, legged covers wheeled", start.elapsed().as_secs_f64(), 300.0);
}

#[test]
fn criterion_08_smoothness_ordering() {
    let _guard = exclusive();
    let start = Instant::now();
    let window = 6.0;
    let ks = 1000.0;
    let quad = RobotConfig::quad_swheg();
    let hex = RobotConfig::hex_swheg();

    let wheeled_trace = swheg_core::metrics::flat_trace(&quad, RobotMode::Wheeled { v: 0.4, w: 0.0 }, ShapeMode::Wheeled, window + 1.0).unwrap();
    let j_wheeled = smoothness(&wheeled_trace, ks, window).unwrap().mean;

    let tripod = GaitSpec::with_defaults(GaitType::Tripod, 6, 3.0).unwrap();
    let hex_trace = swheg_core::metrics::flat_trace(&hex, RobotMode::Legged { spec: tripod, clock: 0.0 }, ShapeMode::Legged, window + 1.0).unwrap();
    let j_tripod = smoothness(&hex_trace, ks, window).unwrap().mean;

    let trot = GaitSpec::with_defaults(GaitType::Trot, 4, 3.0).unwrap();
    let trot_trace = swheg_core::metrics::flat_trace(&quad, RobotMode::Legged { spec: trot, clock: 0.0 }, ShapeMode::Legged, window + 1.0).unwrap();
    let j_trot = smoothness(&trot_trace, ks, window).unwrap().mean;

    let walk = GaitSpec::with_defaults(GaitType::Walk, 4, 3.0).unwrap();
    let walk_trace = swheg_core::metrics::flat_trace(&quad, RobotMode::Legged { spec: walk, clock: 0.0 }, ShapeMode::Legged, window + 1.0).unwrap();
    let j_walk = smoothness(&walk_trace, ks, window).unwrap().mean;

    assert!(j_tripod < j_trot, "hex tripod {j_tripod:.4} < quad trot {j_trot:.4}");
    assert!(j_tripod < j_walk, "hex tripod {j_tripod:.4} < quad walk {j_walk:.4}");
    assert!(j_wheeled <= j_tripod, "wheeled {j_wheeled:.4} <= hex tripod {j_tripod:.4}");
    println!(
        "ACCEPTANCE 8 partial: J wheeled {j_wheeled:.4} <= hex tripod {j_tripod:.4} < quad trot {j_trot:.4} / walk {j_walk:.4} ({:.2} s)",
        start.elapsed().as_secs_f64()
    );
    // The strict lower bound cannot hold in this model: a statically stable
    // tripod on exact flat ground keeps the roll-locked quasi-static body
    // level, so its pitch cost is identically zero, the same as wheeled
    // mode. The measured nonzero tripod pitch in hardware is a dynamic,
    // roll-coupled effect outside the quasi-static scope. Recorded in the
    // project decisions ledger; asserted faithfully here.
    assert!(
        j_wheeled < j_tripod,
        "strict J(wheeled) {j_wheeled:.6} < J(hex tripod) {j_tripod:.6} is unattainable: \
         both are exactly zero under roll-locked quasi-statics on flat ground"
    );
    report(
        8,
        &format!("smoothness ordering J: wheeled {j_wheeled:.3} < hex tripod {j_tripod:.3} < quad trot {j_trot:.3} / walk {j_walk:.3}"),
        start.elapsed().as_secs_f64(),
        120.0,
    );
}

#[test]
fn criterion_09_specific_resistance_properties() {
    let _guard = exclusive();
    let start = Instant::now();
    // Strictly decreasing in speed under the affine power model.
    let mut last = f64::INFINITY;
    for i in 1..=10 {
        let v = 0.05 * i as f64;
        let sr = specific_resistance(6.0 + 40.0 * v, 8.406, v).unwrap();
        assert!(sr < last);
        last = sr;
    }
    // Homogeneity: joint scaling of power and mass.
    let base = specific_resistance(55.0, 8.406, 0.9).unwrap();
    for c in [0.1, 3.0, 42.0] {
        assert!((specific_resistance(55.0 * c, 8.406 * c, 0.9).unwrap() - base).abs() < 1e-12);
    }
    // Hexapod wheeled SR above quadrupedal wheeled SR under the model.
    let model = PowerModel::default();
    let mut srs = Vec::new();
    for cfg in [RobotConfig::quad_swheg(), RobotConfig::hex_swheg()] {
        let trace = swheg_core::metrics::flat_trace(&cfg, RobotMode::Wheeled { v: 1.0, w: 0.0 }, ShapeMode::Wheeled, 4.0).unwrap();
        let p = mean_power(&estimate_power(&trace, &model, &cfg, &TerrainProfile::flat()).unwrap());
        srs.push(specific_resistance(p, cfg.total_mass, trace.average_speed()).unwrap());
    }
    assert!(srs[1] > srs[0], "hex wheeled SR {:.4} must exceed quad {:.4}", srs[1], srs[0]);
    report(
        9,
        &format!("SR decreasing in v, scale-invariant, hex wheeled {:.3} > quad wheeled {:.3}", srs[1], srs[0]),
        start.elapsed().as_secs_f64(),
        60.0,
    );
}

#[test]
fn criterion_10_strategy_comparison() {
    let _guard = exclusive();
    let start = Instant::now();
    let cfg = RobotConfig::quad_swheg();
    let outcomes = compare_strategies(&StrategyPlan::mixed_demo(), &cfg, &PowerModel::default()).unwrap();
    let by = |s: Strategy| outcomes.iter().find(|o| o.strategy == s).unwrap();
    let only_wheel = by(Strategy::OnlyWheel);
    let only_leg = by(Strategy::OnlyLeg);
    let integrated = by(Strategy::Integrated);
    assert!(!only_wheel.completed, "only-wheel must fail at the step segment");
    assert!(only_wheel.failed_segment.is_some());
    assert!(only_leg.completed && integrated.completed);
    assert!(
        integrated.time_s < only_leg.time_s && integrated.energy_j < only_leg.energy_j,
        "integrated ({:.1} s, {:.1} J) must dominate only-leg ({:.1} s, {:.1} J)",
        integrated.time_s,
        integrated.energy_j,
        only_leg.time_s,
        only_leg.energy_j
    );
    report(
        10,
        &format!(
            "strategies: only-wheel fails, integrated {:.1} s / {:.1} J dominates only-leg {:.1} s / {:.1} J",
            integrated.time_s, integrated.energy_j, only_leg.time_s, only_leg.energy_j
        ),
        start.elapsed().as_secs_f64(),
        180.0,
    );
}
