//! Command-line harness: configuration ingestion, experiment orchestration
//! and artifact emission (CSV, JSON, SVG).

mod provenance;
mod svg;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};

use swheg_core::config::{self, LoadedConfig, ScenarioMode};
use swheg_core::controller::{RobotMode, TimedInstruction};
use swheg_core::design_search::{search_design, DesignRequirements};
use swheg_core::gait::{joint_trajectory, GaitSpec, GaitType, LegId};
use swheg_core::linkage::Linkage;
use swheg_core::metrics::{
    compare_strategies, estimate_power, mean_power, smoothness, specific_resistance, PowerModel,
    StrategyPlan,
};
use swheg_core::robot::RobotConfig;
use swheg_core::sim::{
    run_scenario, run_scenario_script, stair_sweep, ShapeMode, SimWorld, SozMap,
};
use swheg_core::terrain::TerrainProfile;
use swheg_core::trace::{trace_from_csv, trace_to_csv};

#[derive(Parser)]
#[command(name = "swheg", version, about = "Wheel-leg transformable robot toolkit")]
struct Cli {
    /// Output directory for artifacts (overridden by SWHEG_OUT_DIR).
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GaitArg {
    Walk,
    Trot,
    Tripod,
}

impl GaitArg {
    fn to_type(self) -> GaitType {
        match self {
            GaitArg::Walk => GaitType::Walk,
            GaitArg::Trot => GaitType::Trot,
            GaitArg::Tripod => GaitType::Tripod,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Wheeled,
    Legged,
    ReversedLegged,
}

impl ModeArg {
    fn shape(self) -> ShapeMode {
        match self {
            ModeArg::Wheeled => ShapeMode::Wheeled,
            ModeArg::Legged => ShapeMode::Legged,
            ModeArg::ReversedLegged => ShapeMode::ReversedLegged,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Search linkage geometries and freeze the top candidate.
    DesignSearch {
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        #[arg(long)]
        seed: u64,
        /// How many ranked candidates to write out.
        #[arg(long, default_value_t = 50)]
        top: usize,
    },
    /// Servo angle versus transformation extent of a linkage.
    TransformMap {
        /// Geometry config; the built-in canonical geometry by default.
        #[arg(long)]
        geometry: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Per-leg gait trajectories and the gait diagram.
    GaitPlot {
        #[arg(long, value_enum)]
        gait: GaitArg,
        #[arg(long, default_value_t = 6)]
        legs: usize,
        #[arg(long, default_value_t = 3.0)]
        period: f64,
        #[arg(long, default_value_t = 2.0)]
        cycles: f64,
    },
    /// Run one scenario file and persist the trace.
    SimStep {
        #[arg(long)]
        scenario: PathBuf,
        /// Replayable newline-delimited JSON instruction stream.
        #[arg(long)]
        instructions: Option<PathBuf>,
    },
    /// Run a single stair-climbing scenario.
    SimStairs {
        #[arg(long, default_value = "quad_swheg")]
        robot: String,
        #[arg(long, value_enum, default_value = "legged")]
        mode: ModeArg,
        #[arg(long)]
        height: f64,
        #[arg(long)]
        depth: f64,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long, default_value_t = 40.0)]
        duration: f64,
    },
    /// Sweep stair height x depth x mode into a feasibility map.
    SweepSoz {
        #[arg(long, default_value = "quad_swheg")]
        robot: String,
        /// Grid as HxD, e.g. 20x20.
        #[arg(long, default_value = "20x20")]
        grid: String,
        /// Modes to sweep: all, or a comma list of wheeled,legged,reversed-legged.
        #[arg(long, default_value = "all")]
        modes: String,
        #[arg(long, default_value_t = 0.06)]
        max_height: f64,
        #[arg(long, default_value_t = 0.50)]
        max_depth: f64,
    },
    /// Metrics report over a persisted trace.
    Metrics {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value = "quad_swheg")]
        robot: String,
        /// Smoothness window (s).
        #[arg(long, default_value_t = 6.0)]
        window: f64,
        /// Also sweep specific resistance against speed for both presets.
        #[arg(long, default_value_t = false)]
        sr_sweep: bool,
    },
    /// Simulate the only-wheel / only-leg / integrated strategies on the
    /// mixed demo route.
    CompareStrategies {
        #[arg(long, default_value = "quad_swheg")]
        robot: String,
    },
}

fn main() {
    let cli = Cli::parse();
    let out_dir = std::env::var("SWHEG_OUT_DIR").map(PathBuf::from).unwrap_or(cli.out_dir.clone());
    if let Err(err) = run(cli.command, &out_dir) {
        let payload = serde_json::json!({ "error": format!("{err:#}") });
        eprintln!("{payload}");
        std::process::exit(1);
    }
}

fn write_artifact(path: &Path, bytes: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn preset(name: &str) -> Result<RobotConfig> {
    let cfg = RobotConfig::preset(name).ok_or_else(|| anyhow!("unknown robot preset '{name}'"))?;
    cfg.validate()?;
    Ok(cfg)
}

fn run(command: Command, out_dir: &Path) -> Result<()> {
    match command {
        Command::DesignSearch { budget, seed, top } => cmd_design_search(out_dir, budget, seed, top),
        Command::TransformMap { geometry, samples } => cmd_transform_map(out_dir, geometry, samples),
        Command::GaitPlot { gait, legs, period, cycles } => {
            cmd_gait_plot(out_dir, gait.to_type(), legs, period, cycles)
        }
        Command::SimStep { scenario, instructions } => cmd_sim_step(out_dir, &scenario, instructions),
        Command::SimStairs { robot, mode, height, depth, count, duration } => {
            cmd_sim_stairs(out_dir, &robot, mode, height, depth, count, duration)
        }
        Command::SweepSoz { robot, grid, modes, max_height, max_depth } => {
            cmd_sweep_soz(out_dir, &robot, &grid, &modes, max_height, max_depth)
        }
        Command::Metrics { trace, robot, window, sr_sweep } => {
            cmd_metrics(out_dir, &trace, &robot, window, sr_sweep)
        }
        Command::CompareStrategies { robot } => cmd_compare_strategies(out_dir, &robot),
    }
}

fn cmd_design_search(out_dir: &Path, budget: usize, seed: u64, top: usize) -> Result<()> {
    let req = DesignRequirements::default();
    let prov = provenance::line(&format!("design-search budget={budget}"), seed);
    let ranked = search_design(&req, budget, seed)?;
    let feasible = ranked.iter().filter(|c| c.feasible).count();
    println!("{feasible} feasible of {} candidates", ranked.len());

    let top_slice: Vec<_> = ranked.iter().take(top).collect();
    let json = serde_json::json!({
        "provenance": prov,
        "budget": budget,
        "seed": seed,
        "feasible": feasible,
        "candidates": top_slice,
    });
    write_artifact(&out_dir.join("design_candidates.json"), &serde_json::to_string_pretty(&json)?)?;

    let best = &ranked[0];
    let toml = format!(
        "# {prov}\n{}",
        swheg_core::design_search::geometry_toml(&best.geometry)
    );
    write_artifact(&out_dir.join("canonical_linkage.toml"), &toml)?;
    Ok(())
}

fn cmd_transform_map(out_dir: &Path, geometry: Option<PathBuf>, samples: usize) -> Result<()> {
    let link = match &geometry {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let geom = toml::from_str(&text).map_err(|e| anyhow!("geometry parse: {e}"))?;
            Linkage::new(geom)?
        }
        None => Linkage::canonical(),
    };
    let prov = provenance::line(
        &format!("transform-map geometry={geometry:?} samples={samples}"),
        0,
    );
    let poses = link.workspace(samples.max(2))?;
    let mut csv = format!("# {prov}\nangle_rad,dist_bc_m,dist_od_m,singular_flag\n");
    for pose in &poses {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            pose.servo_angle,
            pose.dist_bc,
            pose.dist_od,
            u8::from(pose.singular)
        ));
    }
    write_artifact(&out_dir.join("transform_map.csv"), &csv)?;
    Ok(())
}

fn cmd_gait_plot(out_dir: &Path, gait: GaitType, legs: usize, period: f64, cycles: f64) -> Result<()> {
    let spec = GaitSpec::with_defaults(gait, legs, period)?;
    let prov = provenance::line(&format!("gait-plot {gait:?} legs={legs} period={period}"), 0);
    let leg_ids = LegId::all(legs);
    let n = 600;
    let mut csv = format!("# {prov}\nt_s,leg,angle_rad,velocity_rad_per_s,phase_name\n");
    for i in 0..=n {
        let t = cycles * period * i as f64 / n as f64;
        for leg in &leg_ids {
            let target = joint_trajectory(&spec, *leg, t)?;
            let phase = if spec.in_stance(*leg, t) { "stance" } else { "flight" };
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                t,
                leg.label(),
                target.angle,
                target.velocity,
                phase
            ));
        }
    }
    write_artifact(&out_dir.join("gait_trajectories.csv"), &csv)?;

    // Gait diagram: stance bars per leg over the plotted cycles.
    let mut chart = svg::Chart::new(760.0, 80.0 + 30.0 * legs as f64);
    chart.axes("time / s", "leg");
    let t_max = cycles * period;
    for (row, leg) in leg_ids.iter().enumerate() {
        let y = 40.0 + 30.0 * row as f64;
        chart.label(10.0, y + 12.0, leg.label(), "black");
        let mut t = 0.0;
        let step = period / 400.0;
        let mut stance_start: Option<f64> = None;
        while t <= t_max + step {
            let in_stance = t <= t_max && spec.in_stance(*leg, t);
            match (in_stance, stance_start) {
                (true, None) => stance_start = Some(t),
                (false, Some(s)) => {
                    let x0 = 48.0 + s / t_max * (760.0 - 96.0);
                    let x1 = 48.0 + t.min(t_max) / t_max * (760.0 - 96.0);
                    chart.rect(x0, y, x1 - x0, 16.0, svg::SERIES_COLORS[row % 6]);
                    stance_start = None;
                }
                _ => {}
            }
            t += step;
        }
    }
    chart.tick_labels_x(0.0, t_max, " s");
    write_artifact(&out_dir.join("gait_diagram.svg"), &chart.finish(&format!("{gait:?} gait diagram")))?;
    Ok(())
}

fn scenario_initial_mode(mode: &ScenarioMode, robot: &RobotConfig) -> Result<RobotMode> {
    Ok(match mode {
        ScenarioMode::Wheeled { v } => RobotMode::Wheeled { v: *v, w: 0.0 },
        ScenarioMode::Legged { gait, period_tc } => RobotMode::Legged {
            spec: GaitSpec::with_defaults(gait.to_gait_type(), robot.n_legs, *period_tc)?,
            clock: 0.0,
        },
        ScenarioMode::Synchronized { speed } | ScenarioMode::ReversedLegged { speed } => {
            RobotMode::Synchronized { speed: *speed, clock: 0.0 }
        }
    })
}

fn cmd_sim_step(out_dir: &Path, scenario_path: &Path, instructions: Option<PathBuf>) -> Result<()> {
    let loaded = config::load_config(scenario_path)?;
    let LoadedConfig::Scenario(scenario) = loaded else {
        bail!("{} is a robot config, not a scenario", scenario_path.display());
    };
    let robot = scenario.robot.resolve()?;
    let out_dir = scenario
        .output_dir
        .as_ref()
        .map(PathBuf::from)
        .unwrap_or_else(|| out_dir.to_path_buf());

    let mut world = SimWorld::new(robot.clone(), scenario.terrain, scenario.mode.shape_mode())?;
    world.place_at(scenario.start_x.unwrap_or(0.0))?;
    let mode = scenario_initial_mode(&scenario.mode, &robot)?;

    let canonical = toml::to_string(&*scenario).unwrap_or_default();
    let prov = provenance::line(&canonical, scenario.seed);

    let (trace, rejected) = match instructions {
        Some(path) => {
            let text = std::fs::read_to_string(&path)?;
            let script: Vec<TimedInstruction> = text
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(serde_json::from_str)
                .collect::<std::result::Result<_, _>>()
                .with_context(|| format!("parsing {}", path.display()))?;
            run_scenario_script(world, mode, script, scenario.duration, scenario.dt)?
        }
        None => (run_scenario(world, mode, scenario.duration, scenario.dt)?, vec![]),
    };
    for r in &rejected {
        eprintln!("instruction rejected: {r}");
    }
    println!(
        "ran {:.1}s: final x {:.3} m, stuck {}",
        trace.duration(),
        trace.final_x(),
        trace.stuck
    );
    write_artifact(&out_dir.join("trace.csv"), &trace_to_csv(&trace, &prov))?;
    Ok(())
}

fn cmd_sim_stairs(
    out_dir: &Path,
    robot: &str,
    mode: ModeArg,
    height: f64,
    depth: f64,
    count: usize,
    duration: f64,
) -> Result<()> {
    let cfg = preset(robot)?;
    let terrain = TerrainProfile::stairs(height, depth, count);
    terrain.validate()?;
    let mut world = SimWorld::new(cfg.clone(), terrain, mode.shape())?;
    world.place_at(-3.0 * cfg.wheel_radius - cfg.body_length / 2.0)?;
    let sim_mode = match mode {
        ModeArg::Wheeled => RobotMode::Wheeled { v: 0.25, w: 0.0 },
        _ => RobotMode::Synchronized { speed: 2.0, clock: 0.0 },
    };
    let prov = provenance::line(
        &format!("sim-stairs robot={robot} mode={:?} h={height} d={depth} n={count}", mode.shape()),
        0,
    );
    let trace = run_scenario(world, sim_mode, duration, 0.002)?;
    println!(
        "stairs h={height} d={depth}: final x {:.3} m, stuck {}",
        trace.final_x(),
        trace.stuck
    );
    write_artifact(&out_dir.join("stairs_trace.csv"), &trace_to_csv(&trace, &prov))?;
    Ok(())
}

fn parse_modes(spec: &str) -> Result<Vec<ShapeMode>> {
    if spec == "all" {
        return Ok(vec![ShapeMode::Wheeled, ShapeMode::Legged, ShapeMode::ReversedLegged]);
    }
    spec.split(',')
        .map(|m| match m.trim() {
            "wheeled" => Ok(ShapeMode::Wheeled),
            "legged" => Ok(ShapeMode::Legged),
            "reversed-legged" | "reversed_legged" => Ok(ShapeMode::ReversedLegged),
            other => Err(anyhow!("unknown mode '{other}'")),
        })
        .collect()
}

fn cmd_sweep_soz(
    out_dir: &Path,
    robot: &str,
    grid: &str,
    modes: &str,
    max_height: f64,
    max_depth: f64,
) -> Result<()> {
    let cfg = preset(robot)?;
    let (nh, nd) = grid
        .split_once('x')
        .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)))
        .ok_or_else(|| anyhow!("grid must look like 20x20"))?;
    if nh == 0 || nd == 0 {
        bail!("grid must be non-empty");
    }
    let modes = parse_modes(modes)?;
    let heights: Vec<f64> = (1..=nh).map(|i| max_height * i as f64 / nh as f64).collect();
    let depths: Vec<f64> = (1..=nd).map(|i| max_depth * i as f64 / nd as f64).collect();
    let prov = provenance::line(
        &format!("sweep-soz robot={robot} grid={grid} hmax={max_height} dmax={max_depth}"),
        0,
    );
    let map = stair_sweep(&cfg, &heights, &depths, &modes);

    let mut csv = format!("# {prov}\nmode,height_m,depth_m,passes\n");
    for (mi, mode) in map.modes.iter().enumerate() {
        for (hi, h) in map.heights.iter().enumerate() {
            for (di, d) in map.depths.iter().enumerate() {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    mode.label(),
                    h,
                    d,
                    u8::from(map.passes(mi, hi, di))
                ));
            }
        }
    }
    write_artifact(&out_dir.join("soz_map.csv"), &csv)?;
    write_artifact(&out_dir.join("soz_map.svg"), &soz_svg(&map))?;
    Ok(())
}

fn soz_svg(map: &SozMap) -> String {
    let panel_w = 240.0;
    let height = 300.0;
    let mut chart = svg::Chart::new(panel_w * map.modes.len() as f64 + 40.0, height);
    for (mi, mode) in map.modes.iter().enumerate() {
        let x0 = 20.0 + panel_w * mi as f64;
        chart.label(x0 + panel_w / 2.0 - 40.0, 36.0, mode.label(), "black");
        let cell_w = (panel_w - 60.0) / map.depths.len() as f64;
        let cell_h = (height - 100.0) / map.heights.len() as f64;
        for (hi, _) in map.heights.iter().enumerate() {
            for (di, _) in map.depths.iter().enumerate() {
                let color = if map.passes(mi, hi, di) { "#2ca02c" } else { "#d62728" };
                chart.rect(
                    x0 + 40.0 + cell_w * di as f64,
                    height - 50.0 - cell_h * (hi + 1) as f64,
                    cell_w.max(1.0) - 0.5,
                    cell_h.max(1.0) - 0.5,
                    color,
                );
            }
        }
        chart.label(x0 + 40.0, height - 28.0, "depth ->", "black");
        chart.label(x0 + 2.0, height - 60.0, "h ^", "black");
    }
    chart.finish("stair feasibility by mode (green passes)")
}

fn cmd_metrics(out_dir: &Path, trace_path: &Path, robot: &str, window: f64, sr_sweep: bool) -> Result<()> {
    let cfg = preset(robot)?;
    let text = std::fs::read_to_string(trace_path)?;
    let trace = trace_from_csv(&text)?;
    let model = PowerModel::default();
    let terrain = TerrainProfile::flat();
    let smooth = smoothness(&trace, 1000.0, window)?;
    let power = estimate_power(&trace, &model, &cfg, &terrain)?;
    let p_mean = mean_power(&power);
    let v = trace.average_speed();
    let sr = if v.abs() > 1e-9 {
        Some(specific_resistance(p_mean, cfg.total_mass, v.abs())?)
    } else {
        None
    };
    let prov = provenance::line(&format!("metrics trace={}", trace_path.display()), 0);
    let report = serde_json::json!({
        "provenance": prov,
        "mode": trace.mode_label,
        "window_s": window,
        "mean_smoothness_j": smooth.mean,
        "mean_power_w": p_mean,
        "average_speed_m_per_s": v,
        "specific_resistance": sr,
        "stuck": trace.stuck,
    });
    write_artifact(&out_dir.join("metrics.json"), &serde_json::to_string_pretty(&report)?)?;

    if sr_sweep {
        let (csv, svg_text) = sr_sweep_artifacts(&model)?;
        write_artifact(&out_dir.join("sr_vs_speed.csv"), &csv)?;
        write_artifact(&out_dir.join("sr_vs_speed.svg"), &svg_text)?;
    }
    Ok(())
}

/// Specific resistance against forward speed for both presets in wheeled
/// mode plus one legged gait each, from flat-ground runs.
fn sr_sweep_artifacts(model: &PowerModel) -> Result<(String, String)> {
    let prov = provenance::line("sr-sweep", 0);
    let mut csv = format!("# {prov}\nrobot,mode,v_m_per_s,power_w,specific_resistance\n");
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for cfg in [RobotConfig::quad_swheg(), RobotConfig::hex_swheg()] {
        let mut wheeled = Vec::new();
        for i in 1..=8 {
            let v_cmd = 0.25 * i as f64;
            let trace = swheg_core::metrics::flat_trace(
                &cfg,
                RobotMode::Wheeled { v: v_cmd, w: 0.0 },
                ShapeMode::Wheeled,
                4.0,
            )?;
            let p = mean_power(&estimate_power(&trace, model, &cfg, &TerrainProfile::flat())?);
            let v = trace.average_speed();
            let sr = specific_resistance(p, cfg.total_mass, v)?;
            csv.push_str(&format!("{},wheeled,{v},{p},{sr}\n", cfg.name));
            wheeled.push((v, sr));
        }
        series.push((format!("{} wheeled", cfg.name), wheeled));

        let gait = GaitType::default_for(cfg.n_legs);
        let mut legged = Vec::new();
        for period in [5.0, 4.0, 3.0, 2.5, 2.0] {
            let spec = GaitSpec::with_defaults(gait, cfg.n_legs, period)?;
            let trace = swheg_core::metrics::flat_trace(
                &cfg,
                RobotMode::Legged { spec, clock: 0.0 },
                ShapeMode::Legged,
                3.0 * period,
            )?;
            let p = mean_power(&estimate_power(&trace, model, &cfg, &TerrainProfile::flat())?);
            let v = trace.average_speed();
            let sr = specific_resistance(p, cfg.total_mass, v)?;
            csv.push_str(&format!("{},{:?},{v},{p},{sr}\n", cfg.name, gait));
            legged.push((v, sr));
        }
        series.push((format!("{} {gait:?}", cfg.name), legged));
    }

    let mut chart = svg::Chart::new(720.0, 420.0);
    chart.axes("forward speed / m s^-1", "specific resistance");
    let x_hi = series
        .iter()
        .flat_map(|(_, pts)| pts.iter().map(|(v, _)| *v))
        .fold(0.0_f64, f64::max);
    let y_hi = series
        .iter()
        .flat_map(|(_, pts)| pts.iter().map(|(_, sr)| *sr))
        .fold(0.0_f64, f64::max);
    for (i, (name, pts)) in series.iter().enumerate() {
        let mut sorted = pts.clone();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        chart.polyline(&sorted, (0.0, x_hi, 0.0, y_hi), svg::SERIES_COLORS[i % 6]);
        chart.label(560.0, 48.0 + 16.0 * i as f64, name, svg::SERIES_COLORS[i % 6]);
    }
    chart.tick_labels_x(0.0, x_hi, "");
    chart.tick_labels_y(0.0, y_hi, "");
    Ok((csv, chart.finish("specific resistance vs speed")))
}

fn cmd_compare_strategies(out_dir: &Path, robot: &str) -> Result<()> {
    let cfg = preset(robot)?;
    let plan = StrategyPlan::mixed_demo();
    let model = PowerModel::default();
    let prov = provenance::line(&format!("compare-strategies robot={robot}"), 0);
    let outcomes = compare_strategies(&plan, &cfg, &model)?;
    for o in &outcomes {
        println!(
            "{:>11}: completed={} time {:.1} s energy {:.1} J",
            o.strategy.label(),
            o.completed,
            o.time_s,
            o.energy_j
        );
    }
    let json = serde_json::json!({
        "provenance": prov,
        "robot": cfg.name,
        "route": plan.route,
        "outcomes": outcomes,
    });
    write_artifact(&out_dir.join("strategy_comparison.json"), &serde_json::to_string_pretty(&json)?)?;

    // Replayable instruction stream matching the integrated strategy.
    let mut lines = Vec::new();
    lines.push(serde_json::json!({"timestamp": 0.0, "op": "set_twist", "args": {"v": plan.wheel_speed, "w": 0.0}}));
    lines.push(serde_json::json!({"timestamp": 8.0, "op": "set_twist", "args": {"v": 0.0, "w": 0.0}}));
    lines.push(serde_json::json!({"timestamp": 8.1, "op": "set_mode", "args": {"mode": "Legged"}}));
    let ndjson: Vec<String> = lines.iter().map(|l| l.to_string()).collect();
    write_artifact(&out_dir.join("integrated_instructions.ndjson"), &(ndjson.join("\n") + "\n"))?;
    Ok(())
}
