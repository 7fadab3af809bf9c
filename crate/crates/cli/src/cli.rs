//! Command-line surface.
//!
//! Exit codes: 0 on success, 1 when a command fails, 2 on usage errors.

use std::ffi::OsString;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use contact_grasp_core::dynamics::TaskState;
use contact_grasp_core::executive::{
    execute_in_sim, plan, run_repetitions, sample_pregrasp, Clock, ExecutiveConfig,
};
use contact_grasp_core::sdf::bake_grid;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::artifacts::{ControlsFile, PathFile, TimingsFile};
use crate::presets;
use crate::report::{Aggregate, TrialReportDto, TrialTimings};
use crate::scene_file::{load_scene, LoadedScene, SceneFile, BAKE_PADDING};
use crate::sdf_file::write_grid_file;
use crate::trace::{write_dense, TraceFile};

pub const OUT_ENV: &str = "CONTACT_GRASP_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "contact-grasp",
    version,
    about = "Contact-exploiting grasp planning and simulation"
)]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = OUT_ENV, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search, refine and synthesize controls; writes path, controls and timings.
    Plan {
        scene: String,
        /// Seed for pre-grasp sampling when the scene has no start pose.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Execute a controls file on the scene and write the trace.
    Simulate {
        scene: String,
        controls: PathBuf,
        /// Record every integration substep in a binary trace.
        #[arg(long)]
        dense: bool,
    },
    /// Run the repetition loop for consecutive seeds.
    Trial {
        scene: String,
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// First seed; defaults to the scene's executive seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Multiplier on the scene's perception noise.
        #[arg(long)]
        noise: Option<f64>,
    },
    /// Bake one object's shapes into a binary SDF grid.
    BakeSdf {
        scene: String,
        object: String,
        /// Grid resolution in meters; defaults to the object's bake setting or 5 mm.
        #[arg(long)]
        resolution: Option<f64>,
    },
}

struct WallClock(Instant);

impl Clock for WallClock {
    fn now(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Scene from a file path, or from a preset given as `name` or `presets/name`.
pub fn resolve_scene(arg: &str) -> Result<LoadedScene> {
    let path = Path::new(arg);
    if path.is_file() {
        return load_scene(path).with_context(|| format!("loading {arg}"));
    }
    let name = arg.trim_start_matches("presets/").trim_end_matches(".toml");
    match presets::preset_text(name) {
        Some(text) => {
            let file = SceneFile::parse(text, Path::new(arg))?;
            Ok(file.load(Path::new("."))?)
        }
        None => bail!("no scene file or preset named `{arg}`"),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn start_pose(loaded: &LoadedScene, seed: Option<u64>) -> Result<contact_grasp_core::Pose> {
    if let Some(s) = loaded.start {
        return Ok(s);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(loaded.executive.seed));
    Ok(sample_pregrasp(
        &loaded.scene,
        &loaded.gripper,
        &loaded.scene.grasp_pose_world(),
        &loaded.executive,
        loaded.planner.refine.margin,
        &mut rng,
    )?)
}

fn cmd_plan(out: &Path, scene: &str, seed: Option<u64>) -> Result<()> {
    let loaded = resolve_scene(scene)?;
    let start = start_pose(&loaded, seed)?;
    let clock = WallClock(Instant::now());
    let p = plan(
        &loaded.scene,
        &loaded.gripper,
        &start,
        &loaded.planner,
        &clock,
    )?;
    write_json(&out.join("path.json"), &PathFile::new(&p))?;
    write_json(&out.join("controls.json"), &ControlsFile::new(&p))?;
    write_json(
        &out.join("plan_timings.json"),
        &TimingsFile::from(&p.timings),
    )?;
    println!(
        "planned {} waypoints (delta_g {:.3} m after {} relaxations) in {:.3} s",
        p.path().len(),
        p.positional.delta_g,
        p.positional.relaxations,
        p.timings.total()
    );
    Ok(())
}

fn cmd_simulate(out: &Path, scene: &str, controls: &Path, dense: bool) -> Result<()> {
    let loaded = resolve_scene(scene)?;
    let text =
        fs::read_to_string(controls).with_context(|| format!("reading {}", controls.display()))?;
    let file: ControlsFile =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", controls.display()))?;
    let (start, seq, planned) = file.controls()?;
    let ex = execute_in_sim(
        &loaded.scene,
        &loaded.gripper,
        &seq,
        &planned,
        &TaskState::at_rest(start),
        &loaded.executive,
        dense,
    )?;
    let trace = TraceFile::from_execution(&ex);
    if dense {
        let path = out.join("trace.bin");
        let f = fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?;
        write_dense(&trace.records, BufWriter::new(f))?;
    } else {
        write_json(&out.join("trace.json"), &trace)?;
    }
    println!("{:?} after {} steps", ex.outcome, ex.steps_completed);
    Ok(())
}

fn cmd_trial(
    out: &Path,
    scene: &str,
    seeds: u64,
    seed: Option<u64>,
    noise: Option<f64>,
) -> Result<()> {
    let loaded = resolve_scene(scene)?;
    let base = seed.unwrap_or(loaded.executive.seed);
    let mut reports = Vec::new();
    let mut timings = Vec::new();
    for s in base..base + seeds {
        let config = ExecutiveConfig {
            seed: s,
            noise: noise.map_or(loaded.executive.noise, |k| loaded.executive.noise.scaled(k)),
            ..loaded.executive
        };
        let clock = WallClock(Instant::now());
        let report = run_repetitions(
            &loaded.scene,
            &loaded.gripper,
            &loaded.planner,
            &config,
            &clock,
        )?;
        let dto = TrialReportDto::new(&loaded.file.name, &report, &loaded.scene.grasp_pose_world());
        write_json(&out.join(format!("trial_{s}.json")), &dto)?;
        reports.push(dto);
        timings.push(TrialTimings::new(&report));
    }
    write_json(&out.join("timings.json"), &timings)?;
    let table = Aggregate::new(&reports, &timings).table(&loaded.file.name);
    fs::write(out.join("summary.txt"), &table)?;
    print!("{table}");
    Ok(())
}

fn cmd_bake(out: &Path, scene: &str, object: &str, resolution: Option<f64>) -> Result<()> {
    let loaded = resolve_scene(scene)?;
    let file = &loaded.file;
    let Some(i) = file.object_index(object) else {
        bail!("scene has no object named `{object}`");
    };
    let res = resolution.or(file.objects[i].bake).unwrap_or(0.005);
    let grid = bake_grid(&file.object_shape(i)?, res, BAKE_PADDING)?;
    let path = out.join(format!("{object}.sdfg"));
    write_grid_file(&grid, &path).with_context(|| format!("writing {}", path.display()))?;
    let [nx, ny, nz] = grid.dims();
    println!("wrote {} ({nx}x{ny}x{nz} nodes)", path.display());
    Ok(())
}

pub fn execute(cli: Cli) -> Result<()> {
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let out = cli.out.as_path();
    match cli.command {
        Command::Plan { scene, seed } => cmd_plan(out, &scene, seed),
        Command::Simulate {
            scene,
            controls,
            dense,
        } => cmd_simulate(out, &scene, &controls, dense),
        Command::Trial {
            scene,
            seeds,
            seed,
            noise,
        } => cmd_trial(out, &scene, seeds, seed, noise),
        Command::BakeSdf {
            scene,
            object,
            resolution,
        } => cmd_bake(out, &scene, &object, resolution),
    }
}

/// Parses `argv` and runs the command, returning the process exit status.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
