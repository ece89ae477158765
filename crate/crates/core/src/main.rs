use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use marketgen::bench::{Agent, NoisyAgent, OracleAgent};
use marketgen::canon::{content_hash, write_atomic};
use marketgen::config::{
    CatalogSource, EpisodeCounts, RunConfig, BENCH_EPISODES, DEFAULT_SYNTH_FACILITIES, DEFAULT_SYNTH_GOODS,
};
use marketgen::io::{load_json, load_jsonl, save_json, save_jsonl};
use marketgen::layout::remote::{RemoteBackend, ENV_URL};
use marketgen::layout::{HeuristicBackend, PlannerBackend};
use marketgen::nav::{rasterize, DEFAULT_CELL_SIZE, DEFAULT_ROBOT_RADIUS};
use marketgen::pipeline::{
    build_report, check_episodes, episodes_file, generate_scenes, reproduce_bench, sample_track, scene_file, scene_map,
    SceneRun,
};
use marketgen::placement::{validate_scene, SceneGraph, DEFAULT_FILL_RATE};
use marketgen::render::{render_scene_svg, SceneSvgOptions};
use marketgen::tasks::{Episode, RobotProfile, Track, DEFAULT_REACH};
use marketgen::{Error, Result};

#[derive(Parser)]
#[command(
    name = "marketgen",
    version,
    about = "Supermarket scene generation and pick-task benchmark"
)]
struct Cli {
    /// Log verbosity when RUST_LOG is unset: error, warn, info, debug or trace.
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate scenes from a store spec and a catalog.
    Generate(GenerateArgs),
    /// Draw a scene as SVG and/or rasterize it to a PGM occupancy grid.
    Render(RenderArgs),
    /// Sample episodes for both tracks from generated scenes.
    Sample(SampleArgs),
    /// Run an agent on sampled episodes and write a report.
    Evaluate(EvaluateArgs),
    /// Ten scenes, a hundred episodes per track, validation and evaluation in one go.
    ReproduceBench(ReproduceArgs),
}

#[derive(Args, Clone, Copy)]
struct RobotArgs {
    /// Occupancy grid resolution in meters.
    #[arg(long, default_value_t = DEFAULT_CELL_SIZE)]
    cell_size: f64,
    /// Robot footprint radius used to dilate obstacles, in meters.
    #[arg(long, default_value_t = DEFAULT_ROBOT_RADIUS)]
    robot_radius: f64,
    /// Arm reach from the base center, in meters.
    #[arg(long, default_value_t = DEFAULT_REACH)]
    reach: f64,
}

impl RobotArgs {
    fn profile(&self) -> RobotProfile {
        RobotProfile {
            radius: self.robot_radius,
            reach: self.reach,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// Store spec JSON; the built-in 30 x 20 m store when omitted.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Catalog JSON; a synthetic catalog seeded by --seed when omitted.
    #[arg(long)]
    catalog: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of scenes, seeded seed, seed + 1, ...
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_FILL_RATE)]
    fill_rate: f64,
    /// Plan layouts with the remote model backend (needs MARKETGEN_REMOTE_URL
    /// and a build with the `remote` feature).
    #[arg(long)]
    remote: bool,
    #[command(flatten)]
    robot: RobotArgs,
}

#[derive(Args)]
struct RenderArgs {
    scene: PathBuf,
    /// SVG output; defaults to the scene path with an .svg extension.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// PGM occupancy grid output, with a .json sidecar beside it.
    #[arg(long)]
    pgm: Option<PathBuf>,
    /// Leave out product dots.
    #[arg(long)]
    no_products: bool,
    /// Overlay occupied grid cells on the SVG.
    #[arg(long)]
    show_grid: bool,
    #[command(flatten)]
    robot: RobotArgs,
}

#[derive(Args)]
struct SampleArgs {
    /// Scene files, or directories holding scene_<seed>.json files.
    #[arg(required = true)]
    scenes: Vec<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = BENCH_EPISODES)]
    collection: usize,
    #[arg(long, default_value_t = BENCH_EPISODES)]
    checkout: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[command(flatten)]
    robot: RobotArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum AgentKind {
    Oracle,
    Noisy,
}

#[derive(Args, Clone, Copy)]
struct AgentArgs {
    #[arg(long, value_enum, default_value = "oracle")]
    agent: AgentKind,
    /// Noisy agent: probability of skipping each pick.
    #[arg(long, default_value_t = 0.1)]
    p_skip: f64,
    /// Noisy agent: path stretch factor, at least 1.
    #[arg(long, default_value_t = 1.0)]
    detour: f64,
}

impl AgentArgs {
    fn build(&self, seed: u64) -> Result<Box<dyn Agent>> {
        Ok(match self.agent {
            AgentKind::Oracle => Box::new(OracleAgent),
            AgentKind::Noisy => Box::new(NoisyAgent::new(self.p_skip, self.detour, seed)?),
        })
    }
}

#[derive(Args)]
struct EvaluateArgs {
    /// Scene files, or directories holding scene_<seed>.json files.
    #[arg(long, required = true, num_args = 1..)]
    scenes: Vec<PathBuf>,
    /// Episode JSON-lines files.
    #[arg(long, required = true, num_args = 1..)]
    episodes: Vec<PathBuf>,
    #[command(flatten)]
    agent: AgentArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
    #[command(flatten)]
    robot: RobotArgs,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Run config JSON; the standard benchmark setup when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's root seed.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    agent: AgentArgs,
    /// Overrides the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A run that completed but whose output failed validation.
struct Rejected(String);

enum Failure {
    Lib(Error),
    Rejected(Rejected),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

impl From<Rejected> for Failure {
    fn from(r: Rejected) -> Self {
        Failure::Rejected(r)
    }
}

type CliResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .parse_default_env()
        .init();
    let outcome = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Render(a) => render(a),
        Command::Sample(a) => sample(a),
        Command::Evaluate(a) => evaluate(a),
        Command::ReproduceBench(a) => reproduce(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Rejected(Rejected(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, Error::Io(_)) { 2 } else { 1 })
        }
    }
}

fn generate(a: GenerateArgs) -> CliResult {
    let cfg = RunConfig {
        store_spec: a.spec,
        catalog: match a.catalog {
            Some(path) => CatalogSource::Path { path },
            None => CatalogSource::Synth {
                seed: a.seed,
                goods: DEFAULT_SYNTH_GOODS,
                facilities: DEFAULT_SYNTH_FACILITIES,
            },
        },
        seed: a.seed,
        scene_seeds: (0..a.count).map(|i| a.seed.wrapping_add(i)).collect(),
        cell_size: a.robot.cell_size,
        robot: a.robot.profile(),
        fill_rate: a.fill_rate,
        episodes: EpisodeCounts {
            collection: 0,
            checkout: 0,
        },
        output_dir: a.out.clone(),
    };
    cfg.validate()?;
    let backend: Box<dyn PlannerBackend> = if a.remote {
        match RemoteBackend::from_env(marketgen::layout::remote::DEFAULT_TIMEOUT)? {
            Some(b) => Box::new(b),
            None => return Err(Rejected(format!("--remote needs {ENV_URL} to be set")).into()),
        }
    } else {
        Box::new(HeuristicBackend)
    };
    let catalog = cfg.catalog.load()?;
    let runs = generate_scenes(&cfg, &catalog, backend.as_ref())?;
    fs::create_dir_all(&a.out)?;
    save_json(&a.out.join("catalog.json"), &catalog)?;
    let mut invalid = Vec::new();
    for run in &runs {
        save_json(&a.out.join(scene_file(run.seed)), &run.scene)?;
        save_json(&a.out.join(format!("generation_{}.json", run.seed)), &run.report)?;
        for w in &run.report.warnings {
            log::warn!("{}: {w}", run.scene.scene_id);
        }
        let v = validate_scene(&run.scene, run.scene.layout.store.min_aisle_width);
        if !v.passed() {
            invalid.push(format!("{} ({} violations)", run.scene.scene_id, v.violation_count()));
        }
        println!(
            "{}  seed {}  {} facilities  {} products",
            scene_file(run.seed),
            run.seed,
            run.report.facility_count,
            run.report.product_count
        );
    }
    if invalid.is_empty() {
        Ok(())
    } else {
        Err(Rejected(format!("scenes fail validity: {}", invalid.join(", "))).into())
    }
}

fn render(a: RenderArgs) -> CliResult {
    let scene: SceneGraph = load_json(&a.scene)?;
    let grid = if a.show_grid || a.pgm.is_some() {
        Some(rasterize(&scene, a.robot.cell_size, a.robot.robot_radius)?)
    } else {
        None
    };
    if let Some(p) = &a.pgm {
        grid.as_ref().expect("grid rasterized for pgm").write_pgm(p)?;
    }
    if a.svg.is_some() || a.pgm.is_none() {
        let svg = render_scene_svg(
            &scene,
            &SceneSvgOptions {
                show_products: !a.no_products,
                grid: if a.show_grid { grid.as_ref() } else { None },
            },
        );
        let path = a.svg.unwrap_or_else(|| a.scene.with_extension("svg"));
        write_atomic(&path, svg.as_bytes())?;
    }
    Ok(())
}

/// Scene files named directly, plus every scene_*.json inside named directories.
fn scene_paths(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| {
                    f.file_name()
                        .and_then(|n| n.to_str())
                        .is_some_and(|n| n.starts_with("scene_") && n.ends_with(".json"))
                })
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument("no scene files found".into()));
    }
    Ok(out)
}

fn load_runs(inputs: &[PathBuf], robot: &RobotArgs) -> Result<Vec<SceneRun>> {
    scene_paths(inputs)?
        .iter()
        .map(|p| SceneRun::from_scene(load_json(p)?, robot.cell_size, robot.robot_radius))
        .collect()
}

fn sample(a: SampleArgs) -> CliResult {
    let profile = a.robot.profile();
    let runs = load_runs(&a.scenes, &a.robot)?;
    fs::create_dir_all(&a.out)?;
    let mut failed = 0;
    for (track, total) in [
        (Track::InAisleCollection, a.collection),
        (Track::CheckoutUnloading, a.checkout),
    ] {
        let eps = sample_track(&runs, track, total, a.seed, &profile)?;
        let checks = check_episodes(&runs, &eps, &profile)?;
        for c in checks.iter().filter(|c| !c.passed) {
            log::error!("{} invalid: {}", c.episode_id, c.reasons.join("; "));
            failed += 1;
        }
        save_jsonl(&a.out.join(episodes_file(track)), &eps)?;
        println!("{}  {} episodes", episodes_file(track), eps.len());
    }
    if failed > 0 {
        return Err(Rejected(format!("{failed} sampled episodes fail validation")).into());
    }
    Ok(())
}

#[derive(Serialize)]
struct EvalSettings<'a> {
    agent: &'a str,
    seed: u64,
    cell_size: f64,
    robot: RobotProfile,
}

fn evaluate(a: EvaluateArgs) -> CliResult {
    let profile = a.robot.profile();
    let runs = load_runs(&a.scenes, &a.robot)?;
    let map = scene_map(&runs);
    let mut tracks: BTreeMap<Track, Vec<Episode>> = BTreeMap::new();
    for p in &a.episodes {
        for ep in load_jsonl::<Episode>(p)? {
            tracks.entry(ep.track).or_default().push(ep);
        }
    }
    let agent = a.agent.build(a.seed)?;
    let id = agent.id();
    let settings = EvalSettings {
        agent: &id,
        seed: a.seed,
        cell_size: a.robot.cell_size,
        robot: profile,
    };
    let report = build_report(&map, &tracks, agent.as_ref(), &profile, content_hash(&settings))?;
    save_json(&a.out, &report)?;
    print_summary(&report.tracks);
    Ok(())
}

fn print_summary(tracks: &BTreeMap<String, marketgen::bench::TrackSummary>) {
    for (name, t) in tracks {
        let spl = t.spl.map_or("n/a".to_string(), |v| format!("{v:.4}"));
        let pl = t.mean_pl.map_or("n/a".to_string(), |v| format!("{v:.3}"));
        println!(
            "{name:<20} episodes {:>4}  SR {:.4}  SPL {spl}  PL {pl}",
            t.episodes, t.sr
        );
    }
}

fn reproduce(a: ReproduceArgs) -> CliResult {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::bench(a.seed.unwrap_or(0), PathBuf::from("bench_out")),
    };
    if let (Some(seed), Some(_)) = (a.seed, &a.config) {
        cfg.seed = seed;
    }
    if let Some(out) = a.out {
        cfg.output_dir = out;
    }
    let agent = a.agent.build(cfg.seed)?;
    let start = Instant::now();
    let run = reproduce_bench(&cfg, agent.as_ref())?;
    write_run(&run, &cfg.output_dir)?;
    for s in &run.skipped_seeds {
        log::warn!("scene seed {s} could not be planned and was replaced");
    }
    println!(
        "{} scenes, {} episodes, {:.1} s",
        run.scenes.len(),
        run.episodes.values().map(Vec::len).sum::<usize>(),
        start.elapsed().as_secs_f64()
    );
    print_summary(&run.report.tracks);
    let failed: Vec<String> = run
        .failed_checks()
        .map(|c| format!("{}: {}", c.episode_id, c.reasons.join("; ")))
        .collect();
    if !failed.is_empty() {
        for f in &failed {
            log::error!("{f}");
        }
        return Err(Rejected(format!("{} episodes fail validation", failed.len())).into());
    }
    Ok(())
}

fn write_run(run: &marketgen::pipeline::BenchRun, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    run.write(dir)
}
