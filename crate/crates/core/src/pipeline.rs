//! End-to-end runs: scenes, grids, episodes, evaluation and the files they
//! are written to.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

use crate::bench::{evaluate, summarize, Agent, BenchmarkReport};
use crate::canon::{content_hash, sha256_hex};
use crate::catalog::Catalog;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::io::{save_json, save_jsonl, to_jsonl_bytes};
use crate::layout::{HeuristicBackend, PlannerBackend};
use crate::nav::{rasterize, OccupancyGrid};
use crate::placement::{generate_scene_with, validate_scene, GenerationOptions, GenerationReport, SceneGraph};
use crate::render::{render_scene_svg, SceneSvgOptions};
use crate::rng::SeedStream;
use crate::tasks::{sample_episodes_hashed, validate_episode, Episode, EpisodeCheck, RobotProfile, Track};

/// Extra seeds tried when some scene seeds fail to plan.
pub const SPARE_SEEDS: u64 = 10;

pub fn scene_file(seed: u64) -> String {
    format!("scene_{seed}.json")
}

pub fn episodes_file(track: Track) -> String {
    format!("episodes_{}.jsonl", track.as_str())
}

#[derive(Debug, Clone)]
pub struct SceneRun {
    pub seed: u64,
    pub scene: SceneGraph,
    pub report: GenerationReport,
    pub grid: OccupancyGrid,
    pub scene_hash: String,
}

impl SceneRun {
    /// Wraps a scene read back from disk; its seed is the store seed.
    pub fn from_scene(scene: SceneGraph, cell_size: f64, robot_radius: f64) -> Result<Self> {
        let grid = rasterize(&scene, cell_size, robot_radius)?;
        Ok(SceneRun {
            seed: scene.layout.store.seed,
            scene_hash: content_hash(&scene),
            report: GenerationReport {
                scene_id: scene.scene_id.clone(),
                facility_count: scene.placed.len(),
                product_count: scene.products.len(),
                ..Default::default()
            },
            scene,
            grid,
        })
    }
}

fn generate_one(cfg: &RunConfig, catalog: &Catalog, backend: &dyn PlannerBackend, seed: u64) -> Result<SceneRun> {
    let spec = cfg.store_for(seed)?;
    let opts = GenerationOptions {
        fill_rate: cfg.fill_rate,
        ..Default::default()
    };
    let (scene, report) = generate_scene_with(&spec, catalog, &opts, backend, None)?;
    let grid = rasterize(&scene, cfg.cell_size, cfg.robot.radius)?;
    Ok(SceneRun {
        seed,
        scene_hash: content_hash(&scene),
        scene,
        report,
        grid,
    })
}

/// One scene per configured seed, generated in parallel; any failure aborts.
pub fn generate_scenes(cfg: &RunConfig, catalog: &Catalog, backend: &dyn PlannerBackend) -> Result<Vec<SceneRun>> {
    cfg.scene_seeds
        .par_iter()
        .map(|&s| generate_one(cfg, catalog, backend, s))
        .collect()
}

/// As many scenes as there are configured seeds; seeds whose layout cannot
/// be planned are replaced by the next unused seeds. Returns the scenes and
/// the skipped seeds.
pub fn generate_bench_scenes(
    cfg: &RunConfig,
    catalog: &Catalog,
    backend: &dyn PlannerBackend,
) -> Result<(Vec<SceneRun>, Vec<u64>)> {
    let first: Vec<(u64, Result<SceneRun>)> = cfg
        .scene_seeds
        .par_iter()
        .map(|&s| (s, generate_one(cfg, catalog, backend, s)))
        .collect();
    let mut runs = Vec::new();
    let mut skipped = Vec::new();
    for (seed, r) in first {
        match r {
            Ok(run) => runs.push(run),
            Err(Error::PlanningFailed { reason, .. }) => {
                log::warn!("seed {seed} skipped: {reason}");
                skipped.push(seed);
            }
            Err(e) => return Err(e),
        }
    }
    let mut next = cfg.scene_seeds.iter().max().copied().unwrap_or(0);
    let limit = next.saturating_add(SPARE_SEEDS);
    while runs.len() < cfg.scene_seeds.len() {
        if next >= limit {
            return Err(Error::GenerationFailed(format!(
                "only {} of {} scenes could be planned",
                runs.len(),
                cfg.scene_seeds.len()
            )));
        }
        next += 1;
        match generate_one(cfg, catalog, backend, next) {
            Ok(run) => runs.push(run),
            Err(Error::PlanningFailed { reason, .. }) => {
                log::warn!("seed {next} skipped: {reason}");
                skipped.push(next);
            }
            Err(e) => return Err(e),
        }
    }
    Ok((runs, skipped))
}

/// Random stream for one track's episodes in one scene.
pub fn episode_stream(seed: u64, track: Track, scene_id: &str) -> SeedStream {
    SeedStream::new(seed)
        .derive("episodes")
        .derive(track.as_str())
        .derive(scene_id)
}

/// `total` episodes of a track spread evenly over the scenes (earlier scenes
/// take the remainder). Each scene samples from its own stream.
pub fn sample_track(
    runs: &[SceneRun],
    track: Track,
    total: usize,
    seed: u64,
    profile: &RobotProfile,
) -> Result<Vec<Episode>> {
    if runs.is_empty() {
        return Err(Error::invalid("no scenes to sample from"));
    }
    let n = runs.len();
    let per_scene: Vec<Vec<Episode>> = runs
        .par_iter()
        .enumerate()
        .map(|(i, run)| {
            let count = total / n + usize::from(i < total % n);
            let mut rng = episode_stream(seed, track, &run.scene.scene_id).rng();
            sample_episodes_hashed(&run.scene, &run.scene_hash, &run.grid, track, count, &mut rng, profile)
        })
        .collect::<Result<_>>()?;
    Ok(per_scene.into_iter().flatten().collect())
}

pub fn check_episodes(runs: &[SceneRun], episodes: &[Episode], profile: &RobotProfile) -> Result<Vec<EpisodeCheck>> {
    let by_id: BTreeMap<&str, &SceneRun> = runs.iter().map(|r| (r.scene.scene_id.as_str(), r)).collect();
    episodes
        .par_iter()
        .map(|ep| {
            let run = by_id.get(ep.scene_id.as_str()).ok_or_else(|| {
                Error::invalid(format!("episode {} names unknown scene {}", ep.episode_id, ep.scene_id))
            })?;
            Ok(validate_episode(ep, &run.scene, &run.grid, profile))
        })
        .collect()
}

/// Errors unless every episode was sampled in the scene it names, judged by
/// content hash.
pub fn check_scene_hashes(scenes: &BTreeMap<String, (SceneGraph, OccupancyGrid)>, episodes: &[Episode]) -> Result<()> {
    check_hashes(&scene_hashes(scenes), episodes)
}

/// Content hash of every scene, computed in parallel.
pub fn scene_hashes(scenes: &BTreeMap<String, (SceneGraph, OccupancyGrid)>) -> BTreeMap<String, String> {
    scenes
        .par_iter()
        .map(|(id, (s, _))| (id.clone(), content_hash(s)))
        .collect()
}

fn check_hashes(hashes: &BTreeMap<String, String>, episodes: &[Episode]) -> Result<()> {
    for ep in episodes {
        match hashes.get(ep.scene_id.as_str()) {
            None => {
                return Err(Error::HashMismatch(format!(
                    "episode {} needs scene {}, which was not given",
                    ep.episode_id, ep.scene_id
                )))
            }
            Some(h) if *h != ep.scene_hash => {
                return Err(Error::HashMismatch(format!(
                    "episode {} was sampled in scene {} with hash {}, the given scene hashes to {h}",
                    ep.episode_id, ep.scene_id, ep.scene_hash
                )))
            }
            Some(_) => {}
        }
    }
    Ok(())
}

pub fn timestamp() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{secs}")
}

/// Evaluates an agent and assembles the report with its hash block.
pub fn build_report(
    scenes: &BTreeMap<String, (SceneGraph, OccupancyGrid)>,
    tracks: &BTreeMap<Track, Vec<Episode>>,
    agent: &dyn Agent,
    profile: &RobotProfile,
    config_hash: String,
) -> Result<BenchmarkReport> {
    build_report_hashed(scenes, scene_hashes(scenes), tracks, agent, profile, config_hash)
}

/// As `build_report`, with the scene hashes already known.
pub fn build_report_hashed(
    scenes: &BTreeMap<String, (SceneGraph, OccupancyGrid)>,
    hashes: BTreeMap<String, String>,
    tracks: &BTreeMap<Track, Vec<Episode>>,
    agent: &dyn Agent,
    profile: &RobotProfile,
    config_hash: String,
) -> Result<BenchmarkReport> {
    let all: Vec<Episode> = tracks.values().flatten().cloned().collect();
    check_hashes(&hashes, &all)?;
    let results = evaluate(scenes, &all, agent, profile)?;
    let report = BenchmarkReport {
        agent_id: agent.id(),
        generated_at: timestamp(),
        config_hash,
        skipped_seeds: Vec::new(),
        scene_hashes: hashes,
        episode_set_hashes: tracks
            .iter()
            .map(|(t, eps)| (t.as_str().to_string(), sha256_hex(&to_jsonl_bytes(eps))))
            .collect(),
        tracks: summarize(&results)?,
        episodes: results,
    };
    report.check_aggregates()?;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct BenchRun {
    pub catalog: Catalog,
    pub scenes: Vec<SceneRun>,
    pub skipped_seeds: Vec<u64>,
    pub episodes: BTreeMap<Track, Vec<Episode>>,
    pub checks: Vec<EpisodeCheck>,
    pub report: BenchmarkReport,
}

impl BenchRun {
    pub fn failed_checks(&self) -> impl Iterator<Item = &EpisodeCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Every artifact of the run under `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        save_json(&dir.join("catalog.json"), &self.catalog)?;
        for run in &self.scenes {
            save_json(&dir.join(scene_file(run.seed)), &run.scene)?;
            save_json(&dir.join(format!("generation_{}.json", run.seed)), &run.report)?;
            let svg = render_scene_svg(
                &run.scene,
                &SceneSvgOptions {
                    show_products: true,
                    grid: None,
                },
            );
            crate::canon::write_atomic(&dir.join(format!("scene_{}.svg", run.seed)), svg.as_bytes())?;
            run.grid.write_pgm(&dir.join(format!("grid_{}.pgm", run.seed)))?;
        }
        for (track, eps) in &self.episodes {
            save_jsonl(&dir.join(episodes_file(*track)), eps)?;
        }
        save_json(&dir.join("report.json"), &self.report)
    }
}

pub fn scene_map(runs: &[SceneRun]) -> BTreeMap<String, (SceneGraph, OccupancyGrid)> {
    runs.iter()
        .map(|r| (r.scene.scene_id.clone(), (r.scene.clone(), r.grid.clone())))
        .collect()
}

/// Scenes, episodes for both tracks, validation, and evaluation of `agent`.
pub fn reproduce_bench(cfg: &RunConfig, agent: &dyn Agent) -> Result<BenchRun> {
    reproduce_bench_with(cfg, agent, &HeuristicBackend)
}

pub fn reproduce_bench_with(cfg: &RunConfig, agent: &dyn Agent, backend: &dyn PlannerBackend) -> Result<BenchRun> {
    cfg.validate()?;
    let catalog = cfg.catalog.load()?;
    let (scenes, skipped_seeds) = generate_bench_scenes(cfg, &catalog, backend)?;
    for run in &scenes {
        let v = validate_scene(&run.scene, run.scene.layout.store.min_aisle_width);
        if !v.passed() {
            return Err(Error::GenerationFailed(format!(
                "scene {} fails validity with {} violations",
                run.scene.scene_id,
                v.violation_count()
            )));
        }
    }
    let mut episodes = BTreeMap::new();
    episodes.insert(
        Track::InAisleCollection,
        sample_track(
            &scenes,
            Track::InAisleCollection,
            cfg.episodes.collection,
            cfg.seed,
            &cfg.robot,
        )?,
    );
    episodes.insert(
        Track::CheckoutUnloading,
        sample_track(
            &scenes,
            Track::CheckoutUnloading,
            cfg.episodes.checkout,
            cfg.seed,
            &cfg.robot,
        )?,
    );
    let all: Vec<Episode> = episodes.values().flatten().cloned().collect();
    let checks = check_episodes(&scenes, &all, &cfg.robot)?;
    let map = scene_map(&scenes);
    let hashes = scenes
        .iter()
        .map(|r| (r.scene.scene_id.clone(), r.scene_hash.clone()))
        .collect();
    let mut report = build_report_hashed(&map, hashes, &episodes, agent, &cfg.robot, cfg.content_hash())?;
    report.skipped_seeds = skipped_seeds.clone();
    Ok(BenchRun {
        catalog,
        scenes,
        skipped_seeds,
        episodes,
        checks,
        report,
    })
}
