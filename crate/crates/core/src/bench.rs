//! Abstract execution of agent traces and the SR / SPL / PL metrics.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canon::quantize;
use crate::error::{Error, Result};
use crate::nav::{Cell, GridPath, OccupancyGrid, Steps};
use crate::placement::SceneGraph;
use crate::rng::SeedStream;
use crate::tasks::{front_face, optimal_tour, Episode, RobotProfile, Track};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    MoveTo(Cell),
    Pick(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionTrace {
    pub episode_id: String,
    pub agent_id: String,
    pub actions: Vec<Action>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub action_index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub episode_id: String,
    pub track: Track,
    pub goals_met: u32,
    /// Goal conditions: one per target.
    pub m: u32,
    pub success: f64,
    /// Executed path length in meters.
    pub path_length: f64,
    /// Reference path length in meters.
    pub reference_length: f64,
    pub failure_log: Vec<Failure>,
}

/// Anything that turns an episode into a trace.
pub trait Agent: Send + Sync {
    fn id(&self) -> String;
    fn act(&self, scene: &SceneGraph, grid: &OccupancyGrid, episode: &Episode) -> Result<ActionTrace>;
}

fn adjacent(grid: &OccupancyGrid, from: Cell, to: Cell) -> bool {
    grid.neighbors(from).any(|(n, _)| n == to)
}

/// Executes a trace. Moves must follow free, 8-connected cells without
/// cutting corners; picks need the target in reach and unobstructed.
/// Problems are logged per action and never abort the episode.
pub fn run_episode(
    scene: &SceneGraph,
    grid: &OccupancyGrid,
    episode: &Episode,
    trace: &ActionTrace,
    profile: &RobotProfile,
) -> EpisodeResult {
    let mut log = Vec::new();
    let mut fail = |i: usize, reason: String| {
        log.push(Failure {
            action_index: i,
            reason,
        })
    };
    let targets: BTreeSet<&str> = episode.targets.iter().map(String::as_str).collect();
    let mut picked: BTreeSet<String> = BTreeSet::new();
    let mut steps = Steps::default();
    let mut cell = grid.world_to_cell(episode.start.x, episode.start.y);
    let mut moved = false;

    if trace.episode_id != episode.episode_id {
        fail(
            0,
            format!("trace is for {}, not {}", trace.episode_id, episode.episode_id),
        );
    } else if trace.actions.is_empty() {
        fail(0, "empty trace".into());
    } else {
        for (i, a) in trace.actions.iter().enumerate() {
            match a {
                Action::MoveTo(to) => match cell {
                    _ if !grid.in_bounds(*to) => fail(i, format!("cell ({}, {}) is off the grid", to.x, to.y)),
                    Some(from) if grid.free(from) && adjacent(grid, from, *to) => {
                        steps += Steps::between(from, *to);
                        cell = Some(*to);
                        moved = true;
                    }
                    _ => fail(i, format!("no free step to ({}, {})", to.x, to.y)),
                },
                Action::Pick(id) => {
                    if !targets.contains(id.as_str()) {
                        fail(i, format!("{id} is not a target"));
                        continue;
                    }
                    if picked.contains(id) {
                        fail(i, format!("{id} already picked"));
                        continue;
                    }
                    let pos = match (moved, cell) {
                        (true, Some(c)) => grid.cell_center(c),
                        _ => (episode.start.x, episode.start.y),
                    };
                    match check_pick(scene, episode, id, pos, &picked, profile) {
                        Ok(()) => {
                            picked.insert(id.clone());
                        }
                        Err(why) => fail(i, why),
                    }
                }
            }
        }
    }
    let m = episode.targets.len() as u32;
    let goals_met = picked.len() as u32;
    EpisodeResult {
        episode_id: episode.episode_id.clone(),
        track: episode.track,
        goals_met,
        m,
        success: if m == 0 {
            0.0
        } else {
            f64::from(goals_met) / f64::from(m)
        },
        path_length: quantize(steps.meters(grid.cell_size)),
        reference_length: quantize(episode.reference_length),
        failure_log: log,
    }
}

fn check_pick(
    scene: &SceneGraph,
    ep: &Episode,
    id: &str,
    (x, y): (f64, f64),
    picked: &BTreeSet<String>,
    profile: &RobotProfile,
) -> std::result::Result<(), String> {
    match ep.track {
        Track::InAisleCollection => {
            let p = scene
                .products
                .iter()
                .find(|p| p.product_instance_id == id)
                .ok_or_else(|| format!("{id} is not in the scene"))?;
            if !p.front_facing {
                return Err(format!("{id} is behind another facing"));
            }
            let ((fx, fy), _) = front_face(p);
            let d = (fx - x).hypot(fy - y);
            if d > profile.reach + 1e-9 {
                return Err(format!("{id} is {d:.3} m away, beyond reach"));
            }
        }
        Track::CheckoutUnloading => {
            let stack = ep.basket.as_ref().ok_or("checkout episode without a basket")?;
            let item = stack.item(id).ok_or_else(|| format!("{id} is not in the basket"))?;
            if let Some(o) = stack.occluders_of(id).find(|o| !picked.contains(*o)) {
                return Err(format!("{id} is covered by {o}"));
            }
            let (ix, iy) = stack.item_world_center(item);
            let d = (ix - x).hypot(iy - y);
            if d > profile.reach + 1e-9 {
                return Err(format!("{id} is {d:.3} m away, beyond reach"));
            }
        }
    }
    Ok(())
}

/// Mean per-episode success.
pub fn score_sr(results: &[EpisodeResult]) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::invalid("no episode results to score"));
    }
    Ok(results.iter().map(|r| r.success).sum::<f64>() / results.len() as f64)
}

/// Success weighted by path length over collection episodes.
pub fn score_spl(results: &[EpisodeResult]) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::invalid("no episode results to score"));
    }
    if let Some(r) = results.iter().find(|r| r.track == Track::CheckoutUnloading) {
        return Err(Error::NotApplicable(format!(
            "SPL is undefined for checkout episode {}",
            r.episode_id
        )));
    }
    let sum: f64 = results
        .iter()
        .map(|r| {
            let (p, l) = (r.path_length, r.reference_length);
            if p == 0.0 && l == 0.0 {
                r.success
            } else {
                r.success * l / p.max(l)
            }
        })
        .sum();
    Ok(sum / results.len() as f64)
}

pub fn mean_path_length(results: &[EpisodeResult]) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::invalid("no episode results to score"));
    }
    Ok(results.iter().map(|r| r.path_length).sum::<f64>() / results.len() as f64)
}

fn walk(actions: &mut Vec<Action>, path: &GridPath) {
    actions.extend(path.cells.iter().skip(1).map(|&c| Action::MoveTo(c)));
}

/// Basket items ordered so that no item is taken before what covers it.
fn unstack_order(ep: &Episode) -> Vec<String> {
    let Some(stack) = &ep.basket else {
        return Vec::new();
    };
    let mut items: Vec<_> = stack.items.iter().collect();
    items.sort_by(|a, b| b.bounds.z.total_cmp(&a.bounds.z).then(a.item_id.cmp(&b.item_id)));
    items.into_iter().map(|i| i.item_id.clone()).collect()
}

/// Tour legs and the targets picked at the end of each leg.
fn collection_plan(grid: &OccupancyGrid, ep: &Episode) -> Result<Vec<(GridPath, String)>> {
    let start = grid
        .world_to_cell(ep.start.x, ep.start.y)
        .ok_or_else(|| Error::invalid(format!("start of {} is off the grid", ep.episode_id)))?;
    let tour = optimal_tour(grid, start, &ep.approach_points)
        .ok_or_else(|| Error::invalid(format!("episode {} has an unreachable target", ep.episode_id)))?;
    Ok(tour
        .legs
        .into_iter()
        .zip(tour.order.iter().map(|&k| ep.targets[k].clone()))
        .collect())
}

/// Follows the optimal tour and picks everything in order.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleAgent;

impl Agent for OracleAgent {
    fn id(&self) -> String {
        "oracle".into()
    }

    fn act(&self, _scene: &SceneGraph, grid: &OccupancyGrid, ep: &Episode) -> Result<ActionTrace> {
        let mut actions = Vec::new();
        match ep.track {
            Track::InAisleCollection => {
                for (leg, target) in collection_plan(grid, ep)? {
                    walk(&mut actions, &leg);
                    actions.push(Action::Pick(target));
                }
            }
            Track::CheckoutUnloading => actions.extend(unstack_order(ep).into_iter().map(Action::Pick)),
        }
        Ok(ActionTrace {
            episode_id: ep.episode_id.clone(),
            agent_id: self.id(),
            actions,
        })
    }
}

/// Oracle with two faults: each pick is skipped with probability `p_skip`,
/// and each leg is stretched to about `detour` times its length by walking
/// back along it and returning.
#[derive(Debug, Clone, Copy)]
pub struct NoisyAgent {
    pub p_skip: f64,
    pub detour: f64,
    pub seed: u64,
}

impl NoisyAgent {
    pub fn new(p_skip: f64, detour: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_skip) {
            return Err(Error::invalid(format!("p_skip must be in [0, 1], got {p_skip}")));
        }
        if !(detour >= 1.0 && detour.is_finite()) {
            return Err(Error::invalid(format!("detour must be >= 1, got {detour}")));
        }
        Ok(NoisyAgent { p_skip, detour, seed })
    }
}

/// Back-and-forth excursion along `cells` (ending at their last cell) whose
/// length is as close as possible to `extra` cell units.
fn excursion(cells: &[Cell], extra: f64) -> Vec<Cell> {
    let n = cells.len();
    if n < 2 || extra <= 0.0 {
        return Vec::new();
    }
    let back: Vec<Cell> = cells.iter().rev().copied().collect();
    // prefix[k]: cost of walking k steps back from the end
    let mut prefix = vec![0.0];
    for w in back.windows(2) {
        let s = Steps::between(w[0], w[1]);
        prefix.push(prefix.last().unwrap() + s.cost());
    }
    let full = 2.0 * prefix[n - 1];
    let mut out = Vec::new();
    let mut left = extra;
    while left >= full {
        out.extend(&back[1..]);
        out.extend(&cells[1..]);
        left -= full;
    }
    let k = (0..n)
        .min_by(|&a, &b| {
            (2.0 * prefix[a] - left)
                .abs()
                .total_cmp(&(2.0 * prefix[b] - left).abs())
        })
        .unwrap();
    out.extend(&back[1..=k]);
    out.extend(back[..k].iter().rev());
    out
}

impl Agent for NoisyAgent {
    fn id(&self) -> String {
        format!("noisy-p{}-d{}", self.p_skip, self.detour)
    }

    fn act(&self, _scene: &SceneGraph, grid: &OccupancyGrid, ep: &Episode) -> Result<ActionTrace> {
        let mut rng = SeedStream::new(self.seed).derive(&ep.episode_id).rng();
        let mut actions = Vec::new();
        let mut maybe_pick = |actions: &mut Vec<Action>, target: String| {
            if !rng.gen_bool(self.p_skip) {
                actions.push(Action::Pick(target));
            }
        };
        match ep.track {
            Track::InAisleCollection => {
                for (leg, target) in collection_plan(grid, ep)? {
                    walk(&mut actions, &leg);
                    let extra = (self.detour - 1.0) * leg.steps.cost();
                    actions.extend(excursion(&leg.cells, extra).into_iter().map(Action::MoveTo));
                    maybe_pick(&mut actions, target);
                }
            }
            Track::CheckoutUnloading => {
                for id in unstack_order(ep) {
                    maybe_pick(&mut actions, id);
                }
            }
        }
        if actions.is_empty() {
            // every pick skipped and nothing to walk: stand still once
            if let Some(c) = grid.world_to_cell(ep.start.x, ep.start.y) {
                actions.push(Action::MoveTo(c));
            }
        }
        Ok(ActionTrace {
            episode_id: ep.episode_id.clone(),
            agent_id: self.id(),
            actions,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackSummary {
    pub episodes: usize,
    pub sr: f64,
    /// Absent where path efficiency is not defined.
    pub spl: Option<f64>,
    pub mean_pl: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub agent_id: String,
    /// Wall-clock time of the run; the only nondeterministic field.
    pub generated_at: String,
    pub config_hash: String,
    /// Scene seeds replaced because their layout could not be planned.
    #[serde(default)]
    pub skipped_seeds: Vec<u64>,
    pub scene_hashes: BTreeMap<String, String>,
    pub episode_set_hashes: BTreeMap<String, String>,
    pub tracks: BTreeMap<String, TrackSummary>,
    pub episodes: Vec<EpisodeResult>,
}

pub fn summarize(results: &[EpisodeResult]) -> Result<BTreeMap<String, TrackSummary>> {
    let mut out = BTreeMap::new();
    for track in Track::ALL {
        let rs: Vec<EpisodeResult> = results.iter().filter(|r| r.track == track).cloned().collect();
        if rs.is_empty() {
            continue;
        }
        let collection = track == Track::InAisleCollection;
        out.insert(
            track.as_str().to_string(),
            TrackSummary {
                episodes: rs.len(),
                sr: score_sr(&rs)?,
                spl: if collection { Some(score_spl(&rs)?) } else { None },
                mean_pl: if collection { Some(mean_path_length(&rs)?) } else { None },
            },
        );
    }
    Ok(out)
}

impl BenchmarkReport {
    /// Recomputes every aggregate from the per-episode entries.
    pub fn check_aggregates(&self) -> Result<()> {
        let again = summarize(&self.episodes)?;
        if again != self.tracks {
            return Err(Error::invalid("report aggregates disagree with its episode results"));
        }
        Ok(())
    }
}

/// Runs `agent` on every episode; results are ordered by episode id.
pub fn evaluate(
    scenes: &BTreeMap<String, (SceneGraph, OccupancyGrid)>,
    episodes: &[Episode],
    agent: &dyn Agent,
    profile: &RobotProfile,
) -> Result<Vec<EpisodeResult>> {
    let mut results: Vec<EpisodeResult> = episodes
        .par_iter()
        .map(|ep| {
            let (scene, grid) = scenes.get(&ep.scene_id).ok_or_else(|| {
                Error::invalid(format!("episode {} names unknown scene {}", ep.episode_id, ep.scene_id))
            })?;
            let trace = agent.act(scene, grid, ep)?;
            Ok(run_episode(scene, grid, ep, &trace, profile))
        })
        .collect::<Result<_>>()?;
    results.sort_by(|a, b| a.episode_id.cmp(&b.episode_id));
    Ok(results)
}
