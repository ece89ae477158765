//! Episode sampling for the two benchmark tracks.

mod basket;
mod validate;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::canon::{canonicalize, content_hash};
use crate::error::{Error, Result};
use crate::geom::Yaw;
use crate::layout::Wall;
use crate::nav::{astar, reachable_mask, Cell, GridPath, OccupancyGrid, Steps, DEFAULT_ROBOT_RADIUS};
use crate::placement::{ProductPlacement, SceneGraph};
use crate::rng::Rng;

pub use basket::{drop_items, sample_checkout_episode, BasketItem, BasketStack, BASKET_DROP_RETRIES};
pub use validate::{validate_episode, EpisodeCheck};

pub const DEFAULT_REACH: f64 = 0.85;
pub const SAMPLE_RETRIES: u32 = 100;
pub const MIN_TARGETS: usize = 2;
pub const MAX_TARGETS: usize = 4;
/// Distance of the entrance anchor outside the opening.
pub const ENTRANCE_STANDOFF: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotProfile {
    pub radius: f64,
    pub reach: f64,
}

impl Default for RobotProfile {
    fn default() -> Self {
        RobotProfile {
            radius: DEFAULT_ROBOT_RADIUS,
            reach: DEFAULT_REACH,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Track {
    CheckoutUnloading,
    InAisleCollection,
}

impl Track {
    pub const ALL: [Track; 2] = [Track::InAisleCollection, Track::CheckoutUnloading];

    pub fn as_str(self) -> &'static str {
        match self {
            Track::CheckoutUnloading => "checkout-unloading",
            Track::InAisleCollection => "in-aisle-collection",
        }
    }

    pub fn parse(s: &str) -> Option<Track> {
        Track::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StartPose {
    pub x: f64,
    pub y: f64,
    pub yaw: Yaw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub episode_id: String,
    pub scene_id: String,
    /// Content hash of the scene the episode was sampled in.
    pub scene_hash: String,
    pub track: Track,
    pub start: StartPose,
    /// Product instance ids (collection) or basket item ids (checkout).
    pub targets: Vec<String>,
    /// Optimal open-tour length in meters; zero on the checkout track.
    pub reference_length: f64,
    pub reference_steps: Steps,
    /// One free cell per target, parallel to `targets`.
    pub approach_points: Vec<Cell>,
    pub basket: Option<BasketStack>,
}

/// Point a picker reaches for: the center of the product's aisle face, and
/// the outward unit normal of that face.
pub fn front_face(p: &ProductPlacement) -> ((f64, f64), (f64, f64)) {
    let (nx, ny) = p.pose.yaw.rotate(0.0, -1.0);
    let half = p.dims.depth * 0.5;
    ((p.pose.x + nx * half, p.pose.y + ny * half), (nx, ny))
}

/// Point just outside the entrance, the root of the walkable component.
pub fn entrance_anchor(scene: &SceneGraph) -> (f64, f64) {
    let store = &scene.layout.store;
    let e = store.entrance_segment();
    let (mx, my) = e.center();
    match store.entrance.wall {
        Wall::S => (mx, -ENTRANCE_STANDOFF),
        Wall::N => (mx, my + ENTRANCE_STANDOFF),
        Wall::W => (-ENTRANCE_STANDOFF, my),
        Wall::E => (mx + ENTRANCE_STANDOFF, my),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    /// Visiting order as indices into the point list.
    pub order: Vec<usize>,
    pub steps: Steps,
    pub length: f64,
    /// One path per leg, in visiting order.
    pub legs: Vec<GridPath>,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out.sort();
    out
}

fn reversed(p: &GridPath) -> GridPath {
    let mut q = p.clone();
    q.cells.reverse();
    q
}

/// Shortest open tour from `start` through every point, by exhaustive
/// search over visiting orders. `None` if some point is unreachable.
pub fn optimal_tour(grid: &OccupancyGrid, start: Cell, points: &[Cell]) -> Option<Tour> {
    let n = points.len();
    let from_start: Vec<GridPath> = points.iter().map(|&p| astar(grid, start, p)).collect::<Option<_>>()?;
    let mut between = vec![vec![None; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let p = astar(grid, points[i], points[j])?;
            between[j][i] = Some(reversed(&p));
            between[i][j] = Some(p);
        }
        between[i][i] = Some(crate::nav::path_from_cells(vec![points[i]], grid.cell_size));
    }
    let leg = |prev: Option<usize>, next: usize| match prev {
        None => &from_start[next],
        Some(i) => between[i][next].as_ref().unwrap(),
    };
    let mut best: Option<(f64, Vec<usize>, Steps)> = None;
    for order in permutations(n) {
        let mut steps = Steps::default();
        let mut prev = None;
        for &k in &order {
            steps += leg(prev, k).steps;
            prev = Some(k);
        }
        if best.as_ref().is_none_or(|b| steps.cost() < b.0) {
            best = Some((steps.cost(), order, steps));
        }
    }
    let (_, order, steps) = best?;
    let mut legs = Vec::with_capacity(n);
    let mut prev = None;
    for &k in &order {
        legs.push(leg(prev, k).clone());
        prev = Some(k);
    }
    Some(Tour {
        order,
        steps,
        length: steps.meters(grid.cell_size),
        legs,
    })
}

/// Per-scene sampling state: the walkable component reachable from the
/// entrance and every front-facing product that can be approached from it.
pub struct CollectionSampler<'a> {
    scene: &'a SceneGraph,
    scene_hash: String,
    grid: &'a OccupancyGrid,
    starts: Vec<Cell>,
    candidates: Vec<(usize, Cell)>,
}

impl<'a> CollectionSampler<'a> {
    pub fn new(scene: &'a SceneGraph, grid: &'a OccupancyGrid, profile: &RobotProfile) -> Self {
        Self::with_hash(scene, content_hash(scene), grid, profile)
    }

    /// As `new`, with the scene's content hash already known.
    pub fn with_hash(
        scene: &'a SceneGraph,
        scene_hash: String,
        grid: &'a OccupancyGrid,
        profile: &RobotProfile,
    ) -> Self {
        let (ax, ay) = entrance_anchor(scene);
        let mask = match grid.world_to_cell(ax, ay) {
            Some(c) => reachable_mask(grid, c),
            None => vec![false; grid.len()],
        };
        let footprint = scene.layout.store.footprint_rect();
        let starts = (0..grid.len())
            .filter(|&i| mask[i])
            .map(|i| grid.cell_at(i))
            .filter(|&c| {
                let (x, y) = grid.cell_center(c);
                footprint.contains_point(x, y)
            })
            .collect();
        let candidates = scene
            .products
            .iter()
            .enumerate()
            .filter(|(_, p)| p.front_facing)
            .filter_map(|(i, p)| approach_cell(grid, &mask, p, profile.reach).map(|c| (i, c)))
            .collect();
        CollectionSampler {
            scene,
            scene_hash,
            grid,
            starts,
            candidates,
        }
    }

    pub fn start_cells(&self) -> &[Cell] {
        &self.starts
    }

    pub fn candidate_count(&self) -> usize {
        self.candidates.len()
    }

    pub fn sample(&self, rng: &mut Rng, n_targets: usize, episode_id: &str) -> Result<Episode> {
        if !(MIN_TARGETS..=MAX_TARGETS).contains(&n_targets) {
            return Err(Error::invalid(format!(
                "n_targets must be in {MIN_TARGETS}..={MAX_TARGETS}, got {n_targets}"
            )));
        }
        let fail = |why: &str| Error::SamplingFailed(format!("scene {}: {why} for {episode_id}", self.scene.scene_id));
        if self.starts.is_empty() {
            return Err(fail("no walkable cell is reachable from the entrance"));
        }
        if self.candidates.len() < n_targets {
            return Err(fail(&format!(
                "{} reachable front-facing products, {n_targets} targets requested",
                self.candidates.len()
            )));
        }
        for _ in 0..SAMPLE_RETRIES {
            let start = *self.starts.choose(rng).unwrap();
            let yaw = [Yaw::D0, Yaw::D90, Yaw::D180, Yaw::D270][rng.gen_range(0..4)];
            let picks: Vec<&(usize, Cell)> = self.candidates.choose_multiple(rng, n_targets).collect();
            let points: Vec<Cell> = picks.iter().map(|p| p.1).collect();
            let Some(tour) = optimal_tour(self.grid, start, &points) else {
                continue;
            };
            let (x, y) = self.grid.cell_center(start);
            return Ok(Episode {
                episode_id: episode_id.to_string(),
                scene_id: self.scene.scene_id.clone(),
                scene_hash: self.scene_hash.clone(),
                track: Track::InAisleCollection,
                start: StartPose { x, y, yaw },
                targets: picks
                    .iter()
                    .map(|p| self.scene.products[p.0].product_instance_id.clone())
                    .collect(),
                reference_length: tour.length,
                reference_steps: tour.steps,
                approach_points: points,
                basket: None,
            });
        }
        Err(fail(&format!("no solvable draw in {SAMPLE_RETRIES} attempts")))
    }
}

/// Nearest walkable cell within reach of the product's aisle face, on the
/// aisle side of it.
fn approach_cell(grid: &OccupancyGrid, mask: &[bool], p: &ProductPlacement, reach: f64) -> Option<Cell> {
    let ((fx, fy), (nx, ny)) = front_face(p);
    let s = grid.cell_size;
    let lo = grid.world_to_cell(fx - reach, fy - reach).unwrap_or(Cell::new(0, 0));
    let hi = grid
        .world_to_cell(fx + reach, fy + reach)
        .unwrap_or(Cell::new(grid.width - 1, grid.height - 1));
    let mut best: Option<(f64, Cell)> = None;
    for y in lo.y..=hi.y {
        for x in lo.x..=hi.x {
            let c = Cell::new(x, y);
            if !mask[grid.index(c)] {
                continue;
            }
            let (cx, cy) = grid.cell_center(c);
            let (dx, dy) = (cx - fx, cy - fy);
            let d = dx.hypot(dy);
            if d <= reach - 1e-9 && dx * nx + dy * ny > 0.5 * s && best.is_none_or(|b| d < b.0) {
                best = Some((d, c));
            }
        }
    }
    best.map(|b| b.1)
}

/// Convenience wrapper sampling one collection episode.
pub fn sample_collection_episode(
    scene: &SceneGraph,
    grid: &OccupancyGrid,
    n_targets: usize,
    rng: &mut Rng,
    profile: &RobotProfile,
    episode_id: &str,
) -> Result<Episode> {
    CollectionSampler::new(scene, grid, profile).sample(rng, n_targets, episode_id)
}

/// `count` episodes of one track for one scene, drawn in order from a single
/// stream; target counts are uniform over 2..=4. Episodes come back in
/// canonical form.
pub fn sample_episodes(
    scene: &SceneGraph,
    grid: &OccupancyGrid,
    track: Track,
    count: usize,
    rng: &mut Rng,
    profile: &RobotProfile,
) -> Result<Vec<Episode>> {
    sample_episodes_hashed(scene, &content_hash(scene), grid, track, count, rng, profile)
}

/// As `sample_episodes`, with the scene's content hash already known.
pub fn sample_episodes_hashed(
    scene: &SceneGraph,
    scene_hash: &str,
    grid: &OccupancyGrid,
    track: Track,
    count: usize,
    rng: &mut Rng,
    profile: &RobotProfile,
) -> Result<Vec<Episode>> {
    let mut out = Vec::with_capacity(count);
    let sampler = (track == Track::InAisleCollection)
        .then(|| CollectionSampler::with_hash(scene, scene_hash.to_string(), grid, profile));
    let prefix = match track {
        Track::InAisleCollection => "collection",
        Track::CheckoutUnloading => "checkout",
    };
    for k in 0..count {
        let n = rng.gen_range(MIN_TARGETS..=MAX_TARGETS);
        let id = format!("{}/{prefix}-{k:03}", scene.scene_id);
        let ep = match &sampler {
            Some(s) => s.sample(rng, n, &id)?,
            None => basket::checkout_episode(scene, scene_hash, n, rng, profile, &id)?.1,
        };
        out.push(canonicalize(&ep)?);
    }
    Ok(out)
}
