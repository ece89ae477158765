use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{Episode, RobotProfile, Track, MAX_TARGETS, MIN_TARGETS};
use crate::nav::{Cell, OccupancyGrid};
use crate::placement::SceneGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeCheck {
    pub episode_id: String,
    pub passed: bool,
    pub reasons: Vec<String>,
}

/// Flood fill over free cells from `start`, stopping early once every goal
/// has been seen. Returns which goals were reached.
fn connected(grid: &OccupancyGrid, start: Cell, goals: &[Cell]) -> Vec<bool> {
    let w = grid.width as i64;
    let h = grid.height as i64;
    let free = |x: i64, y: i64| x >= 0 && y >= 0 && x < w && y < h && grid.free(Cell::new(x as u32, y as u32));
    let mut seen = vec![false; grid.len()];
    let mut hit = vec![false; goals.len()];
    if !free(i64::from(start.x), i64::from(start.y)) {
        return hit;
    }
    let mut left = goals.len();
    seen[grid.index(start)] = true;
    let mut queue = VecDeque::from([(i64::from(start.x), i64::from(start.y))]);
    while let Some((x, y)) = queue.pop_front() {
        for (k, g) in goals.iter().enumerate() {
            if !hit[k] && i64::from(g.x) == x && i64::from(g.y) == y {
                hit[k] = true;
                left -= 1;
            }
        }
        if left == 0 {
            break;
        }
        for dy in -1..=1 {
            for dx in -1..=1 {
                if (dx, dy) == (0, 0) || !free(x + dx, y + dy) {
                    continue;
                }
                if dx != 0 && dy != 0 && !(free(x + dx, y) && free(x, y + dy)) {
                    continue;
                }
                let i = ((y + dy) * w + x + dx) as usize;
                if !seen[i] {
                    seen[i] = true;
                    queue.push_back((x + dx, y + dy));
                }
            }
        }
    }
    hit
}

/// Re-derives both solvability conditions from the scene and grid: every
/// target is reachable from the start, and every target is graspable.
pub fn validate_episode(
    episode: &Episode,
    scene: &SceneGraph,
    grid: &OccupancyGrid,
    profile: &RobotProfile,
) -> EpisodeCheck {
    let mut reasons = Vec::new();
    let n = episode.targets.len();
    if !(MIN_TARGETS..=MAX_TARGETS).contains(&n) {
        reasons.push(format!("{n} targets, expected {MIN_TARGETS} to {MAX_TARGETS}"));
    }
    if episode.targets.iter().collect::<BTreeSet<_>>().len() != n {
        reasons.push("duplicate targets".into());
    }
    if episode.scene_id != scene.scene_id {
        reasons.push(format!(
            "episode is for scene {}, not {}",
            episode.scene_id, scene.scene_id
        ));
    }
    match episode.track {
        Track::InAisleCollection => check_collection(episode, scene, grid, profile, &mut reasons),
        Track::CheckoutUnloading => check_checkout(episode, scene, profile, &mut reasons),
    }
    EpisodeCheck {
        episode_id: episode.episode_id.clone(),
        passed: reasons.is_empty(),
        reasons,
    }
}

fn check_collection(
    ep: &Episode,
    scene: &SceneGraph,
    grid: &OccupancyGrid,
    profile: &RobotProfile,
    reasons: &mut Vec<String>,
) {
    if ep.approach_points.len() != ep.targets.len() {
        reasons.push("approach points do not match targets".into());
        return;
    }
    let start = match grid.world_to_cell(ep.start.x, ep.start.y) {
        Some(c) if grid.free(c) => c,
        _ => {
            reasons.push(format!(
                "start ({:.3}, {:.3}) is not a free cell",
                ep.start.x, ep.start.y
            ));
            return;
        }
    };
    let reached = connected(grid, start, &ep.approach_points);
    for ((target, cell), ok) in ep.targets.iter().zip(&ep.approach_points).zip(reached) {
        if !ok {
            reasons.push(format!("no collision-free path to the approach cell of {target}"));
        }
        let Some(p) = scene.products.iter().find(|p| &p.product_instance_id == target) else {
            reasons.push(format!("target {target} is not in the scene"));
            continue;
        };
        if !p.front_facing || p.slot.depth_index != 0 {
            reasons.push(format!("target {target} is not on the front-facing layer"));
        }
        // distance to the aisle face, measured from the approach cell center
        let (nx, ny) = p.pose.yaw.rotate(0.0, -1.0);
        let fx = p.pose.x + nx * p.dims.depth * 0.5;
        let fy = p.pose.y + ny * p.dims.depth * 0.5;
        let (cx, cy) = grid.cell_center(*cell);
        if (cx - fx).hypot(cy - fy) > profile.reach + 1e-9 {
            reasons.push(format!("target {target} is out of reach from its approach cell"));
        }
        if (cx - fx) * nx + (cy - fy) * ny <= 0.0 {
            reasons.push(format!("approach cell of {target} is behind the shelf face"));
        }
    }
}

fn check_checkout(ep: &Episode, scene: &SceneGraph, profile: &RobotProfile, reasons: &mut Vec<String>) {
    let Some(stack) = &ep.basket else {
        reasons.push("checkout episode without a basket".into());
        return;
    };
    if !scene.basket_zones.iter().any(|b| b.basket_id == stack.basket_id) {
        reasons.push(format!("basket {} is not in the scene", stack.basket_id));
    }
    let ids: BTreeSet<&str> = stack.items.iter().map(|i| i.item_id.as_str()).collect();
    if ep.targets.iter().map(String::as_str).collect::<BTreeSet<_>>() != ids {
        reasons.push("targets are not exactly the basket items".into());
    }
    for (k, it) in stack.items.iter().enumerate() {
        let b = &it.bounds;
        if b.x < -1e-9 || b.y < -1e-9 || b.x + b.w > stack.size.width + 1e-9 || b.y + b.d > stack.size.depth + 1e-9 {
            reasons.push(format!("{} sticks out of the basket", it.item_id));
        }
        if (b.z > 1e-9) == it.support_set.is_empty() {
            reasons.push(format!("{} floats or is wrongly supported", it.item_id));
        }
        // supports must come earlier, which keeps the graph acyclic
        for s in &it.support_set {
            match stack.items[..k].iter().find(|o| &o.item_id == s) {
                Some(o) if (o.bounds.z + o.bounds.h - b.z).abs() < 1e-6 => {}
                _ => reasons.push(format!("{} rests on {s}, which is not directly beneath it", it.item_id)),
            }
        }
        let (cx, cy) = b.plan().center();
        let (wx, wy) = stack.pose.to_world((stack.size.width, stack.size.depth), cx, cy);
        if (wx - ep.start.x).hypot(wy - ep.start.y) > profile.reach + 1e-9 {
            reasons.push(format!("{} is out of reach of the operator", it.item_id));
        }
    }
}
