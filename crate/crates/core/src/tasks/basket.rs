use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{Episode, RobotProfile, StartPose, Track};
use crate::canon::content_hash;
use crate::catalog::Dims;
use crate::error::{Error, Result};
use crate::geom::{Box3, Pose2, Rect, Yaw};
use crate::nav::Steps;
use crate::placement::SceneGraph;
use crate::rng::Rng;

pub const BASKET_DROP_RETRIES: u32 = 100;
/// Gap between the counter edge and the operator standing at it.
const OPERATOR_STANDOFF: f64 = 0.15;
const TOUCH: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasketItem {
    pub item_id: String,
    pub asset_id: String,
    /// Box in the basket frame: origin at the inner floor corner.
    pub bounds: Box3,
    /// Items this one rests on; empty for items on the basket floor.
    pub support_set: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasketStack {
    pub basket_id: String,
    pub counter_id: String,
    /// World pose of the basket center; the frame's x runs along `size.width`.
    pub pose: Pose2,
    pub size: Dims,
    pub items: Vec<BasketItem>,
    /// `(a, b)`: item a lies over item b.
    pub occlusion: Vec<(String, String)>,
}

fn plan_overlap(a: &Rect, b: &Rect) -> bool {
    a.x1.min(b.x1) - a.x0.max(b.x0) > TOUCH && a.y1.min(b.y1) - a.y0.max(b.y0) > TOUCH
}

impl BasketStack {
    pub fn empty(basket_id: &str, counter_id: &str, pose: Pose2, size: Dims) -> Self {
        BasketStack {
            basket_id: basket_id.to_string(),
            counter_id: counter_id.to_string(),
            pose,
            size,
            items: Vec::new(),
            occlusion: Vec::new(),
        }
    }

    pub fn item(&self, id: &str) -> Option<&BasketItem> {
        self.items.iter().find(|i| i.item_id == id)
    }

    /// Drops an item with its min corner at (x, y); it comes to rest on the
    /// highest top surface beneath its plan footprint.
    pub fn drop_at(&mut self, asset_id: &str, dims: Dims, x: f64, y: f64) -> Result<&BasketItem> {
        let plan = Rect::from_size(x, y, dims.width, dims.depth);
        if !Rect::new(0.0, 0.0, self.size.width, self.size.depth).contains_rect(&plan, 1e-9) {
            return Err(Error::invalid(format!(
                "item {asset_id} does not fit the basket floor at ({x}, {y})"
            )));
        }
        let below: Vec<&BasketItem> = self
            .items
            .iter()
            .filter(|i| plan_overlap(&i.bounds.plan(), &plan))
            .collect();
        let z = below.iter().map(|i| i.bounds.top()).fold(0.0, f64::max);
        let support_set = below
            .iter()
            .filter(|i| (i.bounds.top() - z).abs() <= TOUCH)
            .map(|i| i.item_id.clone())
            .collect();
        let id = format!("{}/item-{}", self.basket_id, self.items.len());
        for b in &below {
            self.occlusion.push((id.clone(), b.item_id.clone()));
        }
        self.occlusion.sort();
        self.items.push(BasketItem {
            item_id: id,
            asset_id: asset_id.to_string(),
            bounds: Box3::new(x, y, z, dims.width, dims.depth, dims.height),
            support_set,
        });
        Ok(self.items.last().unwrap())
    }

    /// Items lying over `id`.
    pub fn occluders_of<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.occlusion
            .iter()
            .filter(move |(_, b)| b == id)
            .map(|(a, _)| a.as_str())
    }

    /// World plan position of an item's center.
    pub fn item_world_center(&self, item: &BasketItem) -> (f64, f64) {
        let (cx, cy) = item.bounds.plan().center();
        self.pose.to_world((self.size.width, self.size.depth), cx, cy)
    }
}

/// Drops `n` items drawn from `assets` at uniform positions.
pub fn drop_items(stack: &mut BasketStack, assets: &[(&str, Dims)], n: usize, rng: &mut Rng) -> Result<()> {
    let (w, d) = (stack.size.width, stack.size.depth);
    for _ in 0..n {
        let mut placed = false;
        for _ in 0..BASKET_DROP_RETRIES {
            let Some(&(id, dims)) = assets.choose(rng) else {
                break;
            };
            if dims.width > w || dims.depth > d {
                continue;
            }
            let x = rng.gen_range(0.0..=w - dims.width);
            let y = rng.gen_range(0.0..=d - dims.depth);
            stack.drop_at(id, dims, x, y)?;
            placed = true;
            break;
        }
        if !placed {
            return Err(Error::SamplingFailed(format!(
                "no stocked asset fits basket {} in {BASKET_DROP_RETRIES} draws",
                stack.basket_id
            )));
        }
    }
    Ok(())
}

fn turn_around(y: Yaw) -> Yaw {
    match y {
        Yaw::D0 => Yaw::D180,
        Yaw::D90 => Yaw::D270,
        Yaw::D180 => Yaw::D0,
        Yaw::D270 => Yaw::D90,
    }
}

/// Fills one checkout basket with `n_items` goods stocked in the scene and
/// poses the operator in front of its counter.
pub fn sample_checkout_episode(
    scene: &SceneGraph,
    n_items: usize,
    rng: &mut Rng,
    profile: &RobotProfile,
    episode_id: &str,
) -> Result<(BasketStack, Episode)> {
    checkout_episode(scene, &content_hash(scene), n_items, rng, profile, episode_id)
}

pub(super) fn checkout_episode(
    scene: &SceneGraph,
    scene_hash: &str,
    n_items: usize,
    rng: &mut Rng,
    profile: &RobotProfile,
    episode_id: &str,
) -> Result<(BasketStack, Episode)> {
    if !(super::MIN_TARGETS..=super::MAX_TARGETS).contains(&n_items) {
        return Err(Error::invalid(format!("n_items must be in 2..=4, got {n_items}")));
    }
    let basket = scene
        .basket_zones
        .choose(rng)
        .ok_or_else(|| Error::SamplingFailed(format!("scene {} has no checkout basket", scene.scene_id)))?;
    let counter = scene
        .instance(&basket.counter_id)
        .ok_or_else(|| Error::SamplingFailed(format!("basket {} has no counter", basket.basket_id)))?;
    let yaw = counter.pose.yaw;
    let b = &basket.bounds;
    let (bw, bd) = if yaw.swaps_axes() { (b.d, b.w) } else { (b.w, b.d) };
    let (cx, cy) = b.plan().center();
    let mut stack = BasketStack::empty(
        &basket.basket_id,
        &basket.counter_id,
        Pose2 { x: cx, y: cy, yaw },
        Dims {
            width: bw,
            depth: bd,
            height: b.h,
        },
    );

    let mut stocked: BTreeMap<&str, Dims> = BTreeMap::new();
    for p in &scene.products {
        stocked.entry(p.asset_id.as_str()).or_insert(p.dims);
    }
    let assets: Vec<(&str, Dims)> = stocked.into_iter().collect();
    drop_items(&mut stack, &assets, n_items, rng)?;

    let (nx, ny) = yaw.rotate(0.0, -1.0);
    let off = counter.facility.footprint.depth * 0.5 + OPERATOR_STANDOFF;
    let start = StartPose {
        x: counter.pose.x + nx * off,
        y: counter.pose.y + ny * off,
        yaw: turn_around(yaw),
    };
    let far = stack
        .items
        .iter()
        .map(|i| {
            let (x, y) = stack.item_world_center(i);
            (x - start.x).hypot(y - start.y)
        })
        .fold(0.0, f64::max);
    if far > profile.reach {
        return Err(Error::SamplingFailed(format!(
            "basket {} lies {far:.3} m from the operator, beyond reach {}",
            stack.basket_id, profile.reach
        )));
    }
    let episode = Episode {
        episode_id: episode_id.to_string(),
        scene_id: scene.scene_id.clone(),
        scene_hash: scene_hash.to_string(),
        track: Track::CheckoutUnloading,
        start,
        targets: stack.items.iter().map(|i| i.item_id.clone()).collect(),
        reference_length: 0.0,
        reference_steps: Steps::default(),
        approach_points: Vec::new(),
        basket: Some(stack.clone()),
    };
    Ok((stack, episode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;
    use proptest::prelude::*;

    fn basket() -> BasketStack {
        let pose = Pose2 {
            x: 0.0,
            y: 0.0,
            yaw: Yaw::D0,
        };
        BasketStack::empty(
            "b",
            "c",
            pose,
            Dims {
                width: 0.45,
                depth: 0.30,
                height: 0.25,
            },
        )
    }

    const CUBE: Dims = Dims {
        width: 0.1,
        depth: 0.1,
        height: 0.1,
    };

    #[test]
    fn side_by_side_items_rest_on_floor() {
        let mut s = basket();
        s.drop_at("a", CUBE, 0.0, 0.0).unwrap();
        s.drop_at("b", CUBE, 0.2, 0.0).unwrap();
        assert!(s.items.iter().all(|i| i.bounds.z == 0.0 && i.support_set.is_empty()));
        assert!(s.occlusion.is_empty());
    }

    #[test]
    fn item_on_top_occludes() {
        let mut s = basket();
        s.drop_at("a", CUBE, 0.1, 0.1).unwrap();
        s.drop_at("b", CUBE, 0.12, 0.1).unwrap();
        assert_eq!(s.items[1].bounds.z, 0.1);
        assert_eq!(s.items[1].support_set, vec!["b/item-0".to_string()]);
        assert_eq!(s.occlusion, vec![("b/item-1".to_string(), "b/item-0".to_string())]);
    }

    #[test]
    fn oversize_asset_is_redrawn() {
        let big = Dims {
            width: 0.5,
            depth: 0.1,
            height: 0.1,
        };
        let mut s = basket();
        let mut rng = SeedStream::new(1).rng();
        drop_items(&mut s, &[("big", big), ("small", CUBE)], 3, &mut rng).unwrap();
        assert!(s.items.iter().all(|i| i.asset_id == "small"));
        let mut s = basket();
        assert!(drop_items(&mut s, &[("big", big)], 1, &mut rng).is_err());
    }

    proptest! {
        #[test]
        fn occlusion_matches_pairwise_geometry(seed in any::<u64>(), n in 2usize..=4) {
            let assets = [
                ("s", Dims { width: 0.12, depth: 0.10, height: 0.08 }),
                ("m", Dims { width: 0.20, depth: 0.15, height: 0.10 }),
                ("l", Dims { width: 0.30, depth: 0.20, height: 0.06 }),
            ];
            let mut s = basket();
            drop_items(&mut s, &assets, n, &mut SeedStream::new(seed).rng()).unwrap();
            let mut expect = Vec::new();
            for a in &s.items {
                for b in &s.items {
                    let (pa, pb) = (a.bounds.plan(), b.bounds.plan());
                    let ov = pa.x1.min(pb.x1) > pa.x0.max(pb.x0) + 1e-9 && pa.y1.min(pb.y1) > pa.y0.max(pb.y0) + 1e-9;
                    if ov && a.bounds.z > b.bounds.z {
                        expect.push((a.item_id.clone(), b.item_id.clone()));
                    }
                }
            }
            expect.sort();
            prop_assert_eq!(&s.occlusion, &expect);
            for (k, it) in s.items.iter().enumerate() {
                prop_assert_eq!(it.support_set.is_empty(), it.bounds.z == 0.0);
                for sup in &it.support_set {
                    let j = s.items.iter().position(|i| &i.item_id == sup).unwrap();
                    prop_assert!(j < k);
                }
            }
        }
    }
}
