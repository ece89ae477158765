use rand::seq::SliceRandom;

use super::{BasketInstance, PlacedInstance, SceneGraph, UnitRole, WallBox};
use crate::catalog::{query_facilities, Catalog, Dims, FacilityKind, CHECKOUT_LABEL};
use crate::error::{Error, Result};
use crate::facility::{assemble_fixed, COUNTER_DEPTH, COUNTER_HEIGHT, COUNTER_LENGTH};
use crate::geom::{Axis, Box3, Pose2, Rect, Yaw};
use crate::layout::{spec_row_plan, Layout, Wall, ZonePlan};
use crate::packing::WALL_THICKNESS;
use crate::rng::SeedStream;

pub const WALL_HEIGHT: f64 = 3.0;
pub const BASKET_SIZE: Dims = Dims {
    width: 0.45,
    depth: 0.30,
    height: 0.25,
};

/// Cuts `[a, b]` around the gap `[g0, g1]`.
fn minus_gap(a: f64, b: f64, gap: Option<(f64, f64)>) -> Vec<(f64, f64)> {
    let pieces = match gap {
        Some((g0, g1)) => vec![(a, g0.clamp(a, b)), (g1.clamp(a, b), b)],
        None => vec![(a, b)],
    };
    pieces.into_iter().filter(|(x, y)| y - x > 1e-9).collect()
}

fn perimeter(layout: &Layout) -> Vec<WallBox> {
    let store = &layout.store;
    let (w, d, t) = (store.footprint.width, store.footprint.depth, WALL_THICKNESS);
    let e = &store.entrance;
    let gap = |wall: Wall| (e.wall == wall).then_some((e.offset, e.offset + e.width));
    let mut out = Vec::new();
    for wall in [Wall::S, Wall::N, Wall::W, Wall::E] {
        let (a, b) = match wall {
            Wall::S | Wall::N => (0.0, w),
            Wall::W | Wall::E => (t, d - t),
        };
        for (k, (x0, x1)) in minus_gap(a, b, gap(wall)).into_iter().enumerate() {
            let plan = match wall {
                Wall::S => Rect::new(x0, 0.0, x1, t),
                Wall::N => Rect::new(x0, d - t, x1, d),
                Wall::W => Rect::new(0.0, x0, t, x1),
                Wall::E => Rect::new(w - t, x0, w, x1),
            };
            out.push(WallBox {
                id: format!("wall-{wall:?}-{k}"),
                wall,
                bounds: Box3::new(plan.x0, plan.y0, 0.0, plan.width(), plan.height(), WALL_HEIGHT),
            });
        }
    }
    out
}

/// Perimeter walls with the entrance gap, checkout counters packed into the
/// checkout zone, and one basket on each counter.
pub fn place_framework(layout: &Layout, catalog: &Catalog, seeds: &SeedStream) -> Result<SceneGraph> {
    let mut scene = SceneGraph {
        scene_id: String::new(),
        seed: layout.store.seed,
        catalog_version: catalog.version.clone(),
        layout: layout.clone(),
        walls: perimeter(layout),
        placed: Vec::new(),
        products: Vec::new(),
        basket_zones: Vec::new(),
    };

    let zone = layout
        .zone_by_label(CHECKOUT_LABEL)
        .ok_or_else(|| Error::GenerationFailed("layout has no checkout zone".into()))?;
    let spec = zone
        .facility_spec
        .as_ref()
        .ok_or_else(|| Error::GenerationFailed(format!("checkout zone {} has no facility spec", zone.id)))?;
    let Some(ZonePlan::Counters(plan)) = spec_row_plan(&layout.store, &zone.region, spec) else {
        return Err(Error::GenerationFailed(format!(
            "checkout zone {} ({:.2} x {:.2} m) cannot fit one counter",
            zone.id,
            zone.region.width(),
            zone.region.height()
        )));
    };
    let template = catalog
        .facility(&spec.template_id)
        .ok_or_else(|| Error::GenerationFailed(format!("template {} not in catalog", spec.template_id)))?;
    let baskets: Vec<_> = query_facilities(catalog, CHECKOUT_LABEL)
        .into_iter()
        .filter(|t| t.kind == FacilityKind::Basket)
        .collect();
    let mut rng = seeds.rng();
    let basket_template = baskets
        .choose(&mut rng)
        .ok_or_else(|| Error::GenerationFailed("catalog has no basket template".into()))?;

    for (k, &start) in plan.starts.iter().enumerate() {
        let (rect, yaw) = match plan.lane_axis {
            Axis::X => (
                Rect::from_size(plan.along_start, start, COUNTER_LENGTH, COUNTER_DEPTH),
                Yaw::D0,
            ),
            Axis::Y => (
                Rect::from_size(start, plan.along_start, COUNTER_DEPTH, COUNTER_LENGTH),
                Yaw::D90,
            ),
        };
        let id = format!("{}/counter-{k:02}", zone.id);
        let (cx, cy) = rect.center();
        let (bw, bd) = match plan.lane_axis {
            Axis::X => (BASKET_SIZE.width, BASKET_SIZE.depth),
            Axis::Y => (BASKET_SIZE.depth, BASKET_SIZE.width),
        };
        scene.basket_zones.push(BasketInstance {
            basket_id: format!("{id}/basket"),
            counter_id: id.clone(),
            template_id: basket_template.id.clone(),
            bounds: Box3::new(cx - bw * 0.5, cy - bd * 0.5, COUNTER_HEIGHT, bw, bd, BASKET_SIZE.height),
        });
        scene.placed.push(PlacedInstance {
            instance_id: id.clone(),
            facility: assemble_fixed(template, &id)?,
            pose: Pose2 { x: cx, y: cy, yaw },
            zone_id: zone.id.clone(),
            role: UnitRole::Counter,
        });
    }
    Ok(scene)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::synth_catalog;
    use crate::layout::{plan_semantic, BspNode, BspTree, Entrance, HeuristicBackend, Size2, StoreSpec, ZoneRequest};
    use crate::packing::rows_that_fit;

    fn one_zone_layout(w: f64, d: f64) -> Layout {
        let store = StoreSpec {
            footprint: Size2 { width: w, depth: d },
            entrance: Entrance {
                wall: Wall::S,
                offset: 0.0,
                width: w.min(2.0),
            },
            zone_requests: vec![ZoneRequest {
                label: CHECKOUT_LABEL.into(),
                fraction: 1.0,
            }],
            adjacency_rules: vec![],
            min_aisle_width: 1.4,
            seed: 3,
        };
        let tree = BspTree {
            nodes: vec![BspNode {
                region: store.footprint_rect(),
                split: None,
                children: None,
                label: Some(CHECKOUT_LABEL.into()),
                zone_id: Some("zone-00".into()),
            }],
        };
        let cat = synth_catalog(3, 100, 10).unwrap();
        let zones = plan_semantic(&tree, &store, &cat, &HeuristicBackend).unwrap();
        Layout {
            store,
            tree,
            zones,
            refine_log: vec![],
        }
    }

    #[test]
    fn south_wall_has_single_two_meter_gap() {
        let mut layout = one_zone_layout(20.0, 10.0);
        layout.store.entrance = Entrance {
            wall: Wall::S,
            offset: 6.0,
            width: 2.0,
        };
        let walls = perimeter(&layout);
        let mut south: Vec<(f64, f64)> = walls
            .iter()
            .filter(|w| w.wall == Wall::S)
            .map(|w| (w.bounds.x, w.bounds.x + w.bounds.w))
            .collect();
        south.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(south, vec![(0.0, 6.0), (8.0, 20.0)]);
        for wall in [Wall::N, Wall::E, Wall::W] {
            assert_eq!(walls.iter().filter(|w| w.wall == wall).count(), 1);
        }
    }

    #[test]
    fn counter_count_matches_packing_arithmetic() {
        // counters stack across x with 1.4 m lanes; the usable band is the
        // width minus a full aisle plus wall on both walls
        let cat = synth_catalog(3, 100, 10).unwrap();
        let layout = one_zone_layout(8.4, 6.0);
        let band: f64 = 8.4 - 2.0 * (0.1 + 1.4);
        let mut expect = 0;
        while (expect + 1) as f64 * 0.8 + expect as f64 * 1.4 <= band + 1e-9 {
            expect += 1;
        }
        assert_eq!(expect, 3);
        assert_eq!(rows_that_fit(band, 0.8, 1.4), 3);
        let scene = place_framework(&layout, &cat, &SeedStream::new(1)).unwrap();
        assert_eq!(scene.placed.len(), 3);
        assert_eq!(scene.basket_zones.len(), 3);
        for b in &scene.basket_zones {
            let c = scene.placed.iter().find(|p| p.instance_id == b.counter_id).unwrap();
            assert!(c.footprint().contains_rect(&b.bounds.plan(), 1e-9));
        }
    }

    #[test]
    fn tiny_checkout_zone_fails() {
        let cat = synth_catalog(3, 100, 10).unwrap();
        let layout = one_zone_layout(1.0, 1.0);
        match place_framework(&layout, &cat, &SeedStream::new(1)) {
            Err(Error::GenerationFailed(msg)) => assert!(msg.contains("zone-00")),
            other => panic!("expected failure, got {other:?}"),
        }
    }
}
