use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{SceneGraph, PRODUCT_MARGIN, TOP_TIER_HEADROOM};
use crate::facility::SlotId;
use crate::geom::Rect;

/// Geometry tolerance: two contacting faces may each round by half a step
/// of the six-decimal canonical grid.
pub const TOL: f64 = 2e-6;

/// Outcome of the scene validity suite; each list holds human-readable
/// violations of one property.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidityReport {
    pub scene_id: String,
    pub overlaps: Vec<String>,
    pub containment: Vec<String>,
    pub aisles: Vec<String>,
    pub front_facing: Vec<String>,
    pub slot_addresses: Vec<String>,
}

impl ValidityReport {
    pub fn passed(&self) -> bool {
        self.overlaps.is_empty()
            && self.containment.is_empty()
            && self.aisles.is_empty()
            && self.front_facing.is_empty()
            && self.slot_addresses.is_empty()
    }

    pub fn violation_count(&self) -> usize {
        self.overlaps.len()
            + self.containment.len()
            + self.aisles.len()
            + self.front_facing.len()
            + self.slot_addresses.len()
    }
}

fn overlap_len(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    a1.min(b1) - a0.max(b0)
}

fn inside(outer: &Rect, inner: &Rect) -> bool {
    outer.contains_rect(inner, TOL)
}

/// (depth index, front-facing flag, product id) of each product in a column.
type ColumnEntries<'a> = Vec<(u32, bool, &'a str)>;

/// Runs every scene invariant with exhaustive (quadratic) pair checks.
pub fn validate_scene(scene: &SceneGraph, min_aisle: f64) -> ValidityReport {
    let mut rep = ValidityReport {
        scene_id: scene.scene_id.clone(),
        ..Default::default()
    };
    let store = &scene.layout.store;
    let footprint = store.footprint_rect();

    let mut boxes: Vec<(String, Rect)> = scene.walls.iter().map(|w| (w.id.clone(), w.bounds.plan())).collect();
    boxes.extend(scene.placed.iter().map(|p| (p.instance_id.clone(), p.footprint())));

    for (i, (ia, a)) in boxes.iter().enumerate() {
        for (ib, b) in &boxes[i + 1..] {
            let ox = overlap_len(a.x0, a.x1, b.x0, b.x1);
            let oy = overlap_len(a.y0, a.y1, b.y0, b.y1);
            if ox > TOL && oy > TOL {
                rep.overlaps.push(format!("{ia} overlaps {ib}"));
                continue;
            }
            // facing clearance: where two boxes face each other across a gap,
            // the gap is either closed (mounted together) or a full aisle
            for (shared, gap) in [(oy, -ox), (ox, -oy)] {
                if shared > TOL && gap > TOL && gap < min_aisle - TOL {
                    let between = if ox < 0.0 {
                        Rect::new(a.x1.min(b.x1), a.y0.max(b.y0), a.x0.max(b.x0), a.y1.min(b.y1))
                    } else {
                        Rect::new(a.x0.max(b.x0), a.y1.min(b.y1), a.x1.min(b.x1), a.y0.max(b.y0))
                    };
                    let blocked = boxes.iter().any(|(_, c)| c.intersection_area(&between) > TOL * TOL);
                    if !blocked {
                        rep.aisles.push(format!("{ia} and {ib} are {gap:.3} m apart"));
                    }
                }
            }
        }
    }

    let mut area = 0.0;
    for (i, z) in scene.layout.zones.iter().enumerate() {
        area += z.region.area();
        if !inside(&footprint, &z.region) || z.region.area() <= 0.0 {
            rep.containment
                .push(format!("zone {} outside footprint or empty", z.id));
        }
        for o in &scene.layout.zones[i + 1..] {
            if z.region.intersection_area(&o.region) > TOL {
                rep.containment.push(format!("zones {} and {} intersect", z.id, o.id));
            }
        }
    }
    if (area - footprint.area()).abs() > TOL * footprint.area() {
        rep.containment.push(format!(
            "zone areas sum to {area:.6}, footprint is {:.6}",
            footprint.area()
        ));
    }
    for w in &scene.walls {
        if !inside(&footprint, &w.bounds.plan()) {
            rep.containment.push(format!("{} outside footprint", w.id));
        }
    }
    for p in &scene.placed {
        match scene.layout.zone(&p.zone_id) {
            Some(z) if inside(&z.region, &p.footprint()) => {}
            Some(_) => rep
                .containment
                .push(format!("{} outside zone {}", p.instance_id, p.zone_id)),
            None => rep
                .containment
                .push(format!("{} names unknown zone {}", p.instance_id, p.zone_id)),
        }
    }
    for b in &scene.basket_zones {
        match scene.instance(&b.counter_id) {
            Some(c) if inside(&c.footprint(), &b.bounds.plan()) => {}
            _ => rep.containment.push(format!("{} not on its counter", b.basket_id)),
        }
    }

    // per-column grouping for front-facing checks
    let mut columns: BTreeMap<(&str, SlotId), ColumnEntries> = BTreeMap::new();
    for prod in &scene.products {
        let a = &prod.slot;
        let id = SlotId {
            side: a.side,
            tier: a.tier,
            column: a.column,
        };
        let Some(unit) = scene.instance(&a.instance_id) else {
            rep.slot_addresses.push(format!(
                "{}: unknown instance {}",
                prod.product_instance_id, a.instance_id
            ));
            continue;
        };
        let Some(slot) = unit.facility.slot(id) else {
            rep.slot_addresses
                .push(format!("{}: no slot {id:?}", prod.product_instance_id));
            continue;
        };
        let slot_box = unit.slot_world_box(slot);
        if !slot_box.contains(&prod.bounds, TOL) {
            rep.containment
                .push(format!("{} leaves its slot", prod.product_instance_id));
        }
        let headroom = slot.clearance.unwrap_or(TOP_TIER_HEADROOM);
        if prod.dims.width + 2.0 * PRODUCT_MARGIN > slot.surface.width() + TOL
            || prod.dims.height + PRODUCT_MARGIN > headroom + TOL
        {
            rep.containment
                .push(format!("{} violates the slot margin", prod.product_instance_id));
        }
        if prod.front_facing != (a.depth_index == 0) {
            rep.front_facing.push(format!(
                "{} front flag disagrees with depth index",
                prod.product_instance_id
            ));
        }
        columns.entry((a.instance_id.as_str(), id)).or_default().push((
            a.depth_index,
            prod.front_facing,
            prod.asset_id.as_str(),
        ));
    }
    for ((inst, id), mut items) in columns {
        items.sort();
        let fronts = items.iter().filter(|i| i.1).count();
        let contiguous = items.iter().enumerate().all(|(k, i)| i.0 == k as u32);
        let uniform = items.iter().all(|i| i.2 == items[0].2);
        if fronts != 1 || !items[0].1 || !contiguous || !uniform {
            rep.front_facing.push(format!(
                "{inst} {id:?}: {fronts} front-facing of {} (contiguous {contiguous}, uniform {uniform})",
                items.len()
            ));
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::synth_catalog;
    use crate::layout::StoreSpec;
    use crate::placement::generate_scene;

    #[test]
    fn generated_scene_passes_and_tampering_is_caught() {
        let cat = synth_catalog(6, 400, 30).unwrap();
        let spec = StoreSpec::default_store(6);
        let scene = generate_scene(&spec, &cat).unwrap();
        let rep = validate_scene(&scene, spec.min_aisle_width);
        assert!(rep.passed(), "{rep:#?}");

        let mut bad = scene.clone();
        let first = bad
            .placed
            .iter()
            .position(|p| p.role != crate::placement::UnitRole::Counter)
            .unwrap();
        let mut twin = bad.placed[first].clone();
        twin.instance_id.push_str("-twin");
        twin.pose.x += 0.1;
        bad.placed.push(twin);
        assert!(!validate_scene(&bad, spec.min_aisle_width).overlaps.is_empty());

        let mut bad = scene.clone();
        let k = bad.products.iter().position(|p| p.slot.depth_index == 1).unwrap();
        bad.products[k].front_facing = true;
        assert!(!validate_scene(&bad, spec.min_aisle_width).front_facing.is_empty());
    }
}
