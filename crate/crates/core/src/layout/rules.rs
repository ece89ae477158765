use std::fmt;

use serde::{Deserialize, Serialize};

use super::semantic::spec_row_plan;
use super::{classify_edge, Layout, RuleKind, StoreSpec, Wall};
use crate::facility::BACK_PANEL_THICKNESS;
use crate::geom::Rect;
use crate::packing::{best_row_axis, ZoneEdges, MIN_UNIT_LENGTH};

/// Narrowest shelf unit: the floor test used before a zone has a spec.
const MIN_UNIT_DEPTH: f64 = 0.3 + BACK_PANEL_THICKNESS;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: String,
    pub zone_id: Option<String>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.zone_id {
            Some(z) => write!(f, "{} [{z}]", self.rule),
            None => f.write_str(&self.rule),
        }
    }
}

/// Classifies each side of `region` against the store walls.
pub fn zone_edges(store: &StoreSpec, region: &Rect) -> ZoneEdges {
    ZoneEdges {
        x_lo: classify_edge(store, region.x0, Wall::W, (region.y0, region.y1)),
        x_hi: classify_edge(store, region.x1, Wall::E, (region.y0, region.y1)),
        y_lo: classify_edge(store, region.y0, Wall::S, (region.x0, region.x1)),
        y_hi: classify_edge(store, region.y1, Wall::N, (region.x0, region.x1)),
    }
}

fn touches_wall(store: &StoreSpec, r: &Rect) -> bool {
    let (w, d) = (store.footprint.width, store.footprint.depth);
    r.x0.abs() < 1e-6 || r.y0.abs() < 1e-6 || (r.x1 - w).abs() < 1e-6 || (r.y1 - d).abs() < 1e-6
}

fn adjoins_entrance(store: &StoreSpec, r: &Rect) -> bool {
    let e = store.entrance_segment();
    let (w, d) = (store.footprint.width, store.footprint.depth);
    let overlap = |a0: f64, a1: f64, b0: f64, b1: f64| a1.min(b1) - a0.max(b0) > 1e-6;
    match store.entrance.wall {
        Wall::S => r.y0.abs() < 1e-6 && overlap(r.x0, r.x1, e.x0, e.x1),
        Wall::N => (r.y1 - d).abs() < 1e-6 && overlap(r.x0, r.x1, e.x0, e.x1),
        Wall::W => r.x0.abs() < 1e-6 && overlap(r.y0, r.y1, e.y0, e.y1),
        Wall::E => (r.x1 - w).abs() < 1e-6 && overlap(r.y0, r.y1, e.y0, e.y1),
    }
}

/// Every violated hard rule of `layout`, in a stable order.
pub fn check_rules(layout: &Layout) -> Vec<Violation> {
    let store = &layout.store;
    let mut out = Vec::new();
    for rule in store.effective_rules() {
        let Some(z) = layout.zone_by_label(&rule.subject) else {
            out.push(Violation {
                rule: format!("{} (zone missing)", rule.describe()),
                zone_id: None,
            });
            continue;
        };
        let ok = match rule.kind {
            RuleKind::MustTouchWall => touches_wall(store, &z.region),
            RuleKind::MustAdjoinEntrance => adjoins_entrance(store, &z.region),
            RuleKind::MustAdjoin | RuleKind::MustNotAdjoin => {
                let adjoined = rule
                    .object
                    .as_deref()
                    .and_then(|o| layout.zone_by_label(o))
                    .is_some_and(|o| z.region.shared_edge_length(&o.region) > 1e-6);
                adjoined == (rule.kind == RuleKind::MustAdjoin)
            }
            RuleKind::MinAreaFraction => {
                z.region.area() / store.footprint_rect().area() + 1e-9 >= rule.value.unwrap_or(0.0)
            }
        };
        if !ok {
            out.push(Violation {
                rule: rule.describe(),
                zone_id: Some(z.id.clone()),
            });
        }
    }
    for z in &layout.zones {
        let fits = match &z.facility_spec {
            Some(spec) => spec_row_plan(store, &z.region, spec).is_some(),
            None => {
                let edges = zone_edges(store, &z.region);
                best_row_axis(
                    &z.region,
                    &edges,
                    2.0 * MIN_UNIT_DEPTH,
                    Some(MIN_UNIT_DEPTH),
                    MIN_UNIT_LENGTH,
                    store.min_aisle_width,
                )
                .is_some()
            }
        };
        if !fits {
            out.push(Violation {
                rule: format!("{} admits-row", z.label),
                zone_id: Some(z.id.clone()),
            });
        }
    }
    out
}
