//! Store layout planning: BSP partition into functional zones, per-zone
//! facility specification, and a rule-driven refinement loop. Proposals come
//! from a pluggable [`PlannerBackend`]; the engine validates and executes them.

mod backend;
mod bsp;
mod refine;
pub mod remote;
mod rules;
mod semantic;
mod svg;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::catalog::{FacilityKind, CHECKOUT_LABEL};
use crate::error::{Error, Result};
use crate::facility::ShelfParams;
use crate::geom::{Axis, Rect};
use crate::packing::{EdgeKind, ZoneEdges};

pub use backend::{FacilityProposal, HeuristicBackend, PlannerBackend, SplitProposal};
pub use bsp::{plan_spatial, RATIO_STEP};
pub use refine::{reflect_refine, DEFAULT_MAX_ITERS};
pub use rules::{check_rules, zone_edges, Violation};
pub use semantic::{plan_semantic, spec_row_plan, ZonePlan};
pub(crate) use svg::{escape, px, zone_fill};
pub use svg::{render_layout_svg, PX_PER_M};

/// Proposals rejected this many times in a row abort planning.
pub const PROPOSAL_RETRIES: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Wall {
    N,
    S,
    E,
    W,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Size2 {
    pub width: f64,
    pub depth: f64,
}

/// Opening in one perimeter wall. `offset` runs from the wall's low end
/// (x for N/S walls, y for E/W walls).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entrance {
    pub wall: Wall,
    pub offset: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneRequest {
    pub label: String,
    pub fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    MustTouchWall,
    MustAdjoinEntrance,
    MustAdjoin,
    MustNotAdjoin,
    MinAreaFraction,
}

impl RuleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleKind::MustTouchWall => "must-touch-wall",
            RuleKind::MustAdjoinEntrance => "must-adjoin-entrance",
            RuleKind::MustAdjoin => "must-adjoin",
            RuleKind::MustNotAdjoin => "must-not-adjoin",
            RuleKind::MinAreaFraction => "min-area-fraction",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub kind: RuleKind,
    pub subject: String,
    /// Other zone label for adjacency rules.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object: Option<String>,
    /// Threshold for `min-area-fraction`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

impl Rule {
    pub fn new(kind: RuleKind, subject: &str) -> Self {
        Rule {
            kind,
            subject: subject.to_string(),
            object: None,
            value: None,
        }
    }

    pub fn with_object(kind: RuleKind, subject: &str, object: &str) -> Self {
        Rule {
            object: Some(object.to_string()),
            ..Rule::new(kind, subject)
        }
    }

    pub fn describe(&self) -> String {
        match (&self.object, self.value) {
            (Some(o), _) => format!("{} {} {o}", self.subject, self.kind.as_str()),
            (None, Some(v)) => format!("{} {} {v}", self.subject, self.kind.as_str()),
            _ => format!("{} {}", self.subject, self.kind.as_str()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreSpec {
    pub footprint: Size2,
    pub entrance: Entrance,
    pub zone_requests: Vec<ZoneRequest>,
    #[serde(default)]
    pub adjacency_rules: Vec<Rule>,
    pub min_aisle_width: f64,
    pub seed: u64,
}

impl StoreSpec {
    pub fn footprint_rect(&self) -> Rect {
        Rect::new(0.0, 0.0, self.footprint.width, self.footprint.depth)
    }

    pub fn wall_length(&self, wall: Wall) -> f64 {
        match wall {
            Wall::N | Wall::S => self.footprint.width,
            Wall::E | Wall::W => self.footprint.depth,
        }
    }

    /// The entrance opening as a degenerate rectangle on its wall line.
    pub fn entrance_segment(&self) -> Rect {
        let e = &self.entrance;
        let (w, d) = (self.footprint.width, self.footprint.depth);
        match e.wall {
            Wall::S => Rect::new(e.offset, 0.0, e.offset + e.width, 0.0),
            Wall::N => Rect::new(e.offset, d, e.offset + e.width, d),
            Wall::W => Rect::new(0.0, e.offset, 0.0, e.offset + e.width),
            Wall::E => Rect::new(w, e.offset, w, e.offset + e.width),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (w, d) = (self.footprint.width, self.footprint.depth);
        if !(w > 0.0 && d > 0.0 && w.is_finite() && d.is_finite()) {
            return Err(Error::invalid("footprint must be positive"));
        }
        if !(self.min_aisle_width > 0.0) {
            return Err(Error::invalid("min_aisle_width must be positive"));
        }
        if self.zone_requests.is_empty() {
            return Err(Error::invalid("at least one zone request is required"));
        }
        let mut labels = BTreeSet::new();
        let mut sum = 0.0;
        for r in &self.zone_requests {
            if !(r.fraction > 0.0) {
                return Err(Error::invalid(format!("zone {} fraction must be > 0", r.label)));
            }
            if !labels.insert(r.label.as_str()) {
                return Err(Error::invalid(format!("duplicate zone label {}", r.label)));
            }
            sum += r.fraction;
        }
        if !(0.9 - 1e-9..=1.0 + 1e-9).contains(&sum) {
            return Err(Error::invalid(format!(
                "zone fractions must sum to [0.9, 1.0], got {sum:.4}"
            )));
        }
        let checkouts = self.zone_requests.iter().filter(|r| r.label == CHECKOUT_LABEL).count();
        if checkouts != 1 {
            return Err(Error::invalid(format!(
                "exactly one checkout request required, got {checkouts}"
            )));
        }
        let e = &self.entrance;
        if !(e.width > 0.0 && e.offset >= 0.0 && e.offset + e.width <= self.wall_length(e.wall) + 1e-9) {
            return Err(Error::invalid("entrance must lie within its wall"));
        }
        for rule in &self.adjacency_rules {
            if !labels.contains(rule.subject.as_str()) {
                return Err(Error::invalid(format!(
                    "rule subject {} is not a requested zone",
                    rule.subject
                )));
            }
            match rule.kind {
                RuleKind::MustAdjoin | RuleKind::MustNotAdjoin if rule.object.is_none() => {
                    return Err(Error::invalid(format!("{:?} rule needs an object label", rule.kind)));
                }
                RuleKind::MinAreaFraction if rule.value.is_none() => {
                    return Err(Error::invalid("min-area-fraction rule needs a value"));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Declared rules plus the built-in hard rules (checkout at the entrance,
    /// chilled zones on a wall).
    pub fn effective_rules(&self) -> Vec<Rule> {
        let mut rules = self.adjacency_rules.clone();
        let requested = |l: &str| self.zone_requests.iter().any(|r| r.label == l);
        let mut push = |r: Rule| {
            if !rules.contains(&r) {
                rules.push(r);
            }
        };
        push(Rule::new(RuleKind::MustAdjoinEntrance, CHECKOUT_LABEL));
        for chilled in ["frozen", "dairy"] {
            if requested(chilled) {
                push(Rule::new(RuleKind::MustTouchWall, chilled));
            }
        }
        rules
    }

    pub fn fraction_of(&self, label: &str) -> Option<f64> {
        self.zone_requests.iter().find(|r| r.label == label).map(|r| r.fraction)
    }

    /// A representative mid-size store used by the CLI when no spec is given.
    pub fn default_store(seed: u64) -> StoreSpec {
        let req = |label: &str, fraction: f64| ZoneRequest {
            label: label.to_string(),
            fraction,
        };
        StoreSpec {
            footprint: Size2 {
                width: 30.0,
                depth: 20.0,
            },
            entrance: Entrance {
                wall: Wall::S,
                offset: 3.0,
                width: 2.0,
            },
            zone_requests: vec![
                req("produce", 0.2),
                req("beverages", 0.15),
                req("snacks", 0.15),
                req("checkout", 0.15),
                req("dairy", 0.1),
                req("frozen", 0.1),
                req("household", 0.1),
                req("bakery", 0.05),
            ],
            adjacency_rules: vec![Rule::with_object(RuleKind::MustNotAdjoin, "household", "produce")],
            min_aisle_width: 1.4,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub axis: Axis,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BspNode {
    pub region: Rect,
    pub split: Option<Split>,
    /// Indices of the (low, high) children.
    pub children: Option<[usize; 2]>,
    /// Zone label carried by a leaf once assigned.
    pub label: Option<String>,
    /// Zone id of a leaf.
    pub zone_id: Option<String>,
}

/// Flat BSP tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BspTree {
    pub nodes: Vec<BspNode>,
}

impl BspTree {
    pub fn root(&self) -> &BspNode {
        &self.nodes[0]
    }

    /// Leaf indices in left-to-right order.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            match self.nodes[i].children {
                Some([lo, hi]) => {
                    stack.push(hi);
                    stack.push(lo);
                }
                None => out.push(i),
            }
        }
        out
    }

    /// Recomputes every descendant region of `node` from the stored splits.
    pub fn recompute_regions(&mut self, node: usize) {
        let mut stack = vec![node];
        while let Some(i) = stack.pop() {
            if let (Some(split), Some([lo, hi])) = (self.nodes[i].split, self.nodes[i].children) {
                let (a, b) = self.nodes[i].region.split(split.axis, split.ratio);
                self.nodes[lo].region = a;
                self.nodes[hi].region = b;
                stack.push(lo);
                stack.push(hi);
            }
        }
    }

    /// Largest relative error between a node's area and the sum of its
    /// children's areas, together with whether any sibling pair overlaps.
    pub fn partition_error(&self) -> (f64, bool) {
        let mut worst: f64 = 0.0;
        let mut overlap = false;
        for n in &self.nodes {
            if let Some([lo, hi]) = n.children {
                let (a, b) = (&self.nodes[lo].region, &self.nodes[hi].region);
                let rel = ((a.area() + b.area()) - n.region.area()).abs() / n.region.area();
                worst = worst.max(rel);
                overlap |= a.overlaps(b);
                overlap |= !n.region.contains_rect(a, 1e-9) || !n.region.contains_rect(b, 1e-9);
            }
        }
        (worst, overlap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacilitySpec {
    pub template_id: String,
    pub kind: FacilityKind,
    /// Unit parameters (shelves, refrigerators); `None` for counters.
    pub params: Option<ShelfParams>,
    pub row_axis: Axis,
    pub row_count_hint: u32,
    pub end_caps: bool,
    pub wall_units: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalZone {
    pub id: String,
    pub label: String,
    pub region: Rect,
    pub facility_spec: Option<FacilitySpec>,
    pub adjacency: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineEntry {
    pub iteration: u32,
    pub violations: Vec<String>,
    pub action: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub store: StoreSpec,
    pub tree: BspTree,
    pub zones: Vec<FunctionalZone>,
    pub refine_log: Vec<RefineEntry>,
}

impl Layout {
    pub fn zone(&self, id: &str) -> Option<&FunctionalZone> {
        self.zones.iter().find(|z| z.id == id)
    }

    pub fn zone_by_label(&self, label: &str) -> Option<&FunctionalZone> {
        self.zones.iter().find(|z| z.label == label)
    }

    pub fn edges_of(&self, zone: &FunctionalZone) -> ZoneEdges {
        zone_edges(&self.store, &zone.region)
    }

    /// Copies leaf regions and labels from the tree into the zone records and
    /// recomputes adjacency.
    pub(crate) fn sync_from_tree(&mut self) {
        let by_id: BTreeMap<String, (Rect, String)> = self
            .tree
            .leaves()
            .into_iter()
            .filter_map(|i| {
                let n = &self.tree.nodes[i];
                Some((n.zone_id.clone()?, (n.region, n.label.clone()?)))
            })
            .collect();
        for z in &mut self.zones {
            if let Some((r, l)) = by_id.get(&z.id) {
                z.region = *r;
                z.label = l.clone();
            }
        }
        self.zones = compute_adjacency(std::mem::take(&mut self.zones));
    }
}

pub(crate) fn compute_adjacency(mut zones: Vec<FunctionalZone>) -> Vec<FunctionalZone> {
    let regions: Vec<(String, Rect)> = zones.iter().map(|z| (z.id.clone(), z.region)).collect();
    for z in &mut zones {
        z.adjacency = regions
            .iter()
            .filter(|(id, r)| *id != z.id && z.region.shared_edge_length(r) > 1e-6)
            .map(|(id, _)| id.clone())
            .collect();
    }
    zones
}

/// Edge classification for one side of a zone against the store walls.
pub(crate) fn classify_edge(store: &StoreSpec, coord: f64, wall: Wall, seg: (f64, f64)) -> EdgeKind {
    let limit = match wall {
        Wall::S | Wall::W => 0.0,
        Wall::N => store.footprint.depth,
        Wall::E => store.footprint.width,
    };
    if (coord - limit).abs() > 1e-6 {
        return EdgeKind::Interior;
    }
    if store.entrance.wall == wall {
        let e = &store.entrance;
        let overlap = seg.1.min(e.offset + e.width) - seg.0.max(e.offset);
        if overlap > -1e-6 {
            return EdgeKind::EntranceWall;
        }
    }
    EdgeKind::Wall
}

/// Full planning pipeline: spatial partition, facility specification, then
/// refinement against the hard rules.
pub fn plan_layout(
    spec: &StoreSpec,
    catalog: &crate::catalog::Catalog,
    backend: &dyn PlannerBackend,
    max_iters: u32,
) -> Result<Layout> {
    spec.validate()?;
    let tree = plan_spatial(spec, backend)?;
    let zones = plan_semantic(&tree, spec, catalog, backend)?;
    let layout = Layout {
        store: spec.clone(),
        tree,
        zones,
        refine_log: Vec::new(),
    };
    backend.observe_layout(&render_layout_svg(&layout));
    reflect_refine(layout, max_iters)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_store_is_valid() {
        StoreSpec::default_store(1).validate().unwrap();
    }

    #[test]
    fn spec_validation_catches_bad_inputs() {
        let mut s = StoreSpec::default_store(1);
        s.zone_requests.retain(|r| r.label != "checkout");
        assert!(s.validate().is_err());

        let mut s = StoreSpec::default_store(1);
        s.zone_requests[0].fraction = 0.5;
        assert!(s.validate().is_err());

        let mut s = StoreSpec::default_store(1);
        s.entrance.offset = 29.5;
        assert!(s.validate().is_err());

        let mut s = StoreSpec::default_store(1);
        s.adjacency_rules.push(Rule::new(RuleKind::MustTouchWall, "pharmacy"));
        assert!(s.validate().is_err());
    }

    #[test]
    fn default_store_plans_cleanly() {
        let cat = crate::catalog::synth_catalog(9, 300, 30).unwrap();
        for seed in 0..5 {
            let spec = StoreSpec::default_store(seed);
            let layout = plan_layout(&spec, &cat, &HeuristicBackend, DEFAULT_MAX_ITERS).unwrap();
            assert!(check_rules(&layout).is_empty());
            assert_eq!(layout.zones.len(), spec.zone_requests.len());
            let area: f64 = layout.zones.iter().map(|z| z.region.area()).sum();
            assert!((area - 600.0).abs() < 1e-9);
            let again = plan_layout(&spec, &cat, &HeuristicBackend, DEFAULT_MAX_ITERS).unwrap();
            assert_eq!(layout, again);
        }
    }

    #[test]
    fn built_in_rules_are_added_once() {
        let mut s = StoreSpec::default_store(1);
        s.adjacency_rules.push(Rule::new(RuleKind::MustTouchWall, "frozen"));
        let rules = s.effective_rules();
        let frozen = rules
            .iter()
            .filter(|r| r.subject == "frozen" && r.kind == RuleKind::MustTouchWall)
            .count();
        assert_eq!(frozen, 1);
        assert!(rules
            .iter()
            .any(|r| r.subject == "checkout" && r.kind == RuleKind::MustAdjoinEntrance));
    }
}
