use super::{
    compute_adjacency, zone_edges, BspTree, FacilitySpec, FunctionalZone, PlannerBackend, StoreSpec, Wall,
    PROPOSAL_RETRIES,
};
use crate::catalog::{query_facilities, Catalog, FacilityKind};
use crate::error::{Error, Result};
use crate::facility::BACK_PANEL_THICKNESS;
use crate::geom::{Axis, Rect};
use crate::packing::{back_to_back_depth, best_row_axis, plan_counters, CounterPlan, RowPlan};

/// How a zone's floor is used: shelf rows or checkout lanes.
#[derive(Debug, Clone, PartialEq)]
pub enum ZonePlan {
    Rows(RowPlan),
    Counters(CounterPlan),
}

impl ZonePlan {
    pub fn axis(&self) -> Axis {
        match self {
            ZonePlan::Rows(r) => r.row_axis,
            ZonePlan::Counters(c) => c.lane_axis,
        }
    }

    pub fn count(&self) -> usize {
        match self {
            ZonePlan::Rows(r) => r.row_count(),
            ZonePlan::Counters(c) => c.starts.len(),
        }
    }
}

/// Row or counter plan for a zone with the given facility spec, or `None`
/// when nothing fits with the required clearances.
pub fn spec_row_plan(store: &StoreSpec, region: &Rect, spec: &FacilitySpec) -> Option<ZonePlan> {
    let edges = zone_edges(store, region);
    let aisle = store.min_aisle_width;
    if spec.kind == FacilityKind::CheckoutCounter {
        let lane = match store.entrance.wall {
            Wall::N | Wall::S => Axis::Y,
            Wall::E | Wall::W => Axis::X,
        };
        return plan_counters(region, &edges, lane, aisle)
            .or_else(|| plan_counters(region, &edges, lane.other(), aisle))
            .map(ZonePlan::Counters);
    }
    let p = spec.params.as_ref()?;
    let interior = if p.double_sided {
        p.footprint_depth()
    } else {
        back_to_back_depth(p.depth)
    };
    let wall = spec.wall_units.then_some(p.depth + BACK_PANEL_THICKNESS);
    best_row_axis(region, &edges, interior, wall, p.length, aisle).map(|(_, plan)| ZonePlan::Rows(plan))
}

/// Recomputes the derived row fields of a zone's spec after its region changed.
pub(crate) fn refresh_spec(store: &StoreSpec, zone: &mut FunctionalZone) {
    let region = zone.region;
    if let Some(spec) = zone.facility_spec.as_mut() {
        match spec_row_plan(store, &region, spec) {
            Some(plan) => {
                spec.row_axis = plan.axis();
                spec.row_count_hint = plan.count() as u32;
            }
            None => {
                spec.row_axis = region.longer_axis();
                spec.row_count_hint = 0;
            }
        }
    }
}

/// Gives every leaf zone a facility spec drawn from the catalog.
pub fn plan_semantic(
    tree: &BspTree,
    spec: &StoreSpec,
    catalog: &Catalog,
    backend: &dyn PlannerBackend,
) -> Result<Vec<FunctionalZone>> {
    let mut zones = Vec::new();
    for i in tree.leaves() {
        let node = &tree.nodes[i];
        let (Some(label), Some(id)) = (node.label.as_deref(), node.zone_id.as_deref()) else {
            return Err(Error::invalid("tree leaves must carry zone assignments"));
        };
        let facility_spec = propose_spec(label, &node.region, catalog, backend)?;
        let mut zone = FunctionalZone {
            id: id.to_string(),
            label: label.to_string(),
            region: node.region,
            facility_spec: Some(facility_spec),
            adjacency: Default::default(),
        };
        refresh_spec(spec, &mut zone);
        zones.push(zone);
    }
    zones.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(compute_adjacency(zones))
}

fn propose_spec(label: &str, region: &Rect, catalog: &Catalog, backend: &dyn PlannerBackend) -> Result<FacilitySpec> {
    let affine = query_facilities(catalog, label);
    if affine.is_empty() {
        return Err(Error::planning(format!(
            "no facility template has affinity for zone label {label}"
        )));
    }
    let mut last = String::new();
    for attempt in 0..PROPOSAL_RETRIES {
        let proposal = match backend.propose_facility(label, region, attempt) {
            Ok(p) => p,
            Err(e) => {
                last = e.to_string();
                continue;
            }
        };
        let Some(template) = affine.iter().find(|t| t.kind == proposal.kind) else {
            last = format!("no {:?} template serves {label}", proposal.kind);
            continue;
        };
        let params = if template.kind.is_parameterizable() {
            match proposal.params {
                Some(p) => match p.validate() {
                    Ok(()) => Some(p),
                    Err(e) => {
                        last = e.to_string();
                        log::debug!("facility proposal for {label} rejected: {e}");
                        continue;
                    }
                },
                None => {
                    last = "shelf proposal without params".into();
                    continue;
                }
            }
        } else {
            template.default_params.clone()
        };
        return Ok(FacilitySpec {
            template_id: template.id.clone(),
            kind: template.kind,
            params,
            row_axis: region.longer_axis(),
            row_count_hint: 0,
            end_caps: proposal.end_caps,
            wall_units: proposal.wall_units,
        });
    }
    Err(Error::planning(format!(
        "no acceptable facility proposal for {label} in {PROPOSAL_RETRIES} attempts: {last}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::synth_catalog;
    use crate::layout::{plan_spatial, FacilityProposal, HeuristicBackend, Rule, SplitProposal};
    use crate::rng::SeedStream;
    use std::sync::atomic::{AtomicU32, Ordering};

    #[test]
    fn every_zone_gets_an_affine_valid_spec() {
        let cat = synth_catalog(4, 200, 20).unwrap();
        let store = StoreSpec::default_store(4);
        let tree = plan_spatial(&store, &HeuristicBackend).unwrap();
        let zones = plan_semantic(&tree, &store, &cat, &HeuristicBackend).unwrap();
        assert_eq!(zones.len(), store.zone_requests.len());
        for z in &zones {
            let s = z.facility_spec.as_ref().unwrap();
            let t = cat.facility(&s.template_id).unwrap();
            assert!(t.zone_affinity.contains(&z.label));
            if let Some(p) = &s.params {
                p.validate().unwrap();
            }
        }
        let checkout = zones.iter().find(|z| z.label == "checkout").unwrap();
        assert_eq!(
            checkout.facility_spec.as_ref().unwrap().kind,
            FacilityKind::CheckoutCounter
        );
    }

    /// Proposes an out-of-bounds tier count first, then defers to the heuristic.
    struct TooTall(AtomicU32);
    impl PlannerBackend for TooTall {
        fn name(&self) -> &str {
            "too-tall"
        }
        fn propose_split(&self, r: &Rect, f: &[f64], s: &SeedStream, a: u32) -> Result<SplitProposal> {
            HeuristicBackend.propose_split(r, f, s, a)
        }
        fn propose_zone_order(&self, l: &[String], r: &[Rule]) -> Result<Vec<String>> {
            HeuristicBackend.propose_zone_order(l, r)
        }
        fn propose_facility(&self, label: &str, r: &Rect, attempt: u32) -> Result<FacilityProposal> {
            self.0.fetch_add(1, Ordering::SeqCst);
            let mut p = HeuristicBackend.propose_facility("snacks", r, attempt)?;
            if attempt == 0 {
                p.params.as_mut().unwrap().tiers = 12;
            }
            let _ = label;
            Ok(p)
        }
    }

    #[test]
    fn twelve_tiers_rejected_and_reproposed() {
        let cat = synth_catalog(4, 200, 20).unwrap();
        let backend = TooTall(AtomicU32::new(0));
        let spec = propose_spec("dairy", &Rect::new(0.0, 0.0, 8.0, 6.0), &cat, &backend).unwrap();
        assert_eq!(backend.0.load(Ordering::SeqCst), 2);
        assert!(spec.params.unwrap().tiers <= 8);
    }

    #[test]
    fn unknown_label_names_itself() {
        let cat = synth_catalog(4, 200, 20).unwrap();
        let err = propose_spec("pharmacy", &Rect::new(0.0, 0.0, 8.0, 6.0), &cat, &HeuristicBackend).unwrap_err();
        assert!(err.to_string().contains("pharmacy"));
    }
}
