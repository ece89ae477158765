use std::collections::BTreeMap;

use super::rules::check_rules;
use super::semantic::refresh_spec;
use super::{Layout, RefineEntry};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_ITERS: u32 = 16;

enum Action {
    Swap(usize, usize),
    Flip(usize),
}

fn apply(layout: &Layout, action: &Action) -> (Layout, String) {
    let mut next = layout.clone();
    let text = match *action {
        Action::Swap(i, j) => {
            let (a, b) = (next.zones[i].id.clone(), next.zones[j].id.clone());
            let text = format!("swap {a} ({}) with {b} ({})", next.zones[i].label, next.zones[j].label);
            let label_i = std::mem::take(&mut next.zones[i].label);
            let spec_i = next.zones[i].facility_spec.take();
            next.zones[i].label = std::mem::replace(&mut next.zones[j].label, label_i);
            next.zones[i].facility_spec = std::mem::replace(&mut next.zones[j].facility_spec, spec_i);
            for leaf in next.tree.leaves() {
                let n = &mut next.tree.nodes[leaf];
                if n.zone_id.as_deref() == Some(a.as_str()) {
                    n.label = Some(next.zones[i].label.clone());
                } else if n.zone_id.as_deref() == Some(b.as_str()) {
                    n.label = Some(next.zones[j].label.clone());
                }
            }
            text
        }
        Action::Flip(node) => {
            let split = next.tree.nodes[node]
                .split
                .as_mut()
                .expect("flip targets internal nodes");
            split.axis = split.axis.other();
            let text = format!("re-split node {node} along {:?} at {:.2}", split.axis, split.ratio);
            next.tree.recompute_regions(node);
            next.sync_from_tree();
            text
        }
    };
    let store = next.store.clone();
    for z in &mut next.zones {
        refresh_spec(&store, z);
    }
    (next, text)
}

/// Distance between realized zone shares and requested shares.
fn area_mismatch(layout: &Layout) -> f64 {
    let total: f64 = layout.store.zone_requests.iter().map(|r| r.fraction).sum();
    let area = layout.store.footprint_rect().area();
    layout
        .zones
        .iter()
        .map(|z| (z.region.area() / area - layout.store.fraction_of(&z.label).unwrap_or(0.0) / total).abs())
        .sum()
}

fn signature(layout: &Layout) -> String {
    let mut s = String::new();
    for z in &layout.zones {
        s.push_str(&z.label);
        s.push('|');
    }
    for n in &layout.tree.nodes {
        if let Some(sp) = n.split {
            s.push_str(&format!("{:?}", sp.axis));
        }
    }
    s
}

/// Repairs hard-rule violations. Each iteration applies the single zone
/// swap or subtree re-split that leaves the fewest violations, preferring
/// states not seen before and then the best area match.
pub fn reflect_refine(layout: Layout, max_iters: u32) -> Result<Layout> {
    let mut current = layout;
    let mut visits: BTreeMap<String, u32> = BTreeMap::new();
    visits.insert(signature(&current), 1);
    for iteration in 1..=max_iters {
        let violations = check_rules(&current);
        if violations.is_empty() {
            return Ok(current);
        }
        let n = current.zones.len();
        let mut actions = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                actions.push(Action::Swap(i, j));
            }
        }
        for (k, node) in current.tree.nodes.iter().enumerate() {
            if node.split.is_some() {
                actions.push(Action::Flip(k));
            }
        }
        let mut best: Option<((usize, u32, f64), Layout, String)> = None;
        for action in &actions {
            let (cand, text) = apply(&current, action);
            let seen = visits.get(&signature(&cand)).copied().unwrap_or(0);
            let key = (check_rules(&cand).len(), seen, area_mismatch(&cand));
            let better = match &best {
                None => true,
                Some((bk, _, _)) => {
                    key.0 < bk.0 || (key.0 == bk.0 && (key.1 < bk.1 || (key.1 == bk.1 && key.2 < bk.2 - 1e-12)))
                }
            };
            if better {
                best = Some((key, cand, text));
            }
        }
        let entry_violations: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        match best {
            Some((_, next, text)) => {
                log::debug!("refine iteration {iteration}: {text}");
                current = next;
                *visits.entry(signature(&current)).or_insert(0) += 1;
                current.refine_log.push(RefineEntry {
                    iteration,
                    violations: entry_violations,
                    action: text,
                });
            }
            None => {
                current.refine_log.push(RefineEntry {
                    iteration,
                    violations: entry_violations,
                    action: "none available".into(),
                });
            }
        }
    }
    let residual = check_rules(&current);
    if residual.is_empty() {
        Ok(current)
    } else {
        Err(Error::PlanningFailed {
            reason: format!("hard rules still violated after {max_iters} refine iterations"),
            residual: residual.iter().map(|v| v.to_string()).collect(),
        })
    }
}
