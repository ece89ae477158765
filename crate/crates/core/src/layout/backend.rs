use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::bsp::{partition_for_ratio, RATIO_MAX, RATIO_MIN, RATIO_STEP};
use super::Rule;
use crate::catalog::{FacilityKind, CHECKOUT_LABEL};
use crate::error::Result;
use crate::facility::{ShelfParams, UnitType, DEFAULT_BASE_HEIGHT, DEFAULT_BOARD_THICKNESS};
use crate::geom::{Axis, Rect};
use crate::rng::SeedStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitProposal {
    pub axis: Axis,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacilityProposal {
    pub kind: FacilityKind,
    /// Required for shelves; ignored for fixed-size kinds.
    #[serde(default)]
    pub params: Option<ShelfParams>,
    #[serde(default)]
    pub end_caps: bool,
    #[serde(default)]
    pub wall_units: bool,
}

/// Source of layout proposals. Proposals are suggestions: the engine
/// validates each one and re-queries with an incremented `attempt` on
/// rejection.
pub trait PlannerBackend: Send + Sync {
    fn name(&self) -> &str;

    /// Axis and ratio for splitting `region` between the zones whose
    /// fractions are listed.
    fn propose_split(
        &self,
        region: &Rect,
        fractions: &[f64],
        seeds: &SeedStream,
        attempt: u32,
    ) -> Result<SplitProposal>;

    /// Preferred ordering of zone labels; used to break ties in leaf assignment.
    fn propose_zone_order(&self, labels: &[String], rules: &[Rule]) -> Result<Vec<String>>;

    /// Facility kind and unit parameters for a zone of the given size.
    fn propose_facility(&self, label: &str, region: &Rect, attempt: u32) -> Result<FacilityProposal>;

    /// Receives the rendered plan whenever the engine has a new one.
    fn observe_layout(&self, _svg: &str) {}
}

/// Extra relative area error tolerated when choosing among split ratios.
pub const SPLIT_SLACK: f64 = 0.03;

/// Rule-table backend; deterministic for a given seed.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeuristicBackend;

/// Worst relative area error a split at `ratio` introduces on either side.
fn split_error(fractions: &[f64], ratio: f64) -> f64 {
    let total: f64 = fractions.iter().sum();
    let side = partition_for_ratio(fractions, ratio);
    let share: f64 = fractions
        .iter()
        .zip(&side)
        .filter(|(_, s)| **s)
        .map(|(f, _)| f)
        .sum::<f64>()
        / total;
    let d = (ratio - share).abs();
    (d / share).max(d / (1.0 - share))
}

/// Shelf parameters per goods label: (tiers, tier spacing, unit depth).
fn shelf_table(label: &str) -> (u32, f64, f64) {
    match label {
        "beverages" => (5, 0.40, 0.50),
        "household" => (5, 0.40, 0.60),
        "snacks" => (5, 0.35, 0.40),
        "bakery" => (5, 0.30, 0.50),
        "personal-care" | "canned" | "condiments" => (6, 0.30, 0.40),
        _ => (5, 0.35, 0.50),
    }
}

impl HeuristicBackend {
    fn shelf(label: &str, region: &Rect) -> ShelfParams {
        let (tiers, tier_spacing, depth) = shelf_table(label);
        let longest = region.width().max(region.height());
        let length = if longest >= 6.0 { 1.2 } else { 0.9 };
        ShelfParams {
            unit_type: UnitType::Gondola,
            double_sided: true,
            tiers,
            tier_spacing,
            length,
            depth,
            base_height: DEFAULT_BASE_HEIGHT,
            board_thickness: DEFAULT_BOARD_THICKNESS,
            material_tag: "painted-steel".into(),
        }
    }
}

impl PlannerBackend for HeuristicBackend {
    fn name(&self) -> &str {
        "heuristic"
    }

    /// Splits the longer axis (ties go to x) at a snapped ratio whose zone
    /// grouping loses the least area accuracy. Ratios within `SPLIT_SLACK`
    /// of the best are equally acceptable; the seed picks among them.
    fn propose_split(
        &self,
        region: &Rect,
        fractions: &[f64],
        seeds: &SeedStream,
        _attempt: u32,
    ) -> Result<SplitProposal> {
        let steps = ((RATIO_MAX - RATIO_MIN) / RATIO_STEP).round() as u32;
        let scored: Vec<(f64, f64)> = (0..=steps)
            .map(|k| {
                let r = RATIO_MIN + f64::from(k) * RATIO_STEP;
                (split_error(fractions, r), r)
            })
            .collect();
        let best = scored.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
        let near: Vec<f64> = scored
            .iter()
            .filter(|s| s.0 <= best + SPLIT_SLACK)
            .map(|s| s.1)
            .collect();
        let ratio = near.choose(&mut seeds.rng()).copied().unwrap_or(0.5);
        Ok(SplitProposal {
            axis: region.longer_axis(),
            ratio,
        })
    }

    /// Rule subjects first (they are the hardest to place), then the rest;
    /// lexicographic within each group.
    fn propose_zone_order(&self, labels: &[String], rules: &[Rule]) -> Result<Vec<String>> {
        let constrained: BTreeSet<&str> = rules.iter().map(|r| r.subject.as_str()).collect();
        let mut out: Vec<String> = labels.to_vec();
        out.sort_by(|a, b| {
            let ka = (!constrained.contains(a.as_str()), a);
            let kb = (!constrained.contains(b.as_str()), b);
            ka.cmp(&kb)
        });
        Ok(out)
    }

    fn propose_facility(&self, label: &str, region: &Rect, _attempt: u32) -> Result<FacilityProposal> {
        let proposal = match label {
            CHECKOUT_LABEL => FacilityProposal {
                kind: FacilityKind::CheckoutCounter,
                params: None,
                end_caps: false,
                wall_units: false,
            },
            "dairy" | "frozen" => FacilityProposal {
                kind: FacilityKind::Refrigerator,
                params: None,
                end_caps: false,
                wall_units: true,
            },
            "produce" => FacilityProposal {
                kind: FacilityKind::Bin,
                params: None,
                end_caps: false,
                wall_units: false,
            },
            _ => FacilityProposal {
                kind: FacilityKind::Shelf,
                params: Some(Self::shelf(label, region)),
                end_caps: matches!(label, "snacks" | "beverages"),
                wall_units: true,
            },
        };
        Ok(proposal)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_half_split_is_on_x_at_half() {
        let p = HeuristicBackend
            .propose_split(&Rect::new(0.0, 0.0, 10.0, 10.0), &[0.5, 0.5], &SeedStream::new(1), 0)
            .unwrap();
        assert_eq!(p.axis, Axis::X);
        assert!((p.ratio - 0.5).abs() < 1e-12);
    }

    #[test]
    fn proposals_are_pure() {
        let r = Rect::new(0.0, 0.0, 12.0, 7.0);
        let f = [0.4, 0.3, 0.2, 0.1];
        let a = HeuristicBackend.propose_split(&r, &f, &SeedStream::new(3), 0).unwrap();
        let b = HeuristicBackend.propose_split(&r, &f, &SeedStream::new(3), 0).unwrap();
        assert_eq!(a, b);
        let fa = HeuristicBackend.propose_facility("snacks", &r, 0).unwrap();
        let fb = HeuristicBackend.propose_facility("snacks", &r, 0).unwrap();
        assert_eq!(fa, fb);
    }

    #[test]
    fn shelf_table_params_are_valid() {
        let r = Rect::new(0.0, 0.0, 8.0, 5.0);
        for label in [
            "beverages",
            "household",
            "snacks",
            "bakery",
            "canned",
            "condiments",
            "personal-care",
        ] {
            let p = HeuristicBackend.propose_facility(label, &r, 0).unwrap();
            p.params.unwrap().validate().unwrap();
        }
    }
}
