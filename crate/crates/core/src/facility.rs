//! Parametric fixture assembly.
//!
//! A shelving unit is built from minimal parts: one base support, two side
//! panels, a back panel (a shared spine on double-sided units) and one board
//! per tier per side. Local frame: origin at the footprint min corner, x along
//! the unit length, y across its depth, z up. The front aisle face is `y = 0`;
//! on double-sided units the back aisle face is `y = footprint depth`.

use serde::{Deserialize, Serialize};

use crate::catalog::{FacilityKind, FacilityTemplate};
use crate::error::{Error, Result};
use crate::geom::{Box3, Rect};

pub const DEFAULT_BOARD_THICKNESS: f64 = 0.03;
pub const DEFAULT_BASE_HEIGHT: f64 = 0.2;
pub const BACK_PANEL_THICKNESS: f64 = 0.03;
pub const SIDE_PANEL_THICKNESS: f64 = 0.02;
pub const MAX_UNIT_HEIGHT: f64 = 2.5;
pub const MAX_ENDCAP_LENGTH: f64 = 1.2;

pub const COUNTER_LENGTH: f64 = 2.0;
pub const COUNTER_DEPTH: f64 = 0.8;
pub const COUNTER_HEIGHT: f64 = 0.9;
const BELT_THICKNESS: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitType {
    Gondola,
    WallUnit,
    EndCap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShelfParams {
    pub unit_type: UnitType,
    pub double_sided: bool,
    pub tiers: u32,
    pub tier_spacing: f64,
    pub length: f64,
    pub depth: f64,
    pub base_height: f64,
    pub board_thickness: f64,
    pub material_tag: String,
}

impl ShelfParams {
    pub fn total_height(&self) -> f64 {
        self.base_height + f64::from(self.tiers) * (self.tier_spacing + self.board_thickness)
    }

    pub fn sides(&self) -> u32 {
        if self.double_sided {
            2
        } else {
            1
        }
    }

    pub fn footprint_depth(&self) -> f64 {
        self.depth * f64::from(self.sides()) + BACK_PANEL_THICKNESS
    }

    /// Checks every documented bound; the error names the first violation.
    pub fn validate(&self) -> Result<()> {
        fn within(name: &str, v: f64, lo: f64, hi: f64) -> Result<()> {
            if v.is_finite() && v >= lo - 1e-12 && v <= hi + 1e-12 {
                Ok(())
            } else {
                Err(Error::params(format!("{name} must be in [{lo}, {hi}] (got {v})")))
            }
        }
        if !(1..=8).contains(&self.tiers) {
            return Err(Error::params(format!("tiers must be in [1, 8] (got {})", self.tiers)));
        }
        within("tier_spacing", self.tier_spacing, 0.2, 0.8)?;
        within("length", self.length, 0.6, 4.0)?;
        within("depth", self.depth, 0.3, 0.8)?;
        if !(self.base_height.is_finite() && self.base_height >= 0.0) {
            return Err(Error::params(format!(
                "base_height must be >= 0 (got {})",
                self.base_height
            )));
        }
        if !(self.board_thickness > 0.0 && self.board_thickness < self.tier_spacing) {
            return Err(Error::params(format!(
                "board_thickness must be in (0, tier_spacing) (got {})",
                self.board_thickness
            )));
        }
        match self.unit_type {
            UnitType::WallUnit if self.double_sided => {
                return Err(Error::params("wall-unit must be single-sided"));
            }
            UnitType::EndCap if self.double_sided => {
                return Err(Error::params("end-cap must be single-sided"));
            }
            UnitType::EndCap if self.length > MAX_ENDCAP_LENGTH + 1e-12 => {
                return Err(Error::params(format!(
                    "end-cap length must be <= {MAX_ENDCAP_LENGTH} (got {})",
                    self.length
                )));
            }
            _ => {}
        }
        let h = self.total_height();
        if h > MAX_UNIT_HEIGHT + 1e-9 {
            return Err(Error::params(format!(
                "total height must be <= {MAX_UNIT_HEIGHT} m (got {h:.3})"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartKind {
    ShelfBoard,
    BackPanel,
    BaseSupport,
    SidePanel,
    CounterBody,
    Belt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub part: PartKind,
    pub local: Box3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Front,
    Back,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SlotId {
    pub side: Side,
    pub tier: u32,
    pub column: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    pub id: SlotId,
    /// Local rectangle of the supporting surface.
    pub surface: Rect,
    /// Height of the supporting surface above the floor.
    pub surface_z: f64,
    /// Free height above the surface; `None` on the top tier (unbounded).
    pub clearance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Footprint {
    pub width: f64,
    pub depth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacilityInstance {
    pub id: String,
    pub template_id: String,
    pub kind: FacilityKind,
    pub params: Option<ShelfParams>,
    pub components: Vec<Component>,
    pub slots: Vec<Slot>,
    pub footprint: Footprint,
    pub height: f64,
}

impl FacilityInstance {
    pub fn size(&self) -> (f64, f64) {
        (self.footprint.width, self.footprint.depth)
    }

    pub fn bounds(&self) -> Box3 {
        Box3::new(0.0, 0.0, 0.0, self.footprint.width, self.footprint.depth, self.height)
    }

    pub fn slot(&self, id: SlotId) -> Option<&Slot> {
        self.slots
            .binary_search_by(|s| s.id.cmp(&id))
            .ok()
            .map(|i| &self.slots[i])
    }
}

/// Builds a parameterized unit (shelf templates only).
pub fn assemble(template: &FacilityTemplate, params: &ShelfParams, id: &str) -> Result<FacilityInstance> {
    if !template.kind.is_parameterizable() {
        return Err(Error::invalid(format!(
            "template {} of kind {:?} is not parameterizable",
            template.id, template.kind
        )));
    }
    params.validate()?;
    Ok(build_shelving(template, params, id))
}

/// Builds a fixed-dimension fixture from its template defaults: refrigerators
/// and bins reuse the shelving geometry, checkout counters get a body and a
/// belt surface.
pub fn assemble_fixed(template: &FacilityTemplate, id: &str) -> Result<FacilityInstance> {
    match template.kind {
        FacilityKind::CheckoutCounter => Ok(build_counter(template, id)),
        FacilityKind::Refrigerator | FacilityKind::Bin => {
            let params = template
                .default_params
                .as_ref()
                .ok_or_else(|| Error::invalid(format!("template {} carries no fixed params", template.id)))?;
            params.validate()?;
            Ok(build_shelving(template, params, id))
        }
        FacilityKind::Shelf => assemble(
            template,
            template
                .default_params
                .as_ref()
                .ok_or_else(|| Error::invalid(format!("template {} has no defaults", template.id)))?,
            id,
        ),
        FacilityKind::Basket => Err(Error::invalid(
            "baskets are carried on counters, not assembled as fixtures",
        )),
    }
}

fn board_z(p: &ShelfParams, tier: u32) -> f64 {
    p.base_height + f64::from(tier) * (p.tier_spacing + p.board_thickness)
}

fn build_shelving(template: &FacilityTemplate, p: &ShelfParams, id: &str) -> FacilityInstance {
    let len = p.length;
    let fd = p.footprint_depth();
    let h = p.total_height();
    let st = SIDE_PANEL_THICKNESS;
    let inner = len - 2.0 * st;

    let mut components = vec![
        Component {
            part: PartKind::BaseSupport,
            local: Box3::new(st, 0.0, 0.0, inner, fd, p.base_height),
        },
        Component {
            part: PartKind::SidePanel,
            local: Box3::new(0.0, 0.0, 0.0, st, fd, h),
        },
        Component {
            part: PartKind::SidePanel,
            local: Box3::new(len - st, 0.0, 0.0, st, fd, h),
        },
        Component {
            part: PartKind::BackPanel,
            local: Box3::new(st, p.depth, 0.0, inner, BACK_PANEL_THICKNESS, h),
        },
    ];
    for &side in sides_of(p) {
        let y0 = side_y0(p, side);
        for tier in 0..p.tiers {
            components.push(Component {
                part: PartKind::ShelfBoard,
                local: Box3::new(st, y0, board_z(p, tier), inner, p.depth, p.board_thickness),
            });
        }
    }

    FacilityInstance {
        id: id.to_string(),
        template_id: template.id.clone(),
        kind: template.kind,
        params: Some(p.clone()),
        components,
        slots: tier_surfaces(p),
        footprint: Footprint { width: len, depth: fd },
        height: h,
    }
}

fn build_counter(template: &FacilityTemplate, id: &str) -> FacilityInstance {
    let surface = Rect::new(0.0, 0.0, COUNTER_LENGTH, COUNTER_DEPTH);
    FacilityInstance {
        id: id.to_string(),
        template_id: template.id.clone(),
        kind: FacilityKind::CheckoutCounter,
        params: None,
        components: vec![
            Component {
                part: PartKind::CounterBody,
                local: Box3::new(
                    0.0,
                    0.0,
                    0.0,
                    COUNTER_LENGTH,
                    COUNTER_DEPTH,
                    COUNTER_HEIGHT - BELT_THICKNESS,
                ),
            },
            Component {
                part: PartKind::Belt,
                local: Box3::new(
                    0.0,
                    0.0,
                    COUNTER_HEIGHT - BELT_THICKNESS,
                    COUNTER_LENGTH,
                    COUNTER_DEPTH,
                    BELT_THICKNESS,
                ),
            },
        ],
        slots: vec![Slot {
            id: SlotId {
                side: Side::Front,
                tier: 0,
                column: 0,
            },
            surface,
            surface_z: COUNTER_HEIGHT,
            clearance: None,
        }],
        footprint: Footprint {
            width: COUNTER_LENGTH,
            depth: COUNTER_DEPTH,
        },
        height: COUNTER_HEIGHT,
    }
}

fn sides_of(p: &ShelfParams) -> &'static [Side] {
    if p.double_sided {
        &[Side::Front, Side::Back]
    } else {
        &[Side::Front]
    }
}

fn side_y0(p: &ShelfParams, side: Side) -> f64 {
    match side {
        Side::Front => 0.0,
        Side::Back => p.depth + BACK_PANEL_THICKNESS,
    }
}

/// One full-length surface per (side, tier).
fn tier_surfaces(p: &ShelfParams) -> Vec<Slot> {
    column_slots(p, 1)
}

fn column_slots(p: &ShelfParams, columns: u32) -> Vec<Slot> {
    let st = SIDE_PANEL_THICKNESS;
    let inner = p.length - 2.0 * st;
    let col_w = inner / f64::from(columns);
    let mut out = Vec::with_capacity((p.sides() * p.tiers * columns) as usize);
    for &side in sides_of(p) {
        let y0 = side_y0(p, side);
        for tier in 0..p.tiers {
            let clearance = if tier + 1 < p.tiers {
                Some(p.tier_spacing - p.board_thickness)
            } else {
                None
            };
            for column in 0..columns {
                let x0 = st + col_w * f64::from(column);
                // last column ends exactly at the board end
                let x1 = if column + 1 == columns { st + inner } else { x0 + col_w };
                out.push(Slot {
                    id: SlotId { side, tier, column },
                    surface: Rect::new(x0, y0, x1, y0 + p.depth),
                    surface_z: board_z(p, tier) + p.board_thickness,
                    clearance,
                });
            }
        }
    }
    out
}

/// Subdivides every tier surface into `floor(length / column_width)` equal
/// columns, ordered by (side, tier, column).
pub fn enumerate_slots(instance: &FacilityInstance, column_width: f64) -> Result<Vec<Slot>> {
    if !(column_width > 0.0) {
        return Err(Error::invalid(format!(
            "column_width must be positive (got {column_width})"
        )));
    }
    let Some(p) = &instance.params else {
        return Ok(instance.slots.clone());
    };
    if column_width > p.length + 1e-12 {
        return Err(Error::invalid(format!(
            "column_width {column_width} exceeds unit length {}",
            p.length
        )));
    }
    let columns = ((p.length / column_width) + 1e-9).floor().max(1.0) as u32;
    Ok(column_slots(p, columns))
}

/// Value lists per parameter; the Cartesian product is expanded in field order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pub unit_type: Vec<UnitType>,
    pub double_sided: Vec<bool>,
    pub tiers: Vec<u32>,
    pub tier_spacing: Vec<f64>,
    pub length: Vec<f64>,
    pub depth: Vec<f64>,
    pub base_height: Vec<f64>,
    pub board_thickness: Vec<f64>,
    pub material_tag: Vec<String>,
}

impl ParamGrid {
    /// A grid with every dimension pinned to `p`.
    pub fn fixed(p: &ShelfParams) -> Self {
        ParamGrid {
            unit_type: vec![p.unit_type],
            double_sided: vec![p.double_sided],
            tiers: vec![p.tiers],
            tier_spacing: vec![p.tier_spacing],
            length: vec![p.length],
            depth: vec![p.depth],
            base_height: vec![p.base_height],
            board_thickness: vec![p.board_thickness],
            material_tag: vec![p.material_tag.clone()],
        }
    }
}

/// Expands the grid and keeps only configurations that pass validation.
pub fn expand_parameter_grid(template: &FacilityTemplate, grid: &ParamGrid) -> Result<Vec<ShelfParams>> {
    if !template.kind.is_parameterizable() {
        return Err(Error::invalid(format!(
            "template {} is not parameterizable",
            template.id
        )));
    }
    let dims = [
        ("unit_type", grid.unit_type.len()),
        ("double_sided", grid.double_sided.len()),
        ("tiers", grid.tiers.len()),
        ("tier_spacing", grid.tier_spacing.len()),
        ("length", grid.length.len()),
        ("depth", grid.depth.len()),
        ("base_height", grid.base_height.len()),
        ("board_thickness", grid.board_thickness.len()),
        ("material_tag", grid.material_tag.len()),
    ];
    if let Some((name, _)) = dims.iter().find(|(_, n)| *n == 0) {
        return Err(Error::invalid(format!("grid dimension {name} is empty")));
    }

    let mut out = Vec::new();
    for &unit_type in &grid.unit_type {
        for &double_sided in &grid.double_sided {
            for &tiers in &grid.tiers {
                for &tier_spacing in &grid.tier_spacing {
                    for &length in &grid.length {
                        for &depth in &grid.depth {
                            for &base_height in &grid.base_height {
                                for &board_thickness in &grid.board_thickness {
                                    for material_tag in &grid.material_tag {
                                        let p = ShelfParams {
                                            unit_type,
                                            double_sided,
                                            tiers,
                                            tier_spacing,
                                            length,
                                            depth,
                                            base_height,
                                            board_thickness,
                                            material_tag: material_tag.clone(),
                                        };
                                        if p.validate().is_ok() {
                                            out.push(p);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::FacilityTemplate;
    use proptest::prelude::*;

    fn shelf_template() -> FacilityTemplate {
        FacilityTemplate {
            id: "fac-test".into(),
            kind: FacilityKind::Shelf,
            default_params: Some(gondola(4)),
            material_options: vec!["wood".into()],
            zone_affinity: ["snacks".to_string()].into_iter().collect(),
        }
    }

    fn gondola(tiers: u32) -> ShelfParams {
        ShelfParams {
            unit_type: UnitType::Gondola,
            double_sided: true,
            tiers,
            tier_spacing: 0.4,
            length: 1.2,
            depth: 0.5,
            base_height: DEFAULT_BASE_HEIGHT,
            board_thickness: DEFAULT_BOARD_THICKNESS,
            material_tag: "metal".into(),
        }
    }

    fn count(inst: &FacilityInstance, part: PartKind) -> usize {
        inst.components.iter().filter(|c| c.part == part).count()
    }

    #[test]
    fn double_sided_gondola_has_board_per_side_and_tier() {
        let inst = assemble(&shelf_template(), &gondola(4), "f0").unwrap();
        assert_eq!(count(&inst, PartKind::ShelfBoard), 8);
        assert_eq!(inst.slots.len(), 8);
        assert_eq!(count(&inst, PartKind::BackPanel), 1);
        assert_eq!(count(&inst, PartKind::SidePanel), 2);
        assert_eq!(count(&inst, PartKind::BaseSupport), 1);
        assert!((inst.footprint.depth - (0.5 * 2.0 + 0.03)).abs() < 1e-12);
    }

    #[test]
    fn minimal_wall_unit() {
        let p = ShelfParams {
            unit_type: UnitType::WallUnit,
            double_sided: false,
            tiers: 1,
            ..gondola(1)
        };
        let inst = assemble(&shelf_template(), &p, "f1").unwrap();
        assert_eq!(count(&inst, PartKind::ShelfBoard), 1);
        assert_eq!(inst.slots.len(), 1);
        assert_eq!(inst.slots[0].clearance, None);
    }

    #[test]
    fn height_cap_boundary() {
        let mut p = gondola(5);
        p.base_height = 0.2;
        p.board_thickness = 0.03;
        p.tier_spacing = 0.4;
        // 0.2 + 5 * 0.43 = 2.35
        assert!((p.total_height() - 2.35).abs() < 1e-12);
        assert!(assemble(&shelf_template(), &p, "a").is_ok());
        p.tiers = 6;
        // 0.2 + 6 * 0.43 = 2.78
        assert!((p.total_height() - 2.78).abs() < 1e-12);
        match assemble(&shelf_template(), &p, "b") {
            Err(Error::InvalidParams { bound }) => assert!(bound.contains("total height")),
            other => panic!("expected height rejection, got {other:?}"),
        }
    }

    #[test]
    fn rejects_out_of_range_and_inconsistent_params() {
        let t = shelf_template();
        let mut p = gondola(12);
        assert!(matches!(assemble(&t, &p, "x"), Err(Error::InvalidParams { bound }) if bound.starts_with("tiers")));
        p = gondola(3);
        p.unit_type = UnitType::WallUnit;
        assert!(matches!(assemble(&t, &p, "x"), Err(Error::InvalidParams { bound }) if bound.contains("wall-unit")));
        p = gondola(3);
        p.depth = 0.9;
        assert!(matches!(assemble(&t, &p, "x"), Err(Error::InvalidParams { bound }) if bound.starts_with("depth")));
    }

    #[test]
    fn non_parameterizable_template_is_rejected() {
        let mut t = shelf_template();
        t.kind = FacilityKind::CheckoutCounter;
        assert!(matches!(assemble(&t, &gondola(3), "x"), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn column_counts() {
        let mut p = gondola(1);
        p.length = 2.0;
        p.double_sided = false;
        p.unit_type = UnitType::WallUnit;
        let inst = assemble(&shelf_template(), &p, "c").unwrap();
        assert_eq!(enumerate_slots(&inst, 0.25).unwrap().len(), 8);
        assert_eq!(enumerate_slots(&inst, 2.0).unwrap().len(), 1);
        assert!(matches!(enumerate_slots(&inst, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(enumerate_slots(&inst, -1.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn three_tier_gondola_slot_count_matches_enumeration() {
        let mut p = gondola(3);
        p.length = 1.2;
        let inst = assemble(&shelf_template(), &p, "g").unwrap();
        let slots = enumerate_slots(&inst, 0.3).unwrap();
        let mut brute = 0;
        for _side in 0..2 {
            for _tier in 0..3 {
                let mut x = 0.0;
                while x + 0.3 <= 1.2 + 1e-9 {
                    brute += 1;
                    x += 0.3;
                }
            }
        }
        assert_eq!(brute, 24);
        assert_eq!(slots.len(), brute);
        let ids: Vec<_> = slots.iter().map(|s| s.id).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
    }

    #[test]
    fn grid_product_bound_and_cap_filter() {
        let t = shelf_template();
        let mut g = ParamGrid::fixed(&gondola(3));
        g.tiers = vec![3, 4, 5];
        g.length = vec![1.0, 2.0];
        let out = expand_parameter_grid(&t, &g).unwrap();
        assert!(out.len() <= 6);
        assert_eq!(out.len(), 6);

        let mut none = ParamGrid::fixed(&gondola(8));
        none.tier_spacing = vec![0.7, 0.8];
        assert!(expand_parameter_grid(&t, &none).unwrap().is_empty());

        let mut empty = ParamGrid::fixed(&gondola(3));
        empty.depth.clear();
        assert!(matches!(
            expand_parameter_grid(&t, &empty),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn grid_count_equals_brute_force_filter() {
        let t = shelf_template();
        let mut g = ParamGrid::fixed(&gondola(3));
        g.tiers = vec![4, 5, 6];
        g.tier_spacing = vec![0.3, 0.4];
        g.length = vec![1.0, 2.0];
        let got = expand_parameter_grid(&t, &g).unwrap();
        // brute force: height = 0.2 + tiers * (spacing + 0.03) <= 2.5
        let mut expected = 0;
        for tiers in [4.0, 5.0, 6.0] {
            for sp in [0.3, 0.4] {
                for _len in [1.0, 2.0] {
                    if 0.2 + tiers * (sp + 0.03) <= 2.5 + 1e-9 {
                        expected += 1;
                    }
                }
            }
        }
        // only (6, 0.4) breaks the cap: 12 - 2 = 10
        assert_eq!(expected, 10);
        assert_eq!(got.len(), expected);
    }

    fn arb_params() -> impl Strategy<Value = ShelfParams> {
        (
            prop_oneof![
                Just(UnitType::Gondola),
                Just(UnitType::WallUnit),
                Just(UnitType::EndCap)
            ],
            any::<bool>(),
            1u32..=8,
            0.2f64..0.8,
            0.6f64..4.0,
            0.3f64..0.8,
            0.0f64..0.4,
            0.01f64..0.05,
        )
            .prop_map(|(unit_type, ds, tiers, sp, len, depth, base, thick)| {
                let double_sided = ds && unit_type == UnitType::Gondola;
                let length = if unit_type == UnitType::EndCap {
                    len.min(1.2)
                } else {
                    len
                };
                ShelfParams {
                    unit_type,
                    double_sided,
                    tiers,
                    tier_spacing: sp,
                    length,
                    depth,
                    base_height: base,
                    board_thickness: thick,
                    material_tag: "wood".into(),
                }
            })
            .prop_filter("height cap", |p| p.validate().is_ok())
    }

    proptest! {
        #[test]
        fn component_count_formula(p in arb_params()) {
            let inst = assemble(&shelf_template(), &p, "p").unwrap();
            prop_assert_eq!(count(&inst, PartKind::BackPanel), 1);
            prop_assert_eq!(count(&inst, PartKind::SidePanel), 2);
            prop_assert_eq!(count(&inst, PartKind::BaseSupport), 1);
            prop_assert_eq!(count(&inst, PartKind::ShelfBoard), (p.tiers * p.sides()) as usize);
            let bb = inst.bounds();
            for c in &inst.components {
                prop_assert!(bb.contains(&c.local, 1e-9));
            }
            prop_assert!((inst.footprint.depth - (p.depth * f64::from(p.sides()) + BACK_PANEL_THICKNESS)).abs() < 1e-12);
        }

        #[test]
        fn slots_inside_footprint_and_disjoint(p in arb_params(), cw in 0.1f64..0.6) {
            let inst = assemble(&shelf_template(), &p, "p").unwrap();
            let cw = cw.min(p.length);
            let slots = enumerate_slots(&inst, cw).unwrap();
            let fp = Rect::new(0.0, 0.0, inst.footprint.width, inst.footprint.depth);
            for s in &slots {
                prop_assert!(fp.contains_rect(&s.surface, 1e-9));
            }
            for (i, a) in slots.iter().enumerate() {
                for b in &slots[i + 1..] {
                    if a.id.side == b.id.side && a.id.tier == b.id.tier {
                        prop_assert!(!a.surface.overlaps(&b.surface));
                    }
                }
            }
            // columns tile the board length
            let inner = p.length - 2.0 * SIDE_PANEL_THICKNESS;
            let per_tier: f64 = slots.iter()
                .filter(|s| s.id.side == Side::Front && s.id.tier == 0)
                .map(|s| s.surface.width()).sum();
            prop_assert!((per_tier - inner).abs() < 1e-9);
        }

        #[test]
        fn assemble_is_deterministic(p in arb_params()) {
            let a = assemble(&shelf_template(), &p, "p").unwrap();
            let b = assemble(&shelf_template(), &p, "p").unwrap();
            prop_assert_eq!(
                crate::canon::to_canonical_string(&a),
                crate::canon::to_canonical_string(&b)
            );
        }
    }
}
