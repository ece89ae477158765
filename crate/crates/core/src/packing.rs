//! 1-D packing arithmetic shared by the layout rule checker and the
//! placement engine, so "a zone admits a row" means the same thing in both.

use serde::{Deserialize, Serialize};

use crate::facility::{BACK_PANEL_THICKNESS, COUNTER_DEPTH, COUNTER_LENGTH};
use crate::geom::{Axis, Rect};

/// Thickness of the perimeter wall boxes, laid inside the footprint.
pub const WALL_THICKNESS: f64 = 0.1;
/// Shortest legal shelf unit.
pub const MIN_UNIT_LENGTH: f64 = 0.6;

/// How a zone edge borders the rest of the store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeKind {
    /// Shared with another zone: keep half an aisle so neighbors form a full one.
    Interior,
    /// Store wall: single-sided units may sit flush against its inner face;
    /// anything else keeps a full aisle.
    Wall,
    /// Store wall holding the entrance: keep a full aisle clear.
    EntranceWall,
}

/// Edge kinds of a zone, indexed as (x-low, x-high, y-low, y-high).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZoneEdges {
    pub x_lo: EdgeKind,
    pub x_hi: EdgeKind,
    pub y_lo: EdgeKind,
    pub y_hi: EdgeKind,
}

impl ZoneEdges {
    pub fn lo(&self, axis: Axis) -> EdgeKind {
        match axis {
            Axis::X => self.x_lo,
            Axis::Y => self.y_lo,
        }
    }

    pub fn hi(&self, axis: Axis) -> EdgeKind {
        match axis {
            Axis::X => self.x_hi,
            Axis::Y => self.y_hi,
        }
    }
}

/// Usable interval along `axis` after edge clearances for fixtures whose
/// faces need aisle access: half an aisle on interior edges, wall thickness
/// plus a full aisle on store walls.
pub fn inset_interval(region: &Rect, edges: &ZoneEdges, axis: Axis, aisle: f64) -> (f64, f64) {
    let clear = |k: EdgeKind| match k {
        EdgeKind::Interior => aisle * 0.5,
        EdgeKind::Wall | EdgeKind::EntranceWall => WALL_THICKNESS + aisle,
    };
    (
        region.lo(axis) + clear(edges.lo(axis)),
        region.hi(axis) - clear(edges.hi(axis)),
    )
}

/// Number of parallel rows of depth `row_depth` that fit in `span` with at
/// least `aisle` between neighbours.
pub fn rows_that_fit(span: f64, row_depth: f64, aisle: f64) -> u32 {
    if span + 1e-9 < row_depth || row_depth <= 0.0 {
        return 0;
    }
    (((span - row_depth) / (row_depth + aisle)) + 1e-9).floor() as u32 + 1
}

/// Row plan for a zone: rows run along `row_axis` and stack across it.
#[derive(Debug, Clone, PartialEq)]
pub struct RowPlan {
    pub row_axis: Axis,
    /// Interval along the row axis available to units (after end aisles).
    pub along: (f64, f64),
    /// Single-sided rows flush against walls parallel to the rows (lo, hi).
    pub wall_rows: (bool, bool),
    /// Start coordinate (across axis) of each interior row.
    pub interior_rows: Vec<f64>,
    pub wall_row_depth: f64,
    pub interior_row_depth: f64,
}

impl RowPlan {
    pub fn row_count(&self) -> usize {
        self.interior_rows.len() + usize::from(self.wall_rows.0) + usize::from(self.wall_rows.1)
    }

    pub fn along_length(&self) -> f64 {
        self.along.1 - self.along.0
    }
}

/// Lays out rows in a zone. `interior_depth` is the footprint depth of one
/// interior row (a double-sided unit or two single-sided units back to back);
/// `wall_depth` is the footprint depth of a single-sided wall unit, or `None`
/// when wall rows are not wanted. Rows shorter than `unit_length` are useless.
pub fn plan_rows(
    region: &Rect,
    edges: &ZoneEdges,
    row_axis: Axis,
    interior_depth: f64,
    wall_depth: Option<f64>,
    unit_length: f64,
    aisle: f64,
) -> Option<RowPlan> {
    let across = row_axis.other();
    // Full aisle at both row ends (plus wall thickness on walls), so every
    // aisle connects to a cross aisle.
    let end = |k: EdgeKind| match k {
        EdgeKind::Interior => aisle,
        EdgeKind::Wall | EdgeKind::EntranceWall => WALL_THICKNESS + aisle,
    };
    let along = (
        region.lo(row_axis) + end(edges.lo(row_axis)),
        region.hi(row_axis) - end(edges.hi(row_axis)),
    );
    if along.1 - along.0 + 1e-9 < unit_length {
        return None;
    }

    let (lo0, hi0) = (region.lo(across), region.hi(across));
    let (mut a, mut b) = inset_interval(region, edges, across, aisle);
    let mut wall_rows = (false, false);
    if let Some(wd) = wall_depth {
        if edges.lo(across) == EdgeKind::Wall && hi0 - WALL_THICKNESS - (lo0 + WALL_THICKNESS) >= wd - 1e-9 {
            wall_rows.0 = true;
            a = lo0 + WALL_THICKNESS + wd + aisle;
        }
        let hi_face = hi0 - WALL_THICKNESS;
        let lo_limit = if wall_rows.0 { a } else { lo0 + WALL_THICKNESS };
        if edges.hi(across) == EdgeKind::Wall && hi_face - wd >= lo_limit - 1e-9 {
            wall_rows.1 = true;
            b = hi_face - wd - aisle;
        }
    }

    let n = if b > a {
        rows_that_fit(b - a, interior_depth, aisle)
    } else {
        0
    };
    let mut interior_rows = Vec::with_capacity(n as usize);
    if n > 0 {
        let used = f64::from(n) * interior_depth + f64::from(n - 1) * aisle;
        let start = a + (b - a - used) * 0.5;
        for i in 0..n {
            interior_rows.push(start + f64::from(i) * (interior_depth + aisle));
        }
    }
    let plan = RowPlan {
        row_axis,
        along,
        wall_rows,
        interior_rows,
        wall_row_depth: wall_depth.unwrap_or(0.0),
        interior_row_depth: interior_depth,
    };
    if plan.row_count() == 0 {
        None
    } else {
        Some(plan)
    }
}

/// Picks the row axis giving the most shelf length; ties prefer rows along x.
pub fn best_row_axis(
    region: &Rect,
    edges: &ZoneEdges,
    interior_depth: f64,
    wall_depth: Option<f64>,
    unit_length: f64,
    aisle: f64,
) -> Option<(Axis, RowPlan)> {
    let score = |p: &RowPlan| p.row_count() as f64 * p.along_length();
    let x = plan_rows(region, edges, Axis::X, interior_depth, wall_depth, unit_length, aisle);
    let y = plan_rows(region, edges, Axis::Y, interior_depth, wall_depth, unit_length, aisle);
    match (x, y) {
        (Some(px), Some(py)) => {
            if score(&py) > score(&px) + 1e-9 {
                Some((Axis::Y, py))
            } else {
                Some((Axis::X, px))
            }
        }
        (Some(px), None) => Some((Axis::X, px)),
        (None, Some(py)) => Some((Axis::Y, py)),
        (None, None) => None,
    }
}

/// Counter lane plan for a checkout zone. Counters run along `lane_axis`
/// (perpendicular to the entrance wall) and repeat across it with a lane of
/// at least `aisle` between neighbours.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterPlan {
    pub lane_axis: Axis,
    /// Start coordinate along the lane axis shared by all counters.
    pub along_start: f64,
    /// Start coordinate across the lane axis of each counter.
    pub starts: Vec<f64>,
}

pub fn plan_counters(region: &Rect, edges: &ZoneEdges, lane_axis: Axis, aisle: f64) -> Option<CounterPlan> {
    let across = lane_axis.other();
    let (a0, a1) = inset_interval(region, edges, lane_axis, aisle);
    if a1 - a0 + 1e-9 < COUNTER_LENGTH {
        return None;
    }
    let (c0, c1) = inset_interval(region, edges, across, aisle);
    // counters are walked around on both long sides: keep a lane on each
    let n = rows_that_fit(c1 - c0, COUNTER_DEPTH, aisle);
    if n == 0 {
        return None;
    }
    let used = f64::from(n) * COUNTER_DEPTH + f64::from(n - 1) * aisle;
    let start = c0 + (c1 - c0 - used) * 0.5;
    // counters sit on the entrance side of the usable band
    let entrance_at_hi = matches!(edges.hi(lane_axis), EdgeKind::EntranceWall);
    let along_start = if entrance_at_hi { a1 - COUNTER_LENGTH } else { a0 };
    Some(CounterPlan {
        lane_axis,
        along_start,
        starts: (0..n).map(|i| start + f64::from(i) * (COUNTER_DEPTH + aisle)).collect(),
    })
}

/// Footprint depth of an interior row made from single-sided units of
/// `depth`, mounted back to back.
pub fn back_to_back_depth(depth: f64) -> f64 {
    2.0 * (depth + BACK_PANEL_THICKNESS)
}
