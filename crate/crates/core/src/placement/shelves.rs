use rand::seq::SliceRandom;

use super::{PlacedInstance, UnitRole};
use crate::catalog::{Catalog, FacilityKind, FacilityTemplate};
use crate::error::{Error, Result};
use crate::facility::{
    assemble, assemble_fixed, enumerate_slots, FacilityInstance, ShelfParams, UnitType, BACK_PANEL_THICKNESS,
    MAX_ENDCAP_LENGTH,
};
use crate::geom::{Axis, Pose2, Rect, Yaw};
use crate::layout::{spec_row_plan, FunctionalZone, StoreSpec, ZonePlan};
use crate::packing::{RowPlan, MIN_UNIT_LENGTH, WALL_THICKNESS};
use crate::rng::SeedStream;

/// Board depth of end-cap units.
const ENDCAP_DEPTH: f64 = 0.4;

/// Yaw that turns the local front direction (-y) into `dir`.
pub(crate) fn facing(dir: (f64, f64)) -> Yaw {
    [Yaw::D0, Yaw::D90, Yaw::D180, Yaw::D270]
        .into_iter()
        .find(|y| {
            let (x, yy) = y.rotate(0.0, -1.0);
            (x - dir.0).abs() < 1e-9 && (yy - dir.1).abs() < 1e-9
        })
        .expect("axis-aligned unit direction")
}

fn unit_dir(axis: Axis, sign: f64) -> (f64, f64) {
    match axis {
        Axis::X => (sign, 0.0),
        Axis::Y => (0.0, sign),
    }
}

/// Rectangle from intervals along the row axis and across it.
fn oriented(row_axis: Axis, along: (f64, f64), across: (f64, f64)) -> Rect {
    match row_axis {
        Axis::X => Rect::new(along.0, across.0, along.1, across.1),
        Axis::Y => Rect::new(across.0, along.0, across.1, along.1),
    }
}

struct Builder<'a> {
    zone: &'a FunctionalZone,
    template: &'a FacilityTemplate,
    column_width: f64,
    out: Vec<PlacedInstance>,
}

impl Builder<'_> {
    fn push(
        &mut self,
        id: String,
        params: Option<&ShelfParams>,
        rect: Rect,
        front: (f64, f64),
        role: UnitRole,
    ) -> Result<()> {
        let mut facility: FacilityInstance = match params {
            Some(p) if self.template.kind == FacilityKind::Shelf => assemble(self.template, p, &id)?,
            _ => assemble_fixed(self.template, &id)?,
        };
        facility.slots = enumerate_slots(&facility, self.column_width)?;
        let (cx, cy) = rect.center();
        let pose = Pose2 {
            x: cx,
            y: cy,
            yaw: facing(front),
        };
        debug_assert!({
            let f = pose.footprint(facility.size());
            (f.width() - rect.width()).abs() < 1e-9 && (f.height() - rect.height()).abs() < 1e-9
        });
        self.out.push(PlacedInstance {
            instance_id: id,
            facility,
            pose,
            zone_id: self.zone.id.clone(),
            role,
        });
        Ok(())
    }
}

fn endcap_params(base: &ShelfParams, row_depth: f64) -> Option<ShelfParams> {
    let length = (row_depth.min(MAX_ENDCAP_LENGTH) / 0.05 + 1e-9).floor() * 0.05;
    if length < MIN_UNIT_LENGTH {
        return None;
    }
    let p = ShelfParams {
        unit_type: UnitType::EndCap,
        double_sided: false,
        length,
        depth: ENDCAP_DEPTH,
        ..base.clone()
    };
    p.validate().ok().map(|()| p)
}

/// Shelf rows for one zone: flush wall rows, double-sided (or back-to-back)
/// interior rows, and end-caps where the row ends leave room. Returns an
/// empty list when the zone cannot hold a row.
pub fn place_zone_shelves(
    store: &StoreSpec,
    zone: &FunctionalZone,
    catalog: &Catalog,
    column_width: f64,
    seeds: &SeedStream,
) -> Result<Vec<PlacedInstance>> {
    let spec = zone
        .facility_spec
        .as_ref()
        .ok_or_else(|| Error::invalid(format!("zone {} has no facility spec", zone.id)))?;
    if spec.kind == FacilityKind::CheckoutCounter {
        return Ok(Vec::new());
    }
    let Some(ZonePlan::Rows(plan)) = spec_row_plan(store, &zone.region, spec) else {
        return Ok(Vec::new());
    };
    let template = catalog
        .facility(&spec.template_id)
        .ok_or_else(|| Error::GenerationFailed(format!("template {} not in catalog", spec.template_id)))?;
    let mut params = spec
        .params
        .clone()
        .ok_or_else(|| Error::invalid(format!("zone {} spec lacks unit params", zone.id)))?;
    if template.kind == FacilityKind::Shelf {
        let mut rng = seeds.rng();
        if let Some(m) = template.material_options.choose(&mut rng) {
            params.material_tag = m.clone();
        }
    }
    let single = ShelfParams {
        unit_type: UnitType::WallUnit,
        double_sided: false,
        ..params.clone()
    };

    let mut b = Builder {
        zone,
        template,
        column_width,
        out: Vec::new(),
    };
    place_rows(
        &mut b,
        &plan,
        &params,
        &single,
        spec.end_caps && template.kind == FacilityKind::Shelf,
    )?;
    Ok(b.out)
}

fn place_rows(
    b: &mut Builder,
    plan: &RowPlan,
    params: &ShelfParams,
    single: &ShelfParams,
    end_caps: bool,
) -> Result<()> {
    let row = plan.row_axis;
    let across = row.other();
    let len = params.length;
    let (a0, a1) = plan.along;
    let n = ((a1 - a0) / len + 1e-9).floor() as usize;
    if n == 0 {
        return Ok(());
    }
    let zone_id = b.zone.id.clone();
    let region = b.zone.region;

    // wall rows span the along interval, centered
    let wall_start = a0 + (a1 - a0 - n as f64 * len) * 0.5;
    let wd = single.footprint_depth();
    let walls = [
        (plan.wall_rows.0, region.lo(across) + WALL_THICKNESS, 1.0, "wall-lo"),
        (
            plan.wall_rows.1,
            region.hi(across) - WALL_THICKNESS - wd,
            -1.0,
            "wall-hi",
        ),
    ];
    for (present, s, sign, tag) in walls {
        if !present {
            continue;
        }
        for u in 0..n {
            let x = wall_start + u as f64 * len;
            let rect = oriented(row, (x, x + len), (s, s + wd));
            b.push(
                format!("{zone_id}/{tag}-{u:03}"),
                Some(single),
                rect,
                unit_dir(across, sign),
                UnitRole::WallRow,
            )?;
        }
    }

    let depth = plan.interior_row_depth;
    let cap = if end_caps { endcap_params(params, depth) } else { None };
    let cap_depth = cap.as_ref().map_or(0.0, |c| c.footprint_depth());
    let leftover = a1 - a0 - n as f64 * len;
    let caps = match &cap {
        Some(_) if leftover + 1e-9 >= 2.0 * cap_depth => 2,
        Some(_) if leftover + 1e-9 >= cap_depth => 1,
        _ => 0,
    };
    let block = n as f64 * len + caps as f64 * cap_depth;
    let block_start = a0 + (a1 - a0 - block) * 0.5;
    let run_start = block_start + if caps >= 1 { cap_depth } else { 0.0 };

    for (r, &s) in plan.interior_rows.iter().enumerate() {
        for u in 0..n {
            let x = run_start + u as f64 * len;
            if params.double_sided {
                b.push(
                    format!("{zone_id}/row-{r:02}-{u:03}"),
                    Some(params),
                    oriented(row, (x, x + len), (s, s + depth)),
                    unit_dir(across, -1.0),
                    UnitRole::Gondola,
                )?;
            } else {
                let half = params.depth + BACK_PANEL_THICKNESS;
                b.push(
                    format!("{zone_id}/row-{r:02}a-{u:03}"),
                    Some(params),
                    oriented(row, (x, x + len), (s, s + half)),
                    unit_dir(across, -1.0),
                    UnitRole::BackToBack,
                )?;
                b.push(
                    format!("{zone_id}/row-{r:02}b-{u:03}"),
                    Some(params),
                    oriented(row, (x, x + len), (s + half, s + 2.0 * half)),
                    unit_dir(across, 1.0),
                    UnitRole::BackToBack,
                )?;
            }
        }
        if let Some(cp) = &cap {
            let c0 = s + (depth - cp.length) * 0.5;
            let run_end = run_start + n as f64 * len;
            let ends = [(run_start - cap_depth, -1.0, "lo"), (run_end, 1.0, "hi")];
            for &(e, sign, tag) in ends.iter().take(caps) {
                b.push(
                    format!("{zone_id}/cap-{r:02}-{tag}"),
                    Some(cp),
                    oriented(row, (e, e + cap_depth), (c0, c0 + cp.length)),
                    unit_dir(row, sign),
                    UnitRole::EndCap,
                )?;
            }
        }
    }
    Ok(())
}
