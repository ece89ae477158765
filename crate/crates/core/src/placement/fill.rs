use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;

use super::{
    GenerationOptions, GenerationReport, PlacedInstance, ProductPlacement, ProductPose, SceneGraph, SlotAddress,
    PRODUCT_MARGIN, TOP_TIER_HEADROOM,
};
use crate::catalog::{query_goods, AssetRecord, Catalog, GoodsFilter};
use crate::error::{Error, Result};
use crate::facility::{Side, Slot};
use crate::geom::{Box3, Rect, Yaw};
use crate::rng::{Rng, SeedStream};

/// Facings that fit one behind another in a slot.
pub(crate) fn facing_count(slot_depth: f64, asset_depth: f64) -> u32 {
    (slot_depth / asset_depth + 1e-9).floor() as u32
}

fn fits(g: &AssetRecord, slot: &Slot) -> bool {
    let headroom = slot.clearance.unwrap_or(TOP_TIER_HEADROOM);
    g.dims.width + 2.0 * PRODUCT_MARGIN <= slot.surface.width() + 1e-9
        && g.dims.height + PRODUCT_MARGIN <= headroom + 1e-9
        && g.dims.depth <= slot.surface.height() + 1e-9
}

fn turn_around(y: Yaw) -> Yaw {
    match y {
        Yaw::D0 => Yaw::D180,
        Yaw::D90 => Yaw::D270,
        Yaw::D180 => Yaw::D0,
        Yaw::D270 => Yaw::D90,
    }
}

/// One asset type repeated from the aisle edge of the slot inwards.
fn stock_column(unit: &PlacedInstance, slot: &Slot, asset: &AssetRecord) -> Vec<ProductPlacement> {
    let size = unit.facility.size();
    let s = &slot.surface;
    let count = facing_count(s.height(), asset.dims.depth).max(1);
    let pitch = s.height() / f64::from(count);
    let cx = (s.x0 + s.x1) * 0.5;
    let (hw, hd) = (asset.dims.width * 0.5, asset.dims.depth * 0.5);
    let yaw = match slot.id.side {
        Side::Front => unit.pose.yaw,
        Side::Back => turn_around(unit.pose.yaw),
    };
    (0..count)
        .map(|k| {
            let offset = (f64::from(k) + 0.5) * pitch;
            let cy = match slot.id.side {
                Side::Front => s.y0 + offset,
                Side::Back => s.y1 - offset,
            };
            let world = unit
                .pose
                .rect_to_world(size, &Rect::new(cx - hw, cy - hd, cx + hw, cy + hd));
            let (wx, wy) = world.center();
            let id = &slot.id;
            let side = match id.side {
                Side::Front => "front",
                Side::Back => "back",
            };
            ProductPlacement {
                product_instance_id: format!("{}/{side}-{}-{}-{k}", unit.instance_id, id.tier, id.column),
                asset_id: asset.id.clone(),
                slot: SlotAddress {
                    instance_id: unit.instance_id.clone(),
                    side: id.side,
                    tier: id.tier,
                    column: id.column,
                    depth_index: k,
                },
                pose: ProductPose {
                    x: wx,
                    y: wy,
                    z: slot.surface_z,
                    yaw,
                },
                bounds: Box3::new(
                    world.x0,
                    world.y0,
                    slot.surface_z,
                    world.width(),
                    world.height(),
                    asset.dims.height,
                ),
                dims: asset.dims,
                front_facing: k == 0,
            }
        })
        .collect()
}

struct ZoneFill {
    products: Vec<ProductPlacement>,
    filled: usize,
    empty: usize,
    warnings: Vec<String>,
}

fn fill_zone(units: &[&PlacedInstance], goods: &[&AssetRecord], fill_rate: f64, rng: &mut Rng) -> ZoneFill {
    let mut out = ZoneFill {
        products: Vec::new(),
        filled: 0,
        empty: 0,
        warnings: Vec::new(),
    };
    for unit in units {
        for slot in &unit.facility.slots {
            if !rng.gen_bool(fill_rate) {
                out.empty += 1;
                continue;
            }
            let fitting: Vec<&&AssetRecord> = goods.iter().filter(|g| fits(g, slot)).collect();
            match fitting.choose(rng) {
                Some(asset) => {
                    out.products.extend(stock_column(unit, slot, asset));
                    out.filled += 1;
                }
                None => out.empty += 1,
            }
        }
    }
    out
}

/// Stocks every shelf column with probability `opts.fill_rate`. Zones fill
/// in parallel, each from its own seed stream, so the result does not
/// depend on scheduling.
pub fn fill_products(
    mut scene: SceneGraph,
    catalog: &Catalog,
    opts: &GenerationOptions,
    seeds: &SeedStream,
    report: &mut GenerationReport,
) -> Result<SceneGraph> {
    if !(0.0..=1.0).contains(&opts.fill_rate) {
        return Err(Error::invalid(format!(
            "fill_rate must be in [0, 1], got {}",
            opts.fill_rate
        )));
    }
    let zones: Vec<(usize, String, String)> = scene
        .layout
        .zones
        .iter()
        .enumerate()
        .map(|(k, z)| (k, z.id.clone(), z.label.clone()))
        .collect();
    let results: Vec<ZoneFill> = zones
        .par_iter()
        .map(|(k, zone_id, label)| {
            let units: Vec<&PlacedInstance> = scene
                .placed
                .iter()
                .filter(|p| &p.zone_id == zone_id && p.facility.kind.is_stocked())
                .collect();
            if units.is_empty() {
                return ZoneFill {
                    products: vec![],
                    filled: 0,
                    empty: 0,
                    warnings: vec![],
                };
            }
            let Some(category) = opts.category_map.category(label) else {
                return ZoneFill {
                    products: vec![],
                    filled: 0,
                    empty: 0,
                    warnings: vec![format!(
                        "zone {zone_id} ({label}) maps to no goods category; left unfilled"
                    )],
                };
            };
            let goods = query_goods(catalog, &GoodsFilter::category(category));
            if goods.is_empty() {
                return ZoneFill {
                    products: vec![],
                    filled: 0,
                    empty: 0,
                    warnings: vec![format!(
                        "no goods of category {category} for zone {zone_id}; left unfilled"
                    )],
                };
            }
            let mut rng = seeds.derive_index("zone", *k as u64).rng();
            fill_zone(&units, &goods, opts.fill_rate, &mut rng)
        })
        .collect();
    for r in results {
        scene.products.extend(r.products);
        report.filled_columns += r.filled;
        report.empty_columns += r.empty;
        report.warnings.extend(r.warnings);
    }
    scene.sort();
    Ok(scene)
}
