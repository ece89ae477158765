//! Turns a refined layout into a scene graph: perimeter framework and
//! checkout counters, zone shelf rows, then product filling.

mod fill;
mod framework;
mod shelves;
mod validity;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::canon::canonicalize;
use crate::catalog::{Catalog, Category, Dims, CHECKOUT_LABEL};
use crate::error::Result;
use crate::facility::{FacilityInstance, Side, Slot};
use crate::geom::{Box3, Pose2, Rect, Yaw};
use crate::layout::{plan_layout, Layout, PlannerBackend, StoreSpec, Wall, DEFAULT_MAX_ITERS};
use crate::rng::SeedStream;

pub use fill::fill_products;
pub use framework::{place_framework, BASKET_SIZE, WALL_HEIGHT};
pub use shelves::place_zone_shelves;
pub use validity::{validate_scene, ValidityReport};

pub const DEFAULT_FILL_RATE: f64 = 0.85;
pub const DEFAULT_COLUMN_WIDTH: f64 = 0.25;
/// Margin kept between a product and its slot on each side, and below the
/// next board.
pub const PRODUCT_MARGIN: f64 = 0.005;
/// Height budget above top-tier surfaces, which have no board overhead.
pub const TOP_TIER_HEADROOM: f64 = 0.4;

/// Zone label to goods category; labels mapped to `None` are never stocked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryMap(pub BTreeMap<String, Option<Category>>);

impl Default for CategoryMap {
    fn default() -> Self {
        let mut m: BTreeMap<String, Option<Category>> = Category::ALL
            .iter()
            .map(|c| (c.as_str().to_string(), Some(*c)))
            .collect();
        m.insert(CHECKOUT_LABEL.to_string(), None);
        CategoryMap(m)
    }
}

impl CategoryMap {
    pub fn category(&self, label: &str) -> Option<Category> {
        self.0.get(label).copied().flatten()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitRole {
    Counter,
    /// Free-standing double-sided run.
    Gondola,
    /// One half of a back-to-back pair of single-sided units.
    BackToBack,
    WallRow,
    EndCap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedInstance {
    pub instance_id: String,
    pub facility: FacilityInstance,
    pub pose: Pose2,
    pub zone_id: String,
    pub role: UnitRole,
}

impl PlacedInstance {
    pub fn footprint(&self) -> Rect {
        self.pose.footprint(self.facility.size())
    }

    /// World box of the free space above a slot surface.
    pub fn slot_world_box(&self, slot: &Slot) -> Box3 {
        let r = self.pose.rect_to_world(self.facility.size(), &slot.surface);
        let h = slot.clearance.unwrap_or(TOP_TIER_HEADROOM);
        Box3::new(r.x0, r.y0, slot.surface_z, r.width(), r.height(), h)
    }

    /// Local y of the aisle-side edge for slots on `side`.
    pub fn aisle_edge_y(&self, side: Side) -> f64 {
        match side {
            Side::Front => 0.0,
            Side::Back => self.facility.footprint.depth,
        }
    }
}

/// Perimeter wall segment; an obstacle, never an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallBox {
    pub id: String,
    pub wall: Wall,
    pub bounds: Box3,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SlotAddress {
    pub instance_id: String,
    pub side: Side,
    pub tier: u32,
    pub column: u32,
    pub depth_index: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductPose {
    /// Center of the bottom face.
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub yaw: Yaw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductPlacement {
    pub product_instance_id: String,
    pub asset_id: String,
    pub slot: SlotAddress,
    pub pose: ProductPose,
    pub bounds: Box3,
    pub dims: Dims,
    pub front_facing: bool,
}

/// Open-top basket resting on a checkout counter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasketInstance {
    pub basket_id: String,
    pub counter_id: String,
    pub template_id: String,
    pub bounds: Box3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneGraph {
    pub scene_id: String,
    pub seed: u64,
    pub catalog_version: String,
    pub layout: Layout,
    pub walls: Vec<WallBox>,
    pub placed: Vec<PlacedInstance>,
    pub products: Vec<ProductPlacement>,
    pub basket_zones: Vec<BasketInstance>,
}

impl SceneGraph {
    pub fn instance(&self, id: &str) -> Option<&PlacedInstance> {
        self.placed
            .binary_search_by(|p| p.instance_id.as_str().cmp(id))
            .ok()
            .map(|i| &self.placed[i])
    }

    pub fn zone_label(&self, zone_id: &str) -> Option<&str> {
        self.layout.zone(zone_id).map(|z| z.label.as_str())
    }

    /// Plan rectangles of everything a walker cannot pass through.
    pub fn obstacles(&self) -> Vec<Rect> {
        self.walls
            .iter()
            .map(|w| w.bounds.plan())
            .chain(self.placed.iter().map(|p| p.footprint()))
            .collect()
    }

    pub(crate) fn sort(&mut self) {
        self.placed.sort_by(|a, b| a.instance_id.cmp(&b.instance_id));
        self.products.sort_by(|a, b| a.slot.cmp(&b.slot));
        self.basket_zones.sort_by(|a, b| a.basket_id.cmp(&b.basket_id));
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GenerationReport {
    pub scene_id: String,
    pub warnings: Vec<String>,
    pub facility_count: usize,
    pub product_count: usize,
    pub filled_columns: usize,
    pub empty_columns: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationOptions {
    pub fill_rate: f64,
    pub column_width: f64,
    pub max_iters: u32,
    pub category_map: CategoryMap,
}

impl Default for GenerationOptions {
    fn default() -> Self {
        GenerationOptions {
            fill_rate: DEFAULT_FILL_RATE,
            column_width: DEFAULT_COLUMN_WIDTH,
            max_iters: DEFAULT_MAX_ITERS,
            category_map: CategoryMap::default(),
        }
    }
}

/// Full pipeline with default options and the heuristic backend.
pub fn generate_scene(spec: &StoreSpec, catalog: &Catalog) -> Result<SceneGraph> {
    let backend = crate::layout::HeuristicBackend;
    generate_scene_with(spec, catalog, &GenerationOptions::default(), &backend, None).map(|(s, _)| s)
}

/// Plans, places and fills one store. The returned scene is in canonical
/// form: serializing and re-reading it yields an identical value.
pub fn generate_scene_with(
    spec: &StoreSpec,
    catalog: &Catalog,
    opts: &GenerationOptions,
    backend: &dyn PlannerBackend,
    scene_id: Option<&str>,
) -> Result<(SceneGraph, GenerationReport)> {
    let layout = plan_layout(spec, catalog, backend, opts.max_iters)?;
    let seeds = SeedStream::new(spec.seed).derive("placement");
    let scene_id = scene_id
        .map(str::to_string)
        .unwrap_or_else(|| format!("scene-{:016x}", spec.seed));
    let mut report = GenerationReport {
        scene_id: scene_id.clone(),
        ..Default::default()
    };

    let mut scene = place_framework(&layout, catalog, &seeds.derive("framework"))?;
    scene.scene_id = scene_id;
    scene.catalog_version = catalog.version.clone();
    for (k, zone) in layout.zones.iter().enumerate() {
        if zone.label == CHECKOUT_LABEL {
            continue;
        }
        let units = place_zone_shelves(
            &layout.store,
            zone,
            catalog,
            opts.column_width,
            &seeds.derive_index("zone", k as u64),
        )?;
        if units.is_empty() {
            report.warnings.push(format!(
                "zone {} ({}) fits no shelf row; left empty",
                zone.id, zone.label
            ));
        }
        scene.placed.extend(units);
    }
    scene.sort();
    let scene = fill_products(scene, catalog, opts, &seeds.derive("fill"), &mut report)?;
    let scene: SceneGraph = canonicalize(&scene)?;
    report.facility_count = scene.placed.len();
    report.product_count = scene.products.len();
    Ok((scene, report))
}
