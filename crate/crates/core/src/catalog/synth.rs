use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{AssetRecord, Catalog, Category, Dims, FacilityKind, FacilityTemplate, CHECKOUT_LABEL};
use crate::canon::quantize;
use crate::error::{Error, Result};
use crate::facility::{ShelfParams, UnitType, DEFAULT_BASE_HEIGHT, DEFAULT_BOARD_THICKNESS};
use crate::rng::{Rng, SeedStream};

const TABLE_JSON: &str = include_str!("../../data/category_table.json");

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CategoryRange {
    pub width: [f64; 2],
    pub depth: [f64; 2],
    pub height: [f64; 2],
    pub mass: [f64; 2],
    pub friction: [f64; 2],
    pub colors: Vec<String>,
    pub materials: Vec<String>,
    pub nouns: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CategoryTable {
    pub version: String,
    pub categories: BTreeMap<Category, CategoryRange>,
}

impl CategoryTable {
    /// The table shipped in `data/category_table.json`.
    pub fn bundled() -> &'static CategoryTable {
        static TABLE: OnceLock<CategoryTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            let t: CategoryTable = serde_json::from_str(TABLE_JSON).expect("bundled category table parses");
            assert_eq!(t.categories.len(), Category::ALL.len(), "table covers the taxonomy");
            t
        })
    }
}

const SHELF_MATERIALS: [&str; 4] = ["painted-steel", "oak-veneer", "birch-plywood", "brushed-aluminum"];
const FRIDGE_MATERIALS: [&str; 2] = ["glass-door", "stainless-steel"];
const COUNTER_MATERIALS: [&str; 2] = ["laminate", "stainless-steel"];

fn draw(rng: &mut Rng, r: [f64; 2]) -> f64 {
    quantize(rng.gen_range(r[0]..=r[1]))
}

fn pick<'a>(rng: &mut Rng, items: &'a [String]) -> &'a str {
    items.choose(rng).map(String::as_str).unwrap_or("unspecified")
}

/// Synthesizes a catalog; a pure function of its arguments.
pub fn synth_catalog(seed: u64, n_goods: usize, n_facilities: usize) -> Result<Catalog> {
    if n_goods < Category::ALL.len() {
        return Err(Error::invalid(format!(
            "n_goods must be >= {} (one per category), got {n_goods}",
            Category::ALL.len()
        )));
    }
    if n_facilities < FacilityKind::ALL.len() {
        return Err(Error::invalid(format!(
            "n_facilities must be >= {} (one per kind), got {n_facilities}",
            FacilityKind::ALL.len()
        )));
    }
    let table = CategoryTable::bundled();
    let root = SeedStream::new(seed);

    let mut rng = root.derive("goods").rng();
    let mut goods = Vec::with_capacity(n_goods);
    for i in 0..n_goods {
        let category = if i < Category::ALL.len() {
            Category::ALL[i]
        } else {
            *Category::ALL.choose(&mut rng).unwrap()
        };
        let range = &table.categories[&category];
        let dims = Dims {
            width: draw(&mut rng, range.width),
            depth: draw(&mut rng, range.depth),
            height: draw(&mut rng, range.height),
        };
        let mass = draw(&mut rng, range.mass);
        let friction = draw(&mut rng, range.friction);
        let color = pick(&mut rng, &range.colors).to_string();
        let material = pick(&mut rng, &range.materials).to_string();
        let noun = pick(&mut rng, &range.nouns);
        let name = format!("{color} {noun}");
        let description = format!(
            "{name} in {material} packaging, {:.0}x{:.0}x{:.0} mm, {mass:.2} kg ({category})",
            dims.width * 1000.0,
            dims.depth * 1000.0,
            dims.height * 1000.0
        );
        goods.push(AssetRecord {
            id: format!("good-{i:05}"),
            name,
            category,
            dims,
            mass,
            friction,
            color_tag: color,
            material_tag: material,
            description,
        });
    }

    let mut rng = root.derive("facilities").rng();
    let mut facilities = Vec::with_capacity(n_facilities);
    for i in 0..n_facilities {
        let kind = if i < FacilityKind::ALL.len() {
            FacilityKind::ALL[i]
        } else {
            let roll: f64 = rng.gen();
            match roll {
                r if r < 0.6 => FacilityKind::Shelf,
                r if r < 0.8 => FacilityKind::Refrigerator,
                r if r < 0.9 => FacilityKind::Bin,
                r if r < 0.95 => FacilityKind::CheckoutCounter,
                _ => FacilityKind::Basket,
            }
        };
        facilities.push(synth_template(&mut rng, i, kind, i < FacilityKind::ALL.len()));
    }

    Ok(Catalog {
        version: format!("{}+synth/1", table.version),
        seed,
        goods,
        facilities,
    })
}

fn all_goods_labels() -> BTreeSet<String> {
    Category::ALL.iter().map(|c| c.as_str().to_string()).collect()
}

fn synth_template(rng: &mut Rng, i: usize, kind: FacilityKind, base: bool) -> FacilityTemplate {
    let id = format!("fac-{i:04}");
    match kind {
        FacilityKind::Shelf => {
            let zone_affinity = if base {
                all_goods_labels()
            } else {
                let mut s: BTreeSet<String> = Category::ALL
                    .iter()
                    .filter(|_| rng.gen_bool(0.5))
                    .map(|c| c.as_str().to_string())
                    .collect();
                if s.is_empty() {
                    s.insert(Category::ALL.choose(rng).unwrap().as_str().to_string());
                }
                s
            };
            let material_options: Vec<String> = SHELF_MATERIALS.iter().map(|s| s.to_string()).collect();
            let default_params = loop {
                let unit_type = *[UnitType::Gondola, UnitType::WallUnit, UnitType::EndCap]
                    .choose(rng)
                    .unwrap();
                let p = ShelfParams {
                    unit_type,
                    double_sided: unit_type == UnitType::Gondola,
                    tiers: rng.gen_range(3..=6),
                    tier_spacing: *[0.3, 0.35, 0.4, 0.45].choose(rng).unwrap(),
                    length: if unit_type == UnitType::EndCap {
                        *[0.9, 1.0, 1.2].choose(rng).unwrap()
                    } else {
                        *[0.9, 1.0, 1.2, 1.5, 2.0].choose(rng).unwrap()
                    },
                    depth: *[0.4, 0.5, 0.6].choose(rng).unwrap(),
                    base_height: DEFAULT_BASE_HEIGHT,
                    board_thickness: DEFAULT_BOARD_THICKNESS,
                    material_tag: material_options.choose(rng).unwrap().clone(),
                };
                if p.validate().is_ok() {
                    break p;
                }
            };
            FacilityTemplate {
                id,
                kind,
                default_params: Some(default_params),
                material_options,
                zone_affinity,
            }
        }
        FacilityKind::Refrigerator => FacilityTemplate {
            id,
            kind,
            default_params: Some(ShelfParams {
                unit_type: UnitType::WallUnit,
                double_sided: false,
                tiers: 5,
                tier_spacing: 0.35,
                length: *[1.2, 1.5].choose(rng).unwrap(),
                depth: 0.6,
                base_height: DEFAULT_BASE_HEIGHT,
                board_thickness: DEFAULT_BOARD_THICKNESS,
                material_tag: FRIDGE_MATERIALS.choose(rng).unwrap().to_string(),
            }),
            material_options: FRIDGE_MATERIALS.iter().map(|s| s.to_string()).collect(),
            zone_affinity: ["dairy", "frozen", "beverages"].iter().map(|s| s.to_string()).collect(),
        },
        FacilityKind::Bin => FacilityTemplate {
            id,
            kind,
            default_params: Some(ShelfParams {
                unit_type: UnitType::Gondola,
                double_sided: true,
                tiers: 1,
                tier_spacing: 0.6,
                length: 1.2,
                depth: 0.5,
                base_height: 0.6,
                board_thickness: DEFAULT_BOARD_THICKNESS,
                material_tag: "woven-wicker".into(),
            }),
            material_options: vec!["woven-wicker".into(), "oak-veneer".into()],
            zone_affinity: ["produce".to_string()].into_iter().collect(),
        },
        FacilityKind::CheckoutCounter => FacilityTemplate {
            id,
            kind,
            default_params: None,
            material_options: COUNTER_MATERIALS.iter().map(|s| s.to_string()).collect(),
            zone_affinity: [CHECKOUT_LABEL.to_string()].into_iter().collect(),
        },
        FacilityKind::Basket => FacilityTemplate {
            id,
            kind,
            default_params: None,
            material_options: vec!["red-plastic".into(), "wire-mesh".into()],
            zone_affinity: [CHECKOUT_LABEL.to_string()].into_iter().collect(),
        },
    }
}
