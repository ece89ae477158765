//! Annotated asset catalog: hand-held goods plus facility templates, and the
//! retrieval queries the placement stage issues against them.

mod synth;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::facility::ShelfParams;

pub use synth::{synth_catalog, CategoryRange, CategoryTable};

/// Closed goods taxonomy. Each category doubles as the zone label that stocks it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    Beverages,
    Produce,
    Dairy,
    Snacks,
    Bakery,
    Frozen,
    Household,
    PersonalCare,
    Canned,
    Condiments,
}

impl Category {
    pub const ALL: [Category; 10] = [
        Category::Beverages,
        Category::Produce,
        Category::Dairy,
        Category::Snacks,
        Category::Bakery,
        Category::Frozen,
        Category::Household,
        Category::PersonalCare,
        Category::Canned,
        Category::Condiments,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Beverages => "beverages",
            Category::Produce => "produce",
            Category::Dairy => "dairy",
            Category::Snacks => "snacks",
            Category::Bakery => "bakery",
            Category::Frozen => "frozen",
            Category::Household => "household",
            Category::PersonalCare => "personal-care",
            Category::Canned => "canned",
            Category::Condiments => "condiments",
        }
    }

    pub fn parse(s: &str) -> Option<Category> {
        Category::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Zone label served by checkout counters and baskets.
pub const CHECKOUT_LABEL: &str = "checkout";

/// Width x depth x height in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dims {
    pub width: f64,
    pub depth: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetRecord {
    pub id: String,
    pub name: String,
    pub category: Category,
    pub dims: Dims,
    pub mass: f64,
    pub friction: f64,
    pub color_tag: String,
    pub material_tag: String,
    pub description: String,
}

impl AssetRecord {
    pub fn validate(&self) -> Result<()> {
        let d = self.dims;
        for (name, v) in [("width", d.width), ("depth", d.depth), ("height", d.height)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::params(format!(
                    "{}: {name} must be in (0, 1] m (got {v})",
                    self.id
                )));
            }
        }
        if !(self.mass > 0.0) {
            return Err(Error::params(format!("{}: mass must be > 0", self.id)));
        }
        if !(self.friction > 0.0 && self.friction <= 2.0) {
            return Err(Error::params(format!("{}: friction must be in (0, 2]", self.id)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FacilityKind {
    Shelf,
    Refrigerator,
    CheckoutCounter,
    Basket,
    Bin,
}

impl FacilityKind {
    pub const ALL: [FacilityKind; 5] = [
        FacilityKind::Shelf,
        FacilityKind::Refrigerator,
        FacilityKind::CheckoutCounter,
        FacilityKind::Basket,
        FacilityKind::Bin,
    ];

    pub fn is_parameterizable(self) -> bool {
        self == FacilityKind::Shelf
    }

    /// Kinds that hold goods on tiered surfaces.
    pub fn is_stocked(self) -> bool {
        matches!(
            self,
            FacilityKind::Shelf | FacilityKind::Refrigerator | FacilityKind::Bin
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacilityTemplate {
    pub id: String,
    pub kind: FacilityKind,
    /// Defaults for shelves; fixed dimensions for refrigerators and bins.
    pub default_params: Option<ShelfParams>,
    pub material_options: Vec<String>,
    pub zone_affinity: BTreeSet<String>,
}

impl FacilityTemplate {
    pub fn validate(&self) -> Result<()> {
        if self.zone_affinity.is_empty() {
            return Err(Error::params(format!("{}: zone_affinity is empty", self.id)));
        }
        if self.kind.is_parameterizable() {
            match &self.default_params {
                Some(p) => p.validate()?,
                None => {
                    return Err(Error::params(format!(
                        "{}: parameterizable kind needs default_params",
                        self.id
                    )))
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub version: String,
    pub seed: u64,
    pub goods: Vec<AssetRecord>,
    pub facilities: Vec<FacilityTemplate>,
}

impl Catalog {
    /// Checks record-level and catalog-level invariants.
    pub fn validate(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        for g in &self.goods {
            g.validate()?;
            if !ids.insert(g.id.as_str()) {
                return Err(Error::params(format!("duplicate good id {}", g.id)));
            }
        }
        let mut fids = BTreeSet::new();
        for f in &self.facilities {
            f.validate()?;
            if !fids.insert(f.id.as_str()) {
                return Err(Error::params(format!("duplicate facility id {}", f.id)));
            }
        }
        for c in Category::ALL {
            if !self.goods.iter().any(|g| g.category == c) {
                return Err(Error::params(format!("category {c} has no goods")));
            }
        }
        Ok(())
    }

    pub fn good(&self, id: &str) -> Option<&AssetRecord> {
        self.goods
            .binary_search_by(|g| g.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.goods[i])
    }

    pub fn facility(&self, id: &str) -> Option<&FacilityTemplate> {
        self.facilities.iter().find(|f| f.id == id)
    }

    pub fn goods_by_category(&self) -> BTreeMap<Category, usize> {
        let mut m = BTreeMap::new();
        for g in &self.goods {
            *m.entry(g.category).or_insert(0) += 1;
        }
        m
    }
}

/// Retrieval filter for goods. Bounds are inclusive.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GoodsFilter {
    pub category: Option<Category>,
    pub max_dims: Option<Dims>,
    pub min_dims: Option<Dims>,
    pub color_tag: Option<String>,
    pub material_tag: Option<String>,
}

impl GoodsFilter {
    pub fn category(c: Category) -> Self {
        GoodsFilter {
            category: Some(c),
            ..Default::default()
        }
    }

    pub fn with_max_dims(mut self, d: Dims) -> Self {
        self.max_dims = Some(d);
        self
    }

    pub fn matches(&self, g: &AssetRecord) -> bool {
        if self.category.is_some_and(|c| c != g.category) {
            return false;
        }
        if let Some(m) = self.max_dims {
            if g.dims.width > m.width || g.dims.depth > m.depth || g.dims.height > m.height {
                return false;
            }
        }
        if let Some(m) = self.min_dims {
            if g.dims.width < m.width || g.dims.depth < m.depth || g.dims.height < m.height {
                return false;
            }
        }
        if self.color_tag.as_ref().is_some_and(|t| *t != g.color_tag) {
            return false;
        }
        if self.material_tag.as_ref().is_some_and(|t| *t != g.material_tag) {
            return false;
        }
        true
    }
}

/// Goods satisfying every clause of `filter`, sorted by id.
pub fn query_goods<'a>(catalog: &'a Catalog, filter: &GoodsFilter) -> Vec<&'a AssetRecord> {
    let mut out: Vec<&AssetRecord> = catalog.goods.iter().filter(|g| filter.matches(g)).collect();
    out.sort_by(|a, b| a.id.cmp(&b.id));
    out
}

/// Facility templates whose affinity includes `zone_label`, sorted by id.
pub fn query_facilities<'a>(catalog: &'a Catalog, zone_label: &str) -> Vec<&'a FacilityTemplate> {
    let mut out: Vec<&FacilityTemplate> = catalog
        .facilities
        .iter()
        .filter(|f| f.zone_affinity.contains(zone_label))
        .collect();
    out.sort_by(|a, b| a.id.cmp(&b.id));
    out
}
