use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::canon::content_hash;
use crate::catalog::{synth_catalog, Catalog};
use crate::error::{Error, Result};
use crate::io::load_json;
use crate::layout::StoreSpec;
use crate::nav::{DEFAULT_CELL_SIZE, MAX_CELL_SIZE};
use crate::placement::DEFAULT_FILL_RATE;
use crate::tasks::RobotProfile;

pub const BENCH_SCENES: usize = 10;
pub const BENCH_EPISODES: usize = 100;
pub const DEFAULT_SYNTH_GOODS: usize = 400;
pub const DEFAULT_SYNTH_FACILITIES: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum CatalogSource {
    Path { path: PathBuf },
    Synth { seed: u64, goods: usize, facilities: usize },
}

impl CatalogSource {
    pub fn synth(seed: u64) -> Self {
        CatalogSource::Synth {
            seed,
            goods: DEFAULT_SYNTH_GOODS,
            facilities: DEFAULT_SYNTH_FACILITIES,
        }
    }

    pub fn load(&self) -> Result<Catalog> {
        let cat = match self {
            CatalogSource::Path { path } => load_json::<Catalog>(path)?,
            CatalogSource::Synth {
                seed,
                goods,
                facilities,
            } => synth_catalog(*seed, *goods, *facilities)?,
        };
        cat.validate()?;
        Ok(cat)
    }
}

/// Episode totals per track, spread evenly over the scenes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeCounts {
    pub collection: usize,
    pub checkout: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Store spec file; the built-in 30 x 20 m store when absent.
    pub store_spec: Option<PathBuf>,
    pub catalog: CatalogSource,
    /// Root of every random stream not tied to a scene.
    pub seed: u64,
    /// One scene per seed.
    pub scene_seeds: Vec<u64>,
    pub cell_size: f64,
    pub robot: RobotProfile,
    pub fill_rate: f64,
    pub episodes: EpisodeCounts,
    pub output_dir: PathBuf,
}

impl RunConfig {
    /// The benchmark setup: ten scenes and a hundred episodes per track.
    pub fn bench(seed: u64, output_dir: PathBuf) -> Self {
        RunConfig {
            store_spec: None,
            catalog: CatalogSource::synth(seed),
            seed,
            scene_seeds: (0..BENCH_SCENES as u64).map(|i| seed.wrapping_add(i)).collect(),
            cell_size: DEFAULT_CELL_SIZE,
            robot: RobotProfile::default(),
            fill_rate: DEFAULT_FILL_RATE,
            episodes: EpisodeCounts {
                collection: BENCH_EPISODES,
                checkout: BENCH_EPISODES,
            },
            output_dir,
        }
    }

    /// Reads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: RunConfig = load_json(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = cfg.store_spec.as_mut() {
            resolve(p);
        }
        if let CatalogSource::Path { path } = &mut cfg.catalog {
            resolve(path);
        }
        resolve(&mut cfg.output_dir);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scene_seeds.is_empty() {
            return Err(Error::invalid("scene_seeds must not be empty"));
        }
        if !(self.cell_size > 0.0 && self.cell_size <= MAX_CELL_SIZE) {
            return Err(Error::invalid(format!("cell_size must be in (0, {MAX_CELL_SIZE}]")));
        }
        if !(0.0..=1.0).contains(&self.fill_rate) {
            return Err(Error::invalid("fill_rate must be in [0, 1]"));
        }
        if !(self.robot.radius >= 0.0 && self.robot.reach > 0.0) {
            return Err(Error::invalid("robot radius must be >= 0 and reach > 0"));
        }
        if let Some(p) = &self.store_spec {
            if !p.is_file() {
                return Err(Error::invalid(format!("store spec {} not found", p.display())));
            }
        }
        if let CatalogSource::Path { path } = &self.catalog {
            if !path.is_file() {
                return Err(Error::invalid(format!("catalog {} not found", path.display())));
            }
        }
        Ok(())
    }

    /// Store spec for one scene seed.
    pub fn store_for(&self, seed: u64) -> Result<StoreSpec> {
        let mut spec = match &self.store_spec {
            Some(p) => load_json::<StoreSpec>(p)?,
            None => StoreSpec::default_store(seed),
        };
        spec.seed = seed;
        spec.validate()?;
        Ok(spec)
    }

    /// Hash of every setting that affects results; the output location is
    /// left out so that runs into different directories compare equal.
    pub fn content_hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        content_hash(&c)
    }
}
