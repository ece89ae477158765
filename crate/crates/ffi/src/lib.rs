//! C ABI over the marketgen library.
//!
//! Objects cross the boundary as opaque handles created by functions such
//! as `mg_catalog_synth` or `mg_scene_load` and released with the matching
//! `mg_*_free`. Every fallible call returns an [`MgStatus`]; on
//! failure [`mg_last_error`] describes the problem for the calling thread.
//! Strings returned by the library are owned by the caller and released
//! with [`mg_string_free`].

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use marketgen::bench::{score_spl, score_sr, Agent, BenchmarkReport, EpisodeResult, NoisyAgent, OracleAgent};
use marketgen::canon::{content_hash, from_json_str, to_canonical_string};
use marketgen::catalog::{synth_catalog, Catalog};
use marketgen::config::RunConfig;
use marketgen::io::{load_json, save_json, save_jsonl, to_jsonl_bytes};
use marketgen::layout::StoreSpec;
use marketgen::nav::{astar, rasterize, Cell, OccupancyGrid, DEFAULT_CELL_SIZE};
use marketgen::pipeline::{build_report, episode_stream, reproduce_bench};
use marketgen::placement::{generate_scene, SceneGraph};
use marketgen::render::{render_scene_svg, SceneSvgOptions};
use marketgen::tasks::{sample_episodes_hashed, Episode, RobotProfile, Track};
use marketgen::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidParams = 3,
    PlanningFailed = 4,
    GenerationFailed = 5,
    SamplingFailed = 6,
    ParseError = 7,
    HashMismatch = 8,
    NotApplicable = 9,
    Remote = 10,
    Io = 11,
    NoPath = 12,
    Panic = 13,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgTrack {
    InAisleCollection = 0,
    CheckoutUnloading = 1,
}

impl From<MgTrack> for Track {
    fn from(t: MgTrack) -> Self {
        match t {
            MgTrack::InAisleCollection => Track::InAisleCollection,
            MgTrack::CheckoutUnloading => Track::CheckoutUnloading,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgRobot {
    pub radius: f64,
    pub reach: f64,
}

impl From<MgRobot> for RobotProfile {
    fn from(r: MgRobot) -> Self {
        RobotProfile {
            radius: r.radius,
            reach: r.reach,
        }
    }
}

/// Agent settings; `p_skip` and `detour` apply to the noisy agent only.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgAgent {
    pub noisy: bool,
    pub p_skip: f64,
    pub detour: f64,
    pub seed: u64,
}

pub struct MgCatalog(Catalog);

pub struct MgScene {
    scene: SceneGraph,
    hash: String,
}

pub struct MgGrid(OccupancyGrid);

pub struct MgEpisodes(Vec<Episode>);

pub struct MgReport(BenchmarkReport);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> MgStatus {
    match e {
        Error::InvalidArgument(_) => MgStatus::InvalidArgument,
        Error::InvalidParams { .. } => MgStatus::InvalidParams,
        Error::PlanningFailed { .. } => MgStatus::PlanningFailed,
        Error::GenerationFailed(_) => MgStatus::GenerationFailed,
        Error::SamplingFailed(_) => MgStatus::SamplingFailed,
        Error::Parse { .. } => MgStatus::ParseError,
        Error::HashMismatch(_) => MgStatus::HashMismatch,
        Error::NotApplicable(_) => MgStatus::NotApplicable,
        Error::Remote(_) => MgStatus::Remote,
        Error::Io(_) => MgStatus::Io,
    }
}

enum Fail {
    Lib(Error),
    Status(MgStatus, String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn null(what: &str) -> Fail {
    Fail::Status(MgStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status and last-error text.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MgStatus {
    set_last_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MgStatus::Ok,
        Ok(Err(Fail::Lib(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Status(s, msg))) => {
            set_last_error(&msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            MgStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn text(p: *const c_char, what: &str) -> Result<String, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_string)
        .map_err(|_| Fail::Status(MgStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn into_c(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail::Status(MgStatus::InvalidArgument, "string contains NUL".into()))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn release<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn mg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by the library.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn mg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn mg_robot_default() -> MgRobot {
    let r = RobotProfile::default();
    MgRobot {
        radius: r.radius,
        reach: r.reach,
    }
}

#[no_mangle]
pub extern "C" fn mg_default_cell_size() -> f64 {
    DEFAULT_CELL_SIZE
}

/// # Safety
/// `out_catalog` must be a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn mg_catalog_synth(
    seed: u64,
    goods: usize,
    facilities: usize,
    out_catalog: *mut *mut MgCatalog,
) -> MgStatus {
    guard(|| {
        let slot = out(out_catalog, "out_catalog")?;
        *slot = ptr::null_mut();
        *slot = boxed(MgCatalog(synth_catalog(seed, goods, facilities)?));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out_catalog` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn mg_catalog_load(path: *const c_char, out_catalog: *mut *mut MgCatalog) -> MgStatus {
    guard(|| {
        let slot = out(out_catalog, "out_catalog")?;
        *slot = ptr::null_mut();
        let cat: Catalog = load_json(&PathBuf::from(text(path, "path")?))?;
        cat.validate()?;
        *slot = boxed(MgCatalog(cat));
        Ok(())
    })
}

/// # Safety
/// Handles must be live; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mg_catalog_save(catalog: *const MgCatalog, path: *const c_char) -> MgStatus {
    guard(|| {
        let c = borrow(catalog, "catalog")?;
        save_json(&PathBuf::from(text(path, "path")?), &c.0)?;
        Ok(())
    })
}

/// # Safety
/// `catalog` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mg_catalog_goods_count(catalog: *const MgCatalog) -> usize {
    catalog.as_ref().map_or(0, |c| c.0.goods.len())
}

/// # Safety
/// `catalog` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mg_catalog_free(catalog: *mut MgCatalog) {
    release(catalog);
}

fn scene_handle(scene: SceneGraph) -> *mut MgScene {
    let hash = content_hash(&scene);
    boxed(MgScene { scene, hash })
}

/// Generates one scene. `spec_json` is a store spec document, or null for
/// the built-in store; its seed is replaced by `seed`.
///
/// # Safety
/// `spec_json` must be null or NUL-terminated; handles must be live.
#[no_mangle]
pub unsafe extern "C" fn mg_scene_generate(
    spec_json: *const c_char,
    catalog: *const MgCatalog,
    seed: u64,
    out_scene: *mut *mut MgScene,
) -> MgStatus {
    guard(|| {
        let slot = out(out_scene, "out_scene")?;
        *slot = ptr::null_mut();
        let cat = borrow(catalog, "catalog")?;
        let mut spec = if spec_json.is_null() {
            StoreSpec::default_store(seed)
        } else {
            from_json_str::<StoreSpec>(&text(spec_json, "spec_json")?)?
        };
        spec.seed = seed;
        spec.validate()?;
        *slot = scene_handle(generate_scene(&spec, &cat.0)?);
        Ok(())
    })
}

/// # Safety
/// `path` must be NUL-terminated and `out_scene` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn mg_scene_load(path: *const c_char, out_scene: *mut *mut MgScene) -> MgStatus {
    guard(|| {
        let slot = out(out_scene, "out_scene")?;
        *slot = ptr::null_mut();
        let scene: SceneGraph = load_json(&PathBuf::from(text(path, "path")?))?;
        *slot = scene_handle(scene);
        Ok(())
    })
}

/// # Safety
/// Handles must be live; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn mg_scene_save(scene: *const MgScene, path: *const c_char) -> MgStatus {
    guard(|| {
        let s = borrow(scene, "scene")?;
        save_json(&PathBuf::from(text(path, "path")?), &s.scene)?;
        Ok(())
    })
}

/// Canonical JSON of the scene; free with [`mg_string_free`].
///
/// # Safety
/// `scene` must be live and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_scene_to_json(scene: *const MgScene, out_json: *mut *mut c_char) -> MgStatus {
    guard(|| {
        let slot = out(out_json, "out_json")?;
        *slot = ptr::null_mut();
        *slot = into_c(to_canonical_string(&borrow(scene, "scene")?.scene))?;
        Ok(())
    })
}

/// Content hash of the scene as lowercase hex; free with [`mg_string_free`].
///
/// # Safety
/// `scene` must be live and `out_hash` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_scene_hash(scene: *const MgScene, out_hash: *mut *mut c_char) -> MgStatus {
    guard(|| {
        let slot = out(out_hash, "out_hash")?;
        *slot = ptr::null_mut();
        *slot = into_c(borrow(scene, "scene")?.hash.clone())?;
        Ok(())
    })
}

/// Top-down SVG drawing; free with [`mg_string_free`].
///
/// # Safety
/// `scene` must be live, `grid` null or live, `out_svg` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_scene_render_svg(
    scene: *const MgScene,
    show_products: bool,
    grid: *const MgGrid,
    out_svg: *mut *mut c_char,
) -> MgStatus {
    guard(|| {
        let slot = out(out_svg, "out_svg")?;
        *slot = ptr::null_mut();
        let s = borrow(scene, "scene")?;
        let opts = SceneSvgOptions {
            show_products,
            grid: grid.as_ref().map(|g| &g.0),
        };
        *slot = into_c(render_scene_svg(&s.scene, &opts))?;
        Ok(())
    })
}

/// # Safety
/// `scene` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn mg_scene_product_count(scene: *const MgScene) -> usize {
    scene.as_ref().map_or(0, |s| s.scene.products.len())
}

/// # Safety
/// `scene` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn mg_scene_facility_count(scene: *const MgScene) -> usize {
    scene.as_ref().map_or(0, |s| s.scene.placed.len())
}

/// # Safety
/// `scene` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mg_scene_free(scene: *mut MgScene) {
    release(scene);
}

/// # Safety
/// `scene` must be live and `out_grid` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn mg_grid_rasterize(
    scene: *const MgScene,
    cell_size: f64,
    robot_radius: f64,
    out_grid: *mut *mut MgGrid,
) -> MgStatus {
    guard(|| {
        let slot = out(out_grid, "out_grid")?;
        *slot = ptr::null_mut();
        let s = borrow(scene, "scene")?;
        *slot = boxed(MgGrid(rasterize(&s.scene, cell_size, robot_radius)?));
        Ok(())
    })
}

/// # Safety
/// `grid` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn mg_grid_width(grid: *const MgGrid) -> u32 {
    grid.as_ref().map_or(0, |g| g.0.width)
}

/// # Safety
/// `grid` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn mg_grid_height(grid: *const MgGrid) -> u32 {
    grid.as_ref().map_or(0, |g| g.0.height)
}

/// True for occupied cells, cells outside the grid, and a null grid.
///
/// # Safety
/// `grid` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn mg_grid_occupied(grid: *const MgGrid, x: u32, y: u32) -> bool {
    grid.as_ref().is_none_or(|g| g.0.occupied(Cell::new(x, y)))
}

/// Shortest path length in meters between two cells.
/// Returns `NoPath` when the goal is unreachable.
///
/// # Safety
/// `grid` must be live and `out_length` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_grid_path_length(
    grid: *const MgGrid,
    sx: u32,
    sy: u32,
    gx: u32,
    gy: u32,
    out_length: *mut f64,
) -> MgStatus {
    guard(|| {
        let slot = out(out_length, "out_length")?;
        let g = borrow(grid, "grid")?;
        match astar(&g.0, Cell::new(sx, sy), Cell::new(gx, gy)) {
            Some(p) => {
                *slot = p.length;
                Ok(())
            }
            None => Err(Fail::Status(
                MgStatus::NoPath,
                format!("no path from ({sx}, {sy}) to ({gx}, {gy})"),
            )),
        }
    })
}

/// Writes the grid as binary PGM with a JSON sidecar beside it.
///
/// # Safety
/// `grid` must be live and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn mg_grid_write_pgm(grid: *const MgGrid, path: *const c_char) -> MgStatus {
    guard(|| {
        let g = borrow(grid, "grid")?;
        g.0.write_pgm(&PathBuf::from(text(path, "path")?))?;
        Ok(())
    })
}

/// # Safety
/// `grid` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mg_grid_free(grid: *mut MgGrid) {
    release(grid);
}

/// Samples `count` episodes of one track in one scene. The grid must have
/// been rasterized from the same scene with `robot.radius`.
///
/// # Safety
/// Handles must be live and `out_episodes` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn mg_episodes_sample(
    scene: *const MgScene,
    grid: *const MgGrid,
    track: MgTrack,
    count: usize,
    seed: u64,
    robot: MgRobot,
    out_episodes: *mut *mut MgEpisodes,
) -> MgStatus {
    guard(|| {
        let slot = out(out_episodes, "out_episodes")?;
        *slot = ptr::null_mut();
        let s = borrow(scene, "scene")?;
        let g = borrow(grid, "grid")?;
        let track = Track::from(track);
        let mut rng = episode_stream(seed, track, &s.scene.scene_id).rng();
        let eps = sample_episodes_hashed(&s.scene, &s.hash, &g.0, track, count, &mut rng, &robot.into())?;
        *slot = boxed(MgEpisodes(eps));
        Ok(())
    })
}

/// # Safety
/// `episodes` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn mg_episodes_count(episodes: *const MgEpisodes) -> usize {
    episodes.as_ref().map_or(0, |e| e.0.len())
}

/// Episodes as JSON lines; free with [`mg_string_free`].
///
/// # Safety
/// `episodes` must be live and `out_jsonl` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_episodes_to_jsonl(episodes: *const MgEpisodes, out_jsonl: *mut *mut c_char) -> MgStatus {
    guard(|| {
        let slot = out(out_jsonl, "out_jsonl")?;
        *slot = ptr::null_mut();
        let bytes = to_jsonl_bytes(&borrow(episodes, "episodes")?.0);
        *slot = into_c(String::from_utf8(bytes).map_err(|e| Fail::Status(MgStatus::Panic, e.to_string()))?)?;
        Ok(())
    })
}

/// # Safety
/// `episodes` must be live and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn mg_episodes_save(episodes: *const MgEpisodes, path: *const c_char) -> MgStatus {
    guard(|| {
        let e = borrow(episodes, "episodes")?;
        save_jsonl(&PathBuf::from(text(path, "path")?), &e.0)?;
        Ok(())
    })
}

/// # Safety
/// `episodes` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mg_episodes_free(episodes: *mut MgEpisodes) {
    release(episodes);
}

fn make_agent(a: &MgAgent) -> Result<Box<dyn Agent>, Fail> {
    Ok(if a.noisy {
        Box::new(NoisyAgent::new(a.p_skip, a.detour, a.seed)?)
    } else {
        Box::new(OracleAgent)
    })
}

/// Runs an agent on episodes sampled in `scene` and builds a report.
/// Fails with `HashMismatch` if the episodes name a different scene.
///
/// # Safety
/// Handles must be live and `out_report` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn mg_evaluate(
    scene: *const MgScene,
    grid: *const MgGrid,
    episodes: *const MgEpisodes,
    agent: MgAgent,
    robot: MgRobot,
    out_report: *mut *mut MgReport,
) -> MgStatus {
    guard(|| {
        let slot = out(out_report, "out_report")?;
        *slot = ptr::null_mut();
        let s = borrow(scene, "scene")?;
        let g = borrow(grid, "grid")?;
        let e = borrow(episodes, "episodes")?;
        let agent = make_agent(&agent)?;
        let mut scenes = BTreeMap::new();
        scenes.insert(s.scene.scene_id.clone(), (s.scene.clone(), g.0.clone()));
        let mut tracks: BTreeMap<Track, Vec<Episode>> = BTreeMap::new();
        for ep in &e.0 {
            tracks.entry(ep.track).or_default().push(ep.clone());
        }
        let profile: RobotProfile = robot.into();
        let report = build_report(
            &scenes,
            &tracks,
            agent.as_ref(),
            &profile,
            content_hash(&(agent.id(), profile)),
        )?;
        *slot = boxed(MgReport(report));
        Ok(())
    })
}

/// The full benchmark run for `seed`, with its artifacts written to `out_dir`.
///
/// # Safety
/// `out_dir` must be NUL-terminated and `out_report` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn mg_reproduce_bench(
    seed: u64,
    out_dir: *const c_char,
    agent: MgAgent,
    out_report: *mut *mut MgReport,
) -> MgStatus {
    guard(|| {
        let slot = out(out_report, "out_report")?;
        *slot = ptr::null_mut();
        let dir = PathBuf::from(text(out_dir, "out_dir")?);
        let cfg = RunConfig::bench(seed, dir.clone());
        let agent = make_agent(&agent)?;
        let run = reproduce_bench(&cfg, agent.as_ref())?;
        std::fs::create_dir_all(&dir).map_err(Error::Io)?;
        run.write(&dir)?;
        if let Some(c) = run.failed_checks().next() {
            return Err(Fail::Status(
                MgStatus::GenerationFailed,
                format!("episode {} fails validation: {}", c.episode_id, c.reasons.join("; ")),
            ));
        }
        *slot = boxed(MgReport(run.report));
        Ok(())
    })
}

fn track_results(r: &MgReport, track: MgTrack) -> Vec<EpisodeResult> {
    let t = Track::from(track);
    r.0.episodes.iter().filter(|e| e.track == t).cloned().collect()
}

/// Success rate over one track's episodes.
///
/// # Safety
/// `report` must be live and `out_sr` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_report_sr(report: *const MgReport, track: MgTrack, out_sr: *mut f64) -> MgStatus {
    guard(|| {
        let slot = out(out_sr, "out_sr")?;
        *slot = score_sr(&track_results(borrow(report, "report")?, track))?;
        Ok(())
    })
}

/// Success weighted by path length; `NotApplicable` on the checkout track.
///
/// # Safety
/// `report` must be live and `out_spl` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_report_spl(report: *const MgReport, track: MgTrack, out_spl: *mut f64) -> MgStatus {
    guard(|| {
        let slot = out(out_spl, "out_spl")?;
        *slot = score_spl(&track_results(borrow(report, "report")?, track))?;
        Ok(())
    })
}

/// Canonical JSON of the report; free with [`mg_string_free`].
///
/// # Safety
/// `report` must be live and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_report_to_json(report: *const MgReport, out_json: *mut *mut c_char) -> MgStatus {
    guard(|| {
        let slot = out(out_json, "out_json")?;
        *slot = ptr::null_mut();
        *slot = into_c(to_canonical_string(&borrow(report, "report")?.0))?;
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mg_report_free(report: *mut MgReport) {
    release(report);
}
