use std::path::Path;
use std::time::Instant;

use marketgen::bench::{evaluate, summarize, BenchmarkReport, OracleAgent};
use marketgen::canon::{canonicalize, content_hash, from_json_str, to_canonical_string};
use marketgen::catalog::{synth_catalog, Catalog};
use marketgen::io::{load_json, load_jsonl, save_json, save_jsonl, to_json_bytes, to_jsonl_bytes};
use marketgen::layout::StoreSpec;
use marketgen::nav::rasterize;
use marketgen::placement::{generate_scene, SceneGraph};
use marketgen::rng::SeedStream;
use marketgen::tasks::{sample_episodes, Episode, RobotProfile, Track};
use marketgen::Error;

fn twice<T>(dir: &Path, name: &str, value: &T) -> (Vec<u8>, Vec<u8>)
where
    T: serde::Serialize + serde::de::DeserializeOwned + PartialEq + std::fmt::Debug,
{
    let a = dir.join(format!("{name}.a.json"));
    let b = dir.join(format!("{name}.b.json"));
    save_json(&a, value).unwrap();
    let back: T = load_json(&a).unwrap();
    assert_eq!(&back, value);
    save_json(&b, &back).unwrap();
    (std::fs::read(a).unwrap(), std::fs::read(b).unwrap())
}

#[test]
fn every_artifact_survives_save_load_save() {
    let dir = tempfile::tempdir().unwrap();
    let cat = synth_catalog(2, 200, 20).unwrap();
    let (a, b) = twice(dir.path(), "catalog", &cat);
    assert_eq!(a, b);

    let scene = generate_scene(&StoreSpec::default_store(2), &cat).unwrap();
    let (a, b) = twice(dir.path(), "scene", &scene);
    assert_eq!(a, b);

    let grid = rasterize(&scene, 0.05, 0.35).unwrap();
    let p = RobotProfile::default();
    let mut rng = SeedStream::new(2).rng();
    let mut eps = sample_episodes(&scene, &grid, Track::InAisleCollection, 5, &mut rng, &p).unwrap();
    eps.extend(sample_episodes(&scene, &grid, Track::CheckoutUnloading, 5, &mut rng, &p).unwrap());
    let path = dir.path().join("episodes.jsonl");
    save_jsonl(&path, &eps).unwrap();
    let back: Vec<Episode> = load_jsonl(&path).unwrap();
    assert_eq!(back, eps);
    assert_eq!(to_jsonl_bytes(&back), std::fs::read(&path).unwrap());

    let mut scenes = std::collections::BTreeMap::new();
    scenes.insert(scene.scene_id.clone(), (scene.clone(), grid));
    let episodes = evaluate(&scenes, &eps, &OracleAgent, &p).unwrap();
    let report = BenchmarkReport {
        agent_id: "oracle".into(),
        generated_at: "2026-01-01T00:00:00Z".into(),
        config_hash: content_hash(&"cfg"),
        skipped_seeds: vec![],
        scene_hashes: [(scene.scene_id.clone(), content_hash(&scene))].into(),
        episode_set_hashes: Default::default(),
        tracks: summarize(&episodes).unwrap(),
        episodes,
    };
    // reports keep full precision in memory; the file is the six-decimal form
    let report = canonicalize(&report).unwrap();
    let (a, b) = twice(dir.path(), "report", &report);
    assert_eq!(a, b);
}

#[test]
fn canonical_text_is_sorted_and_fixed_precision() {
    let cat = synth_catalog(1, 20, 10).unwrap();
    let text = to_canonical_string(&cat);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    let first = &v["goods"][0]["dims"]["width"];
    assert!(first.is_f64());
    let raw = text.split("\"width\":").nth(1).unwrap();
    let num: &str = raw.split([',', '}']).next().unwrap();
    assert_eq!(num.split('.').nth(1).unwrap().len(), 6, "{num}");
    assert_eq!(to_json_bytes(&cat).last(), Some(&b'\n'));
}

#[test]
fn truncated_or_mistyped_documents_are_parse_errors() {
    let cat = synth_catalog(1, 20, 10).unwrap();
    let text = to_canonical_string(&cat);
    let cut = &text[..text.len() / 2];
    assert!(matches!(from_json_str::<Catalog>(cut), Err(Error::Parse { .. })));

    let bad = text.replacen("\"seed\":1", "\"seed\":\"one\"", 1);
    match from_json_str::<Catalog>(&bad) {
        Err(Error::Parse { pointer, .. }) => assert_eq!(pointer, "/seed"),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        from_json_str::<Catalog>(&format!("{text} {text}")),
        Err(Error::Parse { .. })
    ));
}

#[test]
fn missing_files_are_io_errors_naming_the_path() {
    let err = load_json::<SceneGraph>(Path::new("/nonexistent/scene_1.json")).unwrap_err();
    assert!(matches!(err, Error::Io(_)));
    assert!(err.to_string().contains("/nonexistent/scene_1.json"));
}

#[test]
fn large_scene_round_trips_quickly() {
    let cat = synth_catalog(3, 300, 30).unwrap();
    let mut spec = StoreSpec::default_store(3);
    spec.footprint.width = 45.0;
    spec.footprint.depth = 30.0;
    let scene = generate_scene(&spec, &cat).unwrap();
    assert!(scene.products.len() >= 10_000, "{} products", scene.products.len());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.json");
    let t = Instant::now();
    save_json(&path, &scene).unwrap();
    let back: SceneGraph = load_json(&path).unwrap();
    let elapsed = t.elapsed().as_secs_f64();
    assert_eq!(back, scene);
    assert!(elapsed < 1.0, "round trip took {elapsed:.2} s");
}
