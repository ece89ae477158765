use std::collections::BTreeMap;
use std::sync::OnceLock;

use marketgen::bench::{
    evaluate, run_episode, score_spl, score_sr, summarize, Action, ActionTrace, Agent, BenchmarkReport, EpisodeResult,
    NoisyAgent, OracleAgent,
};
use marketgen::catalog::synth_catalog;
use marketgen::layout::StoreSpec;
use marketgen::nav::{rasterize, OccupancyGrid};
use marketgen::placement::{generate_scene, SceneGraph};
use marketgen::rng::SeedStream;
use marketgen::tasks::{sample_episodes, Episode, RobotProfile, Track};

type Scenes = BTreeMap<String, (SceneGraph, OccupancyGrid)>;

struct Fixture {
    scenes: Scenes,
    collection: Vec<Episode>,
    checkout: Vec<Episode>,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let cat = synth_catalog(5, 300, 30).unwrap();
        let scene = generate_scene(&StoreSpec::default_store(5), &cat).unwrap();
        let grid = rasterize(&scene, 0.05, 0.35).unwrap();
        let p = RobotProfile::default();
        let mut rng = SeedStream::new(9).rng();
        let collection = sample_episodes(&scene, &grid, Track::InAisleCollection, 16, &mut rng, &p).unwrap();
        let checkout = sample_episodes(&scene, &grid, Track::CheckoutUnloading, 16, &mut rng, &p).unwrap();
        let mut scenes = BTreeMap::new();
        scenes.insert(scene.scene_id.clone(), (scene, grid));
        Fixture {
            scenes,
            collection,
            checkout,
        }
    })
}

fn run(agent: &dyn Agent, episodes: &[Episode]) -> Vec<EpisodeResult> {
    evaluate(&fixture().scenes, episodes, agent, &RobotProfile::default()).unwrap()
}

fn noisy(p_skip: f64, detour: f64) -> NoisyAgent {
    NoisyAgent::new(p_skip, detour, 77).unwrap()
}

fn scene_of(ep: &Episode) -> &'static (SceneGraph, OccupancyGrid) {
    &fixture().scenes[&ep.scene_id]
}

fn trace(ep: &Episode, actions: Vec<Action>) -> ActionTrace {
    ActionTrace {
        episode_id: ep.episode_id.clone(),
        agent_id: "hand".into(),
        actions,
    }
}

#[test]
fn oracle_is_perfect_on_both_tracks() {
    let f = fixture();
    let col = run(&OracleAgent, &f.collection);
    assert_eq!(score_sr(&col).unwrap(), 1.0);
    assert_eq!(score_spl(&col).unwrap(), 1.0);
    for r in &col {
        assert_eq!(r.path_length, r.reference_length);
        assert!(r.failure_log.is_empty());
    }
    assert_eq!(score_sr(&run(&OracleAgent, &f.checkout)).unwrap(), 1.0);
}

#[test]
fn noisy_paths_are_never_shorter_than_the_reference() {
    let f = fixture();
    for detour in [1.0, 1.3, 2.0] {
        for r in run(&noisy(0.3, detour), &f.collection) {
            assert!(r.path_length >= r.reference_length - 1e-9, "{}", r.episode_id);
        }
    }
}

#[test]
fn spl_falls_as_detours_grow() {
    let f = fixture();
    let spl: Vec<f64> = [1.0, 1.25, 1.5, 2.0, 3.0]
        .iter()
        .map(|&d| score_spl(&run(&noisy(0.0, d), &f.collection)).unwrap())
        .collect();
    assert_eq!(spl[0], 1.0);
    for w in spl.windows(2) {
        assert!(w[1] < w[0], "{spl:?}");
    }
    assert!((spl[3] - 0.5).abs() < 0.02, "{spl:?}");
}

#[test]
fn success_falls_as_skips_grow() {
    let f = fixture();
    let episodes: Vec<Episode> = f.collection.iter().chain(&f.checkout).cloned().collect();
    let mut previous = run(&noisy(0.0, 1.0), &episodes);
    for p in [0.1, 0.3, 0.6, 0.9] {
        let now = run(&noisy(p, 1.0), &episodes);
        // the same draws decide each pick, so success can only drop episode by episode
        for (a, b) in previous.iter().zip(&now) {
            assert!(b.success <= a.success, "{} at p_skip {p}", b.episode_id);
        }
        previous = now;
    }
    let none = run(&noisy(1.0, 1.0), &episodes);
    assert_eq!(score_sr(&none).unwrap(), 0.0);
    assert!(none.iter().all(|r| r.goals_met == 0));
}

#[test]
fn noisy_agent_rejects_bad_settings() {
    assert!(NoisyAgent::new(-0.1, 1.0, 0).is_err());
    assert!(NoisyAgent::new(1.1, 1.0, 0).is_err());
    assert!(NoisyAgent::new(0.1, 0.9, 0).is_err());
    assert!(NoisyAgent::new(0.1, f64::INFINITY, 0).is_err());
}

#[test]
fn covered_items_cannot_be_taken_first() {
    let f = fixture();
    let p = RobotProfile::default();
    let ep = f
        .checkout
        .iter()
        .find(|e| !e.basket.as_ref().unwrap().occlusion.is_empty())
        .expect("some basket has a covered item");
    let (scene, grid) = scene_of(ep);
    let stack = ep.basket.as_ref().unwrap();
    let (over, under) = stack.occlusion[0].clone();

    let early = run_episode(scene, grid, ep, &trace(ep, vec![Action::Pick(under.clone())]), &p);
    assert_eq!(early.goals_met, 0);
    assert!(
        early.failure_log[0].reason.contains("covered"),
        "{:?}",
        early.failure_log
    );

    let mut ordered: Vec<String> = Vec::new();
    let mut left: Vec<String> = stack.items.iter().map(|i| i.item_id.clone()).collect();
    while !left.is_empty() {
        let k = left
            .iter()
            .position(|id| stack.occluders_of(id).all(|o| ordered.iter().any(|d| d == o)))
            .expect("occlusion is acyclic");
        ordered.push(left.remove(k));
    }
    assert!(ordered.iter().position(|i| *i == over) < ordered.iter().position(|i| *i == under));
    let good = run_episode(
        scene,
        grid,
        ep,
        &trace(ep, ordered.into_iter().map(Action::Pick).collect()),
        &p,
    );
    assert_eq!(good.success, 1.0);
}

#[test]
fn illegal_actions_are_logged_without_aborting() {
    let f = fixture();
    let p = RobotProfile::default();
    let ep = &f.collection[0];
    let (scene, grid) = scene_of(ep);
    let oracle = OracleAgent.act(scene, grid, ep).unwrap();

    let mut actions = vec![Action::Pick("nobody".into())];
    actions.extend(oracle.actions.iter().cloned());
    let first_pick = oracle
        .actions
        .iter()
        .find(|a| matches!(a, Action::Pick(_)))
        .unwrap()
        .clone();
    actions.push(first_pick);
    let r = run_episode(scene, grid, ep, &trace(ep, actions), &p);
    assert_eq!(r.success, 1.0);
    assert_eq!(r.failure_log.len(), 2);
    assert_eq!(r.failure_log[0].action_index, 0);

    let mut far = trace(ep, vec![Action::Pick(ep.targets[0].clone())]);
    let r = run_episode(scene, grid, ep, &far, &p);
    assert_eq!(r.goals_met, 0);
    assert_eq!(r.path_length, 0.0);

    far.actions = vec![Action::MoveTo(marketgen::nav::Cell::new(0, 0))];
    let r = run_episode(scene, grid, ep, &far, &p);
    assert_eq!(r.failure_log.len(), 1);

    let foreign = ActionTrace {
        episode_id: "other".into(),
        ..oracle.clone()
    };
    let r = run_episode(scene, grid, ep, &foreign, &p);
    assert_eq!(r.success, 0.0);
    assert!(!r.failure_log.is_empty());
}

#[test]
fn report_aggregates_are_checked() {
    let f = fixture();
    let mut episodes = run(&noisy(0.2, 1.5), &f.collection);
    episodes.extend(run(&noisy(0.2, 1.5), &f.checkout));
    let tracks = summarize(&episodes).unwrap();
    assert_eq!(tracks["checkout-unloading"].spl, None);
    assert!(tracks["in-aisle-collection"].spl.is_some());
    let mut report = BenchmarkReport {
        agent_id: "noisy".into(),
        generated_at: String::new(),
        config_hash: String::new(),
        skipped_seeds: vec![],
        scene_hashes: BTreeMap::new(),
        episode_set_hashes: BTreeMap::new(),
        tracks,
        episodes,
    };
    report.check_aggregates().unwrap();
    report.episodes[0].success = if report.episodes[0].success == 1.0 { 0.0 } else { 1.0 };
    assert!(report.check_aggregates().is_err());
}

#[test]
fn results_come_back_sorted_and_complete() {
    let f = fixture();
    let mut shuffled: Vec<Episode> = f.collection.iter().rev().cloned().collect();
    shuffled.extend(f.checkout.iter().cloned());
    let rs = run(&OracleAgent, &shuffled);
    assert_eq!(rs.len(), shuffled.len());
    assert!(rs.windows(2).all(|w| w[0].episode_id < w[1].episode_id));

    let mut stray = f.collection[0].clone();
    stray.scene_id = "missing".into();
    assert!(evaluate(&f.scenes, &[stray], &OracleAgent, &RobotProfile::default()).is_err());
}
