use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::f64::consts::SQRT_2;
use std::sync::OnceLock;

use proptest::prelude::*;

use marketgen::canon::content_hash;
use marketgen::catalog::synth_catalog;
use marketgen::layout::StoreSpec;
use marketgen::nav::{rasterize, Cell, OccupancyGrid};
use marketgen::placement::{generate_scene, SceneGraph};
use marketgen::rng::SeedStream;
use marketgen::tasks::{
    optimal_tour, sample_collection_episode, sample_episodes, validate_episode, CollectionSampler, Episode,
    RobotProfile, Track,
};
use marketgen::Error;

struct Fixture {
    scene: SceneGraph,
    grid: OccupancyGrid,
    collection: Vec<Episode>,
    checkout: Vec<Episode>,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let cat = synth_catalog(8, 300, 30).unwrap();
        let scene = generate_scene(&StoreSpec::default_store(8), &cat).unwrap();
        let grid = rasterize(&scene, 0.05, 0.35).unwrap();
        let p = RobotProfile::default();
        let mut rng = SeedStream::new(1).rng();
        let collection = sample_episodes(&scene, &grid, Track::InAisleCollection, 12, &mut rng, &p).unwrap();
        let checkout = sample_episodes(&scene, &grid, Track::CheckoutUnloading, 12, &mut rng, &p).unwrap();
        Fixture {
            scene,
            grid,
            collection,
            checkout,
        }
    })
}

/// Single-source Dijkstra over free cells, 8-connected without corner cutting.
fn distances(g: &OccupancyGrid, src: Cell) -> Vec<f64> {
    let (w, h) = (g.width as i64, g.height as i64);
    let free = |x: i64, y: i64| x >= 0 && y >= 0 && x < w && y < h && g.free(Cell::new(x as u32, y as u32));
    let mut dist = vec![f64::INFINITY; g.len()];
    let mut heap = BinaryHeap::new();
    dist[g.index(src)] = 0.0;
    heap.push(Reverse((0u64, src.x as i64, src.y as i64)));
    while let Some(Reverse((bits, x, y))) = heap.pop() {
        let d = f64::from_bits(bits);
        if d > dist[(y * w + x) as usize] {
            continue;
        }
        for dx in -1..=1 {
            for dy in -1..=1 {
                let diag = dx != 0 && dy != 0;
                if (dx == 0 && dy == 0) || !free(x + dx, y + dy) || (diag && (!free(x + dx, y) || !free(x, y + dy))) {
                    continue;
                }
                let j = ((y + dy) * w + x + dx) as usize;
                let nd = d + if diag { SQRT_2 } else { 1.0 };
                if nd < dist[j] {
                    dist[j] = nd;
                    heap.push(Reverse((nd.to_bits(), x + dx, y + dy)));
                }
            }
        }
    }
    dist
}

/// Best open tour by trying every visiting order on Dijkstra distances.
fn brute_force_tour(g: &OccupancyGrid, start: Cell, pts: &[Cell]) -> f64 {
    let from_start = distances(g, start);
    let table: Vec<Vec<f64>> = pts.iter().map(|&p| distances(g, p)).collect();
    let mut orders: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..pts.len() {
        let mut longer = Vec::new();
        for o in &orders {
            for i in (0..pts.len()).filter(|i| !o.contains(i)) {
                longer.push([o.as_slice(), &[i]].concat());
            }
        }
        orders = longer;
    }
    let best = orders
        .iter()
        .map(|o| {
            let first = from_start[g.index(pts[o[0]])];
            first + o.windows(2).map(|w| table[w[0]][g.index(pts[w[1]])]).sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    best * g.cell_size
}

#[test]
fn every_sampled_episode_passes_the_validator() {
    let f = fixture();
    let p = RobotProfile::default();
    for ep in f.collection.iter().chain(&f.checkout) {
        let c = validate_episode(ep, &f.scene, &f.grid, &p);
        assert!(c.passed, "{}: {:?}", ep.episode_id, c.reasons);
        assert!((2..=4).contains(&ep.targets.len()));
        assert_eq!(ep.scene_hash, content_hash(&f.scene));
    }
}

#[test]
fn reference_length_equals_exhaustive_tour() {
    let f = fixture();
    for ep in f.collection.iter().take(6) {
        let start = f.grid.world_to_cell(ep.start.x, ep.start.y).unwrap();
        let want = brute_force_tour(&f.grid, start, &ep.approach_points);
        assert!(
            (ep.reference_length - want).abs() <= 1e-6,
            "{}: {} vs {want}",
            ep.episode_id,
            ep.reference_length
        );
    }
}

#[test]
fn collection_targets_are_distinct_front_facing_products() {
    let f = fixture();
    let by_id: BTreeMap<&str, _> = f
        .scene
        .products
        .iter()
        .map(|p| (p.product_instance_id.as_str(), p))
        .collect();
    for ep in &f.collection {
        let ids: BTreeSet<&String> = ep.targets.iter().collect();
        assert_eq!(ids.len(), ep.targets.len());
        assert_eq!(ep.approach_points.len(), ep.targets.len());
        for t in &ep.targets {
            assert!(by_id[t.as_str()].front_facing);
        }
        assert!(ep.basket.is_none());
    }
}

#[test]
fn basket_support_graph_is_a_dag_with_grounded_floor_items() {
    let f = fixture();
    for ep in &f.checkout {
        let b = ep.basket.as_ref().unwrap();
        let ids: BTreeSet<&str> = b.items.iter().map(|i| i.item_id.as_str()).collect();
        assert_eq!(ep.targets.iter().map(String::as_str).collect::<BTreeSet<_>>(), ids);
        let pos: BTreeMap<&str, usize> = b
            .items
            .iter()
            .enumerate()
            .map(|(k, i)| (i.item_id.as_str(), k))
            .collect();
        for item in &b.items {
            if item.bounds.z == 0.0 {
                assert!(item.support_set.is_empty());
            } else {
                assert!(!item.support_set.is_empty(), "{} floats", item.item_id);
            }
            for s in &item.support_set {
                // supports were dropped earlier, so the relation is acyclic
                assert!(pos[s.as_str()] < pos[item.item_id.as_str()]);
                let below = b.item(s).unwrap();
                assert!((below.bounds.top() - item.bounds.z).abs() < 1e-6);
            }
        }
        for (over, under) in &b.occlusion {
            assert!(pos[over.as_str()] > pos[under.as_str()]);
        }
        assert_eq!(ep.reference_length, 0.0);
    }
}

#[test]
fn sampling_is_deterministic() {
    let f = fixture();
    let p = RobotProfile::default();
    let mut rng = SeedStream::new(1).rng();
    let again = sample_episodes(&f.scene, &f.grid, Track::InAisleCollection, 12, &mut rng, &p).unwrap();
    assert_eq!(again, f.collection);
}

#[test]
fn validator_rejects_tampered_collection_episodes() {
    let f = fixture();
    let p = RobotProfile::default();
    let ep = &f.collection[0];

    let mut hidden = ep.clone();
    let back_row = f.scene.products.iter().find(|p| !p.front_facing).unwrap();
    hidden.targets[0] = back_row.product_instance_id.clone();
    assert!(!validate_episode(&hidden, &f.scene, &f.grid, &p).passed);

    let mut far = ep.clone();
    far.approach_points[0] = Cell::new(0, 0);
    assert!(!validate_episode(&far, &f.scene, &f.grid, &p).passed);

    let mut walled = ep.clone();
    let wall = f.scene.walls[0].bounds.plan().center();
    walled.start.x = wall.0;
    walled.start.y = wall.1;
    assert!(!validate_episode(&walled, &f.scene, &f.grid, &p).passed);

    let mut ghost = ep.clone();
    ghost.targets[1] = "no-such-product".into();
    assert!(!validate_episode(&ghost, &f.scene, &f.grid, &p).passed);
}

#[test]
fn validator_rejects_tampered_checkout_episodes() {
    let f = fixture();
    let p = RobotProfile::default();
    let ep = f.checkout.iter().find(|e| {
        e.basket
            .as_ref()
            .unwrap()
            .items
            .iter()
            .any(|i| !i.support_set.is_empty())
    });
    let ep = ep.expect("some basket has a stacked item");

    let mut lifted = ep.clone();
    let b = lifted.basket.as_mut().unwrap();
    let k = b.items.iter().position(|i| !i.support_set.is_empty()).unwrap();
    b.items[k].support_set.clear();
    assert!(!validate_episode(&lifted, &f.scene, &f.grid, &p).passed);

    let mut spilled = ep.clone();
    spilled.basket.as_mut().unwrap().items[0].bounds.x += 10.0;
    assert!(!validate_episode(&spilled, &f.scene, &f.grid, &p).passed);

    let mut missing = ep.clone();
    missing.targets.pop();
    assert!(!validate_episode(&missing, &f.scene, &f.grid, &p).passed);
}

#[test]
fn too_few_candidates_is_a_sampling_failure() {
    let f = fixture();
    let mut sparse = f.scene.clone();
    let keep = sparse.products.iter().position(|p| p.front_facing).unwrap();
    sparse.products = vec![sparse.products[keep].clone()];
    let p = RobotProfile::default();
    let sampler = CollectionSampler::new(&sparse, &f.grid, &p);
    assert!(sampler.candidate_count() <= 1);
    let mut rng = SeedStream::new(3).rng();
    let err = sample_collection_episode(&sparse, &f.grid, 2, &mut rng, &p, "x").unwrap_err();
    assert!(matches!(err, Error::SamplingFailed(_)), "{err}");
    assert!(matches!(
        sampler.sample(&mut rng, 5, "x"),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn start_cells_lie_inside_the_store() {
    let f = fixture();
    let sampler = CollectionSampler::new(&f.scene, &f.grid, &RobotProfile::default());
    let fp = f.scene.layout.store.footprint_rect();
    assert!(!sampler.start_cells().is_empty());
    for &c in sampler.start_cells().iter().step_by(97) {
        let (x, y) = f.grid.cell_center(c);
        assert!(fp.contains_point(x, y));
        assert!(f.grid.free(c));
    }
}

fn small_grid() -> impl Strategy<Value = OccupancyGrid> {
    (6u32..16, 6u32..16).prop_flat_map(|(w, h)| {
        prop::collection::vec(prop::bool::weighted(0.2), (w * h) as usize).prop_map(move |bits| {
            let mut g = OccupancyGrid::new((0.0, 0.0), 0.1, w, h).unwrap();
            for (i, b) in bits.into_iter().enumerate() {
                g.set(g.cell_at(i), b);
            }
            g
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn optimal_tour_matches_brute_force(g in small_grid(), picks in prop::collection::vec(any::<usize>(), 5)) {
        let free: Vec<Cell> = (0..g.len()).map(|i| g.cell_at(i)).filter(|&c| g.free(c)).collect();
        prop_assume!(free.len() >= 5);
        let start = free[picks[0] % free.len()];
        let pts: Vec<Cell> = picks[1..].iter().map(|k| free[k % free.len()]).collect();
        let want = brute_force_tour(&g, start, &pts);
        match optimal_tour(&g, start, &pts) {
            Some(t) => {
                prop_assert!((t.length - want).abs() <= 1e-9, "{} vs {}", t.length, want);
                let mut order = t.order.clone();
                order.sort();
                prop_assert_eq!(order, vec![0, 1, 2, 3]);
                prop_assert_eq!(t.legs.len(), 4);
                prop_assert_eq!(t.legs[0].cells[0], start);
            }
            None => prop_assert!(want.is_infinite()),
        }
    }
}
