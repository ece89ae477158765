use std::sync::OnceLock;

use proptest::prelude::*;

use marketgen::catalog::{synth_catalog, Catalog, CHECKOUT_LABEL};
use marketgen::layout::{
    check_rules, plan_layout, plan_spatial, render_layout_svg, HeuristicBackend, Layout, Rule, RuleKind, StoreSpec,
    Wall, DEFAULT_MAX_ITERS,
};

fn catalog() -> &'static Catalog {
    static C: OnceLock<Catalog> = OnceLock::new();
    C.get_or_init(|| synth_catalog(4, 300, 30).unwrap())
}

fn plan(spec: &StoreSpec) -> Layout {
    plan_layout(spec, catalog(), &HeuristicBackend, DEFAULT_MAX_ITERS).unwrap()
}

fn store(width: f64, depth: f64, wall: Wall, offset: f64, seed: u64) -> StoreSpec {
    let mut s = StoreSpec::default_store(seed);
    s.footprint.width = width;
    s.footprint.depth = depth;
    let along = if matches!(wall, Wall::N | Wall::S) {
        width
    } else {
        depth
    };
    s.entrance.wall = wall;
    s.entrance.offset = offset * (along - s.entrance.width);
    s
}

#[test]
fn planned_layouts_satisfy_every_hard_rule() {
    for seed in 0..6 {
        let spec = StoreSpec::default_store(100 + seed);
        let layout = plan(&spec);
        assert!(
            check_rules(&layout).is_empty(),
            "seed {seed}: {:?}",
            check_rules(&layout)
        );
        let checkout = layout.zone_by_label(CHECKOUT_LABEL).unwrap();
        let e = spec.entrance_segment();
        assert!(checkout.region.y0.abs() < 1e-9);
        assert!(checkout.region.x1.min(e.x1) - checkout.region.x0.max(e.x0) > 0.0);
    }
}

#[test]
fn zones_tile_the_footprint() {
    let spec = StoreSpec::default_store(17);
    let layout = plan(&spec);
    let fp = spec.footprint_rect();
    let total: f64 = layout.zones.iter().map(|z| z.region.area()).sum();
    assert!((total - fp.area()).abs() < 1e-9 * fp.area());
    for (i, a) in layout.zones.iter().enumerate() {
        assert!(fp.contains_rect(&a.region, 1e-9));
        for b in &layout.zones[i + 1..] {
            assert!(
                a.region.intersection_area(&b.region) < 1e-9,
                "{} overlaps {}",
                a.id,
                b.id
            );
        }
    }
    let mut labels: Vec<&str> = layout.zones.iter().map(|z| z.label.as_str()).collect();
    labels.sort();
    let mut want: Vec<&str> = spec.zone_requests.iter().map(|r| r.label.as_str()).collect();
    want.sort();
    assert_eq!(labels, want);
}

#[test]
fn adjacency_is_symmetric_and_geometric() {
    let layout = plan(&StoreSpec::default_store(23));
    for a in &layout.zones {
        for b in &layout.zones {
            if a.id == b.id {
                continue;
            }
            let touching = a.region.shared_edge_length(&b.region) > 1e-6;
            assert_eq!(a.adjacency.contains(&b.id), touching, "{} / {}", a.id, b.id);
            assert_eq!(a.adjacency.contains(&b.id), b.adjacency.contains(&a.id));
        }
    }
}

#[test]
fn forbidden_neighbours_stay_apart() {
    let layout = plan(&StoreSpec::default_store(5));
    let h = layout.zone_by_label("household").unwrap();
    let p = layout.zone_by_label("produce").unwrap();
    assert!(h.region.shared_edge_length(&p.region) < 1e-6);
}

#[test]
fn planning_is_deterministic_per_seed() {
    let spec = StoreSpec::default_store(31);
    assert_eq!(plan(&spec), plan(&spec));
    assert_eq!(render_layout_svg(&plan(&spec)), render_layout_svg(&plan(&spec)));
}

#[test]
fn invalid_specs_are_rejected_before_planning() {
    let mut s = StoreSpec::default_store(1);
    s.footprint.width = -3.0;
    assert!(plan_layout(&s, catalog(), &HeuristicBackend, DEFAULT_MAX_ITERS).is_err());

    let mut s = StoreSpec::default_store(1);
    s.adjacency_rules.push(Rule::new(RuleKind::MustAdjoin, "produce"));
    assert!(s.validate().is_err());

    let mut s = StoreSpec::default_store(1);
    s.min_aisle_width = 0.0;
    assert!(s.validate().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn bsp_partitions_any_footprint(
        width in 8.0f64..60.0,
        depth in 8.0f64..60.0,
        wall in prop::sample::select(vec![Wall::N, Wall::S, Wall::E, Wall::W]),
        offset in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let spec = store(width, depth, wall, offset, seed);
        let tree = plan_spatial(&spec, &HeuristicBackend).unwrap();
        let (err, overlap) = tree.partition_error();
        prop_assert!(err < 1e-9);
        prop_assert!(!overlap);
        prop_assert_eq!(tree.leaves().len(), spec.zone_requests.len());
        let total: f64 = tree.leaves().iter().map(|&i| tree.nodes[i].region.area()).sum();
        prop_assert!((total - width * depth).abs() < 1e-9 * width * depth);
    }
}
