//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::time::{Duration, Instant};

use common::{
    apls_direction_oracle, convex_polygon, grid_graph, grid_roads, jittered, monte_carlo_intersection,
    perturbed_buildings, random_buildings, random_connected_graph, relabel_kinds, rng,
};
use geoscore::apls::{apls, challenge_total, AplsParams};
use geoscore::buildings::{match_buildings, overall_buildings_score, CityScore, IouThreshold};
use geoscore::geometry::{polygon_intersection_area, BoundingBox, GeoPoint, LocalProjection, Point2, Polyline};
use geoscore::ingest::{roads_to_geojson, RoadAttributes, RoadSegmentRecord, DEFAULT_TILE_PATTERN};
use geoscore::mask::{
    pixel_metrics, render_road_mask, skeleton_to_graph, skeletonize, PixelMetrics, RasterMask, SkeletonGraphParams,
    DEFAULT_RELAX_RADIUS,
};
use geoscore::pipeline::{score_roads_dirs, RoadsConfig};
use geoscore::road_graph::{
    all_paths_from_sources, build_graph, inject_midpoints, NodeKind, RoadGraph, DEFAULT_MERGE_TOLERANCE,
    DEFAULT_MIDPOINT_SPACING,
};
use rand::seq::SliceRandom;
use rand::Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn city(f1: f64) -> CityScore {
    CityScore {
        city: String::new(),
        precision: f1,
        recall: f1,
        f1,
        true_positives: 0,
        false_positives: 0,
        false_negatives: 0,
    }
}

fn aggregation() -> Outcome {
    let roads = challenge_total(&[0.798, 0.604, 0.654, 0.609]);
    let buildings = overall_buildings_score(&[city(0.89), city(0.75), city(0.60), city(0.54)]);
    check(
        (roads - 0.6663).abs() <= 5e-4 && (buildings - 0.69).abs() <= 0.01,
        format!("road total {roads:.5} (0.6663 +/- 5e-4), building total {buildings:.4} (0.69 +/- 0.01)"),
    )
}

fn single_path() -> Outcome {
    let mut truth = RoadGraph::new();
    let a = truth.add_node(Point2::new(0.0, 0.0), NodeKind::Endpoint);
    let b = truth.add_node(Point2::new(948.0, 0.0), NodeKind::Endpoint);
    truth.add_straight_edge(a, b).unwrap();
    // Two legs of 513.5 m each: 474^2 + 197.5^2 = 513.5^2.
    let mut proposal = RoadGraph::new();
    let a = proposal.add_node(Point2::new(0.0, 0.0), NodeKind::Endpoint);
    let b = proposal.add_node(Point2::new(948.0, 0.0), NodeKind::Endpoint);
    let kink = Polyline::new(vec![Point2::new(0.0, 0.0), Point2::new(474.0, 197.5), Point2::new(948.0, 0.0)]).unwrap();
    proposal.add_edge(a, b, kink).unwrap();
    let s = apls(&truth, &proposal, AplsParams::new(4.0, 1e4).unwrap()).map_err(|e| e.to_string())?;
    let contribution = 1.0 - s.part1;
    check(
        s.path_counts.0 == 1 && (contribution - 0.0833).abs() <= 1e-3,
        format!("one pair, contribution {contribution:.5} (0.0833 +/- 1e-3)"),
    )
}

fn identity_and_degradation() -> Outcome {
    let start = Instant::now();
    let d = AplsParams::default();
    let mut worst = 0.0f64;
    for seed in 0..50 {
        let mut r = rng(seed);
        let n = r.gen_range(5..40);
        let g = random_connected_graph(&mut r, n, n / 2, 400.0);
        let s = apls(&g, &g, d).map_err(|e| e.to_string())?;
        worst = worst.max((s.total - 1.0).abs());
    }
    let truth = grid_graph(6, 60.0);
    let mut monotone = true;
    for seed in 0..10 {
        let mut order: Vec<usize> = (0..truth.edge_count()).collect();
        order.shuffle(&mut rng(100 + seed));
        let mut last = f64::INFINITY;
        for removed in (0..=30).step_by(5) {
            let gone = &order[..removed];
            let proposal = relabel_kinds(truth.retain_edges(|i, _| !gone.contains(&i)));
            let part1 = apls(&truth, &proposal, d).map_err(|e| e.to_string())?.part1;
            monotone &= part1 <= last;
            last = part1;
        }
    }
    let empty = apls(&truth, &RoadGraph::new(), d).map_err(|e| e.to_string())?.total;
    let elapsed = start.elapsed();
    check(
        worst <= 1e-9 && monotone && empty == 0.0 && elapsed < Duration::from_secs(10),
        format!(
            "identity max error {worst:.1e} over 50 graphs, deletions monotone: {monotone}, empty proposal {empty}, {:.2} s (< 10 s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn oracles() -> Outcome {
    let mut mismatches = 0;
    for seed in 0..100 {
        let mut r = rng(1000 + seed);
        let n = r.gen_range(2..=8);
        let extra = r.gen_range(0..n);
        let truth = random_connected_graph(&mut r, n, extra, 200.0);
        let jitter = r.gen_range(0.0..5.0);
        let moved = jittered(&mut r, &truth, jitter);
        let proposal = relabel_kinds(moved.retain_edges(|_, _| !r.gen_bool(0.2)));
        // Spacing beyond every edge length keeps the control set at <= 8 nodes.
        let s = apls(&truth, &proposal, AplsParams::new(4.0, 1e6).unwrap()).map_err(|e| e.to_string())?;
        if s.part1 != apls_direction_oracle(&truth, &proposal, 4.0, 1e6)
            || s.part2 != apls_direction_oracle(&proposal, &truth, 4.0, 1e6)
        {
            mismatches += 1;
        }
    }
    // Pairs that barely touch make a relative error meaningless, so a cheap
    // pilot estimate redraws any pair overlapping by less than 20 m2.
    let mut worst = 0.0f64;
    for seed in 0..50 {
        let mut r = rng(5000 + seed);
        let (a, b) = loop {
            let (na, nb) = (r.gen_range(5..12), r.gen_range(5..12));
            let a = convex_polygon(&mut r, Point2::new(0.0, 0.0), 10.0, na);
            let c = Point2::new(r.gen_range(-5.0..5.0), r.gen_range(-5.0..5.0));
            let radius = r.gen_range(6.0..14.0);
            let b = convex_polygon(&mut r, c, radius, nb);
            if monte_carlo_intersection(&mut r, &a, &b, 10_000) >= 20.0 {
                break (a, b);
            }
        };
        let exact = polygon_intersection_area(&a, &b);
        let mc = monte_carlo_intersection(&mut r, &a, &b, 1_000_000);
        worst = worst.max((exact - mc).abs() / exact);
    }
    check(
        mismatches == 0 && worst <= 1e-2,
        format!("{mismatches}/100 path-enumeration mismatches, worst Monte-Carlo relative error {worst:.2e} (<= 1e-2) over 50 pairs"),
    )
}

fn buildings() -> Outcome {
    let truth = [common::building(1, (0.0, 0.0), (10.0, 10.0))];
    let proposal = [
        common::building(10, (2.0, 0.0), (12.0, 10.0)),
        common::building(11, (1.0, 0.0), (11.0, 10.0)),
    ];
    let s = match_buildings("fixture", &truth, &proposal, IouThreshold::DEFAULT);
    let picked_best = s.matches.len() == 1 && s.matches[0].proposal_id == 11;
    let fixture_ok = (s.true_positives, s.false_positives, s.false_negatives) == (1, 1, 0) && picked_best;

    let mut monotone = true;
    let mut identities = true;
    for seed in 0..1000 {
        let mut r = rng(20_000 + seed);
        let n = r.gen_range(0..15);
        let truth = random_buildings(&mut r, n, 0);
        let jitter = r.gen_range(0.5..6.0);
        let proposal = perturbed_buildings(&mut r, &truth, jitter);
        let s = match_buildings("x", &truth, &proposal, IouThreshold::DEFAULT);
        identities &= s.true_positives + s.false_negatives == truth.len()
            && s.true_positives + s.false_positives == proposal.len()
            && s.true_positives == s.matches.len();
        let mut last = usize::MAX;
        for k in 3..=9 {
            let tp = match_buildings("x", &truth, &proposal, IouThreshold::new(k as f64 / 10.0).unwrap())
                .true_positives;
            monotone &= tp <= last;
            last = tp;
        }
    }
    check(
        fixture_ok && monotone && identities,
        format!(
            "fixture TP/FP/FN = {}/{}/{} with higher-IoU pair: {picked_best}, threshold 0.3..0.9 monotone: {monotone}, count identities on 1000 scenes: {identities}",
            s.true_positives, s.false_positives, s.false_negatives
        ),
    )
}

fn extent_of(roads: &[RoadSegmentRecord], margin: f64) -> BoundingBox {
    BoundingBox::from_points(roads.iter().flat_map(|r| r.geometry.vertices()))
        .unwrap()
        .expanded(margin)
}

fn mask_graph(mask: &RasterMask) -> RoadGraph {
    skeleton_to_graph(&skeletonize(mask), SkeletonGraphParams::default()).unwrap()
}

fn legacy_vs_apls() -> Outcome {
    let roads = grid_roads(4, 60.0, Point2::new(0.0, 0.0));
    let extent = extent_of(&roads, 10.0);
    let truth_mask = render_road_mask(&roads, &extent, 0.5, 2.0).unwrap();
    let truth_graph = build_graph(&roads, DEFAULT_MERGE_TOLERANCE).unwrap().graph;

    // Unbroken but more than twice as wide as the label.
    let wide = render_road_mask(&roads, &extent, 0.5, 4.5).unwrap();
    // Correct width, but six short cuts sever the network.
    let mut broken = truth_mask.clone();
    let cuts = [(30.0, 0.0), (90.0, 60.0), (150.0, 120.0), (0.0, 90.0), (60.0, 30.0), (120.0, 150.0)];
    let t = *truth_mask.transform();
    for row in 0..broken.height() {
        for col in 0..broken.width() {
            let p = t.pixel_center(col as f64, row as f64);
            if cuts.iter().any(|&(x, y)| (p.x - x).abs() <= 2.0 && (p.y - y).abs() <= 2.0) {
                broken.set(col, row, false);
            }
        }
    }
    let metrics = |m: &RasterMask| pixel_metrics(&truth_mask, m, DEFAULT_RELAX_RADIUS).unwrap();
    let (mw, mb): (PixelMetrics, PixelMetrics) = (metrics(&wide), metrics(&broken));
    let d = AplsParams::default();
    let aw = apls(&truth_graph, &mask_graph(&wide), d).unwrap().total;
    let ab = apls(&truth_graph, &mask_graph(&broken), d).unwrap().total;
    check(
        mb.iou > mw.iou && mb.f1 > mw.f1 && mb.relaxed_f1 > mw.relaxed_f1 && aw > ab,
        format!(
            "broken IoU/F1/rF1 {:.3}/{:.3}/{:.3} vs wide {:.3}/{:.3}/{:.3}; APLS broken {ab:.3} < wide {aw:.3}",
            mb.iou, mb.f1, mb.relaxed_f1, mw.iou, mw.f1, mw.relaxed_f1
        ),
    )
}

fn mask_round_trip() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut summary = Vec::new();
    for (n, step) in [(2, 20.0), (3, 20.0), (4, 35.0), (5, 25.0), (5, 60.0), (7, 50.0)] {
        let roads = grid_roads(n, step, Point2::new(0.0, 0.0));
        let mask = render_road_mask(&roads, &extent_of(&roads, 10.0), 0.5, 2.0).unwrap();
        let truth = build_graph(&roads, DEFAULT_MERGE_TOLERANCE).unwrap().graph;
        let total = apls(&truth, &mask_graph(&mask), AplsParams::default()).unwrap().total;
        worst = worst.min(total);
        summary.push(format!("{n}x{n}@{step}m {total:.4}"));
    }
    check(worst >= 0.95, format!("min APLS {worst:.4} (>= 0.95): {}", summary.join(", ")))
}

fn write_tile(dir: &std::path::Path, name: &str, roads: &[RoadSegmentRecord], proj: &LocalProjection) {
    std::fs::write(dir.join(name), roads_to_geojson(roads, proj).to_string()).unwrap();
}

fn graph_roads(g: &RoadGraph) -> Vec<RoadSegmentRecord> {
    g.edges()
        .iter()
        .enumerate()
        .map(|(i, e)| RoadSegmentRecord {
            road_id: i as i64,
            geometry: e.geometry.clone(),
            attributes: RoadAttributes::default(),
        })
        .collect()
}

fn performance() -> Outcome {
    // A 400 m tile: 8 x 8 streets, midpoints every 50 m.
    let tile = grid_graph(8, 400.0 / 7.0);
    let (dense, controls) = inject_midpoints(&tile, DEFAULT_MIDPOINT_SPACING).unwrap();
    let _ = all_paths_from_sources(&dense, &controls);
    let mut slowest = Duration::ZERO;
    for _ in 0..5 {
        let t = Instant::now();
        let table = all_paths_from_sources(&dense, &controls);
        slowest = slowest.max(t.elapsed());
        assert_eq!(table.len(), controls.len() * (controls.len() - 1) / 2);
    }

    let dir = tempfile::tempdir().unwrap();
    let (truth_dir, proposal_dir) = (dir.path().join("truth"), dir.path().join("proposal"));
    std::fs::create_dir_all(&truth_dir).unwrap();
    std::fs::create_dir_all(&proposal_dir).unwrap();
    let base = grid_graph(5, 100.0);
    let cities = ["Vegas", "Paris", "Shanghai", "Khartoum"];
    for i in 0..1000 {
        let mut r = rng(90_000 + i as u64);
        let proj = LocalProjection::new(GeoPoint::new(-100.0 + 0.01 * i as f64, 30.0).unwrap()).unwrap();
        let name = format!("AOI_{}_{}_img{i}.geojson", 2 + i % 4, cities[i % 4]);
        write_tile(&truth_dir, &name, &graph_roads(&base), &proj);
        let proposal = jittered(&mut r, &base, 1.5).retain_edges(|_, _| !r.gen_bool(0.1));
        write_tile(&proposal_dir, &name, &graph_roads(&proposal), &proj);
    }
    let config = RoadsConfig {
        truth: truth_dir,
        proposal: proposal_dir,
        buffer: 4.0,
        spacing: DEFAULT_MIDPOINT_SPACING,
        merge_tolerance: DEFAULT_MERGE_TOLERANCE,
        tile_pattern: DEFAULT_TILE_PATTERN.into(),
        parallelism: 8,
    };
    let t = Instant::now();
    let report = score_roads_dirs(&config).map_err(|e| e.to_string())?;
    let full = t.elapsed();
    check(
        slowest < Duration::from_millis(50) && full < Duration::from_secs(60) && report.challenge.tiles.len() == 1000,
        format!(
            "all pairs over {} controls {:.2} ms (< 50 ms); 1000 tiles at parallelism 8 in {:.2} s (< 60 s), total {:.4}",
            controls.len(),
            slowest.as_secs_f64() * 1e3,
            full.as_secs_f64(),
            report.challenge.total
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("aggregation fidelity", aggregation),
        ("single-path contribution", single_path),
        ("identity, degradation, empty proposal", identity_and_degradation),
        ("oracle equivalence", oracles),
        ("building matching", buildings),
        ("pixel metrics vs APLS ordering", legacy_vs_apls),
        ("mask round trip", mask_round_trip),
        ("performance", performance),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
