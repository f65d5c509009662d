mod common;

use geoscore::geometry::{GeoPoint, LocalProjection, Point2, Polygon, Polyline};
use geoscore::ingest::{
    buildings_to_geojson, parse_buildings, parse_roads, roads_to_geojson, BridgeType, BuildingRecord, RoadAttributes,
    RoadSegmentRecord, RoadType, Surface,
};
use proptest::prelude::*;

const ROAD_TYPES: [RoadType; 7] = [
    RoadType::Motorway,
    RoadType::Primary,
    RoadType::Secondary,
    RoadType::Tertiary,
    RoadType::Residential,
    RoadType::Unclassified,
    RoadType::CartTrack,
];

fn origin() -> impl Strategy<Value = GeoPoint> {
    (-170.0f64..170.0, -75.0f64..75.0).prop_map(|(lon, lat)| GeoPoint::new(lon, lat).unwrap())
}

fn road() -> impl Strategy<Value = Option<RoadSegmentRecord>> {
    (
        any::<i32>(),
        prop::collection::vec((-200.0f64..200.0, -200.0f64..200.0), 2..6),
        0usize..7,
        prop::bool::ANY,
        prop::bool::ANY,
        1u32..6,
    )
        .prop_map(|(id, pts, t, paved, bridge, lanes)| {
            let geometry = Polyline::from_points_dedup(pts.iter().map(|&(x, y)| Point2::new(x, y)).collect()).ok()?;
            Some(RoadSegmentRecord {
                road_id: id as i64,
                geometry,
                attributes: RoadAttributes {
                    road_type: ROAD_TYPES[t],
                    paved: if paved { Surface::Paved } else { Surface::Unpaved },
                    bridge_type: if bridge { BridgeType::Bridge } else { BridgeType::NotBridge },
                    lane_number: lanes,
                },
            })
        })
}

fn close_deg(proj: &LocalProjection, a: Point2, b: Point2) -> bool {
    let (ga, gb) = (proj.inverse(a), proj.inverse(b));
    (ga.lon - gb.lon).abs() < 1e-9 && (ga.lat - gb.lat).abs() < 1e-9
}

proptest! {
    #[test]
    fn roads_round_trip(o in origin(), roads in prop::collection::vec(road(), 1..8)) {
        let roads: Vec<_> = roads.into_iter().flatten().collect();
        let proj = LocalProjection::new(o).unwrap();
        let doc = roads_to_geojson(&roads, &proj).to_string();
        let parsed = parse_roads(doc.as_bytes(), Some(o)).unwrap();
        prop_assert_eq!(parsed.records.len(), roads.len());
        for (a, b) in roads.iter().zip(&parsed.records) {
            prop_assert_eq!(a.road_id, b.road_id);
            prop_assert_eq!(a.attributes, b.attributes);
            prop_assert_eq!(a.geometry.vertices().len(), b.geometry.vertices().len());
            for (&p, &q) in a.geometry.vertices().iter().zip(b.geometry.vertices()) {
                prop_assert!(close_deg(&proj, p, q));
            }
        }
    }

    #[test]
    fn buildings_round_trip(
        o in origin(),
        boxes in prop::collection::vec((-200.0f64..200.0, -200.0f64..200.0, 1.0f64..30.0, 1.0f64..30.0), 1..8),
    ) {
        let proj = LocalProjection::new(o).unwrap();
        let records: Vec<BuildingRecord> = boxes
            .iter()
            .enumerate()
            .map(|(k, &(x, y, w, h))| BuildingRecord {
                building_id: k as i64,
                footprint: Polygon::rectangle(Point2::new(x, y), Point2::new(x + w, y + h)).unwrap(),
            })
            .collect();
        let doc = buildings_to_geojson(&records, &proj).to_string();
        let parsed = parse_buildings(doc.as_bytes(), Some(o)).unwrap();
        prop_assert_eq!(parsed.records.len(), records.len());
        for (a, b) in records.iter().zip(&parsed.records) {
            prop_assert_eq!(a.building_id, b.building_id);
            prop_assert!((a.footprint.area() - b.footprint.area()).abs() < 1e-4 * a.footprint.area());
            for (&p, &q) in a.footprint.exterior().iter().zip(b.footprint.exterior()) {
                prop_assert!(close_deg(&proj, p, q));
            }
        }
    }

    #[test]
    fn parsers_never_panic_on_bytes(bytes in prop::collection::vec(any::<u8>(), 0..512)) {
        let _ = parse_roads(&bytes, None);
        let _ = parse_buildings(&bytes, None);
    }

    #[test]
    fn accepted_features_are_valid(
        coords in prop::collection::vec((-1e-3f64..1e-3, -1e-3f64..1e-3), 0..7),
        kind in 0usize..4,
    ) {
        let ring: Vec<[f64; 2]> = coords.iter().map(|&(x, y)| [x, y]).collect();
        let geometry = match kind {
            0 => serde_json::json!({"type": "LineString", "coordinates": ring}),
            1 => serde_json::json!({"type": "Polygon", "coordinates": [ring]}),
            2 => serde_json::json!({"type": "MultiLineString", "coordinates": [ring]}),
            _ => serde_json::json!({"type": "Point", "coordinates": ring.first().copied().unwrap_or([0.0, 0.0])}),
        };
        let doc = serde_json::json!({
            "type": "FeatureCollection",
            "features": [{"type": "Feature", "properties": {"id": 1}, "geometry": geometry}],
        })
        .to_string();
        if let Ok(p) = parse_roads(doc.as_bytes(), None) {
            for r in &p.records {
                prop_assert!(r.geometry.length() > 0.0);
                prop_assert!(r.geometry.vertices().windows(2).all(|w| w[0] != w[1]));
            }
        }
        if let Ok(p) = parse_buildings(doc.as_bytes(), None) {
            for b in &p.records {
                prop_assert!(b.footprint.area() > 0.0);
            }
        }
    }
}

#[test]
fn structural_garbage_is_rejected() {
    for doc in [
        "",
        "null",
        "[]",
        "{\"type\": \"Feature\"}",
        "{\"type\": \"FeatureCollection\"}",
        "{\"type\": \"FeatureCollection\", \"features\": 3}",
        "{\"type\": \"FeatureCollection\", \"features\": [",
    ] {
        assert!(parse_roads(doc.as_bytes(), None).is_err(), "{doc}");
        assert!(parse_buildings(doc.as_bytes(), None).is_err(), "{doc}");
    }
}
