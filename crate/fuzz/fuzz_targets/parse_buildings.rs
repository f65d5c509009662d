#![no_main]

use geoscore::geometry::GeoPoint;
use geoscore::ingest::parse_buildings;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(parsed) = parse_buildings(data, None) {
        for b in &parsed.records {
            assert!(b.footprint.area() > 0.0);
        }
    }
    let _ = parse_buildings(data, GeoPoint::new(-115.2, 36.1).ok());
});
