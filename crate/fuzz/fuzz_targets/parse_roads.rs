#![no_main]

use geoscore::ingest::parse_roads;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(parsed) = parse_roads(data, None) {
        for r in &parsed.records {
            assert!(r.geometry.length().is_finite());
        }
    }
});
