#![no_main]

use geoscore::mask::GeoTransform;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(t) = GeoTransform::from_json(data) {
        assert!(t.pixel_size > 0.0);
        let again = GeoTransform::from_json(t.to_json().as_bytes()).expect("written sidecar parses");
        assert_eq!(again, t);
    }
});
