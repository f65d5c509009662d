#![no_main]

use geoscore::mask::decode_png_gray;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok((w, h, pixels)) = decode_png_gray(data) {
        assert_eq!(pixels.len(), w * h);
    }
});
