#![no_main]

use libfuzzer_sys::fuzz_target;
use pseudoconvex::domain::{format_point, parse_complex, parse_point};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_complex(text);
    if let Ok(z) = parse_point(text) {
        if z.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            assert_eq!(parse_point(&format_point(&z)).unwrap(), z);
        }
    }
});
