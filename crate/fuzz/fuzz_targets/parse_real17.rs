#![no_main]

use libfuzzer_sys::fuzz_target;
use pseudoconvex::real17;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(x) = real17::parse(text) {
        if x.is_finite() {
            assert_eq!(real17::parse(&real17::format(x)).unwrap().to_bits(), x.to_bits());
        }
    }
});
