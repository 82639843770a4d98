#![no_main]

use libfuzzer_sys::fuzz_target;
use pseudoconvex::pipeline::cache::decode_entry;

// Entries are only accepted under their own key; the seeds use this one.
const KEY: &str = "seed";

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(grams) = decode_entry(text, KEY) {
        for g in &grams {
            assert_eq!(g.nrows(), g.ncols());
        }
    }
});
