#![no_main]

use libfuzzer_sys::fuzz_target;
use pseudoconvex::cantor_bump::ScheduleDocument;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((schedule, tree)) = ScheduleDocument::from_json(text) {
        assert!(schedule.is_valid());
        if let Some(tree) = tree {
            tree.check().unwrap();
        }
    }
});
