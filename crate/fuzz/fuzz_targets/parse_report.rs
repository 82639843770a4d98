#![no_main]

use libfuzzer_sys::fuzz_target;
use pseudoconvex::pipeline::VerificationReport;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(report) = VerificationReport::from_json(text) {
        let _ = report.to_text();
        let _ = report.compare(&report, 0.0);
    }
});
