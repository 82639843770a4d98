#![no_main]

use libfuzzer_sys::fuzz_target;
use pseudoconvex::pipeline::PipelineConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = PipelineConfig::from_json(text) {
        cfg.validate().expect("parsed configs are valid");
        let again = PipelineConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(again, cfg);
    }
});
