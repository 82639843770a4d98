#![no_main]

use libfuzzer_sys::fuzz_target;
use pseudoconvex::domain::DomainSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = DomainSpec::from_json(text) {
        let back = DomainSpec::from_json(&spec.to_json().unwrap()).unwrap();
        assert_eq!(back, spec);
        // the Hartogs builder is slow at depth; the cheap kinds are built in full
        if !matches!(spec, DomainSpec::CantorHartogs { .. }) {
            let dom = spec.build().unwrap();
            assert_eq!(dom.bounding_box().len(), 2 * dom.dim());
        }
    }
});
