#![no_main]

use jumpclust::io::parse_plan;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(plan) = parse_plan(text) {
        let cells = plan.validate().expect("parsed plans are valid");
        assert_eq!(cells.len(), plan.expand_cells().len());
    }
});
