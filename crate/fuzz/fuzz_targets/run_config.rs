#![no_main]

use jumpclust::io::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(cfg) = RunConfig::parse(text) {
        cfg.validate().expect("parsed configs are valid");
    }
});
