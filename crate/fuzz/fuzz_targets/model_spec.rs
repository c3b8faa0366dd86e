#![no_main]

use jumpclust::sim::{simulate_path, ModelSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let Ok(spec) = toml::from_str::<ModelSpec>(text) else {
        return;
    };
    if spec.validate().is_err() || spec.n > 10_000 || spec.jumps.expected_jumps(spec.n) > 1e4 {
        return;
    }
    if let Ok(path) = simulate_path(&spec, 0) {
        assert_eq!(path.values.len(), spec.n + 1);
        assert_eq!(path.increments.len(), spec.n);
        assert_eq!(path.jump_steps.len(), path.jump_count);
    }
});
