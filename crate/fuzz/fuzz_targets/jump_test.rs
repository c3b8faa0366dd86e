#![no_main]

use jumpclust::{compute_ecf, jump_test, make_increments, split_point};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let obs: Vec<f64> = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let Ok(sample) = make_increments(&obs) else {
        return;
    };
    let sp = split_point(&compute_ecf(&sample));
    assert!((0.0..=1.0).contains(&sp.p_n));
    if let Some(k) = sp.crossing_index {
        assert!(k >= 1 && k < sample.n());
    }
    if let Ok(r) = jump_test(&sample, 0.05) {
        assert!((0.0..=1.0).contains(&r.p_value));
        if let Some((lo, hi)) = r.ci {
            assert!(lo <= hi);
        }
    }
});
