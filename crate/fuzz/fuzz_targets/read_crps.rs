#![no_main]

use genex::puf::{puf_fitness, CrpSet};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(set) = CrpSet::read_csv(data) {
        let w = vec![1.0; set.stages() + 1];
        assert!(puf_fitness(&w, &set).unwrap() <= set.len());
    }
});
