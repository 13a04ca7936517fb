#![no_main]

use genex::harness::{expand_cells, ExperimentSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok(spec) = ExperimentSpec::from_toml_str(&text) {
        let _ = expand_cells(&spec).len();
    }
});
