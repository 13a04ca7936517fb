#![no_main]

use genex::neural::Dataset;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = Dataset::read_csv(data);
});
