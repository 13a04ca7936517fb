#![no_main]

use genex::harness::{read_runs, write_runs};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(records) = read_runs(data) else { return };
    let mut out = Vec::new();
    write_runs(&mut out, &records).unwrap();
    assert_eq!(read_runs(&out[..]).unwrap(), records);
});
