#![no_main]

use genex::MappingSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = text.parse::<MappingSpec>() {
        // Accepted codes print back to something that parses to the same spec.
        assert_eq!(spec.to_string().parse::<MappingSpec>().unwrap(), spec);
    }
});
