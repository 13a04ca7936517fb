#![no_main]

use genex::neural::Architecture;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(arch) = text.parse::<Architecture>() {
        assert_eq!(arch.to_string().parse::<Architecture>().unwrap(), arch);
        let _ = arch.parameter_count();
    }
});
