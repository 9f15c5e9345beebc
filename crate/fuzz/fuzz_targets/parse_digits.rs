#![no_main]

use gibbsdim::parse_digits;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(digits) = parse_digits(text) {
        for d in digits {
            assert!(d.log_value().is_finite() && d.log_value() >= 0.0);
        }
    }
});
