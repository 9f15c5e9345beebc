#![no_main]

use gibbsdim::parse_table;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = parse_table(text) {
        assert!(table.values.iter().all(|v| v.is_finite()));
    }
});
