#![no_main]

use std::path::Path;

use gibbsdim::PartitionSource;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(source) = text.parse::<PartitionSource>() else {
        return;
    };
    // Display must parse back to the same source.
    assert_eq!(source.to_string().parse::<PartitionSource>().ok(), Some(source.clone()));
    if !matches!(source, PartitionSource::Table { .. }) {
        let _ = source.load(Path::new("."));
    }
});
