#![no_main]

use std::path::Path;

use gibbsdim::MeasureSource;
use libfuzzer_sys::fuzz_target;

fn reads_files(m: &MeasureSource) -> bool {
    match m {
        MeasureSource::Table { .. } => true,
        MeasureSource::Markov1 { base, .. } => reads_files(base),
        _ => false,
    }
}

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(source) = text.parse::<MeasureSource>() else {
        return;
    };
    // Display must parse back to the same source.
    assert_eq!(source.to_string().parse::<MeasureSource>().ok(), Some(source.clone()));
    if !reads_files(&source) {
        let _ = source.load(Path::new("."));
    }
});
