#![no_main]

use std::path::Path;

use gibbsdim_cli::config::parse_config;
use gibbsdim_cli::Settings;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_config(text);
    let _ = Settings::new().with_file(text, Path::new("."));
});
