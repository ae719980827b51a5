#![no_main]

use libfuzzer_sys::fuzz_target;
use multcancel::config::{parse_config_text, RunConfig};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(map) = parse_config_text(text) {
            let _ = RunConfig::from_map(map);
        }
    }
});
