#![no_main]

use libfuzzer_sys::fuzz_target;
use multcancel::config::parse_battery_text;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_battery_text(text, &[2.0, 2.0]);
    }
});
