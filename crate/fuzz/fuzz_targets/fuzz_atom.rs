#![no_main]

use libfuzzer_sys::fuzz_target;
use multcancel::io::read_atom;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = read_atom(text);
    }
});
