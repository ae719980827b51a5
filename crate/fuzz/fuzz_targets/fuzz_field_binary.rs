#![no_main]

use libfuzzer_sys::fuzz_target;
use multcancel::io::read_field_binary;

fuzz_target!(|data: &[u8]| {
    let _ = read_field_binary(data);
});
