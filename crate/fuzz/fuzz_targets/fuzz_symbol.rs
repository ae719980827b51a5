#![no_main]

use libfuzzer_sys::fuzz_target;
use multcancel::symbols::parse::parse_symbol;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        for (m, n) in [(1usize, 1usize), (2, 1), (2, 2), (3, 2)] {
            if let Ok(sym) = parse_symbol(text, m, n) {
                // exercise evaluation and one derivative on accepted input
                let point = vec![0.37; m * n];
                let _ = sym.evaluate(&point);
                let _ = sym.diff(0, &vec![1u32; n]);
            }
        }
    }
});
