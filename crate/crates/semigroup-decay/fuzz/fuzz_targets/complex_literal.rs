//! The complex-entry parser (matrix rows in run configurations) must never
//! panic on any input string.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = semigroup_decay::config::parse_complex(s);
    }
});
