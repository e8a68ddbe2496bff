//! The two-column sample-table parser must never panic, and any table it
//! accepts must construct (or cleanly reject) a tabulated weight without
//! panicking.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(samples) = semigroup_decay::config::parse_table(s) {
        let _ = semigroup_decay::WeightFunction::tabulated(&samples);
    }
});
