//! The run-configuration parser must never panic on any byte sequence, and
//! anything it accepts must also pass through the weight and grid builders
//! without panicking.

#![no_main]

use libfuzzer_sys::fuzz_target;
use semigroup_decay::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = RunConfig::parse(text) else {
        return;
    };
    if let Some(w) = &cfg.weight {
        let _ = w.build();
    }
    if let Some(g) = &cfg.grid {
        let _ = g.build();
    }
});
