//! Two passes over the tabulated-weight decoder. Raw float pairs check
//! that validation rejects garbage without panicking; steered pairs (forced
//! into the accepted shape) drive the interpolant deep and hold evaluation
//! to its contract: every accepted point yields a finite positive weight
//! and a finite log-derivative.

#![no_main]

use libfuzzer_sys::fuzz_target;
use semigroup_decay::WeightFunction;

fuzz_target!(|data: &[u8]| {
    let raw: Vec<(f64, f64)> = data
        .chunks_exact(16)
        .take(64)
        .map(|c| {
            (
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    let _ = WeightFunction::tabulated(&raw);

    let mut node = 0.0;
    let steered: Vec<(f64, f64)> = raw
        .iter()
        .take(16)
        .map(|&(ds, v)| {
            let gap = if ds.is_finite() {
                ds.abs().clamp(1e-6, 1e3)
            } else {
                1.0
            };
            let val = if v.is_finite() {
                v.abs().clamp(1e-6, 1e6)
            } else {
                1.0
            };
            let here = node;
            node += gap;
            (here, val)
        })
        .collect();
    if let Ok(w) = WeightFunction::tabulated(&steered) {
        let end = w.validity();
        for k in 0..=16 {
            let x = end * k as f64 / 16.0;
            if let Ok((m, mu)) = w.eval(x) {
                assert!(
                    m.is_finite() && m > 0.0,
                    "accepted table produced weight {m} at {x}"
                );
                assert!(
                    mu.is_finite(),
                    "accepted table produced log-derivative {mu} at {x}"
                );
            }
        }
        let _ = w.weighted_inv_norm_sq(0.0, end);
    }
});
