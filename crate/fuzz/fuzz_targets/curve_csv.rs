#![no_main]

use bumpfield::numerics::SampledFunction;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // Reading must never panic; accepted curves must be finite.
    if let Ok(curve) = SampledFunction::read_csv(data) {
        assert!(curve.values().iter().all(|v| v.is_finite()));
    }
});
