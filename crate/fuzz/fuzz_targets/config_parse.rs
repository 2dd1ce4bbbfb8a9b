#![no_main]

use bumpfield::experiment::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // Parsing must never panic; accepted configs must survive a round trip.
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = ExperimentConfig::parse(text) {
        let again = ExperimentConfig::parse(&cfg.to_toml()).expect("echoed config parses");
        assert_eq!(cfg.to_toml(), again.to_toml());
    }
});
