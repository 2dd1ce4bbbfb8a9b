#![allow(dead_code)]

use bumpfield::experiment::ExperimentConfig;
use bumpfield::widths::{select_width_pair, solve_half_widths, WidthPair, WidthPolicy};
use bumpfield::{ConnectivityKernel, FiringRate};

pub const H: f64 = 0.1;
pub const TAU: f64 = 0.05;

pub const REFERENCE_TOML: &str = r#"
[kernel]
type = "gaussian_difference"
exc_amp = 1.5
exc_rate = 2.0
inh_amp = 1.0
inh_rate = 1.0

[field]
threshold = 0.1

[rate]
type = "logoid"
tau = 0.05
p = 3.0

[widths]
policy = "smallest_unstable"

[scheme]
run = "both"

[bump]
extent = 3.0
points = 1201

[simulate]
enabled = true
amplitude = 1e-3
horizon = 50.0
dt = 0.05
probe_unstable = true
"#;

pub fn reference_config() -> ExperimentConfig {
    ExperimentConfig::parse(REFERENCE_TOML).unwrap()
}

pub fn kernel() -> ConnectivityKernel {
    ConnectivityKernel::gaussian_difference(1.5, 2.0, 1.0, 1.0).unwrap()
}

pub fn rate() -> FiringRate {
    FiringRate::logoid(TAU, 3.0).unwrap()
}

pub fn pair() -> WidthPair {
    let k = kernel();
    let up = k.default_scan_upper();
    select_width_pair(
        &solve_half_widths(&k, H, up).unwrap(),
        &solve_half_widths(&k, H + TAU, up).unwrap(),
        WidthPolicy::SmallestUnstable,
    )
    .unwrap()
}
