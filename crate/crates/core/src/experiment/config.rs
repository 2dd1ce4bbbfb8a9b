//! TOML experiment configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{ConnectivityKernel, FiringRate};
use crate::scheme_direct::DirectConfig;
use crate::scheme_width::WidthConfig;
use crate::widths::WidthPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    GaussianDifference {
        exc_amp: f64,
        exc_rate: f64,
        inh_amp: f64,
        inh_rate: f64,
    },
    OscillatoryDecay {
        decay: f64,
    },
}

impl KernelSpec {
    pub fn build(&self) -> Result<ConnectivityKernel> {
        match *self {
            KernelSpec::GaussianDifference {
                exc_amp,
                exc_rate,
                inh_amp,
                inh_rate,
            } => ConnectivityKernel::gaussian_difference(exc_amp, exc_rate, inh_amp, inh_rate),
            KernelSpec::OscillatoryDecay { decay } => ConnectivityKernel::oscillatory_decay(decay),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RateSpec {
    Logoid { tau: f64, p: f64 },
}

impl RateSpec {
    pub fn build(&self) -> Result<FiringRate> {
        match *self {
            RateSpec::Logoid { tau, p } => FiringRate::logoid(tau, p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    /// Firing threshold `h`.
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyName {
    SmallestUnstable,
    LargestStable,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WidthsSpec {
    pub policy: PolicyName,
    /// Used by the explicit policy.
    pub tau_index: usize,
    pub zero_index: usize,
    /// Upper end of the `a = 2Δ` scan; kernel default when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan_upper: Option<f64>,
}

impl Default for WidthsSpec {
    fn default() -> Self {
        Self {
            policy: PolicyName::SmallestUnstable,
            tau_index: 0,
            zero_index: 0,
            scan_upper: None,
        }
    }
}

impl WidthsSpec {
    pub fn policy(&self) -> WidthPolicy {
        match self.policy {
            PolicyName::SmallestUnstable => WidthPolicy::SmallestUnstable,
            PolicyName::LargestStable => WidthPolicy::LargestStable,
            PolicyName::Explicit => WidthPolicy::Explicit {
                tau_index: self.tau_index,
                zero_index: self.zero_index,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeSelection {
    Direct,
    Width,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeSpec {
    pub run: SchemeSelection,
    pub direct: DirectConfig,
    pub width: WidthConfig,
}

impl Default for SchemeSpec {
    fn default() -> Self {
        Self {
            run: SchemeSelection::Both,
            direct: DirectConfig::default(),
            width: WidthConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssumptionsSpec {
    pub scan_n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub far_cutoff: Option<f64>,
}

impl Default for AssumptionsSpec {
    fn default() -> Self {
        Self {
            scan_n: 401,
            far_cutoff: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BumpSpec {
    /// Half-extent `X`; `Δ₀ + 5·(decay length)` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extent: Option<f64>,
    /// Odd number of output points on `[−X, X]`.
    pub points: usize,
}

impl Default for BumpSpec {
    fn default() -> Self {
        Self {
            extent: None,
            points: 1201,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSpec {
    pub enabled: bool,
    pub amplitude: f64,
    pub horizon: f64,
    pub dt: f64,
    /// Also probe the Heaviside bump of width `2Δ_τ`.
    pub probe_unstable: bool,
}

impl Default for SimulateSpec {
    fn default() -> Self {
        Self {
            enabled: false,
            amplitude: 1e-3,
            horizon: 50.0,
            dt: crate::dynamics::DEFAULT_DT,
            probe_unstable: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kernel: KernelSpec,
    pub field: FieldSpec,
    pub rate: RateSpec,
    #[serde(default)]
    pub widths: WidthsSpec,
    #[serde(default)]
    pub scheme: SchemeSpec,
    #[serde(default)]
    pub assumptions: AssumptionsSpec,
    #[serde(default)]
    pub bump: BumpSpec,
    #[serde(default)]
    pub simulate: SimulateSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    /// Parses and validates a TOML document.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |e: Error| Error::Config(e.to_string());
        self.kernel.build().map_err(cfg_err)?;
        self.rate.build().map_err(cfg_err)?;
        let h = self.field.threshold;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Config(format!("field.threshold must be positive, got {h}")));
        }
        if let Some(s) = self.widths.scan_upper {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Config(format!("widths.scan_upper must be positive, got {s}")));
            }
        }
        self.scheme.direct.validate().map_err(cfg_err)?;
        self.scheme.width.validate().map_err(cfg_err)?;
        if self.assumptions.scan_n < 2 {
            return Err(Error::Config("assumptions.scan_n must be at least 2".into()));
        }
        if self.bump.points < 3 || self.bump.points % 2 == 0 {
            return Err(Error::Config(format!(
                "bump.points must be odd and at least 3, got {}",
                self.bump.points
            )));
        }
        if let Some(x) = self.bump.extent {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::Config(format!("bump.extent must be positive, got {x}")));
            }
        }
        let s = &self.simulate;
        if !(s.dt > 0.0 && s.dt <= crate::dynamics::MAX_DT) {
            return Err(Error::Config(format!("simulate.dt must lie in (0, 0.5], got {}", s.dt)));
        }
        if !(s.horizon >= 0.0 && s.horizon.is_finite() && s.amplitude.is_finite()) {
            return Err(Error::Config("simulate.horizon and amplitude must be finite".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
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
"#;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.scheme.direct.grid_n, 401);
        assert_eq!(c.scheme.width.grid_m, 201);
        assert_eq!(c.widths.policy, PolicyName::SmallestUnstable);
    }

    #[test]
    fn round_trip() {
        let c = ExperimentConfig::parse(MINIMAL).unwrap();
        let again = ExperimentConfig::parse(&c.to_toml()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn unknown_key_rejected_with_location() {
        let bad = MINIMAL.replace("p = 3.0", "p = 3.0\nq = 1");
        let e = ExperimentConfig::parse(&bad).unwrap_err().to_string();
        assert!(e.contains('q'), "{e}");
        assert!(e.contains("line"), "{e}");
    }

    #[test]
    fn invalid_kernel_rejected() {
        let bad = MINIMAL.replace("inh_amp = 1.0", "inh_amp = 2.0");
        assert!(matches!(ExperimentConfig::parse(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn explicit_k_parses() {
        let text = format!("{MINIMAL}\n[scheme.width]\nk = {{ mode = \"explicit\", k = 0.5 }}\n");
        let c = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(c.scheme.width.k, crate::scheme_width::KPolicy::Explicit { k: 0.5 });
    }
}
