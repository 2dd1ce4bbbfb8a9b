//! Configuration-driven pipeline: widths, pair selection, assumption checks,
//! both schemes, bump construction, cross-validation and stability probes.

mod config;
mod output;

pub use config::{
    AssumptionsSpec, BumpSpec, ExperimentConfig, FieldSpec, KernelSpec, OutputSpec, PolicyName,
    RateSpec, SchemeSelection, SchemeSpec, SimulateSpec, WidthsSpec,
};
pub use output::write_outputs;

use serde::Serialize;

use crate::assumptions::{check_static, AssumptionReport, ScanConfig};
use crate::dynamics::{probe_stability, stationarity_residual, EvolutionState, StabilityProbe};
use crate::error::Result;
use crate::kernels::{ConnectivityKernel, FiringRate};
use crate::numerics::SampledFunction;
use crate::scheme_direct::{default_extent, extend_bump, BumpSolution, DirectScheme};
use crate::scheme_width::{cross_validate, reconstruct_bump, WidthScheme};
use crate::widths::{select_width_pair, solve_half_widths, Stability, WidthPair, WidthSolution};
use crate::IterationTrace;

/// Which pipeline stages to run after width selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stages {
    pub assumptions: bool,
    pub direct: bool,
    pub width: bool,
    pub simulate: bool,
}

impl Stages {
    pub const WIDTHS: Stages = Stages {
        assumptions: false,
        direct: false,
        width: false,
        simulate: false,
    };

    /// Stages implied by the config alone.
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        let (direct, width) = match cfg.scheme.run {
            SchemeSelection::Direct => (true, false),
            SchemeSelection::Width => (false, true),
            SchemeSelection::Both => (true, true),
        };
        Stages {
            assumptions: true,
            direct,
            width,
            simulate: cfg.simulate.enabled,
        }
    }
}

/// Node-wise check of `u_τ^st ≤ u* ≤ u₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderingCheck {
    /// Half-width of the stable `h + τ` bump used as the lower barrier.
    pub delta_tau_stable: f64,
    /// `min (u* − u_τ^st)`.
    pub margin_above_stable: f64,
    /// `min (u₀ − u*)`.
    pub margin_below_zero: f64,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct DirectResult {
    pub trace: IterationTrace,
    /// `(w_n, v_n)` for `n = 0..N`.
    pub iterates: Vec<(SampledFunction, SampledFunction)>,
    pub lower: SampledFunction,
    pub upper: SampledFunction,
    pub u_tau: SampledFunction,
    pub u_zero: SampledFunction,
    pub ordering: Option<OrderingCheck>,
    /// Whether `u*` is strictly decreasing at the nodes.
    pub decreasing: bool,
    pub bump: Option<BumpSolution>,
    pub stationarity_residual: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct WidthResult {
    pub trace: IterationTrace,
    pub lower: SampledFunction,
    pub upper: SampledFunction,
    pub k: f64,
    pub m: f64,
    pub decreasing: bool,
    pub posterior: AssumptionReport,
    pub bump: Option<BumpSolution>,
}

#[derive(Debug, Clone)]
pub struct ProbeResult {
    pub name: &'static str,
    pub probe: StabilityProbe,
    pub initial: SampledFunction,
    pub last: EvolutionState,
}

#[derive(Debug, Clone)]
pub struct ResultBundle {
    pub config: ExperimentConfig,
    pub solutions_h: Vec<WidthSolution>,
    pub solutions_h_tau: Vec<WidthSolution>,
    pub pair: Option<WidthPair>,
    pub assumptions: Option<AssumptionReport>,
    pub direct: Option<DirectResult>,
    pub width: Option<WidthResult>,
    pub cross_validation: Option<f64>,
    pub probes: Vec<ProbeResult>,
    /// Stage failures that did not stop the pipeline.
    pub failures: Vec<String>,
}

impl ResultBundle {
    /// Every assumption checked so far holds, including the posterior
    /// checks of scheme II and the ordering check of scheme I.
    pub fn assumptions_hold(&self) -> bool {
        self.assumptions.as_ref().is_none_or(|r| r.all_hold())
            && self.width.as_ref().is_none_or(|w| w.posterior.all_hold())
            && self
                .direct
                .as_ref()
                .and_then(|d| d.ordering)
                .is_none_or(|o| o.holds)
    }

    pub fn failed_assumptions(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        if let Some(r) = &self.assumptions {
            out.extend(r.failures().map(|id| id.to_string()));
        }
        if let Some(w) = &self.width {
            out.extend(w.posterior.failures().map(|id| id.to_string()));
        }
        if let Some(o) = self.direct.as_ref().and_then(|d| d.ordering) {
            if !o.holds {
                out.push("ordering".into());
            }
        }
        out
    }
}

fn bump_extent(cfg: &ExperimentConfig, kernel: &ConnectivityKernel, pair: &WidthPair) -> f64 {
    cfg.bump.extent.unwrap_or_else(|| default_extent(kernel, pair))
}

/// Runs the stages the config selects.
pub fn run(cfg: &ExperimentConfig) -> Result<ResultBundle> {
    run_stages(cfg, Stages::from_config(cfg))
}

/// Runs the given stages. Width solving and pair selection are always run;
/// failing either aborts. Later stage failures are recorded in the bundle.
pub fn run_stages(cfg: &ExperimentConfig, stages: Stages) -> Result<ResultBundle> {
    cfg.validate()?;
    let kernel = cfg.kernel.build()?;
    let rate = cfg.rate.build()?;
    let h = cfg.field.threshold;
    let tau = rate.tau();
    let scan_upper = cfg.widths.scan_upper.unwrap_or_else(|| kernel.default_scan_upper());
    let solutions_h = solve_half_widths(&kernel, h, scan_upper)?;
    let solutions_h_tau = solve_half_widths(&kernel, h + tau, scan_upper)?;
    let mut bundle = ResultBundle {
        config: cfg.clone(),
        solutions_h,
        solutions_h_tau,
        pair: None,
        assumptions: None,
        direct: None,
        width: None,
        cross_validation: None,
        probes: Vec::new(),
        failures: Vec::new(),
    };
    if stages == Stages::WIDTHS {
        bundle.pair = select_width_pair(&bundle.solutions_h, &bundle.solutions_h_tau, cfg.widths.policy()).ok();
        return Ok(bundle);
    }
    let pair = select_width_pair(&bundle.solutions_h, &bundle.solutions_h_tau, cfg.widths.policy())?;
    bundle.pair = Some(pair);
    let extent = bump_extent(cfg, &kernel, &pair);
    let scan = ScanConfig {
        n: cfg.assumptions.scan_n,
        far_cutoff: cfg.assumptions.far_cutoff,
    };

    if stages.assumptions {
        match check_static(&kernel, &rate, h, tau, &pair, &scan) {
            Ok(r) => bundle.assumptions = Some(r),
            Err(e) => bundle.failures.push(format!("assumptions: {e}")),
        }
    }

    if stages.direct {
        match run_direct(cfg, &kernel, &rate, &pair, &bundle.solutions_h_tau, extent) {
            Ok((d, notes)) => {
                bundle.failures.extend(notes);
                bundle.direct = Some(d);
            }
            Err(e) => bundle.failures.push(format!("direct: {e}")),
        }
    }

    if stages.width {
        match run_width(cfg, &kernel, &rate, &pair, extent) {
            Ok((w, notes)) => {
                bundle.failures.extend(notes);
                bundle.width = Some(w);
            }
            Err(e) => bundle.failures.push(format!("width: {e}")),
        }
    }

    if let (Some(b), Some(w)) = (
        bundle.direct.as_ref().and_then(|d| d.bump.as_ref()),
        bundle.width.as_ref(),
    ) {
        match cross_validate(b, &w.upper) {
            Ok(e) => bundle.cross_validation = Some(e),
            Err(e) => bundle.failures.push(format!("cross-validation: {e}")),
        }
    }

    if stages.simulate {
        let sim = &cfg.simulate;
        let bump = bundle
            .direct
            .as_ref()
            .and_then(|d| d.bump.clone())
            .or_else(|| bundle.width.as_ref().and_then(|w| w.bump.clone()));
        match bump {
            Some(b) => match probe_stability(&kernel, &rate, h, &b, sim.amplitude, sim.horizon, sim.dt) {
                Ok((probe, last)) => bundle.probes.push(ProbeResult {
                    name: "f_field",
                    probe,
                    initial: b.profile.clone(),
                    last,
                }),
                Err(e) => bundle.failures.push(format!("simulate f_field: {e}")),
            },
            None => bundle.failures.push("simulate: no bump to probe".into()),
        }
        if sim.probe_unstable {
            let probe = BumpSolution::heaviside(&kernel, h + tau, pair.lo(), extent, cfg.bump.points)
                .and_then(|b| {
                    let step = FiringRate::heaviside(0.0)?;
                    probe_stability(&kernel, &step, h + tau, &b, sim.amplitude, sim.horizon, sim.dt)
                        .map(|(p, last)| (p, last, b))
                });
            match probe {
                Ok((probe, last, b)) => bundle.probes.push(ProbeResult {
                    name: "f0_field_delta_tau",
                    probe,
                    initial: b.profile,
                    last,
                }),
                Err(e) => bundle.failures.push(format!("simulate f0_field_delta_tau: {e}")),
            }
        }
    }
    Ok(bundle)
}

fn stable_below(sols: &[WidthSolution], hi: f64) -> Option<f64> {
    sols.iter()
        .filter(|s| s.stability == Stability::Stable && s.half_width < hi)
        .map(|s| s.half_width)
        .reduce(f64::max)
}

fn run_direct(
    cfg: &ExperimentConfig,
    kernel: &ConnectivityKernel,
    rate: &FiringRate,
    pair: &WidthPair,
    sols_h_tau: &[WidthSolution],
    extent: f64,
) -> Result<(DirectResult, Vec<String>)> {
    let h = cfg.field.threshold;
    let dcfg = &cfg.scheme.direct;
    let scheme = DirectScheme::new(kernel, rate, h, pair, dcfg.grid_n)?;
    let mut iterates = Vec::new();
    let out = scheme.iterate_with(dcfg, |_, w, v| iterates.push((w.clone(), v.clone())))?;
    let u_star = &out.upper;
    let mut notes = Vec::new();
    if !out.trace.converged {
        notes.push(format!(
            "direct: not converged after {} iterations",
            out.trace.iterations
        ));
    }
    let u_zero = scheme.upper_start();
    let ordering = stable_below(sols_h_tau, pair.hi()).map(|st| {
        let above = u_star
            .iter()
            .map(|(x, u)| u - kernel.phi_unchecked(x, st))
            .fold(f64::INFINITY, f64::min);
        let below = u_zero
            .values()
            .iter()
            .zip(u_star.values())
            .map(|(z, u)| z - u)
            .fold(f64::INFINITY, f64::min);
        OrderingCheck {
            delta_tau_stable: st,
            margin_above_stable: above,
            margin_below_zero: below,
            holds: above >= 0.0 && below >= 0.0,
        }
    });
    let decreasing = u_star.values().windows(2).all(|w| w[1] < w[0]);
    let bump = match extend_bump(kernel, rate, h, pair, u_star, extent, cfg.bump.points) {
        Ok(b) => Some(b),
        Err(e) => {
            notes.push(format!("direct bump: {e}"));
            None
        }
    };
    let residual = bump
        .as_ref()
        .map(|b| stationarity_residual(kernel, rate, h, &b.profile));
    Ok((
        DirectResult {
            trace: out.trace,
            iterates,
            lower: out.lower,
            upper: out.upper,
            u_tau: scheme.lower_start(),
            u_zero,
            ordering,
            decreasing,
            bump,
            stationarity_residual: residual,
        },
        notes,
    ))
}

fn run_width(
    cfg: &ExperimentConfig,
    kernel: &ConnectivityKernel,
    rate: &FiringRate,
    pair: &WidthPair,
    extent: f64,
) -> Result<(WidthResult, Vec<String>)> {
    let h = cfg.field.threshold;
    let wcfg = &cfg.scheme.width;
    let scheme = WidthScheme::new(kernel, rate, h, pair, wcfg)?;
    let out = scheme.iterate(wcfg)?;
    let mut notes = Vec::new();
    if !out.trace.converged {
        notes.push(format!(
            "width: not converged after {} iterations",
            out.trace.iterations
        ));
    }
    let bump = match reconstruct_bump(kernel, rate, h, &out.upper, extent, cfg.bump.points) {
        Ok(b) => Some(b),
        Err(e) => {
            notes.push(format!("width bump: {e}"));
            None
        }
    };
    Ok((
        WidthResult {
            trace: out.trace,
            lower: out.lower,
            upper: out.upper,
            k: out.k,
            m: out.m,
            decreasing: out.decreasing,
            posterior: out.posterior,
            bump,
        },
        notes,
    ))
}
