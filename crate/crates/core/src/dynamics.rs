//! Explicit time stepping of `u_t = −u + ∫ ω(y − x) f(u(y, t) − h) dy`
//! on a truncated symmetric domain, used to probe bump stability.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{ConnectivityKernel, FiringRate};
use crate::numerics::SampledFunction;
use crate::scheme_direct::BumpSolution;

/// Largest accepted time step.
pub const MAX_DT: f64 = 0.5;
pub const DEFAULT_DT: f64 = 0.05;
/// Allowance for the drift of a discrete equilibrium when deciding whether a
/// perturbation died out.
pub const DRIFT_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState {
    pub field: SampledFunction,
    pub time: f64,
}

impl EvolutionState {
    pub fn new(field: SampledFunction) -> Self {
        Self { field, time: 0.0 }
    }
}

/// Discrete convolution `(Kg)_i = Σ_j ω((i − j) dx) w_j g_j` with
/// composite Simpson weights (trapezoid for an even point count).
#[derive(Debug, Clone)]
pub struct Convolution {
    lags: Vec<f64>,
    weights: Vec<f64>,
}

impl Convolution {
    pub fn new(kernel: &ConnectivityKernel, n: usize, dx: f64) -> Self {
        let lags = (0..n).map(|k| kernel.omega(k as f64 * dx)).collect();
        let mut weights = vec![dx; n];
        if n % 2 == 1 && n >= 3 {
            for (j, w) in weights.iter_mut().enumerate() {
                *w = dx / 3.0
                    * if j == 0 || j == n - 1 {
                        1.0
                    } else if j % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
            }
        } else {
            weights[0] = 0.5 * dx;
            weights[n - 1] = 0.5 * dx;
        }
        Self { lags, weights }
    }

    /// Applies the convolution to `g`, skipping exact zeros of `g`.
    pub fn apply(&self, g: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (j, (&gj, &wj)) in g.iter().zip(&self.weights).enumerate() {
            if gj == 0.0 {
                continue;
            }
            let c = gj * wj;
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.lags[i.abs_diff(j)] * c;
            }
        }
    }
}

fn rates(rate: &FiringRate, h: f64, u: &[f64]) -> Vec<f64> {
    u.iter().map(|&v| rate.eval(v - h)).collect()
}

/// `steps` explicit Euler steps of size `dt`.
pub fn evolve(
    kernel: &ConnectivityKernel,
    rate: &FiringRate,
    h: f64,
    state: &EvolutionState,
    dt: f64,
    steps: usize,
) -> Result<EvolutionState> {
    if !(dt > 0.0 && dt <= MAX_DT) {
        return Err(Error::invalid("dt", format!("must lie in (0, {MAX_DT}], got {dt}")));
    }
    let grid = *state.field.grid();
    let conv = Convolution::new(kernel, grid.len(), grid.spacing());
    let mut u = state.field.values().to_vec();
    let mut input = vec![0.0; u.len()];
    for step in 1..=steps {
        conv.apply(&rates(rate, h, &u), &mut input);
        for (v, s) in u.iter_mut().zip(&input) {
            *v += dt * (s - *v);
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp { step });
        }
    }
    Ok(EvolutionState {
        field: SampledFunction::new(grid, u)?,
        time: state.time + dt * steps as f64,
    })
}

/// `max |−u + ∫ ω(y − x) f(u(y) − h) dy|` over the grid.
pub fn stationarity_residual(
    kernel: &ConnectivityKernel,
    rate: &FiringRate,
    h: f64,
    field: &SampledFunction,
) -> f64 {
    let grid = field.grid();
    let conv = Convolution::new(kernel, grid.len(), grid.spacing());
    let mut input = vec![0.0; grid.len()];
    conv.apply(&rates(rate, h, field.values()), &mut input);
    field
        .values()
        .iter()
        .zip(&input)
        .map(|(u, s)| (s - u).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Returned,
    Departed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityProbe {
    pub verdict: Verdict,
    /// `max |u(T) − bump|` at the horizon.
    pub max_deviation: f64,
    pub amplitude: f64,
    pub horizon: f64,
}

/// Adds `amplitude · e^{−x²}` to the bump, evolves to `horizon` and reports
/// whether the deviation from the bump fell below `amplitude / 2`
/// (plus [`DRIFT_FLOOR`]).
pub fn probe_stability(
    kernel: &ConnectivityKernel,
    rate: &FiringRate,
    h: f64,
    bump: &BumpSolution,
    amplitude: f64,
    horizon: f64,
    dt: f64,
) -> Result<(StabilityProbe, EvolutionState)> {
    let peak = bump.profile.max().abs();
    if !(amplitude.abs() <= 1e-2 * peak) {
        return Err(Error::invalid(
            "amplitude",
            format!("must not exceed 1e-2 * max u = {}, got {amplitude}", 1e-2 * peak),
        ));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::invalid("horizon", format!("must be non-negative, got {horizon}")));
    }
    let grid = *bump.profile.grid();
    let start: Vec<f64> = bump
        .profile
        .iter()
        .map(|(x, u)| u + amplitude * (-x * x).exp())
        .collect();
    let state = EvolutionState::new(SampledFunction::new(grid, start)?);
    let steps = (horizon / dt).round() as usize;
    let end = evolve(kernel, rate, h, &state, dt, steps)?;
    let max_deviation = end.field.max_abs_diff(&bump.profile);
    let verdict = if max_deviation <= 0.5 * amplitude.abs() + DRIFT_FLOOR {
        Verdict::Returned
    } else {
        Verdict::Departed
    };
    Ok((
        StabilityProbe {
            verdict,
            max_deviation,
            amplitude,
            horizon,
        },
        end,
    ))
}
