//! Construction of bump solutions of the one-population Wilson–Cowan
//! neural field
//!
//! ```text
//! u_t = −u + ∫ ω(y − x) f(u(y, t) − h) dy
//! ```
//!
//! with a smoothed Heaviside firing rate `f`, by two monotone iteration
//! schemes:
//!
//! * [`scheme_direct`] iterates the Hammerstein operator
//!   `T_f u = u_τ + ∫_{Δ_τ}^{Δ₀} r(·, y) f(u(y) − h) dy` from the two
//!   Heaviside bumps `u_τ ≤ u₀` and extends the limit to a bump on ℝ;
//! * [`scheme_width`] iterates the excitation-width profile `Δ(t)`,
//!   `t ∈ [0, τ]`, the points where the bump crosses level `h + t`.
//!
//! [`assumptions`] checks numerically every hypothesis the convergence
//! arguments need, and [`dynamics`] time-steps the field to probe stability.

pub mod assumptions;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod kernels;
pub mod numerics;
pub mod scheme_direct;
pub mod scheme_width;
pub mod widths;

pub use error::{Error, Result};
pub use kernels::{ConnectivityKernel, FiringRate, KernelShape};
pub use numerics::{Grid, SampledFunction};
pub use widths::{WidthPair, WidthPolicy, WidthSolution};

/// Per-iteration error sequence `ε(n)`, `n = 1..N`, and convergence verdict.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct IterationTrace {
    pub errors: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl IterationTrace {
    /// First `n` (1-based) from which every later `ε` stays below `bound`.
    pub fn settles_below(&self, bound: f64) -> Option<usize> {
        let last_bad = self.errors.iter().rposition(|&e| e >= bound);
        match last_bad {
            None => Some(1),
            Some(i) if i + 1 < self.errors.len() => Some(i + 2),
            Some(_) => None,
        }
    }
}
