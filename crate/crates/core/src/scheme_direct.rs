//! Iteration scheme I: monotone Picard iteration of
//! `T_f u = u_τ + ∫_{Δ_τ}^{Δ₀} r(·, y) f(u(y) − h) dy` on `[Δ_τ, Δ₀]`,
//! started from both ends of the ordered interval `⟦u_τ, u₀⟧`, and
//! extension of the limit to a bump on `[−X, X]`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{ConnectivityKernel, FiringRate};
use crate::numerics::{bisect, CellQuadrature, Grid, MonotoneCubic, SampledFunction};
use crate::widths::WidthPair;
use crate::IterationTrace;

/// Gauss points per grid cell inside `T_f`.
pub const QUAD_ORDER: usize = 4;
/// How far an iterate may leave `⟦u_τ, u₀⟧` before it is rejected.
pub const ORDER_SLACK: f64 = 1e-7;
/// Bisection tolerance for crossing points.
pub const CROSSING_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DirectConfig {
    pub grid_n: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for DirectConfig {
    fn default() -> Self {
        Self {
            grid_n: 401,
            tol: 1e-8,
            max_iter: 200,
        }
    }
}

impl DirectConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 3 {
            return Err(Error::invalid("grid_n", format!("need at least 3, got {}", self.grid_n)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::invalid("tol", format!("must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

/// The discretized operator `T_f` on a fixed grid over `[Δ_τ, Δ₀]`.
#[derive(Debug, Clone)]
pub struct DirectScheme {
    rate: FiringRate,
    h: f64,
    grid: Grid,
    quad: CellQuadrature,
    /// `u_τ` at the grid nodes.
    u_tau: Vec<f64>,
    /// `u₀` at the grid nodes.
    u_zero: Vec<f64>,
    /// `r(x_i, y_q) w_q`, row-major by node.
    weights: Vec<f64>,
}

impl DirectScheme {
    pub fn new(
        kernel: &ConnectivityKernel,
        rate: &FiringRate,
        h: f64,
        pair: &WidthPair,
        grid_n: usize,
    ) -> Result<Self> {
        let (lo, hi) = (pair.lo(), pair.hi());
        if !(lo < hi) {
            return Err(Error::Assumption1Violated(format!(
                "need delta_tau < delta_0, got {lo} and {hi}"
            )));
        }
        let grid = Grid::new(lo, hi, grid_n)?;
        let quad = CellQuadrature::new(&grid, QUAD_ORDER);
        let u_tau: Vec<f64> = grid.points().map(|x| kernel.phi_unchecked(x, lo)).collect();
        let u_zero: Vec<f64> = grid.points().map(|x| kernel.phi_unchecked(x, hi)).collect();
        let mut weights = Vec::with_capacity(grid.len() * quad.len());
        for x in grid.points() {
            for (&y, &w) in quad.points.iter().zip(&quad.weights) {
                weights.push(kernel.r(x, y) * w);
            }
        }
        Ok(Self {
            rate: *rate,
            h,
            grid,
            quad,
            u_tau,
            u_zero,
            weights,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `u_τ` restricted to the grid.
    pub fn lower_start(&self) -> SampledFunction {
        SampledFunction::new(self.grid, self.u_tau.clone()).expect("finite")
    }

    /// `u₀` restricted to the grid.
    pub fn upper_start(&self) -> SampledFunction {
        SampledFunction::new(self.grid, self.u_zero.clone()).expect("finite")
    }

    /// Same scheme with a different firing rate.
    pub fn with_rate(&self, rate: FiringRate) -> Self {
        Self {
            rate,
            ..self.clone()
        }
    }

    /// One application of `T_f`.
    pub fn apply(&self, u: &SampledFunction) -> Result<SampledFunction> {
        if u.grid() != &self.grid {
            return Err(Error::invalid("u", "iterate is not on the scheme grid"));
        }
        for ((x, v), (&lo, &hi)) in u.iter().zip(self.u_tau.iter().zip(&self.u_zero)) {
            let excess = (lo - v).max(v - hi);
            if excess > ORDER_SLACK {
                return Err(Error::OrderViolation { x, excess });
            }
        }
        let interp = MonotoneCubic::new(u);
        let fq: Vec<f64> = self
            .quad
            .cells
            .iter()
            .zip(&self.quad.local)
            .map(|(&c, &s)| self.rate.eval(interp.eval_cell(c, s) - self.h))
            .collect();
        let nq = fq.len();
        let out = self
            .u_tau
            .iter()
            .enumerate()
            .map(|(i, &base)| {
                let row = &self.weights[i * nq..(i + 1) * nq];
                base + row.iter().zip(&fq).map(|(w, f)| w * f).sum::<f64>()
            })
            .collect();
        SampledFunction::new(self.grid, out)
    }

    /// Iterates from `u_τ` (lower) and `u₀` (upper) until the node-wise gap
    /// drops below `tol`. `observe(n, w_n, v_n)` sees every iterate pair.
    pub fn iterate_with(
        &self,
        cfg: &DirectConfig,
        mut observe: impl FnMut(usize, &SampledFunction, &SampledFunction),
    ) -> Result<DirectOutcome> {
        cfg.validate()?;
        let mut lower = self.lower_start();
        let mut upper = self.upper_start();
        observe(0, &lower, &upper);
        let mut errors = Vec::new();
        let mut converged = false;
        for n in 1..=cfg.max_iter {
            lower = self.apply(&lower)?;
            upper = self.apply(&upper)?;
            observe(n, &lower, &upper);
            let eps = upper.max_abs_diff(&lower);
            errors.push(eps);
            if eps < cfg.tol {
                converged = true;
                break;
            }
        }
        let iterations = errors.len();
        Ok(DirectOutcome {
            lower,
            upper,
            trace: IterationTrace {
                errors,
                converged,
                iterations,
            },
        })
    }

    pub fn iterate(&self, cfg: &DirectConfig) -> Result<DirectOutcome> {
        self.iterate_with(cfg, |_, _, _| {})
    }
}

#[derive(Debug, Clone)]
pub struct DirectOutcome {
    /// Limit of the sequence started at `u_τ`.
    pub lower: SampledFunction,
    /// Limit of the sequence started at `u₀`.
    pub upper: SampledFunction,
    pub trace: IterationTrace,
}

/// One-shot `T_f u`.
pub fn apply_tf(
    kernel: &ConnectivityKernel,
    rate: &FiringRate,
    h: f64,
    pair: &WidthPair,
    u: &SampledFunction,
) -> Result<SampledFunction> {
    DirectScheme::new(kernel, rate, h, pair, u.grid().len())?.apply(u)
}

pub fn iterate_direct(
    kernel: &ConnectivityKernel,
    rate: &FiringRate,
    h: f64,
    pair: &WidthPair,
    cfg: &DirectConfig,
) -> Result<DirectOutcome> {
    cfg.validate()?;
    DirectScheme::new(kernel, rate, h, pair, cfg.grid_n)?.iterate(cfg)
}

/// Half-extent `Δ₀ + 5·(decay length of ω)` of the extension domain.
pub fn default_extent(kernel: &ConnectivityKernel, pair: &WidthPair) -> f64 {
    pair.hi() + 5.0 * kernel.decay_length()
}

/// Evaluates `u(x) = Φ(x, Δ_τ) + ∫_{Δ_τ}^{Δ₀} r(x, y) f(u*(y) − h) dy` on
/// `[−X, X]` and checks that the result is a bump.
pub fn extend_bump(
    kernel: &ConnectivityKernel,
    rate: &FiringRate,
    h: f64,
    pair: &WidthPair,
    u_star: &SampledFunction,
    extent: f64,
    out_n: usize,
) -> Result<BumpSolution> {
    let grid = u_star.grid();
    let quad = CellQuadrature::new(grid, QUAD_ORDER);
    let interp = MonotoneCubic::new(u_star);
    let fw: Vec<f64> = quad
        .cells
        .iter()
        .zip(&quad.local)
        .zip(&quad.weights)
        .map(|((&c, &s), &w)| rate.eval(interp.eval_cell(c, s) - h) * w)
        .collect();
    let lo = pair.lo();
    let u = |x: f64| {
        kernel.phi_unchecked(x, lo)
            + quad
                .points
                .iter()
                .zip(&fw)
                .map(|(&y, &f)| kernel.r(x, y) * f)
                .sum::<f64>()
    };
    BumpSolution::build(u, h, rate.tau(), extent, out_n)
}

/// A sampled even bump on `[−X, X]` with its two crossing points on `x ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpSolution {
    pub profile: SampledFunction,
    /// Where `u = h + τ`.
    pub delta_tau: f64,
    /// Where `u = h`.
    pub delta_zero: f64,
    pub h: f64,
    pub tau: f64,
}

impl BumpSolution {
    /// Samples `u` on a symmetric grid with `out_n` (odd) points, locates the
    /// crossings by bisection on `u` itself and validates the bump shape:
    /// `u > h + τ` on `[0, δ_τ)`, `h ≤ u ≤ h + τ` on `[δ_τ, δ₀]` and
    /// `u < h` on `(δ₀, X]`.
    pub fn build(u: impl Fn(f64) -> f64, h: f64, tau: f64, extent: f64, out_n: usize) -> Result<Self> {
        if out_n < 3 || out_n % 2 == 0 {
            return Err(Error::invalid("out_n", format!("must be odd and at least 3, got {out_n}")));
        }
        if !(extent > 0.0 && extent.is_finite()) {
            return Err(Error::invalid("extent", format!("must be positive, got {extent}")));
        }
        let grid = Grid::new(-extent, extent, out_n)?;
        let profile = SampledFunction::from_fn(grid, &u)?;
        let mid = out_n / 2;
        let half: Vec<(f64, f64)> = profile.iter().skip(mid).collect();
        let upper = h + tau;
        if half[0].1 <= upper {
            return Err(Error::NotABump {
                x: 0.0,
                reason: format!("u(0) = {} does not exceed h + tau = {upper}", half[0].1),
            });
        }
        let crossing = |level: f64| -> Result<f64> {
            let j = half.iter().position(|&(_, v)| v <= level).ok_or(Error::NotABump {
                x: extent,
                reason: format!("u never drops to {level} on [0, X]"),
            })?;
            let (a, b) = (half[j - 1].0, half[j].0);
            Ok(bisect(|x| u(x) - level, a, b, CROSSING_TOL))
        };
        let delta_tau = crossing(upper)?;
        let delta_zero = crossing(h)?;
        for &(x, v) in &half {
            let bad = if x < delta_tau {
                (v <= upper).then(|| format!("u = {v} <= h + tau inside the plateau"))
            } else if x > delta_zero {
                (v >= h).then(|| format!("u = {v} >= h beyond the excited region"))
            } else {
                (v < h - 1e-12 || v > upper + 1e-12)
                    .then(|| format!("u = {v} outside [h, h + tau] in the transition region"))
            };
            if let Some(reason) = bad {
                return Err(Error::NotABump { x, reason });
            }
        }
        Ok(Self {
            profile,
            delta_tau,
            delta_zero,
            h,
            tau,
        })
    }

    /// Heaviside-field bump `Φ(x, Δ)` at level `h`, used as a probe.
    pub fn heaviside(
        kernel: &ConnectivityKernel,
        h: f64,
        half_width: f64,
        extent: f64,
        out_n: usize,
    ) -> Result<Self> {
        Self::build(|x| kernel.phi_unchecked(x, half_width), h, 0.0, extent, out_n)
    }

    pub fn extent(&self) -> f64 {
        self.profile.grid().upper()
    }

    /// `max |u(x) − u(−x)|` over the grid.
    pub fn asymmetry(&self) -> f64 {
        let v = self.profile.values();
        let n = v.len();
        (0..n / 2).map(|i| (v[i] - v[n - 1 - i]).abs()).fold(0.0, f64::max)
    }

    /// The `x ≥ 0` half of the profile.
    pub fn right_half(&self) -> SampledFunction {
        let v = self.profile.values();
        let mid = v.len() / 2;
        let grid = Grid::new(0.0, self.extent(), v.len() - mid).expect("odd grid");
        SampledFunction::new(grid, v[mid..].to_vec()).expect("finite")
    }
}

/// Points `x ≥ 0` on the decreasing branch where the interpolated bump
/// takes each of `levels`.
///
/// The branch runs from `x = 0` to the first minimum of the sampled
/// profile. A level outside the open range of the branch is an error.
pub fn level_crossings(bump: &BumpSolution, levels: &[f64]) -> Result<Vec<f64>> {
    let half = bump.right_half();
    let v = half.values();
    let end = v.windows(2).position(|w| w[1] >= w[0]).unwrap_or(v.len() - 1);
    let (max, min) = (v[0], v[end]);
    let x_end = half.grid().point(end);
    let interp = MonotoneCubic::new(&half);
    levels
        .iter()
        .map(|&level| {
            if !(level > min && level < max) {
                return Err(Error::LevelOutOfRange { level, min, max });
            }
            Ok(bisect(
                |x| interp.eval(x).expect("inside grid") - level,
                0.0,
                x_end,
                CROSSING_TOL,
            ))
        })
        .collect()
}
