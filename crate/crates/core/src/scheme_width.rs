//! Iteration scheme II: fixed-point iteration on the excitation-width
//! profile `Δ(t)`, `t ∈ [0, τ]`, through
//! `(AΔ)(t) = Δ(t) + k (u_Δ(Δ(t)) − t − h)` with
//! `u_Δ(x) = ∫₀^τ ρ(ξ) Φ(x, Δ(ξ)) dξ`.

use serde::{Deserialize, Serialize};

use crate::assumptions::{check_posterior, compute_m, AssumptionReport, ScanConfig};
use crate::error::{Error, Result};
use crate::kernels::{ConnectivityKernel, FiringRate};
use crate::numerics::{CellQuadrature, Grid, MonotoneCubic, SampledFunction};
use crate::scheme_direct::{level_crossings, BumpSolution};
use crate::widths::WidthPair;
use crate::IterationTrace;

/// Gauss points per cell of the `[0, τ]` grid for the density integral.
pub const DENSITY_ORDER: usize = 6;
/// Points per axis when scanning for `m`.
pub const M_SCAN_N: usize = 401;

/// `ρ`-weighted Gauss rule over a grid on `[0, τ]`.
///
/// The weights are rescaled to sum to one, so the discrete density keeps
/// unit mass exactly.
#[derive(Debug, Clone)]
pub struct DensityQuadrature {
    grid: Grid,
    quad: CellQuadrature,
    rho_w: Vec<f64>,
}

impl DensityQuadrature {
    pub fn new(rate: &FiringRate, grid: Grid) -> Result<Self> {
        let quad = CellQuadrature::new(&grid, DENSITY_ORDER);
        let rho_w = quad
            .points
            .iter()
            .zip(&quad.weights)
            .map(|(&xi, &w)| Ok(rate.density(xi)? * w))
            .collect::<Result<Vec<f64>>>()?;
        let mass: f64 = rho_w.iter().sum();
        if !(mass > 0.0) {
            return Err(Error::Precondition(format!(
                "density has no mass on [{}, {}]",
                grid.lower(),
                grid.upper()
            )));
        }
        Ok(Self {
            grid,
            quad,
            rho_w: rho_w.into_iter().map(|w| w / mass).collect(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `u_Δ(x)` for the profile behind `interp` (which must live on this grid).
    pub fn u_delta(&self, kernel: &ConnectivityKernel, interp: &MonotoneCubic, x: f64) -> f64 {
        debug_assert_eq!(interp.grid(), &self.grid);
        self.quad
            .cells
            .iter()
            .zip(&self.quad.local)
            .zip(&self.rho_w)
            .map(|((&c, &s), &w)| w * kernel.phi_unchecked(x, interp.eval_cell(c, s)))
            .sum()
    }
}

/// `u_Δ(x) = ∫ρ(ξ) Φ(x, Δ(ξ)) dξ`.
pub fn reconstruct_u_delta(
    kernel: &ConnectivityKernel,
    rate: &FiringRate,
    profile: &SampledFunction,
    x: f64,
) -> Result<f64> {
    let dq = DensityQuadrature::new(rate, *profile.grid())?;
    Ok(dq.u_delta(kernel, &MonotoneCubic::new(profile), x))
}

/// `k = σ / m`.
pub fn choose_k(m: f64, sigma: f64) -> Result<f64> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Precondition(format!("m must be positive, got {m}")));
    }
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::invalid("sigma", format!("must lie in (0, 1), got {sigma}")));
    }
    Ok(sigma / m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", deny_unknown_fields)]
pub enum KPolicy {
    Auto { sigma: f64 },
    Explicit { k: f64 },
}

impl Default for KPolicy {
    fn default() -> Self {
        KPolicy::Auto { sigma: 0.9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WidthConfig {
    pub grid_m: usize,
    pub k: KPolicy,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for WidthConfig {
    fn default() -> Self {
        Self {
            grid_m: 201,
            k: KPolicy::default(),
            tol: 1e-8,
            max_iter: 500,
        }
    }
}

impl WidthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_m < 3 {
            return Err(Error::invalid("grid_m", format!("need at least 3, got {}", self.grid_m)));
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

/// The discretized operator `A` on a grid over `[0, τ]`.
#[derive(Debug, Clone)]
pub struct WidthScheme {
    kernel: ConnectivityKernel,
    rate: FiringRate,
    h: f64,
    lo: f64,
    hi: f64,
    density: DensityQuadrature,
    m: f64,
    k: f64,
}

impl WidthScheme {
    pub fn new(
        kernel: &ConnectivityKernel,
        rate: &FiringRate,
        h: f64,
        pair: &WidthPair,
        cfg: &WidthConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if !rate.has_density() {
            return Err(Error::UnsupportedVariant("heaviside"));
        }
        let (lo, hi) = (pair.lo(), pair.hi());
        let grid = Grid::new(0.0, rate.tau(), cfg.grid_m)?;
        let density = DensityQuadrature::new(rate, grid)?;
        let m = compute_m(kernel, lo, hi, M_SCAN_N)?;
        let k = match cfg.k {
            KPolicy::Auto { sigma } => choose_k(m, sigma)?,
            KPolicy::Explicit { k } => {
                if !(k > 0.0 && k < 1.0 / m) {
                    return Err(Error::invalid(
                        "k",
                        format!("must lie in (0, 1/m) = (0, {}), got {k}", 1.0 / m),
                    ));
                }
                k
            }
        };
        Ok(Self {
            kernel: *kernel,
            rate: *rate,
            h,
            lo,
            hi,
            density,
            m,
            k,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.density.grid()
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn constant(&self, value: f64) -> SampledFunction {
        SampledFunction::constant(*self.grid(), value).expect("finite")
    }

    fn slack(&self) -> f64 {
        1e-6 * self.hi.abs().max(1.0)
    }

    /// One application of `A`. `iteration` only labels a divergence error.
    pub fn apply(&self, profile: &SampledFunction, iteration: usize) -> Result<SampledFunction> {
        if profile.grid() != self.grid() {
            return Err(Error::invalid("profile", "not on the scheme grid"));
        }
        let interp = MonotoneCubic::new(profile);
        let slack = self.slack();
        let mut out = Vec::with_capacity(profile.values().len());
        for (t, d) in profile.iter() {
            let u = self.density.u_delta(&self.kernel, &interp, d);
            let value = d + self.k * (u - t - self.h);
            if !(value >= self.lo - slack && value <= self.hi + slack) {
                return Err(Error::Divergence { iteration, t, value });
            }
            out.push(value);
        }
        SampledFunction::new(*self.grid(), out)
    }

    pub fn u_delta(&self, profile: &SampledFunction, x: f64) -> f64 {
        self.density.u_delta(&self.kernel, &MonotoneCubic::new(profile), x)
    }

    /// Iterates from the constant profiles `Δ_τ` and `Δ₀` and runs the
    /// posterior checks on the upper limit.
    pub fn iterate_with(
        &self,
        cfg: &WidthConfig,
        mut observe: impl FnMut(usize, &SampledFunction, &SampledFunction),
    ) -> Result<WidthOutcome> {
        cfg.validate()?;
        let mut lower = self.constant(self.lo);
        let mut upper = self.constant(self.hi);
        observe(0, &lower, &upper);
        let mut errors = Vec::new();
        let mut converged = false;
        for n in 1..=cfg.max_iter {
            lower = self.apply(&lower, n)?;
            upper = self.apply(&upper, n)?;
            observe(n, &lower, &upper);
            let eps = upper.max_abs_diff(&lower);
            errors.push(eps);
            if eps < cfg.tol {
                converged = true;
                break;
            }
        }
        let posterior = check_posterior(
            &self.kernel,
            &self.rate,
            self.h,
            self.rate.tau(),
            &upper,
            &ScanConfig::default(),
        )?;
        let decreasing = upper.values().windows(2).all(|w| w[1] < w[0]);
        let iterations = errors.len();
        Ok(WidthOutcome {
            lower,
            upper,
            trace: IterationTrace {
                errors,
                converged,
                iterations,
            },
            k: self.k,
            m: self.m,
            posterior,
            decreasing,
        })
    }

    pub fn iterate(&self, cfg: &WidthConfig) -> Result<WidthOutcome> {
        self.iterate_with(cfg, |_, _, _| {})
    }
}

#[derive(Debug, Clone)]
pub struct WidthOutcome {
    /// Limit of the sequence started at `Δ_τ`.
    pub lower: SampledFunction,
    /// Limit of the sequence started at `Δ₀`.
    pub upper: SampledFunction,
    pub trace: IterationTrace,
    /// Realized step size.
    pub k: f64,
    pub m: f64,
    /// A3′ and A5′ on the upper limit.
    pub posterior: AssumptionReport,
    /// Whether the upper limit is strictly decreasing at the nodes.
    pub decreasing: bool,
}

/// One-shot `AΔ` with step `k`, bypassing the `k < 1/m` check.
pub fn apply_a(
    kernel: &ConnectivityKernel,
    rate: &FiringRate,
    h: f64,
    k: f64,
    pair: &WidthPair,
    profile: &SampledFunction,
) -> Result<SampledFunction> {
    let density = DensityQuadrature::new(rate, *profile.grid())?;
    let scheme = WidthScheme {
        kernel: *kernel,
        rate: *rate,
        h,
        lo: pair.lo(),
        hi: pair.hi(),
        density,
        m: f64::NAN,
        k,
    };
    scheme.apply(profile, 1)
}

pub fn iterate_width(
    kernel: &ConnectivityKernel,
    rate: &FiringRate,
    h: f64,
    pair: &WidthPair,
    cfg: &WidthConfig,
) -> Result<WidthOutcome> {
    WidthScheme::new(kernel, rate, h, pair, cfg)?.iterate(cfg)
}

/// Bump `u_Δ` on `[−X, X]`, validated like the scheme I extension.
pub fn reconstruct_bump(
    kernel: &ConnectivityKernel,
    rate: &FiringRate,
    h: f64,
    profile: &SampledFunction,
    extent: f64,
    out_n: usize,
) -> Result<BumpSolution> {
    let dq = DensityQuadrature::new(rate, *profile.grid())?;
    let interp = MonotoneCubic::new(profile);
    BumpSolution::build(|x| dq.u_delta(kernel, &interp, x), h, rate.tau(), extent, out_n)
}

/// `max_i |a_i − b_i| / |b_i|`.
pub fn max_relative_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / y.abs())
        .fold(0.0, f64::max)
}

/// Relative gap between `Δ(t)` and the crossings `δ(t)` of a scheme I bump
/// at levels `t + h`.
pub fn cross_validate(bump: &BumpSolution, profile: &SampledFunction) -> Result<f64> {
    let levels: Vec<f64> = profile.grid().points().map(|t| t + bump.h).collect();
    let delta = level_crossings(bump, &levels)?;
    Ok(max_relative_error(profile.values(), &delta))
}
