//! Heaviside-field bump widths.
//!
//! A step-rate field with threshold `level` has a symmetric bump of
//! half-width `Δ` exactly when `W(2Δ) = level` and the slice `Φ(·, Δ)`
//! stays above `level` inside and below it outside. The bump is linearly
//! stable when `ω(2Δ) < 0` and unstable when `ω(2Δ) > 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::ConnectivityKernel;
use crate::numerics::find_roots;

/// `|ω(2Δ)|` below this is labelled marginal.
pub const STABILITY_MARGIN: f64 = 1e-9;
/// Bracket width for the width equation.
pub const WIDTH_ROOT_TOL: f64 = 1e-13;
/// Slack granted to non-strict inequalities that hold with equality on the
/// boundary of the checked set.
pub const NONSTRICT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl Stability {
    pub fn classify(omega_at_width: f64) -> Self {
        if omega_at_width < -STABILITY_MARGIN {
            Stability::Stable
        } else if omega_at_width > STABILITY_MARGIN {
            Stability::Unstable
        } else {
            Stability::Marginal
        }
    }
}

/// Result of checking the profile conditions `Φ(x, Δ) ≥ level` on `[0, Δ)`
/// and `Φ(x, Δ) ≤ level` for `x > Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExistenceCheck {
    pub holds: bool,
    /// Smallest slack over both conditions (positive when they hold).
    pub worst_margin: f64,
    pub witness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WidthSolution {
    pub half_width: f64,
    pub level: f64,
    pub stability: Stability,
    pub omega_at_width: f64,
    pub existence: ExistenceCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WidthPair {
    /// Solution at level `h + τ`.
    pub delta_tau: WidthSolution,
    /// Solution at level `h`.
    pub delta_zero: WidthSolution,
}

impl WidthPair {
    pub fn lo(&self) -> f64 {
        self.delta_tau.half_width
    }

    pub fn hi(&self) -> f64 {
        self.delta_zero.half_width
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WidthPolicy {
    /// Smallest unstable `Δ_τ` below the chosen `Δ₀`.
    SmallestUnstable,
    /// Largest stable `Δ_τ` below the chosen `Δ₀`.
    LargestStable,
    /// Indices into the `h + τ` and `h` solution lists.
    Explicit { tau_index: usize, zero_index: usize },
}

/// Builds a [`WidthSolution`] for an already known half-width.
pub fn width_solution(kernel: &ConnectivityKernel, level: f64, half_width: f64) -> WidthSolution {
    let omega_at_width = kernel.omega(2.0 * half_width);
    WidthSolution {
        half_width,
        level,
        stability: Stability::classify(omega_at_width),
        omega_at_width,
        existence: existence_check(kernel, level, half_width),
    }
}

const EXISTENCE_SCAN: usize = 2001;

fn existence_check(kernel: &ConnectivityKernel, level: f64, delta: f64) -> ExistenceCheck {
    let mut worst = f64::INFINITY;
    let mut witness = delta;
    let mut track = |m: f64, x: f64| {
        if m < worst {
            worst = m;
            witness = x;
        }
    };
    // inside: [0, Δ); equality at x = Δ is the width equation itself
    for i in 0..EXISTENCE_SCAN {
        let x = delta * i as f64 / EXISTENCE_SCAN as f64;
        track(kernel.phi_unchecked(x, delta) - level + NONSTRICT_SLACK, x);
    }
    // outside: (Δ, X], then the tail certificate |Φ(x, Δ)| ≤ tail(x − Δ)
    let far = delta + kernel.tail_cutoff(level.abs() / 10.0);
    for i in 1..=EXISTENCE_SCAN {
        let x = delta + (far - delta) * i as f64 / EXISTENCE_SCAN as f64;
        track(level - kernel.phi_unchecked(x, delta) + NONSTRICT_SLACK, x);
    }
    track(level - kernel.tail_bound(far - delta), far);
    ExistenceCheck {
        holds: worst > 0.0,
        worst_margin: worst,
        witness,
    }
}

/// All half-widths `Δ = a/2` with `W(a) = level`, `a ∈ (0, scan_upper)`.
///
/// Fails when `scan_upper` is too short for the kernel tail to guarantee
/// that no crossing lies beyond it.
pub fn solve_half_widths(
    kernel: &ConnectivityKernel,
    level: f64,
    scan_upper: f64,
) -> Result<Vec<WidthSolution>> {
    if !(level > 0.0 && level.is_finite()) {
        return Err(Error::invalid("level", format!("must be positive, got {level}")));
    }
    if !(scan_upper > 0.0 && scan_upper.is_finite()) {
        return Err(Error::invalid("scan_upper", "must be positive and finite"));
    }
    // beyond scan_upper, W stays within tail_bound of its limit
    let tail = kernel.tail_bound(scan_upper);
    let limit = kernel.total_mass();
    if tail >= (limit - level).abs() {
        return Err(Error::Precondition(format!(
            "scan window [0, {scan_upper}] leaves a kernel tail of {tail:e}, \
             not enough to separate W(∞) = {limit} from level {level}"
        )));
    }
    let scan_n = ((scan_upper / 2e-3).ceil() as usize).clamp(1000, 200_000);
    let roots = find_roots(
        |a| kernel.antiderivative(a) - level,
        0.0,
        scan_upper,
        scan_n,
        WIDTH_ROOT_TOL,
    );
    Ok(roots
        .into_iter()
        .filter(|&a| a > 0.0)
        .map(|a| width_solution(kernel, level, 0.5 * a))
        .collect())
}

/// Chooses `(Δ_τ, Δ₀)` with `Δ_τ < Δ₀`.
///
/// For the two named policies `Δ₀` is the largest stable solution at level
/// `h` (the largest solution if none is stable).
pub fn select_width_pair(
    sols_h: &[WidthSolution],
    sols_htau: &[WidthSolution],
    policy: WidthPolicy,
) -> Result<WidthPair> {
    if sols_h.is_empty() || sols_htau.is_empty() {
        return Err(Error::Assumption1Violated(format!(
            "no bump widths found ({} at level h, {} at level h + tau)",
            sols_h.len(),
            sols_htau.len()
        )));
    }
    let pair = match policy {
        WidthPolicy::Explicit {
            tau_index,
            zero_index,
        } => {
            let t = sols_htau.get(tau_index).ok_or_else(|| {
                Error::invalid("tau_index", format!("{tau_index} out of {} solutions", sols_htau.len()))
            })?;
            let z = sols_h.get(zero_index).ok_or_else(|| {
                Error::invalid("zero_index", format!("{zero_index} out of {} solutions", sols_h.len()))
            })?;
            WidthPair {
                delta_tau: *t,
                delta_zero: *z,
            }
        }
        WidthPolicy::SmallestUnstable | WidthPolicy::LargestStable => {
            let zero = sols_h
                .iter()
                .rev()
                .find(|s| s.stability == Stability::Stable)
                .or_else(|| sols_h.last())
                .copied()
                .expect("non-empty");
            let below = sols_htau.iter().filter(|s| s.half_width < zero.half_width);
            let tau = match policy {
                WidthPolicy::SmallestUnstable => below
                    .filter(|s| s.stability == Stability::Unstable)
                    .min_by(|a, b| a.half_width.total_cmp(&b.half_width)),
                _ => below
                    .filter(|s| s.stability == Stability::Stable)
                    .max_by(|a, b| a.half_width.total_cmp(&b.half_width)),
            };
            let tau = tau.copied().ok_or_else(|| {
                Error::Assumption1Violated(format!(
                    "no {policy:?} width at level h + tau below delta_0 = {}",
                    zero.half_width
                ))
            })?;
            WidthPair {
                delta_tau: tau,
                delta_zero: zero,
            }
        }
    };
    if !(pair.lo() < pair.hi()) {
        return Err(Error::Assumption1Violated(format!(
            "delta_tau = {} is not below delta_0 = {}",
            pair.lo(),
            pair.hi()
        )));
    }
    Ok(pair)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kernel() -> ConnectivityKernel {
        ConnectivityKernel::gaussian_difference(1.5, 2.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn level_h_has_one_stable_width() {
        // the rising branch of W also crosses h, giving a narrow unstable bump
        let k = kernel();
        let sols = solve_half_widths(&k, 0.1, k.default_scan_upper()).unwrap();
        assert_eq!(sols.len(), 2);
        assert_eq!(sols[0].stability, Stability::Unstable);
        assert!((sols[1].half_width - 0.6633).abs() < 1e-3);
        assert_eq!(sols[1].stability, Stability::Stable);
        assert!((sols[1].omega_at_width + 0.128).abs() < 1e-3);
        assert!(sols[1].existence.holds);
    }

    #[test]
    fn level_h_tau_has_two_widths() {
        let k = kernel();
        let sols = solve_half_widths(&k, 0.15, k.default_scan_upper()).unwrap();
        assert_eq!(sols.len(), 2);
        assert!((sols[0].half_width - 0.1769).abs() < 1e-3);
        assert!((sols[1].half_width - 0.5012).abs() < 1e-3);
        assert_eq!(sols[0].stability, Stability::Unstable);
        assert!((sols[0].omega_at_width - 0.285).abs() < 1e-3);
        assert_eq!(sols[1].stability, Stability::Stable);
        for s in &sols {
            assert!((k.antiderivative(2.0 * s.half_width) - 0.15).abs() <= 1e-9);
            assert_eq!(s.stability == Stability::Stable, k.omega(2.0 * s.half_width) < 0.0);
        }
        assert!(sols[1].half_width - sols[0].half_width > 1e-10);
    }

    #[test]
    fn level_above_range_gives_nothing() {
        let k = kernel();
        assert!(solve_half_widths(&k, 0.5, k.default_scan_upper()).unwrap().is_empty());
    }

    #[test]
    fn short_scan_window_rejected() {
        let k = kernel();
        assert!(matches!(
            solve_half_widths(&k, 0.06, 1.0),
            Err(Error::Precondition(_))
        ));
    }

    fn reference_sequences() -> (Vec<WidthSolution>, Vec<WidthSolution>) {
        let k = kernel();
        let up = k.default_scan_upper();
        (
            solve_half_widths(&k, 0.1, up).unwrap(),
            solve_half_widths(&k, 0.15, up).unwrap(),
        )
    }

    #[test]
    fn policies_reproduce_reported_pairs() {
        let (h, ht) = reference_sequences();
        let p = select_width_pair(&h, &ht, WidthPolicy::SmallestUnstable).unwrap();
        assert!((p.lo() - 0.1769).abs() < 1e-3 && (p.hi() - 0.6633).abs() < 1e-3);
        let p = select_width_pair(&h, &ht, WidthPolicy::LargestStable).unwrap();
        assert!((p.lo() - 0.5012).abs() < 1e-3 && (p.hi() - 0.6633).abs() < 1e-3);
        let p = select_width_pair(
            &h,
            &ht,
            WidthPolicy::Explicit {
                tau_index: 1,
                zero_index: 1,
            },
        )
        .unwrap();
        assert!((p.lo() - 0.5012).abs() < 1e-3);
    }

    #[test]
    fn unsatisfiable_ordering_is_an_error() {
        let (h, _) = reference_sequences();
        let k = kernel();
        let big = vec![width_solution(&k, 0.15, 0.9)];
        for policy in [
            WidthPolicy::SmallestUnstable,
            WidthPolicy::LargestStable,
            WidthPolicy::Explicit {
                tau_index: 0,
                zero_index: 0,
            },
        ] {
            assert!(matches!(
                select_width_pair(&h, &big, policy),
                Err(Error::Assumption1Violated(_))
            ));
        }
        assert!(select_width_pair(&[], &big, WidthPolicy::LargestStable).is_err());
    }
}
