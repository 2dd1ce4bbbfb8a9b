//! Numerical verification of the hypotheses behind both iteration schemes.
//!
//! Every check is a sup/inf over a scan grid and reports a signed margin:
//! positive means the inequality holds, and the witness is where the
//! smallest margin was attained. Inequalities that are non-strict and hold
//! with equality on the boundary of the checked set (A2, A5 (ii)) are given
//! [`NONSTRICT_SLACK`] so that exact boundary equality counts as holding.
//!
//! Conditions quantified over unbounded `x` are split into a scan on
//! `(Δ, X]` and a certificate for `x > X` from the kernel tail bound
//! `|Φ(x, y)| ≤ ∫_{x−y}^∞ |ω|`.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{ConnectivityKernel, FiringRate};
use crate::numerics::{CellQuadrature, Grid, MonotoneCubic, SampledFunction};
use crate::scheme_width::DensityQuadrature;
use crate::widths::{WidthPair, NONSTRICT_SLACK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum AssumptionId {
    /// `r(x, y) ≥ 0` on `[Δ_τ, Δ₀]²`.
    A2,
    /// `∂Φ/∂x(x, Δ₀) < 0` and `∂Φ/∂x(x, Δ_τ) < 0` on `[Δ_τ, Δ₀]`.
    A3,
    /// `∫|∂r/∂x(x, y)| f(u₀(y) − h) dy + ∂Φ/∂x(x, Δ_τ) < 0` on `[Δ_τ, Δ₀]`.
    A4,
    /// `Φ ≤ h` for `x > Δ₀` and `Φ ≥ h + τ` for `x ∈ [0, Δ_τ]`, `y ∈ [Δ_τ, Δ₀]`.
    A5,
    /// `∂Φ/∂x(x, y) < 0` on `[Δ_τ, Δ₀]²`.
    A3pp,
    /// `∂Φ/∂x(Δ(t), Δ(s)) < 0` on the computed profile.
    #[serde(rename = "A3p-posterior")]
    A3pPosterior,
    /// `u_Δ ≤ h` beyond `Δ(0)` and `u_Δ ≥ h + τ` inside `Δ(τ)`.
    #[serde(rename = "A5p-posterior")]
    A5pPosterior,
}

impl fmt::Display for AssumptionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AssumptionId::A2 => "A2",
            AssumptionId::A3 => "A3",
            AssumptionId::A4 => "A4",
            AssumptionId::A5 => "A5",
            AssumptionId::A3pp => "A3pp",
            AssumptionId::A3pPosterior => "A3p-posterior",
            AssumptionId::A5pPosterior => "A5p-posterior",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionRecord {
    pub holds: bool,
    pub worst_margin: f64,
    pub witness: [f64; 2],
    /// Which part of the condition attains the worst margin.
    pub part: String,
    /// Worst margin of each part separately.
    pub part_margins: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub records: BTreeMap<AssumptionId, AssumptionRecord>,
    /// Set when the checked square collapses to a point.
    pub zero_measure: bool,
}

impl AssumptionReport {
    pub fn get(&self, id: AssumptionId) -> Option<&AssumptionRecord> {
        self.records.get(&id)
    }

    pub fn holds(&self, id: AssumptionId) -> bool {
        self.get(id).is_some_and(|r| r.holds)
    }

    pub fn all_hold(&self) -> bool {
        self.records.values().all(|r| r.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = AssumptionId> + '_ {
        self.records.iter().filter(|(_, r)| !r.holds).map(|(id, _)| *id)
    }

    pub fn merge(&mut self, other: AssumptionReport) {
        self.records.extend(other.records);
        self.zero_measure |= other.zero_measure;
    }

    /// Fixed-width text table, one row per assumption.
    pub fn to_table(&self) -> String {
        let mut out = String::from("assumption      holds  worst_margin            witness                                      part\n");
        for (id, r) in &self.records {
            out.push_str(&format!(
                "{:<15} {:<6} {:<23e} ({:e}, {:e})  {}\n",
                id.to_string(),
                r.holds,
                r.worst_margin,
                r.witness[0],
                r.witness[1],
                r.part
            ));
        }
        out
    }
}

/// Tracks the smallest margin seen.
struct Worst {
    margin: f64,
    witness: [f64; 2],
    part: &'static str,
    parts: BTreeMap<String, f64>,
}

impl Worst {
    fn new() -> Self {
        Self {
            margin: f64::INFINITY,
            witness: [f64::NAN, f64::NAN],
            part: "",
            parts: BTreeMap::new(),
        }
    }

    #[inline]
    fn see(&mut self, margin: f64, x: f64, y: f64, part: &'static str) {
        match self.parts.get_mut(part) {
            Some(m) => *m = m.min(margin),
            None => {
                self.parts.insert(part.to_string(), margin);
            }
        }
        if margin < self.margin {
            self.margin = margin;
            self.witness = [x, y];
            self.part = part;
        }
    }

    fn finish(self) -> AssumptionRecord {
        AssumptionRecord {
            holds: self.margin > 0.0,
            worst_margin: self.margin,
            witness: self.witness,
            part: self.part.to_string(),
            part_margins: self.parts,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    /// Points per axis.
    pub n: usize,
    /// Far end `X` of the scan for conditions on `x > Δ₀`; chosen from the
    /// kernel tail when `None`.
    pub far_cutoff: Option<f64>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            n: 401,
            far_cutoff: None,
        }
    }
}

/// `n` uniform points on `[lo, hi]`, or the single point when `lo == hi`.
fn scan_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if lo == hi || n < 2 {
        return vec![lo];
    }
    let g = Grid::new(lo, hi, n).expect("lo < hi");
    g.points().collect()
}

/// `n` uniform points on `(lo, hi]`.
fn scan_open_left(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

/// `n` uniform points on `[lo, hi)`.
fn scan_open_right(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

fn far_cutoff(kernel: &ConnectivityKernel, inner: f64, h: f64, tau: f64, scan: &ScanConfig) -> f64 {
    let eps = h.min(if tau > 0.0 { tau } else { h }) / 10.0;
    scan.far_cutoff
        .unwrap_or_else(|| inner + kernel.tail_cutoff(eps))
        .max(inner)
}

const A4_FINE_N: usize = 2001;
const A4_ORDER: usize = 4;

/// Checks A2, A3, A3″, A4 and A5 on `[Δ_τ, Δ₀]`.
pub fn check_static(
    kernel: &ConnectivityKernel,
    rate: &FiringRate,
    h: f64,
    tau: f64,
    pair: &WidthPair,
    scan: &ScanConfig,
) -> Result<AssumptionReport> {
    let (lo, hi) = (pair.lo(), pair.hi());
    if !(lo <= hi) {
        return Err(Error::Assumption1Violated(format!(
            "delta_tau = {lo} exceeds delta_0 = {hi}"
        )));
    }
    let xs = scan_points(lo, hi, scan.n);
    let mut report = AssumptionReport {
        zero_measure: lo == hi,
        ..Default::default()
    };

    let mut a2 = Worst::new();
    let mut a3pp = Worst::new();
    for &x in &xs {
        for &y in &xs {
            a2.see(kernel.r(x, y) + NONSTRICT_SLACK, x, y, "r >= 0");
            a3pp.see(-kernel.dphi_dx(x, y), x, y, "dPhi/dx < 0");
        }
    }
    report.records.insert(AssumptionId::A2, a2.finish());
    report.records.insert(AssumptionId::A3pp, a3pp.finish());

    let mut a3 = Worst::new();
    for &x in &xs {
        a3.see(-kernel.dphi_dx(x, hi), x, hi, "u_0 decreasing");
        a3.see(-kernel.dphi_dx(x, lo), x, lo, "u_tau decreasing");
    }
    report.records.insert(AssumptionId::A3, a3.finish());

    let mut a4 = Worst::new();
    if lo < hi {
        let fine = Grid::new(lo, hi, A4_FINE_N)?;
        let q = CellQuadrature::new(&fine, A4_ORDER);
        let weighted: Vec<f64> = q
            .points
            .iter()
            .zip(&q.weights)
            .map(|(&y, &w)| w * rate.eval(kernel.phi_unchecked(y, hi) - h))
            .collect();
        for &x in &xs {
            let integral: f64 = q
                .points
                .iter()
                .zip(&weighted)
                .map(|(&y, &fw)| kernel.dr_dx(x, y).abs() * fw)
                .sum();
            a4.see(-(integral + kernel.dphi_dx(x, lo)), x, lo, "u* decreasing bound");
        }
    } else {
        a4.see(-kernel.dphi_dx(lo, lo), lo, lo, "u* decreasing bound");
    }
    report.records.insert(AssumptionId::A4, a4.finish());

    let mut a5 = Worst::new();
    let far = far_cutoff(kernel, hi, h, tau, scan);
    for &x in &scan_open_left(hi, far, scan.n) {
        for &y in &xs {
            a5.see(h - kernel.phi_unchecked(x, y), x, y, "(i) Phi <= h for x > delta_0");
        }
    }
    a5.see(h - kernel.tail_bound(far - hi), far, hi, "(i) tail beyond X");
    for &x in &scan_points(0.0, lo, scan.n) {
        for &y in &xs {
            a5.see(
                kernel.phi_unchecked(x, y) - (h + tau) + NONSTRICT_SLACK,
                x,
                y,
                "(ii) Phi >= h + tau on [0, delta_tau]",
            );
        }
    }
    report.records.insert(AssumptionId::A5, a5.finish());
    Ok(report)
}

/// `m = −min ∂Φ/∂x` over `[lo, hi]²`, the constant bounding the step of
/// the width iteration (`0 < k < 1/m`).
pub fn compute_m(kernel: &ConnectivityKernel, lo: f64, hi: f64, grid_n: usize) -> Result<f64> {
    if !(lo <= hi) {
        return Err(Error::Precondition(format!("empty square [{lo}, {hi}]")));
    }
    let xs = scan_points(lo, hi, grid_n);
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &x in &xs {
        for &y in &xs {
            let d = kernel.dphi_dx(x, y);
            min = min.min(d);
            max = max.max(d);
        }
    }
    if max >= 0.0 {
        return Err(Error::Precondition(format!(
            "dPhi/dx reaches {max:e} >= 0 on [{lo}, {hi}]^2 (A3pp violated)"
        )));
    }
    Ok(-min)
}

/// Checks A3′ and A5′ once a width profile `Δ(t)` on `[0, τ]` is known.
///
/// A5′ is checked in the form the bump extension uses: the reconstructed
/// `u_Δ(x) = ∫ρ(ξ) Φ(x, Δ(ξ)) dξ` must satisfy `u_Δ ≤ h` for
/// `x > Δ(0)` and `u_Δ ≥ h + τ` for `x ∈ [0, Δ(τ))`. The pointwise
/// statement over all `y ∈ [Δ(τ), Δ(0)]` fails at the corners for every
/// non-constant decreasing profile, since `Φ(Δ(0), Δ(0)) > u_Δ(Δ(0)) = h`.
pub fn check_posterior(
    kernel: &ConnectivityKernel,
    rate: &FiringRate,
    h: f64,
    tau: f64,
    profile: &SampledFunction,
    scan: &ScanConfig,
) -> Result<AssumptionReport> {
    let values = profile.values();
    let mut report = AssumptionReport::default();

    let mut a3p = Worst::new();
    for &xt in values {
        for &ys in values {
            a3p.see(-kernel.dphi_dx(xt, ys), xt, ys, "dPhi/dx(Delta(t), Delta(s)) < 0");
        }
    }
    report.records.insert(AssumptionId::A3pPosterior, a3p.finish());

    let density = DensityQuadrature::new(rate, *profile.grid())?;
    let interp = MonotoneCubic::new(profile);
    let outer = values[0];
    let inner = values[values.len() - 1];
    let mut a5p = Worst::new();
    if inner > 0.0 {
        for &x in &scan_open_right(0.0, inner, scan.n) {
            let u = density.u_delta(kernel, &interp, x);
            a5p.see(u - (h + tau), x, u, "(ii) u >= h + tau on [0, Delta(tau))");
        }
    }
    let far = far_cutoff(kernel, outer, h, tau, scan);
    for &x in &scan_open_left(outer, far, scan.n) {
        let u = density.u_delta(kernel, &interp, x);
        a5p.see(h - u, x, u, "(i) u <= h for x > Delta(0)");
    }
    a5p.see(h - kernel.tail_bound(far - outer), far, outer, "(i) tail beyond X");
    report.records.insert(AssumptionId::A5pPosterior, a5p.finish());
    Ok(report)
}
