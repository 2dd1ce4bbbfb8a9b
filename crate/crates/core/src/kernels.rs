//! Connectivity kernels and firing-rate functions.
//!
//! A [`ConnectivityKernel`] is an even, integrable coupling function `ω`.
//! Besides point evaluation it exposes the antiderivative `W(x) = ∫₀ˣ ω`,
//! the symmetrised kernel `r(x, y) = ω(y − x) + ω(y + x)` and the potential
//! `Φ(x, y) = ∫₀ʸ r(x, z) dz`. Heaviside-field bumps of half-width `Δ` are
//! exactly the slices `x ↦ Φ(x, Δ)`.
//!
//! All types are immutable after construction.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelShape {
    /// `K e^{-k x²} − M e^{-m x²}` with `0 < M < K`, `0 < m < k` (Mexican hat).
    GaussianDifference {
        exc_amp: f64,
        exc_rate: f64,
        inh_amp: f64,
        inh_rate: f64,
    },
    /// `e^{-b|x|} (b sin|x| + cos x)` with `b > 0`.
    OscillatoryDecay { decay: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectivityKernel {
    shape: KernelShape,
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and > 0, got {v}")))
    }
}

impl ConnectivityKernel {
    pub fn gaussian_difference(
        exc_amp: f64,
        exc_rate: f64,
        inh_amp: f64,
        inh_rate: f64,
    ) -> Result<Self> {
        positive("exc_amp", exc_amp)?;
        positive("exc_rate", exc_rate)?;
        positive("inh_amp", inh_amp)?;
        positive("inh_rate", inh_rate)?;
        if inh_amp >= exc_amp {
            return Err(Error::invalid(
                "inh_amp",
                format!("must be below exc_amp ({inh_amp} >= {exc_amp})"),
            ));
        }
        if inh_rate >= exc_rate {
            return Err(Error::invalid(
                "inh_rate",
                format!("must be below exc_rate ({inh_rate} >= {exc_rate})"),
            ));
        }
        Ok(Self {
            shape: KernelShape::GaussianDifference {
                exc_amp,
                exc_rate,
                inh_amp,
                inh_rate,
            },
        })
    }

    pub fn oscillatory_decay(decay: f64) -> Result<Self> {
        positive("decay", decay)?;
        Ok(Self {
            shape: KernelShape::OscillatoryDecay { decay },
        })
    }

    pub fn shape(&self) -> &KernelShape {
        &self.shape
    }

    /// `ω(x)`.
    pub fn omega(&self, x: f64) -> f64 {
        match self.shape {
            KernelShape::GaussianDifference {
                exc_amp,
                exc_rate,
                inh_amp,
                inh_rate,
            } => {
                let x2 = x * x;
                exc_amp * (-exc_rate * x2).exp() - inh_amp * (-inh_rate * x2).exp()
            }
            KernelShape::OscillatoryDecay { decay } => {
                let ax = x.abs();
                (-decay * ax).exp() * (decay * ax.sin() + ax.cos())
            }
        }
    }

    /// `ω′(x)`, analytic.
    pub fn omega_prime(&self, x: f64) -> f64 {
        match self.shape {
            KernelShape::GaussianDifference {
                exc_amp,
                exc_rate,
                inh_amp,
                inh_rate,
            } => {
                let x2 = x * x;
                -2.0 * x
                    * (exc_rate * exc_amp * (-exc_rate * x2).exp()
                        - inh_rate * inh_amp * (-inh_rate * x2).exp())
            }
            KernelShape::OscillatoryDecay { decay } => {
                let ax = x.abs();
                -x.signum() * (1.0 + decay * decay) * (-decay * ax).exp() * ax.sin()
            }
        }
    }

    /// `W(x) = ∫₀ˣ ω(y) dy`, in closed form.
    pub fn antiderivative(&self, x: f64) -> f64 {
        match self.shape {
            KernelShape::GaussianDifference {
                exc_amp,
                exc_rate,
                inh_amp,
                inh_rate,
            } => {
                0.5 * exc_amp * (PI / exc_rate).sqrt() * libm::erf(exc_rate.sqrt() * x)
                    - 0.5 * inh_amp * (PI / inh_rate).sqrt() * libm::erf(inh_rate.sqrt() * x)
            }
            KernelShape::OscillatoryDecay { decay } => {
                // for s >= 0: ω = d/ds[e^{-bs} sin s] + 2b e^{-bs} sin s
                let ax = x.abs();
                let e = (-decay * ax).exp();
                let w = e * ax.sin()
                    + 2.0 * decay * (1.0 - e * (decay * ax.sin() + ax.cos()))
                        / (1.0 + decay * decay);
                if x < 0.0 {
                    -w
                } else {
                    w
                }
            }
        }
    }

    /// `r(x, y) = ω(y − x) + ω(y + x)`.
    pub fn r(&self, x: f64, y: f64) -> f64 {
        self.omega(y - x) + self.omega(y + x)
    }

    /// `∂r/∂x(x, y) = ω′(y + x) − ω′(y − x)`.
    pub fn dr_dx(&self, x: f64, y: f64) -> f64 {
        self.omega_prime(y + x) - self.omega_prime(y - x)
    }

    /// `Φ(x, y) = ∫₀ʸ r(x, z) dz` for `y ≥ 0`.
    pub fn phi(&self, x: f64, y: f64) -> Result<f64> {
        if !(y >= 0.0) {
            return Err(Error::Domain {
                what: "y",
                value: y,
                domain: "[0, ∞)".into(),
            });
        }
        Ok(self.phi_unchecked(x, y))
    }

    /// `Φ(x, y) = W(y + x) + W(y − x)` without the `y ≥ 0` check.
    #[inline]
    pub fn phi_unchecked(&self, x: f64, y: f64) -> f64 {
        self.antiderivative(y + x) + self.antiderivative(y - x)
    }

    /// `∂Φ/∂x(x, y) = ω(y + x) − ω(y − x)`.
    pub fn dphi_dx(&self, x: f64, y: f64) -> f64 {
        self.omega(y + x) - self.omega(y - x)
    }

    /// Upper bound on `∫ₛ^∞ |ω(z)| dz` for `s ≥ 0`.
    pub fn tail_bound(&self, s: f64) -> f64 {
        let s = s.max(0.0);
        match self.shape {
            KernelShape::GaussianDifference {
                exc_amp,
                exc_rate,
                inh_amp,
                inh_rate,
            } => {
                0.5 * exc_amp * (PI / exc_rate).sqrt() * libm::erfc(exc_rate.sqrt() * s)
                    + 0.5 * inh_amp * (PI / inh_rate).sqrt() * libm::erfc(inh_rate.sqrt() * s)
            }
            KernelShape::OscillatoryDecay { decay } => {
                (1.0 + decay) / decay * (-decay * s).exp()
            }
        }
    }

    /// Smallest `s ≥ 0` with `tail_bound(s) ≤ eps`, found by doubling and bisection.
    pub fn tail_cutoff(&self, eps: f64) -> f64 {
        if self.tail_bound(0.0) <= eps {
            return 0.0;
        }
        let mut hi = self.decay_length();
        while self.tail_bound(hi) > eps {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.tail_bound(mid) > eps {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-12 * hi {
                break;
            }
        }
        hi
    }

    /// Length scale of the slowest decaying component.
    pub fn decay_length(&self) -> f64 {
        match self.shape {
            KernelShape::GaussianDifference {
                exc_rate, inh_rate, ..
            } => 1.0 / exc_rate.min(inh_rate).sqrt(),
            KernelShape::OscillatoryDecay { decay } => 1.0 / decay,
        }
    }

    /// Default upper end of the width scan: ten times the last sign change of
    /// `ω` where that is finite, otherwise the point where the kernel tail
    /// drops below `1e-12`.
    pub fn default_scan_upper(&self) -> f64 {
        match self.shape {
            KernelShape::GaussianDifference {
                exc_amp,
                exc_rate,
                inh_amp,
                inh_rate,
            } => {
                let zero = ((exc_amp / inh_amp).ln() / (exc_rate - inh_rate)).sqrt();
                (10.0 * zero).max(self.tail_cutoff(1e-12))
            }
            // infinitely many sign changes
            KernelShape::OscillatoryDecay { .. } => self.tail_cutoff(1e-12),
        }
    }

    /// Limit of `W(x)` as `x → ∞`.
    pub fn total_mass(&self) -> f64 {
        match self.shape {
            KernelShape::GaussianDifference {
                exc_amp,
                exc_rate,
                inh_amp,
                inh_rate,
            } => 0.5 * exc_amp * (PI / exc_rate).sqrt() - 0.5 * inh_amp * (PI / inh_rate).sqrt(),
            KernelShape::OscillatoryDecay { decay } => 2.0 * decay / (1.0 + decay * decay),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FiringRate {
    /// `θ(u − shift)` with `θ(0) = 1`.
    Heaviside { shift: f64 },
    /// `Σ(u/τ, p)` with `Σ(s, p) = sᵖ / (sᵖ + (1 − s)ᵖ)` on `(0, 1)`.
    Logoid { tau: f64, p: f64 },
}

impl FiringRate {
    pub fn heaviside(shift: f64) -> Result<Self> {
        if !shift.is_finite() {
            return Err(Error::invalid("shift", "must be finite"));
        }
        Ok(FiringRate::Heaviside { shift })
    }

    pub fn logoid(tau: f64, p: f64) -> Result<Self> {
        positive("tau", tau)?;
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::invalid("p", format!("must be finite and >= 1, got {p}")));
        }
        Ok(FiringRate::Logoid { tau, p })
    }

    /// Width of the transition region, `τ` (zero for a step).
    pub fn tau(&self) -> f64 {
        match *self {
            FiringRate::Heaviside { .. } => 0.0,
            FiringRate::Logoid { tau, .. } => tau,
        }
    }

    pub fn has_density(&self) -> bool {
        matches!(self, FiringRate::Logoid { .. })
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            FiringRate::Heaviside { shift } => {
                if u >= shift {
                    1.0
                } else {
                    0.0
                }
            }
            FiringRate::Logoid { tau, p } => {
                let s = u / tau;
                if s <= 0.0 {
                    0.0
                } else if s >= 1.0 {
                    1.0
                } else {
                    let a = s.powf(p);
                    a / (a + (1.0 - s).powf(p))
                }
            }
        }
    }

    /// Density `ρ = f′`, supported on `[0, τ]`.
    pub fn density(&self, xi: f64) -> Result<f64> {
        match *self {
            FiringRate::Heaviside { .. } => Err(Error::UnsupportedVariant("heaviside")),
            FiringRate::Logoid { tau, p } => {
                let s = xi / tau;
                if s <= 0.0 || s >= 1.0 {
                    return Ok(0.0);
                }
                let a = s.powf(p);
                let b = (1.0 - s).powf(p);
                let d = a + b;
                Ok(p * (s * (1.0 - s)).powf(p - 1.0) / (d * d) / tau)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mexican_hat() -> ConnectivityKernel {
        ConnectivityKernel::gaussian_difference(1.5, 2.0, 1.0, 1.0).unwrap()
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ConnectivityKernel::gaussian_difference(1.0, 2.0, 1.5, 1.0).is_err());
        assert!(ConnectivityKernel::gaussian_difference(1.5, 1.0, 1.0, 2.0).is_err());
        assert!(ConnectivityKernel::gaussian_difference(1.5, 2.0, 0.0, 1.0).is_err());
        assert!(ConnectivityKernel::oscillatory_decay(0.0).is_err());
        assert!(ConnectivityKernel::oscillatory_decay(f64::NAN).is_err());
        assert!(FiringRate::logoid(0.0, 3.0).is_err());
        assert!(FiringRate::logoid(0.05, 0.5).is_err());
    }

    #[test]
    fn omega_examples() {
        let k = mexican_hat();
        assert_eq!(k.omega(0.0), 0.5);
        // high-precision value -0.127656736196635624
        assert!((k.omega(1.3266) + 0.127_656_736_196_635_6).abs() < 1e-14);
        let o = ConnectivityKernel::oscillatory_decay(0.3).unwrap();
        assert_eq!(o.omega(0.0), 1.0);
    }

    #[test]
    fn antiderivative_examples() {
        let k = mexican_hat();
        assert_eq!(k.antiderivative(0.0), 0.0);
        let x_max = (1.5f64.ln()).sqrt();
        // high-precision value 0.189093455764843608
        assert!((k.antiderivative(x_max) - 0.189_093_455_764_843_6).abs() < 1e-14);
        assert!(k.antiderivative(x_max) > 0.15);
        assert!((k.antiderivative(2.0 * 0.6633) - 0.1).abs() < 1e-3);
    }

    #[test]
    fn oscillatory_antiderivative_matches_quadrature() {
        let k = ConnectivityKernel::oscillatory_decay(0.3).unwrap();
        for &x in &[0.2, 1.0, 3.7, 10.0, -2.5] {
            let (a, b, sign) = if x >= 0.0 { (0.0, x, 1.0) } else { (x, 0.0, -1.0) };
            let q = sign * simpson(|y| k.omega(y), a, b, 20_000);
            assert!((k.antiderivative(x) - q).abs() < 1e-10, "x={x}");
        }
        assert!((k.antiderivative(200.0) - k.total_mass()).abs() < 1e-12);
    }
    #[test]
    fn slow_decay_antiderivative_goes_negative() {
        let k = ConnectivityKernel::oscillatory_decay(0.05).unwrap();
        assert!(k.antiderivative(4.2) < 0.0);
        for &x in &[4.2, -4.2] {
            let (a, b, sign) = if x >= 0.0 { (0.0, x, 1.0) } else { (x, 0.0, -1.0) };
            let q = sign * simpson(|y| k.omega(y), a, b, 20_000);
            assert!((k.antiderivative(x) - q).abs() < 1e-10, "x={x}");
        }
    }

    #[test]
    fn r_examples() {
        let k = mexican_hat();
        assert_eq!(k.r(0.0, 0.8), 2.0 * k.omega(0.8));
        assert!((k.r(0.3, 0.4) - (k.omega(0.1) + k.omega(0.7))).abs() < 1e-15);
        assert_eq!(k.r(0.3, 0.9), k.r(0.9, 0.3));
    }

    #[test]
    fn phi_examples() {
        let k = mexican_hat();
        assert_eq!(k.phi(0.4, 0.0).unwrap(), 0.0);
        let d = 0.6633;
        assert!((k.phi(d, d).unwrap() - k.antiderivative(2.0 * d)).abs() < 1e-15);
        let q = simpson(|z| k.r(0.5, z), 0.0, 0.3, 2000);
        assert!((k.phi(0.5, 0.3).unwrap() - q).abs() < 1e-8);
        assert!(matches!(k.phi(0.1, -0.2), Err(Error::Domain { .. })));
    }

    #[test]
    fn dphi_dx_examples() {
        let k = mexican_hat();
        assert_eq!(k.dphi_dx(0.0, 0.7), 0.0);
        assert_eq!(k.dphi_dx(0.7, 0.0), 0.0);
        let step = 1e-5;
        let fd = (k.phi_unchecked(0.6 + step, 0.5) - k.phi_unchecked(0.6 - step, 0.5)) / (2.0 * step);
        assert!((k.dphi_dx(0.6, 0.5) - fd).abs() < 1e-6);
    }

    #[test]
    fn omega_prime_matches_finite_difference() {
        for k in [mexican_hat(), ConnectivityKernel::oscillatory_decay(0.3).unwrap()] {
            for &x in &[-2.1, -0.4, 0.3, 1.1, 4.0] {
                let s = 1e-6;
                let fd = (k.omega(x + s) - k.omega(x - s)) / (2.0 * s);
                assert!((k.omega_prime(x) - fd).abs() < 1e-8, "x={x}");
            }
        }
    }

    #[test]
    fn tail_bound_dominates_true_tail() {
        for k in [mexican_hat(), ConnectivityKernel::oscillatory_decay(0.3).unwrap()] {
            for &s in &[0.0, 0.5, 2.0, 5.0] {
                let true_tail = simpson(|z| k.omega(z).abs(), s, s + 200.0, 400_000);
                assert!(k.tail_bound(s) >= true_tail - 1e-9);
            }
            let c = k.tail_cutoff(1e-6);
            assert!(k.tail_bound(c) <= 1e-6);
        }
    }

    #[test]
    fn firing_rate_examples() {
        let f = FiringRate::logoid(0.05, 3.0).unwrap();
        assert!((f.eval(0.025) - 0.5).abs() < 1e-15);
        assert!((f.eval(0.0125) - 1.0 / 28.0).abs() < 1e-15);
        assert_eq!(f.eval(-0.1), 0.0);
        assert_eq!(f.eval(0.05), 1.0);
        let g = FiringRate::logoid(0.2, 1.7).unwrap();
        assert!((g.eval(0.1) - 0.5).abs() < 1e-15);
        let step = FiringRate::heaviside(0.0).unwrap();
        assert_eq!(step.eval(0.0), 1.0);
        assert_eq!(step.eval(-1e-300), 0.0);
    }

    #[test]
    fn density_examples() {
        let f = FiringRate::logoid(0.05, 3.0).unwrap();
        assert_eq!(f.density(-0.01).unwrap(), 0.0);
        assert_eq!(f.density(0.06).unwrap(), 0.0);
        let mass = simpson(|x| f.density(x).unwrap(), 0.0, 0.05, 4000);
        assert!((mass - 1.0).abs() < 1e-8);
        let s = 1e-7;
        let fd = (f.eval(0.025 + s) - f.eval(0.025 - s)) / (2.0 * s);
        assert!((f.density(0.025).unwrap() - fd).abs() < 1e-6);
        for t in [0.0125, 0.025, 0.05] {
            let q = simpson(|x| f.density(x).unwrap(), 0.0, t, 4000);
            assert!((q - (f.eval(t) - f.eval(0.0))).abs() < 1e-8);
        }
        assert!(matches!(
            FiringRate::heaviside(0.0).unwrap().density(0.1),
            Err(Error::UnsupportedVariant(_))
        ));
    }
}
