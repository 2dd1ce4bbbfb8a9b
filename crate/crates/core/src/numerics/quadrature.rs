use std::f64::consts::PI;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on `P_n` from the Chebyshev initial guess.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate_panel(&self, f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    pub fn integrate_composite(&self, f: &impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|i| {
                let lo = a + i as f64 * h;
                let hi = if i + 1 == panels { b } else { lo + h };
                self.integrate_panel(f, lo, hi)
            })
            .sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

pub const DEFAULT_ORDER: usize = 8;
const MAX_DOUBLINGS: u32 = 16;

/// Composite Gauss–Legendre with panel doubling until successive estimates
/// differ by less than `tol · max(1, |I|)`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a <= b) {
        return Err(Error::Domain {
            what: "a",
            value: a,
            domain: format!("(-∞, b = {b}]"),
        });
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    if a == b {
        return Ok(0.0);
    }
    let rule = GaussLegendre::new(DEFAULT_ORDER);
    let mut panels = 1usize;
    let mut previous = rule.integrate_panel(&f, a, b);
    for _ in 0..MAX_DOUBLINGS {
        panels *= 2;
        let current = rule.integrate_composite(&f, a, b, panels);
        if !current.is_finite() {
            return Err(Error::QuadratureFailure {
                previous,
                last: current,
            });
        }
        if (current - previous).abs() < tol * current.abs().max(1.0) {
            return Ok(current);
        }
        previous = current;
    }
    let last = rule.integrate_composite(&f, a, b, panels * 2);
    Err(Error::QuadratureFailure { previous, last })
}

/// Fixed Gauss points inside every cell of a grid. Each point remembers its
/// cell and local coordinate so a cell-local interpolant can be evaluated
/// without a search.
#[derive(Debug, Clone)]
pub struct CellQuadrature {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub cells: Vec<usize>,
    pub local: Vec<f64>,
}

impl CellQuadrature {
    pub fn new(grid: &Grid, order: usize) -> Self {
        let rule = GaussLegendre::new(order);
        let cells_n = grid.len() - 1;
        let cap = cells_n * order;
        let mut q = Self {
            points: Vec::with_capacity(cap),
            weights: Vec::with_capacity(cap),
            cells: Vec::with_capacity(cap),
            local: Vec::with_capacity(cap),
        };
        for c in 0..cells_n {
            let lo = grid.point(c);
            let hi = grid.point(c + 1);
            let half = 0.5 * (hi - lo);
            for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
                let s = 0.5 * (x + 1.0);
                q.points.push(lo + 2.0 * half * s);
                q.weights.push(w * half);
                q.cells.push(c);
                q.local.push(s);
            }
        }
        q
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{ConnectivityKernel, FiringRate};

    #[test]
    fn rule_integrates_polynomials_exactly() {
        for order in 1..=12 {
            let rule = GaussLegendre::new(order);
            assert!((rule.weights().iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for deg in 0..2 * order {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let got = rule.integrate_panel(&|x: f64| x.powi(deg as i32), -1.0, 1.0);
                assert!((got - exact).abs() < 1e-13, "order {order} degree {deg}");
            }
        }
    }

    #[test]
    fn integrate_examples() {
        assert!((integrate(|_| 1.0, 0.0, 2.0, 1e-10).unwrap() - 2.0).abs() < 1e-12);
        let k = ConnectivityKernel::gaussian_difference(1.5, 2.0, 1.0, 1.0).unwrap();
        let q = integrate(|x| k.omega(x), 0.0, 1.3266, 1e-10).unwrap();
        assert!((q - k.antiderivative(1.3266)).abs() < 1e-8);
        let f = FiringRate::logoid(0.05, 3.0).unwrap();
        let mass = integrate(|x| f.density(x).unwrap(), 0.0, 0.05, 1e-10).unwrap();
        assert!((mass - 1.0).abs() < 1e-8);
    }

    #[test]
    fn integrate_reports_failure() {
        // |x|^{-1/2}-type singularity never settles to 1e-15
        let r = integrate(|x: f64| 1.0 / x.abs().sqrt().max(1e-300), -1.0, 1.0, 1e-15);
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
        assert!(integrate(|x| x, 1.0, 0.0, 1e-8).is_err());
        assert_eq!(integrate(|x| x, 1.0, 1.0, 1e-8).unwrap(), 0.0);
    }

    #[test]
    fn cell_quadrature_covers_grid() {
        let g = Grid::new(0.2, 0.9, 11).unwrap();
        let q = CellQuadrature::new(&g, 4);
        assert_eq!(q.len(), 40);
        let s: f64 = q.points.iter().zip(&q.weights).map(|(x, w)| w * x * x).sum();
        assert!((s - (0.9f64.powi(3) - 0.2f64.powi(3)) / 3.0).abs() < 1e-14);
    }
}
