use super::grid::{Grid, SampledFunction};
use crate::error::{Error, Result};

/// Shape-preserving piecewise-cubic Hermite interpolant.
///
/// Node slopes start from fourth-order finite differences (second order next
/// to the ends) and are then limited so that every cell stays monotone
/// whenever the data are monotone across it: slopes are zeroed at discrete
/// extrema and clipped to three times the smaller neighbouring secant.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    grid: Grid,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(sf: &SampledFunction) -> Self {
        Self::from_parts(*sf.grid(), sf.values().to_vec())
    }

    pub fn from_parts(grid: Grid, values: Vec<f64>) -> Self {
        let n = values.len();
        debug_assert_eq!(n, grid.len());
        let h = grid.spacing();
        let secants: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]) / h).collect();
        let mut slopes = vec![0.0; n];
        if n == 2 {
            slopes[0] = secants[0];
            slopes[1] = secants[0];
        } else {
            for (i, m) in slopes.iter_mut().enumerate() {
                *m = if i == 0 {
                    0.5 * (3.0 * secants[0] - secants[1])
                } else if i == n - 1 {
                    0.5 * (3.0 * secants[n - 2] - secants[n - 3])
                } else if i == 1 || i == n - 2 {
                    0.5 * (secants[i - 1] + secants[i])
                } else {
                    (7.0 * (secants[i - 1] + secants[i]) - secants[i - 2] - secants[i + 1]) / 12.0
                };
            }
            for i in 0..n {
                slopes[i] = if i == 0 {
                    limit_end(slopes[0], secants[0])
                } else if i == n - 1 {
                    limit_end(slopes[i], secants[n - 2])
                } else {
                    limit_interior(slopes[i], secants[i - 1], secants[i])
                };
            }
        }
        Self {
            grid,
            values,
            slopes,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Value at `x`, which must lie in the grid interval.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !self.grid.contains(x) {
            return Err(Error::Domain {
                what: "x",
                value: x,
                domain: format!("[{}, {}]", self.grid.lower(), self.grid.upper()),
            });
        }
        let (i, s) = self.grid.locate(x);
        Ok(self.eval_cell(i, s))
    }

    /// Value at local coordinate `s ∈ [0, 1]` of cell `i`.
    #[inline]
    pub fn eval_cell(&self, i: usize, s: f64) -> f64 {
        let h = self.grid.spacing();
        let t = 1.0 - s;
        let h00 = (1.0 + 2.0 * s) * t * t;
        let h10 = s * t * t;
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = -s * s * t;
        h00 * self.values[i]
            + h10 * h * self.slopes[i]
            + h01 * self.values[i + 1]
            + h11 * h * self.slopes[i + 1]
    }
}

fn limit_interior(m: f64, left: f64, right: f64) -> f64 {
    if left * right <= 0.0 {
        return 0.0;
    }
    let sign = right.signum();
    let cap = 3.0 * left.abs().min(right.abs());
    sign * (sign * m).clamp(0.0, cap)
}

fn limit_end(m: f64, secant: f64) -> f64 {
    if m * secant <= 0.0 {
        return 0.0;
    }
    let sign = secant.signum();
    sign * (sign * m).min(3.0 * secant.abs())
}

/// One-off interpolation of `sf` at `x`. Hot loops should build a
/// [`MonotoneCubic`] once instead.
pub fn interpolate(sf: &SampledFunction, x: f64) -> Result<f64> {
    MonotoneCubic::new(sf).eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn exact_at_nodes() {
        let g = Grid::new(0.0, 2.0, 17).unwrap();
        let sf = SampledFunction::from_fn(g, |x| (3.0 * x).cos() + x * x).unwrap();
        for (x, y) in sf.iter() {
            assert_eq!(interpolate(&sf, x).unwrap(), y);
        }
    }

    #[test]
    fn reproduces_linear_data() {
        let g = Grid::new(-1.0, 3.0, 9).unwrap();
        let sf = SampledFunction::from_fn(g, |x| 2.5 * x - 0.75).unwrap();
        for i in 0..8 {
            let x = 0.5 * (g.point(i) + g.point(i + 1));
            assert!((interpolate(&sf, x).unwrap() - (2.5 * x - 0.75)).abs() < 1e-14);
        }
    }

    #[test]
    fn sine_accuracy() {
        let g = Grid::new(0.0, PI, 101).unwrap();
        let sf = SampledFunction::from_fn(g, f64::sin).unwrap();
        assert!((interpolate(&sf, 1.0).unwrap() - 1.0f64.sin()).abs() < 1e-6);
    }

    #[test]
    fn no_extrapolation() {
        let g = Grid::new(0.0, 1.0, 5).unwrap();
        let sf = SampledFunction::constant(g, 1.0).unwrap();
        assert!(matches!(interpolate(&sf, 1.5), Err(Error::Domain { .. })));
        assert!(interpolate(&sf, -1e-12).is_err());
    }

    #[test]
    fn two_point_grid_is_linear() {
        let g = Grid::new(0.0, 1.0, 2).unwrap();
        let sf = SampledFunction::new(g, vec![1.0, 3.0]).unwrap();
        assert!((interpolate(&sf, 0.25).unwrap() - 1.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn monotone_data_gives_monotone_interpolant(
            steps in prop::collection::vec(0.0f64..1.0, 2..40),
            probes in prop::collection::vec(0.0f64..1.0, 50),
        ) {
            let mut v = vec![0.0];
            for s in &steps {
                let last = *v.last().unwrap();
                v.push(last + s);
            }
            let g = Grid::new(0.0, 1.0, v.len()).unwrap();
            let interp = MonotoneCubic::from_parts(g, v.clone());
            let mut xs = probes.clone();
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let ys: Vec<f64> = xs.iter().map(|&x| interp.eval(x).unwrap()).collect();
            for w in ys.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-12);
            }
            let lo = v[0];
            let hi = *v.last().unwrap();
            for y in ys {
                prop_assert!(y >= lo - 1e-12 && y <= hi + 1e-12);
            }
        }
    }
}
