use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Uniform grid on `[a, b]` with `n ≥ 2` points, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    n: usize,
}

impl Grid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::invalid("grid", format!("bounds must be finite, got [{a}, {b}]")));
        }
        if !(a < b) {
            return Err(Error::invalid("grid", format!("need a < b, got [{a}, {b}]")));
        }
        if n < 2 {
            return Err(Error::invalid("grid", format!("need at least 2 points, got {n}")));
        }
        Ok(Self { a, b, n })
    }

    pub fn lower(&self) -> f64 {
        self.a
    }

    pub fn upper(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / (self.n - 1) as f64
    }

    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.b
        } else {
            self.a + i as f64 * self.spacing()
        }
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.point(i))
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    /// Index `i` of the cell `[x_i, x_{i+1}]` holding `x`, and the local
    /// coordinate `s ∈ [0, 1]`.
    #[inline]
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let h = self.spacing();
        let t = (x - self.a) / h;
        let i = (t.floor().max(0.0) as usize).min(self.n - 2);
        let s = (x - self.point(i)) / h;
        (i, s.clamp(0.0, 1.0))
    }
}

/// Values of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(
                "values",
                format!("length {} does not match grid size {}", values.len(), grid.len()),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid("values", format!("non-finite value at index {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.points().map(f).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.len()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.points().zip(self.values.iter().copied())
    }

    /// Node-wise maximum of `|self − other|`.
    pub fn max_abs_diff(&self, other: &SampledFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Writes a two-column CSV with the given header names.
    pub fn write_csv<W: Write>(&self, mut out: W, x_name: &str, y_name: &str) -> Result<()> {
        writeln!(out, "{x_name},{y_name}")?;
        for (x, y) in self.iter() {
            writeln!(out, "{x:e},{y:e}")?;
        }
        Ok(())
    }

    /// Reads a curve written by [`SampledFunction::write_csv`]: one header
    /// line, then `x,y` rows on a uniform, increasing grid. Lines starting
    /// with `#` and blank lines are skipped.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut saw_header = false;
        for (idx, line) in input.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if !saw_header {
                saw_header = true;
                if trimmed.split(',').count() != 2 {
                    return Err(Error::Csv {
                        line: line_no,
                        reason: "header must name exactly two columns".into(),
                    });
                }
                continue;
            }
            let mut fields = trimmed.split(',');
            let (Some(xs_field), Some(ys_field), None) = (fields.next(), fields.next(), fields.next())
            else {
                return Err(Error::Csv {
                    line: line_no,
                    reason: "expected exactly two fields".into(),
                });
            };
            let parse = |s: &str, col: &str| -> Result<f64> {
                let v: f64 = s.trim().parse().map_err(|_| Error::Csv {
                    line: line_no,
                    reason: format!("{col} is not a number: {:?}", s.trim()),
                })?;
                if !v.is_finite() {
                    return Err(Error::Csv {
                        line: line_no,
                        reason: format!("{col} is not finite"),
                    });
                }
                Ok(v)
            };
            xs.push(parse(xs_field, "x")?);
            ys.push(parse(ys_field, "y")?);
        }
        if xs.len() < 2 {
            return Err(Error::Csv {
                line: 0,
                reason: format!("need at least two data rows, got {}", xs.len()),
            });
        }
        let grid = Grid::new(xs[0], xs[xs.len() - 1], xs.len()).map_err(|e| Error::Csv {
            line: 0,
            reason: e.to_string(),
        })?;
        let h = grid.spacing();
        for (i, &x) in xs.iter().enumerate() {
            if (x - grid.point(i)).abs() > 1e-9 * h.max(1.0) + 1e-6 * h {
                return Err(Error::Csv {
                    line: 0,
                    reason: format!("row {i}: x = {x} is off the uniform grid"),
                });
            }
        }
        Self::new(grid, ys)
    }
}
