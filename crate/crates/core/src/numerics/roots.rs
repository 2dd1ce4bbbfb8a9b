/// Bisection on a bracket `[a, b]` with `f(a)` and `f(b)` of opposite sign
/// (or one of them zero). Stops once the bracket is narrower than `tol`.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    if fa == 0.0 {
        return a;
    }
    if f(b) == 0.0 {
        return b;
    }
    for _ in 0..200 {
        if (b - a).abs() < tol {
            break;
        }
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// All roots of `f` on `[a, b]` detected as sign changes between `scan_n`
/// uniform samples, each refined by bisection to a bracket below `tol`.
/// A sample where `f` is exactly zero is itself reported. Ascending order.
pub fn find_roots(f: impl Fn(f64) -> f64, a: f64, b: f64, scan_n: usize, tol: f64) -> Vec<f64> {
    assert!(scan_n >= 2, "scan_n must be at least 2");
    let h = (b - a) / (scan_n - 1) as f64;
    let xs: Vec<f64> = (0..scan_n)
        .map(|i| if i + 1 == scan_n { b } else { a + i as f64 * h })
        .collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for i in 0..scan_n {
        if fs[i] == 0.0 {
            roots.push(xs[i]);
            continue;
        }
        if i + 1 < scan_n && fs[i + 1] != 0.0 && (fs[i] < 0.0) != (fs[i + 1] < 0.0) {
            roots.push(bisect(&f, xs[i], xs[i + 1], tol));
        }
    }
    roots
}
