//! Small numerical helpers shared across modules.

/// Three-point derivative weights for samples at `t0 < t1 < t2`, evaluated at
/// sample `at` (0, 1 or 2). Second-order accurate on nonuniform spacing.
pub(crate) fn three_point_weights(t: [f64; 3], at: usize) -> [f64; 3] {
    let h1 = t[1] - t[0];
    let h2 = t[2] - t[1];
    let s = h1 + h2;
    match at {
        0 => [-(2.0 * h1 + h2) / (h1 * s), s / (h1 * h2), -h1 / (h2 * s)],
        1 => [-h2 / (h1 * s), (h2 - h1) / (h1 * h2), h1 / (h2 * s)],
        2 => [h2 / (h1 * s), -s / (h1 * h2), (h1 + 2.0 * h2) / (h2 * s)],
        _ => unreachable!("three-point stencil has three nodes"),
    }
}

/// Derivative of sampled data at every sample: centered in the interior,
/// one-sided second order at the ends. Requires `t.len() >= 3`.
pub(crate) fn sampled_derivative(t: &[f64], f: &[f64]) -> Vec<f64> {
    let n = t.len();
    debug_assert!(n >= 3 && f.len() == n);
    (0..n)
        .map(|i| {
            let (start, at) = match i {
                0 => (0, 0),
                i if i == n - 1 => (n - 3, 2),
                i => (i - 1, 1),
            };
            let w = three_point_weights([t[start], t[start + 1], t[start + 2]], at);
            w[0] * f[start] + w[1] * f[start + 1] + w[2] * f[start + 2]
        })
        .collect()
}

/// Trapezoidal rule over possibly nonuniform samples.
pub(crate) fn trapezoid(t: &[f64], f: &[f64]) -> f64 {
    t.windows(2)
        .zip(f.windows(2))
        .map(|(tw, fw)| 0.5 * (tw[1] - tw[0]) * (fw[0] + fw[1]))
        .sum()
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub(crate) fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}
