//! Fourier-mode stability of the linearized models.
//!
//! Substituting `T = Re{T_a exp(r t + i k x)}` into the linear equations
//! (unit slopes `h'(0) = g'(0) = 1`) gives
//!
//! * strain-rate: `r^2 + nu k^2 r + k^2 = 0`
//! * stress-rate: `gamma r^3 - r^2 - k^2 = 0`
//!
//! The quadratic has roots with negative real part for every `k > 0`; the
//! cubic always has one positive real root.

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Complex-pair detection threshold on `|Im r|` after polishing.
pub const IMAG_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DispersionModel {
    /// `T_xx + nu T_xxt = T_tt`
    StrainRateLinear,
    /// `T_xx + gamma T_ttt = T_tt`
    StressRateLinear,
}

impl DispersionModel {
    pub fn name(self) -> &'static str {
        match self {
            DispersionModel::StrainRateLinear => "strain_rate",
            DispersionModel::StressRateLinear => "stress_rate",
        }
    }

    /// Coefficients of the dispersion polynomial in `r`, highest degree first.
    pub fn polynomial(self, coeff: f64, k: f64) -> Vec<f64> {
        match self {
            DispersionModel::StrainRateLinear => vec![1.0, coeff * k * k, k * k],
            DispersionModel::StressRateLinear => vec![coeff, -1.0, 0.0, -k * k],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Stable,
    MarginallyStable,
    Unstable,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::Stable => "stable",
            Classification::MarginallyStable => "marginally_stable",
            Classification::Unstable => "unstable",
        }
    }

    fn from_max_real_part(max_re: f64) -> Self {
        if max_re > 0.0 {
            Classification::Unstable
        } else if max_re == 0.0 {
            Classification::MarginallyStable
        } else {
            Classification::Stable
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RootStructure {
    ComplexPair,
    DoubleReal,
    DistinctReal,
    /// One real root and a complex-conjugate pair.
    RealAndComplexPair,
    /// Three real roots, some possibly repeated.
    AllReal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionResult {
    pub model: DispersionModel,
    pub coeff: f64,
    pub k: f64,
    pub roots: Vec<Complex64>,
    pub classification: Classification,
    pub structure: RootStructure,
    /// `2 / nu`, strain-rate only.
    pub k_critical: Option<f64>,
    pub discriminant: f64,
    /// The real root of the cubic, stress-rate only.
    pub positive_real_root: Option<f64>,
}

impl DispersionResult {
    pub fn max_real_part(&self) -> f64 {
        self.roots
            .iter()
            .map(|r| r.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn polynomial(&self) -> Vec<f64> {
        self.model.polynomial(self.coeff, self.k)
    }
}

fn check_coeff(name: &'static str, coeff: f64) -> Result<()> {
    if coeff.is_finite() && coeff > 0.0 {
        Ok(())
    } else {
        Err(invalid(
            name,
            format!("must be positive and finite, got {coeff}"),
        ))
    }
}

fn check_k(k: f64) -> Result<()> {
    if k.is_finite() && k >= 0.0 {
        Ok(())
    } else {
        Err(invalid(
            "k",
            format!("must be nonnegative and finite, got {k}"),
        ))
    }
}

/// Roots of `r^2 + nu k^2 r + k^2`.
pub fn strain_rate_dispersion(nu: f64, k: f64) -> Result<DispersionResult> {
    check_coeff("nu", nu)?;
    check_k(k)?;
    let k2 = k * k;
    let b = nu * k2;
    // k^2 (nu^2 k^2 - 4), factored to keep its sign exact near nu k = 2
    let discriminant = k2 * (nu * k - 2.0) * (nu * k + 2.0);
    let (roots, structure) = if k == 0.0 {
        (vec![Complex64::new(0.0, 0.0); 2], RootStructure::DoubleReal)
    } else if discriminant < 0.0 {
        let im = 0.5 * k * ((2.0 - nu * k) * (2.0 + nu * k)).sqrt();
        (
            vec![Complex64::new(-0.5 * b, -im), Complex64::new(-0.5 * b, im)],
            RootStructure::ComplexPair,
        )
    } else if discriminant == 0.0 {
        (
            vec![Complex64::new(-0.5 * b, 0.0); 2],
            RootStructure::DoubleReal,
        )
    } else {
        let r1 = -0.5 * (b + k * ((nu * k - 2.0) * (nu * k + 2.0)).sqrt());
        // product of the roots is k^2; avoids cancellation in the small root
        let r2 = k2 / r1;
        let (r1, r2) = (polish_quadratic(nu, k, r1), polish_quadratic(nu, k, r2));
        (
            vec![Complex64::new(r1, 0.0), Complex64::new(r2, 0.0)],
            RootStructure::DistinctReal,
        )
    };
    let mut result = DispersionResult {
        model: DispersionModel::StrainRateLinear,
        coeff: nu,
        k,
        roots,
        classification: Classification::Stable,
        structure,
        k_critical: Some(2.0 / nu),
        discriminant,
        positive_real_root: None,
    };
    result.classification = Classification::from_max_real_part(result.max_real_part());
    Ok(result)
}

/// Roots of `gamma r^3 - r^2 - k^2`.
pub fn stress_rate_dispersion(gamma: f64, k: f64) -> Result<DispersionResult> {
    check_coeff("gamma", gamma)?;
    check_k(k)?;
    let k2 = k * k;
    let discriminant = -k2 * (4.0 + 27.0 * gamma * gamma * k2);
    let (roots, structure) = if k == 0.0 {
        (
            vec![
                Complex64::new(1.0 / gamma, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
            RootStructure::AllReal,
        )
    } else {
        let mut roots = cubic_roots([gamma, -1.0, 0.0, -k2]).to_vec();
        // real root first, then the pair with positive imaginary part first
        roots.sort_by(|a, b| {
            let ra = a.im.abs() < IMAG_TOLERANCE;
            let rb = b.im.abs() < IMAG_TOLERANCE;
            rb.cmp(&ra).then(b.im.total_cmp(&a.im))
        });
        let n_real = roots.iter().filter(|r| r.im.abs() < IMAG_TOLERANCE).count();
        let structure = if n_real == 1 {
            RootStructure::RealAndComplexPair
        } else {
            RootStructure::AllReal
        };
        (roots, structure)
    };
    let positive_real_root = roots
        .iter()
        .filter(|r| r.im.abs() < IMAG_TOLERANCE && r.re > 0.0)
        .map(|r| r.re)
        .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
    let mut result = DispersionResult {
        model: DispersionModel::StressRateLinear,
        coeff: gamma,
        k,
        roots,
        classification: Classification::Stable,
        structure,
        k_critical: None,
        discriminant,
        positive_real_root,
    };
    result.classification = Classification::from_max_real_part(result.max_real_part());
    Ok(result)
}

pub fn dispersion(model: DispersionModel, coeff: f64, k: f64) -> Result<DispersionResult> {
    match model {
        DispersionModel::StrainRateLinear => strain_rate_dispersion(coeff, k),
        DispersionModel::StressRateLinear => stress_rate_dispersion(coeff, k),
    }
}

/// `(k, max Re r)` for each wavenumber.
pub fn growth_rate_curve(
    model: DispersionModel,
    coeff: f64,
    k_values: &[f64],
) -> Result<Vec<(f64, f64)>> {
    k_values
        .iter()
        .map(|&k| dispersion(model, coeff, k).map(|d| (k, d.max_real_part())))
        .collect()
}

/// Roots of `c[0] r^3 + c[1] r^2 + c[2] r + c[3]` (`c[0] != 0`).
///
/// Eigenvalues of the companion matrix of the scaled monic polynomial,
/// followed by Newton polishing on the original coefficients. Roots whose
/// imaginary part falls below [`IMAG_TOLERANCE`] are returned as exactly real.
pub fn cubic_roots(c: [f64; 4]) -> [Complex64; 3] {
    let p = c[1] / c[0];
    let q = c[2] / c[0];
    let s = c[3] / c[0];
    // r = scale * z brings the roots near the unit circle
    let scale = [p.abs(), q.abs().sqrt(), s.abs().cbrt()]
        .into_iter()
        .fold(0.0, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let (ps, qs, ss) = (p / scale, q / (scale * scale), s / (scale * scale * scale));
    let companion = Matrix3::new(-ps, -qs, -ss, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
    let eig = companion.complex_eigenvalues();
    let mut roots = [Complex64::new(0.0, 0.0); 3];
    for (slot, z) in roots.iter_mut().zip(eig.iter()) {
        let r = Complex64::new(z.re * scale, z.im * scale);
        *slot = polish(&c, r);
    }
    roots
}

fn polish(c: &[f64; 4], mut r: Complex64) -> Complex64 {
    if r.im.abs() < IMAG_TOLERANCE * r.norm().max(1.0) {
        return Complex64::new(polish_real(c, r.re), 0.0);
    }
    let eval = |r: Complex64| ((r * c[0] + c[1]) * r + c[2]) * r + c[3];
    let mut best = eval(r).norm();
    for _ in 0..4 {
        let f = eval(r);
        let d = (r * (3.0 * c[0]) + 2.0 * c[1]) * r + c[2];
        if d.norm() == 0.0 {
            break;
        }
        let next = r - f / d;
        let fn_ = eval(next).norm();
        if fn_ < best {
            r = next;
            best = fn_;
        } else {
            break;
        }
    }
    if r.im.abs() < IMAG_TOLERANCE {
        r.im = 0.0;
    }
    r
}

/// Newton steps on a real root with compensated evaluation, kept only while
/// they reduce the residual.
fn polish_real(c: &[f64], mut x: f64) -> f64 {
    let degree = c.len() - 1;
    let derivative: Vec<f64> = c[..degree]
        .iter()
        .enumerate()
        .map(|(i, &ci)| ci * (degree - i) as f64)
        .collect();
    let mut best = compensated_horner(c, x).abs();
    for _ in 0..4 {
        if best == 0.0 {
            break;
        }
        let f = compensated_horner(c, x);
        let d = compensated_horner(&derivative, x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = x - f / d;
        let fn_ = compensated_horner(c, next).abs();
        if fn_ < best {
            x = next;
            best = fn_;
        } else {
            break;
        }
    }
    x
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `r^2 + nu k^2 r + k^2` in double-double arithmetic, with `nu k^2` kept
/// unrounded. For large `nu k` the rounding of that coefficient alone moves
/// the small root by more than an ulp.
fn quadratic_dd(nu: f64, k: f64, r: f64) -> f64 {
    let (k2, k2_lo) = two_prod(k, k);
    let (b, b_lo) = two_prod(nu, k2);
    let b_lo = b_lo + nu * k2_lo;
    let (rr, rr_lo) = two_prod(r, r);
    let (br, br_lo) = two_prod(b, r);
    let (s, e1) = two_sum(br, k2);
    let (s, e2) = two_sum(s, rr);
    s + (e1 + e2 + rr_lo + br_lo + b_lo * r + k2_lo)
}

/// Best double root of the strain-rate quadratic near `x`: Newton steps, then
/// a walk to whichever neighboring double has the smaller residual.
fn polish_quadratic(nu: f64, k: f64, mut x: f64) -> f64 {
    let b = nu * k * k;
    for _ in 0..3 {
        let d = 2.0 * x + b;
        if d == 0.0 {
            break;
        }
        let next = x - quadratic_dd(nu, k, x) / d;
        if quadratic_dd(nu, k, next).abs() < quadratic_dd(nu, k, x).abs() {
            x = next;
        } else {
            break;
        }
    }
    let mut best = quadratic_dd(nu, k, x).abs();
    for _ in 0..8 {
        let up = quadratic_dd(nu, k, x.next_up()).abs();
        let down = quadratic_dd(nu, k, x.next_down()).abs();
        if up < best && up <= down {
            x = x.next_up();
            best = up;
        } else if down < best {
            x = x.next_down();
            best = down;
        } else {
            break;
        }
    }
    x
}

/// `|p(r)|` for coefficients highest degree first. Real arguments use
/// compensated Horner evaluation so the residual reflects the root, not the
/// rounding of the evaluation.
pub fn polynomial_residual(coeffs: &[f64], r: Complex64) -> f64 {
    if r.im == 0.0 {
        compensated_horner(coeffs, r.re).abs()
    } else {
        coeffs
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * r + c)
            .norm()
    }
}

fn compensated_horner(coeffs: &[f64], x: f64) -> f64 {
    let mut s = 0.0_f64;
    let mut err = 0.0_f64;
    for &c in coeffs {
        // two_prod(s, x) followed by two_sum(p, c)
        let p = s * x;
        let pe = s.mul_add(x, -p);
        let sum = p + c;
        let bp = sum - p;
        let se = (p - (sum - bp)) + (c - bp);
        s = sum;
        err = err * x + (pe + se);
    }
    s + err
}

/// One spatial Fourier mode of the linear models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierMode {
    pub k: f64,
    pub amplitude: Complex64,
    pub model: DispersionModel,
}

/// Integrates the amplitude ODE of one mode with classical RK4.
///
/// strain-rate: `a'' + nu k^2 a' + k^2 a = 0`;
/// stress-rate: `gamma a''' - a'' - k^2 a = 0`;
/// with `a(0) = amplitude` and all higher initial derivatives zero.
pub fn evolve_single_mode(
    mode: &FourierMode,
    coeff: f64,
    t_final: f64,
    dt: f64,
) -> Result<Vec<(f64, Complex64)>> {
    check_coeff("coeff", coeff)?;
    if !(mode.k.is_finite() && mode.k > 0.0) {
        return Err(invalid("k", format!("must be positive, got {}", mode.k)));
    }
    if !(t_final.is_finite() && t_final > 0.0 && dt.is_finite() && dt > 0.0 && dt <= t_final) {
        return Err(Error::InvalidStep { dt, t_final });
    }
    let k2 = mode.k * mode.k;
    let n = (t_final / dt).ceil() as usize;
    let h = t_final / n as f64;
    let zero = Complex64::new(0.0, 0.0);

    let rhs = |y: &[Complex64; 3]| -> [Complex64; 3] {
        match mode.model {
            DispersionModel::StrainRateLinear => [y[1], -coeff * k2 * y[1] - k2 * y[0], zero],
            DispersionModel::StressRateLinear => [y[1], y[2], (y[2] + y[0] * k2) / coeff],
        }
    };
    let axpy = |y: &[Complex64; 3], a: f64, k: &[Complex64; 3]| -> [Complex64; 3] {
        [y[0] + k[0] * a, y[1] + k[1] * a, y[2] + k[2] * a]
    };

    let mut y = [mode.amplitude, zero, zero];
    let mut out = Vec::with_capacity(n + 1);
    out.push((0.0, y[0]));
    for i in 1..=n {
        let k1 = rhs(&y);
        let k2_ = rhs(&axpy(&y, 0.5 * h, &k1));
        let k3 = rhs(&axpy(&y, 0.5 * h, &k2_));
        let k4 = rhs(&axpy(&y, h, &k3));
        for j in 0..3 {
            y[j] += (k1[j] + (k2_[j] + k3[j]) * 2.0 + k4[j]) * (h / 6.0);
        }
        out.push((i as f64 * h, y[0]));
    }
    Ok(out)
}

/// Exponential rate of a sampled amplitude history `(t, |a|)` over `t >= t_from`.
///
/// Oscillating signals are measured from successive local maxima (located by
/// parabolic interpolation of `ln |a|`), whose ratio is exactly the envelope
/// factor. Non-oscillating signals use a least-squares fit of `ln |a|`.
pub fn measure_growth_rate(samples: &[(f64, f64)], t_from: f64) -> Option<f64> {
    let window: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|&(t, a)| t >= t_from && a > 0.0 && a.is_finite())
        .map(|(t, a)| (t, a.ln()))
        .collect();
    if window.len() < 3 {
        return None;
    }
    let mut peaks = Vec::new();
    for w in window.windows(3) {
        let (t0, y0) = w[0];
        let (t1, y1) = w[1];
        let (_, y2) = w[2];
        if y1 > y0 && y1 >= y2 {
            let h = t1 - t0;
            let curv = y0 - 2.0 * y1 + y2;
            if curv < 0.0 {
                let offset = 0.5 * h * (y0 - y2) / curv;
                let peak = y1 - (y0 - y2) * (y0 - y2) / (8.0 * curv);
                peaks.push((t1 + offset, peak));
            }
        }
    }
    let points = if peaks.len() >= 2 { &peaks } else { &window };
    least_squares_slope(points)
}

fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    if n < 2.0 {
        return None;
    }
    let mt = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (num, den) = points.iter().fold((0.0, 0.0), |(num, den), &(t, y)| {
        (num + (t - mt) * (y - my), den + (t - mt) * (t - mt))
    });
    (den > 0.0).then(|| num / den)
}
