//! Response functions `h` (stress-rate model) and `g` (strain-rate model), the
//! free-energy potentials that generate them, and the dissipation audit.
//!
//! Every catalog member is odd, strictly increasing, vanishes at zero and has
//! slope `beta` there. The saturating and arctan members are bounded by one in
//! magnitude, which is the strain-limiting property: strain stays bounded no
//! matter how large the stress.

use std::f64::consts::{FRAC_2_PI, PI};
use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::numerics::{adaptive_simpson, sampled_derivative, trapezoid};

/// Scalar real function shared between threads.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResponseKind {
    Linear,
    Saturating,
    Arctan,
    Custom,
}

impl ResponseKind {
    pub fn name(self) -> &'static str {
        match self {
            ResponseKind::Linear => "linear",
            ResponseKind::Saturating => "saturating",
            ResponseKind::Arctan => "arctan",
            ResponseKind::Custom => "custom",
        }
    }
}

/// User-supplied response with its derivative and antiderivative.
#[derive(Clone)]
pub struct CustomResponse {
    pub value: ScalarFn,
    pub derivative: ScalarFn,
    /// Must vanish at zero.
    pub antiderivative: ScalarFn,
    /// Open interval of attainable values, if known. Unknown ranges are probed by bracketing.
    pub range: Option<(f64, f64)>,
}

#[derive(Clone)]
enum Repr {
    Linear { beta: f64 },
    Saturating { beta: f64, a: f64 },
    Arctan { beta: f64 },
    Custom(Arc<CustomResponse>),
}

/// A scalar response `T -> h(T)` with exact derivative and antiderivative.
#[derive(Clone)]
pub struct ConstitutiveFunction {
    repr: Repr,
}

impl fmt::Debug for ConstitutiveFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Linear { beta } => write!(f, "Linear {{ beta: {beta} }}"),
            Repr::Saturating { beta, a } => write!(f, "Saturating {{ beta: {beta}, a: {a} }}"),
            Repr::Arctan { beta } => write!(f, "Arctan {{ beta: {beta} }}"),
            Repr::Custom(c) => write!(f, "Custom {{ range: {:?} }}", c.range),
        }
    }
}

pub fn make_constitutive(kind: ResponseKind, beta: f64, a: f64) -> Result<ConstitutiveFunction> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(invalid(
            "beta",
            format!("must be positive and finite, got {beta}"),
        ));
    }
    let repr = match kind {
        ResponseKind::Linear => Repr::Linear { beta },
        ResponseKind::Saturating => {
            if !(a.is_finite() && a > 0.0) {
                return Err(invalid(
                    "a",
                    format!("must be positive and finite, got {a}"),
                ));
            }
            Repr::Saturating { beta, a }
        }
        ResponseKind::Arctan => Repr::Arctan { beta },
        ResponseKind::Custom => {
            return Err(invalid(
                "kind",
                "custom responses are built with ConstitutiveFunction::custom",
            ))
        }
    };
    Ok(ConstitutiveFunction { repr })
}

impl ConstitutiveFunction {
    pub fn linear(beta: f64) -> Result<Self> {
        make_constitutive(ResponseKind::Linear, beta, 1.0)
    }

    pub fn saturating(beta: f64, a: f64) -> Result<Self> {
        make_constitutive(ResponseKind::Saturating, beta, a)
    }

    pub fn arctan(beta: f64) -> Result<Self> {
        make_constitutive(ResponseKind::Arctan, beta, 1.0)
    }

    /// Wraps a user response. Only `h(0) = 0` and `H(0) = 0` are checked here;
    /// solvers that need monotonicity call [`Self::check_monotone`].
    pub fn custom(response: CustomResponse) -> Result<Self> {
        let h0 = (response.value)(0.0);
        if !(h0.abs() <= 1e-14) {
            return Err(invalid(
                "value",
                format!("custom response must vanish at 0, got {h0}"),
            ));
        }
        let big_h0 = (response.antiderivative)(0.0);
        if !(big_h0.abs() <= 1e-14) {
            return Err(invalid(
                "antiderivative",
                format!("custom antiderivative must vanish at 0, got {big_h0}"),
            ));
        }
        if let Some((lo, hi)) = response.range {
            if !(lo < 0.0 && hi > 0.0) {
                return Err(invalid(
                    "range",
                    format!("must contain 0 in its interior, got ({lo}, {hi})"),
                ));
            }
        }
        Ok(Self {
            repr: Repr::Custom(Arc::new(response)),
        })
    }

    pub fn kind(&self) -> ResponseKind {
        match self.repr {
            Repr::Linear { .. } => ResponseKind::Linear,
            Repr::Saturating { .. } => ResponseKind::Saturating,
            Repr::Arctan { .. } => ResponseKind::Arctan,
            Repr::Custom(_) => ResponseKind::Custom,
        }
    }

    /// Slope at zero.
    pub fn beta(&self) -> f64 {
        match &self.repr {
            Repr::Linear { beta } | Repr::Saturating { beta, .. } | Repr::Arctan { beta } => *beta,
            Repr::Custom(c) => (c.derivative)(0.0),
        }
    }

    pub fn exponent(&self) -> Option<f64> {
        match self.repr {
            Repr::Saturating { a, .. } => Some(a),
            _ => None,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match &self.repr {
            Repr::Linear { beta } => beta * t,
            Repr::Saturating { beta, a } => {
                let s = beta * t.abs();
                if s <= 1.0 {
                    beta * t / saturation_denominator(s, *a)
                } else {
                    // 1 / (1 + s^-a)^(1/a) cannot round above one.
                    t.signum() / saturation_denominator(s.recip(), *a)
                }
            }
            Repr::Arctan { beta } => FRAC_2_PI * (arctan_scale(*beta) * t).atan(),
            Repr::Custom(c) => (c.value)(t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match &self.repr {
            Repr::Linear { beta } => *beta,
            Repr::Saturating { beta, a } => {
                // d/dT [s / (1 + s^a)^(1/a)] = beta (1 + s^a)^(-1 - 1/a)
                let s = beta * t.abs();
                let d = saturation_denominator(s, *a);
                beta / (d * (1.0 + s.powf(*a)))
            }
            Repr::Arctan { beta } => {
                let x = arctan_scale(*beta) * t;
                beta / (1.0 + x * x)
            }
            Repr::Custom(c) => (c.derivative)(t),
        }
    }

    /// `H(T) = integral of h from 0 to T`.
    pub fn antiderivative(&self, t: f64) -> f64 {
        match &self.repr {
            Repr::Linear { beta } => 0.5 * beta * t * t,
            Repr::Saturating { beta, a } => saturating_antiderivative(*beta, *a, t.abs()),
            Repr::Arctan { beta } => {
                let c = arctan_scale(*beta);
                let x = c * t;
                FRAC_2_PI / c * x_atan_minus_half_log(x)
            }
            Repr::Custom(c) => (c.antiderivative)(t),
        }
    }

    /// Open interval of attainable values, `None` when it must be probed.
    pub fn range(&self) -> Option<(f64, f64)> {
        match &self.repr {
            Repr::Linear { .. } => Some((f64::NEG_INFINITY, f64::INFINITY)),
            Repr::Saturating { .. } | Repr::Arctan { .. } => Some((-1.0, 1.0)),
            Repr::Custom(c) => c.range,
        }
    }

    fn analytic_inverse(&self, y: f64) -> Option<f64> {
        match self.repr {
            Repr::Linear { beta } => Some(y / beta),
            Repr::Saturating { beta, a } => {
                let m = y.abs();
                let s = if a == 1.0 {
                    m / (1.0 - m)
                } else {
                    m / (1.0 - m.powf(a)).powf(1.0 / a)
                };
                Some(y.signum() * s / beta)
            }
            Repr::Arctan { beta } => Some((0.5 * PI * y).tan() / arctan_scale(beta)),
            Repr::Custom(_) => None,
        }
    }

    /// Checks `h' > 0` at `samples` evenly spaced points of `[-extent, extent]`.
    pub fn check_monotone(&self, extent: f64, samples: usize) -> Result<()> {
        let n = samples.max(2);
        for i in 0..n {
            let t = -extent + 2.0 * extent * i as f64 / (n - 1) as f64;
            let d = self.derivative(t);
            if !(d > 0.0 && d.is_finite()) {
                return Err(invalid(
                    "response",
                    format!("must be strictly increasing, derivative at T = {t} is {d}"),
                ));
            }
        }
        Ok(())
    }
}

fn saturation_denominator(s: f64, a: f64) -> f64 {
    if a == 1.0 {
        1.0 + s
    } else {
        (1.0 + s.powf(a)).powf(1.0 / a)
    }
}

fn arctan_scale(beta: f64) -> f64 {
    0.5 * PI * beta
}

/// `x atan(x) - ln(1 + x^2) / 2`, accurate near zero.
fn x_atan_minus_half_log(x: f64) -> f64 {
    if x.abs() < 0.1 {
        // sum_n (-1)^n x^(2n+2) / ((2n+1)(2n+2))
        let x2 = x * x;
        let mut term = x2;
        let mut sum = 0.0;
        for n in 0..12 {
            let n = n as f64;
            sum += term / ((2.0 * n + 1.0) * (2.0 * n + 2.0));
            term *= -x2;
        }
        sum
    } else {
        x * x.atan() - 0.5 * (x * x).ln_1p()
    }
}

/// `x - ln(1 + x)` for `x >= 0`, accurate near zero.
fn x_minus_log1p(x: f64) -> f64 {
    if x < 0.1 {
        let mut term = x * x;
        let mut sum = 0.0;
        for n in 2..20 {
            sum += term / n as f64;
            term *= -x;
        }
        sum
    } else {
        x - x.ln_1p()
    }
}

fn saturating_antiderivative(beta: f64, a: f64, m: f64) -> f64 {
    let s = beta * m;
    if a == 1.0 {
        x_minus_log1p(s) / beta
    } else if a == 2.0 {
        s * s / ((1.0 + s * s).sqrt() + 1.0) / beta
    } else {
        // integral_0^s u / (1 + u^a)^(1/a) du, scaled back to T
        let integrand = move |u: f64| u / (1.0 + u.powf(a)).powf(1.0 / a);
        let tol = 1e-15 * (1.0 + s * s);
        adaptive_simpson(&integrand, 0.0, s, tol) / beta
    }
}

/// Tangent slope of the response; in the elastic limit this is the
/// instantaneous compliance `-rho d^2 G / dT^2`.
pub fn compliance(h: &ConstitutiveFunction, t: f64) -> f64 {
    h.derivative(t)
}

/// Solves `h(T) = y` to `|h(T) - y| < 1e-12 max(1, |y|)`.
///
/// Fails with [`Error::OutOfRange`] when `y` is not attained, e.g. a strain
/// beyond the limiting value of a saturating response.
pub fn invert(h: &ConstitutiveFunction, y: f64) -> Result<f64> {
    check_in_range(h, y)?;
    let tol = inversion_tolerance(y);
    if let Some(x) = h.analytic_inverse(y) {
        if x.is_finite() {
            if (h.value(x) - y).abs() < tol {
                return Ok(x);
            }
            let x = newton_polish(h, y, x, tol);
            if (h.value(x) - y).abs() < tol {
                return Ok(x);
            }
        }
    }
    invert_by_bracketing(h, y)
}

/// Bracketing bisection refined by safeguarded Newton steps. Used for custom
/// responses and as the fallback for the catalog.
pub fn invert_by_bracketing(h: &ConstitutiveFunction, y: f64) -> Result<f64> {
    check_in_range(h, y)?;
    if y == 0.0 {
        return Ok(0.0);
    }
    let tol = inversion_tolerance(y);
    let out_of_range = || {
        let (lower, upper) = h.range().unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
        Error::OutOfRange {
            value: y,
            lower,
            upper,
        }
    };

    // h(0) = 0 and h increasing: grow the bracket away from zero towards y.
    let dir = y.signum();
    let (mut lo, mut hi) = (0.0_f64, dir);
    let mut steps = 0;
    while dir * (h.value(hi) - y) < 0.0 {
        lo = hi;
        hi *= 2.0;
        steps += 1;
        if steps > 1100 || !hi.is_finite() {
            return Err(out_of_range());
        }
    }
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..400 {
        let r = h.value(x) - y;
        if r.abs() < tol {
            return Ok(x);
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let d = h.derivative(x);
        let newton = x - r / d;
        x = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            break;
        }
    }
    if (h.value(x) - y).abs() < tol || hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
        Ok(x)
    } else {
        Err(out_of_range())
    }
}

fn inversion_tolerance(y: f64) -> f64 {
    1e-12 * y.abs().max(1.0)
}

fn check_in_range(h: &ConstitutiveFunction, y: f64) -> Result<()> {
    let (lower, upper) = h.range().unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    if y.is_finite() && y > lower && y < upper {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            value: y,
            lower,
            upper,
        })
    }
}

fn newton_polish(h: &ConstitutiveFunction, y: f64, mut x: f64, tol: f64) -> f64 {
    for _ in 0..4 {
        let r = h.value(x) - y;
        if r.abs() < tol {
            break;
        }
        let d = h.derivative(x);
        if !(d > 0.0) {
            break;
        }
        x -= r / d;
    }
    x
}

/// Complementary free energy `phi_c` and Gibbs energy `G` per unit mass.
#[derive(Clone)]
pub struct PotentialPair {
    phi_c: ScalarFn,
    gibbs: ScalarFn,
    rho: f64,
    source: Option<ConstitutiveFunction>,
}

impl fmt::Debug for PotentialPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialPair")
            .field("rho", &self.rho)
            .field("source", &self.source)
            .finish_non_exhaustive()
    }
}

impl PotentialPair {
    pub fn new(phi_c: ScalarFn, gibbs: ScalarFn, rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(invalid("rho", format!("must be positive, got {rho}")));
        }
        let p0 = phi_c(0.0);
        if !(p0.abs() <= 1e-14) {
            return Err(invalid("phi_c", format!("must vanish at T = 0, got {p0}")));
        }
        Ok(Self {
            phi_c,
            gibbs,
            rho,
            source: None,
        })
    }

    /// Elastic material: the Gibbs energy is the negative of `phi_c`.
    pub fn elastic(phi_c: ScalarFn, rho: f64) -> Result<Self> {
        let phi = phi_c.clone();
        Self::new(phi_c, Arc::new(move |t| -phi(t)), rho)
    }

    /// Potentials generating a catalog response: `rho phi_c = H`, `G = -phi_c`.
    pub fn from_response(h: &ConstitutiveFunction, rho: f64) -> Result<Self> {
        let (h1, h2) = (h.clone(), h.clone());
        let mut pair = Self::new(
            Arc::new(move |t| h1.antiderivative(t) / rho),
            Arc::new(move |t| -h2.antiderivative(t) / rho),
            rho,
        )?;
        pair.source = Some(h.clone());
        Ok(pair)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn phi_c(&self, t: f64) -> f64 {
        (self.phi_c)(t)
    }

    pub fn gibbs(&self, t: f64) -> f64 {
        (self.gibbs)(t)
    }

    /// `|phi_c + G|`, zero for an elastic material.
    pub fn elastic_limit_gap(&self, t: f64) -> f64 {
        (self.phi_c(t) + self.gibbs(t)).abs()
    }

    /// `C = -rho d^2 G / dT^2` by centered second differences.
    pub fn gibbs_compliance(&self, t: f64) -> f64 {
        if let Some(h) = &self.source {
            return h.derivative(t);
        }
        let d = f64::EPSILON.powf(0.25) * t.abs().max(1.0);
        -self.rho * (self.gibbs(t + d) - 2.0 * self.gibbs(t) + self.gibbs(t - d)) / (d * d)
    }
}

fn cbrt_eps_step(t: f64) -> f64 {
    f64::EPSILON.cbrt() * t.abs().max(1.0)
}

/// `rho dphi_c/dT` at `t`, checking the potential is differentiable there.
pub fn derivative_from_potential(p: &PotentialPair, t: f64) -> Result<f64> {
    if let Some(h) = &p.source {
        return Ok(h.value(t));
    }
    let fail = |reason: String| Error::NumericalDerivative { at: t, reason };
    let d = cbrt_eps_step(t);
    let one_sided = |step: f64| -> Result<(f64, f64)> {
        let f0 = p.phi_c(t);
        let fp = p.phi_c(t + step);
        let fm = p.phi_c(t - step);
        if !(f0.is_finite() && fp.is_finite() && fm.is_finite()) {
            return Err(fail("potential is not finite near this point".into()));
        }
        Ok(((fp - f0) / step, (f0 - fm) / step))
    };
    let (right, left) = one_sided(d)?;
    let (right_fine, left_fine) = one_sided(0.25 * d)?;
    let central = 0.5 * (right + left);
    let gap = (right - left).abs();
    let gap_fine = (right_fine - left_fine).abs();
    // Smooth potentials: the one-sided gap shrinks linearly with the step.
    // A kink leaves a gap that does not shrink.
    if gap_fine > 1e-6 * central.abs().max(1.0) && gap_fine > 0.5 * gap {
        return Err(fail(format!(
            "one-sided slopes disagree ({} vs {})",
            left_fine, right_fine
        )));
    }
    Ok(p.rho * central)
}

/// Response generated by a potential: `h(T) = rho dphi_c/dT`.
///
/// Catalog-backed potentials return their analytic response; others are
/// differentiated numerically with step `eps^(1/3) max(1, |T|)`. The reference
/// state `T = 0` is checked for differentiability here; use
/// [`derivative_from_potential`] for checked evaluation elsewhere.
pub fn response_from_potential(p: &PotentialPair) -> Result<ConstitutiveFunction> {
    if let Some(h) = &p.source {
        return Ok(h.clone());
    }
    let h0 = derivative_from_potential(p, 0.0)?;
    if h0.abs() > 1e-9 {
        return Err(invalid(
            "phi_c",
            format!("generated response must vanish at T = 0, got {h0}"),
        ));
    }
    let rho = p.rho;
    let (pv, pd, pa) = (p.phi_c.clone(), p.phi_c.clone(), p.phi_c.clone());
    let value: ScalarFn = Arc::new(move |t| {
        let d = cbrt_eps_step(t);
        rho * (pv(t + d) - pv(t - d)) / (2.0 * d)
    });
    let derivative: ScalarFn = Arc::new(move |t| {
        let d = f64::EPSILON.powf(0.25) * t.abs().max(1.0);
        rho * (pd(t + d) - 2.0 * pd(t) + pd(t - d)) / (d * d)
    });
    let antiderivative: ScalarFn = Arc::new(move |t| rho * pa(t));
    // Rounding in the difference quotient leaves h(0) at the 1e-11 level, so
    // the exact-zero check of `custom` is replaced by the one above.
    Ok(ConstitutiveFunction {
        repr: Repr::Custom(Arc::new(CustomResponse {
            value,
            derivative,
            antiderivative,
            range: None,
        })),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationSample {
    pub t: f64,
    pub stress: f64,
    pub stress_rate: f64,
    /// `gamma * T_t^2`
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DissipationAudit {
    pub gamma: f64,
    pub samples: Vec<DissipationSample>,
    pub min_rate: f64,
    /// Time integral of the rate.
    pub total_dissipation: f64,
}

impl DissipationAudit {
    pub const TOLERANCE: f64 = 1e-12;

    pub fn passes(&self) -> bool {
        self.min_rate >= -Self::TOLERANCE
    }
}

/// Rate of dissipation `gamma T_t^2` along a stress history `(t, T)`.
pub fn audit_dissipation(gamma: f64, history: &[(f64, f64)]) -> Result<DissipationAudit> {
    if !gamma.is_finite() {
        return Err(invalid("gamma", format!("must be finite, got {gamma}")));
    }
    if history.len() < 3 {
        return Err(Error::InvalidHistory(format!(
            "need at least 3 samples, got {}",
            history.len()
        )));
    }
    if let Some(i) = history.windows(2).position(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::InvalidHistory(format!(
            "time stamps must be strictly increasing (sample {} -> {})",
            i,
            i + 1
        )));
    }
    if history
        .iter()
        .any(|(t, s)| !(t.is_finite() && s.is_finite()))
    {
        return Err(Error::InvalidHistory("non-finite sample".into()));
    }
    let t: Vec<f64> = history.iter().map(|s| s.0).collect();
    let stress: Vec<f64> = history.iter().map(|s| s.1).collect();
    let rates = sampled_derivative(&t, &stress);
    let samples: Vec<DissipationSample> = history
        .iter()
        .zip(&rates)
        .map(|(&(t, stress), &stress_rate)| DissipationSample {
            t,
            stress,
            stress_rate,
            rate: gamma * stress_rate * stress_rate,
        })
        .collect();
    let rate_values: Vec<f64> = samples.iter().map(|s| s.rate).collect();
    let min_rate = rate_values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(DissipationAudit {
        gamma,
        min_rate,
        total_dissipation: trapezoid(&t, &rate_values),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog() -> Vec<ConstitutiveFunction> {
        vec![
            ConstitutiveFunction::linear(1.0).unwrap(),
            ConstitutiveFunction::linear(0.3).unwrap(),
            ConstitutiveFunction::saturating(1.0, 1.0).unwrap(),
            ConstitutiveFunction::saturating(2.5, 1.0).unwrap(),
            ConstitutiveFunction::saturating(1.0, 2.0).unwrap(),
            ConstitutiveFunction::saturating(0.7, 1.5).unwrap(),
            ConstitutiveFunction::saturating(1.3, 3.0).unwrap(),
            ConstitutiveFunction::arctan(1.0).unwrap(),
            ConstitutiveFunction::arctan(0.4).unwrap(),
        ]
    }

    #[test]
    fn linear_example() {
        let h = ConstitutiveFunction::linear(1.0).unwrap();
        assert_eq!(h.value(5.0), 5.0);
        assert_eq!(h.derivative(5.0), 1.0);
        assert_eq!(h.antiderivative(5.0), 12.5);
    }

    #[test]
    fn saturating_example() {
        let h = ConstitutiveFunction::saturating(1.0, 1.0).unwrap();
        assert_eq!(h.value(1.0), 0.5);
        assert!((h.antiderivative(1.0) - (1.0 - 2f64.ln())).abs() < 1e-15);
        assert!((h.antiderivative(1.0) - 0.306853).abs() < 1e-6);
    }

    #[test]
    fn every_member_vanishes_at_zero() {
        for h in catalog() {
            assert_eq!(h.value(0.0), 0.0, "{h:?}");
            assert_eq!(h.antiderivative(0.0), 0.0, "{h:?}");
        }
    }

    #[test]
    fn slope_at_zero_is_beta() {
        for h in catalog() {
            assert!((h.derivative(0.0) - h.beta()).abs() < 1e-15, "{h:?}");
        }
    }

    #[test]
    fn bounded_members_stay_below_one() {
        for h in catalog()
            .into_iter()
            .filter(|h| h.kind() != ResponseKind::Linear)
        {
            for t in [10.0, 1e2, -1e3] {
                assert!(h.value(t).abs() < 1.0, "{h:?} at {t}");
            }
            // Far out the value rounds to the bound but never exceeds it.
            for t in [1e6, -1e9, 1e300] {
                assert!(h.value(t).abs() <= 1.0, "{h:?} at {t}");
            }
        }
    }

    #[test]
    fn antiderivative_matches_numerical_quadrature() {
        for h in catalog() {
            for t in [-7.0, -0.05, 0.01, 0.8, 3.0] {
                let q = adaptive_simpson(&|s| h.value(s), 0.0, t, 1e-13);
                let got = h.antiderivative(t);
                assert!(
                    (got - q).abs() < 1e-10 * (1.0 + q.abs()),
                    "{h:?} at {t}: {got} vs {q}"
                );
            }
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(make_constitutive(ResponseKind::Linear, 0.0, 1.0).is_err());
        assert!(make_constitutive(ResponseKind::Saturating, 1.0, 0.0).is_err());
        assert!(make_constitutive(ResponseKind::Arctan, -1.0, 1.0).is_err());
        assert!(make_constitutive(ResponseKind::Custom, 1.0, 1.0).is_err());
    }

    #[test]
    fn compliance_examples() {
        let lin = ConstitutiveFunction::linear(1.0).unwrap();
        assert_eq!(compliance(&lin, -3.0), 1.0);
        let sat = ConstitutiveFunction::saturating(1.0, 1.0).unwrap();
        assert_eq!(compliance(&sat, 0.0), 1.0);
        assert_eq!(compliance(&sat, 1.0), 0.25);
    }

    #[test]
    fn inversion_examples() {
        let lin = ConstitutiveFunction::linear(1.0).unwrap();
        assert_eq!(invert(&lin, 0.7).unwrap(), 0.7);
        let sat = ConstitutiveFunction::saturating(1.0, 1.0).unwrap();
        assert!((invert(&sat, 0.5).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(invert(&sat, 1.0), Err(Error::OutOfRange { .. })));
        assert!(matches!(invert(&sat, -1.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(
            invert(&sat, f64::NAN),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn bracketing_path_agrees_with_closed_forms() {
        for h in catalog() {
            for y in [-0.9, -0.3, 0.0, 1e-9, 0.5, 0.99] {
                let a = invert(&h, y).unwrap();
                let b = invert_by_bracketing(&h, y).unwrap();
                assert!((h.value(b) - y).abs() < 1e-12, "{h:?} at {y}");
                assert!(
                    (a - b).abs() < 1e-9 * (1.0 + a.abs()),
                    "{h:?} at {y}: {a} vs {b}"
                );
            }
        }
    }

    fn cubic_custom(range: Option<(f64, f64)>) -> ConstitutiveFunction {
        ConstitutiveFunction::custom(CustomResponse {
            value: Arc::new(|t| t + t * t * t),
            derivative: Arc::new(|t| 1.0 + 3.0 * t * t),
            antiderivative: Arc::new(|t| 0.5 * t * t + 0.25 * t.powi(4)),
            range,
        })
        .unwrap()
    }

    #[test]
    fn custom_inversion_by_bracketing() {
        let h = cubic_custom(None);
        let t = invert(&h, 10.0).unwrap();
        assert!((t - 2.0).abs() < 1e-12);
        let t = invert(&h, -1e6).unwrap();
        assert!((h.value(t) + 1e6).abs() < 1e-6);
    }

    #[test]
    fn custom_must_vanish_at_zero() {
        let res = ConstitutiveFunction::custom(CustomResponse {
            value: Arc::new(|t| t + 1.0),
            derivative: Arc::new(|_| 1.0),
            antiderivative: Arc::new(|t| 0.5 * t * t + t),
            range: None,
        });
        assert!(res.is_err());
    }

    #[test]
    fn unbounded_custom_out_of_range() {
        let h = ConstitutiveFunction::custom(CustomResponse {
            value: Arc::new(|t: f64| t.tanh()),
            derivative: Arc::new(|t: f64| 1.0 / t.cosh().powi(2)),
            antiderivative: Arc::new(|t: f64| t.cosh().ln()),
            range: None,
        })
        .unwrap();
        assert!(matches!(invert(&h, 1.5), Err(Error::OutOfRange { .. })));
        assert!((h.value(invert(&h, 0.5).unwrap()) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn quadratic_potential_gives_linear_response() {
        let rho = 2.0;
        let p = PotentialPair::elastic(Arc::new(move |t| t * t / (2.0 * rho)), rho).unwrap();
        let h = response_from_potential(&p).unwrap();
        for t in [-3.0, -0.5, 0.0, 0.25, 4.0] {
            assert!((h.value(t) - t).abs() < 1e-9, "{t}: {}", h.value(t));
        }
    }

    #[test]
    fn log_potential_gives_saturating_response() {
        let p = PotentialPair::elastic(Arc::new(|t: f64| t - t.ln_1p()), 1.0).unwrap();
        let h = response_from_potential(&p).unwrap();
        for t in [0.0, 0.5, 1.0, 3.0, 10.0] {
            let want = t / (1.0 + t);
            assert!((h.value(t) - want).abs() < 1e-10, "{t}");
        }
    }

    #[test]
    fn constant_potential_gives_zero_response() {
        // phi_c must vanish at zero, so the constant is zero.
        let p = PotentialPair::elastic(Arc::new(|_| 0.0), 1.0).unwrap();
        let h = response_from_potential(&p).unwrap();
        for t in [-2.0, 0.0, 5.0] {
            assert_eq!(h.value(t), 0.0);
        }
    }

    #[test]
    fn potential_must_vanish_at_zero() {
        assert!(PotentialPair::elastic(Arc::new(|_| 1.0), 1.0).is_err());
        // phi_c(0) = 0 but h(0) = 1
        let p = PotentialPair::elastic(Arc::new(|t: f64| t + 0.5 * t * t), 1.0).unwrap();
        assert!(response_from_potential(&p).is_err());
    }

    #[test]
    fn kinked_potential_is_rejected() {
        let p = PotentialPair::elastic(Arc::new(|t: f64| t.abs()), 1.0).unwrap();
        assert!(matches!(
            response_from_potential(&p),
            Err(Error::NumericalDerivative { .. })
        ));
        let p = PotentialPair::elastic(Arc::new(|t: f64| (t - 1.0).abs() - 1.0), 1.0).unwrap();
        assert!(derivative_from_potential(&p, 0.5).is_ok());
        assert!(matches!(
            derivative_from_potential(&p, 1.0),
            Err(Error::NumericalDerivative { .. })
        ));
    }

    #[test]
    fn elastic_potentials_satisfy_gibbs_identity() {
        for h in catalog() {
            let p = PotentialPair::from_response(&h, 1.7).unwrap();
            for i in -40..=40 {
                let t = 0.25 * i as f64;
                assert!(p.elastic_limit_gap(t) <= 1e-12);
                assert!((p.rho() * p.phi_c(t) - h.antiderivative(t)).abs() < 1e-12);
            }
            assert!((p.gibbs_compliance(0.3) - h.derivative(0.3)).abs() < 1e-15);
        }
    }

    #[test]
    fn numerical_gibbs_compliance() {
        let sat = ConstitutiveFunction::saturating(1.0, 1.0).unwrap();
        let h = sat.clone();
        let p = PotentialPair::elastic(Arc::new(move |t| h.antiderivative(t)), 1.0).unwrap();
        assert!((p.gibbs_compliance(1.0) - 0.25).abs() < 1e-6);
    }

    #[test]
    fn audit_elastic_dissipates_nothing() {
        let hist: Vec<(f64, f64)> = (0..50)
            .map(|i| (i as f64 * 0.1, (i as f64).sin()))
            .collect();
        let audit = audit_dissipation(0.0, &hist).unwrap();
        assert!(audit.samples.iter().all(|s| s.rate == 0.0));
        assert!(audit.passes());
    }

    #[test]
    fn audit_constant_stress() {
        let hist: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 2.0)).collect();
        let audit = audit_dissipation(0.1, &hist).unwrap();
        assert!(audit.samples.iter().all(|s| s.rate.abs() < 1e-15));
        assert!(audit.passes());
    }

    #[test]
    fn audit_linear_ramp() {
        let hist: Vec<(f64, f64)> = (0..=100)
            .map(|i| {
                let t = i as f64 * 0.01;
                (t, 3.0 * t)
            })
            .collect();
        let audit = audit_dissipation(0.1, &hist).unwrap();
        for s in &audit.samples {
            assert!((s.rate - 0.9).abs() < 1e-9, "{s:?}");
        }
        assert!((audit.total_dissipation - 0.9).abs() < 1e-9);
    }

    #[test]
    fn audit_rejects_bad_histories() {
        assert!(matches!(
            audit_dissipation(0.1, &[(0.0, 1.0), (1.0, 2.0)]),
            Err(Error::InvalidHistory(_))
        ));
        assert!(matches!(
            audit_dissipation(0.1, &[(0.0, 1.0), (1.0, 2.0), (1.0, 3.0)]),
            Err(Error::InvalidHistory(_))
        ));
    }

    #[test]
    fn negative_gamma_fails_audit() {
        let hist: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, i as f64)).collect();
        assert!(!audit_dissipation(-0.1, &hist).unwrap().passes());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn member() -> impl Strategy<Value = ConstitutiveFunction> {
            (0usize..3, 0.1f64..4.0, 1usize..4).prop_map(|(kind, beta, a)| match kind {
                0 => ConstitutiveFunction::linear(beta).unwrap(),
                1 => ConstitutiveFunction::saturating(beta, a as f64).unwrap(),
                _ => ConstitutiveFunction::arctan(beta).unwrap(),
            })
        }

        proptest! {
            #[test]
            fn invert_undoes_value(h in member(), t in -3.0f64..3.0) {
                let y = h.value(t);
                let back = invert(&h, y).unwrap();
                prop_assert!((h.value(back) - y).abs() <= 1e-12 * y.abs().max(1.0));
            }

            #[test]
            fn response_is_increasing(h in member(), t in -5.0f64..5.0, dt in 1e-3f64..1.0) {
                prop_assert!(h.value(t + dt) > h.value(t));
                prop_assert!(h.derivative(t) > 0.0);
            }

            #[test]
            fn nonnegative_gamma_always_passes_audit(
                gamma in 0.0f64..10.0,
                values in prop::collection::vec(-5.0f64..5.0, 3..40),
            ) {
                let hist: Vec<(f64, f64)> = values.iter().enumerate().map(|(i, &v)| (0.1 * i as f64, v)).collect();
                prop_assert!(audit_dissipation(gamma, &hist).unwrap().passes());
            }
        }
    }
}
