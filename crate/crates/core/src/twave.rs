//! Traveling waves `T(x - c t)` shared by both rate models.
//!
//! Substituting `xi = x - c t` into either equation of motion and integrating
//! twice with vanishing derivatives at infinity gives the first-order ODE
//!
//! `kappa T' = T - c^2 f(T) - A2`
//!
//! with `f = h, kappa = gamma c^3` for the stress-rate model and
//! `f = g, kappa = nu c` for the strain-rate model. A kink is a monotone
//! connection between two zeros of the right-hand side.

use ode_solvers::continuous_output_model::ContinuousOutputModel;
use ode_solvers::{Dopri5, System, Vector1};

use crate::constitutive::ConstitutiveFunction;
use crate::error::{invalid, Error, Result};
use crate::params::Variant;

/// Subintervals used by the interior-zero scan.
pub const SCAN_INTERVALS: usize = 10_000;
/// Bisection stopping width for interior zeros.
pub const ZERO_TOLERANCE: f64 = 1e-12;
/// Profile values this close to an equilibrium are snapped onto it.
pub const CLAMP_TOLERANCE: f64 = 1e-10;
/// Required closeness of the profile ends to the equilibria.
pub const END_TOLERANCE: f64 = 1e-6;

const RTOL: f64 = 1e-12;
const ATOL: f64 = 1e-14;

/// Returns `(c^2, A2)` for the equilibria `t_minus`, `t_plus`.
pub fn wave_speed(f: &ConstitutiveFunction, t_minus: f64, t_plus: f64) -> Result<(f64, f64)> {
    if !(t_minus.is_finite() && t_plus.is_finite()) {
        return Err(invalid("equilibria", "must be finite"));
    }
    if t_minus == t_plus {
        return Err(Error::DegenerateEquilibria(format!(
            "T_minus = T_plus = {t_minus}"
        )));
    }
    let (f_minus, f_plus) = (f.value(t_minus), f.value(t_plus));
    if f_minus == f_plus {
        return Err(Error::DegenerateEquilibria(format!(
            "f(T_minus) = f(T_plus) = {f_minus}"
        )));
    }
    let c_squared = (t_plus - t_minus) / (f_plus - f_minus);
    if !(c_squared.is_finite() && c_squared > 0.0) {
        return Err(Error::NoRealSpeed { c_squared });
    }
    Ok((c_squared, t_minus - c_squared * f_minus))
}

/// `kappa` of the reduced ODE for a variant moving at speed `c`.
pub fn unified_reduction_check(variant: Variant, coeff: f64, c: f64) -> Result<f64> {
    if !(c.is_finite() && c > 0.0) {
        return Err(invalid("c", format!("must be positive, got {c}")));
    }
    if !(coeff.is_finite() && coeff >= 0.0) {
        return Err(invalid(
            "coeff",
            format!("must be nonnegative, got {coeff}"),
        ));
    }
    let kappa = match variant {
        Variant::StressRate => coeff * c * c * c,
        Variant::StrainRate => coeff * c,
        Variant::Elastic => 0.0,
    };
    if kappa == 0.0 {
        return Err(Error::SingularLimit(format!(
            "kappa = 0 for {} with coefficient {coeff}; the first-order reduction degenerates",
            variant.name()
        )));
    }
    Ok(kappa)
}

#[derive(Clone)]
pub struct TravelingWaveProblem {
    pub f: ConstitutiveFunction,
    pub t_minus: f64,
    pub t_plus: f64,
    pub kappa: f64,
    pub c: f64,
    pub a2: f64,
}

impl std::fmt::Debug for TravelingWaveProblem {
    fn fmt(&self, fmt: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fmt.debug_struct("TravelingWaveProblem")
            .field("f", &self.f.kind())
            .field("t_minus", &self.t_minus)
            .field("t_plus", &self.t_plus)
            .field("kappa", &self.kappa)
            .field("c", &self.c)
            .field("a2", &self.a2)
            .finish()
    }
}

impl TravelingWaveProblem {
    /// Right-moving wave (`c > 0`) with an explicit `kappa`.
    pub fn new(f: ConstitutiveFunction, t_minus: f64, t_plus: f64, kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa != 0.0) {
            return Err(invalid(
                "kappa",
                format!("must be finite and nonzero, got {kappa}"),
            ));
        }
        let (c_squared, a2) = wave_speed(&f, t_minus, t_plus)?;
        Ok(Self {
            f,
            t_minus,
            t_plus,
            kappa,
            c: c_squared.sqrt(),
            a2,
        })
    }

    /// Problem whose `kappa` follows from the variant and its rate coefficient.
    pub fn for_variant(
        f: ConstitutiveFunction,
        variant: Variant,
        coeff: f64,
        t_minus: f64,
        t_plus: f64,
    ) -> Result<Self> {
        let (c_squared, _) = wave_speed(&f, t_minus, t_plus)?;
        let kappa = unified_reduction_check(variant, coeff, c_squared.sqrt())?;
        Self::new(f, t_minus, t_plus, kappa)
    }

    pub fn c_squared(&self) -> f64 {
        self.c * self.c
    }

    /// `T - c^2 f(T) - A2`.
    pub fn residual_function(&self, t: f64) -> f64 {
        t - self.c_squared() * self.f.value(t) - self.a2
    }

    /// Slope `T'` of the reduced ODE.
    pub fn slope(&self, t: f64) -> f64 {
        self.residual_function(t) / self.kappa
    }

    /// Swaps the equilibria and reverses `xi`, which flips the signs of `c` and `kappa`.
    pub fn reflected(&self) -> Self {
        Self {
            f: self.f.clone(),
            t_minus: self.t_plus,
            t_plus: self.t_minus,
            kappa: -self.kappa,
            c: -self.c,
            a2: self.a2,
        }
    }

    fn bounds(&self) -> (f64, f64) {
        (self.t_minus.min(self.t_plus), self.t_minus.max(self.t_plus))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// `T` increases with `xi`.
    Increasing,
    /// `T` decreases with `xi`.
    Decreasing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KinkExistence {
    pub exists: bool,
    /// Direction of the connection along increasing `xi`, when one exists.
    pub orientation: Option<Orientation>,
    /// Whether the connection runs from `t_minus` at `-inf` to `t_plus` at `+inf`.
    pub connects_minus_to_plus: bool,
    pub interior_zeros: Vec<f64>,
    /// The right-hand side vanishes on the whole interval.
    pub degenerate: bool,
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    while hi - lo > ZERO_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Scans the open interval between the equilibria for zeros of the right-hand side.
pub fn kink_exists(problem: &TravelingWaveProblem) -> KinkExistence {
    let (lo, hi) = problem.bounds();
    let width = hi - lo;
    let rhs = |t: f64| problem.residual_function(t);
    let points: Vec<(f64, f64)> = (1..SCAN_INTERVALS)
        .map(|i| {
            let t = lo + width * i as f64 / SCAN_INTERVALS as f64;
            (t, rhs(t))
        })
        .collect();
    let scale = lo.abs().max(hi.abs()).max(1.0);
    let degenerate = points.iter().all(|&(_, r)| r.abs() <= 1e-12 * scale);
    if degenerate {
        return KinkExistence {
            exists: false,
            orientation: None,
            connects_minus_to_plus: false,
            interior_zeros: Vec::new(),
            degenerate: true,
        };
    }
    let mut interior_zeros = Vec::new();
    for (i, &(t, r)) in points.iter().enumerate() {
        if r == 0.0 {
            interior_zeros.push(t);
        } else if let Some(&(t_next, r_next)) = points.get(i + 1) {
            if r_next != 0.0 && (r < 0.0) != (r_next < 0.0) {
                interior_zeros.push(bisect(rhs, t, t_next));
            }
        }
    }
    if !interior_zeros.is_empty() {
        return KinkExistence {
            exists: false,
            orientation: None,
            connects_minus_to_plus: false,
            interior_zeros,
            degenerate: false,
        };
    }
    let orientation = if points[0].1 / problem.kappa > 0.0 {
        Orientation::Increasing
    } else {
        Orientation::Decreasing
    };
    let increasing_target = problem.t_plus > problem.t_minus;
    KinkExistence {
        exists: true,
        orientation: Some(orientation),
        connects_minus_to_plus: (orientation == Orientation::Increasing) == increasing_target,
        interior_zeros,
        degenerate: false,
    }
}

/// Sampled kink, centered so that `T(center)` is the midpoint of the equilibria.
#[derive(Debug, Clone)]
pub struct KinkProfile {
    pub samples: Vec<(f64, f64)>,
    pub problem: TravelingWaveProblem,
}

impl KinkProfile {
    pub fn xi(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.1).collect()
    }

    /// Cubic Hermite interpolation using the ODE slope at each sample.
    /// Constant extension outside the sampled span.
    pub fn eval(&self, xi: f64) -> f64 {
        let s = &self.samples;
        let (first, last) = (s[0], s[s.len() - 1]);
        if xi <= first.0 {
            return first.1;
        }
        if xi >= last.0 {
            return last.1;
        }
        let j = s.partition_point(|p| p.0 <= xi).clamp(1, s.len() - 1);
        let ((x0, y0), (x1, y1)) = (s[j - 1], s[j]);
        let h = x1 - x0;
        let u = (xi - x0) / h;
        let (m0, m1) = (self.problem.slope(y0), self.problem.slope(y1));
        let u2 = u * u;
        let u3 = u2 * u;
        (2.0 * u3 - 3.0 * u2 + 1.0) * y0
            + (u3 - 2.0 * u2 + u) * h * m0
            + (-2.0 * u3 + 3.0 * u2) * y1
            + (u3 - u2) * h * m1
    }
}

struct ReducedOde<'a> {
    problem: &'a TravelingWaveProblem,
    direction: f64,
}

impl System<f64, Vector1<f64>> for ReducedOde<'_> {
    fn system(&self, _s: f64, y: &Vector1<f64>, dy: &mut Vector1<f64>) {
        dy[0] = self.direction * self.problem.slope(y[0]);
    }
}

/// Integrates from the midpoint out to `length` along `direction = +-1` in `xi`.
fn integrate_branch(
    problem: &TravelingWaveProblem,
    start: f64,
    direction: f64,
    length: f64,
) -> Result<ContinuousOutputModel<f64, Vector1<f64>>> {
    let mut model = ContinuousOutputModel::new();
    if length <= 0.0 {
        return Ok(model);
    }
    let system = ReducedOde { problem, direction };
    let mut solver = Dopri5::new(system, 0.0, length, length, Vector1::new(start), RTOL, ATOL);
    solver
        .integrate_with_continuous_output_model(&mut model)
        .map_err(|e| Error::NoKink(format!("profile integration failed: {e}")))?;
    Ok(model)
}

/// Kink sampled at `n_samples` uniform points of `xi_span`, with `T(0)` at the midpoint.
pub fn kink_profile(
    problem: &TravelingWaveProblem,
    xi_span: (f64, f64),
    n_samples: usize,
) -> Result<KinkProfile> {
    kink_profile_centered(problem, xi_span, n_samples, 0.0)
}

/// As [`kink_profile`] with the midpoint placed at `center`.
pub fn kink_profile_centered(
    problem: &TravelingWaveProblem,
    xi_span: (f64, f64),
    n_samples: usize,
    center: f64,
) -> Result<KinkProfile> {
    let (xi_min, xi_max) = xi_span;
    if !(xi_min.is_finite() && xi_max.is_finite() && xi_min < center && center < xi_max) {
        return Err(invalid(
            "xi_span",
            format!("must bracket the center {center}, got [{xi_min}, {xi_max}]"),
        ));
    }
    if n_samples < 2 {
        return Err(invalid(
            "n_samples",
            format!("need at least 2, got {n_samples}"),
        ));
    }
    let existence = kink_exists(problem);
    if !existence.exists {
        let reason = if existence.degenerate {
            "right-hand side vanishes identically".to_string()
        } else {
            format!("interior equilibria at {:?}", existence.interior_zeros)
        };
        return Err(Error::NoKink(reason));
    }
    let (lo, hi) = problem.bounds();
    let (left_target, right_target) = match existence.orientation {
        Some(Orientation::Increasing) => (lo, hi),
        _ => (hi, lo),
    };
    let mid = 0.5 * (problem.t_minus + problem.t_plus);
    let right = integrate_branch(problem, mid, 1.0, xi_max - center)?;
    let left = integrate_branch(problem, mid, -1.0, center - xi_min)?;

    let dxi = (xi_max - xi_min) / (n_samples - 1) as f64;
    let mut samples = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let xi = if i == n_samples - 1 {
            xi_max
        } else {
            xi_min + i as f64 * dxi
        };
        let s = xi - center;
        let raw = if s >= 0.0 {
            right.evaluate(s)
        } else {
            left.evaluate(-s)
        };
        let mut t = raw.map(|v| v[0]).unwrap_or(mid);
        for eq in [lo, hi] {
            if (t - eq).abs() < CLAMP_TOLERANCE {
                t = eq;
            }
        }
        samples.push((xi, t));
    }
    for (&(xi, t), target) in [
        (samples.first().unwrap(), left_target),
        (samples.last().unwrap(), right_target),
    ] {
        if (t - target).abs() > END_TOLERANCE {
            return Err(Error::SpanTooShort {
                xi,
                reached: t,
                target,
            });
        }
    }
    Ok(KinkProfile {
        samples,
        problem: problem.clone(),
    })
}

/// Five-point first and second derivatives of uniformly spaced samples,
/// at every sample with two neighbors on each side.
fn five_point(values: &[f64], h: f64) -> Vec<(usize, f64, f64)> {
    (2..values.len().saturating_sub(2))
        .map(|i| {
            let (a, b, c, d, e) = (
                values[i - 2],
                values[i - 1],
                values[i],
                values[i + 1],
                values[i + 2],
            );
            let d1 = (a - 8.0 * b + 8.0 * d - e) / (12.0 * h);
            let d2 = (-a + 16.0 * b - 30.0 * c + 16.0 * d - e) / (12.0 * h * h);
            (i, d1, d2)
        })
        .collect()
}

fn uniform_spacing(profile: &KinkProfile) -> f64 {
    let s = &profile.samples;
    (s[s.len() - 1].0 - s[0].0) / (s.len() - 1) as f64
}

/// `max |kappa T' - (T - c^2 f(T) - A2)|` with `T'` from finite differences of the samples.
pub fn profile_residual(profile: &KinkProfile) -> f64 {
    let p = &profile.problem;
    let t = profile.values();
    five_point(&t, uniform_spacing(profile))
        .into_iter()
        .map(|(i, d1, _)| (p.kappa * d1 - p.residual_function(t[i])).abs())
        .fold(0.0, f64::max)
}

/// `max |T' - kappa T'' - c^2 f(T)'|`, the once-integrated form.
pub fn second_order_residual(profile: &KinkProfile) -> f64 {
    let p = &profile.problem;
    let t = profile.values();
    let ft: Vec<f64> = t.iter().map(|&x| p.f.value(x)).collect();
    let h = uniform_spacing(profile);
    let df = five_point(&ft, h);
    five_point(&t, h)
        .into_iter()
        .zip(df)
        .map(|((_, d1, d2), (_, df1, _))| (d1 - p.kappa * d2 - p.c_squared() * df1).abs())
        .fold(0.0, f64::max)
}

/// Max difference between `a(xi)` and `b(xi kappa_b / kappa_a)` over the samples of `a`.
/// Profiles of the same `f` and equilibria coincide under this rescaling.
pub fn compare_rescaled_profiles(a: &KinkProfile, b: &KinkProfile) -> f64 {
    let ratio = b.problem.kappa / a.problem.kappa;
    a.samples
        .iter()
        .map(|&(xi, t)| (t - b.eval(xi * ratio)).abs())
        .fold(0.0, f64::max)
}
