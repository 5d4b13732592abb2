//! Method-of-lines simulation of `rho v_t = T_x`, `eps_t = v_x` closed by one
//! of the constitutive relations, with energy accounting.
//!
//! Unknowns per variant:
//!
//! * stress-rate: `(v, eps, T)` with `T_t = (h(T) - eps) / gamma`
//! * strain-rate: `(v, eps)`; `T = g^-1(eps + nu v_x)` is reconstructed at
//!   every right-hand-side evaluation and `eps_t = (g(T) - eps) / nu`
//! * elastic: `(v, eps)` with `T = h^-1(eps)`
//!
//! Spatial derivatives are second-order central differences, time stepping is
//! classical RK4. On periodic grids the semi-discrete energy satisfies the
//! continuous balance exactly because the central difference is skew-adjoint.

use crate::constitutive::{invert, ConstitutiveFunction};
use crate::error::{invalid, Error, Result};
use crate::grid::{Boundary, Field, Grid1D};
use crate::numerics::three_point_weights;
use crate::params::Variant;

/// Dimensionless model: variant, coefficients and the response function
/// (`h` for stress-rate and elastic, `g` for strain-rate).
#[derive(Debug, Clone)]
pub struct PdeModel {
    pub variant: Variant,
    pub rho: f64,
    pub nu: f64,
    pub gamma: f64,
    pub response: ConstitutiveFunction,
}

impl PdeModel {
    pub fn stress_rate(gamma: f64, h: ConstitutiveFunction) -> Self {
        Self {
            variant: Variant::StressRate,
            rho: 1.0,
            nu: 0.0,
            gamma,
            response: h,
        }
    }

    pub fn strain_rate(nu: f64, g: ConstitutiveFunction) -> Self {
        Self {
            variant: Variant::StrainRate,
            rho: 1.0,
            nu,
            gamma: 0.0,
            response: g,
        }
    }

    pub fn elastic(h: ConstitutiveFunction) -> Self {
        Self {
            variant: Variant::Elastic,
            rho: 1.0,
            nu: 0.0,
            gamma: 0.0,
            response: h,
        }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(invalid(
                "rho",
                format!("must be positive, got {}", self.rho),
            ));
        }
        match self.variant {
            Variant::StressRate if !(self.gamma.is_finite() && self.gamma > 0.0) => Err(invalid(
                "gamma",
                format!("stress_rate requires gamma > 0, got {}", self.gamma),
            )),
            Variant::StrainRate if !(self.nu.is_finite() && self.nu > 0.0) => Err(invalid(
                "nu",
                format!("strain_rate requires nu > 0, got {}", self.nu),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub v: Field,
    pub eps: Field,
    pub stress: Field,
}

impl SimState {
    pub fn new(t: f64, v: Field, eps: Field, stress: Field) -> Result<Self> {
        if v.grid() != eps.grid() || v.grid() != stress.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { t, v, eps, stress })
    }

    /// State with the given velocity and stress whose strain makes the
    /// constitutive relation hold with zero stress rate: `eps = h(T)` for
    /// stress-rate and elastic, `eps = g(T) - nu v_x` for strain-rate.
    pub fn relaxed(model: &PdeModel, t: f64, v: Field, stress: Field) -> Result<Self> {
        if v.grid() != stress.grid() {
            return Err(Error::GridMismatch);
        }
        let grid = *v.grid();
        let f = &model.response;
        let eps: Vec<f64> = match model.variant {
            Variant::StressRate | Variant::Elastic => {
                stress.values().iter().map(|&s| f.value(s)).collect()
            }
            Variant::StrainRate => {
                let mut vx = vec![0.0; grid.n_nodes()];
                grid.d1_into(v.values(), &mut vx);
                stress
                    .values()
                    .iter()
                    .zip(&vx)
                    .map(|(&s, &vx)| f.value(s) - model.nu * vx)
                    .collect()
            }
        };
        let eps = Field::new(grid, eps)?;
        let mut state = Self::new(t, v, eps, stress)?;
        if model.variant != Variant::StressRate {
            state.stress = Field::from_raw(
                grid,
                reconstruct_stress(model, &grid, state.v.values(), state.eps.values())?,
            );
        }
        Ok(state)
    }

    pub fn grid(&self) -> &Grid1D {
        self.v.grid()
    }
}

/// Time derivatives of the unknowns. `dstress` is `None` when the stress is
/// reconstructed rather than evolved.
#[derive(Debug, Clone, PartialEq)]
pub struct Rates {
    pub dv: Vec<f64>,
    pub deps: Vec<f64>,
    pub dstress: Option<Vec<f64>>,
}

/// Stress from `(v, eps)` for the variants that do not evolve it.
pub fn reconstruct_stress(
    model: &PdeModel,
    grid: &Grid1D,
    v: &[f64],
    eps: &[f64],
) -> Result<Vec<f64>> {
    let f = &model.response;
    let invert_at = |node: usize, y: f64| {
        invert(f, y).map_err(|_| Error::StrainLimitExceeded { node, value: y })
    };
    match model.variant {
        Variant::StrainRate => {
            let mut vx = vec![0.0; v.len()];
            grid.d1_into(v, &mut vx);
            eps.iter()
                .zip(&vx)
                .enumerate()
                .map(|(i, (&e, &vx))| invert_at(i, e + model.nu * vx))
                .collect()
        }
        Variant::Elastic => eps
            .iter()
            .enumerate()
            .map(|(i, &e)| invert_at(i, e))
            .collect(),
        Variant::StressRate => Err(invalid(
            "variant",
            "stress_rate evolves the stress directly",
        )),
    }
}

struct Workspace {
    stress: Vec<f64>,
    grad: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            stress: vec![0.0; n],
            grad: vec![0.0; n],
        }
    }
}

fn n_unknowns(variant: Variant, n: usize) -> usize {
    match variant {
        Variant::StressRate => 3 * n,
        Variant::StrainRate | Variant::Elastic => 2 * n,
    }
}

/// Right-hand side on the packed vector `[v | eps | T?]`.
fn packed_rates(
    model: &PdeModel,
    grid: &Grid1D,
    y: &[f64],
    out: &mut [f64],
    ws: &mut Workspace,
) -> Result<()> {
    let n = grid.n_nodes();
    let (v, tail) = y.split_at(n);
    let eps = &tail[..n];
    let (dv, rest) = out.split_at_mut(n);
    let (deps, dstress) = rest.split_at_mut(n);
    let f = &model.response;
    match model.variant {
        Variant::StressRate => {
            let stress = &tail[n..2 * n];
            grid.d1_into(stress, dv);
            grid.d1_into(v, deps);
            for i in 0..n {
                dv[i] /= model.rho;
                dstress[i] = (f.value(stress[i]) - eps[i]) / model.gamma;
            }
        }
        Variant::StrainRate => {
            ws.stress = reconstruct_stress(model, grid, v, eps)?;
            grid.d1_into(&ws.stress, &mut ws.grad);
            for i in 0..n {
                dv[i] = ws.grad[i] / model.rho;
                deps[i] = (f.value(ws.stress[i]) - eps[i]) / model.nu;
            }
        }
        Variant::Elastic => {
            ws.stress = reconstruct_stress(model, grid, v, eps)?;
            grid.d1_into(&ws.stress, dv);
            grid.d1_into(v, deps);
            for x in dv.iter_mut() {
                *x /= model.rho;
            }
        }
    }
    if grid.boundary() == Boundary::DirichletZero {
        let blocks = n_unknowns(model.variant, n) / n;
        for b in 0..blocks {
            out[b * n] = 0.0;
            out[b * n + n - 1] = 0.0;
        }
    }
    Ok(())
}

fn pack(model: &PdeModel, state: &SimState) -> Vec<f64> {
    let mut y = Vec::with_capacity(n_unknowns(model.variant, state.v.len()));
    y.extend_from_slice(state.v.values());
    y.extend_from_slice(state.eps.values());
    if model.variant == Variant::StressRate {
        y.extend_from_slice(state.stress.values());
    }
    y
}

fn rates_of(model: &PdeModel, state: &SimState) -> Result<Rates> {
    let grid = *state.grid();
    let n = grid.n_nodes();
    let y = pack(model, state);
    let mut out = vec![0.0; y.len()];
    packed_rates(model, &grid, &y, &mut out, &mut Workspace::new(n))?;
    let dstress = (model.variant == Variant::StressRate).then(|| out[2 * n..].to_vec());
    out.truncate(2 * n);
    let deps = out.split_off(n);
    Ok(Rates {
        dv: out,
        deps,
        dstress,
    })
}

/// `v_t = T_x / rho`, `eps_t = v_x`, `T_t = (h(T) - eps) / gamma`.
pub fn rhs_stress_rate(state: &SimState, model: &PdeModel) -> Result<Rates> {
    if model.variant != Variant::StressRate {
        return Err(invalid(
            "variant",
            "rhs_stress_rate needs the stress_rate variant",
        ));
    }
    model.validate()?;
    rates_of(model, state)
}

/// `v_t = T_x / rho`, `eps_t = (g(T) - eps) / nu` with `T = g^-1(eps + nu v_x)`.
pub fn rhs_strain_rate(state: &SimState, model: &PdeModel) -> Result<Rates> {
    if model.variant != Variant::StrainRate {
        return Err(invalid(
            "variant",
            "rhs_strain_rate needs the strain_rate variant",
        ));
    }
    model.validate()?;
    rates_of(model, state)
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_final: f64,
    pub output_stride: usize,
    /// `max |T|` above which a run is declared blown up.
    pub blow_up_threshold: f64,
    pub model: PdeModel,
}

impl SolverConfig {
    pub const DEFAULT_BLOW_UP_THRESHOLD: f64 = 1e12;

    pub fn new(model: PdeModel, dt: f64, t_final: f64) -> Self {
        Self {
            dt,
            t_final,
            output_stride: 1,
            blow_up_threshold: Self::DEFAULT_BLOW_UP_THRESHOLD,
            model,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.output_stride = stride;
        self
    }

    /// Largest admissible step on `grid` and the constraint that sets it.
    pub fn stability_ceiling(&self, grid: &Grid1D) -> (f64, &'static str) {
        let dx = grid.spacing();
        let advective = 0.5 * dx;
        match self.model.variant {
            Variant::StressRate if 0.5 * self.model.gamma < advective => {
                (0.5 * self.model.gamma, "dt <= 0.5 gamma")
            }
            Variant::StrainRate if 0.25 * dx * dx / self.model.nu < advective => {
                (0.25 * dx * dx / self.model.nu, "dt <= 0.25 dx^2 / nu")
            }
            _ => (advective, "dt <= 0.5 dx"),
        }
    }

    pub fn validate(&self, grid: &Grid1D) -> Result<()> {
        self.model.validate()?;
        if !(self.t_final.is_finite() && self.t_final > 0.0 && self.dt.is_finite() && self.dt > 0.0)
        {
            return Err(Error::InvalidStep {
                dt: self.dt,
                t_final: self.t_final,
            });
        }
        if self.output_stride == 0 {
            return Err(invalid("output_stride", "must be at least 1"));
        }
        if !(self.blow_up_threshold > 0.0) {
            return Err(invalid("blow_up_threshold", "must be positive"));
        }
        let (ceiling, reason) = self.stability_ceiling(grid);
        if self.dt > ceiling * (1.0 + 1e-12) {
            return Err(Error::StepTooLarge {
                dt: self.dt,
                ceiling,
                reason,
            });
        }
        Ok(())
    }

    fn n_steps(&self) -> usize {
        ((self.t_final / self.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
    }
}

fn rk4_step(
    model: &PdeModel,
    grid: &Grid1D,
    y: &[f64],
    h: f64,
    ws: &mut Workspace,
) -> Result<Vec<f64>> {
    let m = y.len();
    let mut k1 = vec![0.0; m];
    let mut k2 = vec![0.0; m];
    let mut k3 = vec![0.0; m];
    let mut k4 = vec![0.0; m];
    let mut tmp = vec![0.0; m];
    packed_rates(model, grid, y, &mut k1, ws)?;
    for i in 0..m {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    packed_rates(model, grid, &tmp, &mut k2, ws)?;
    for i in 0..m {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    packed_rates(model, grid, &tmp, &mut k3, ws)?;
    for i in 0..m {
        tmp[i] = y[i] + h * k3[i];
    }
    packed_rates(model, grid, &tmp, &mut k4, ws)?;
    Ok((0..m)
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]))
        .collect())
}

fn unpack(model: &PdeModel, grid: Grid1D, t: f64, y: Vec<f64>, threshold: f64) -> Result<SimState> {
    let n = grid.n_nodes();
    let max_abs = |s: &[f64]| {
        s.iter().fold(0.0_f64, |m, v| {
            if v.is_finite() {
                m.max(v.abs())
            } else {
                f64::INFINITY
            }
        })
    };
    if y.iter().any(|v| !v.is_finite()) {
        let stress_part = if model.variant == Variant::StressRate {
            &y[2 * n..]
        } else {
            &y[..0]
        };
        return Err(Error::BlowUp {
            t,
            max_abs_stress: if stress_part.is_empty() {
                f64::INFINITY
            } else {
                max_abs(stress_part)
            },
        });
    }
    let v = y[..n].to_vec();
    let eps = y[n..2 * n].to_vec();
    let stress = match model.variant {
        Variant::StressRate => y[2 * n..].to_vec(),
        _ => reconstruct_stress(model, &grid, &v, &eps)?,
    };
    let max_stress = max_abs(&stress);
    if !(max_stress <= threshold) {
        return Err(Error::BlowUp {
            t,
            max_abs_stress: max_stress,
        });
    }
    Ok(SimState {
        t,
        v: Field::from_raw(grid, v),
        eps: Field::from_raw(grid, eps),
        stress: Field::from_raw(grid, stress),
    })
}

/// One RK4 step of size `config.dt`.
pub fn step(state: &SimState, config: &SolverConfig) -> Result<SimState> {
    let grid = *state.grid();
    config.validate(&grid)?;
    step_by(
        state,
        config,
        config.dt,
        &mut Workspace::new(grid.n_nodes()),
    )
}

fn step_by(
    state: &SimState,
    config: &SolverConfig,
    h: f64,
    ws: &mut Workspace,
) -> Result<SimState> {
    let grid = *state.grid();
    let y = pack(&config.model, state);
    let y = rk4_step(&config.model, &grid, &y, h, ws)?;
    unpack(
        &config.model,
        grid,
        state.t + h,
        y,
        config.blow_up_threshold,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Completed,
    BlowUp { t: f64, max_abs_stress: f64 },
}

/// Stored states (every `output_stride` steps, plus the last) and how the run ended.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<SimState>,
    pub outcome: Outcome,
}

/// Runs from `initial` to `config.t_final`. Blow-up ends the run early and is
/// reported through [`Outcome::BlowUp`]; every other failure is an error.
pub fn simulate(initial: &SimState, config: &SolverConfig) -> Result<Trajectory> {
    let grid = *initial.grid();
    config.validate(&grid)?;
    let n_steps = config.n_steps();
    let h = (config.t_final - initial.t) / n_steps as f64;
    let h = if initial.t == 0.0 {
        config.t_final / n_steps as f64
    } else {
        h
    };
    let mut ws = Workspace::new(grid.n_nodes());
    let mut states = vec![initial.clone()];
    let mut current = initial.clone();
    for i in 1..=n_steps {
        match step_by(&current, config, h, &mut ws) {
            Ok(mut next) => {
                next.t = initial.t + i as f64 * h;
                current = next;
            }
            Err(Error::BlowUp { t, max_abs_stress }) => {
                return Ok(Trajectory {
                    states,
                    outcome: Outcome::BlowUp { t, max_abs_stress },
                });
            }
            Err(e) => return Err(e),
        }
        if i % config.output_stride == 0 || i == n_steps {
            states.push(current.clone());
        }
    }
    Ok(Trajectory {
        states,
        outcome: Outcome::Completed,
    })
}

/// Integrates the nodewise stress equation `T_t = (h(T) - eps) / gamma` with
/// the strain held fixed, returning the stress at `t_final`.
pub fn relax_at_frozen_strain(
    h: &ConstitutiveFunction,
    gamma: f64,
    eps: &[f64],
    stress: &[f64],
    t_final: f64,
    dt: f64,
) -> Result<Vec<f64>> {
    if !(gamma > 0.0) {
        return Err(invalid("gamma", format!("must be positive, got {gamma}")));
    }
    if !(t_final > 0.0 && dt > 0.0 && dt <= t_final) {
        return Err(Error::InvalidStep { dt, t_final });
    }
    let n = (t_final / dt).ceil() as usize;
    let step = t_final / n as f64;
    let f = |s: f64, e: f64| (h.value(s) - e) / gamma;
    eps.iter()
        .zip(stress)
        .map(|(&e, &s0)| {
            let mut s = s0;
            for i in 0..n {
                let k1 = f(s, e);
                let k2 = f(s + 0.5 * step * k1, e);
                let k3 = f(s + 0.5 * step * k2, e);
                let k4 = f(s + step * k3, e);
                s += step / 6.0 * (k1 + 2.0 * (k2 + k3) + k4);
                if !s.is_finite() {
                    return Err(Error::BlowUp {
                        t: (i + 1) as f64 * step,
                        max_abs_stress: s.abs(),
                    });
                }
            }
            Ok(s)
        })
        .collect()
}

/// `rho omega`: `T eps - H(T)` for stress-rate and elastic, `T g(T) - G(T)`
/// for strain-rate, with `H`, `G` the antiderivatives of the response.
pub fn stored_energy_density(
    variant: Variant,
    f: &ConstitutiveFunction,
    stress: f64,
    eps: f64,
) -> f64 {
    match variant {
        Variant::StressRate | Variant::Elastic => stress * eps - f.antiderivative(stress),
        Variant::StrainRate => stress * f.value(stress) - f.antiderivative(stress),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub t: f64,
    pub kinetic: f64,
    pub internal: f64,
    pub total: f64,
    pub dissipation_rate: f64,
    /// `|dE/dt + dissipation_rate|` with `dE/dt` from a three-point stencil.
    pub balance_residual: f64,
}

/// `(kinetic, internal)` energy of one state.
pub fn energies(model: &PdeModel, state: &SimState) -> (f64, f64) {
    let grid = state.grid();
    let kinetic: Vec<f64> = state
        .v
        .values()
        .iter()
        .map(|v| 0.5 * model.rho * v * v)
        .collect();
    let internal: Vec<f64> = state
        .stress
        .values()
        .iter()
        .zip(state.eps.values())
        .map(|(&s, &e)| stored_energy_density(model.variant, &model.response, s, e))
        .collect();
    (grid.integrate(&kinetic), grid.integrate(&internal))
}

/// `gamma int T_t^2` (stress-rate), `(nu / rho) int T_x^2` (strain-rate), 0 (elastic).
pub fn dissipation_rate(model: &PdeModel, state: &SimState) -> Result<f64> {
    let grid = state.grid();
    match model.variant {
        Variant::StressRate => {
            let rates = rates_of(model, state)?;
            let tt = rates.dstress.expect("stress-rate evolves the stress");
            let sq: Vec<f64> = tt.iter().map(|x| x * x).collect();
            Ok(model.gamma * grid.integrate(&sq))
        }
        Variant::StrainRate => {
            let mut tx = vec![0.0; grid.n_nodes()];
            grid.d1_into(state.stress.values(), &mut tx);
            let sq: Vec<f64> = tx.iter().map(|x| x * x).collect();
            Ok(model.nu / model.rho * grid.integrate(&sq))
        }
        Variant::Elastic => Ok(0.0),
    }
}

/// Energy balance at the middle state of a window of at least three
/// consecutive stored states.
pub fn energy_report(model: &PdeModel, window: &[SimState]) -> Result<EnergyReport> {
    if window.len() < 3 {
        return Err(Error::InvalidWindow(window.len()));
    }
    let m = window.len() / 2;
    let trio = &window[m - 1..=m + 1];
    let totals: Vec<f64> = trio
        .iter()
        .map(|s| {
            let (k, i) = energies(model, s);
            k + i
        })
        .collect();
    let w = three_point_weights([trio[0].t, trio[1].t, trio[2].t], 1);
    let de_dt = w[0] * totals[0] + w[1] * totals[1] + w[2] * totals[2];
    let (kinetic, internal) = energies(model, &trio[1]);
    let dissipation = dissipation_rate(model, &trio[1])?;
    Ok(EnergyReport {
        t: trio[1].t,
        kinetic,
        internal,
        total: kinetic + internal,
        dissipation_rate: dissipation,
        balance_residual: (de_dt + dissipation).abs(),
    })
}

/// Energy reports at every interior stored state.
pub fn energy_series(model: &PdeModel, states: &[SimState]) -> Result<Vec<EnergyReport>> {
    if states.len() < 3 {
        return Err(Error::InvalidWindow(states.len()));
    }
    states.windows(3).map(|w| energy_report(model, w)).collect()
}
