//! Dispatch of a validated [`RunConfig`] to the library and emission of its tables.

use std::path::PathBuf;

use serde_json::{json, Map, Value};
use slve_core::constitutive::{audit_dissipation, ConstitutiveFunction};
use slve_core::dispersion::dispersion as dispersion_at;
use slve_core::dispersion::DispersionModel;
use slve_core::grid::{Field, Grid1D};
use slve_core::params::{NondimScales, Variant};
use slve_core::pde::{
    energy_series, simulate, Outcome, PdeModel, SimState, SolverConfig, Trajectory,
};
use slve_core::twave::{kink_profile, TravelingWaveProblem};

use crate::config::{Command, InitialSection, RunConfig, SolverSection};
use crate::error::{CliError, Result};
use crate::output::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    BlowUp,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::BlowUp => "blow_up",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::BlowUp => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub command: Command,
    pub status: Status,
    pub outputs: Vec<PathBuf>,
    /// Command-specific facts for the status record.
    pub details: Map<String, Value>,
}

impl RunSummary {
    pub fn record(&self) -> Value {
        let mut rec = Map::new();
        rec.insert("status".into(), json!(self.status.name()));
        rec.insert("command".into(), json!(self.command.name()));
        rec.insert(
            "outputs".into(),
            json!(self
                .outputs
                .iter()
                .map(|p| p.display().to_string())
                .collect::<Vec<_>>()),
        );
        for (k, v) in &self.details {
            rec.insert(k.clone(), v.clone());
        }
        Value::Object(rec)
    }
}

/// Status record for a run that failed before or during computation.
pub fn error_record(command: Option<Command>, err: &CliError) -> Value {
    json!({
        "status": err.kind(),
        "command": command.map(Command::name),
        "message": err.to_string(),
    })
}

pub fn pde_model(
    variant: Variant,
    scales: &NondimScales,
    response: &ConstitutiveFunction,
) -> PdeModel {
    match variant {
        Variant::StressRate => PdeModel::stress_rate(scales.gamma_bar, response.clone()),
        Variant::StrainRate => PdeModel::strain_rate(scales.nu_bar, response.clone()),
        Variant::Elastic => PdeModel::elastic(response.clone()),
    }
}

pub fn solver_config(
    variant: Variant,
    scales: &NondimScales,
    response: &ConstitutiveFunction,
    s: &SolverSection,
) -> SolverConfig {
    let mut cfg = SolverConfig::new(pde_model(variant, scales, response), s.dt, s.t_final)
        .with_stride(s.output_stride);
    cfg.blow_up_threshold = s.blow_up_threshold;
    cfg
}

pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    let dir = cfg.out_dir();
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    match cfg.command {
        Command::Dispersion => run_dispersion(cfg),
        Command::Twave => run_twave(cfg),
        Command::Simulate | Command::Energy | Command::Audit => run_solver(cfg),
    }
}

fn run_dispersion(cfg: &RunConfig) -> Result<RunSummary> {
    let model = match cfg.variant {
        Variant::StressRate => DispersionModel::StressRateLinear,
        _ => DispersionModel::StrainRateLinear,
    };
    let n_roots = match model {
        DispersionModel::StressRateLinear => 3,
        DispersionModel::StrainRateLinear => 2,
    };
    let mut columns = vec!["k".to_string()];
    for i in 1..=n_roots {
        columns.push(format!("re_r{i}"));
        columns.push(format!("im_r{i}"));
    }
    columns.extend(["max_re", "discriminant", "classification"].map(String::from));
    let mut table = Table::new(columns);
    let mut unstable = 0u64;
    let ks = &cfg.raw.dispersion.as_ref().expect("validated").k;
    for &k in ks {
        let d = dispersion_at(model, cfg.coefficient(), k)?;
        let mut row = vec![Cell::Num(k)];
        for r in &d.roots {
            row.push(Cell::Num(r.re));
            row.push(Cell::Num(r.im));
        }
        row.push(Cell::Num(d.max_real_part()));
        row.push(Cell::Num(d.discriminant));
        row.push(Cell::Text(d.classification.name().to_string()));
        if d.max_real_part() > 0.0 {
            unstable += 1;
        }
        table.push(row);
    }
    let path = table.write(cfg.out_dir(), "dispersion", cfg.format())?;
    let mut details = Map::new();
    details.insert("model".into(), json!(model.name()));
    details.insert("coefficient".into(), json!(cfg.coefficient()));
    details.insert("n_k".into(), json!(ks.len()));
    details.insert("n_unstable".into(), json!(unstable));
    Ok(RunSummary {
        command: cfg.command,
        status: Status::Ok,
        outputs: vec![path],
        details,
    })
}

fn run_twave(cfg: &RunConfig) -> Result<RunSummary> {
    let t = cfg.raw.twave.as_ref().expect("validated");
    let problem = TravelingWaveProblem::for_variant(
        cfg.response.clone(),
        cfg.variant,
        cfg.coefficient(),
        t.t_minus,
        t.t_plus,
    )?;
    let profile = kink_profile(&problem, (t.xi_min, t.xi_max), t.n_samples)?;
    let mut table = Table::new(["xi", "T"]);
    for &(xi, value) in &profile.samples {
        table.push(vec![Cell::Num(xi), Cell::Num(value)]);
    }
    let mut meta = Map::new();
    meta.insert("c".into(), json!(problem.c));
    meta.insert("kappa".into(), json!(problem.kappa));
    meta.insert("A2".into(), json!(problem.a2));
    meta.insert("T_minus".into(), json!(problem.t_minus));
    meta.insert("T_plus".into(), json!(problem.t_plus));
    table.meta = Some(meta.clone());
    let path = table.write(cfg.out_dir(), "profile", cfg.format())?;
    Ok(RunSummary {
        command: cfg.command,
        status: Status::Ok,
        outputs: vec![path],
        details: meta,
    })
}

fn initial_state(model: &PdeModel, grid: Grid1D, init: &InitialSection) -> Result<SimState> {
    let stress = match *init {
        InitialSection::Zero => Field::zeros(grid),
        InitialSection::GaussianBump {
            center,
            width,
            amplitude,
        } => Field::from_fn(grid, |x| {
            amplitude * (-((x - center) / width).powi(2)).exp()
        })?,
        InitialSection::SingleMode { k, amplitude } => {
            Field::from_fn(grid, |x| amplitude * (k * x).cos())?
        }
    };
    Ok(SimState::relaxed(model, 0.0, Field::zeros(grid), stress)?)
}

fn trajectory_table(run: &Trajectory) -> Table {
    let mut table = Table::new(["t", "x", "v", "eps", "T"]);
    for s in &run.states {
        let x = s.grid().nodes();
        for (i, &xi) in x.iter().enumerate() {
            table.push(vec![
                Cell::Num(s.t),
                Cell::Num(xi),
                Cell::Num(s.v.values()[i]),
                Cell::Num(s.eps.values()[i]),
                Cell::Num(s.stress.values()[i]),
            ]);
        }
    }
    table
}

fn run_solver(cfg: &RunConfig) -> Result<RunSummary> {
    let s = cfg.raw.solver.as_ref().expect("validated");
    let solver = solver_config(cfg.variant, &cfg.scales, &cfg.response, s);
    let grid = cfg.grid.expect("validated");
    let initial = initial_state(
        &solver.model,
        grid,
        cfg.raw.initial.as_ref().expect("validated"),
    )?;
    let run = simulate(&initial, &solver)?;

    let mut details = Map::new();
    let status = match run.outcome {
        Outcome::Completed => Status::Ok,
        Outcome::BlowUp { t, max_abs_stress } => {
            details.insert("t_blow_up".into(), json!(t));
            details.insert("max_abs_stress".into(), json!(max_abs_stress));
            Status::BlowUp
        }
    };
    let last = run.states.last().expect("initial state is stored");
    details.insert("t_last".into(), json!(last.t));
    details.insert("n_states".into(), json!(run.states.len()));

    let mut outputs = Vec::new();
    match cfg.command {
        Command::Simulate => {
            outputs.push(trajectory_table(&run).write(
                cfg.out_dir(),
                "trajectory",
                cfg.format(),
            )?);
        }
        Command::Energy => {
            let reports = if run.states.len() >= 3 {
                energy_series(&solver.model, &run.states)?
            } else {
                Vec::new()
            };
            let mut table = Table::new([
                "t",
                "kinetic",
                "internal",
                "total",
                "dissipation_rate",
                "balance_residual",
            ]);
            for r in &reports {
                table.push(
                    [
                        r.t,
                        r.kinetic,
                        r.internal,
                        r.total,
                        r.dissipation_rate,
                        r.balance_residual,
                    ]
                    .map(Cell::Num)
                    .to_vec(),
                );
            }
            let worst = reports
                .iter()
                .map(|r| r.balance_residual)
                .fold(0.0, f64::max);
            details.insert("max_balance_residual".into(), json!(worst));
            outputs.push(table.write(cfg.out_dir(), "energy", cfg.format())?);
        }
        Command::Audit => {
            let mut table = Table::new(["node", "x", "min_rate", "total_dissipation", "passes"]);
            let x = grid.nodes();
            let mut min_rate = f64::INFINITY;
            let mut all_pass = true;
            if run.states.len() >= 3 {
                for (node, &xn) in x.iter().enumerate() {
                    let history: Vec<(f64, f64)> = run
                        .states
                        .iter()
                        .map(|st| (st.t, st.stress.values()[node]))
                        .collect();
                    let audit = audit_dissipation(solver.model.gamma, &history)?;
                    min_rate = min_rate.min(audit.min_rate);
                    all_pass &= audit.passes();
                    table.push(vec![
                        Cell::Int(node as u64),
                        Cell::Num(xn),
                        Cell::Num(audit.min_rate),
                        Cell::Num(audit.total_dissipation),
                        Cell::Bool(audit.passes()),
                    ]);
                }
            }
            details.insert(
                "min_rate".into(),
                json!(if min_rate.is_finite() {
                    Some(min_rate)
                } else {
                    None
                }),
            );
            details.insert("passes".into(), json!(all_pass));
            outputs.push(table.write(cfg.out_dir(), "audit", cfg.format())?);
        }
        _ => unreachable!("solver commands only"),
    }
    Ok(RunSummary {
        command: cfg.command,
        status,
        outputs,
        details,
    })
}
