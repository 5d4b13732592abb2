//! Run configuration: a TOML file with one table per module.
//!
//! ```toml
//! command = "dispersion"
//!
//! [model]
//! variant = "strain_rate"
//! nu = 1.0
//!
//! [dispersion]
//! k = [0.5, 1.0, 2.0, 4.0]
//! ```
//!
//! Unknown keys are rejected. Model parameters are dimensional; they are
//! converted to the dimensionless coefficients before any computation.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use slve_core::constitutive::{make_constitutive, ConstitutiveFunction, ResponseKind};
use slve_core::grid::{Boundary, Grid1D};
use slve_core::params::{nondimensionalize, ModelParams, NondimScales, Variant};
use slve_core::pde::SolverConfig;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Simulate,
    Dispersion,
    Twave,
    Audit,
    Energy,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Dispersion => "dispersion",
            Command::Twave => "twave",
            Command::Audit => "audit",
            Command::Energy => "energy",
        }
    }

    fn runs_solver(self) -> bool {
        matches!(self, Command::Simulate | Command::Audit | Command::Energy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    StressRate,
    StrainRate,
    Elastic,
}

impl From<VariantName> for Variant {
    fn from(v: VariantName) -> Self {
        match v {
            VariantName::StressRate => Variant::StressRate,
            VariantName::StrainRate => Variant::StrainRate,
            VariantName::Elastic => Variant::Elastic,
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub variant: VariantName,
    #[serde(default)]
    pub nu: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default = "one")]
    pub rho: f64,
    #[serde(default = "one")]
    pub mu: f64,
    #[serde(default = "one")]
    pub length_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindName {
    Linear,
    Saturating,
    Arctan,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstitutiveSection {
    pub kind: KindName,
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default = "one")]
    pub a: f64,
}

impl Default for ConstitutiveSection {
    fn default() -> Self {
        Self {
            kind: KindName::Linear,
            beta: 1.0,
            a: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryName {
    Periodic,
    Dirichlet,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub length: f64,
    pub n_cells: usize,
    pub boundary: BoundaryName,
    #[serde(default)]
    pub origin: f64,
}

fn default_stride() -> usize {
    1
}

fn default_threshold() -> f64 {
    SolverConfig::DEFAULT_BLOW_UP_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "default_stride")]
    pub output_stride: usize,
    #[serde(default = "default_threshold")]
    pub blow_up_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSection {
    /// Everything at rest and unstressed.
    Zero,
    /// `T = amplitude exp(-((x - center) / width)^2)`, at rest.
    GaussianBump {
        center: f64,
        width: f64,
        amplitude: f64,
    },
    /// `T = amplitude cos(k x)`, at rest.
    SingleMode { k: f64, amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionSection {
    pub k: Vec<f64>,
}

fn default_samples() -> usize {
    2001
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwaveSection {
    pub t_minus: f64,
    pub t_plus: f64,
    pub xi_min: f64,
    pub xi_max: f64,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub format: Format,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            format: Format::Csv,
        }
    }
}

/// The file as written. See [`RunConfig`] for the validated form.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub command: Option<Command>,
    pub model: ModelSection,
    #[serde(default)]
    pub constitutive: ConstitutiveSection,
    pub grid: Option<GridSection>,
    pub solver: Option<SolverSection>,
    pub initial: Option<InitialSection>,
    pub dispersion: Option<DispersionSection>,
    pub twave: Option<TwaveSection>,
    #[serde(default)]
    pub output: OutputSection,
}

/// Command-line values that replace the file's.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub nu: Option<f64>,
    pub gamma: Option<f64>,
    /// Replaces the dispersion `k` list and the wavenumber of `single_mode` data.
    pub k: Option<f64>,
    pub t_final: Option<f64>,
    pub out: Option<PathBuf>,
}

impl RawConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(nu) = o.nu {
            self.model.nu = nu;
        }
        if let Some(gamma) = o.gamma {
            self.model.gamma = gamma;
        }
        if let Some(k) = o.k {
            if let Some(d) = &mut self.dispersion {
                d.k = vec![k];
            }
            if let Some(InitialSection::SingleMode { k: mode_k, .. }) = &mut self.initial {
                *mode_k = k;
            }
        }
        if let Some(t) = o.t_final {
            if let Some(s) = &mut self.solver {
                s.t_final = t;
            }
        }
        if let Some(out) = &o.out {
            self.output.dir = out.clone();
        }
    }
}

/// Everything a run needs, checked against the library's preconditions.
#[derive(Clone)]
pub struct RunConfig {
    pub command: Command,
    pub raw: RawConfig,
    pub variant: Variant,
    pub scales: NondimScales,
    pub response: ConstitutiveFunction,
    pub grid: Option<Grid1D>,
}

impl std::fmt::Debug for RunConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RunConfig")
            .field("command", &self.command)
            .field("variant", &self.variant)
            .field("scales", &self.scales)
            .field("raw", &self.raw)
            .finish()
    }
}

impl RunConfig {
    pub fn nu(&self) -> f64 {
        self.scales.nu_bar
    }

    pub fn gamma(&self) -> f64 {
        self.scales.gamma_bar
    }

    /// Dimensionless rate coefficient of the active variant.
    pub fn coefficient(&self) -> f64 {
        match self.variant {
            Variant::StressRate => self.gamma(),
            Variant::StrainRate => self.nu(),
            Variant::Elastic => 0.0,
        }
    }

    pub fn format(&self) -> Format {
        self.raw.output.format
    }

    pub fn out_dir(&self) -> &Path {
        &self.raw.output.dir
    }
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn require<'a, T>(section: &'a Option<T>, name: &str, command: Command) -> Result<&'a T> {
    section.as_ref().ok_or_else(|| {
        config_error(format!(
            "[{name}] is required by the {} command",
            command.name()
        ))
    })
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(config_error(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

fn finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(config_error(format!("{name} must be finite, got {value}")))
    }
}

/// Parses TOML text; unknown keys and type errors are reported with their location.
pub fn parse_raw(source: &str) -> Result<RawConfig> {
    toml::from_str(source).map_err(|e| CliError::Parse(e.to_string()))
}

pub fn parse_config(
    source: &str,
    command: Option<Command>,
    overrides: &Overrides,
) -> Result<RunConfig> {
    let mut raw = parse_raw(source)?;
    raw.apply(overrides);
    validate(raw, command)
}

pub fn load_config(
    path: &Path,
    command: Option<Command>,
    overrides: &Overrides,
) -> Result<RunConfig> {
    let source = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&source, command, overrides)
}

/// Checks every precondition the selected command depends on.
pub fn validate(raw: RawConfig, command: Option<Command>) -> Result<RunConfig> {
    let command = match (command, raw.command) {
        (Some(c), Some(f)) if c != f => {
            return Err(config_error(format!(
                "config file is for the {} command, invoked as {}",
                f.name(),
                c.name()
            )))
        }
        (Some(c), _) | (None, Some(c)) => c,
        (None, None) => return Err(config_error("no command given")),
    };
    let m = &raw.model;
    let variant = Variant::from(m.variant);
    let scales = nondimensionalize(&ModelParams {
        rho: m.rho,
        mu: m.mu,
        length_scale: m.length_scale,
        nu: m.nu,
        gamma: m.gamma,
        variant,
    })?;

    let c = &raw.constitutive;
    let kind = match c.kind {
        KindName::Linear => ResponseKind::Linear,
        KindName::Saturating => ResponseKind::Saturating,
        KindName::Arctan => ResponseKind::Arctan,
    };
    let response = make_constitutive(kind, c.beta, c.a)?;

    let mut grid = None;
    match command {
        Command::Dispersion => {
            if variant == Variant::Elastic {
                return Err(config_error(
                    "dispersion needs the stress_rate or strain_rate variant",
                ));
            }
            let d = require(&raw.dispersion, "dispersion", command)?;
            if d.k.is_empty() {
                return Err(config_error(
                    "dispersion.k must list at least one wavenumber",
                ));
            }
            for &k in &d.k {
                if !(k.is_finite() && k >= 0.0) {
                    return Err(config_error(format!(
                        "dispersion.k entries must be >= 0, got {k}"
                    )));
                }
            }
        }
        Command::Twave => {
            if variant == Variant::Elastic {
                return Err(config_error(
                    "twave needs the stress_rate or strain_rate variant",
                ));
            }
            let t = require(&raw.twave, "twave", command)?;
            for (name, v) in [("twave.t_minus", t.t_minus), ("twave.t_plus", t.t_plus)] {
                finite(name, v)?;
            }
            if !(t.xi_min < 0.0 && t.xi_max > 0.0) {
                return Err(config_error(format!(
                    "twave.xi_min < 0 < twave.xi_max required, got [{}, {}]",
                    t.xi_min, t.xi_max
                )));
            }
            if t.n_samples < 2 {
                return Err(config_error("twave.n_samples must be at least 2"));
            }
        }
        _ => {}
    }
    if command.runs_solver() {
        if command == Command::Audit && variant != Variant::StressRate {
            return Err(config_error(
                "audit checks gamma T_t^2 >= 0 and needs the stress_rate variant",
            ));
        }
        let g = require(&raw.grid, "grid", command)?;
        finite("grid.origin", g.origin)?;
        let boundary = match g.boundary {
            BoundaryName::Periodic => Boundary::Periodic,
            BoundaryName::Dirichlet => Boundary::DirichletZero,
        };
        let built = Grid1D::new(g.length, g.n_cells, boundary)?.with_origin(g.origin);
        let s = require(&raw.solver, "solver", command)?;
        positive("solver.blow_up_threshold", s.blow_up_threshold)?;
        match require(&raw.initial, "initial", command)? {
            InitialSection::Zero => {}
            InitialSection::GaussianBump {
                center,
                width,
                amplitude,
            } => {
                finite("initial.center", *center)?;
                positive("initial.width", *width)?;
                finite("initial.amplitude", *amplitude)?;
            }
            InitialSection::SingleMode { k, amplitude } => {
                finite("initial.k", *k)?;
                finite("initial.amplitude", *amplitude)?;
            }
        }
        let solver = crate::run::solver_config(variant, &scales, &response, s);
        solver.validate(&built)?;
        grid = Some(built);
    }
    Ok(RunConfig {
        command,
        raw,
        variant,
        scales,
        response,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
command = "dispersion"

[model]
variant = "strain_rate"
nu = 1.0

[dispersion]
k = [0.5, 1.0, 2.0]
"#;

    #[test]
    fn minimal_dispersion() {
        let cfg = parse_config(MINIMAL, None, &Overrides::default()).unwrap();
        assert_eq!(cfg.command, Command::Dispersion);
        assert_eq!(cfg.variant, Variant::StrainRate);
        assert_eq!(cfg.nu(), 1.0);
        assert_eq!(cfg.format(), Format::Csv);
    }

    #[test]
    fn negative_gamma_cites_condition() {
        let src = MINIMAL.replace("nu = 1.0", "nu = 1.0\ngamma = -0.1");
        let err = parse_config(&src, None, &Overrides::default())
            .unwrap_err()
            .to_string();
        assert!(
            err.contains("gamma") && err.contains(">= 0") && err.contains("dissipation"),
            "{err}"
        );
    }

    #[test]
    fn unknown_key_named() {
        let src = MINIMAL.replace("nu = 1.0", "nu = 1.0\nviscosity = 2.0");
        let err = parse_config(&src, None, &Overrides::default()).unwrap_err();
        assert!(matches!(err, CliError::Parse(_)));
        assert!(err.to_string().contains("viscosity"), "{err}");
    }

    #[test]
    fn command_mismatch_rejected() {
        assert!(parse_config(MINIMAL, Some(Command::Twave), &Overrides::default()).is_err());
        assert!(parse_config(MINIMAL, Some(Command::Dispersion), &Overrides::default()).is_ok());
    }

    #[test]
    fn overrides_replace_values() {
        let o = Overrides {
            nu: Some(3.0),
            k: Some(7.0),
            out: Some(PathBuf::from("elsewhere")),
            ..Default::default()
        };
        let cfg = parse_config(MINIMAL, None, &o).unwrap();
        assert_eq!(cfg.nu(), 3.0);
        assert_eq!(cfg.raw.dispersion.as_ref().unwrap().k, vec![7.0]);
        assert_eq!(cfg.out_dir(), Path::new("elsewhere"));
    }

    #[test]
    fn solver_commands_need_their_sections() {
        let src = MINIMAL.replace("dispersion\"", "simulate\"");
        let err = parse_config(&src, None, &Overrides::default())
            .unwrap_err()
            .to_string();
        assert!(err.contains("[grid]"), "{err}");
    }

    #[test]
    fn unknown_initial_field_rejected() {
        let src = r#"
command = "simulate"
[model]
variant = "strain_rate"
nu = 1.0
[grid]
length = 6.283185307179586
n_cells = 32
boundary = "periodic"
[solver]
dt = 0.001
t_final = 0.1
[initial]
kind = "single_mode"
k = 1.0
amplitude = 0.1
phase = 0.3
"#;
        let err = parse_config(src, None, &Overrides::default())
            .unwrap_err()
            .to_string();
        assert!(err.contains("phase"), "{err}");
    }
}
