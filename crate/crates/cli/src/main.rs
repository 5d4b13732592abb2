use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use slve_cli::run::error_record;
use slve_cli::{load_config, run, write_status, Command, Overrides};

#[derive(Parser)]
#[command(
    name = "slve",
    version,
    about = "Strain-limiting viscoelastic wave experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evolve initial data and write the trajectory.
    Simulate(Common),
    /// Roots of the linear dispersion relation for a list of wavenumbers.
    Dispersion(Common),
    /// Traveling-wave (kink) profile between two equilibria.
    Twave(Common),
    /// Nodewise dissipation audit of a stress-rate simulation.
    Audit(Common),
    /// Energy balance along a simulation.
    Energy(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    /// Single wavenumber replacing the configured ones.
    #[arg(long, allow_hyphen_values = true)]
    k: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t_final: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Dispersion(a) => (Command::Dispersion, a),
        Cmd::Twave(a) => (Command::Twave, a),
        Cmd::Audit(a) => (Command::Audit, a),
        Cmd::Energy(a) => (Command::Energy, a),
    };
    let overrides = Overrides {
        nu: args.nu,
        gamma: args.gamma,
        k: args.k,
        t_final: args.t_final,
        out: args.out.clone(),
    };

    let cfg = match load_config(&args.config, Some(command), &overrides) {
        Ok(cfg) => cfg,
        Err(e) => {
            let record = error_record(Some(command), &e);
            eprintln!("slve: {e}");
            println!("{record}");
            if let Some(dir) = &args.out {
                let _ = write_status(dir, &record);
            }
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let dir = cfg.out_dir().to_path_buf();
    let (record, code) = match run(&cfg) {
        Ok(summary) => (summary.record(), summary.status.exit_code()),
        Err(e) => {
            eprintln!("slve: {e}");
            (error_record(Some(command), &e), e.exit_code())
        }
    };
    println!("{record}");
    if let Err(e) = write_status(&dir, &record) {
        eprintln!("slve: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code as u8)
}
