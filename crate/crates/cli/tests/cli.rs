use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use slve_core::dispersion::strain_rate_dispersion;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn slve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slve"))
        .args(args)
        .output()
        .expect("spawn slve")
}

fn run_config(command: &str, config: &Path, out: &Path, extra: &[&str]) -> (i32, Value) {
    let mut args = vec![
        command,
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let o = slve(&args);
    let status: Value =
        serde_json::from_slice(&std::fs::read(out.join("status.json")).expect("status.json"))
            .unwrap();
    let printed: Value = serde_json::from_slice(&o.stdout).expect("status on stdout");
    assert_eq!(printed, status);
    (o.status.code().unwrap(), status)
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn dispersion_sweep_matches_library() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, status) = run_config(
        "dispersion",
        &configs().join("dispersion_strain_rate.toml"),
        tmp.path(),
        &[],
    );
    assert_eq!(code, 0);
    assert_eq!(status["status"], "ok");
    let (header, rows) = read_csv(&tmp.path().join("dispersion.csv"));
    assert_eq!(
        header,
        [
            "k",
            "re_r1",
            "im_r1",
            "re_r2",
            "im_r2",
            "max_re",
            "discriminant",
            "classification"
        ]
    );
    assert_eq!(rows.len(), 8);
    for row in rows {
        let k: f64 = row[0].parse().unwrap();
        let d = strain_rate_dispersion(1.0, k).unwrap();
        for (i, r) in d.roots.iter().enumerate() {
            assert_eq!(row[1 + 2 * i].parse::<f64>().unwrap(), r.re);
            assert_eq!(row[2 + 2 * i].parse::<f64>().unwrap(), r.im);
        }
        assert_eq!(row[7], d.classification.name());
        assert!(row[5].parse::<f64>().unwrap() <= 0.0);
    }
}

#[test]
fn negative_gamma_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("dispersion_strain_rate.toml");
    let (code, status) = run_config("dispersion", &cfg, tmp.path(), &["--gamma", "-0.1"]);
    assert_eq!(code, 2);
    assert_eq!(status["status"], "config_error");
    let msg = status["message"].as_str().unwrap();
    assert!(msg.contains("gamma") && msg.contains(">= 0"), "{msg}");
    assert!(!tmp.path().join("dispersion.csv").exists());
}

#[test]
fn unknown_key_is_rejected_by_name() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("dispersion_strain_rate.toml"))
        .unwrap()
        .replace("nu = 1.0", "nu = 1.0\nviscosity = 0.3");
    let cfg = write_config(tmp.path(), &text);
    let (code, status) = run_config("dispersion", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(code, 2);
    assert!(status["message"].as_str().unwrap().contains("viscosity"));
}

#[test]
fn unstable_model_reports_blow_up() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, status) = run_config(
        "simulate",
        &configs().join("blow_up_stress_rate.toml"),
        tmp.path(),
        &[],
    );
    assert_eq!(code, 3);
    assert_eq!(status["status"], "blow_up");
    let t = status["t_blow_up"].as_f64().unwrap();
    // round-off in the fastest grid modes (rate near 5 at this resolution)
    // crosses the threshold before the seeded mode (rate 1.4656) does
    assert!(t > 5.0 && t < 30.0, "{t}");
    assert!(status["max_abs_stress"].as_f64().unwrap() > 1e12);
    assert!(tmp.path().join("trajectory.csv").exists());
}

#[test]
fn kink_header_records_speed() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, status) = run_config(
        "twave",
        &configs().join("kink_saturating.toml"),
        tmp.path(),
        &[],
    );
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(tmp.path().join("profile.csv")).unwrap();
    let first = text.lines().next().unwrap();
    let meta: Value =
        serde_json::from_str(first.strip_prefix("# ").expect("comment header")).unwrap();
    assert!((meta["c"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-15);
    assert!((meta["kappa"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-15);
    assert_eq!(meta["A2"].as_f64().unwrap(), 0.0);
    assert_eq!(meta, {
        let mut m = status.as_object().unwrap().clone();
        m.retain(|k, _| ["c", "kappa", "A2", "T_minus", "T_plus"].contains(&k.as_str()));
        Value::Object(m)
    });
    let (header, rows) = read_csv(&tmp.path().join("profile.csv"));
    assert_eq!(header, ["xi", "T"]);
    assert_eq!(rows.len(), 1601);
    let mid = &rows[800];
    assert_eq!(mid[0].parse::<f64>().unwrap(), 0.0);
    assert_eq!(mid[1].parse::<f64>().unwrap(), 0.5);
}

#[test]
fn output_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for name in ["energy_strain_rate.toml", "kink_saturating.toml"] {
        let cfg = configs().join(name);
        let cmd = if name.starts_with("energy") {
            "energy"
        } else {
            "twave"
        };
        run_config(cmd, &cfg, a.path(), &[]);
        run_config(cmd, &cfg, b.path(), &[]);
    }
    for file in ["energy.csv", "profile.csv"] {
        let x = std::fs::read(a.path().join(file)).unwrap();
        let y = std::fs::read(b.path().join(file)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{file}");
    }
}

#[test]
fn trajectory_round_trips_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("energy_strain_rate.toml");
    let text = std::fs::read_to_string(&cfg)
        .unwrap()
        .replace("\"energy\"", "\"simulate\"");
    let cfg = write_config(tmp.path(), &text);
    let out = tmp.path().join("out");
    let (code, _) = run_config("simulate", &cfg, &out, &["--t-final", "0.1"]);
    assert_eq!(code, 0);

    let run_cfg = slve_cli::load_config(
        &cfg,
        Some(slve_cli::Command::Simulate),
        &slve_cli::Overrides {
            t_final: Some(0.1),
            ..Default::default()
        },
    )
    .unwrap();
    let s = run_cfg.raw.solver.as_ref().unwrap();
    let solver =
        slve_cli::run::solver_config(run_cfg.variant, &run_cfg.scales, &run_cfg.response, s);
    let grid = run_cfg.grid.unwrap();
    let bump =
        slve_core::grid::Field::from_fn(grid, |x| 0.1 * (-((x - 8.0) / 1.0f64).powi(2)).exp())
            .unwrap();
    let initial = slve_core::pde::SimState::relaxed(
        &solver.model,
        0.0,
        slve_core::grid::Field::zeros(grid),
        bump,
    )
    .unwrap();
    let expected = slve_core::pde::simulate(&initial, &solver).unwrap();

    let (header, rows) = read_csv(&out.join("trajectory.csv"));
    assert_eq!(header, ["t", "x", "v", "eps", "T"]);
    let n = grid.n_nodes();
    assert_eq!(rows.len(), expected.states.len() * n);
    for (j, row) in rows.iter().enumerate() {
        let st = &expected.states[j / n];
        let i = j % n;
        let parsed: Vec<f64> = row.iter().map(|c| c.parse().unwrap()).collect();
        assert_eq!(parsed[0].to_bits(), st.t.to_bits());
        assert_eq!(parsed[2].to_bits(), st.v.values()[i].to_bits());
        assert_eq!(parsed[3].to_bits(), st.eps.values()[i].to_bits());
        assert_eq!(parsed[4].to_bits(), st.stress.values()[i].to_bits());
    }
}

#[test]
fn energy_and_audit_commands() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, status) = run_config(
        "energy",
        &configs().join("energy_strain_rate.toml"),
        tmp.path(),
        &[],
    );
    assert_eq!(code, 0);
    let (header, rows) = read_csv(&tmp.path().join("energy.csv"));
    assert_eq!(header[5], "balance_residual");
    let totals: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(totals.windows(2).all(|w| w[1] <= w[0]));
    for r in &rows {
        let (dissipation, residual): (f64, f64) = (r[4].parse().unwrap(), r[5].parse().unwrap());
        assert!(residual < 5e-3 * dissipation, "{residual} vs {dissipation}");
    }
    assert!(status["max_balance_residual"].is_number());

    let (code, status) = run_config(
        "audit",
        &configs().join("audit_stress_rate.toml"),
        tmp.path(),
        &[],
    );
    assert_eq!(code, 0);
    assert_eq!(status["passes"], true);
    assert!(status["min_rate"].as_f64().unwrap() >= -1e-12);
    let (_, rows) = read_csv(&tmp.path().join("audit.csv"));
    assert_eq!(rows.len(), 128);
}

#[test]
fn json_lines_format() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("kink_saturating.toml"))
        .unwrap()
        .replace(
            "dir = \"out/kink\"",
            "dir = \"out/kink\"\nformat = \"json\"",
        );
    let cfg = write_config(tmp.path(), &text);
    let (code, _) = run_config("twave", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(tmp.path().join("out/profile.jsonl")).unwrap();
    let records: Vec<Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(records[0]["meta"]["c"].is_number());
    assert_eq!(records.len(), 1602);
    assert_eq!(records[801]["T"].as_f64().unwrap(), 0.5);
}

#[test]
fn config_for_another_command_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, status) = run_config(
        "twave",
        &configs().join("dispersion_strain_rate.toml"),
        tmp.path(),
        &[],
    );
    assert_eq!(code, 2);
    assert!(status["message"].as_str().unwrap().contains("dispersion"));
}
