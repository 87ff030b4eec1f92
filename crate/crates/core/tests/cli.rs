use std::path::PathBuf;
use std::process::Command;

use fsi_schur::harness::{parse_config, CsvTable};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fsi-schur"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fsi-schur-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn space_run_writes_csv_with_config_echo() {
    let cfg = scratch("space.toml");
    let out = scratch("space.csv");
    std::fs::write(&cfg, "meshes = [2, 4]\ndt_list = [1e-3]\nT = 2e-3\n").unwrap();
    let status = bin()
        .args(["space", "--solver", "direct", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let table = CsvTable::parse(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(table.rows.len(), 2);
    assert_eq!(table.header[..3], ["dx", "dt", "eta_l2"]);
    let echoed = parse_config(&table.config_text()).unwrap();
    assert_eq!(echoed.meshes, vec![2, 4]);
    assert_eq!(echoed.solver.as_str(), "direct");
    assert_eq!(echoed.output.as_deref(), Some(out.as_path()));
}

#[test]
fn single_run_prints_step_diagnostics() {
    let cfg = scratch("single.toml");
    std::fs::write(&cfg, "meshes = [2]\ndt_list = [0.25]\nT = 1\n").unwrap();
    let out = bin()
        .arg("single")
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let table = CsvTable::parse(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(table.rows.len(), 4);
    assert_eq!(table.header[0], "step");
    assert!(table.metadata.iter().any(|m| m.starts_with("final_g_l2")));
}

#[test]
fn invalid_config_yields_machine_readable_error() {
    let cfg = scratch("bad.toml");
    std::fs::write(&cfg, "nu_f = -2\n").unwrap();
    let out = bin()
        .arg("time")
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    let line = err
        .lines()
        .find(|l| l.starts_with("error\t"))
        .expect("error line");
    assert!(line.contains("kind=config"));
    assert!(line.contains("key=nu_f"));
}

#[test]
fn study_key_must_agree_with_subcommand() {
    let cfg = scratch("mismatch.toml");
    std::fs::write(&cfg, "study = \"time\"\nmeshes = [2]\n").unwrap();
    let out = bin()
        .arg("space")
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("key=study"));
}
