use std::fs;
use std::path::Path;
use std::process::Command;

use ace_core::cli::{run, RunPlan};
use ace_core::config::{apply_cli, parse_config_file, ParameterMap, Origin, KNOWN_COMMANDS};
use ace_core::ptmpo::read_pt;

const RABI: &str = "\
dt 0.01   # time step
ta 0
te 20
initial {|0><0|_2}
add_Hamiltonian {hbar/2*(|0><1|_2+|1><0|_2)}
add_Output {|1><1|_2}
outfile Rabi.out
";

fn ace(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ACE")).current_dir(dir).args(args).output().unwrap()
}

fn columns(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn rabi_config_writes_2001_rows() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("Rabi.param"), RABI).unwrap();
    let out = ace(dir.path(), &["Rabi.param"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = columns(&dir.path().join("Rabi.out"));
    assert_eq!(rows.len(), 2001);
    for r in &rows {
        assert_eq!(r.len(), 3);
        assert!((r[1] - (r[0] / 2.0).sin().powi(2)).abs() < 1e-4);
    }
}

#[test]
fn cli_override_beats_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("Rabi.param"), RABI).unwrap();
    let out = ace(dir.path(), &["Rabi.param", "-dt", "0.1", "-te", "{2*pi}"]);
    assert!(out.status.success());
    let rows = columns(&dir.path().join("Rabi.out"));
    assert_eq!(rows.len(), 64);
    assert!((rows[1][0] - 0.1).abs() < 1e-12);
}

#[test]
fn bad_config_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.param"), "initial {|0><0|_2\n").unwrap();
    assert!(!ace(dir.path(), &["bad.param"]).status.success());
    assert!(!ace(dir.path(), &["missing.param"]).status.success());
    assert!(!ace(dir.path(), &["-dt"]).status.success());
}

#[test]
fn write_then_add_pt_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let bath = "\
te 2
dt 0.05
threshold 1e-9
Boson_J_type QDPhonon
Boson_temperature 4
Boson_omega_max 10
use_Gaussian true
add_Hamiltonian {hbar*0.5*(|0><1|_2+|1><0|_2)}
initial {|1><1|_2}
add_Output {|1><1|_2}
add_Output {|0><1|_2}
";
    fs::write(dir.path().join("gen.param"), format!("{bath}write_PT qd.pt\nbuffer_blocksize 7\noutfile direct.out\n")).unwrap();
    let out = ace(dir.path(), &["gen.param"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("qd.pt_5").exists());
    let use_pt = "\
te 2
dt 0.05
add_PT qd.pt
add_Hamiltonian {hbar*0.5*(|0><1|_2+|1><0|_2)}
initial {|1><1|_2}
add_Output {|1><1|_2}
add_Output {|0><1|_2}
outfile loaded.out
";
    fs::write(dir.path().join("use.param"), use_pt).unwrap();
    assert!(ace(dir.path(), &["use.param"]).status.success());
    let a = fs::read(dir.path().join("direct.out")).unwrap();
    let b = fs::read(dir.path().join("loaded.out")).unwrap();
    assert_eq!(a, b);
    let rows = columns(&dir.path().join("direct.out"));
    assert_eq!(rows.len(), 41);
    // Phonons damp but do not destroy the occupation.
    assert!(rows.iter().all(|r| r[1] > -1e-6 && r[1] < 1.0 + 1e-6));

    let analyze = Command::new(env!("CARGO_BIN_EXE_PTB_analyze"))
        .current_dir(dir.path())
        .args(["-read_PT", "qd.pt"])
        .output()
        .unwrap();
    assert!(analyze.status.success());
    let text = String::from_utf8(analyze.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("max")).count(), 40);
    assert!(text.contains("max bond dimension:"));
}

#[test]
fn ptb_analyze_rejects_truncated_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("gen.param"),
        "te 0.5\ndt 0.05\nBoson_J_type QDPhonon\nuse_Gaussian true\nthreshold 1e-8\nwrite_PT x.pt\n",
    )
    .unwrap();
    assert!(ace(dir.path(), &["gen.param"]).status.success());
    let pt = read_pt(&dir.path().join("x.pt")).unwrap();
    assert_eq!(pt.len(), 10);
    let bytes = fs::read(dir.path().join("x.pt")).unwrap();
    fs::write(dir.path().join("cut.pt"), &bytes[..bytes.len() - 9]).unwrap();
    let analyze = Command::new(env!("CARGO_BIN_EXE_PTB_analyze"))
        .current_dir(dir.path())
        .args(["-read_PT", "cut.pt"])
        .output()
        .unwrap();
    assert!(!analyze.status.success());
}

#[test]
fn readexpression_binary() {
    let run = |e: &str| Command::new(env!("CARGO_BIN_EXE_readexpression")).arg(e).output().unwrap();
    let id = run("{Id_2}");
    assert!(id.status.success());
    let text = String::from_utf8(id.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert_eq!(String::from_utf8(run("{sigma_x*sigma_x}").stdout).unwrap(), text);
    let bad = run("{2*pi");
    assert!(!bad.status.success());
    assert!(!bad.stderr.is_empty());
}

#[test]
fn every_command_token_parses() {
    let text: String = KNOWN_COMMANDS.iter().map(|c| format!("{c} x {{Id_2}}\n")).collect();
    let map = ParameterMap::parse_str(&text, Origin::File).unwrap();
    assert_eq!(map.entries().len(), KNOWN_COMMANDS.len());
    assert!(map.unknown_commands().is_empty());
    for (e, c) in map.entries().iter().zip(KNOWN_COMMANDS) {
        assert_eq!(&e.command, c);
        assert_eq!(e.args, vec!["x".to_string(), "{Id_2}".to_string()]);
    }
}

#[test]
fn plan_from_file_with_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("Rabi.param");
    fs::write(&path, RABI).unwrap();
    let map = parse_config_file(&path).unwrap();
    let map = apply_cli(&["-dt".into(), "0.02".into(), "-outfile".into(), dir.path().join("o.out").display().to_string()], map).unwrap();
    let plan = RunPlan::from_map(&map).unwrap();
    assert_eq!(plan.grid.n, 1000);
    let summary = run(&plan).unwrap();
    assert_eq!(summary.records.len(), 1001);
    assert!(summary.pts.is_empty());
}
