//! End-to-end checks of the command-line surface.

use std::path::Path;
use std::process::Command;

fn hvbk() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hvbk"))
}

fn write_config(dir: &Path, diag: &Path, ckpts: &Path) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(
        &path,
        format!(
            r#"
grid.n = 32
fluid.rho_n = 1.0
fluid.rho_s = 1.0
fluid.nu_n = 0.01
fluid.nu_s = 0.01
friction.b = 1.0
friction.b_prime = 1.0
time.dt = 2e-3
time.t_end = 0.01
time.checkpoint_every = 5
init.kind = "random_band"
init.k_max = 6
init.seed = 7
output.diag_path = "{}"
output.checkpoint_dir = "{}"
picard.horizon = 0.01
picard.quadrature_steps = 16
picard.max_iters = 6
"#,
            diag.display(),
            ckpts.display()
        ),
    )
    .unwrap();
    path
}

#[test]
fn run_writes_csv_and_checkpoints_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let diag = dir.path().join("diag.csv");
    let ckpts = dir.path().join("ckpts");
    let config = write_config(dir.path(), &diag, &ckpts);

    let status = hvbk().args(["run"]).arg(&config).arg("--quiet").status().unwrap();
    assert!(status.success());
    let first = std::fs::read_to_string(&diag).unwrap();
    assert_eq!(first.lines().next().unwrap().split(',').count(), 20);
    assert_eq!(first.lines().count(), 1 + 6); // header + t=0 + 5 steps
    assert!(ckpts.join("final.hvbk").exists());
    assert!(ckpts.join("checkpoint_00000000.hvbk").exists());

    // Bitwise-identical rerun.
    let status = hvbk().args(["run"]).arg(&config).arg("--quiet").status().unwrap();
    assert!(status.success());
    let second = std::fs::read_to_string(&diag).unwrap();
    assert_eq!(first, second);
}

#[test]
fn ic_bound_check_and_diag_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let ic_path = dir.path().join("dipole.hvbk");
    let status = hvbk()
        .args(["ic", "gaussian_dipole"])
        .arg(&ic_path)
        .args(["--n", "128"])
        .status()
        .unwrap();
    assert!(status.success());

    let out = hvbk()
        .arg("check-energy-bound")
        .arg(&ic_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("satisfied          : true"), "{text}");
    assert!(text.contains("row,omega_n,"));

    let out = hvbk().arg("diag").arg(&ic_path).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let csv_row = text.lines().last().unwrap();
    assert_eq!(csv_row.split(',').count(), 20);
}

#[test]
fn check_energy_bound_accepts_ic_names() {
    let out = hvbk()
        .args(["check-energy-bound", "gaussian_dipole"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("satisfied          : true"), "{text}");
}

#[test]
fn picard_and_probe_commands_report() {
    let dir = tempfile::tempdir().unwrap();
    let diag = dir.path().join("d.csv");
    let ckpts = dir.path().join("c");
    let config = write_config(dir.path(), &diag, &ckpts);

    let out = hvbk().arg("picard").arg(&config).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("contraction factor:"), "{text}");
    assert!(text.contains("converged: true"), "{text}");

    let out = hvbk().arg("probe-existence").arg(&config).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("largest contractive horizon:"), "{text}");
    assert!(text.contains("amplitude exponent:"), "{text}");
}

#[test]
fn bad_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(
        &path,
        "grid.n = 32\nfluid.rho_n = -1.0\nfluid.rho_s = 1.0\nfluid.nu_n = 0.01\nfluid.nu_s = 0.01\ntime.t_end = 0.1\n",
    )
    .unwrap();
    let out = hvbk().arg("run").arg(&path).output().unwrap();
    assert!(!out.status.success());
    let text = String::from_utf8(out.stderr).unwrap();
    assert!(text.contains("fluid.rho_n"), "{text}");
}

#[test]
fn corrupt_checkpoint_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("junk.hvbk");
    std::fs::write(&path, b"not a checkpoint at all").unwrap();
    let out = hvbk().arg("diag").arg(&path).output().unwrap();
    assert!(!out.status.success());
    let text = String::from_utf8(out.stderr).unwrap();
    assert!(text.to_lowercase().contains("magic"), "{text}");
}

#[test]
fn seed_flag_changes_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.hvbk");
    let b = dir.path().join("b.hvbk");
    let c = dir.path().join("c.hvbk");
    for (path, seed) in [(&a, "1"), (&b, "2"), (&c, "1")] {
        let status = hvbk()
            .args(["ic", "random_band"])
            .arg(path)
            .args(["--n", "32", "--seed", seed])
            .status()
            .unwrap();
        assert!(status.success());
    }
    let (da, db, dc) = (
        std::fs::read(&a).unwrap(),
        std::fs::read(&b).unwrap(),
        std::fs::read(&c).unwrap(),
    );
    assert_ne!(da, db);
    assert_eq!(da, dc);
}
