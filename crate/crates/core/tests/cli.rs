#![cfg(feature = "cli")]

use std::fs;
use std::process::Command;

fn mrcm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mrcm"))
}

#[test]
fn compare_imsfv_writes_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = ["a.csv", "b.csv"].iter().map(|n| dir.path().join(n)).collect();
    for p in &paths {
        let out = mrcm().args(["compare-imsfv", "--smoothing-steps", "4", "--out"]).arg(p).output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let text = fs::read_to_string(&paths[0]).unwrap();
    assert!(text.starts_with("method,alpha,l,k,iteration,l2_pressure,l2_flux,linf_pressure,status\n"));
    assert_eq!(text.lines().count(), 1 + 5);
    assert_eq!(fs::read(&paths[0]).unwrap(), fs::read(&paths[1]).unwrap());
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "problem = dipole\nmethod = rm\nmax_iters = 1\nthreshold = 1e-30\n").unwrap();
    let out = mrcm().args(["run", "--method", "em", "--config"]).arg(&conf).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.starts_with("EM,") && r.ends_with(",max-iterations")));
}

#[test]
fn bad_input_is_reported() {
    for args in [&["run", "--problem", "dipole", "--alpha", "ten"][..], &["run", "--perm-file", "/nonexistent/spe.dat"]] {
        let out = mrcm().args(args).output().unwrap();
        assert!(!out.status.success());
        assert!(!out.stderr.is_empty());
    }
}
