//! Black-box checks of the `awtc-lab` binary: round trips, config
//! overrides, exit codes, and byte-level reproducibility.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_awtc-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn bounds_csv_shape() {
    let out = run(&["bounds", "--rho-w", "0.1", "--rho-r-step", "0.25"]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "rho_r,rho_w,lower_raw,lower,upper,p_star,f_min,ratio,regime"
    );
    assert_eq!(text.lines().count(), 4); // rho_r in {0.25, 0.5, 0.75}
}

#[test]
fn build_secrecy_conflicts_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let book = dir.path().join("code.awtc");
    let out = run(&[
        "build", "--n", "10", "--rho-w", "0.1", "--epsilon", "0.15", "--ell", "1", "--seed",
        "7", "--out",
        book.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&book).unwrap();
    assert!(text.starts_with("AWTC-CODEBOOK v1\nn=10 words=8 ell=1 seed=7\n"));

    let sec = run(&["secrecy", "--codebook", book.to_str().unwrap(), "--read-budget", "2"]);
    let csv = stdout(&sec);
    assert!(csv.starts_with("metric,support,value,exact_flag\n"));
    assert!(csv.contains("\nmin_equivocation,"));
    assert!(csv.contains("\ncounting_bound,"));

    let conf = run(&[
        "conflicts", "--codebook", book.to_str().unwrap(), "--error", "00c", "--write-budget",
        "2",
    ]);
    let csv = stdout(&conf);
    assert!(csv.starts_with("error,weight,subset_size,conflicts\n00c,2,8,"));
}

#[test]
fn reliability_reproducible_and_reduce_runs() {
    let a = stdout(&run(&["reliability", "--n", "10", "--rho-w", "0.1", "--epsilon", "0.15",
        "--trials", "50", "--seed", "3", "--adversary", "greedy"]));
    let b = stdout(&run(&["reliability", "--n", "10", "--rho-w", "0.1", "--epsilon", "0.15",
        "--trials", "50", "--seed", "3", "--adversary", "greedy"]));
    assert_eq!(a, b);
    assert!(a.starts_with("n,rho_r,rho_w,"));

    let red = stdout(&run(&["reduce", "--n", "10", "--rho-w", "0.1", "--epsilon", "0.15",
        "--trials", "50", "--seed", "3", "--xi", "0.05"]));
    assert!(red.starts_with("arm,trials,failures,"));
    assert!(red.contains("\nawtc,"));
    assert!(red.contains("\nrandom-wtc,"));
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "rho_r_step=0.5\n# comment\nrho_w=0.2\n").unwrap();
    let text = stdout(&run(&[
        "bounds", "--rho-w", "0.1", "--rho-r-step", "0.01", "--config",
        cfg.to_str().unwrap(),
    ]));
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("0.500000000,0.200000000,"));
}

#[test]
fn exit_codes() {
    // config error -> 2
    let out = run(&["reliability", "--n", "10", "--rho-w", "0.7", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    // resource cap (exhaustive adversary beyond its envelope, no cap) -> 3
    let out = run(&["reliability", "--n", "16", "--rho-w", "0.1", "--epsilon", "0.2",
        "--trials", "5", "--adversary", "exhaustive"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    // unknown config key -> 2
    let dir = tempfile::tempdir().unwrap();
    let cfg: &Path = &dir.path().join("bad.cfg");
    fs::write(cfg, "frobnicate=1\n").unwrap();
    let out = run(&["bounds", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
