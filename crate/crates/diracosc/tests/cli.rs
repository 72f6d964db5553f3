//! End-to-end runs of the binary: determinism, config round-trips, and the
//! exit-code contract (0 ok, 1 usage or config, 2 failed numerics gate).

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diracosc"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("no exit code")
}

#[test]
fn spins_reruns_bit_identical_and_reloads_its_metadata() {
    let args = [
        "spins", "--N", "6", "--r", "0.25", "--t_end", "5", "--t_steps", "9",
    ];
    let a = run(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout, "identical runs must emit identical bytes");

    let text = String::from_utf8(a.stdout.clone()).unwrap();
    assert!(text
        .lines()
        .any(|l| l == "t,t_omega,sigma_x,sigma_y,sigma_z,l_z,j_z,norm,pos_weight,neg_weight"));
    assert!(text.lines().any(|l| l.starts_with("# scenario = spins")));

    // the emitted metadata block is itself a complete config
    let meta: String = text
        .lines()
        .filter(|l| l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, meta).unwrap();
    let c = run(&["spins", "--config", cfg.to_str().unwrap()]);
    assert!(c.status.success());
    assert_eq!(a.stdout, c.stdout, "metadata reload must reproduce the run");
}

#[test]
fn flags_override_config_file_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("base.cfg");
    std::fs::write(&cfg, "N = 6\nr = 0.25\nt_end = 5\nt_steps = 9\n").unwrap();
    let from_flags = run(&[
        "spins", "--N", "6", "--r", "0.5", "--t_end", "5", "--t_steps", "9",
    ]);
    let overridden = run(&["spins", "--config", cfg.to_str().unwrap(), "--r", "0.5"]);
    assert!(overridden.status.success());
    assert_eq!(from_flags.stdout, overridden.stdout);
}

#[test]
fn density_files_reload_as_their_own_config() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let first = run(&[
        "density",
        "--N",
        "4",
        "--times",
        "2.5",
        "--kinds",
        "total,component:2",
        "--theta_points",
        "19",
        "--phi_points",
        "24",
        "--out",
        out_a.to_str().unwrap(),
    ]);
    assert!(
        first.status.success(),
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    let listed = String::from_utf8(first.stdout).unwrap();
    assert_eq!(listed.lines().count(), 2, "one path per (time, kind)");
    let total = out_a.join("density_t2.5_total.csv");
    let comp = out_a.join("density_t2.5_component_2.csv");
    assert!(total.is_file());
    assert!(comp.is_file());

    // each map embeds a single-map config that reproduces exactly itself
    let out_b = dir.path().join("b");
    let second = run(&[
        "density",
        "--config",
        comp.to_str().unwrap(),
        "--out",
        out_b.to_str().unwrap(),
    ]);
    assert!(second.status.success());
    let reread = std::fs::read(out_b.join("density_t2.5_component_2.csv")).unwrap();
    assert_eq!(std::fs::read(&comp).unwrap(), reread);
    assert!(!out_b.join("density_t2.5_total.csv").exists());
}

#[test]
fn decompose_and_compare_emit_wellformed_tables() {
    let a = run(&["decompose", "--N", "4", "--format", "json"]);
    assert!(a.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["metadata"]["scenario"], "decompose");
    assert_eq!(doc["columns"][0], "l");
    assert!(doc["metadata"]["negative_weight"]
        .as_str()
        .unwrap()
        .parse::<f64>()
        .unwrap()
        .is_finite());

    let b = run(&[
        "compare-representations",
        "--N",
        "4",
        "--t_end",
        "2",
        "--t_steps",
        "5",
    ]);
    assert!(b.status.success());
    let text = String::from_utf8(b.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("# sigma_z_series_t0_offset = ")));
    assert!(text.lines().any(|l| l.starts_with("t,t_omega,sigma_x_dirac,")));
}

#[test]
fn oracle_check_passes_on_moderate_times() {
    let out = run(&["oracle-check", "--N", "4", "--times", "1,5"]);
    assert_eq!(out.status.code(), Some(0));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("oracle check passed"), "stderr: {err}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "t,max_deviation"));
}

#[test]
fn exit_codes_split_usage_config_and_numerics() {
    assert_eq!(code(&["spins", "--bogus"]), 1);
    assert_eq!(code(&["--help"]), 0);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "nonsense = 1\n").unwrap();
    assert_eq!(code(&["spins", "--config", bad.to_str().unwrap()]), 1);

    // energy-sign maps need the full dynamics
    assert_eq!(
        code(&[
            "density",
            "--representation",
            "fw",
            "--kinds",
            "sector:negative",
            "--N",
            "4",
            "--theta_points",
            "5",
            "--phi_points",
            "8",
            "--out",
            dir.path().to_str().unwrap(),
        ]),
        1
    );

    // an over-tight basis cap is a config error, not a numerics failure
    assert_eq!(code(&["oracle-check", "--basis_cap", "10"]), 1);

    // phase rounding across a giant leap breaks the agreement gate
    assert_eq!(code(&["oracle-check", "--times", "1e9"]), 2);
}
