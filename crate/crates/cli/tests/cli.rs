//! Contract tests for the binary: exit codes, artifact layout, and the
//! aggregation oracle for the Monte Carlo summary.

use std::path::Path;
use std::process::Command;

use nalgebra::DVector;

use ssreg_cli::config::{DisturbanceKind, ExperimentConfig, IdentifyMethod};
use ssreg_cli::disturbance::make_disturbance;
use ssreg_cli::montecarlo::{cmd_montecarlo_gain, derive_trial_seed};

use ssreg_core::excitation::{min_samples, random_pe_input};
use ssreg_core::identify::rolling_estimate;
use ssreg_core::lti::{random_admissible_system, simulate, steady_state_gains};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ssreg")
}

fn run(args: &[&str]) -> std::process::Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn too_few_samples_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    write(
        &cfg,
        r#"{
            "system": {"dims": {"n": 3, "m": 2, "p": 3, "r": 1}, "seed": 5, "spectral_radius": 0.6},
            "identify": {"method": "noise_free", "samples": 3}
        }"#,
    );
    let out = run(&[
        "identify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn malformed_config_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    write(&cfg, r#"{"horizont": 12}"#);
    let out = run(&["track", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let out = run(&["identify", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oversized_step_size_diverges_with_exit_code_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    write(
        &cfg,
        r#"{
            "system": {"dims": {"n": 1, "m": 1, "p": 1, "r": 1}, "seed": 7, "spectral_radius": 0.5},
            "cost": {"y_ref": {"constant": 4.0}},
            "horizon": 3000
        }"#,
    );
    let out_dir = tmp.path().join("first");
    let out = run(&[
        "track",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    // read the certified static bound and overstep it five-fold
    let cert: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("certificate.json")).unwrap())
            .unwrap();
    let eta_static = cert["eta_static"].as_f64().unwrap();
    let out = run(&[
        "track",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("second").to_str().unwrap(),
        "--eta",
        &format!("{}", 5.0 * eta_static),
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("diverged at step"), "stderr: {stderr}");
}

#[test]
fn zero_input_data_is_an_estimator_failure() {
    let tmp = tempfile::tempdir().unwrap();
    // trajectory CSV with a zero input signal: the identity equation of the
    // estimator is infeasible
    let mut csv = String::from("k,u_0,y_0\n");
    for k in 0..12 {
        csv.push_str(&format!("{k},0,0.5\n"));
    }
    csv.push_str("12,,0.5\n");
    let data = tmp.path().join("traj.csv");
    write(&data, &csv);
    let cfg = tmp.path().join("cfg.json");
    write(
        &cfg,
        &format!(
            r#"{{"data": "{}", "identify": {{"method": "noise_free"}}}}"#,
            data.display()
        ),
    );
    let out = run(&[
        "identify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn identify_from_csv_without_oracle_omits_the_error_line() {
    let tmp = tempfile::tempdir().unwrap();
    // noise-free scalar data generated in-process, then fed back as CSV
    let sys = random_admissible_system(1, 1, 1, 1, 7, 0.5).unwrap();
    let samples = min_samples(1, 2) + 10;
    let u = random_pe_input(1, samples, 2, 3).unwrap();
    let w = vec![DVector::zeros(1); samples];
    let traj = simulate(&sys, &DVector::zeros(1), &u, &w).unwrap();
    let data = tmp.path().join("traj.csv");
    write(&data, &traj.to_csv_string());

    let cfg = tmp.path().join("cfg.json");
    write(
        &cfg,
        &format!(
            r#"{{"data": "{}", "identify": {{"method": "noise_free"}}}}"#,
            data.display()
        ),
    );
    let out = run(&[
        "identify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(!stdout.contains("error_vs_oracle"), "stdout: {stdout}");

    let est: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("o/estimate.json")).unwrap())
            .unwrap();
    assert!(est["err_fro"].is_null());
    // the estimate itself matches the generating system's gain
    let g = steady_state_gains(&sys).unwrap().g[(0, 0)];
    assert!((est["g_hat"][0].as_f64().unwrap() - g).abs() < 1e-9);
}

#[test]
fn gen_system_writes_a_loadable_system() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    write(
        &cfg,
        r#"{"system": {"dims": {"n": 4, "m": 2, "p": 5, "r": 2}, "seed": 42, "spectral_radius": 0.8}}"#,
    );
    let out = run(&[
        "gen-system",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(tmp.path().join("o/system.json")).unwrap();
    let sys = ssreg_core::lti::LtiSystem::from_json_str(&text).unwrap();
    assert_eq!(sys.state_dim(), 4);
    assert_eq!(sys.output_dim(), 5);
}

#[test]
fn montecarlo_summary_matches_a_direct_recomputation() {
    let mut cfg = ExperimentConfig {
        system: Some(ssreg_cli::config::SystemSpec::Generate {
            dims: ssreg_cli::config::Dims {
                n: 3,
                m: 2,
                p: 3,
                r: 2,
            },
            seed: 5,
            spectral_radius: 0.6,
        }),
        trials: 5,
        seed: 42,
        ..ExperimentConfig::default()
    };
    cfg.identify.method = IdentifyMethod::Rolling;
    cfg.identify.excitation_seed = 3;
    cfg.identify.samples = Some(40);
    cfg.disturbance.kind = DisturbanceKind::IidGaussian {
        std: 0.1,
        decay_rate: None,
    };
    let tmp = tempfile::tempdir().unwrap();
    cfg.out_dir = tmp.path().to_path_buf();

    let summary = cmd_montecarlo_gain(&cfg).unwrap();

    // oracle recomputation through the library, trial by trial
    let sys = random_admissible_system(3, 2, 3, 2, 5, 0.6).unwrap();
    let oracle = steady_state_gains(&sys).unwrap();
    let n_bound = 3;
    let window = min_samples(2, n_bound + 1) + 1;
    let samples = 40;
    let input = random_pe_input(2, samples, n_bound + 1, 3).unwrap();
    let mut per_trial: Vec<Vec<Option<f64>>> = Vec::new();
    for trial in 0..cfg.trials {
        let mut spec = cfg.disturbance.clone();
        spec.seed = derive_trial_seed(cfg.seed, trial);
        let w = make_disturbance(&spec, samples, 2).unwrap();
        let traj = simulate(&sys, &DVector::zeros(3), &input, &w).unwrap();
        let ests = rolling_estimate(&traj.inputs, &traj.outputs, window, n_bound).unwrap();
        per_trial.push(
            ests.iter()
                .map(|e| {
                    e.estimate
                        .as_ref()
                        .map(|est| (&est.g_hat - &oracle.g).norm())
                })
                .collect(),
        );
    }
    assert_eq!(summary.rows.len(), per_trial[0].len());
    for (j, row) in summary.rows.iter().enumerate() {
        let present: Vec<f64> = per_trial.iter().filter_map(|t| t[j]).collect();
        let mean = present.iter().sum::<f64>() / present.len() as f64;
        let var =
            present.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (present.len() - 1) as f64;
        assert_eq!(row.pe_ok_trials, present.len());
        assert!((row.mean_err - mean).abs() <= 1e-12 * (1.0 + mean.abs()));
        assert!((row.std_err - var.sqrt()).abs() <= 1e-12 * (1.0 + var.sqrt()));
    }
}

#[test]
fn identify_error_levels_match_the_estimator_guarantees() {
    let tmp = tempfile::tempdir().unwrap();
    // noise-free scalar run recovers the gain at solver precision
    let cfg = tmp.path().join("nf.json");
    write(
        &cfg,
        r#"{
            "system": {"dims": {"n": 1, "m": 1, "p": 1, "r": 1}, "seed": 7, "spectral_radius": 0.5},
            "identify": {"method": "noise_free", "excitation_seed": 3}
        }"#,
    );
    let out_dir = tmp.path().join("nf");
    let out = run(&[
        "identify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let est: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("estimate.json")).unwrap())
            .unwrap();
    assert!(est["err_fro"].as_f64().unwrap() <= 1e-12);

    // constant disturbance with the differencing method
    let cfg = tmp.path().join("diff.json");
    write(
        &cfg,
        r#"{
            "system": {"dims": {"n": 1, "m": 1, "p": 1, "r": 1}, "seed": 7, "spectral_radius": 0.5},
            "disturbance": {"kind": "constant", "value": 1.0},
            "identify": {"method": "differenced", "excitation_seed": 3}
        }"#,
    );
    let out_dir = tmp.path().join("diff");
    let out = run(&[
        "identify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let est: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("estimate.json")).unwrap())
            .unwrap();
    assert!(est["err_fro"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn worker_cap_does_not_change_the_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    write(
        &cfg,
        r#"{
            "system": {"dims": {"n": 2, "m": 1, "p": 2, "r": 1}, "seed": 9, "spectral_radius": 0.5},
            "disturbance": {"kind": "iid_gaussian", "std": 0.05, "seed": 1},
            "identify": {"method": "rolling", "excitation_seed": 2, "samples": 20},
            "trials": 4,
            "seed": 11
        }"#,
    );
    let mut outputs = Vec::new();
    for (dir, workers) in [("a", None), ("b", Some("1")), ("c", Some("3"))] {
        let out_dir = tmp.path().join(dir);
        let mut command = Command::new(bin());
        command.args([
            "montecarlo-gain",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        match workers {
            Some(w) => {
                command.env("SSREG_WORKERS", w);
            }
            None => {
                command.env_remove("SSREG_WORKERS");
            }
        }
        let out = command.output().unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        outputs.push(std::fs::read(out_dir.join("mc_gain.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn conflicting_eta_flags_are_rejected() {
    let out = run(&["track", "--eta", "0.1", "--eta-frac", "0.5"]);
    // clap reports argument conflicts with its own exit code 2
    assert_eq!(out.status.code(), Some(2));
}
