//! Subcommand implementations: `gen-system`, `identify`, `track`.
//!
//! Every command writes its artifacts under the configured output directory
//! with fixed file names (`system.json`, `estimate.json`, `residuals.csv`,
//! `certificate.json`, `tracking.csv`) and returns a summary for stdout.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};

use ssreg_core::excitation::{min_samples, random_pe_input};
use ssreg_core::identify::{
    estimate_gain_constant_noise, estimate_gain_noise_free, estimates_to_csv_string,
    rolling_estimate, GainEstimate, WindowEstimate,
};
use ssreg_core::lti::{
    random_admissible_system, simulate, steady_state_gains, LtiSystem, Trajectory,
};
use ssreg_core::opt_control::{
    lyapunov_diagnostic, run_closed_loop, step_size_certificate, ClosedLoopStatus, QuadraticCost,
    StepSizeCertificate,
};

use crate::config::{EtaSpec, ExperimentConfig, GainSource, IdentifyMethod, SystemSpec, YRefSpec};
use crate::disturbance::make_disturbance;
use crate::error::CliError;

/// Builds or loads the plant named by the config.
pub fn resolve_system(cfg: &ExperimentConfig) -> Result<Option<LtiSystem>, CliError> {
    match &cfg.system {
        None => Ok(None),
        Some(SystemSpec::Generate {
            dims,
            seed,
            spectral_radius,
        }) => {
            let sys =
                random_admissible_system(dims.n, dims.m, dims.p, dims.r, *seed, *spectral_radius)?;
            Ok(Some(sys))
        }
        Some(SystemSpec::Load { path }) => {
            let text = fs::read_to_string(path)?;
            Ok(Some(LtiSystem::from_json_str(&text)?))
        }
    }
}

/// Builds the quadratic cost for the given plant dimensions.
pub fn build_cost(cfg: &ExperimentConfig, m: usize, p: usize) -> Result<QuadraticCost, CliError> {
    let y_ref = match &cfg.cost.y_ref {
        YRefSpec::Constant { constant } => DVector::from_element(p, *constant),
        YRefSpec::Vector { vector } => {
            if vector.len() != p {
                return Err(CliError::Config(format!(
                    "y_ref has {} components, expected {p}",
                    vector.len()
                )));
            }
            DVector::from_column_slice(vector)
        }
    };
    Ok(QuadraticCost::new(
        DMatrix::identity(m, m) * cfg.cost.q_u_scale,
        DMatrix::identity(p, p) * cfg.cost.q_y_scale,
        y_ref,
    )?)
}

fn ensure_out_dir(cfg: &ExperimentConfig) -> Result<PathBuf, CliError> {
    fs::create_dir_all(&cfg.out_dir)?;
    Ok(cfg.out_dir.clone())
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

/// `gen-system`: generates a random admissible plant and stores it.
pub fn cmd_gen_system(cfg: &ExperimentConfig) -> Result<PathBuf, CliError> {
    let sys = resolve_system(cfg)?
        .ok_or_else(|| CliError::Config("gen-system needs a system spec".into()))?;
    let dir = ensure_out_dir(cfg)?;
    write_file(&dir, "system.json", &sys.to_json_string())
}

/// Everything `identify` produced, for stdout reporting and tests.
pub struct IdentifyOutcome {
    pub estimate: GainEstimate,
    /// Frobenius error against the model-based gain, when available.
    pub err_fro: Option<f64>,
    pub windows: usize,
    pub skipped_windows: usize,
}

/// `identify`: generates or loads data, runs the configured estimator and
/// writes `estimate.json` plus `residuals.csv`.
pub fn cmd_identify(cfg: &ExperimentConfig) -> Result<IdentifyOutcome, CliError> {
    let sys = resolve_system(cfg)?;
    let (traj, n_bound) = resolve_identify_data(cfg, sys.as_ref())?;
    let oracle_g = match &sys {
        Some(sys) => Some(steady_state_gains(sys)?.g),
        None => None,
    };

    let (estimates, headline) = match cfg.identify.method {
        IdentifyMethod::NoiseFree => {
            let est = estimate_gain_noise_free(&traj.inputs, &traj.outputs)?;
            (single_window(&traj, est.clone()), est)
        }
        IdentifyMethod::Differenced => {
            let est = estimate_gain_constant_noise(&traj.inputs, &traj.outputs)?;
            (single_window(&traj, est.clone()), est)
        }
        IdentifyMethod::Rolling => {
            let n_bound = n_bound.ok_or_else(|| {
                CliError::Config("rolling identification needs n_bound (or a system)".into())
            })?;
            let window = cfg
                .identify
                .window
                .unwrap_or_else(|| min_samples(input_dim(&traj), n_bound + 1) + 1);
            let estimates = rolling_estimate(&traj.inputs, &traj.outputs, window, n_bound)?;
            let headline = estimates
                .iter()
                .rev()
                .find_map(|e| e.estimate.clone())
                .ok_or_else(|| CliError::Estimator("every rolling window was skipped".into()))?;
            (estimates, headline)
        }
    };

    let err_fro = oracle_g.as_ref().map(|g| (&headline.g_hat - g).norm());
    let dir = ensure_out_dir(cfg)?;
    write_file(&dir, "estimate.json", &estimate_json(&headline, err_fro))?;
    write_file(
        &dir,
        "residuals.csv",
        &estimates_to_csv_string(&estimates, oracle_g.as_ref()),
    )?;

    let skipped = estimates.iter().filter(|e| e.estimate.is_none()).count();
    Ok(IdentifyOutcome {
        estimate: headline,
        err_fro,
        windows: estimates.len(),
        skipped_windows: skipped,
    })
}

fn input_dim(traj: &Trajectory) -> usize {
    traj.inputs.first().map_or(0, |u| u.len())
}

fn single_window(traj: &Trajectory, est: GainEstimate) -> Vec<WindowEstimate> {
    vec![WindowEstimate {
        step: traj.inputs.len(),
        pe_ok: true,
        pe_mismatch: false,
        estimate: Some(est),
    }]
}

/// Loads the trajectory from CSV or simulates one from the configured
/// system, excitation and disturbance. Returns the data and the state
/// dimension bound for PE orders.
fn resolve_identify_data(
    cfg: &ExperimentConfig,
    sys: Option<&LtiSystem>,
) -> Result<(Trajectory, Option<usize>), CliError> {
    let n_bound = cfg.identify.n_bound.or(sys.map(|s| s.state_dim()));
    if let Some(path) = &cfg.data {
        let text = fs::read_to_string(path)?;
        return Ok((Trajectory::from_csv_str(&text)?, n_bound));
    }
    let sys = sys.ok_or_else(|| {
        CliError::Config("identify needs either a data path or a system spec".into())
    })?;
    let n_bound_val =
        n_bound.expect("n_bound defaults to the state dimension when a system is present");
    let order = n_bound_val + 1;
    let m = sys.input_dim();
    let samples = cfg.identify.samples.unwrap_or_else(|| {
        let base = min_samples(m, order);
        match cfg.identify.method {
            IdentifyMethod::Rolling => {
                let window = cfg.identify.window.unwrap_or(base + 1);
                window + 60
            }
            _ => base + 10,
        }
    });
    let u = random_pe_input(m, samples, order, cfg.identify.excitation_seed)?;
    let w = make_disturbance(&cfg.disturbance, samples, sys.disturbance_dim())?;
    let traj = simulate(sys, &DVector::zeros(sys.state_dim()), &u, &w)?;
    Ok((traj, n_bound))
}

fn matrix_row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

fn estimate_json(est: &GainEstimate, err_fro: Option<f64>) -> String {
    serde_json::json!({
        "method": est.method.as_str(),
        "p": est.g_hat.nrows(),
        "m": est.g_hat.ncols(),
        "g_hat": matrix_row_major(&est.g_hat),
        "residual_equality": est.residual_equality,
        "residual_identity": est.residual_identity,
        "window_start": est.window.0,
        "window_len": est.window.1,
        "err_fro": err_fro,
    })
    .to_string()
}

/// Everything `track` produced.
pub struct TrackOutcome {
    pub certificate: StepSizeCertificate,
    pub eta: f64,
    pub steps: usize,
    pub terminal_tracking_error: f64,
    pub decrease_violations: usize,
}

/// `track`: two-phase experiment. The gain is identified from noise-free
/// data (or taken from the oracle), the certificate fixes the step size,
/// and the closed loop runs against the configured disturbance.
pub fn cmd_track(cfg: &ExperimentConfig) -> Result<TrackOutcome, CliError> {
    let sys =
        resolve_system(cfg)?.ok_or_else(|| CliError::Config("track needs a system spec".into()))?;
    let cost = build_cost(cfg, sys.input_dim(), sys.output_dim())?;
    let gains = steady_state_gains(&sys)?;

    let g_hat = match cfg.g_hat_source {
        GainSource::Oracle => gains.g.clone(),
        GainSource::Identify => {
            let n_bound = cfg.identify.n_bound.unwrap_or_else(|| sys.state_dim());
            let order = n_bound + 1;
            let m = sys.input_dim();
            let samples = cfg
                .identify
                .samples
                .unwrap_or_else(|| min_samples(m, order) + 10);
            let u = random_pe_input(m, samples, order, cfg.identify.excitation_seed)?;
            let zeros = vec![DVector::zeros(sys.disturbance_dim()); samples];
            let traj = simulate(&sys, &DVector::zeros(sys.state_dim()), &u, &zeros)?;
            estimate_gain_noise_free(&traj.inputs, &traj.outputs)?.g_hat
        }
    };

    let certificate = step_size_certificate(&sys, &cost, &g_hat, cfg.epsilon, None)?;
    let eta = match cfg.eta {
        EtaSpec::Absolute { absolute } => absolute,
        EtaSpec::Fraction {
            fraction_of_eta_star,
        } => fraction_of_eta_star * certificate.eta_star,
    };

    let w = make_disturbance(&cfg.disturbance, cfg.horizon, sys.disturbance_dim())?;
    let mut record = run_closed_loop(
        &sys,
        &cost,
        &g_hat,
        eta,
        &DVector::zeros(sys.state_dim()),
        &DVector::zeros(sys.input_dim()),
        &w,
        cfg.horizon,
    )?;
    let diag = lyapunov_diagnostic(&sys, &cost, &gains.g, &gains.h, &record, &certificate)?;
    record.attach_diagnostic(&diag);

    let dir = ensure_out_dir(cfg)?;
    write_file(&dir, "certificate.json", &certificate.to_json_string())?;
    write_file(&dir, "tracking.csv", &record.to_csv_string())?;

    if let ClosedLoopStatus::Diverged { step } = record.status {
        return Err(CliError::Diverged { step });
    }
    Ok(TrackOutcome {
        certificate,
        eta,
        steps: record.steps(),
        terminal_tracking_error: *record.tracking_error.last().unwrap_or(&f64::NAN),
        decrease_violations: record.decrease_ok.iter().filter(|ok| !**ok).count(),
    })
}
