//! Monte Carlo campaign over disturbance realizations for the rolling
//! gain estimator.

use nalgebra::DVector;
use rayon::prelude::*;

use ssreg_core::excitation::{min_samples, random_pe_input};
use ssreg_core::identify::rolling_estimate;
use ssreg_core::lti::{simulate, steady_state_gains};

use crate::commands::resolve_system;
use crate::config::ExperimentConfig;
use crate::disturbance::make_disturbance;
use crate::error::CliError;

/// Environment variable capping the worker count.
pub const WORKERS_ENV: &str = "SSREG_WORKERS";

/// Per-step aggregate of the estimation error over trials.
#[derive(Debug, Clone)]
pub struct McRow {
    pub step: usize,
    /// Mean Frobenius error over the trials whose window produced an
    /// estimate; NaN if none did.
    pub mean_err: f64,
    /// Sample standard deviation over those trials.
    pub std_err: f64,
    /// Number of trials whose PE certificate passed at this step.
    pub pe_ok_trials: usize,
}

/// Campaign summary: per-step statistics plus reproducibility metadata.
#[derive(Debug, Clone)]
pub struct MonteCarloSummary {
    pub rows: Vec<McRow>,
    pub trials: usize,
    pub window: usize,
    pub disturbance: String,
}

impl MonteCarloSummary {
    /// CSV document with the stable header
    /// `k,mean_err_fro,std_err_fro,trials,pe_ok_trials`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("k,mean_err_fro,std_err_fro,trials,pe_ok_trials\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.step, row.mean_err, row.std_err, self.trials, row.pe_ok_trials
            ));
        }
        out
    }
}

/// splitmix64 mix for counter-derived per-trial seeds.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

pub fn derive_trial_seed(master: u64, trial: usize) -> u64 {
    splitmix64(master ^ splitmix64(trial as u64))
}

/// `montecarlo-gain`: runs the rolling estimator over independent
/// disturbance realizations and aggregates the per-step error against the
/// model-based gain. Writes `mc_gain.csv`.
pub fn cmd_montecarlo_gain(cfg: &ExperimentConfig) -> Result<MonteCarloSummary, CliError> {
    if cfg.trials < 2 {
        return Err(CliError::Config(
            "montecarlo-gain needs at least 2 trials".into(),
        ));
    }
    let sys = resolve_system(cfg)?
        .ok_or_else(|| CliError::Config("montecarlo-gain needs a system spec".into()))?;
    let oracle = steady_state_gains(&sys)?;
    let n_bound = cfg.identify.n_bound.unwrap_or_else(|| sys.state_dim());
    let order = n_bound + 1;
    let m = sys.input_dim();
    let window = cfg
        .identify
        .window
        .unwrap_or_else(|| min_samples(m, order) + 1);
    let samples = cfg.identify.samples.unwrap_or(window + 60);
    if samples < window + 1 {
        return Err(CliError::Config(format!(
            "samples ({samples}) must exceed the rolling window ({window})"
        )));
    }

    // one persistently exciting input shared by all trials; the disturbance
    // realization varies per trial
    let input = random_pe_input(m, samples, order, cfg.identify.excitation_seed)?;
    let x0 = DVector::zeros(sys.state_dim());
    let r = sys.disturbance_dim();

    let run_trial = |trial: usize| -> Result<Vec<Option<f64>>, CliError> {
        let mut spec = cfg.disturbance.clone();
        spec.seed = derive_trial_seed(cfg.seed, trial);
        let w = make_disturbance(&spec, samples, r)?;
        let traj = simulate(&sys, &x0, &input, &w)?;
        let estimates = rolling_estimate(&traj.inputs, &traj.outputs, window, n_bound)?;
        Ok(estimates
            .iter()
            .map(|e| {
                e.estimate
                    .as_ref()
                    .map(|est| (&est.g_hat - &oracle.g).norm())
            })
            .collect())
    };

    let trial_errors: Vec<Vec<Option<f64>>> = run_in_pool(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(run_trial)
            .collect::<Result<Vec<_>, CliError>>()
    })?;

    // aggregation in trial order keeps the output byte-deterministic
    let steps = trial_errors.first().map_or(0, |t| t.len());
    let mut rows = Vec::with_capacity(steps);
    for j in 0..steps {
        let present: Vec<f64> = trial_errors.iter().filter_map(|t| t[j]).collect();
        let count = present.len();
        let mean = if count > 0 {
            present.iter().sum::<f64>() / count as f64
        } else {
            f64::NAN
        };
        let std = if count > 1 {
            let var = present.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            var.sqrt()
        } else {
            0.0
        };
        rows.push(McRow {
            step: window + j,
            mean_err: mean,
            std_err: std,
            pe_ok_trials: count,
        });
    }

    let summary = MonteCarloSummary {
        rows,
        trials: cfg.trials,
        window,
        disturbance: serde_json::to_string(&cfg.disturbance)
            .unwrap_or_else(|_| "unserializable".into()),
    };
    std::fs::create_dir_all(&cfg.out_dir)?;
    std::fs::write(cfg.out_dir.join("mc_gain.csv"), summary.to_csv_string())?;
    Ok(summary)
}

/// Runs the closure inside a rayon pool sized by `SSREG_WORKERS` when set.
fn run_in_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let workers = std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0);
    match workers.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}
