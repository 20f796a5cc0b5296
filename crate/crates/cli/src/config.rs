//! Experiment configuration: JSON document plus CLI flag overrides.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

/// Top-level configuration consumed by every subcommand. Unknown fields are
/// rejected so typos surface as config errors.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Plant description: generated from dimensions and a seed, or loaded
    /// from a system JSON file.
    pub system: Option<SystemSpec>,
    /// Optional trajectory CSV consumed by `identify` instead of simulating.
    pub data: Option<PathBuf>,
    pub cost: CostSpec,
    pub disturbance: DisturbanceSpec,
    pub identify: IdentifySpec,
    pub eta: EtaSpec,
    /// Certificate split parameter in (0, 1).
    pub epsilon: f64,
    /// Where the controller's gain comes from in `track`.
    pub g_hat_source: GainSource,
    pub horizon: usize,
    pub trials: usize,
    /// Master seed; per-trial seeds are derived by counter.
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            system: None,
            data: None,
            cost: CostSpec::default(),
            disturbance: DisturbanceSpec::default(),
            identify: IdentifySpec::default(),
            eta: EtaSpec::default(),
            epsilon: 0.5,
            g_hat_source: GainSource::Identify,
            horizon: 5000,
            trials: 200,
            seed: 0,
            out_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SystemSpec {
    Generate {
        dims: Dims,
        seed: u64,
        spectral_radius: f64,
    },
    Load {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Dims {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub r: usize,
}

/// Quadratic cost specification: scaled identity weights and an output
/// target, broadcast or explicit.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostSpec {
    pub q_u_scale: f64,
    pub q_y_scale: f64,
    pub y_ref: YRefSpec,
}

impl Default for CostSpec {
    fn default() -> Self {
        Self {
            q_u_scale: 1.0,
            q_y_scale: 1.0,
            y_ref: YRefSpec::Constant { constant: 0.0 },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum YRefSpec {
    Constant { constant: f64 },
    Vector { vector: Vec<f64> },
}

/// Disturbance signal specification.
///
/// No `deny_unknown_fields` here: it cannot be combined with the flattened
/// kind tag.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DisturbanceSpec {
    #[serde(flatten)]
    pub kind: DisturbanceKind,
    pub seed: u64,
}

impl Default for DisturbanceSpec {
    fn default() -> Self {
        Self {
            kind: DisturbanceKind::Zero,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DisturbanceKind {
    Zero,
    Constant {
        value: ValueSpec,
    },
    /// IID Gaussian with a constant or geometrically decaying std schedule.
    IidGaussian {
        std: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        decay_rate: Option<f64>,
    },
    Sinusoid {
        amplitude: f64,
        period: f64,
    },
    RandomWalk {
        step_std: f64,
    },
    /// Documented default for tracking experiments under a structured
    /// time-varying disturbance: sinusoid plus a random walk.
    SinusoidPlusWalk {
        amplitude: f64,
        period: f64,
        step_std: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueSpec {
    Scalar(f64),
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentifySpec {
    pub method: IdentifyMethod,
    /// Upper bound on the unknown state dimension; defaults to the true n
    /// when the oracle system is available.
    pub n_bound: Option<usize>,
    /// Number of input samples to generate; defaults to the PE minimum plus
    /// a small margin.
    pub samples: Option<usize>,
    /// Rolling window length; defaults to the smallest admissible window.
    pub window: Option<usize>,
    pub excitation_seed: u64,
}

impl Default for IdentifySpec {
    fn default() -> Self {
        Self {
            method: IdentifyMethod::NoiseFree,
            n_bound: None,
            samples: None,
            window: None,
            excitation_seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentifyMethod {
    NoiseFree,
    Differenced,
    Rolling,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaSpec {
    Absolute { absolute: f64 },
    Fraction { fraction_of_eta_star: f64 },
}

impl Default for EtaSpec {
    fn default() -> Self {
        EtaSpec::Fraction {
            fraction_of_eta_star: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainSource {
    Identify,
    Oracle,
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self, String> {
        serde_json::from_str(s).map_err(|e| format!("config JSON: {e}"))
    }

    /// Basic structural validation shared by all subcommands.
    pub fn validate(&self) -> Result<(), String> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err("epsilon must lie in (0, 1)".into());
        }
        if self.horizon == 0 {
            return Err("horizon must be positive".into());
        }
        if self.cost.q_u_scale <= 0.0 || self.cost.q_y_scale <= 0.0 {
            return Err("cost scales must be positive".into());
        }
        match &self.eta {
            EtaSpec::Absolute { absolute } if *absolute <= 0.0 => {
                return Err("eta must be positive".into());
            }
            EtaSpec::Fraction {
                fraction_of_eta_star,
            } if *fraction_of_eta_star <= 0.0 => {
                return Err("eta fraction must be positive".into());
            }
            _ => {}
        }
        self.disturbance.validate()?;
        Ok(())
    }
}

impl DisturbanceSpec {
    pub fn validate(&self) -> Result<(), String> {
        match &self.kind {
            DisturbanceKind::IidGaussian { std, decay_rate } => {
                if *std < 0.0 {
                    return Err("disturbance std must be nonnegative".into());
                }
                if let Some(rate) = decay_rate {
                    if !(*rate > 0.0 && *rate <= 1.0) {
                        return Err("decay rate must lie in (0, 1]".into());
                    }
                }
            }
            DisturbanceKind::Sinusoid { period, .. }
            | DisturbanceKind::SinusoidPlusWalk { period, .. }
                if *period <= 0.0 =>
            {
                return Err("sinusoid period must be positive".into());
            }
            DisturbanceKind::RandomWalk { step_std }
            | DisturbanceKind::SinusoidPlusWalk { step_std, .. }
                if *step_std < 0.0 =>
            {
                return Err("random walk step std must be nonnegative".into());
            }
            _ => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = ExperimentConfig::from_json_str("{}").unwrap();
        assert_eq!(cfg.trials, 200);
        assert_eq!(cfg.epsilon, 0.5);
        cfg.validate().unwrap();
    }

    #[test]
    fn full_config_round_trips() {
        let json = r#"{
            "system": {"dims": {"n": 3, "m": 2, "p": 3, "r": 1}, "seed": 5, "spectral_radius": 0.6},
            "cost": {"q_u_scale": 1.0, "q_y_scale": 0.5, "y_ref": {"constant": 1.0}},
            "disturbance": {"kind": "sinusoid", "amplitude": 0.5, "period": 120.0, "seed": 9},
            "identify": {"method": "rolling", "samples": 80, "excitation_seed": 3},
            "eta": {"fraction_of_eta_star": 0.5},
            "horizon": 2000,
            "trials": 10,
            "seed": 42,
            "out_dir": "results"
        }"#;
        let cfg = ExperimentConfig::from_json_str(json).unwrap();
        cfg.validate().unwrap();
        assert!(matches!(cfg.identify.method, IdentifyMethod::Rolling));
        assert!(matches!(
            cfg.disturbance.kind,
            DisturbanceKind::Sinusoid { .. }
        ));
        let back = ExperimentConfig::from_json_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back.horizon, 2000);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(ExperimentConfig::from_json_str(r#"{"horizont": 3}"#).is_err());
    }

    #[test]
    fn invalid_epsilon_fails_validation() {
        let cfg = ExperimentConfig {
            epsilon: 1.0,
            ..ExperimentConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
