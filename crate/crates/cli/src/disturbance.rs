//! Disturbance signal library.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::{DisturbanceKind, DisturbanceSpec, ValueSpec};
use crate::error::CliError;

fn standard_normal(rng: &mut ChaCha20Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Generates a length-`length` sequence of `r`-dimensional disturbance
/// samples. Deterministic given the spec's seed; per-step schedules are
/// applied in order.
pub fn make_disturbance(
    spec: &DisturbanceSpec,
    length: usize,
    r: usize,
) -> Result<Vec<DVector<f64>>, CliError> {
    spec.validate().map_err(CliError::Config)?;
    if length == 0 {
        return Err(CliError::Config(
            "disturbance length must be positive".into(),
        ));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let seq = match &spec.kind {
        DisturbanceKind::Zero => vec![DVector::zeros(r); length],
        DisturbanceKind::Constant { value } => {
            let sample = match value {
                ValueSpec::Scalar(v) => DVector::from_element(r, *v),
                ValueSpec::Vector(vals) => {
                    if vals.len() != r {
                        return Err(CliError::Config(format!(
                            "constant disturbance has {} components, expected {r}",
                            vals.len()
                        )));
                    }
                    DVector::from_column_slice(vals)
                }
            };
            vec![sample; length]
        }
        DisturbanceKind::IidGaussian { std, decay_rate } => {
            let rate = decay_rate.unwrap_or(1.0);
            (0..length)
                .map(|k| {
                    let std_k = std * rate.powi(k as i32);
                    DVector::from_fn(r, |_, _| std_k * standard_normal(&mut rng))
                })
                .collect()
        }
        DisturbanceKind::Sinusoid { amplitude, period } => (0..length)
            .map(|k| sinusoid_sample(*amplitude, *period, k, r))
            .collect(),
        DisturbanceKind::RandomWalk { step_std } => walk(&mut rng, *step_std, length, r),
        DisturbanceKind::SinusoidPlusWalk {
            amplitude,
            period,
            step_std,
        } => {
            let walk = walk(&mut rng, *step_std, length, r);
            (0..length)
                .map(|k| sinusoid_sample(*amplitude, *period, k, r) + &walk[k])
                .collect()
        }
    };
    Ok(seq)
}

/// Phase-staggered sinusoid so that the components of a vector disturbance
/// are not collinear.
fn sinusoid_sample(amplitude: f64, period: f64, k: usize, r: usize) -> DVector<f64> {
    DVector::from_fn(r, |i, _| {
        let phase = 2.0 * std::f64::consts::PI * i as f64 / r as f64;
        amplitude * (2.0 * std::f64::consts::PI * k as f64 / period + phase).sin()
    })
}

fn walk(rng: &mut ChaCha20Rng, step_std: f64, length: usize, r: usize) -> Vec<DVector<f64>> {
    let mut current = DVector::zeros(r);
    let mut out = Vec::with_capacity(length);
    for _ in 0..length {
        out.push(current.clone());
        current += DVector::from_fn(r, |_, _| step_std * standard_normal(rng));
    }
    out
}
