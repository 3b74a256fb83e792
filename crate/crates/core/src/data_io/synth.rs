use thiserror::Error;

use super::{Observation, Panel};
use crate::model::{eval_v, InputPoint, Parameters};
use crate::rng::CounterRng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid synthesis spec: {0}")]
    InvalidSpec(String),
    #[error("region is unsatisfiable: {failed} draws hit a non-positive bracket before {n} rows were produced")]
    UnsatisfiableRegion { failed: usize, n: usize },
}

/// Recipe for a synthetic panel with known parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub true_params: Parameters,
    pub n: usize,
    pub k_range: (f64, f64),
    pub l_range: (f64, f64),
    /// Sigma of the mean-one multiplicative lognormal noise.
    pub noise_sd: f64,
    pub seed: u64,
    pub industry_code: String,
}

impl SynthSpec {
    pub fn new(true_params: Parameters, n: usize, noise_sd: f64, seed: u64) -> Self {
        Self {
            true_params,
            n,
            k_range: (0.5, 10.0),
            l_range: (0.5, 10.0),
            noise_sd,
            seed,
            industry_code: "SYN".into(),
        }
    }
}

/// Draws `K, L` log-uniformly and sets `V = V_model * exp(s z - s^2 / 2)`.
///
/// Each attempt consumes four counter draws in the order `K, L, z1, z2`
/// (`z1, z2` feed Box-Muller). Attempts that hit a non-positive bracket are
/// discarded; after `100 n` discards the region is declared unsatisfiable.
pub fn synth_panel(spec: &SynthSpec) -> Result<Panel, SynthError> {
    for (name, (lo, hi)) in [("K", spec.k_range), ("L", spec.l_range)] {
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return Err(SynthError::InvalidSpec(format!(
                "{name} range [{lo}, {hi}] must be positive and ordered"
            )));
        }
    }
    if !(spec.noise_sd.is_finite() && spec.noise_sd >= 0.0) {
        return Err(SynthError::InvalidSpec(format!(
            "noise_sd must be >= 0 (got {})",
            spec.noise_sd
        )));
    }
    if spec.n == 0 {
        return Err(SynthError::InvalidSpec("n must be at least 1".into()));
    }

    let mut rng = CounterRng::new(spec.seed);
    let max_failures = 100 * spec.n;
    let mut failed = 0usize;
    let mut observations = Vec::with_capacity(spec.n);
    let s = spec.noise_sd;
    while observations.len() < spec.n {
        let k = rng.log_uniform(spec.k_range.0, spec.k_range.1);
        let l = rng.log_uniform(spec.l_range.0, spec.l_range.1);
        let z = rng.standard_normal();
        let x = InputPoint::new(k, l).expect("positive range");
        match eval_v(&spec.true_params, &x) {
            Ok(e) => {
                let i = observations.len();
                observations.push(Observation {
                    industry_code: spec.industry_code.clone(),
                    year: 2010 + (i % 8) as i32,
                    k,
                    l,
                    v: e.v * (s * z - 0.5 * s * s).exp(),
                });
            }
            Err(_) => {
                failed += 1;
                if failed >= max_failures {
                    return Err(SynthError::UnsatisfiableRegion { failed, n: spec.n });
                }
            }
        }
    }
    Ok(Panel::new(
        observations,
        format!("synthetic seed={} noise_sd={}", spec.seed, spec.noise_sd),
    ))
}
