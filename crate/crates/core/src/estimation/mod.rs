//! Calibration of `(A, sigma, delta, p, q)` to observed panels.
//!
//! The objective is the residual sum of squares. Each start runs a
//! Nelder-Mead search over `[ln A, sigma, delta, p, q]`; box constraints are
//! enforced by clipping inside the objective, and parameter vectors at which
//! any row has a non-positive bracket score `+inf`. The best start wins with
//! ties broken by start index.

mod lhs;
mod nelder_mead;

pub use lhs::latin_hypercube;
pub use nelder_mead::{minimize, NelderMeadOptions, NelderMeadOutcome};

use serde::Serialize;
use thiserror::Error;

use crate::data_io::Panel;
use crate::error::ModelError;
use crate::model::{eval_v, substitution_elasticity, InputPoint, Parameters, MIN_CURVATURE};

/// Number of free parameters.
pub const N_PARAMS: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimationError {
    #[error("too few observations: {n_obs} (need at least {required})")]
    TooFewObservations { n_obs: usize, required: usize },
    #[error("row {row}: {source}")]
    Row { row: usize, source: ModelError },
    #[error("every start failed: no start reached an evaluable parameter vector")]
    AllStartsFailed,
    #[error("invalid fit configuration: {0}")]
    InvalidConfig(String),
}

pub fn predict(params: &Parameters, panel: &Panel) -> Result<Vec<f64>, EstimationError> {
    panel
        .observations
        .iter()
        .enumerate()
        .map(|(row, o)| {
            let x =
                InputPoint::new(o.k, o.l).map_err(|source| EstimationError::Row { row, source })?;
            eval_v(params, &x)
                .map(|e| e.v)
                .map_err(|source| EstimationError::Row { row, source })
        })
        .collect()
}

/// `V_observed - V_predicted`, in panel order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualVector {
    pub values: Vec<f64>,
}

impl ResidualVector {
    pub fn rss(&self) -> f64 {
        self.values.iter().map(|r| r * r).sum()
    }
}

pub fn residuals(params: &Parameters, panel: &Panel) -> Result<ResidualVector, EstimationError> {
    let predicted = predict(params, panel)?;
    Ok(ResidualVector {
        values: panel
            .observations
            .iter()
            .zip(predicted)
            .map(|(o, v)| o.v - v)
            .collect(),
    })
}

/// Goodness of fit for arbitrary parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitStatistics {
    pub rss: f64,
    /// `None` when the observed V has zero variance.
    pub r_squared: Option<f64>,
    /// `sqrt(rss / (n - 5))`; `None` unless `n > 5`.
    pub std_error: Option<f64>,
    /// At the median `(K, L)`; `None` when undefined there.
    pub substitution_elasticity: Option<f64>,
}

fn median(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median K and median L of the panel (taken separately).
pub fn median_point(panel: &Panel) -> Option<InputPoint> {
    if panel.is_empty() {
        return None;
    }
    let k = median(panel.observations.iter().map(|o| o.k));
    let l = median(panel.observations.iter().map(|o| o.l));
    InputPoint::new(k, l).ok()
}

pub fn fit_statistics(
    params: &Parameters,
    panel: &Panel,
) -> Result<FitStatistics, EstimationError> {
    let n = panel.len();
    if n == 0 {
        return Err(EstimationError::TooFewObservations {
            n_obs: 0,
            required: 1,
        });
    }
    let rss = residuals(params, panel)?.rss();
    let mean = panel.observations.iter().map(|o| o.v).sum::<f64>() / n as f64;
    let tss: f64 = panel
        .observations
        .iter()
        .map(|o| (o.v - mean).powi(2))
        .sum();
    let r_squared = (tss > 0.0).then(|| 1.0 - rss / tss);
    let std_error = (n > N_PARAMS).then(|| (rss / (n - N_PARAMS) as f64).sqrt());
    let substitution_elasticity = median_point(panel)
        .and_then(|x| substitution_elasticity(params, &x).ok())
        .filter(|s| !s.degenerate)
        .map(|s| s.value);
    Ok(FitStatistics {
        rss,
        r_squared,
        std_error,
        substitution_elasticity,
    })
}

/// Closed box for the search. `p` and `q` range over `[-hi, -lo] U [lo, hi]`
/// of their magnitude bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamBounds {
    pub a: (f64, f64),
    pub sigma: (f64, f64),
    pub delta: (f64, f64),
    pub p_abs: (f64, f64),
    pub q_abs: (f64, f64),
}

impl Default for ParamBounds {
    fn default() -> Self {
        Self {
            a: (1e-6, 1e6),
            sigma: (0.0, 2.0),
            delta: (0.0, 2.0),
            p_abs: (MIN_CURVATURE, 1.0),
            q_abs: (MIN_CURVATURE, 1.0),
        }
    }
}

impl ParamBounds {
    fn validate(&self) -> Result<(), EstimationError> {
        let bad = |what: &str| Err(EstimationError::InvalidConfig(format!("bounds: {what}")));
        let ordered = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo <= hi;
        if !(ordered(self.a) && self.a.0 > 0.0) {
            return bad("A interval must be positive and ordered");
        }
        for (name, iv) in [("sigma", self.sigma), ("delta", self.delta)] {
            if !(ordered(iv) && iv.0 >= 0.0 && iv.1 <= 2.0) {
                return bad(&format!("{name} interval must lie in [0, 2]"));
            }
        }
        for (name, iv) in [("|p|", self.p_abs), ("|q|", self.q_abs)] {
            if !(ordered(iv) && iv.0 >= MIN_CURVATURE) {
                return bad(&format!("{name} interval must lie in [1e-3, inf)"));
            }
        }
        Ok(())
    }

    /// Nearest admissible parameters to a search vector `[ln A, sigma, delta, p, q]`.
    pub fn clip(&self, z: &[f64]) -> Parameters {
        let signed = |v: f64, (lo, hi): (f64, f64)| {
            let sign = if v < 0.0 { -1.0 } else { 1.0 };
            sign * v.abs().clamp(lo, hi)
        };
        let a = z[0]
            .clamp(self.a.0.ln(), self.a.1.ln())
            .exp()
            .clamp(self.a.0, self.a.1);
        Parameters::new(
            a,
            z[1].clamp(self.sigma.0, self.sigma.1),
            z[2].clamp(self.delta.0, self.delta.1),
            signed(z[3], self.p_abs),
            signed(z[4], self.q_abs),
        )
        .expect("validated bounds yield valid parameters")
    }

    /// Search-space box `[ln A, sigma, delta, p, q]`.
    fn search_box(&self) -> [(f64, f64); N_PARAMS] {
        [
            (self.a.0.ln(), self.a.1.ln()),
            self.sigma,
            self.delta,
            (-self.p_abs.1, self.p_abs.1),
            (-self.q_abs.1, self.q_abs.1),
        ]
    }

    pub fn contains(&self, prm: &Parameters) -> bool {
        let inside = |v: f64, (lo, hi): (f64, f64)| lo <= v && v <= hi;
        inside(prm.a(), self.a)
            && inside(prm.sigma(), self.sigma)
            && inside(prm.delta(), self.delta)
            && inside(prm.p().abs(), self.p_abs)
            && inside(prm.q().abs(), self.q_abs)
    }
}

fn to_search(prm: &Parameters) -> Vec<f64> {
    vec![prm.a().ln(), prm.sigma(), prm.delta(), prm.p(), prm.q()]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitConfig {
    pub n_starts: usize,
    pub seed: u64,
    pub max_iters_per_start: usize,
    pub objective_tol: f64,
    pub param_tol: f64,
    pub bounds: ParamBounds,
    /// Extra starts, searched after the Latin-hypercube ones.
    pub user_starts: Vec<Parameters>,
}

impl FitConfig {
    pub fn new(n_starts: usize, seed: u64) -> Self {
        Self {
            n_starts,
            seed,
            max_iters_per_start: 2000,
            objective_tol: 1e-12,
            param_tol: 1e-10,
            bounds: ParamBounds::default(),
            user_starts: Vec::new(),
        }
    }

    pub fn with_user_start(mut self, start: Parameters) -> Self {
        self.user_starts.push(start);
        self
    }

    fn validate(&self) -> Result<(), EstimationError> {
        self.bounds.validate()?;
        if self.n_starts + self.user_starts.len() == 0 {
            return Err(EstimationError::InvalidConfig(
                "at least one start is required".into(),
            ));
        }
        if self.max_iters_per_start == 0 {
            return Err(EstimationError::InvalidConfig(
                "max_iters_per_start must be positive".into(),
            ));
        }
        if !(self.objective_tol >= 0.0 && self.param_tol >= 0.0) {
            return Err(EstimationError::InvalidConfig(
                "tolerances must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StartOrigin {
    LatinHypercube,
    User,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartSummary {
    pub index: usize,
    pub origin: StartOrigin,
    pub initial: Parameters,
    /// Best objective reached; `None` if the start never left the rejected region.
    pub rss: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// Best-of-multistart estimate with goodness-of-fit statistics.
/// Undefined statistics are NaN.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub params: Parameters,
    pub rss: f64,
    pub r_squared: f64,
    pub std_error: f64,
    pub substitution_elasticity: f64,
    pub converged: bool,
    pub n_iterations: usize,
    pub best_start_index: usize,
    pub n_obs: usize,
    pub starts: Vec<StartSummary>,
}

/// Objective used by the search: RSS at the clipped parameters, `+inf` if
/// any row fails to evaluate.
pub fn clipped_rss(bounds: &ParamBounds, panel: &Panel, z: &[f64]) -> f64 {
    let prm = bounds.clip(z);
    let mut rss = 0.0;
    for o in &panel.observations {
        let Ok(x) = InputPoint::new(o.k, o.l) else {
            return f64::INFINITY;
        };
        match eval_v(&prm, &x) {
            Ok(e) => rss += (o.v - e.v).powi(2),
            Err(_) => return f64::INFINITY,
        }
    }
    if rss.is_finite() {
        rss
    } else {
        f64::INFINITY
    }
}

// Initial simplex edge as a fraction of each search-box width.
const INITIAL_STEP_FRACTION: f64 = 0.05;
const MAX_LOG_A_STEP: f64 = 0.25;

fn initial_steps(bounds: &ParamBounds, z0: &[f64]) -> Vec<f64> {
    bounds
        .search_box()
        .iter()
        .enumerate()
        .map(|(i, &(lo, hi))| {
            let mut step = INITIAL_STEP_FRACTION * (hi - lo);
            if i == 0 {
                step = step.min(MAX_LOG_A_STEP);
            }
            if step == 0.0 {
                step = 1e-3;
            }
            if z0[i] + step > hi {
                -step
            } else {
                step
            }
        })
        .collect()
}

pub fn fit(panel: &Panel, cfg: &FitConfig) -> Result<FitResult, EstimationError> {
    cfg.validate()?;
    let n_obs = panel.len();
    if n_obs <= N_PARAMS {
        return Err(EstimationError::TooFewObservations {
            n_obs,
            required: N_PARAMS + 1,
        });
    }
    for (row, o) in panel.observations.iter().enumerate() {
        for (input, value) in [("K", o.k), ("L", o.l), ("V", o.v)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(EstimationError::Row {
                    row,
                    source: ModelError::Domain { input, value },
                });
            }
        }
    }

    let search_box = cfg.bounds.search_box();
    let mut starts: Vec<(StartOrigin, Vec<f64>)> =
        latin_hypercube(cfg.n_starts, &search_box, cfg.seed)
            .into_iter()
            .map(|z| (StartOrigin::LatinHypercube, z))
            .collect();
    starts.extend(
        cfg.user_starts
            .iter()
            .map(|p| (StartOrigin::User, to_search(p))),
    );

    let opts = NelderMeadOptions {
        max_iters: cfg.max_iters_per_start,
        objective_tol: cfg.objective_tol,
        param_tol: cfg.param_tol,
        restarts: 2,
    };
    let objective = |z: &[f64]| clipped_rss(&cfg.bounds, panel, z);

    let mut summaries = Vec::with_capacity(starts.len());
    let mut best: Option<(usize, NelderMeadOutcome)> = None;
    for (index, (origin, z0)) in starts.into_iter().enumerate() {
        let steps = initial_steps(&cfg.bounds, &z0);
        let outcome = minimize(&objective, &z0, &steps, &opts);
        let finite = outcome.f.is_finite();
        summaries.push(StartSummary {
            index,
            origin,
            initial: cfg.bounds.clip(&z0),
            rss: finite.then_some(outcome.f),
            converged: outcome.converged && finite,
            iterations: outcome.iterations,
        });
        if finite && best.as_ref().is_none_or(|(_, b)| outcome.f < b.f) {
            best = Some((index, outcome));
        }
    }

    let (best_start_index, outcome) = best.ok_or(EstimationError::AllStartsFailed)?;
    let params = cfg.bounds.clip(&outcome.x);
    let stats = fit_statistics(&params, panel)?;
    Ok(FitResult {
        params,
        rss: stats.rss,
        r_squared: stats.r_squared.unwrap_or(f64::NAN),
        std_error: stats.std_error.unwrap_or(f64::NAN),
        substitution_elasticity: stats.substitution_elasticity.unwrap_or(f64::NAN),
        converged: outcome.converged,
        n_iterations: outcome.iterations,
        best_start_index,
        n_obs,
        starts: summaries,
    })
}
