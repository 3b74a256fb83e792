//! Browser bindings. Every export returns a JSON string; failures come back
//! as `{"error": "..."}` so the page never has to catch exceptions, and the
//! same functions run natively in tests.

use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::wasm_bindgen;

use nestfn::data_io::{fit_document, synth_panel, SynthSpec};
use nestfn::diagnostics::homogeneity_degree;
use nestfn::estimation::{fit, FitConfig};
use nestfn::model::{
    classify_special_case, elasticity_k, elasticity_l, eval_v, gradient, substitution_elasticity,
    DEFAULT_TOL,
};
use nestfn::{InputPoint, Parameters};

/// Largest grid side accepted by [`homogeneity_map`].
pub const MAX_GRID: usize = 200;
/// Largest panel accepted by [`synthetic_fit`].
pub const MAX_ROWS: usize = 2000;
/// Most starts accepted by [`synthetic_fit`].
pub const MAX_STARTS: usize = 64;

fn error_json(message: impl std::fmt::Display) -> String {
    json!({ "error": message.to_string() }).to_string()
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).unwrap_or_else(error_json)
}

fn params(a: f64, sigma: f64, delta: f64, p: f64, q: f64) -> Result<Parameters, String> {
    Parameters::new(a, sigma, delta, p, q).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Evaluation {
    #[serde(rename = "V")]
    v: f64,
    #[serde(rename = "dV_dK")]
    dv_dk: f64,
    #[serde(rename = "dV_dL")]
    dv_dl: f64,
    eps_k: f64,
    eps_l: f64,
    ray_degree: f64,
    substitution_elasticity: Option<f64>,
    form: &'static str,
}

fn evaluate_inner(
    a: f64,
    sigma: f64,
    delta: f64,
    p: f64,
    q: f64,
    k: f64,
    l: f64,
) -> Result<Evaluation, String> {
    let prm = params(a, sigma, delta, p, q)?;
    let x = InputPoint::new(k, l).map_err(|e| e.to_string())?;
    let err = |e: nestfn::ModelError| e.to_string();
    let v = eval_v(&prm, &x).map_err(err)?.v;
    let g = gradient(&prm, &x).map_err(err)?;
    let subst = substitution_elasticity(&prm, &x)
        .ok()
        .filter(|s| !s.degenerate && s.value.is_finite());
    Ok(Evaluation {
        v,
        dv_dk: g.dv_dk,
        dv_dl: g.dv_dl,
        eps_k: elasticity_k(&prm, &x).map_err(err)?,
        eps_l: elasticity_l(&prm, &x).map_err(err)?,
        ray_degree: homogeneity_degree(&prm, &x).map_err(err)?,
        substitution_elasticity: subst.map(|s| s.value),
        form: classify_special_case(&prm, DEFAULT_TOL).tag.name(),
    })
}

/// Value, marginal products, elasticities and special-case form at one point.
#[wasm_bindgen]
pub fn evaluate(a: f64, sigma: f64, delta: f64, p: f64, q: f64, k: f64, l: f64) -> String {
    match evaluate_inner(a, sigma, delta, p, q, k, l) {
        Ok(e) => to_json(&e),
        Err(e) => error_json(e),
    }
}

#[derive(Serialize)]
struct DegreeMap {
    grid: usize,
    k_range: (f64, f64),
    l_range: (f64, f64),
    /// Row-major, `L` ascending by row and `K` ascending by column; `null`
    /// where the function is not evaluable.
    degrees: Vec<Option<f64>>,
    min: Option<f64>,
    max: Option<f64>,
}

/// Local degree of homogeneity on a `grid x grid` log-spaced lattice.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn homogeneity_map(
    a: f64,
    sigma: f64,
    delta: f64,
    p: f64,
    q: f64,
    kmin: f64,
    kmax: f64,
    lmin: f64,
    lmax: f64,
    grid: usize,
) -> String {
    let prm = match params(a, sigma, delta, p, q) {
        Ok(prm) => prm,
        Err(e) => return error_json(e),
    };
    if !(2..=MAX_GRID).contains(&grid) {
        return error_json(format!("grid must lie in [2, {MAX_GRID}]"));
    }
    for (lo, hi) in [(kmin, kmax), (lmin, lmax)] {
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
            return error_json("ranges must be positive, finite and increasing");
        }
    }
    let node = |lo: f64, hi: f64, i: usize| {
        (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (grid - 1) as f64).exp()
    };
    let mut degrees = Vec::with_capacity(grid * grid);
    for j in 0..grid {
        for i in 0..grid {
            let d = InputPoint::new(node(kmin, kmax, i), node(lmin, lmax, j))
                .ok()
                .and_then(|x| homogeneity_degree(&prm, &x).ok())
                .filter(|d| d.is_finite());
            degrees.push(d);
        }
    }
    let min = degrees.iter().flatten().copied().reduce(f64::min);
    let max = degrees.iter().flatten().copied().reduce(f64::max);
    to_json(&DegreeMap {
        grid,
        k_range: (kmin, kmax),
        l_range: (lmin, lmax),
        degrees,
        min,
        max,
    })
}

/// Synthesizes a panel from the given parameters and fits it back. Returns
/// the fit report document plus the panel's `K, L, V` columns.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn synthetic_fit(
    a: f64,
    sigma: f64,
    delta: f64,
    p: f64,
    q: f64,
    n: usize,
    noise: f64,
    starts: usize,
    seed: u32,
) -> String {
    let prm = match params(a, sigma, delta, p, q) {
        Ok(prm) => prm,
        Err(e) => return error_json(e),
    };
    if n > MAX_ROWS || starts > MAX_STARTS {
        return error_json(format!("at most {MAX_ROWS} rows and {MAX_STARTS} starts"));
    }
    let seed = u64::from(seed);
    let panel = match synth_panel(&SynthSpec::new(prm, n, noise, seed)) {
        Ok(panel) => panel,
        Err(e) => return error_json(e),
    };
    let result = match fit(&panel, &FitConfig::new(starts, seed)) {
        Ok(result) => result,
        Err(e) => return error_json(e),
    };
    let report = match fit_document(&result, "SYN", seed) {
        Ok(doc) => doc,
        Err(e) => return error_json(e),
    };
    let column = |f: fn(&nestfn::data_io::Observation) -> f64| {
        panel.observations.iter().map(f).collect::<Vec<_>>()
    };
    to_json(&json!({
        "report": report,
        "K": column(|o| o.k),
        "L": column(|o| o.l),
        "V": column(|o| o.v),
    }))
}
