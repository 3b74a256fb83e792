//! Pointwise evaluation of the nested production function and everything
//! derived from it at a single input bundle.

mod audit;
mod derivatives;
mod special;

pub use audit::{audit_published_formulas, AuditEntry, AuditRecord};
pub use derivatives::{
    elasticity_k, elasticity_l, gradient, hessian, substitution_elasticity, symmetric_eigenvalues,
    Gradient, Hessian2, SubstitutionElasticity, HESSIAN_REL_STEP,
};
pub use special::{classify_special_case, reduced_eval, SpecialCase, SpecialCaseForm, DEFAULT_TOL};

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Smallest admissible `|p|` and `|q|`.
pub const MIN_CURVATURE: f64 = 1e-3;

/// The five-tuple `(A, sigma, delta, p, q)`.
///
/// `sigma` weights the inner aggregate against the capital-intensity ratio,
/// `delta` weights capital inside the inner aggregate, `p` and `q` are the
/// outer and inner curvature. In the default mode `sigma` and `delta` may lie
/// anywhere in `[0, 2]` and `|p|, |q|` in `[1e-3, inf)`; strict mode narrows
/// them to `[0, 1]` and `[1e-3, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParameters", into = "RawParameters")]
pub struct Parameters {
    a: f64,
    sigma: f64,
    delta: f64,
    p: f64,
    q: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RawParameters {
    #[serde(rename = "A")]
    a: f64,
    sigma: f64,
    delta: f64,
    p: f64,
    q: f64,
}

impl TryFrom<RawParameters> for Parameters {
    type Error = ModelError;

    fn try_from(raw: RawParameters) -> Result<Self, Self::Error> {
        Parameters::new(raw.a, raw.sigma, raw.delta, raw.p, raw.q)
    }
}

impl From<Parameters> for RawParameters {
    fn from(p: Parameters) -> Self {
        RawParameters {
            a: p.a,
            sigma: p.sigma,
            delta: p.delta,
            p: p.p,
            q: p.q,
        }
    }
}

fn check(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<(), ModelError> {
    if value.is_finite() && ok {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}

impl Parameters {
    pub fn new(a: f64, sigma: f64, delta: f64, p: f64, q: f64) -> Result<Self, ModelError> {
        Self::with_mode(a, sigma, delta, p, q, false)
    }

    /// Construction with the narrow admissible ranges.
    pub fn new_strict(a: f64, sigma: f64, delta: f64, p: f64, q: f64) -> Result<Self, ModelError> {
        Self::with_mode(a, sigma, delta, p, q, true)
    }

    pub fn with_mode(
        a: f64,
        sigma: f64,
        delta: f64,
        p: f64,
        q: f64,
        strict: bool,
    ) -> Result<Self, ModelError> {
        check("A", a, a > 0.0, "must be positive")?;
        let weight_hi = if strict { 1.0 } else { 2.0 };
        let weight_reason = if strict {
            "must lie in [0, 1]"
        } else {
            "must lie in [0, 2]"
        };
        check(
            "sigma",
            sigma,
            (0.0..=weight_hi).contains(&sigma),
            weight_reason,
        )?;
        check(
            "delta",
            delta,
            (0.0..=weight_hi).contains(&delta),
            weight_reason,
        )?;
        check(
            "p",
            p,
            p.abs() >= MIN_CURVATURE,
            "|p| must be at least 1e-3",
        )?;
        check(
            "q",
            q,
            q.abs() >= MIN_CURVATURE,
            "|q| must be at least 1e-3",
        )?;
        if strict {
            check(
                "p",
                p,
                p.abs() <= 1.0,
                "|p| must not exceed 1 in strict mode",
            )?;
            check(
                "q",
                q,
                q.abs() <= 1.0,
                "|q| must not exceed 1 in strict mode",
            )?;
        }
        Ok(Self {
            a,
            sigma,
            delta,
            p,
            q,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn q(&self) -> f64 {
        self.q
    }

    /// Copy with `A` replaced.
    pub fn with_a(self, a: f64) -> Result<Self, ModelError> {
        Self::new(a, self.sigma, self.delta, self.p, self.q)
    }
    pub fn with_sigma(self, sigma: f64) -> Result<Self, ModelError> {
        Self::new(self.a, sigma, self.delta, self.p, self.q)
    }
    pub fn with_delta(self, delta: f64) -> Result<Self, ModelError> {
        Self::new(self.a, self.sigma, delta, self.p, self.q)
    }
    pub fn with_p(self, p: f64) -> Result<Self, ModelError> {
        Self::new(self.a, self.sigma, self.delta, p, self.q)
    }

    /// `[A, sigma, delta, p, q]`.
    pub fn to_array(&self) -> [f64; 5] {
        [self.a, self.sigma, self.delta, self.p, self.q]
    }
}

/// A positive `(K, L)` bundle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputPoint {
    #[serde(rename = "K")]
    k: f64,
    #[serde(rename = "L")]
    l: f64,
}

impl InputPoint {
    pub fn new(k: f64, l: f64) -> Result<Self, ModelError> {
        if !(k.is_finite() && k > 0.0) {
            return Err(ModelError::Domain {
                input: "K",
                value: k,
            });
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(ModelError::Domain {
                input: "L",
                value: l,
            });
        }
        Ok(Self { k, l })
    }

    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn l(&self) -> f64 {
        self.l
    }

    /// Both inputs multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, ModelError> {
        Self::new(self.k * factor, self.l * factor)
    }
}

/// Intermediate quantities of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalBreakdown {
    /// `delta * K^-q + (1 - delta) * L^-q`
    pub h_value: f64,
    /// `(K/L)^-p`
    pub ratio_term: f64,
    /// `sigma * h^(-p/q) + (1 - sigma) * ratio_term`
    pub bracket: f64,
    pub v: f64,
}

pub fn eval_v(params: &Parameters, x: &InputPoint) -> Result<EvalBreakdown, ModelError> {
    let Parameters {
        a,
        sigma,
        delta,
        p,
        q,
    } = *params;
    let h_value = delta * x.k.powf(-q) + (1.0 - delta) * x.l.powf(-q);
    let ratio_term = (x.k / x.l).powf(-p);
    let bracket = sigma * h_value.powf(-p / q) + (1.0 - sigma) * ratio_term;
    // NaN (negative h raised to a fractional power) lands here too.
    if !(bracket > 0.0) {
        return Err(ModelError::NonPositiveBracket {
            bracket,
            k: x.k,
            l: x.l,
        });
    }
    let v = a * bracket.powf(-1.0 / p);
    if !v.is_finite() {
        return Err(ModelError::NumericalBreakdown(format!(
            "output overflowed at K = {}, L = {}",
            x.k, x.l
        )));
    }
    Ok(EvalBreakdown {
        h_value,
        ratio_term,
        bracket,
        v,
    })
}

/// The auxiliary two-input map `{delta K^-q + (1 - delta) L^-q} + (K/L)^-p`.
pub fn eval_f(params: &Parameters, x: &InputPoint) -> f64 {
    let (delta, p, q) = (params.delta, params.p, params.q);
    (delta * x.k.powf(-q) + (1.0 - delta) * x.l.powf(-q)) + (x.k / x.l).powf(-p)
}
