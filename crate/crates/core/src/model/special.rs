use serde::{Deserialize, Serialize};

use super::{eval_v, InputPoint, Parameters};
use crate::error::ModelError;

/// Default tolerance for matching parameter constraints.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpecialCase {
    GeneralNested,
    /// `delta = 0`: the inner aggregate is `L^-q`.
    DeltaZero,
    /// `delta = 1`: the inner aggregate is `K^-q`.
    DeltaOne,
    /// `sigma = 0`: `V = A K / L`.
    SigmaZero,
    /// `sigma = 1`: `V = A h^(1/q)`.
    SigmaOne,
    /// `delta = sigma = 1`: `V = A / K`.
    PureCapitalIntensive,
    /// `delta = 1, sigma = 0`: `V = A K / L`.
    PureLaborIntensive,
    /// `p = q`.
    PlainCES,
}

impl SpecialCase {
    pub const ALL: [SpecialCase; 8] = [
        SpecialCase::GeneralNested,
        SpecialCase::DeltaZero,
        SpecialCase::DeltaOne,
        SpecialCase::SigmaZero,
        SpecialCase::SigmaOne,
        SpecialCase::PureCapitalIntensive,
        SpecialCase::PureLaborIntensive,
        SpecialCase::PlainCES,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SpecialCase::GeneralNested => "GeneralNested",
            SpecialCase::DeltaZero => "DeltaZero",
            SpecialCase::DeltaOne => "DeltaOne",
            SpecialCase::SigmaZero => "SigmaZero",
            SpecialCase::SigmaOne => "SigmaOne",
            SpecialCase::PureCapitalIntensive => "PureCapitalIntensive",
            SpecialCase::PureLaborIntensive => "PureLaborIntensive",
            SpecialCase::PlainCES => "PlainCES",
        }
    }

    /// Whether `params` satisfy this case's constraint within `tol`.
    pub fn matches(&self, params: &Parameters, tol: f64) -> bool {
        let near = |a: f64, b: f64| (a - b).abs() <= tol;
        let (sigma, delta) = (params.sigma(), params.delta());
        match self {
            SpecialCase::GeneralNested => true,
            SpecialCase::DeltaZero => near(delta, 0.0),
            SpecialCase::DeltaOne => near(delta, 1.0),
            SpecialCase::SigmaZero => near(sigma, 0.0),
            SpecialCase::SigmaOne => near(sigma, 1.0),
            SpecialCase::PureCapitalIntensive => near(delta, 1.0) && near(sigma, 1.0),
            SpecialCase::PureLaborIntensive => near(delta, 1.0) && near(sigma, 0.0),
            SpecialCase::PlainCES => near(params.p(), params.q()),
        }
    }
}

impl std::fmt::Display for SpecialCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecialCaseForm {
    pub tag: SpecialCase,
    pub tolerance_used: f64,
}

impl SpecialCaseForm {
    pub fn new(tag: SpecialCase, tolerance_used: f64) -> Self {
        Self {
            tag,
            tolerance_used,
        }
    }
}

// Most specific first.
const PRECEDENCE: [SpecialCase; 7] = [
    SpecialCase::PureCapitalIntensive,
    SpecialCase::PureLaborIntensive,
    SpecialCase::PlainCES,
    SpecialCase::SigmaZero,
    SpecialCase::SigmaOne,
    SpecialCase::DeltaZero,
    SpecialCase::DeltaOne,
];

pub fn classify_special_case(params: &Parameters, tol: f64) -> SpecialCaseForm {
    let tag = PRECEDENCE
        .into_iter()
        .find(|case| case.matches(params, tol))
        .unwrap_or(SpecialCase::GeneralNested);
    SpecialCaseForm::new(tag, tol)
}

/// Evaluates the closed form obtained by substituting the form's constraint
/// into the general function.
pub fn reduced_eval(
    params: &Parameters,
    x: &InputPoint,
    form: &SpecialCaseForm,
) -> Result<f64, ModelError> {
    if !form.tag.matches(params, form.tolerance_used) {
        return Err(ModelError::FormMismatch {
            form: form.tag.name(),
            reason: format!(
                "sigma = {}, delta = {}, p = {}, q = {} (tolerance {})",
                params.sigma(),
                params.delta(),
                params.p(),
                params.q(),
                form.tolerance_used
            ),
        });
    }
    let (a, sigma, delta, p, q) = (
        params.a(),
        params.sigma(),
        params.delta(),
        params.p(),
        params.q(),
    );
    let (k, l) = (x.k(), x.l());
    let ratio = k / l;

    let outer = |bracket: f64| -> Result<f64, ModelError> {
        if !(bracket > 0.0) {
            return Err(ModelError::NonPositiveBracket { bracket, k, l });
        }
        Ok(a * bracket.powf(-1.0 / p))
    };

    match form.tag {
        SpecialCase::GeneralNested => eval_v(params, x).map(|e| e.v),
        // (L^-q)^(-p/q) = L^p
        SpecialCase::DeltaZero => outer(sigma * l.powf(p) + (1.0 - sigma) * ratio.powf(-p)),
        SpecialCase::DeltaOne => outer(sigma * k.powf(p) + (1.0 - sigma) * ratio.powf(-p)),
        // [(K/L)^-p]^(-1/p) = K/L, for every delta
        SpecialCase::SigmaZero | SpecialCase::PureLaborIntensive => Ok(a * ratio),
        // [h^(-p/q)]^(-1/p) = h^(1/q)
        SpecialCase::SigmaOne => {
            let h = delta * k.powf(-q) + (1.0 - delta) * l.powf(-q);
            if !(h > 0.0) {
                return Err(ModelError::NonPositiveBracket { bracket: h, k, l });
            }
            Ok(a * h.powf(1.0 / q))
        }
        // (K^-q)^(1/q) = 1/K
        SpecialCase::PureCapitalIntensive => Ok(a / k),
        // h^(-q/q) = 1/h
        SpecialCase::PlainCES => {
            let h = delta * k.powf(-q) + (1.0 - delta) * l.powf(-q);
            outer(sigma / h + (1.0 - sigma) * ratio.powf(-q))
        }
    }
}
