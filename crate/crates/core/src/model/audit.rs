//! Side-by-side evaluation of published closed forms against the
//! independently computed quantities. Nothing here feeds back into
//! evaluation; deviations are only reported.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{elasticity_k, elasticity_l, eval_v, hessian, InputPoint, Parameters};
use crate::diagnostics::homogeneity_degree;
use crate::error::ModelError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditEntry {
    /// The printed expression evaluated verbatim.
    pub published_value: Option<f64>,
    /// Ground truth from the analytic/numeric routines.
    pub computed_value: Option<f64>,
    pub abs_deviation: Option<f64>,
    /// Why one side is missing, when it is.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl AuditEntry {
    fn compare(published: f64, computed: Result<f64, ModelError>) -> Self {
        let published_value = published.is_finite().then_some(published);
        let (computed_value, computed_note) = match computed {
            Ok(v) if v.is_finite() => (Some(v), None),
            Ok(v) => (None, Some(format!("computed value is not finite ({v})"))),
            Err(e) => (None, Some(format!("computed side failed: {e}"))),
        };
        let note = if published_value.is_none() {
            Some(format!(
                "published expression is undefined here (evaluates to {published})"
            ))
        } else {
            computed_note
        };
        let abs_deviation = match (published_value, computed_value) {
            (Some(a), Some(b)) => Some((a - b).abs()),
            _ => None,
        };
        Self {
            published_value,
            computed_value,
            abs_deviation,
            note,
        }
    }

    fn failed(reason: String) -> Self {
        Self {
            published_value: None,
            computed_value: None,
            abs_deviation: None,
            note: Some(reason),
        }
    }

    /// True when the published expression could not be evaluated.
    pub fn is_formula_domain_error(&self) -> bool {
        self.published_value.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRecord {
    pub params: Parameters,
    pub point: InputPoint,
    pub entries: BTreeMap<String, AuditEntry>,
}

impl AuditRecord {
    pub fn get(&self, id: &str) -> Option<&AuditEntry> {
        self.entries.get(id)
    }
}

/// Evaluates every published closed form at `(params, x)` and pairs it with
/// the independently computed value. Eigenvalue formulas are stated only at
/// the unit point and are audited there regardless of `x`.
pub fn audit_published_formulas(params: &Parameters, x: &InputPoint) -> AuditRecord {
    let mut entries = BTreeMap::new();
    let mut put = |id: &str, entry: AuditEntry| {
        entries.insert(id.to_string(), entry);
    };

    let (a, sigma, delta, p, q) = (
        params.a(),
        params.sigma(),
        params.delta(),
        params.p(),
        params.q(),
    );
    let (k, l) = (x.k(), x.l());
    let h = delta * k.powf(-q) + (1.0 - delta) * l.powf(-q);
    let v = eval_v(params, x).map(|e| e.v);

    // Output elasticities.
    {
        let published = match &v {
            Ok(v) => {
                let bracket = -sigma * delta * k.powf(-q - p) * h.powf(-p / q - 1.0) * (p / q)
                    + (1.0 - sigma) * p * (k / l).powf(-p - 1.0) * (l / (k * k));
                // (-1/p)^(1+p) has no real value for p > 0 unless 1+p is an integer.
                a * bracket * (-1.0 / p).powf(1.0 + p) * (k / v)
            }
            Err(_) => f64::NAN,
        };
        put(
            "capital_elasticity_closed_form",
            AuditEntry::compare(published, elasticity_k(params, x)),
        );

        let published = (1.0 - q) * (1.0 - sigma) * (k / l).powf(-p);
        put(
            "labor_elasticity_closed_form",
            AuditEntry::compare(published, elasticity_l(params, x)),
        );
    }

    // Second partials.
    {
        let lead = -a * (p / q) * sigma;
        let hkk = lead
            * (delta * (q - 1.0) * k.powf(-q - 2.0) * l.powf(q)
                + (1.0 - delta) * q * k.powf(-q) * l.powf(q - 2.0));
        let hkl = lead
            * (delta * q * k.powf(-q - 1.0) * l.powf(q - 1.0)
                + (1.0 - delta) * q * k.powf(-q) * l.powf(-q));
        let hll = lead
            * (delta * q * k.powf(1.0 - q) * l.powf(-q - 2.0)
                + (1.0 - delta) * (q - 1.0) * k.powf(q) * l.powf(-q - 2.0));
        match hessian(params, x) {
            Ok(hs) => {
                put(
                    "hessian_kk_closed_form",
                    AuditEntry::compare(hkk, Ok(hs.hkk)),
                );
                put(
                    "hessian_kl_closed_form",
                    AuditEntry::compare(hkl, Ok(0.5 * (hs.hkl + hs.hlk))),
                );
                put(
                    "hessian_ll_closed_form",
                    AuditEntry::compare(hll, Ok(hs.hll)),
                );
            }
            Err(e) => {
                for (id, published) in [
                    ("hessian_kk_closed_form", hkk),
                    ("hessian_kl_closed_form", hkl),
                    ("hessian_ll_closed_form", hll),
                ] {
                    put(id, AuditEntry::compare(published, Err(e.clone())));
                }
            }
        }

        // At (1, 1) the published eigenvalues are lead * q and lead * q * (1 - q);
        // they are matched to the computed pair by order.
        let lambda1 = lead * (delta + 1.0 - delta) * q;
        let lambda2 = lambda1 * (1.0 - q);
        let (hi, lo) = if lambda1 >= lambda2 {
            (lambda1, lambda2)
        } else {
            (lambda2, lambda1)
        };
        let unit = InputPoint::new(1.0, 1.0).expect("unit point is valid");
        match hessian(params, &unit) {
            Ok(hs) => {
                put(
                    "eigenvalue_larger_at_unit_point",
                    AuditEntry::compare(hi, Ok(hs.eig1)),
                );
                put(
                    "eigenvalue_smaller_at_unit_point",
                    AuditEntry::compare(lo, Ok(hs.eig2)),
                );
            }
            Err(e) => {
                put(
                    "eigenvalue_larger_at_unit_point",
                    AuditEntry::compare(hi, Err(e.clone())),
                );
                put(
                    "eigenvalue_smaller_at_unit_point",
                    AuditEntry::compare(lo, Err(e)),
                );
            }
        }
    }

    // Special-case reductions. Ground truth is the general function with the
    // constraint substituted into the current parameters.
    {
        let truth = |substituted: Result<Parameters, ModelError>| {
            substituted.and_then(|prm| eval_v(&prm, x).map(|e| e.v))
        };
        let sub = |s: f64, d: f64| Parameters::new(a, s, d, p, q);

        let published =
            a * (sigma * l.powf(q).powf(-p / q) + (1.0 - sigma) * (k / l).powf(-p)).powf(-1.0 / p);
        put(
            "delta_zero_reduction",
            AuditEntry::compare(published, truth(sub(sigma, 0.0))),
        );

        let published = a * (l / k).powf(p);
        put(
            "sigma_zero_reduction",
            AuditEntry::compare(published, truth(sub(0.0, delta))),
        );

        let published = a * h.powf(1.0 / q);
        put(
            "sigma_one_reduction",
            AuditEntry::compare(published, truth(sub(1.0, delta))),
        );

        let published = a * (k.powf(-q) + l.powf(-q)).powf(-p / q);
        put(
            "pure_capital_reduction",
            AuditEntry::compare(published, truth(sub(1.0, 1.0))),
        );

        let published = a * (k / l).powf(-p);
        put(
            "pure_labor_reduction",
            AuditEntry::compare(published, truth(sub(0.0, 1.0))),
        );

        let published = a
            * (sigma / (delta * l + (1.0 - delta) * k) + (1.0 - sigma) * (k / l).powf(-q))
                .powf(1.0 / q);
        put(
            "equal_curvature_reduction",
            AuditEntry::compare(published, truth(params.with_p(q))),
        );
    }

    // Returns to scale: claimed degree one, while the scaling argument ends
    // at V* = lambda^-p V, i.e. degree -p.
    match homogeneity_degree(params, x) {
        Ok(degree) => {
            put("degree_one_claim", AuditEntry::compare(1.0, Ok(degree)));
            put(
                "ray_scaling_factor_claim",
                AuditEntry::compare(-p, Ok(degree)),
            );
        }
        Err(e) => {
            put(
                "degree_one_claim",
                AuditEntry::failed(format!("ray probe failed: {e}")),
            );
            put(
                "ray_scaling_factor_claim",
                AuditEntry::failed(format!("ray probe failed: {e}")),
            );
        }
    }

    AuditRecord {
        params: *params,
        point: *x,
        entries,
    }
}
