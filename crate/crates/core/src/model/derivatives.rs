use serde::Serialize;

use super::{eval_v, InputPoint, Parameters};
use crate::error::ModelError;

/// Relative step of the central stencil used for the Hessian.
pub const HESSIAN_REL_STEP: f64 = 1e-5;

/// Marginal products `(dV/dK, dV/dL)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gradient {
    #[serde(rename = "dV_dK")]
    pub dv_dk: f64,
    #[serde(rename = "dV_dL")]
    pub dv_dl: f64,
}

/// Analytic gradient.
///
/// With `B` the bracket and `V = A B^(-1/p)`,
///
/// ```text
/// dV/dK = -(V/B) * [ sigma delta h^(-p/q-1) K^(-q-1) - (1-sigma) (K/L)^-p / K ]
/// dV/dL = -(V/B) * [ sigma (1-delta) h^(-p/q-1) L^(-q-1) + (1-sigma) (K/L)^-p / L ]
/// ```
pub fn gradient(params: &Parameters, x: &InputPoint) -> Result<Gradient, ModelError> {
    let ev = eval_v(params, x)?;
    let (sigma, delta, p, q) = (params.sigma(), params.delta(), params.p(), params.q());
    let (k, l) = (x.k(), x.l());
    // h^(-p/q - 1)
    let inner_slope = ev.h_value.powf(-p / q - 1.0);
    let scale = -ev.v / ev.bracket;
    let dv_dk = scale
        * (sigma * delta * inner_slope * k.powf(-q - 1.0) - (1.0 - sigma) * ev.ratio_term / k);
    let dv_dl = scale
        * (sigma * (1.0 - delta) * inner_slope * l.powf(-q - 1.0)
            + (1.0 - sigma) * ev.ratio_term / l);
    Ok(Gradient { dv_dk, dv_dl })
}

/// Output elasticity with respect to capital, `(dV/dK) K / V`.
pub fn elasticity_k(params: &Parameters, x: &InputPoint) -> Result<f64, ModelError> {
    let v = eval_v(params, x)?.v;
    Ok(gradient(params, x)?.dv_dk * x.k() / v)
}

/// Output elasticity with respect to labor, `(dV/dL) L / V`.
pub fn elasticity_l(params: &Parameters, x: &InputPoint) -> Result<f64, ModelError> {
    let v = eval_v(params, x)?.v;
    Ok(gradient(params, x)?.dv_dl * x.l() / v)
}

/// Second derivatives and the eigenvalues of their symmetrized matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hessian2 {
    pub hkk: f64,
    /// `d/dL (dV/dK)`
    pub hkl: f64,
    /// `d/dK (dV/dL)`
    pub hlk: f64,
    pub hll: f64,
    pub eig1: f64,
    pub eig2: f64,
}

impl Hessian2 {
    /// Builds from entries, filling the eigenvalues from the symmetrized matrix.
    pub fn from_entries(hkk: f64, hkl: f64, hlk: f64, hll: f64) -> Self {
        let (eig1, eig2) = symmetric_eigenvalues(hkk, 0.5 * (hkl + hlk), hll);
        Self {
            hkk,
            hkl,
            hlk,
            hll,
            eig1,
            eig2,
        }
    }

    pub fn trace(&self) -> f64 {
        self.hkk + self.hll
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.hkk
            .abs()
            .max(self.hkl.abs())
            .max(self.hlk.abs())
            .max(self.hll.abs())
    }
}

/// Eigenvalues `(larger, smaller)` of `[[a, b], [b, d]]`.
pub fn symmetric_eigenvalues(a: f64, b: f64, d: f64) -> (f64, f64) {
    let mean = 0.5 * (a + d);
    let radius = (0.5 * (a - d)).hypot(b);
    (mean + radius, mean - radius)
}

/// Hessian by central differences of the analytic gradient.
///
/// Steps are `1e-5` relative to each coordinate. The two mixed partials are
/// differenced independently (`hkl` along L, `hlk` along K) so their gap
/// measures the stencil error.
pub fn hessian(params: &Parameters, x: &InputPoint) -> Result<Hessian2, ModelError> {
    gradient(params, x)?;
    let (k, l) = (x.k(), x.l());
    let step_k = HESSIAN_REL_STEP * k;
    let step_l = HESSIAN_REL_STEP * l;

    let probe = |kk: f64, ll: f64| -> Result<Gradient, ModelError> {
        let point = InputPoint::new(kk, ll)?;
        gradient(params, &point).map_err(|e| {
            ModelError::NumericalBreakdown(format!(
                "Hessian stencil point ({kk}, {ll}) left the evaluable region: {e}"
            ))
        })
    };

    let k_plus = probe(k + step_k, l)?;
    let k_minus = probe(k - step_k, l)?;
    let l_plus = probe(k, l + step_l)?;
    let l_minus = probe(k, l - step_l)?;

    let hkk = (k_plus.dv_dk - k_minus.dv_dk) / (2.0 * step_k);
    let hlk = (k_plus.dv_dl - k_minus.dv_dl) / (2.0 * step_k);
    let hkl = (l_plus.dv_dk - l_minus.dv_dk) / (2.0 * step_l);
    let hll = (l_plus.dv_dl - l_minus.dv_dl) / (2.0 * step_l);
    Ok(Hessian2::from_entries(hkk, hkl, hlk, hll))
}

/// Direct elasticity of substitution between capital and labor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubstitutionElasticity {
    pub value: f64,
    /// Set when the curvature of the isoquant vanishes (to Hessian accuracy),
    /// e.g. when isoquants are rays and the ratio `K/L` cannot move along them.
    pub degenerate: bool,
}

/// `d ln(K/L) / d ln(MRTS)` along the isoquant through `x`:
///
/// ```text
/// -V_K V_L (K V_K + L V_L) / (K L (V_KK V_L^2 - 2 V_KL V_K V_L + V_LL V_K^2))
/// ```
///
/// Marginal products are analytic, second derivatives come from [`hessian`].
/// The expression is invariant under monotone transforms of `V`, so it is
/// meaningful even where both marginal products are negative.
pub fn substitution_elasticity(
    params: &Parameters,
    x: &InputPoint,
) -> Result<SubstitutionElasticity, ModelError> {
    let v = eval_v(params, x)?.v;
    let g = gradient(params, x)?;
    let (k, l) = (x.k(), x.l());
    if (g.dv_dk * k / v).abs() <= 1e-12 {
        return Err(ModelError::ZeroMarginalProduct { input: "K" });
    }
    if (g.dv_dl * l / v).abs() <= 1e-12 {
        return Err(ModelError::ZeroMarginalProduct { input: "L" });
    }
    let hess = hessian(params, x)?;
    let mixed = 0.5 * (hess.hkl + hess.hlk);
    let (fk, fl) = (g.dv_dk, g.dv_dl);
    let t1 = hess.hkk * fl * fl;
    let t2 = 2.0 * mixed * fk * fl;
    let t3 = hess.hll * fk * fk;
    let curvature = t1 - t2 + t3;
    let curvature_scale = t1.abs() + t2.abs() + t3.abs();
    let value = -fk * fl * (k * fk + l * fl) / (k * l * curvature);
    // The Hessian carries ~1e-8 relative error; below that the isoquant is flat.
    let degenerate = !(curvature.abs() > 1e-6 * curvature_scale) || !value.is_finite();
    Ok(SubstitutionElasticity { value, degenerate })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, sigma: f64, delta: f64, p: f64, q: f64) -> Parameters {
        Parameters::new(a, sigma, delta, p, q).unwrap()
    }

    fn pt(k: f64, l: f64) -> InputPoint {
        InputPoint::new(k, l).unwrap()
    }

    fn central_diff(f: impl Fn(f64) -> f64, x: f64, step: f64) -> f64 {
        (f(x + step) - f(x - step)) / (2.0 * step)
    }

    #[test]
    fn sigma_zero_gradient_is_exact() {
        let g = gradient(&params(1.0, 0.0, 0.3, 0.5, 0.5), &pt(2.0, 1.0)).unwrap();
        assert!((g.dv_dk - 1.0).abs() < 1e-14);
        assert!((g.dv_dl + 2.0).abs() < 1e-14);
    }

    #[test]
    fn worked_point_gradient() {
        let prm = params(1.0, 0.5, 0.5, 0.5, 0.5);
        let x = pt(4.0, 1.0);
        let g = gradient(&prm, &x).unwrap();
        // Finite-difference oracle on eval_v alone.
        let fd_k = central_diff(|k| eval_v(&prm, &pt(k, 1.0)).unwrap().v, 4.0, 4e-6);
        let fd_l = central_diff(|l| eval_v(&prm, &pt(4.0, l)).unwrap().v, 1.0, 1e-6);
        assert!((g.dv_dk - fd_k).abs() < 1e-8);
        assert!((g.dv_dl - fd_l).abs() < 1e-8);
        // Exact: 12/1331 and -1200/1331.
        assert!((g.dv_dk - 12.0 / 1331.0).abs() < 1e-15, "{}", g.dv_dk);
        assert!((g.dv_dl + 1200.0 / 1331.0).abs() < 1e-14, "{}", g.dv_dl);
        assert!((g.dv_dk - 0.009016).abs() < 5e-7);
        assert!((g.dv_dl + 0.901578).abs() < 5e-7);
    }

    #[test]
    fn symmetric_unit_point() {
        let prm = params(1.0, 1.0, 0.5, 0.4, 0.4);
        let g = gradient(&prm, &pt(1.0, 1.0)).unwrap();
        assert!(
            (g.dv_dk - g.dv_dl).abs() < 1e-14 * g.dv_dk.abs(),
            "{} {}",
            g.dv_dk,
            g.dv_dl
        );
        assert!((g.dv_dk + 0.5).abs() < 1e-14);
    }

    #[test]
    fn elasticity_examples() {
        let prm = params(1.0, 0.5, 0.5, 0.5, 0.5);
        let x = pt(4.0, 1.0);
        // Exact values are 1/33 and -25/33.
        assert!((elasticity_k(&prm, &x).unwrap() - 1.0 / 33.0).abs() < 1e-13);
        assert!((elasticity_l(&prm, &x).unwrap() + 25.0 / 33.0).abs() < 1e-13);
        assert!((elasticity_l(&prm, &x).unwrap() + 0.757576).abs() < 5e-7);

        let ratio_only = params(2.5, 0.0, 0.8, -0.3, 0.9);
        for (k, l) in [(0.3, 7.0), (5.0, 5.0), (80.0, 0.2)] {
            assert!((elasticity_k(&ratio_only, &pt(k, l)).unwrap() - 1.0).abs() < 1e-13);
            assert!((elasticity_l(&ratio_only, &pt(k, l)).unwrap() + 1.0).abs() < 1e-13);
        }

        // sigma = delta = 1 collapses to A / K; sigma = 1, delta = 0 to A / L.
        let capital_only = params(1.0, 1.0, 1.0, 0.7, 0.5);
        let labor_only = params(1.0, 1.0, 0.0, 0.7, 0.5);
        for (k, l) in [(0.5, 3.0), (9.0, 2.0)] {
            assert!((elasticity_k(&capital_only, &pt(k, l)).unwrap() + 1.0).abs() < 1e-13);
            assert!((elasticity_l(&labor_only, &pt(k, l)).unwrap() + 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn hessian_of_ratio_collapse() {
        // V = K/L: hkk = 0, hkl = -1/L^2, hll = 2K/L^3.
        let h = hessian(&params(1.0, 0.0, 0.5, 0.5, 0.5), &pt(2.0, 1.0)).unwrap();
        assert!(h.hkk.abs() < 1e-6);
        assert!((h.hkl + 1.0).abs() < 1e-6);
        assert!((h.hlk + 1.0).abs() < 1e-6);
        assert!((h.hll - 4.0).abs() < 1e-6);
        // Eigenvalues of [[0, -1], [-1, 4]] are 2 +- sqrt(5).
        assert!((h.eig1 - (2.0 + 5f64.sqrt())).abs() < 1e-5);
        assert!((h.eig2 - (2.0 - 5f64.sqrt())).abs() < 1e-5);
    }

    #[test]
    fn hessian_symmetry_at_worked_point() {
        let h = hessian(&params(1.0, 0.5, 0.5, 0.5, 0.5), &pt(4.0, 1.0)).unwrap();
        assert!((h.hkl - h.hlk).abs() <= 1e-5 * h.hkl.abs().max(1.0));
        assert!((h.eig1 + h.eig2 - h.trace()).abs() <= 1e-9 * h.max_abs().max(1.0));
        assert!(h.eig1 >= h.eig2);
    }

    #[test]
    fn eigenvalue_formula() {
        assert_eq!(symmetric_eigenvalues(2.0, 0.0, 3.0), (3.0, 2.0));
        assert_eq!(symmetric_eigenvalues(-2.0, 0.0, -3.0), (-2.0, -3.0));
        let (e1, e2) = symmetric_eigenvalues(1.0, 2.0, 1.0);
        assert!((e1 - 3.0).abs() < 1e-15 && (e2 + 1.0).abs() < 1e-15);
    }

    #[test]
    fn hessian_stencil_outside_region_is_breakdown() {
        // Find a point whose bracket is barely positive for sigma > 1 so the
        // stencil straddles the boundary.
        let prm = params(1.0, 1.5, 0.5, 0.5, 0.5);
        let l = 1.0;
        let (mut lo, mut hi) = (1e-6, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if eval_v(&prm, &pt(mid, l)).is_ok() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let err = hessian(&prm, &pt(hi, l)).unwrap_err();
        assert!(matches!(err, ModelError::NumericalBreakdown(_)), "{err:?}");
    }

    /// Traces the isoquant through `x` and differences ln(K/L) against
    /// ln|MRTS| with MRTS taken from finite differences of `V` itself.
    fn isoquant_oracle(prm: &Parameters, x: &InputPoint) -> f64 {
        let target = eval_v(prm, x).unwrap().v;
        let v_at = |k: f64, l: f64| eval_v(prm, &pt(k, l)).unwrap().v;
        let mrts = |k: f64, l: f64| {
            let hk = 1e-6 * k;
            let hl = 1e-6 * l;
            let vk = (v_at(k + hk, l) - v_at(k - hk, l)) / (2.0 * hk);
            let vl = (v_at(k, l + hl) - v_at(k, l - hl)) / (2.0 * hl);
            (vl / vk).abs()
        };
        // Along the isoquant, move the ratio r = K/L and solve for L by
        // bisection on ln L with K = r L.
        let point_on_isoquant = |ratio: f64| {
            let f = |ln_l: f64| {
                let l = ln_l.exp();
                v_at(ratio * l, l) - target
            };
            let ln_l0 = x.l().ln();
            let (mut a, mut b) = (ln_l0 - 1.0, ln_l0 + 1.0);
            let fa = f(a);
            assert!(fa * f(b) < 0.0, "bracketing failed");
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if f(m) * fa > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            let l = (0.5 * (a + b)).exp();
            (ratio * l, l)
        };
        let r0 = x.k() / x.l();
        let eps = 1e-3_f64;
        let (k_up, l_up) = point_on_isoquant(r0 * eps.exp());
        let (k_dn, l_dn) = point_on_isoquant(r0 * (-eps).exp());
        (2.0 * eps) / (mrts(k_up, l_up).ln() - mrts(k_dn, l_dn).ln())
    }

    #[test]
    fn substitution_elasticity_matches_isoquant_tracing() {
        let prm = params(1.0, 0.5, 0.5, 0.5, 0.5);
        let x = pt(4.0, 1.0);
        let analytic = substitution_elasticity(&prm, &x).unwrap();
        let oracle = isoquant_oracle(&prm, &x);
        assert!(!analytic.degenerate);
        assert!(
            (analytic.value - oracle).abs() < 1e-4,
            "{} vs {}",
            analytic.value,
            oracle
        );
    }

    #[test]
    fn substitution_elasticity_of_equal_curvature_ces() {
        // sigma = 1 with p = q leaves A h^(1/q), whose isoquants are those
        // of a CES with elasticity 1/(1+q).
        for q in [0.5, 0.25, -0.4] {
            let prm = params(1.0, 1.0, 0.3, q, q);
            for (k, l) in [(4.0, 1.0), (0.7, 2.2)] {
                let s = substitution_elasticity(&prm, &pt(k, l)).unwrap();
                assert!(
                    (s.value - 1.0 / (1.0 + q)).abs() < 1e-4,
                    "q={q}: {}",
                    s.value
                );
            }
        }
    }

    #[test]
    fn substitution_elasticity_flags_ray_isoquants() {
        let s = substitution_elasticity(&params(1.0, 0.0, 0.5, 0.5, 0.5), &pt(2.0, 1.0)).unwrap();
        assert!(s.degenerate);
    }

    #[test]
    fn zero_marginal_product_is_reported() {
        // With sigma = delta = 1, V = A / K does not depend on L.
        let err =
            substitution_elasticity(&params(1.0, 1.0, 1.0, 0.5, 0.5), &pt(2.0, 3.0)).unwrap_err();
        assert_eq!(err, ModelError::ZeroMarginalProduct { input: "L" });
    }
}
