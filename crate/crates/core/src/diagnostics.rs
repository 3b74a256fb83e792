//! Region scans of positivity, returns to scale, curvature and the signs of
//! the marginal products, assembled into one [`DiagnosticsReport`].
//!
//! Grid points are enumerated K-major with a fixed order and random draws
//! are indexed by counter, so a report is a pure function of its inputs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ModelError;
use crate::model::{
    elasticity_k, elasticity_l, eval_v, gradient, hessian, Hessian2, InputPoint, Parameters,
};
use crate::rng::CounterRng;

/// Half-width of the ray probe in `ln(lambda)`.
pub const RAY_PROBE_STEP: f64 = 1e-4;

/// Spread of measured degrees below which the function counts as homogeneous.
pub const HOMOGENEITY_SPREAD_TOL: f64 = 1e-6;

pub const DEFAULT_BUDGET: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("invalid scan configuration: {0}")]
    InvalidConfig(String),
    #[error("scan budget exceeded: {requested} evaluations requested, budget is {budget}")]
    ScanBudgetExceeded { requested: usize, budget: usize },
}

/// Scan region and sampling controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub k_range: (f64, f64),
    pub l_range: (f64, f64),
    /// Points per axis.
    pub grid: usize,
    /// Random draws for the positivity scan.
    pub samples: usize,
    pub seed: u64,
    pub log_spacing: bool,
    pub budget: usize,
}

impl ScanConfig {
    pub fn new(
        k_range: (f64, f64),
        l_range: (f64, f64),
        grid: usize,
        samples: usize,
        seed: u64,
    ) -> Self {
        Self {
            k_range,
            l_range,
            grid,
            samples,
            seed,
            log_spacing: true,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn validate(&self) -> Result<(), DiagnosticsError> {
        for (name, (lo, hi)) in [("K", self.k_range), ("L", self.l_range)] {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
                return Err(DiagnosticsError::InvalidConfig(format!(
                    "{name} range [{lo}, {hi}] must be positive and ordered"
                )));
            }
        }
        if self.grid < 2 {
            return Err(DiagnosticsError::InvalidConfig(
                "grid must be at least 2".into(),
            ));
        }
        if self.samples < 1 {
            return Err(DiagnosticsError::InvalidConfig(
                "samples must be at least 1".into(),
            ));
        }
        let requested = self
            .grid
            .checked_mul(self.grid)
            .and_then(|g| g.checked_add(self.samples))
            .unwrap_or(usize::MAX);
        if requested > self.budget {
            return Err(DiagnosticsError::ScanBudgetExceeded {
                requested,
                budget: self.budget,
            });
        }
        Ok(())
    }

    fn axis(&self, (lo, hi): (f64, f64)) -> Vec<f64> {
        let n = self.grid;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                if self.log_spacing {
                    (lo.ln() + t * (hi.ln() - lo.ln())).exp()
                } else {
                    lo + t * (hi - lo)
                }
            })
            .collect()
    }

    /// Grid points, K-major.
    pub fn grid_points(&self) -> Vec<InputPoint> {
        let ks = self.axis(self.k_range);
        let ls = self.axis(self.l_range);
        ks.iter()
            .flat_map(|&k| {
                ls.iter()
                    .map(move |&l| InputPoint::new(k, l).expect("validated range"))
            })
            .collect()
    }
}

/// `d ln V(lambda K, lambda L) / d ln(lambda)` at `lambda = 1`, by a central
/// difference of half-width [`RAY_PROBE_STEP`] in `ln(lambda)`.
pub fn homogeneity_degree(params: &Parameters, x: &InputPoint) -> Result<f64, ModelError> {
    let up = eval_v(params, &x.scaled(RAY_PROBE_STEP.exp())?)?.v;
    let down = eval_v(params, &x.scaled((-RAY_PROBE_STEP).exp())?)?.v;
    Ok((up.ln() - down.ln()) / (2.0 * RAY_PROBE_STEP))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivitySection {
    pub checked: usize,
    /// Draws with `V <= 0`, a non-finite value or a domain error.
    pub violations: usize,
    /// The subset of violations that were domain errors.
    pub domain_errors: usize,
    pub first_violation: Option<InputPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogeneitySection {
    pub points_evaluated: usize,
    pub points_skipped: usize,
    pub degree_min: Option<f64>,
    pub degree_max: Option<f64>,
    pub is_homogeneous: bool,
    /// Verdict on the degree-one claim: homogeneous and degree within 1e-6 of 1.
    pub claimed_degree_one: bool,
}

/// Published eigenvalues at `(1, 1)` next to the computed ones.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitPointEigenvalues {
    pub published_lambda1: Option<f64>,
    pub published_lambda2: Option<f64>,
    pub computed_eig1: Option<f64>,
    pub computed_eig2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcavitySection {
    pub points_checked: usize,
    pub negative_semidefinite_count: usize,
    /// Points where the Hessian stencil left the evaluable region.
    pub breakdowns: usize,
    pub max_eig_over_region: Option<f64>,
    pub unit_point: UnitPointEigenvalues,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicitySection {
    pub points_checked: usize,
    #[serde(rename = "share_dVdK_positive")]
    pub share_dvdk_positive: Option<f64>,
    #[serde(rename = "share_dVdL_positive")]
    pub share_dvdl_positive: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub params: Parameters,
    pub config: ScanConfig,
    pub positivity: PositivitySection,
    pub homogeneity: HomogeneitySection,
    pub concavity: ConcavitySection,
    pub monotonicity: MonotonicitySection,
    /// Max over the grid of `|eps_K + eps_L - ray degree|`.
    pub euler_identity_max_abs_err: Option<f64>,
}

impl DiagnosticsReport {
    /// Dotted paths of the fields that are undefined (no evaluable points).
    pub fn undefined_fields(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut note = |name: &str, v: Option<f64>| {
            if v.is_none() {
                out.push(name.to_string());
            }
        };
        note("homogeneity.degree_min", self.homogeneity.degree_min);
        note("homogeneity.degree_max", self.homogeneity.degree_max);
        note(
            "concavity.max_eig_over_region",
            self.concavity.max_eig_over_region,
        );
        note(
            "monotonicity.share_dVdK_positive",
            self.monotonicity.share_dvdk_positive,
        );
        note(
            "monotonicity.share_dVdL_positive",
            self.monotonicity.share_dvdl_positive,
        );
        note(
            "euler_identity_max_abs_err",
            self.euler_identity_max_abs_err,
        );
        out
    }
}

pub fn homogeneity_scan(
    params: &Parameters,
    cfg: &ScanConfig,
) -> Result<HomogeneitySection, DiagnosticsError> {
    cfg.validate()?;
    Ok(homogeneity_at(params, &cfg.grid_points()))
}

fn homogeneity_at(params: &Parameters, points: &[InputPoint]) -> HomogeneitySection {
    let degrees: Vec<f64> = points
        .iter()
        .filter_map(|x| homogeneity_degree(params, x).ok())
        .filter(|d| d.is_finite())
        .collect();
    let degree_min = degrees.iter().copied().reduce(f64::min);
    let degree_max = degrees.iter().copied().reduce(f64::max);
    let (is_homogeneous, claimed_degree_one) = match (degree_min, degree_max) {
        (Some(lo), Some(hi)) => {
            let homogeneous = hi - lo <= HOMOGENEITY_SPREAD_TOL;
            let one = homogeneous
                && (lo - 1.0).abs() <= HOMOGENEITY_SPREAD_TOL
                && (hi - 1.0).abs() <= HOMOGENEITY_SPREAD_TOL;
            (homogeneous, one)
        }
        _ => (false, false),
    };
    HomogeneitySection {
        points_evaluated: degrees.len(),
        points_skipped: points.len() - degrees.len(),
        degree_min,
        degree_max,
        is_homogeneous,
        claimed_degree_one,
    }
}

pub fn positivity_scan(
    params: &Parameters,
    cfg: &ScanConfig,
) -> Result<PositivitySection, DiagnosticsError> {
    cfg.validate()?;
    let mut section = PositivitySection {
        checked: 0,
        violations: 0,
        domain_errors: 0,
        first_violation: None,
    };
    let mut rng = CounterRng::new(cfg.seed);
    for _ in 0..cfg.samples {
        let (k, l) = if cfg.log_spacing {
            (
                rng.log_uniform(cfg.k_range.0, cfg.k_range.1),
                rng.log_uniform(cfg.l_range.0, cfg.l_range.1),
            )
        } else {
            (
                rng.uniform(cfg.k_range.0, cfg.k_range.1),
                rng.uniform(cfg.l_range.0, cfg.l_range.1),
            )
        };
        let x = InputPoint::new(k, l).expect("validated range");
        section.checked += 1;
        let bad = match eval_v(params, &x) {
            Ok(e) => !(e.v > 0.0 && e.v.is_finite()),
            Err(_) => {
                section.domain_errors += 1;
                true
            }
        };
        if bad {
            section.violations += 1;
            section.first_violation.get_or_insert(x);
        }
    }
    Ok(section)
}

/// Curvature classes of a 2x2 symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Curvature {
    NegativeDefinite,
    NegativeSemidefinite,
    PositiveSemidefinite,
    Indefinite,
}

/// Classifies by eigenvalue sign, treating `|eig| <= tol` as zero.
pub fn classify_curvature(h: &Hessian2, tol: f64) -> Curvature {
    match (h.eig1, h.eig2) {
        (e1, _) if e1 < -tol => Curvature::NegativeDefinite,
        (e1, _) if e1 <= tol => Curvature::NegativeSemidefinite,
        (_, e2) if e2 >= -tol => Curvature::PositiveSemidefinite,
        _ => Curvature::Indefinite,
    }
}

/// Zero threshold for eigenvalues of a finite-difference Hessian.
fn eigen_tol(h: &Hessian2) -> f64 {
    1e-6 * h.max_abs()
}

pub fn concavity_scan(
    params: &Parameters,
    cfg: &ScanConfig,
) -> Result<ConcavitySection, DiagnosticsError> {
    cfg.validate()?;
    Ok(concavity_at(params, &cfg.grid_points()))
}

/// Concavity counts over an arbitrary point set.
pub fn concavity_at(params: &Parameters, points: &[InputPoint]) -> ConcavitySection {
    let mut points_checked = 0;
    let mut nsd = 0;
    let mut breakdowns = 0;
    let mut max_eig: Option<f64> = None;
    for x in points {
        match hessian(params, x) {
            Ok(h) => {
                points_checked += 1;
                if h.eig1 <= eigen_tol(&h) {
                    nsd += 1;
                }
                max_eig = Some(max_eig.map_or(h.eig1, |m| m.max(h.eig1)));
            }
            Err(_) => breakdowns += 1,
        }
    }
    ConcavitySection {
        points_checked,
        negative_semidefinite_count: nsd,
        breakdowns,
        max_eig_over_region: max_eig,
        unit_point: unit_point_eigenvalues(params),
    }
}

fn unit_point_eigenvalues(params: &Parameters) -> UnitPointEigenvalues {
    let (a, sigma, p, q) = (params.a(), params.sigma(), params.p(), params.q());
    let lambda1 = -a * (p / q) * sigma * q;
    let lambda2 = lambda1 * (1.0 - q);
    let unit = InputPoint::new(1.0, 1.0).expect("unit point is valid");
    let computed = hessian(params, &unit).ok();
    UnitPointEigenvalues {
        published_lambda1: lambda1.is_finite().then_some(lambda1),
        published_lambda2: lambda2.is_finite().then_some(lambda2),
        computed_eig1: computed.map(|h| h.eig1),
        computed_eig2: computed.map(|h| h.eig2),
    }
}

pub fn monotonicity_scan(
    params: &Parameters,
    cfg: &ScanConfig,
) -> Result<MonotonicitySection, DiagnosticsError> {
    cfg.validate()?;
    let mut checked = 0usize;
    let (mut k_pos, mut l_pos) = (0usize, 0usize);
    for x in cfg.grid_points() {
        if let Ok(g) = gradient(params, &x) {
            checked += 1;
            k_pos += usize::from(g.dv_dk > 0.0);
            l_pos += usize::from(g.dv_dl > 0.0);
        }
    }
    let share = |n: usize| (checked > 0).then(|| n as f64 / checked as f64);
    Ok(MonotonicitySection {
        points_checked: checked,
        share_dvdk_positive: share(k_pos),
        share_dvdl_positive: share(l_pos),
    })
}

/// Largest `|eps_K + eps_L - ray degree|` over the points that evaluate.
pub fn euler_identity_error(params: &Parameters, points: &[InputPoint]) -> Option<f64> {
    points
        .iter()
        .filter_map(|x| {
            let sum = elasticity_k(params, x).ok()? + elasticity_l(params, x).ok()?;
            let degree = homogeneity_degree(params, x).ok()?;
            Some((sum - degree).abs())
        })
        .reduce(f64::max)
}

pub fn run_all(
    params: &Parameters,
    cfg: &ScanConfig,
) -> Result<DiagnosticsReport, DiagnosticsError> {
    cfg.validate()?;
    let points = cfg.grid_points();
    Ok(DiagnosticsReport {
        params: *params,
        config: cfg.clone(),
        positivity: positivity_scan(params, cfg)?,
        homogeneity: homogeneity_at(params, &points),
        concavity: concavity_at(params, &points),
        monotonicity: monotonicity_scan(params, cfg)?,
        euler_identity_max_abs_err: euler_identity_error(params, &points),
    })
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

    fn region(grid: usize) -> ScanConfig {
        ScanConfig::new((0.5, 10.0), (0.5, 10.0), grid, 1000, 7)
    }

    #[test]
    fn ray_degree_examples() {
        let d = homogeneity_degree(&params(1.0, 0.0, 0.3, 0.6, 0.2), &pt(3.0, 0.4)).unwrap();
        assert!(d.abs() < 1e-8);
        let d = homogeneity_degree(&params(1.0, 1.0, 0.5, 0.5, 0.5), &pt(4.0, 1.0)).unwrap();
        assert!((d + 1.0).abs() < 1e-8);
        let prm = params(1.0, 0.5, 0.5, 0.5, 0.5);
        let x = pt(4.0, 1.0);
        let d = homogeneity_degree(&prm, &x).unwrap();
        let euler = elasticity_k(&prm, &x).unwrap() + elasticity_l(&prm, &x).unwrap();
        assert!((d - euler).abs() < 1e-8);
        // eps_K + eps_L = 1/33 - 25/33
        assert!((d + 24.0 / 33.0).abs() < 1e-8);
    }

    #[test]
    fn homogeneity_scan_examples() {
        let s = homogeneity_scan(&params(1.0, 0.0, 0.5, 0.5, 0.5), &region(8)).unwrap();
        assert!(s.degree_min.unwrap().abs() < 1e-8 && s.degree_max.unwrap().abs() < 1e-8);
        assert!(s.is_homogeneous && !s.claimed_degree_one);

        for (delta, p, q) in [(0.5, 0.5, 0.5), (0.2, -0.7, 0.9), (0.9, 0.3, -0.4)] {
            let s = homogeneity_scan(&params(1.0, 1.0, delta, p, q), &region(8)).unwrap();
            assert!((s.degree_min.unwrap() + 1.0).abs() < 1e-8);
            assert!((s.degree_max.unwrap() + 1.0).abs() < 1e-8);
            assert!(s.is_homogeneous && !s.claimed_degree_one);
        }

        let s = homogeneity_scan(&params(1.0, 0.5, 0.5, 0.5, 0.5), &region(8)).unwrap();
        assert!(s.degree_max.unwrap() - s.degree_min.unwrap() > 0.01);
        assert!(!s.is_homogeneous && !s.claimed_degree_one);
    }

    #[test]
    fn positivity_examples() {
        let s = positivity_scan(
            &params(1.0, 0.5, 0.5, 0.5, 0.5),
            &ScanConfig::new((0.1, 100.0), (0.1, 100.0), 2, 100_000, 3),
        )
        .unwrap();
        assert_eq!((s.checked, s.violations), (100_000, 0));

        let s = positivity_scan(
            &params(1.0, 1.5, 0.5, 0.5, 0.5),
            &ScanConfig::new((0.01, 100.0), (0.01, 100.0), 2, 5000, 3),
        )
        .unwrap();
        assert_eq!(s.checked, 5000);
        assert!(s.violations > 0 && s.violations == s.domain_errors);
        assert!(s.first_violation.is_some());

        let s = positivity_scan(
            &params(1.0, 0.5, 0.5, 0.5, 0.5),
            &ScanConfig::new((1.0, 1.0), (1.0, 1.0), 2, 1, 0),
        )
        .unwrap();
        assert_eq!((s.checked, s.violations), (1, 0));
    }

    #[test]
    fn curvature_classes() {
        let diag = Hessian2::from_entries(-2.0, 0.0, 0.0, -3.0);
        assert_eq!((diag.eig1, diag.eig2), (-2.0, -3.0));
        assert_eq!(
            classify_curvature(&diag, 1e-12),
            Curvature::NegativeDefinite
        );
        let ratio = Hessian2::from_entries(0.0, -1.0, -1.0, 4.0);
        // 2 +- sqrt(5)
        assert!((ratio.eig1 - 4.2361).abs() < 1e-4 && (ratio.eig2 + 0.2361).abs() < 1e-4);
        assert_eq!(classify_curvature(&ratio, 1e-12), Curvature::Indefinite);
        assert_eq!(
            classify_curvature(&Hessian2::from_entries(-1.0, 0.0, 0.0, 0.0), 1e-12),
            Curvature::NegativeSemidefinite
        );
    }

    #[test]
    fn concavity_of_ratio_collapse_fails() {
        let cfg = ScanConfig::new((1.5, 2.5), (0.8, 1.2), 3, 1, 0);
        let s = concavity_scan(&params(1.0, 0.0, 0.5, 0.5, 0.5), &cfg).unwrap();
        assert_eq!(s.points_checked, 9);
        assert_eq!(s.negative_semidefinite_count, 0);
        assert!(s.max_eig_over_region.unwrap() > 0.0);
    }

    #[test]
    fn unit_point_eigenvalue_record() {
        let s = concavity_scan(&params(1.0, 0.5, 0.5, 0.5, 0.5), &region(2)).unwrap();
        assert_eq!(s.unit_point.published_lambda1, Some(-0.25));
        assert_eq!(s.unit_point.published_lambda2, Some(-0.125));
        assert!(s.unit_point.computed_eig1.is_some());
    }

    #[test]
    fn concavity_is_order_independent() {
        let prm = params(1.0, 0.5, 0.5, 0.5, 0.5);
        let mut points = region(6).grid_points();
        let forward = concavity_at(&prm, &points);
        points.reverse();
        points.rotate_left(7);
        assert_eq!(forward, concavity_at(&prm, &points));
    }

    #[test]
    fn monotonicity_examples() {
        let s = monotonicity_scan(&params(1.0, 0.0, 0.5, 0.5, 0.5), &region(8)).unwrap();
        assert_eq!(s.share_dvdk_positive, Some(1.0));
        assert_eq!(s.share_dvdl_positive, Some(0.0));

        let s = monotonicity_scan(&params(1.0, 1.0, 1.0, 0.5, 0.5), &region(8)).unwrap();
        assert_eq!(s.share_dvdk_positive, Some(0.0));

        let s = monotonicity_scan(&params(1.0, 0.5, 0.5, 0.5, 0.5), &region(8)).unwrap();
        let share = s.share_dvdk_positive.unwrap();
        assert!(share > 0.0 && share < 1.0, "{share}");
    }

    #[test]
    fn run_all_is_deterministic() {
        let prm = params(1.0, 0.5, 0.5, 0.5, 0.5);
        let cfg = ScanConfig::new((0.5, 10.0), (0.5, 10.0), 8, 10_000, 7);
        let a = run_all(&prm, &cfg).unwrap();
        let b = run_all(&prm, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(!a.homogeneity.is_homogeneous);
        assert_eq!(a.positivity.violations, 0);
        assert!(a.euler_identity_max_abs_err.unwrap() <= 1e-8);
    }

    #[test]
    fn ratio_collapse_report() {
        let rep = run_all(&params(2.0, 0.0, 0.4, 0.3, 0.9), &region(5)).unwrap();
        assert!(rep.homogeneity.is_homogeneous);
        assert!(rep.homogeneity.degree_max.unwrap().abs() < 1e-8);
        assert_eq!(rep.positivity.violations, 0);
        assert!(rep.euler_identity_max_abs_err.unwrap() <= 1e-8);
        assert!(rep.undefined_fields().is_empty());
    }

    #[test]
    fn config_validation() {
        let mut cfg = region(8);
        cfg.grid = 1;
        assert!(matches!(
            cfg.validate(),
            Err(DiagnosticsError::InvalidConfig(_))
        ));
        let mut cfg = region(8);
        cfg.k_range = (0.0, 1.0);
        assert!(cfg.validate().is_err());
        let mut cfg = region(8);
        cfg.budget = 100;
        assert_eq!(
            cfg.validate(),
            Err(DiagnosticsError::ScanBudgetExceeded {
                requested: 1064,
                budget: 100
            })
        );
        let mut cfg = region(8);
        cfg.samples = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn linear_grid_hits_endpoints() {
        let mut cfg = ScanConfig::new((1.0, 3.0), (2.0, 4.0), 3, 1, 0);
        cfg.log_spacing = false;
        let pts = cfg.grid_points();
        assert_eq!(pts.len(), 9);
        assert_eq!((pts[0].k(), pts[0].l()), (1.0, 2.0));
        assert_eq!((pts[1].k(), pts[1].l()), (1.0, 3.0));
        assert_eq!((pts[8].k(), pts[8].l()), (3.0, 4.0));
    }
}
