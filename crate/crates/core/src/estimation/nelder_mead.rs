//! Deterministic Nelder-Mead simplex minimizer.
//!
//! Standard coefficients (reflection 1, expansion 2, contraction 1/2,
//! shrink 1/2). Vertices are ordered by value with ties broken by insertion
//! order, so runs are reproducible. `+inf` is a valid objective value and
//! marks a rejected point.

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadOptions {
    pub max_iters: usize,
    /// Stop when `f_worst - f_best <= objective_tol * |f_best|`.
    pub objective_tol: f64,
    /// Stop when every vertex is within `param_tol` (max-norm) of the best one.
    pub param_tol: f64,
    /// Fresh simplexes built around the incumbent after convergence.
    pub restarts: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

struct Simplex<'a, F> {
    objective: &'a F,
    vertices: Vec<Vec<f64>>,
    values: Vec<f64>,
    evaluations: usize,
}

impl<F: Fn(&[f64]) -> f64> Simplex<'_, F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        let f = (self.objective)(x);
        if f.is_nan() {
            f64::INFINITY
        } else {
            f
        }
    }

    fn sort(&mut self) {
        let mut order: Vec<usize> = (0..self.values.len()).collect();
        order.sort_by(|&i, &j| self.values[i].total_cmp(&self.values[j]).then(i.cmp(&j)));
        self.vertices = order.iter().map(|&i| self.vertices[i].clone()).collect();
        self.values = order.iter().map(|&i| self.values[i]).collect();
    }

    fn converged(&self, opts: &NelderMeadOptions) -> bool {
        let best = self.values[0];
        let worst = *self.values.last().expect("non-empty simplex");
        if !best.is_finite() {
            return false;
        }
        let f_ok = worst.is_finite() && worst - best <= opts.objective_tol * best.abs();
        let x_ok = self.vertices[1..].iter().all(|v| {
            v.iter()
                .zip(&self.vertices[0])
                .all(|(a, b)| (a - b).abs() <= opts.param_tol)
        });
        f_ok || x_ok
    }
}

fn affine(base: &[f64], toward: &[f64], t: f64) -> Vec<f64> {
    base.iter()
        .zip(toward)
        .map(|(b, w)| b + t * (w - b))
        .collect()
}

/// Minimizes `objective` from `x0` with initial edge lengths `steps`.
pub fn minimize<F>(
    objective: &F,
    x0: &[f64],
    steps: &[f64],
    opts: &NelderMeadOptions,
) -> NelderMeadOutcome
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    assert_eq!(steps.len(), n, "one step per coordinate");

    let mut incumbent = x0.to_vec();
    let mut total_iters = 0usize;
    let mut evaluations = 0usize;
    let mut best_f = f64::INFINITY;
    let mut converged = false;

    for round in 0..=opts.restarts {
        let mut simplex = Simplex {
            objective,
            vertices: Vec::with_capacity(n + 1),
            values: Vec::with_capacity(n + 1),
            evaluations: 0,
        };
        simplex.vertices.push(incumbent.clone());
        for (i, step) in steps.iter().enumerate() {
            let mut v = incumbent.clone();
            v[i] += step;
            simplex.vertices.push(v);
        }
        simplex.values = simplex
            .vertices
            .clone()
            .iter()
            .map(|v| simplex.eval(v))
            .collect();

        let mut round_converged = false;
        while total_iters < opts.max_iters {
            simplex.sort();
            if simplex.converged(opts) {
                round_converged = true;
                break;
            }
            total_iters += 1;

            let worst = simplex.vertices[n].clone();
            let f_worst = simplex.values[n];
            let mut centroid = vec![0.0; n];
            for v in &simplex.vertices[..n] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / n as f64;
                }
            }

            let reflected = affine(&centroid, &worst, -REFLECT);
            let f_reflected = simplex.eval(&reflected);

            if f_reflected < simplex.values[0] {
                let expanded = affine(&centroid, &worst, -EXPAND);
                let f_expanded = simplex.eval(&expanded);
                if f_expanded < f_reflected {
                    simplex.vertices[n] = expanded;
                    simplex.values[n] = f_expanded;
                } else {
                    simplex.vertices[n] = reflected;
                    simplex.values[n] = f_reflected;
                }
                continue;
            }
            if f_reflected < simplex.values[n - 1] {
                simplex.vertices[n] = reflected;
                simplex.values[n] = f_reflected;
                continue;
            }
            let (contracted, accept_below) = if f_reflected < f_worst {
                (affine(&centroid, &reflected, CONTRACT), f_reflected)
            } else {
                (affine(&centroid, &worst, CONTRACT), f_worst)
            };
            let f_contracted = simplex.eval(&contracted);
            if f_contracted < accept_below
                || (f_contracted == accept_below && f_contracted.is_finite())
            {
                simplex.vertices[n] = contracted;
                simplex.values[n] = f_contracted;
                continue;
            }
            let best = simplex.vertices[0].clone();
            for i in 1..=n {
                let shrunk = affine(&best, &simplex.vertices[i], SHRINK);
                simplex.values[i] = simplex.eval(&shrunk);
                simplex.vertices[i] = shrunk;
            }
        }
        simplex.sort();
        evaluations += simplex.evaluations;

        let round_best = simplex.values[0];
        let improved = round_best < best_f;
        let negligible =
            best_f.is_finite() && best_f - round_best <= opts.objective_tol * best_f.abs();
        if improved {
            best_f = round_best;
            incumbent = simplex.vertices[0].clone();
        }
        converged = round_converged;
        if !round_converged || total_iters >= opts.max_iters || (round > 0 && negligible) {
            break;
        }
    }

    NelderMeadOutcome {
        x: incumbent,
        f: best_f,
        iterations: total_iters,
        evaluations,
        converged,
    }
}
