//! Limited-memory BFGS with a projected backtracking line search.
//!
//! Unconstrained problems are the special case of infinite bounds. The
//! search direction comes from the usual two-loop recursion, restricted to
//! the variables that are not held at an active bound. Trial points are
//! projected onto the box and accepted under the Armijo condition with step
//! halving, or, once differences in `f` drown in rounding, when `f` does not
//! increase and the directional derivative satisfies the approximate Wolfe
//! bounds. After acceptance the minimizer of the parabola through `φ(0)`,
//! `φ'(0)` and `φ(t)` is tried as well and kept if it is lower, which makes
//! steps exact on quadratic objectives.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlpOptions {
    /// Stop once the (projected) gradient sup-norm falls below this.
    pub tol_grad: f64,
    pub max_iter: usize,
    /// Number of stored secant pairs.
    pub memory: usize,
    pub armijo: f64,
    pub max_halvings: usize,
}

impl Default for NlpOptions {
    fn default() -> Self {
        Self {
            tol_grad: 1e-6,
            max_iter: 500,
            memory: 10,
            armijo: 1e-4,
            max_halvings: 60,
        }
    }
}

impl NlpOptions {
    pub fn with_tolerance(self, tol_grad: f64, max_iter: usize) -> Self {
        Self {
            tol_grad,
            max_iter,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NlpResult {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub termination: Termination,
    /// Sup-norm of the (projected) gradient at `x`.
    pub grad_norm: f64,
}

/// Minimizes `f` without constraints.
///
/// `f(x, grad)` returns the objective and writes the gradient. A non-finite
/// return value marks `x` as unusable; the line search then backs off.
pub fn quasi_newton_min<F>(f: F, x_init: &[f64], options: &NlpOptions) -> Result<NlpResult>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    minimize(f, x_init, None, options)
}

/// Minimizes `f` over the box `lower ≤ x ≤ upper`.
pub fn bounded_min<F>(f: F, x_init: &[f64], lower: &[f64], upper: &[f64], options: &NlpOptions) -> Result<NlpResult>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x_init.len();
    if lower.len() != n || upper.len() != n {
        return Err(Error::invalid("bounds must match the variable count"));
    }
    for i in 0..n {
        if !(lower[i] <= x_init[i] && x_init[i] <= upper[i]) {
            return Err(Error::invalid(format!(
                "initial point violates bounds at index {i}: {} not in [{}, {}]",
                x_init[i], lower[i], upper[i]
            )));
        }
    }
    minimize(f, x_init, Some((lower, upper)), options)
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn project(x: &mut [f64], bounds: Option<(&[f64], &[f64])>) {
    if let Some((lo, hi)) = bounds {
        for ((v, &l), &u) in x.iter_mut().zip(lo).zip(hi) {
            *v = v.clamp(l, u);
        }
    }
}

/// `max_i |P(x_i − g_i) − x_i|`.
fn projected_grad_norm(x: &[f64], g: &[f64], bounds: Option<(&[f64], &[f64])>) -> f64 {
    match bounds {
        None => sup(g),
        Some((lo, hi)) => (0..x.len())
            .map(|i| ((x[i] - g[i]).clamp(lo[i], hi[i]) - x[i]).abs())
            .fold(0.0, f64::max),
    }
}

/// Variables held at a bound by a gradient pointing outwards.
fn active_set(x: &[f64], g: &[f64], bounds: Option<(&[f64], &[f64])>) -> Vec<bool> {
    match bounds {
        None => vec![false; x.len()],
        Some((lo, hi)) => (0..x.len())
            .map(|i| (x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0))
            .collect(),
    }
}

fn two_loop(g: &[f64], active: &[bool], history: &VecDeque<Pair>) -> Vec<f64> {
    let mask = |v: &mut Vec<f64>| {
        for (vi, &a) in v.iter_mut().zip(active) {
            if a {
                *vi = 0.0;
            }
        }
    };
    let mut q = g.to_vec();
    mask(&mut q);
    let mut alphas = Vec::with_capacity(history.len());
    for p in history.iter().rev() {
        let a = p.rho * dot(&p.s, &q);
        for (qi, yi) in q.iter_mut().zip(&p.y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some(last) = history.back() {
        let gamma = dot(&last.s, &last.y) / dot(&last.y, &last.y);
        q.iter_mut().for_each(|v| *v *= gamma);
    } else {
        // No curvature yet: unit sup-norm steepest descent step.
        let scale = sup(&q).max(1.0);
        q.iter_mut().for_each(|v| *v /= scale);
    }
    for (p, a) in history.iter().zip(alphas.iter().rev()) {
        let b = p.rho * dot(&p.y, &q);
        for (qi, si) in q.iter_mut().zip(&p.s) {
            *qi += (a - b) * si;
        }
    }
    mask(&mut q);
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

fn minimize<F>(mut f: F, x_init: &[f64], bounds: Option<(&[f64], &[f64])>, options: &NlpOptions) -> Result<NlpResult>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x_init.len();
    if x_init.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("initial point is not finite"));
    }
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], g: &mut [f64]| {
        evaluations += 1;
        f(x, g)
    };

    let mut x = x_init.to_vec();
    project(&mut x, bounds);
    let mut g = vec![0.0; n];
    let mut fx = eval(&x, &mut g);
    if !fx.is_finite() {
        return Err(Error::invalid("objective is not finite at the initial point"));
    }

    let mut history: VecDeque<Pair> = VecDeque::with_capacity(options.memory);
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;
    let mut x_trial = vec![0.0; n];
    let mut g_trial = vec![0.0; n];
    let mut x_alt = vec![0.0; n];
    let mut g_alt = vec![0.0; n];

    while iterations < options.max_iter {
        if projected_grad_norm(&x, &g, bounds) < options.tol_grad {
            termination = Termination::Converged;
            break;
        }
        iterations += 1;

        let active = active_set(&x, &g, bounds);
        let mut d = two_loop(&g, &active, &history);
        if dot(&g, &d) >= 0.0 {
            history.clear();
            d = two_loop(&g, &active, &history);
        }
        let slope = dot(&g, &d);
        if slope >= 0.0 {
            // Only possible when every free component of g vanishes.
            termination = Termination::Converged;
            break;
        }

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=options.max_halvings {
            for i in 0..n {
                x_trial[i] = x[i] + t * d[i];
            }
            project(&mut x_trial, bounds);
            let decrease = dot(&g, &x_trial) - dot(&g, &x);
            let ft = eval(&x_trial, &mut g_trial);
            if ft.is_finite() && ft < fx && ft <= fx + options.armijo * decrease {
                accepted = Some(ft);
                break;
            }
            // Near the optimum f stops resolving progress; the slope still does.
            let slope_t = dot(&g_trial, &d);
            if ft.is_finite() && ft <= fx && slope_t >= 0.9 * slope && slope_t <= -0.8 * slope {
                accepted = Some(ft);
                break;
            }
            t *= 0.5;
            let scale = sup(&x).max(1.0);
            if t * sup(&d) < f64::EPSILON * scale {
                break;
            }
        }
        let Some(mut f_new) = accepted else {
            termination = Termination::LineSearchFailed;
            break;
        };

        // Parabola through φ(0) = fx, φ'(0) = slope, φ(t) = f_new.
        let curvature = f_new - fx - slope * t;
        if curvature > 0.0 {
            let t_q = -slope * t * t / (2.0 * curvature);
            if t_q > 0.0 && t_q <= 1e3 * t && (t_q - t).abs() > 1e-2 * t {
                for i in 0..n {
                    x_alt[i] = x[i] + t_q * d[i];
                }
                project(&mut x_alt, bounds);
                let f_alt = eval(&x_alt, &mut g_alt);
                if f_alt.is_finite() && f_alt < f_new {
                    f_new = f_alt;
                    std::mem::swap(&mut x_trial, &mut x_alt);
                    std::mem::swap(&mut g_trial, &mut g_alt);
                }
            }
        }

        let s: Vec<f64> = x_trial.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_trial.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            if history.len() == options.memory {
                history.pop_front();
            }
            if options.memory > 0 {
                history.push_back(Pair { s, y, rho: 1.0 / sy });
            }
        }
        std::mem::swap(&mut x, &mut x_trial);
        std::mem::swap(&mut g, &mut g_trial);
        fx = f_new;
    }
    if termination == Termination::MaxIterations && projected_grad_norm(&x, &g, bounds) < options.tol_grad {
        termination = Termination::Converged;
    }
    let grad_norm = projected_grad_norm(&x, &g, bounds);
    Ok(NlpResult {
        x,
        objective: fx,
        iterations,
        evaluations,
        converged: termination == Termination::Converged,
        termination,
        grad_norm,
    })
}
