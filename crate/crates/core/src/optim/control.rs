//! Open-loop control NLPs over a fixed actuation.
//!
//! The optimizer works on `v = h c` instead of the raw controls `c`. Inputs
//! enter every step multiplied by `h`, so in raw units the gradient is of
//! order `h` and a gradient tolerance would be met long before the state
//! moves; after scaling, one unit of `v` moves the state by about one unit
//! per step regardless of the step size.

use nalgebra::DVector;

use crate::controls::{Actuation, ControlSequence};
use crate::error::{Error, Result};
use crate::models::NetworkModel;
use crate::objective::{control_error, cost_gradient, cost_j, CostSpec};
use crate::sim::{simulate, Scheme, Trajectory};

use super::lbfgs::{bounded_min, quasi_newton_min, NlpOptions, NlpResult};

/// A model, a scheme, an initial state and a cost: everything except the
/// controls and the actuation.
#[derive(Debug, Clone, Copy)]
pub struct ControlProblem<'a> {
    pub model: &'a dyn NetworkModel,
    pub scheme: &'a Scheme,
    pub x0: &'a DVector<f64>,
    pub cost: &'a CostSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlSolution {
    pub controls: ControlSequence,
    /// `J` of a fresh simulation of `controls`.
    pub objective: f64,
    pub error: f64,
    /// Optimizer diagnostics, in scaled variables.
    pub nlp: NlpResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedSolution {
    /// Full-width controls.
    pub controls: ControlSequence,
    pub alpha: Vec<f64>,
    pub objective: f64,
    pub nlp: NlpResult,
}

impl<'a> ControlProblem<'a> {
    pub fn new(model: &'a dyn NetworkModel, scheme: &'a Scheme, x0: &'a DVector<f64>, cost: &'a CostSpec) -> Result<Self> {
        scheme.validate()?;
        cost.validate()?;
        if x0.len() != model.state_dim() || cost.target.len() != model.state_dim() {
            return Err(Error::invalid(format!(
                "state dimension mismatch: model {}, x0 {}, target {}",
                model.state_dim(),
                x0.len(),
                cost.target.len()
            )));
        }
        if cost.horizon == 0 {
            return Err(Error::invalid("horizon must be at least one step"));
        }
        Ok(Self { model, scheme, x0, cost })
    }

    pub fn horizon(&self) -> usize {
        self.cost.horizon
    }

    pub fn node_count(&self) -> usize {
        self.model.node_count()
    }

    pub fn simulate(&self, controls: &ControlSequence, actuation: &Actuation) -> Result<Trajectory> {
        simulate(self.model, self.scheme, self.x0, controls, actuation)
    }

    /// `(J, e)` for the given controls.
    pub fn evaluate(&self, controls: &ControlSequence, actuation: &Actuation) -> Result<(f64, f64)> {
        let traj = self.simulate(controls, actuation)?;
        Ok((cost_j(&traj, self.cost), control_error(&traj, &self.cost.target)))
    }

    /// Minimizes `J` over the controls of `actuation`, starting from `init`.
    pub fn solve(&self, actuation: &Actuation, init: &ControlSequence, options: &NlpOptions) -> Result<ControlSolution> {
        let horizon = self.horizon();
        if init.width() != actuation.width() || init.horizon() != horizon {
            return Err(Error::invalid(format!(
                "initial controls are {}x{}, expected {}x{}",
                init.len(),
                init.width(),
                horizon + 1,
                actuation.width()
            )));
        }
        let h = self.scheme.h;
        let width = actuation.width();
        let mut buf = init.clone();
        let objective = |v: &[f64], g: &mut [f64]| {
            for (c, &vi) in buf.as_mut_slice().iter_mut().zip(v) {
                *c = vi / h;
            }
            match cost_gradient(self.model, self.scheme, self.x0, &buf, actuation, self.cost) {
                Ok(cg) => {
                    for (gi, &d) in g.iter_mut().zip(&cg.controls) {
                        *gi = d / h;
                    }
                    cg.cost
                }
                Err(_) => f64::INFINITY,
            }
        };
        let v0: Vec<f64> = init.as_slice().iter().map(|c| c * h).collect();
        let nlp = quasi_newton_min(objective, &v0, options)?;
        let controls = ControlSequence::from_flat(horizon, width, nlp.x.iter().map(|v| v / h).collect())?;
        let (objective, error) = self.evaluate(&controls, actuation)?;
        Ok(ControlSolution {
            controls,
            objective,
            error,
            nlp,
        })
    }

    /// Minimizes `J` jointly over full-width controls and gains `α ∈ [0, 1]^N`.
    pub fn solve_relaxed(&self, z_init: &ControlSequence, alpha_init: &[f64], options: &NlpOptions) -> Result<RelaxedSolution> {
        let horizon = self.horizon();
        let n = self.node_count();
        if z_init.width() != n || z_init.horizon() != horizon || alpha_init.len() != n {
            return Err(Error::invalid("relaxed initial point has the wrong shape"));
        }
        let h = self.scheme.h;
        let nz = z_init.as_slice().len();
        let mut buf = z_init.clone();
        let objective = |x: &[f64], g: &mut [f64]| {
            for (c, &vi) in buf.as_mut_slice().iter_mut().zip(&x[..nz]) {
                *c = vi / h;
            }
            let actuation = Actuation::relaxed(&x[nz..]);
            match cost_gradient(self.model, self.scheme, self.x0, &buf, &actuation, self.cost) {
                Ok(cg) => {
                    for (gi, &d) in g[..nz].iter_mut().zip(&cg.controls) {
                        *gi = d / h;
                    }
                    g[nz..].copy_from_slice(&cg.gains);
                    cg.cost
                }
                Err(_) => f64::INFINITY,
            }
        };
        let mut x0: Vec<f64> = z_init.as_slice().iter().map(|c| c * h).collect();
        x0.extend_from_slice(alpha_init);
        let mut lower = vec![f64::NEG_INFINITY; nz];
        lower.extend(std::iter::repeat_n(0.0, n));
        let mut upper = vec![f64::INFINITY; nz];
        upper.extend(std::iter::repeat_n(1.0, n));
        let nlp = bounded_min(objective, &x0, &lower, &upper, options)?;
        let controls = ControlSequence::from_flat(horizon, n, nlp.x[..nz].iter().map(|v| v / h).collect())?;
        let alpha = nlp.x[nz..].to_vec();
        let traj = self.simulate(&controls, &Actuation::relaxed(&alpha))?;
        Ok(RelaxedSolution {
            controls,
            alpha,
            objective: cost_j(&traj, self.cost),
            nlp,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::LinearNetwork;

    #[test]
    fn steers_integrator_exactly() {
        // x_{k+1} = x_k + h c_k, target 1: J = 0 is reachable in one step.
        let model = LinearNetwork::zero(1, 1);
        let scheme = Scheme::forward_euler(0.1);
        let x0 = DVector::from_element(1, 0.0);
        let cost = CostSpec::tracking(DVector::from_element(1, 1.0), 3);
        let p = ControlProblem::new(&model, &scheme, &x0, &cost).unwrap();
        let act = Actuation::reduced(vec![0]);
        let sol = p
            .solve(&act, &ControlSequence::zeros(3, 1), &NlpOptions::default().with_tolerance(1e-10, 200))
            .unwrap();
        assert!(sol.objective < 1e-16, "{}", sol.objective);
        assert!((sol.controls.row(0)[0] - 10.0).abs() < 1e-6);
        assert!(sol.nlp.converged);
    }

    #[test]
    fn empty_actuation_evaluates_free_response() {
        let model = LinearNetwork::scalar(-1.0);
        let scheme = Scheme::trapezoidal(0.1);
        let x0 = DVector::from_element(1, 1.0);
        let cost = CostSpec::tracking(DVector::from_element(1, 0.0), 2);
        let p = ControlProblem::new(&model, &scheme, &x0, &cost).unwrap();
        let sol = p
            .solve(&Actuation::reduced(vec![]), &ControlSequence::zeros(2, 0), &NlpOptions::default())
            .unwrap();
        let r: f64 = 0.95 / 1.05;
        assert!((sol.objective - (r * r + r.powi(4))).abs() < 1e-14);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let model = LinearNetwork::zero(2, 1);
        let scheme = Scheme::forward_euler(0.1);
        let x0 = DVector::zeros(2);
        let cost = CostSpec::tracking(DVector::zeros(2), 3);
        let p = ControlProblem::new(&model, &scheme, &x0, &cost).unwrap();
        let err = p.solve(&Actuation::reduced(vec![0]), &ControlSequence::zeros(2, 1), &NlpOptions::default());
        assert!(err.is_err());
        let bad_x0 = DVector::zeros(3);
        assert!(ControlProblem::new(&model, &scheme, &bad_x0, &cost).is_err());
    }

    #[test]
    fn relaxed_gains_stay_in_box() {
        let model = LinearNetwork::zero(2, 1);
        let scheme = Scheme::forward_euler(0.1);
        let x0 = DVector::zeros(2);
        let cost = CostSpec::tracking(DVector::from_vec(vec![1.0, -1.0]), 2);
        let p = ControlProblem::new(&model, &scheme, &x0, &cost).unwrap();
        let sol = p
            .solve_relaxed(&ControlSequence::zeros(2, 2), &[0.5, 0.5], &NlpOptions::default().with_tolerance(1e-8, 500))
            .unwrap();
        assert!(sol.alpha.iter().all(|a| (0.0..=1.0).contains(a)));
        assert!(sol.objective < 1e-10, "{}", sol.objective);
        assert!(sol.nlp.grad_norm < 1e-8);
    }
}
