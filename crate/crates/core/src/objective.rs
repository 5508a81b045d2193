//! Tracking cost `J = Σ_{i=1..T} (x_D − x_i)ᵀ Q_i (x_D − x_i)`, the final
//! control error and exact discrete adjoint gradients.
//!
//! The gradient is computed with respect to the per-step input vector
//! `b_k = B c_k` first, then mapped onto the control entries and onto the
//! actuation gains (the latter is what the relaxed selection problem needs).
//!
//! Forward Euler: with `g_T = ∂c_T`, `g_k = ∂c_k + (I + h F_k)ᵀ g_{k+1}`,
//! the input sensitivity is `∂J/∂b_k = h g_{k+1}` and `∂J/∂b_T = 0`.
//!
//! Trapezoidal: with `A_k = I − h/2 F_k`, `μ_{T+1} = 0` and
//! `μ_k = A_k^{−ᵀ} (∂c_k + (I + h/2 F_k)ᵀ μ_{k+1})`, the input sensitivity is
//! `∂J/∂b_k = h/2 (μ_k + μ_{k+1})` (with `μ_0 = 0`), since `b_k` enters both
//! step `k` and step `k + 1`.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::controls::{Actuation, ControlSequence};
use crate::error::{Error, Result};
use crate::models::NetworkModel;
use crate::sim::{shifted_identity, simulate, Scheme, SchemeKind, Trajectory};

/// Stage weights `Q_1, …, Q_T`.
#[derive(Debug, Clone, PartialEq)]
pub enum StageWeights {
    Identity,
    /// The same matrix at every stage.
    Uniform(DMatrix<f64>),
    /// `Q_i` stored at index `i − 1`.
    PerStep(Vec<DMatrix<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostSpec {
    pub target: DVector<f64>,
    pub weights: StageWeights,
    pub horizon: usize,
}

impl CostSpec {
    /// Identity-weighted tracking of `target` over `horizon` steps.
    pub fn tracking(target: DVector<f64>, horizon: usize) -> Self {
        Self {
            target,
            weights: StageWeights::Identity,
            horizon,
        }
    }

    pub fn with_weights(target: DVector<f64>, weights: StageWeights, horizon: usize) -> Result<Self> {
        let spec = Self {
            target,
            weights,
            horizon,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        let d = self.target.len();
        let check = |q: &DMatrix<f64>| -> Result<()> {
            if q.shape() != (d, d) {
                return Err(Error::invalid(format!("weight matrix must be {d}x{d}")));
            }
            if (q - q.transpose()).amax() > 0.0 {
                return Err(Error::invalid("weight matrix is not symmetric"));
            }
            let min_eig = q.clone().symmetric_eigenvalues().min();
            if min_eig < -1e-12 * q.amax().max(1.0) {
                return Err(Error::invalid("weight matrix is not positive semidefinite"));
            }
            Ok(())
        };
        match &self.weights {
            StageWeights::Identity => Ok(()),
            StageWeights::Uniform(q) => check(q),
            StageWeights::PerStep(qs) => {
                if qs.len() != self.horizon {
                    return Err(Error::invalid(format!(
                        "{} stage weights given for horizon {}",
                        qs.len(),
                        self.horizon
                    )));
                }
                qs.iter().try_for_each(check)
            }
        }
    }

    /// `Q_i r` for stage `i ≥ 1`.
    fn apply(&self, stage: usize, r: &DVector<f64>) -> DVector<f64> {
        match &self.weights {
            StageWeights::Identity => r.clone(),
            StageWeights::Uniform(q) => q * r,
            StageWeights::PerStep(qs) => &qs[stage - 1] * r,
        }
    }
}

/// Tracking cost of a trajectory; `x_0` is not penalized.
pub fn cost_j(traj: &Trajectory, spec: &CostSpec) -> f64 {
    assert_eq!(traj.horizon(), spec.horizon, "trajectory horizon does not match cost horizon");
    (1..=spec.horizon)
        .map(|i| {
            let r = &spec.target - &traj.states[i];
            r.dot(&spec.apply(i, &r))
        })
        .sum()
}

/// Final control error `‖x_D − x_T‖₂`.
pub fn control_error(traj: &Trajectory, target: &DVector<f64>) -> f64 {
    (target - traj.final_state()).norm()
}

/// Cost together with its gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct CostGradient {
    pub cost: f64,
    /// `∂J/∂c`, row-major like the control sequence.
    pub controls: Vec<f64>,
    /// `∂J/∂w_j` for the actuation gains.
    pub gains: Vec<f64>,
}

/// Simulates once and runs the adjoint recursion backwards.
pub fn cost_gradient(
    model: &dyn NetworkModel,
    scheme: &Scheme,
    x0: &DVector<f64>,
    controls: &ControlSequence,
    actuation: &Actuation,
    spec: &CostSpec,
) -> Result<CostGradient> {
    let traj = simulate(model, scheme, x0, controls, actuation)?;
    if traj.horizon() != spec.horizon {
        return Err(Error::invalid(format!(
            "controls span {} steps, cost expects {}",
            traj.horizon(),
            spec.horizon
        )));
    }
    if spec.target.len() != model.state_dim() {
        return Err(Error::invalid("target has wrong dimension"));
    }
    let horizon = spec.horizon;
    let dim = model.state_dim();
    let h = scheme.h;

    let mut cost = 0.0;
    // ∂c_k/∂x_k for k = 1..=T, stored at k - 1.
    let mut stage_grad = Vec::with_capacity(horizon);
    for k in 1..=horizon {
        let r = &spec.target - &traj.states[k];
        let qr = spec.apply(k, &r);
        cost += r.dot(&qr);
        stage_grad.push(qr * -2.0);
    }

    // ∂J/∂b_k for k = 0..=T.
    let mut input_sens = vec![DVector::zeros(dim); horizon + 1];
    let mut jac = DMatrix::zeros(dim, dim);
    match scheme.kind {
        SchemeKind::ForwardEuler => {
            let mut g = stage_grad[horizon - 1].clone();
            input_sens[horizon - 1] = &g * h;
            for k in (1..horizon).rev() {
                model.jacobian_into(&traj.states[k], &mut jac);
                let propagated = jac.tr_mul(&g);
                g += &stage_grad[k - 1];
                g.axpy(h, &propagated, 1.0);
                input_sens[k - 1] = &g * h;
            }
        }
        SchemeKind::Trapezoidal => {
            let half = 0.5 * h;
            let mut mu_next: DVector<f64> = DVector::zeros(dim);
            for k in (1..=horizon).rev() {
                model.jacobian_into(&traj.states[k], &mut jac);
                let mut g = &stage_grad[k - 1] + &mu_next;
                if k < horizon {
                    g.axpy(half, &jac.tr_mul(&mu_next), 1.0);
                }
                let mu = shifted_identity(&jac.transpose(), -half).lu().solve(&g).ok_or_else(|| Error::Step {
                    step: k,
                    kind: crate::error::StepError::Singular,
                })?;
                input_sens[k] = (&mu + &mu_next) * half;
                mu_next = mu;
            }
            input_sens[0] = mu_next * half;
        }
    }

    let width = actuation.width();
    let node_dim = model.node_dim();
    let mut grad_controls = vec![0.0; controls.as_slice().len()];
    let mut grad_gains = vec![0.0; width];
    for (k, sens) in input_sens.iter().enumerate() {
        let row = controls.row(k);
        for (j, (&node, &w)) in actuation.nodes().iter().zip(actuation.weights()).enumerate() {
            let s = sens[Actuation::driven_row(node, node_dim)];
            grad_controls[k * width + j] = w * s;
            grad_gains[j] += row[j] * s;
        }
    }
    Ok(CostGradient {
        cost,
        controls: grad_controls,
        gains: grad_gains,
    })
}

/// Exact gradient of `J ∘ simulate` with respect to the flattened controls.
pub fn grad_controls(
    model: &dyn NetworkModel,
    scheme: &Scheme,
    x0: &DVector<f64>,
    controls: &ControlSequence,
    actuation: &Actuation,
    spec: &CostSpec,
) -> Result<Vec<f64>> {
    cost_gradient(model, scheme, x0, controls, actuation, spec).map(|g| g.controls)
}

/// Cost of simulating `controls`.
pub fn evaluate_cost(
    model: &dyn NetworkModel,
    scheme: &Scheme,
    x0: &DVector<f64>,
    controls: &ControlSequence,
    actuation: &Actuation,
    spec: &CostSpec,
) -> Result<f64> {
    let traj = simulate(model, scheme, x0, controls, actuation)?;
    Ok(cost_j(&traj, spec))
}

/// Adjoint gradient next to a central-difference gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientReport {
    pub gradient: Vec<f64>,
    pub fd_gradient: Vec<f64>,
    /// `max |g − g_fd| / max(1, |g_fd|)`.
    pub max_rel_error: f64,
}

impl GradientReport {
    /// CSV `index,analytic,fd,rel_err`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "index,analytic,fd,rel_err")?;
        for (i, (a, f)) in self.gradient.iter().zip(&self.fd_gradient).enumerate() {
            writeln!(out, "{i},{a:.16e},{f:.16e},{:.16e}", rel_err(*a, *f))?;
        }
        Ok(())
    }
}

fn rel_err(analytic: f64, fd: f64) -> f64 {
    (analytic - fd).abs() / fd.abs().max(1.0)
}

pub fn check_gradient(
    model: &dyn NetworkModel,
    scheme: &Scheme,
    x0: &DVector<f64>,
    controls: &ControlSequence,
    actuation: &Actuation,
    spec: &CostSpec,
    fd_step: f64,
) -> Result<GradientReport> {
    if !(fd_step > 0.0) {
        return Err(Error::invalid("finite-difference step must be positive"));
    }
    let gradient = grad_controls(model, scheme, x0, controls, actuation, spec)?;
    let fd_gradient = (0..gradient.len())
        .into_par_iter()
        .map(|i| {
            let mut plus = controls.clone();
            plus.as_mut_slice()[i] += fd_step;
            let mut minus = controls.clone();
            minus.as_mut_slice()[i] -= fd_step;
            let jp = evaluate_cost(model, scheme, x0, &plus, actuation, spec)?;
            let jm = evaluate_cost(model, scheme, x0, &minus, actuation, spec)?;
            Ok((jp - jm) / (2.0 * fd_step))
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_rel_error = gradient
        .iter()
        .zip(&fd_gradient)
        .map(|(a, f)| rel_err(*a, *f))
        .fold(0.0, f64::max);
    Ok(GradientReport {
        gradient,
        fd_gradient,
        max_rel_error,
    })
}
