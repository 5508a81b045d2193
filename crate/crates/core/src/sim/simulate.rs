use std::io::{self, Write};

use nalgebra::DVector;

use super::step::{fe_advance, ti_advance, Workspace};
use super::{Scheme, SchemeKind};
use crate::controls::{Actuation, ControlSequence};
use crate::error::{Error, Result, StepError};
use crate::models::NetworkModel;

/// Per-step increment below which [`steady_state`] stops.
pub const STEADY_TOL: f64 = 1e-7;
pub const DEFAULT_STEADY_CAP: usize = 1_000_000;

/// States `x_0, …, x_T` on a uniform grid of spacing `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<DVector<f64>>,
    pub h: f64,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn final_state(&self) -> &DVector<f64> {
        self.states.last().expect("trajectory is never empty")
    }

    /// CSV with header `t,x_1,…,x_d`, one row per grid point, 17 significant
    /// digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let dim = self.states.first().map_or(0, |x| x.len());
        write!(out, "t")?;
        for i in 1..=dim {
            write!(out, ",x_{i}")?;
        }
        writeln!(out)?;
        for (k, x) in self.states.iter().enumerate() {
            write!(out, "{:.16e}", k as f64 * self.h)?;
            for v in x.iter() {
                write!(out, ",{v:.16e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// `max_k ‖x_k − y_k‖_∞ / max_k ‖y_k‖_∞` against a reference `other`.
    pub fn relative_sup_error(&self, reference: &Trajectory) -> f64 {
        let num = self
            .states
            .iter()
            .zip(&reference.states)
            .map(|(a, b)| (a - b).amax())
            .fold(0.0, f64::max);
        let den = reference.states.iter().map(|x| x.amax()).fold(0.0, f64::max);
        num / den.max(f64::MIN_POSITIVE)
    }
}

pub(crate) fn check_inputs(
    model: &dyn NetworkModel,
    x0: &DVector<f64>,
    controls: &ControlSequence,
    actuation: &Actuation,
) -> Result<()> {
    if x0.len() != model.state_dim() {
        return Err(Error::invalid(format!(
            "initial state has dimension {}, model expects {}",
            x0.len(),
            model.state_dim()
        )));
    }
    if controls.width() != actuation.width() {
        return Err(Error::invalid(format!(
            "controls have width {}, actuation expects {}",
            controls.width(),
            actuation.width()
        )));
    }
    if controls.is_empty() {
        return Err(Error::invalid("control sequence has no rows"));
    }
    actuation.check(model.node_count())
}

fn drive_of(model: &dyn NetworkModel, actuation: &Actuation, row: &[f64]) -> DVector<f64> {
    let mut d = DVector::zeros(model.state_dim());
    actuation.add_drive(model.node_dim(), row, 1.0, &mut d);
    d
}

/// Rolls the scheme forward over `controls.len() − 1` steps.
///
/// Reduced controls are handled by passing a reduced [`Actuation`]; the
/// input columns are scattered onto the driven nodes before each step.
pub fn simulate(
    model: &dyn NetworkModel,
    scheme: &Scheme,
    x0: &DVector<f64>,
    controls: &ControlSequence,
    actuation: &Actuation,
) -> Result<Trajectory> {
    scheme.validate()?;
    check_inputs(model, x0, controls, actuation)?;
    let horizon = controls.len().saturating_sub(1);
    let mut ws = Workspace::new(model.state_dim());
    let mut states = Vec::with_capacity(horizon + 1);
    states.push(x0.clone());
    let step_err = |k: usize| move |kind: StepError| Error::Step { step: k, kind };
    match scheme.kind {
        SchemeKind::ForwardEuler => {
            for k in 0..horizon {
                let drive = drive_of(model, actuation, controls.row(k));
                let next = fe_advance(model, &states[k], &drive, scheme.h, &mut ws).map_err(step_err(k + 1))?;
                states.push(next);
            }
        }
        SchemeKind::Trapezoidal => {
            let mut drive_prev = if horizon > 0 {
                drive_of(model, actuation, controls.row(0))
            } else {
                DVector::zeros(model.state_dim())
            };
            for k in 1..=horizon {
                let drive = drive_of(model, actuation, controls.row(k));
                let sum = &drive_prev + &drive;
                let next = ti_advance(model, &states[k - 1], &drive_prev, &sum, scheme, &mut ws)
                    .map_err(step_err(k))?;
                states.push(next);
                drive_prev = drive;
            }
        }
    }
    Ok(Trajectory { states, h: scheme.h })
}

/// Classic RK4 on step `h_fine` with inputs held over each grid interval,
/// sampled every `h_grid` for `controls.len() − 1` intervals.
pub fn reference_solve(
    model: &dyn NetworkModel,
    x0: &DVector<f64>,
    controls: &ControlSequence,
    actuation: &Actuation,
    h_grid: f64,
    h_fine: f64,
) -> Result<Trajectory> {
    check_inputs(model, x0, controls, actuation)?;
    if !(h_fine > 0.0 && h_grid > 0.0) {
        return Err(Error::invalid("step sizes must be positive"));
    }
    let ratio = h_grid / h_fine;
    let substeps = ratio.round();
    if substeps < 1.0 || (ratio - substeps).abs() > 1e-9 * ratio {
        return Err(Error::invalid(format!(
            "fine step {h_fine} does not divide grid spacing {h_grid}"
        )));
    }
    let substeps = substeps as usize;
    let dim = model.state_dim();
    let horizon = controls.len().saturating_sub(1);
    let mut states = Vec::with_capacity(horizon + 1);
    states.push(x0.clone());

    let mut k1 = DVector::zeros(dim);
    let mut k2 = DVector::zeros(dim);
    let mut k3 = DVector::zeros(dim);
    let mut k4 = DVector::zeros(dim);
    let h = h_fine;
    for k in 0..horizon {
        let drive = drive_of(model, actuation, controls.row(k));
        let mut x = states[k].clone();
        for _ in 0..substeps {
            model.drift_into(&x, &mut k1);
            k1 += &drive;
            model.drift_into(&(&x + &k1 * (0.5 * h)), &mut k2);
            k2 += &drive;
            model.drift_into(&(&x + &k2 * (0.5 * h)), &mut k3);
            k3 += &drive;
            model.drift_into(&(&x + &k3 * h), &mut k4);
            k4 += &drive;
            x += (&k1 + &k2 * 2.0 + &k3 * 2.0 + &k4) * (h / 6.0);
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::Step {
                step: k + 1,
                kind: StepError::NonFinite,
            });
        }
        states.push(x);
    }
    Ok(Trajectory { states, h: h_grid })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub state: DVector<f64>,
    pub converged: bool,
    pub steps: usize,
}

/// Runs the uncontrolled dynamics until one step moves the state by less than
/// [`STEADY_TOL`] in the sup norm, or `max_steps` steps have been taken.
pub fn steady_state(
    model: &dyn NetworkModel,
    scheme: &Scheme,
    x_start: &DVector<f64>,
    max_steps: usize,
) -> Result<SteadyState> {
    scheme.validate()?;
    if x_start.len() != model.state_dim() {
        return Err(Error::invalid("start state has wrong dimension"));
    }
    let dim = model.state_dim();
    let zero = DVector::zeros(dim);
    let mut ws = Workspace::new(dim);
    let mut x = x_start.clone();
    for k in 1..=max_steps {
        let next = match scheme.kind {
            SchemeKind::ForwardEuler => fe_advance(model, &x, &zero, scheme.h, &mut ws),
            SchemeKind::Trapezoidal => ti_advance(model, &x, &zero, &zero, scheme, &mut ws),
        }
        .map_err(|kind| Error::Step { step: k, kind })?;
        let moved = (&next - &x).amax();
        x = next;
        if moved < STEADY_TOL {
            return Ok(SteadyState {
                state: x,
                converged: true,
                steps: k,
            });
        }
    }
    log::warn!("steady state not reached within {max_steps} steps");
    Ok(SteadyState {
        state: x,
        converged: false,
        steps: max_steps,
    })
}
