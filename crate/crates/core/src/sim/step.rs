use nalgebra::{DMatrix, DVector};

use super::{Scheme, SchemeKind};
use crate::controls::Actuation;
use crate::error::StepError;
use crate::models::NetworkModel;

/// Per-call scratch buffers.
pub(crate) struct Workspace {
    pub f: DVector<f64>,
    pub f_prev: DVector<f64>,
    pub jac: DMatrix<f64>,
    pub drive: DVector<f64>,
}

impl Workspace {
    pub fn new(dim: usize) -> Self {
        Self {
            f: DVector::zeros(dim),
            f_prev: DVector::zeros(dim),
            jac: DMatrix::zeros(dim, dim),
            drive: DVector::zeros(dim),
        }
    }
}

fn finite(x: &DVector<f64>) -> Result<(), StepError> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(StepError::NonFinite)
    }
}

/// `I + scale * m`.
pub(crate) fn shifted_identity(m: &DMatrix<f64>, scale: f64) -> DMatrix<f64> {
    let mut out = m * scale;
    for i in 0..out.nrows() {
        out[(i, i)] += 1.0;
    }
    out
}

/// `x + h (f(x) + drive)`.
pub(crate) fn fe_advance(
    model: &dyn NetworkModel,
    x: &DVector<f64>,
    drive: &DVector<f64>,
    h: f64,
    ws: &mut Workspace,
) -> Result<DVector<f64>, StepError> {
    model.drift_into(x, &mut ws.f);
    let mut next = x.clone();
    next.axpy(h, &ws.f, 1.0);
    next.axpy(h, drive, 1.0);
    finite(&next)?;
    Ok(next)
}

/// Solves `x − x_prev − h/2 (f(x) + f(x_prev) + drive_sum) = 0` by Newton,
/// starting from `x_prev + h (f(x_prev) + drive_prev)`.
pub(crate) fn ti_advance(
    model: &dyn NetworkModel,
    x_prev: &DVector<f64>,
    drive_prev: &DVector<f64>,
    drive_sum: &DVector<f64>,
    scheme: &Scheme,
    ws: &mut Workspace,
) -> Result<DVector<f64>, StepError> {
    let half = 0.5 * scheme.h;
    model.drift_into(x_prev, &mut ws.f_prev);

    let mut anchor = x_prev.clone();
    anchor.axpy(half, &ws.f_prev, 1.0);
    anchor.axpy(half, drive_sum, 1.0);

    let mut x = x_prev.clone();
    x.axpy(scheme.h, &ws.f_prev, 1.0);
    x.axpy(scheme.h, drive_prev, 1.0);
    finite(&x)?;

    let mut residual = f64::INFINITY;
    for iter in 0..=scheme.newton_max_iter {
        model.drift_into(&x, &mut ws.f);
        let mut r = &x - &anchor;
        r.axpy(-half, &ws.f, 1.0);
        residual = r.amax();
        if !residual.is_finite() {
            return Err(StepError::NonFinite);
        }
        if residual < scheme.newton_tol {
            return Ok(x);
        }
        if iter == scheme.newton_max_iter {
            break;
        }
        model.jacobian_into(&x, &mut ws.jac);
        let delta = shifted_identity(&ws.jac, -half).lu().solve(&r).ok_or(StepError::Singular)?;
        x -= delta;
        finite(&x)?;
    }
    Err(StepError::NewtonStalled { residual })
}

/// One forward Euler step `x_k + h (f(x_k) + B z_k)`.
pub fn fe_step(
    model: &dyn NetworkModel,
    x: &DVector<f64>,
    z: &[f64],
    actuation: &Actuation,
    h: f64,
) -> Result<DVector<f64>, StepError> {
    let mut ws = Workspace::new(model.state_dim());
    actuation.add_drive(model.node_dim(), z, 1.0, &mut ws.drive);
    let drive = ws.drive.clone();
    fe_advance(model, x, &drive, h, &mut ws)
}

/// One trapezoidal implicit step from `x_prev` with inputs `z_prev`, `z`.
pub fn ti_step(
    model: &dyn NetworkModel,
    x_prev: &DVector<f64>,
    z_prev: &[f64],
    z: &[f64],
    actuation: &Actuation,
    scheme: &Scheme,
) -> Result<DVector<f64>, StepError> {
    debug_assert_eq!(scheme.kind, SchemeKind::Trapezoidal);
    let dim = model.state_dim();
    let mut ws = Workspace::new(dim);
    let mut drive_prev = DVector::zeros(dim);
    actuation.add_drive(model.node_dim(), z_prev, 1.0, &mut drive_prev);
    let mut drive_sum = drive_prev.clone();
    actuation.add_drive(model.node_dim(), z, 1.0, &mut drive_sum);
    ti_advance(model, x_prev, &drive_prev, &drive_sum, scheme, &mut ws)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::LinearNetwork;

    fn scalar(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    #[test]
    fn fe_identity_without_drift_or_input() {
        let m = LinearNetwork::zero(3, 2);
        let x = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let act = Actuation::selection(&[true; 3]);
        assert_eq!(fe_step(&m, &x, &[0.0; 3], &act, 0.3).unwrap(), x);
    }

    #[test]
    fn fe_linear_decay() {
        let m = LinearNetwork::scalar(-1.0);
        let act = Actuation::selection(&[true]);
        let next = fe_step(&m, &scalar(1.0), &[0.0], &act, 0.1).unwrap();
        assert!((next[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn fe_pure_actuation() {
        let m = LinearNetwork::zero(1, 1);
        let act = Actuation::selection(&[true]);
        let next = fe_step(&m, &scalar(0.0), &[2.0], &act, 0.5).unwrap();
        assert_eq!(next[0], 1.0);
    }

    #[test]
    fn fe_reports_overflow() {
        let m = LinearNetwork::scalar(1.0);
        let act = Actuation::selection(&[true]);
        let err = fe_step(&m, &scalar(f64::MAX), &[0.0], &act, 1.0).unwrap_err();
        assert_eq!(err, StepError::NonFinite);
    }

    #[test]
    fn ti_identity_without_drift_or_input() {
        let m = LinearNetwork::zero(2, 1);
        let act = Actuation::selection(&[true, true]);
        let x = DVector::from_vec(vec![0.3, -0.7]);
        let next = ti_step(&m, &x, &[0.0; 2], &[0.0; 2], &act, &Scheme::trapezoidal(0.1)).unwrap();
        assert_eq!(next, x);
    }

    #[test]
    fn ti_linear_closed_form() {
        let m = LinearNetwork::scalar(-1.0);
        let act = Actuation::selection(&[true]);
        let next = ti_step(&m, &scalar(1.0), &[0.0], &[0.0], &act, &Scheme::trapezoidal(0.1)).unwrap();
        assert!((next[0] - 0.95 / 1.05).abs() < 1e-12);
    }

    #[test]
    fn ti_is_stable_on_stiff_decay_where_fe_is_not() {
        let m = LinearNetwork::scalar(-1000.0);
        let act = Actuation::selection(&[true]);
        let ti = ti_step(&m, &scalar(1.0), &[0.0], &[0.0], &act, &Scheme::trapezoidal(0.01)).unwrap();
        assert!((ti[0] + 2.0 / 3.0).abs() < 1e-12);
        let fe = fe_step(&m, &scalar(1.0), &[0.0], &act, 0.01).unwrap();
        assert!((fe[0] + 9.0).abs() < 1e-12);
    }

    #[test]
    fn ti_reports_stalled_newton() {
        let m = crate::models::MemoryNetwork::from_coupling(nalgebra::DMatrix::from_element(2, 2, 5.0), 0.8).unwrap();
        let act = Actuation::selection(&[true, true]);
        let scheme = Scheme {
            newton_max_iter: 1,
            newton_tol: 1e-300,
            ..Scheme::trapezoidal(0.5)
        };
        let err = ti_step(&m, &DVector::from_vec(vec![0.0, 1.0]), &[0.0; 2], &[0.0; 2], &act, &scheme).unwrap_err();
        assert!(matches!(err, StepError::NewtonStalled { .. }));
    }

    #[test]
    fn ti_reports_singular_newton_matrix() {
        // I − (h/2) A is singular for A = 2/h.
        let m = LinearNetwork::scalar(20.0);
        let act = Actuation::selection(&[true]);
        let err = ti_step(&m, &scalar(1.0), &[0.0], &[0.0], &act, &Scheme::trapezoidal(0.1)).unwrap_err();
        assert_eq!(err, StepError::Singular);
    }
}
