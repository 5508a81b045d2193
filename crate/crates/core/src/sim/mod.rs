//! Fixed-step discretizations of `ẋ = f(x) + B z`.
//!
//! * forward Euler: `x_{k+1} = x_k + h (f(x_k) + B z_k)`
//! * trapezoidal implicit: `x_k = x_{k−1} + h/2 (f(x_k) + f(x_{k−1}) + B (z_k + z_{k−1}))`,
//!   solved for `x_k` by Newton's method started from the forward Euler
//!   predictor.
//!
//! Inputs are held constant between grid points wherever a continuous-time
//! solution is needed (the RK4 reference).

mod simulate;
mod step;

pub use simulate::{reference_solve, simulate, steady_state, SteadyState, Trajectory, DEFAULT_STEADY_CAP, STEADY_TOL};
pub use step::{fe_step, ti_step};
pub(crate) use step::shifted_identity;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    ForwardEuler,
    Trapezoidal,
}

impl SchemeKind {
    pub fn short_name(self) -> &'static str {
        match self {
            SchemeKind::ForwardEuler => "fe",
            SchemeKind::Trapezoidal => "ti",
        }
    }
}

/// A discretization with its step size and Newton settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scheme {
    pub kind: SchemeKind,
    pub h: f64,
    /// Newton stops once `‖r‖_∞ < newton_tol` (trapezoidal only).
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl Scheme {
    pub const DEFAULT_NEWTON_TOL: f64 = 1e-10;
    pub const DEFAULT_NEWTON_MAX_ITER: usize = 50;

    pub fn forward_euler(h: f64) -> Self {
        Self {
            kind: SchemeKind::ForwardEuler,
            h,
            newton_tol: Self::DEFAULT_NEWTON_TOL,
            newton_max_iter: Self::DEFAULT_NEWTON_MAX_ITER,
        }
    }

    pub fn trapezoidal(h: f64) -> Self {
        Self {
            kind: SchemeKind::Trapezoidal,
            ..Self::forward_euler(h)
        }
    }

    pub fn with_kind(self, kind: SchemeKind) -> Self {
        Self { kind, ..self }
    }

    pub fn with_step(self, h: f64) -> Self {
        Self { h, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::invalid(format!("step size must be positive, got {}", self.h)));
        }
        if !(self.newton_tol > 0.0) {
            return Err(Error::invalid("newton_tol must be positive"));
        }
        if self.newton_max_iter == 0 {
            return Err(Error::invalid("newton_max_iter must be at least 1"));
        }
        Ok(())
    }
}
