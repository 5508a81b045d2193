//! Joint control node selection and open-loop control design for nonlinear
//! network dynamics.
//!
//! The crate is organised bottom-up:
//!
//! * [`models`] – the network dynamics abstraction and the two benchmark
//!   networks (Duffing oscillators on a geometric random graph, and an
//!   oscillator associative memory trained with Hebb's rule).
//! * [`sim`] – forward Euler and trapezoidal implicit discretizations, an RK4
//!   reference integrator and a steady-state finder.
//! * [`objective`] – the tracking cost, the final control error and exact
//!   discrete adjoint gradients.
//! * [`optim`] – limited-memory quasi-Newton solvers, exact rounding and the
//!   mixed-variable selection search.
//! * [`pipelines`] – the selection algorithm, the relax-and-round comparison
//!   method and exhaustive/random baselines.

pub mod controls;
pub mod error;
pub mod models;
pub mod objective;
pub mod optim;
pub mod pipelines;
pub mod rng;
pub mod sim;

pub use controls::{Actuation, ControlSequence};
pub use error::{Error, Result, StepError};
pub use models::NetworkModel;
