//! Experiment descriptions and their resolution into concrete arrays.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::models::{
    duffing_model, grg_graph, letter_pattern, letter_patterns, memory_model, phase_encoding, sample_duffing,
    MemoryParams, NetworkModel, DEFAULT_EPSILON, PATTERN_SIDE,
};
use crate::objective::CostSpec;
use crate::optim::{Budget, ControlProblem, MinoOptions, NlpOptions};
use crate::rng::{stream_rng, substream_seed, Stream};
use crate::sim::{steady_state, Scheme, DEFAULT_STEADY_CAP};

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    /// Duffing oscillators on a geometric random graph.
    Duffing { nodes: usize },
    /// Phase-oscillator memory storing the letters H, T and L.
    Memory { epsilon: f64 },
}

impl ModelSpec {
    pub fn node_count(&self) -> usize {
        match self {
            ModelSpec::Duffing { nodes } => *nodes,
            ModelSpec::Memory { .. } => PATTERN_SIDE * PATTERN_SIDE,
        }
    }

    pub fn node_dim(&self) -> usize {
        match self {
            ModelSpec::Duffing { .. } => 2,
            ModelSpec::Memory { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialPolicy {
    Explicit(Vec<f64>),
    /// Uniform random start, then run to steady state.
    SettledUniform { low: f64, high: f64 },
    /// Phase encoding of a letter plus Gaussian noise, then run to steady state.
    SettledPattern { letter: char, noise: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum DesiredPolicy {
    Explicit(Vec<f64>),
    Uniform { low: f64, high: f64 },
    Pattern(char),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Candidate scoring inside the selection search.
    pub inner_tol: f64,
    pub inner_iters: usize,
    /// Full solves: initial all-node solve, final solve, baselines.
    pub polish_tol: f64,
    pub polish_iters: usize,
    /// Joint controls/gains solve of the relaxed problem.
    pub relaxed_tol: f64,
    pub relaxed_iters: usize,
    pub max_poll_rounds: usize,
    pub min_improvement: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            inner_tol: 1e-6,
            inner_iters: 100,
            polish_tol: 1e-9,
            polish_iters: 2000,
            relaxed_tol: 1e-6,
            relaxed_iters: 5000,
            max_poll_rounds: 50,
            min_improvement: 1e-8,
        }
    }
}

impl SolverSettings {
    pub fn polish(&self) -> NlpOptions {
        NlpOptions::default().with_tolerance(self.polish_tol, self.polish_iters)
    }

    pub fn relaxed(&self) -> NlpOptions {
        NlpOptions::default().with_tolerance(self.relaxed_tol, self.relaxed_iters)
    }

    pub fn mino(&self) -> MinoOptions {
        MinoOptions {
            max_poll_rounds: self.max_poll_rounds,
            inner: NlpOptions::default().with_tolerance(self.inner_tol, self.inner_iters),
            polish: self.polish(),
            min_improvement: self.min_improvement,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let tolerances = [self.inner_tol, self.polish_tol, self.relaxed_tol];
        if tolerances.iter().any(|t| !(*t > 0.0)) || !(self.min_improvement >= 0.0) {
            return Err(Error::invalid("solver tolerances must be positive"));
        }
        if self.inner_iters == 0 || self.polish_iters == 0 || self.relaxed_iters == 0 {
            return Err(Error::invalid("solver iteration limits must be positive"));
        }
        Ok(())
    }
}

/// How the initial state is brought to rest before control starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SettleSettings {
    pub scheme: Scheme,
    pub max_steps: usize,
}

impl Default for SettleSettings {
    fn default() -> Self {
        Self {
            scheme: Scheme::trapezoidal(1e-2),
            max_steps: DEFAULT_STEADY_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub model: ModelSpec,
    /// Master seed; every random quantity uses its own substream.
    pub seed: u64,
    pub scheme: Scheme,
    pub horizon: usize,
    pub initial: InitialPolicy,
    pub desired: DesiredPolicy,
    pub budget: Budget,
    pub solver: SolverSettings,
    pub settle: SettleSettings,
    pub baseline_count: usize,
    pub exhaustive_cap: u128,
}

impl ExperimentSpec {
    /// Ten Duffing oscillators, trapezoidal steps of `1e-4`, four of ten nodes.
    pub fn duffing_n10() -> Self {
        Self {
            model: ModelSpec::Duffing { nodes: 10 },
            seed: 1,
            scheme: Scheme::trapezoidal(1e-4),
            horizon: 10,
            initial: InitialPolicy::SettledUniform { low: 0.0, high: 0.5 },
            desired: DesiredPolicy::Uniform { low: 0.0, high: 0.5 },
            budget: Budget::exactly(4),
            solver: SolverSettings::default(),
            settle: SettleSettings::default(),
            baseline_count: 500,
            exhaustive_cap: super::DEFAULT_EXHAUSTIVE_CAP,
        }
    }

    /// Sixty Duffing oscillators with at most thirty actuated nodes.
    pub fn duffing_n60() -> Self {
        Self {
            model: ModelSpec::Duffing { nodes: 60 },
            budget: Budget::at_most(30),
            ..Self::duffing_n10()
        }
    }

    /// Memory network driven from the H attractor towards T, ten of 25 nodes.
    pub fn memory_n25() -> Self {
        Self {
            model: ModelSpec::Memory {
                epsilon: DEFAULT_EPSILON,
            },
            seed: 1,
            scheme: Scheme::forward_euler(1e-2),
            horizon: 10,
            initial: InitialPolicy::SettledPattern { letter: 'H', noise: 1.0 },
            desired: DesiredPolicy::Pattern('T'),
            budget: Budget::exactly(10),
            solver: SolverSettings::default(),
            settle: SettleSettings {
                scheme: Scheme::forward_euler(1e-2),
                max_steps: DEFAULT_STEADY_CAP,
            },
            baseline_count: 1000,
            exhaustive_cap: super::DEFAULT_EXHAUSTIVE_CAP,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_budget(self, budget: Budget) -> Self {
        Self { budget, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        self.settle.scheme.validate()?;
        self.solver.validate()?;
        if self.horizon == 0 {
            return Err(Error::invalid("horizon must be at least one step"));
        }
        match self.model {
            ModelSpec::Duffing { nodes } if nodes < 2 => {
                return Err(Error::invalid("a Duffing network needs at least two nodes"));
            }
            ModelSpec::Memory { epsilon } if !epsilon.is_finite() => {
                return Err(Error::invalid("memory coupling must be finite"));
            }
            _ => {}
        }
        let dim = self.model.node_count() * self.model.node_dim();
        for (name, policy) in [("initial", explicit_len(&self.initial)), ("desired", desired_len(&self.desired))] {
            if let Some(len) = policy {
                if len != dim {
                    return Err(Error::invalid(format!("{name} state has {len} entries, expected {dim}")));
                }
            }
        }
        if let InitialPolicy::SettledUniform { low, high } = self.initial {
            check_interval(low, high)?;
        }
        if let DesiredPolicy::Uniform { low, high } = self.desired {
            check_interval(low, high)?;
        }
        if let InitialPolicy::SettledPattern { letter, noise } = self.initial {
            self.check_letter(letter)?;
            if !(noise >= 0.0 && noise.is_finite()) {
                return Err(Error::invalid("noise level must be finite and nonnegative"));
            }
        }
        if let DesiredPolicy::Pattern(letter) = self.desired {
            self.check_letter(letter)?;
        }
        self.budget.validate(self.model.node_count())?;
        Ok(())
    }

    fn check_letter(&self, letter: char) -> Result<()> {
        if !matches!(self.model, ModelSpec::Memory { .. }) {
            return Err(Error::invalid("letter patterns need the memory network"));
        }
        letter_pattern(letter)
            .map(|_| ())
            .ok_or_else(|| Error::invalid(format!("no stored pattern for letter `{letter}`")))
    }

    /// Builds the model and draws the initial and desired states.
    pub fn resolve(&self) -> Result<Experiment> {
        self.validate()?;
        let model = self.build_model()?;
        let start = self.initial_start()?;
        let (x0, settled) = match self.initial {
            InitialPolicy::Explicit(_) => (start, true),
            _ => {
                let s = steady_state(model.as_ref(), &self.settle.scheme, &start, self.settle.max_steps)?;
                (s.state, s.converged)
            }
        };
        let target = self.desired_state()?;
        let cost = CostSpec::tracking(target, self.horizon);
        Ok(Experiment {
            spec: self.clone(),
            model,
            x0,
            cost,
            settled,
        })
    }

    pub fn build_model(&self) -> Result<Box<dyn NetworkModel>> {
        match self.model {
            ModelSpec::Duffing { nodes } => {
                let graph = grg_graph(nodes, substream_seed(self.seed, Stream::Graph))?;
                let params = sample_duffing(&graph, substream_seed(self.seed, Stream::Params));
                Ok(Box::new(duffing_model(params)?))
            }
            ModelSpec::Memory { epsilon } => {
                let params = MemoryParams::new(letter_patterns().to_vec(), epsilon)?;
                Ok(Box::new(memory_model(&params)?))
            }
        }
    }

    /// Initial state before settling.
    pub fn initial_start(&self) -> Result<DVector<f64>> {
        let dim = self.model.node_count() * self.model.node_dim();
        Ok(match &self.initial {
            InitialPolicy::Explicit(v) => DVector::from_column_slice(v),
            InitialPolicy::SettledUniform { low, high } => {
                let mut rng = stream_rng(self.seed, Stream::Init);
                DVector::from_fn(dim, |_, _| uniform(&mut rng, *low, *high))
            }
            InitialPolicy::SettledPattern { letter, noise } => {
                let mut rng = stream_rng(self.seed, Stream::Noise);
                let base = phase_encoding(&letter_pattern(*letter).expect("validated letter"));
                DVector::from_fn(dim, |i, _| base[i] + noise * rng.sample::<f64, _>(StandardNormal))
            }
        })
    }

    pub fn desired_state(&self) -> Result<DVector<f64>> {
        let dim = self.model.node_count() * self.model.node_dim();
        Ok(match &self.desired {
            DesiredPolicy::Explicit(v) => DVector::from_column_slice(v),
            DesiredPolicy::Uniform { low, high } => {
                let mut rng = stream_rng(self.seed, Stream::Desired);
                DVector::from_fn(dim, |_, _| uniform(&mut rng, *low, *high))
            }
            DesiredPolicy::Pattern(letter) => phase_encoding(
                &letter_pattern(*letter).ok_or_else(|| Error::invalid(format!("unknown letter `{letter}`")))?,
            ),
        })
    }
}

fn uniform<R: Rng>(rng: &mut R, low: f64, high: f64) -> f64 {
    if low == high {
        low
    } else {
        rng.random_range(low..high)
    }
}

fn check_interval(low: f64, high: f64) -> Result<()> {
    if low.is_finite() && high.is_finite() && low <= high {
        Ok(())
    } else {
        Err(Error::invalid(format!("invalid interval [{low}, {high}]")))
    }
}

fn explicit_len(p: &InitialPolicy) -> Option<usize> {
    match p {
        InitialPolicy::Explicit(v) => Some(v.len()),
        _ => None,
    }
}

fn desired_len(p: &DesiredPolicy) -> Option<usize> {
    match p {
        DesiredPolicy::Explicit(v) => Some(v.len()),
        _ => None,
    }
}

/// A resolved experiment: concrete model, initial state and cost.
#[derive(Debug)]
pub struct Experiment {
    pub spec: ExperimentSpec,
    pub model: Box<dyn NetworkModel>,
    pub x0: DVector<f64>,
    pub cost: CostSpec,
    /// False when the steady-state search hit its step cap.
    pub settled: bool,
}

impl Experiment {
    pub fn problem(&self) -> ControlProblem<'_> {
        ControlProblem::new(self.model.as_ref(), &self.spec.scheme, &self.x0, &self.cost)
            .expect("validated during resolution")
    }

    pub fn node_count(&self) -> usize {
        self.model.node_count()
    }
}
