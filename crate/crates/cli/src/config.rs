//! Flat `key = value` experiment configuration.
//!
//! Keys are dotted (`scheme.h`, `budget.mode`), `#` starts a comment, and a
//! `preset` line (anywhere in the file) selects the defaults the remaining
//! keys override. Every key is listed in `docs/formats.md`.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use netctl_core::optim::{Budget, BudgetMode};
use netctl_core::pipelines::{DesiredPolicy, ExperimentSpec, InitialPolicy, ModelSpec};
use netctl_core::sim::{Scheme, SchemeKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }

    fn general(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    DuffingN10,
    DuffingN60,
    MemoryN25,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::DuffingN10 => "duffing-n10",
            Preset::DuffingN60 => "duffing-n60",
            Preset::MemoryN25 => "memory-n25",
        }
    }

    fn spec(self) -> ExperimentSpec {
        match self {
            Preset::DuffingN10 => ExperimentSpec::duffing_n10(),
            Preset::DuffingN60 => ExperimentSpec::duffing_n60(),
            Preset::MemoryN25 => ExperimentSpec::memory_n25(),
        }
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "duffing-n10" => Ok(Preset::DuffingN10),
            "duffing-n60" => Ok(Preset::DuffingN60),
            "memory-n25" => Ok(Preset::MemoryN25),
            other => Err(format!("unknown preset `{other}`")),
        }
    }
}

/// Free-response settings of the `simulate` subcommand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulateSettings {
    pub scheme: Scheme,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub preset: Preset,
    pub spec: ExperimentSpec,
    pub simulate: SimulateSettings,
    pub fd_step: f64,
    pub bins: usize,
}

impl RunSettings {
    pub fn from_preset(preset: Preset) -> Self {
        let spec = preset.spec();
        let simulate = SimulateSettings {
            scheme: spec.settle.scheme,
            steps: 1500,
        };
        Self {
            preset,
            spec,
            simulate,
            fd_step: 1e-6,
            bins: 30,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.spec.validate().map_err(|e| ConfigError::general(e.to_string()))?;
        self.simulate
            .scheme
            .validate()
            .map_err(|e| ConfigError::general(format!("simulate: {e}")))?;
        if !(self.fd_step > 0.0 && self.fd_step.is_finite()) {
            return Err(ConfigError::general("gradcheck.fd_step must be positive"));
        }
        if self.bins == 0 {
            return Err(ConfigError::general("figure.bins must be at least 1"));
        }
        Ok(())
    }
}

pub fn load_config(path: &Path) -> Result<RunSettings, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::general(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError::at(line, format!("invalid value `{value}` for `{key}`")))
}

fn parse_list(line: usize, key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value.split(',').map(|v| parse_value(line, key, v.trim())).collect()
}

fn parse_kind(line: usize, key: &str, value: &str) -> Result<SchemeKind, ConfigError> {
    match value {
        "fe" => Ok(SchemeKind::ForwardEuler),
        "ti" => Ok(SchemeKind::Trapezoidal),
        _ => Err(ConfigError::at(line, format!("`{key}` must be `fe` or `ti`, got `{value}`"))),
    }
}

fn parse_letter(line: usize, key: &str, value: &str) -> Result<char, ConfigError> {
    let mut chars = value.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(ConfigError::at(line, format!("`{key}` must be a single letter"))),
    }
}

/// Numeric fields of the initial/desired policies, collected before the
/// policy itself is known.
#[derive(Default)]
struct PolicyParts {
    policy: Option<(usize, String)>,
    low: Option<f64>,
    high: Option<f64>,
    letter: Option<char>,
    noise: Option<f64>,
    values: Option<Vec<f64>>,
}

pub fn parse_config(text: &str) -> Result<RunSettings, ConfigError> {
    let mut entries: Vec<(usize, String, String)> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line, "expected `key = value`"))?;
        let (key, value) = (key.trim().to_string(), value.trim().to_string());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::at(line, "empty key or value"));
        }
        if let Some(first) = seen.insert(key.clone(), line) {
            return Err(ConfigError::at(line, format!("`{key}` already set on line {first}")));
        }
        entries.push((line, key, value));
    }

    let preset = match entries.iter().find(|(_, k, _)| k == "preset") {
        Some((line, _, v)) => v.parse().map_err(|e: String| ConfigError::at(*line, e))?,
        None => Preset::DuffingN10,
    };
    let mut s = RunSettings::from_preset(preset);
    let mut initial = PolicyParts::default();
    let mut desired = PolicyParts::default();
    let mut budget_mode: Option<BudgetMode> = None;
    let mut budget_max: Option<usize> = None;
    let mut model_kind: Option<(usize, String)> = None;
    let mut nodes: Option<usize> = None;
    let mut epsilon: Option<f64> = None;

    for (line, key, value) in &entries {
        let (line, k, v) = (*line, key.as_str(), value.as_str());
        match k {
            "preset" => {}
            "seed" => s.spec.seed = parse_value(line, k, v)?,
            "model.kind" => model_kind = Some((line, v.to_string())),
            "model.nodes" => nodes = Some(parse_value(line, k, v)?),
            "model.epsilon" => epsilon = Some(parse_value(line, k, v)?),
            "scheme.kind" => s.spec.scheme.kind = parse_kind(line, k, v)?,
            "scheme.h" => s.spec.scheme.h = parse_value(line, k, v)?,
            "scheme.newton_tol" => s.spec.scheme.newton_tol = parse_value(line, k, v)?,
            "scheme.newton_max_iter" => s.spec.scheme.newton_max_iter = parse_value(line, k, v)?,
            "horizon" => s.spec.horizon = parse_value(line, k, v)?,
            "initial.policy" => initial.policy = Some((line, v.to_string())),
            "initial.low" => initial.low = Some(parse_value(line, k, v)?),
            "initial.high" => initial.high = Some(parse_value(line, k, v)?),
            "initial.letter" => initial.letter = Some(parse_letter(line, k, v)?),
            "initial.noise" => initial.noise = Some(parse_value(line, k, v)?),
            "initial.values" => initial.values = Some(parse_list(line, k, v)?),
            "desired.policy" => desired.policy = Some((line, v.to_string())),
            "desired.low" => desired.low = Some(parse_value(line, k, v)?),
            "desired.high" => desired.high = Some(parse_value(line, k, v)?),
            "desired.letter" => desired.letter = Some(parse_letter(line, k, v)?),
            "desired.values" => desired.values = Some(parse_list(line, k, v)?),
            "budget.max" => budget_max = Some(parse_value(line, k, v)?),
            "budget.mode" => {
                budget_mode = Some(v.parse().map_err(|_| {
                    ConfigError::at(line, format!("`budget.mode` must be `exactly` or `at_most`, got `{v}`"))
                })?)
            }
            "solver.inner_tol" => s.spec.solver.inner_tol = parse_value(line, k, v)?,
            "solver.inner_iters" => s.spec.solver.inner_iters = parse_value(line, k, v)?,
            "solver.polish_tol" => s.spec.solver.polish_tol = parse_value(line, k, v)?,
            "solver.polish_iters" => s.spec.solver.polish_iters = parse_value(line, k, v)?,
            "solver.relaxed_tol" => s.spec.solver.relaxed_tol = parse_value(line, k, v)?,
            "solver.relaxed_iters" => s.spec.solver.relaxed_iters = parse_value(line, k, v)?,
            "solver.max_poll_rounds" => s.spec.solver.max_poll_rounds = parse_value(line, k, v)?,
            "solver.min_improvement" => s.spec.solver.min_improvement = parse_value(line, k, v)?,
            "settle.kind" => s.spec.settle.scheme.kind = parse_kind(line, k, v)?,
            "settle.h" => s.spec.settle.scheme.h = parse_value(line, k, v)?,
            "settle.max_steps" => s.spec.settle.max_steps = parse_value(line, k, v)?,
            "baseline.count" => s.spec.baseline_count = parse_value(line, k, v)?,
            "baseline.exhaustive_cap" => s.spec.exhaustive_cap = parse_value(line, k, v)?,
            "simulate.kind" => s.simulate.scheme.kind = parse_kind(line, k, v)?,
            "simulate.h" => s.simulate.scheme.h = parse_value(line, k, v)?,
            "simulate.steps" => s.simulate.steps = parse_value(line, k, v)?,
            "gradcheck.fd_step" => s.fd_step = parse_value(line, k, v)?,
            "figure.bins" => s.bins = parse_value(line, k, v)?,
            _ => return Err(ConfigError::at(line, format!("unknown key `{k}`"))),
        }
    }

    if let Some((line, kind)) = model_kind {
        s.spec.model = match kind.as_str() {
            "duffing" => ModelSpec::Duffing {
                nodes: s.spec.model.node_count(),
            },
            "memory" => ModelSpec::Memory { epsilon: 0.8 },
            other => return Err(ConfigError::at(line, format!("unknown model kind `{other}`"))),
        };
    }
    match &mut s.spec.model {
        ModelSpec::Duffing { nodes: n } => {
            if let Some(v) = nodes {
                *n = v;
            }
            if epsilon.is_some() {
                return Err(ConfigError::general("`model.epsilon` applies to the memory model only"));
            }
        }
        ModelSpec::Memory { epsilon: e } => {
            if let Some(v) = epsilon {
                *e = v;
            }
            if nodes.is_some_and(|v| v != 25) {
                return Err(ConfigError::general("the memory model has exactly 25 nodes"));
            }
        }
    }
    s.spec.initial = initial_policy(initial, s.spec.initial.clone())?;
    s.spec.desired = desired_policy(desired, s.spec.desired.clone())?;
    s.spec.budget = Budget {
        max: budget_max.unwrap_or(s.spec.budget.max),
        mode: budget_mode.unwrap_or(s.spec.budget.mode),
    };
    s.validate()?;
    Ok(s)
}

fn initial_policy(parts: PolicyParts, current: InitialPolicy) -> Result<InitialPolicy, ConfigError> {
    let kind = match &parts.policy {
        Some((line, p)) => match p.as_str() {
            "settled_uniform" | "settled_pattern" | "explicit" => p.clone(),
            other => return Err(ConfigError::at(*line, format!("unknown initial policy `{other}`"))),
        },
        None => match current {
            InitialPolicy::Explicit(_) => "explicit".into(),
            InitialPolicy::SettledUniform { .. } => "settled_uniform".into(),
            InitialPolicy::SettledPattern { .. } => "settled_pattern".into(),
        },
    };
    Ok(match kind.as_str() {
        "explicit" => InitialPolicy::Explicit(
            parts
                .values
                .ok_or_else(|| ConfigError::general("explicit initial policy needs `initial.values`"))?,
        ),
        "settled_uniform" => {
            let (low, high) = match current {
                InitialPolicy::SettledUniform { low, high } => (low, high),
                _ => (0.0, 0.5),
            };
            InitialPolicy::SettledUniform {
                low: parts.low.unwrap_or(low),
                high: parts.high.unwrap_or(high),
            }
        }
        _ => {
            let (letter, noise) = match current {
                InitialPolicy::SettledPattern { letter, noise } => (letter, noise),
                _ => ('H', 1.0),
            };
            InitialPolicy::SettledPattern {
                letter: parts.letter.unwrap_or(letter),
                noise: parts.noise.unwrap_or(noise),
            }
        }
    })
}

fn desired_policy(parts: PolicyParts, current: DesiredPolicy) -> Result<DesiredPolicy, ConfigError> {
    let kind = match &parts.policy {
        Some((line, p)) => match p.as_str() {
            "uniform" | "pattern" | "explicit" => p.clone(),
            other => return Err(ConfigError::at(*line, format!("unknown desired policy `{other}`"))),
        },
        None => match current {
            DesiredPolicy::Explicit(_) => "explicit".into(),
            DesiredPolicy::Uniform { .. } => "uniform".into(),
            DesiredPolicy::Pattern(_) => "pattern".into(),
        },
    };
    Ok(match kind.as_str() {
        "explicit" => DesiredPolicy::Explicit(
            parts
                .values
                .ok_or_else(|| ConfigError::general("explicit desired policy needs `desired.values`"))?,
        ),
        "uniform" => {
            let (low, high) = match current {
                DesiredPolicy::Uniform { low, high } => (low, high),
                _ => (0.0, 0.5),
            };
            DesiredPolicy::Uniform {
                low: parts.low.unwrap_or(low),
                high: parts.high.unwrap_or(high),
            }
        }
        _ => {
            let letter = match current {
                DesiredPolicy::Pattern(c) => c,
                _ => 'T',
            };
            DesiredPolicy::Pattern(parts.letter.unwrap_or(letter))
        }
    })
}

fn kind_name(kind: SchemeKind) -> &'static str {
    kind.short_name()
}

fn list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",")
}

impl fmt::Display for RunSettings {
    /// Canonical form with every key spelled out; parsing it yields `self`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let spec = &self.spec;
        let mut out = String::new();
        let w = &mut out;
        writeln!(w, "preset = {}", self.preset.name())?;
        writeln!(w, "seed = {}", spec.seed)?;
        match spec.model {
            ModelSpec::Duffing { nodes } => {
                writeln!(w, "model.kind = duffing")?;
                writeln!(w, "model.nodes = {nodes}")?;
            }
            ModelSpec::Memory { epsilon } => {
                writeln!(w, "model.kind = memory")?;
                writeln!(w, "model.epsilon = {epsilon:?}")?;
            }
        }
        writeln!(w, "scheme.kind = {}", kind_name(spec.scheme.kind))?;
        writeln!(w, "scheme.h = {:?}", spec.scheme.h)?;
        writeln!(w, "scheme.newton_tol = {:?}", spec.scheme.newton_tol)?;
        writeln!(w, "scheme.newton_max_iter = {}", spec.scheme.newton_max_iter)?;
        writeln!(w, "horizon = {}", spec.horizon)?;
        match &spec.initial {
            InitialPolicy::Explicit(v) => {
                writeln!(w, "initial.policy = explicit")?;
                writeln!(w, "initial.values = {}", list(v))?;
            }
            InitialPolicy::SettledUniform { low, high } => {
                writeln!(w, "initial.policy = settled_uniform")?;
                writeln!(w, "initial.low = {low:?}")?;
                writeln!(w, "initial.high = {high:?}")?;
            }
            InitialPolicy::SettledPattern { letter, noise } => {
                writeln!(w, "initial.policy = settled_pattern")?;
                writeln!(w, "initial.letter = {letter}")?;
                writeln!(w, "initial.noise = {noise:?}")?;
            }
        }
        match &spec.desired {
            DesiredPolicy::Explicit(v) => {
                writeln!(w, "desired.policy = explicit")?;
                writeln!(w, "desired.values = {}", list(v))?;
            }
            DesiredPolicy::Uniform { low, high } => {
                writeln!(w, "desired.policy = uniform")?;
                writeln!(w, "desired.low = {low:?}")?;
                writeln!(w, "desired.high = {high:?}")?;
            }
            DesiredPolicy::Pattern(letter) => {
                writeln!(w, "desired.policy = pattern")?;
                writeln!(w, "desired.letter = {letter}")?;
            }
        }
        writeln!(w, "budget.max = {}", spec.budget.max)?;
        writeln!(w, "budget.mode = {}", spec.budget.mode.name())?;
        let sv = &spec.solver;
        writeln!(w, "solver.inner_tol = {:?}", sv.inner_tol)?;
        writeln!(w, "solver.inner_iters = {}", sv.inner_iters)?;
        writeln!(w, "solver.polish_tol = {:?}", sv.polish_tol)?;
        writeln!(w, "solver.polish_iters = {}", sv.polish_iters)?;
        writeln!(w, "solver.relaxed_tol = {:?}", sv.relaxed_tol)?;
        writeln!(w, "solver.relaxed_iters = {}", sv.relaxed_iters)?;
        writeln!(w, "solver.max_poll_rounds = {}", sv.max_poll_rounds)?;
        writeln!(w, "solver.min_improvement = {:?}", sv.min_improvement)?;
        writeln!(w, "settle.kind = {}", kind_name(spec.settle.scheme.kind))?;
        writeln!(w, "settle.h = {:?}", spec.settle.scheme.h)?;
        writeln!(w, "settle.max_steps = {}", spec.settle.max_steps)?;
        writeln!(w, "baseline.count = {}", spec.baseline_count)?;
        writeln!(w, "baseline.exhaustive_cap = {}", spec.exhaustive_cap)?;
        writeln!(w, "simulate.kind = {}", kind_name(self.simulate.scheme.kind))?;
        writeln!(w, "simulate.h = {:?}", self.simulate.scheme.h)?;
        writeln!(w, "simulate.steps = {}", self.simulate.steps)?;
        writeln!(w, "gradcheck.fd_step = {:?}", self.fd_step)?;
        writeln!(w, "figure.bins = {}", self.bins)?;
        f.write_str(&out)
    }
}
