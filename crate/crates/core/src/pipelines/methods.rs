use crate::controls::{Actuation, ControlSequence};
use crate::error::Result;
use crate::optim::{mino_search, round_selection, MinoResult, Selection};
use crate::sim::{simulate, Scheme, Trajectory};

use super::spec::{Experiment, ExperimentSpec};

/// Selection search started from the all-node solution.
///
/// 1. Solve the control problem with every node actuated, from zero controls.
/// 2. Run [`mino_search`] from that point.
/// 3. Re-solve the reduced problem for the returned selection, warm-started
///    from the search's controls.
pub fn algorithm1(exp: &Experiment) -> Result<MinoResult> {
    let problem = exp.problem();
    let settings = &exp.spec.solver;
    let n = exp.node_count();
    let horizon = exp.spec.horizon;

    let all = Selection::all(n);
    let initial = problem
        .solve(
            &Actuation::reduced(all.active_nodes()),
            &ControlSequence::zeros(horizon, n),
            &settings.polish(),
        )
        .map_err(|e| e.in_stage("initial solve"))?;
    log::info!("all-node solve: J = {:.6e}, e = {:.6e}", initial.objective, initial.error);

    let mut result = mino_search(&problem, &exp.spec.budget, &all, &initial.controls, &settings.mino())
        .map_err(|e| e.in_stage("selection search"))?;
    log::info!(
        "selection {} after {} rounds: J = {:.6e}",
        result.selection,
        result.poll_rounds,
        result.objective
    );

    let last = problem
        .solve(&result.actuation(), &result.controls, &settings.polish())
        .map_err(|e| e.in_stage("final solve"))?;
    result.evaluations += initial.nlp.evaluations + last.nlp.evaluations;
    if last.objective <= result.objective {
        result.controls = last.controls;
        result.objective = last.objective;
        result.error = last.error;
    }
    Ok(result)
}

/// Relaxed gains in `[0, 1]`, L1 rounding under the budget, then a control
/// solve for the rounded selection.
pub fn relax_round_pipeline(exp: &Experiment) -> Result<MinoResult> {
    let problem = exp.problem();
    let settings = &exp.spec.solver;
    let n = exp.node_count();
    let horizon = exp.spec.horizon;

    let relaxed = problem
        .solve_relaxed(&ControlSequence::zeros(horizon, n), &vec![0.5; n], &settings.relaxed())
        .map_err(|e| e.in_stage("relaxed solve"))?;
    log::info!(
        "relaxed solve: J = {:.6e}, projected gradient {:.2e}",
        relaxed.objective,
        relaxed.nlp.grad_norm
    );
    let selection = round_selection(&relaxed.alpha, &exp.spec.budget).map_err(|e| e.in_stage("rounding"))?;

    // The effective input of node j in the relaxed solution is α_j z_j.
    let nodes = selection.active_nodes();
    let mut init = relaxed.controls.restrict(&nodes);
    for k in 0..init.len() {
        for (c, &node) in init.row_mut(k).iter_mut().zip(&nodes) {
            *c *= relaxed.alpha[node];
        }
    }
    let solved = problem
        .solve(&Actuation::reduced(nodes), &init, &settings.polish())
        .map_err(|e| e.in_stage("final solve"))?;
    Ok(MinoResult {
        selection,
        controls: solved.controls,
        objective: solved.objective,
        error: solved.error,
        evaluations: relaxed.nlp.evaluations + solved.nlp.evaluations,
        poll_rounds: 0,
        trace: Vec::new(),
    })
}

/// `‖x_D − x_k‖₂` for `k = 0..=T` along the controlled trajectory.
pub fn error_vs_steps(result: &MinoResult, exp: &Experiment) -> Result<Vec<f64>> {
    let traj = exp.problem().simulate(&result.controls, &result.actuation())?;
    Ok(traj.states.iter().map(|x| (&exp.cost.target - x).norm()).collect())
}

/// Free response from the unsettled initial state, as used to inspect the
/// network before control.
pub fn uncontrolled_response(spec: &ExperimentSpec, scheme: &Scheme, steps: usize) -> Result<Trajectory> {
    spec.validate()?;
    let model = spec.build_model()?;
    let start = spec.initial_start()?;
    simulate(
        model.as_ref(),
        scheme,
        &start,
        &ControlSequence::zeros(steps, 0),
        &Actuation::reduced(Vec::new()),
    )
}
