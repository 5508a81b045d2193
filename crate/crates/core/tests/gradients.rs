use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use netctl_core::models::{duffing_model, grg_graph, letter_patterns, memory_model, sample_duffing, MemoryParams, NetworkModel};
use netctl_core::objective::{check_gradient, CostSpec};
use netctl_core::sim::{Scheme, SchemeKind};
use netctl_core::{Actuation, ControlSequence};

fn models() -> Vec<Box<dyn NetworkModel>> {
    let graph = grg_graph(6, 2).unwrap();
    let duffing = duffing_model(sample_duffing(&graph, 3)).unwrap();
    let memory = memory_model(&MemoryParams::new(letter_patterns().to_vec(), 0.8).unwrap()).unwrap();
    vec![Box::new(duffing), Box::new(memory)]
}

#[test]
fn adjoint_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for model in models() {
        let dim = model.state_dim();
        let n = model.node_count();
        for kind in [SchemeKind::ForwardEuler, SchemeKind::Trapezoidal] {
            for _ in 0..4 {
                let scheme = Scheme::trapezoidal(1e-2).with_kind(kind);
                let horizon = rng.random_range(1..=6);
                let x0 = DVector::from_fn(dim, |_, _| rng.random_range(0.0..0.5));
                let target = DVector::from_fn(dim, |_, _| rng.random_range(0.0..0.5));
                let pi: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
                let data = (0..(horizon + 1) * n).map(|_| rng.random_range(-5.0..5.0)).collect();
                let controls = ControlSequence::from_flat(horizon, n, data).unwrap();
                let report = check_gradient(
                    model.as_ref(),
                    &scheme,
                    &x0,
                    &controls,
                    &Actuation::selection(&pi),
                    &CostSpec::tracking(target, horizon),
                    1e-5,
                )
                .unwrap();
                assert!(report.max_rel_error < 1e-5, "{kind:?}: {}", report.max_rel_error);
            }
        }
    }
}

#[test]
fn relaxed_gain_gradient_matches_finite_differences() {
    use netctl_core::objective::{cost_gradient, evaluate_cost};
    let model = &models()[0];
    let scheme = Scheme::trapezoidal(1e-2);
    let x0 = DVector::from_fn(12, |i, _| 0.04 * i as f64);
    let spec = CostSpec::tracking(DVector::from_element(12, 0.25), 4);
    let controls = ControlSequence::from_flat(4, 6, (0..30).map(|i| (i as f64).cos() * 3.0).collect()).unwrap();
    let alpha = [0.1, 0.9, 0.5, 0.3, 0.7, 0.2];
    let g = cost_gradient(model.as_ref(), &scheme, &x0, &controls, &Actuation::relaxed(&alpha), &spec).unwrap();
    for j in 0..6 {
        let step = 1e-6;
        let mut plus = alpha;
        plus[j] += step;
        let mut minus = alpha;
        minus[j] -= step;
        let jp = evaluate_cost(model.as_ref(), &scheme, &x0, &controls, &Actuation::relaxed(&plus), &spec).unwrap();
        let jm = evaluate_cost(model.as_ref(), &scheme, &x0, &controls, &Actuation::relaxed(&minus), &spec).unwrap();
        let fd = (jp - jm) / (2.0 * step);
        assert!((g.gains[j] - fd).abs() < 1e-6 * fd.abs().max(1.0), "{j}: {} vs {fd}", g.gains[j]);
    }
}
