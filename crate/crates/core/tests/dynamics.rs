use qrelent_core::dynamics::{
    exact_unitary_flow, integrate, mean_field_potential, random_model, Flow, IntegratorConfig,
};
use qrelent_core::entropy::relative_entropy;
use qrelent_core::fluctuation::{
    entropy_production_operator, fluctuation_operator, IndexPattern, MomentEngine,
};
use qrelent_core::linalg::{real, trace_of_product};
use qrelent_core::random::{random_density, seeded};
use qrelent_core::tensor::tensor_power;
use qrelent_core::{CMatrix, Hermitian, ManyBodySpace};

/// Swap on `ℂ^d ⊗ ℂ^d`.
fn swap(d: usize) -> CMatrix {
    CMatrix::from_fn(d * d, d * d, |r, c| {
        if r == (c % d) * d + c / d {
            real(1.0)
        } else {
            real(0.0)
        }
    })
}

#[test]
fn free_product_state_stays_product() {
    let model = random_model(2, 3, 1.0, true).unwrap();
    let free = model.with_interaction(Hermitian::zeros(4)).unwrap();
    let space = ManyBodySpace::new(2, 3).unwrap();
    let g = random_density(&mut seeded(1), 2, 0.2);
    let config = IntegratorConfig::new(1e-2).with_stride(10);
    let many = integrate(
        Flow::NBody(space),
        &tensor_power(g.matrix(), &space).unwrap(),
        &free,
        1.0,
        &config,
    )
    .unwrap();
    let one = integrate(Flow::Hartree, g.matrix(), &free, 1.0, &config).unwrap();
    for (a, b) in many.states.iter().zip(&one.states) {
        let s = relative_entropy(a, &tensor_power(b, &space).unwrap())
            .unwrap()
            .value;
        assert!(s.abs() < 1e-10, "{s}");
    }
}

#[test]
fn closed_free_flow_matches_exact_unitary() {
    let model = random_model(3, 8, 1.0, true).unwrap().closed();
    let free = model.with_interaction(Hermitian::zeros(9)).unwrap();
    let g = random_density(&mut seeded(2), 3, 0.0).into_matrix();
    let run = integrate(Flow::Hartree, &g, &free, 1.0, &IntegratorConfig::new(1e-3)).unwrap();
    let exact = exact_unitary_flow(free.h(), &g, 1.0).unwrap();
    assert!((run.final_state() - exact).norm() < 1e-11);
}

#[test]
fn mean_field_of_product_interaction() {
    // W = A ⊗ B gives V^γ = tr(γB)·A
    let mut rng = seeded(4);
    let a = random_density(&mut rng, 2, 0.0).into_matrix();
    let b = random_density(&mut rng, 2, 0.0).into_matrix();
    let g = random_density(&mut rng, 2, 0.0).into_matrix();
    let w = a.kronecker(&b);
    let v = mean_field_potential(&g, &w).unwrap();
    let expected = &a * trace_of_product(&g, &b);
    assert!((v.matrix() - expected).norm() < 1e-14);
}

#[test]
fn two_leg_moment_against_swap_oracle() {
    let model = random_model(2, 9, 1.0, true).unwrap();
    let g = random_density(&mut seeded(10), 2, 0.1);
    let space = ManyBodySpace::new(2, 2).unwrap();
    let engine = MomentEngine::new(&g, model.w(), &space).unwrap();
    let x = fluctuation_operator(&g, model.w()).unwrap().into_matrix();
    let s = swap(2);
    let x21 = &s * &x * &s;
    let reference = g.matrix().kronecker(g.matrix());
    let oracle = trace_of_product(&(&reference * &x), &x21);
    let pattern = IndexPattern::new(vec![(1, 2), (2, 1)]).unwrap();
    assert!((engine.moment(&pattern).unwrap() - oracle).norm() < 1e-13);
    let single = IndexPattern::new(vec![(1, 2)]).unwrap();
    assert!(engine.moment(&single).unwrap().norm() < 1e-13);
}

#[test]
fn production_operator_vanishes_without_interaction() {
    let g = random_density(&mut seeded(13), 2, 0.1);
    let space = ManyBodySpace::new(2, 3).unwrap();
    let a = entropy_production_operator(&g, &Hermitian::zeros(4), &space).unwrap();
    assert!(a.matrix().norm() < 1e-12);
}
