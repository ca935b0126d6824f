use zsparse_core::operators::l2_norm;
use zsparse_core::solver::{taylor_green, FlowState, Solver, SolverConfig, ViscousTreatment};
use zsparse_core::Grid;

fn taylor_green_error(n: usize, dt: f64, viscous: ViscousTreatment) -> f64 {
    let g = Grid::periodic_2pi(n).unwrap();
    let nu = 0.1;
    let mut cfg = SolverConfig::new(g, nu, dt, 1.0);
    cfg.viscous = viscous;
    let mut solver = Solver::new(cfg).unwrap();
    let u0 = FlowState::from_velocity(0.0, &taylor_green(&g, 1.0), true).unwrap();
    let end = solver.advance_to(u0, 1.0).unwrap();
    let exact = taylor_green(&g, (-2.0 * nu).exp());
    let u = end.velocity().unwrap();
    let diff = zsparse_core::VectorField::new(
        g,
        std::array::from_fn(|j| u.component(j).iter().zip(exact.component(j)).map(|(a, b)| a - b).collect()),
    )
    .unwrap();
    l2_norm(&diff) / l2_norm(&exact)
}

#[test]
fn explicit_viscous_rk4_is_fourth_order() {
    let coarse = taylor_green_error(16, 0.2, ViscousTreatment::Explicit);
    let fine = taylor_green_error(16, 0.1, ViscousTreatment::Explicit);
    let ratio = coarse / fine;
    assert!((12.0..=20.0).contains(&ratio), "ratio {ratio} (errors {coarse:e}, {fine:e})");
}

#[test]
fn integrating_factor_is_exact_on_taylor_green() {
    assert!(taylor_green_error(16, 0.1, ViscousTreatment::IntegratingFactor) < 1e-12);
}

#[test]
fn kida_flow_converges_in_time() {
    // Self-convergence of the nonlinear integrator against a small-step reference.
    let g = Grid::periodic_2pi(16).unwrap();
    let run = |dt: f64| {
        let mut s = Solver::new(SolverConfig::new(g, 0.05, dt, 0.4)).unwrap();
        let u0 = s.initial_state().unwrap();
        s.advance_to(u0, 0.4).unwrap().velocity().unwrap()
    };
    let reference = run(0.0025);
    let err = |dt: f64| {
        let u = run(dt);
        let d = zsparse_core::VectorField::new(
            g,
            std::array::from_fn(|j| u.component(j).iter().zip(reference.component(j)).map(|(a, b)| a - b).collect()),
        )
        .unwrap();
        l2_norm(&d)
    };
    let ratio = err(0.04) / err(0.02);
    assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
}
