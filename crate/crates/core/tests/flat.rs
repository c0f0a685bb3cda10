use eta_hessian::flatcase::{
    dirichlet_solve, hessian_growth, BuiltinFlatRhs, DomainGrid, DomainShape, FlatError,
};
use eta_hessian::solver::NewtonSettings;

fn ball(n: usize, h: f64) -> DomainGrid {
    DomainGrid::build(n, DomainShape::Ball { radius: 1.0 }, h).unwrap()
}

/// `φ(r) = -∫_r^1 √(e^{s²} - 1) ds` by composite Simpson.
fn radial_profile(r: f64) -> f64 {
    let m = 2000;
    let step = (1.0 - r) / m as f64;
    let g = |s: f64| (s * s).exp_m1().sqrt();
    let mut acc = g(r) + g(1.0);
    for i in 1..m {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(r + i as f64 * step);
    }
    -acc * step / 3.0
}

#[test]
fn gradient_dependent_data_matches_the_radial_solution() {
    // det D²φ = φ'φ''/r = e^{r²} = 1 + |∇φ|² for φ' = √(e^{r²} - 1)
    let f = BuiltinFlatRhs::GradQuadratic { c0: 1.0, c1: 1.0 };
    let mut errs = Vec::new();
    for h in [1.0 / 16.0, 1.0 / 32.0] {
        let grid = ball(2, h);
        let (state, rep) = dirichlet_solve(&grid, &f, 2, &NewtonSettings::default(), 4.0).unwrap();
        assert!(rep.maximum_principle_ok);
        let err = state
            .phi
            .iter()
            .zip(grid.points())
            .map(|(p, x)| (p - radial_profile(x[0].hypot(x[1]))).abs())
            .fold(0.0, f64::max);
        errs.push(err);
    }
    assert!(errs[1] < 2e-3, "{errs:?}");
    assert!((errs[0] / errs[1]).log2() > 1.5, "{errs:?}");
}

#[test]
fn quadratic_solutions_in_three_dimensions() {
    // D²φ = I gives η = (2, 2, 2): σ_2 = 12, σ_3 = 8
    for (k, value) in [(2, 12.0), (3, 8.0)] {
        let grid = ball(3, 0.125);
        let f = BuiltinFlatRhs::Constant { value };
        let (state, rep) = dirichlet_solve(&grid, &f, k, &NewtonSettings::default(), 4.0).unwrap();
        let err = state
            .phi
            .iter()
            .zip(grid.points())
            .map(|(p, x)| (p - 0.5 * (x.iter().map(|v| v * v).sum::<f64>() - 1.0)).abs())
            .fold(0.0, f64::max);
        assert!(err < 5e-3, "k = {k}: {err}");
        assert!(rep.max_residual <= 1e-9);
    }
}

#[test]
fn rectangle_solution_is_symmetric_and_negative() {
    let grid = DomainGrid::build(
        2,
        DomainShape::Rectangle {
            lo: vec![-1.0, -0.5],
            hi: vec![1.0, 0.5],
        },
        1.0 / 16.0,
    )
    .unwrap();
    let f = BuiltinFlatRhs::Constant { value: 1.0 };
    let (state, rep) = dirichlet_solve(&grid, &f, 2, &NewtonSettings::default(), 4.0).unwrap();
    assert!(rep.maximum_principle_ok && rep.max_phi < 0.0);
    let pts = grid.points();
    for (i, p) in pts.iter().enumerate() {
        let mirror = pts
            .iter()
            .position(|q| (q[0] + p[0]).abs() < 1e-12 && (q[1] - p[1]).abs() < 1e-12)
            .unwrap();
        assert!((state.phi[i] - state.phi[mirror]).abs() < 1e-9);
    }
    for node in &state.nodes {
        assert!(node.hess_eigen.iter().all(|e| *e > 0.0));
    }
}

#[test]
fn cube_solves_for_every_order() {
    let cube = DomainShape::Rectangle {
        lo: vec![-0.5; 3],
        hi: vec![0.5; 3],
    };
    let grid = DomainGrid::build(3, cube, 0.125).unwrap();
    for k in 1..=3 {
        let f = BuiltinFlatRhs::Constant { value: 2.0 };
        let (state, rep) = dirichlet_solve(&grid, &f, k, &NewtonSettings::default(), 4.0).unwrap();
        assert!(rep.maximum_principle_ok, "k = {k}");
        assert!(rep.max_residual <= 1e-9, "k = {k}");
        assert!(state
            .nodes
            .iter()
            .all(|n| n.eta.with_order(k).unwrap().check_cone().is_ok()));
    }
}

#[test]
fn interior_hessian_converges_and_boundary_hessian_stays_bounded() {
    // exact solution (|x|² - 1)/2 has D²φ = I
    let f = BuiltinFlatRhs::Constant { value: 1.0 };
    let mut interior = Vec::new();
    for h in [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0] {
        let grid = ball(2, h);
        let (state, rep) = dirichlet_solve(&grid, &f, 2, &NewtonSettings::default(), 4.0).unwrap();
        // the ghost-fluid rows carry an O(1) second-difference error next to the boundary
        assert!(rep.max_hessian < 1.5, "h = {h}: {}", rep.max_hessian);
        let err = state
            .nodes
            .iter()
            .enumerate()
            .filter(|(p, _)| grid.boundary_distance(*p) > 0.25)
            .flat_map(|(_, n)| {
                n.hess_eigen
                    .iter()
                    .map(|e| (e - 1.0).abs())
                    .collect::<Vec<_>>()
            })
            .fold(0.0, f64::max);
        interior.push(err);
    }
    assert!(
        interior[2] < 5e-3 && interior[2] < interior[0],
        "{interior:?}"
    );
}

#[test]
fn hessian_and_monitor_stay_bounded_under_refinement() {
    let f = BuiltinFlatRhs::GradQuadratic { c0: 1.0, c1: 0.5 };
    let mut states = Vec::new();
    let mut monitors = Vec::new();
    for h in [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0] {
        let grid = ball(2, h);
        let (state, rep) = dirichlet_solve(&grid, &f, 2, &NewtonSettings::default(), 4.0).unwrap();
        monitors.push(rep.pogorelov);
        states.push(state);
    }
    for w in states.windows(2) {
        let growth = hessian_growth(&w[0], &w[1]);
        assert!(growth < 1.25, "growth {growth}");
    }
    let spread = monitors.iter().cloned().fold(0.0, f64::max)
        / monitors.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 1.02, "{monitors:?}");
}

#[test]
fn order_above_dimension_is_rejected() {
    let grid = ball(2, 0.25);
    let f = BuiltinFlatRhs::Constant { value: 1.0 };
    assert!(matches!(
        dirichlet_solve(&grid, &f, 3, &NewtonSettings::default(), 4.0),
        Err(FlatError::Config(_))
    ));
}

#[test]
fn nonpositive_data_is_a_precondition_failure() {
    let grid = ball(2, 0.25);
    let f = BuiltinFlatRhs::Constant { value: -1.0 };
    assert!(matches!(
        dirichlet_solve(&grid, &f, 2, &NewtonSettings::default(), 4.0),
        Err(FlatError::Precondition(_))
    ));
}
