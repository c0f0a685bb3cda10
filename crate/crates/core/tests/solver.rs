use std::sync::Arc;

use eta_hessian::geometry::{surface_jet, RadialField, Resolution, SphereGrid};
use eta_hessian::solver::{
    continue_to_target, homotopy_f, newton_solve, validate_conditions, BuiltinRhs, CurvedProblem,
    EquationForm, HomotopyRun, JacobianMode, NewtonSettings, PrescribedData,
};
use eta_hessian::symm::SpectrumVector;
use proptest::prelude::*;

fn aniso(delta: f64) -> PrescribedData {
    let f = BuiltinRhs::AnisoPower {
        c: 1.25,
        p: 3.0,
        delta,
        axis: None,
    };
    PrescribedData::new(Arc::new(f), 0.5, 2.0).unwrap()
}

fn full(n_lon: usize, n_lat: usize) -> SphereGrid {
    SphereGrid::build(2, Resolution::Full2d { n_lon, n_lat }).unwrap()
}

fn check_trace(grid: &SphereGrid, data: &PrescribedData, run: &HomotopyRun) {
    let h = grid.spacing();
    assert_eq!(run.trace[0].t, 0.0);
    assert_eq!(run.trace.last().unwrap().t, 1.0);
    for w in run.trace.windows(2) {
        assert!(w[1].t > w[0].t);
    }
    for rec in &run.trace {
        let r = &rec.report;
        assert!(
            r.identity_defect <= 1e-6,
            "t = {}: defect {}",
            rec.t,
            r.identity_defect
        );
        assert!(
            r.rho_min >= data.r1 - 2.0 * h && r.rho_max <= data.r2 + 2.0 * h,
            "t = {}",
            rec.t
        );
        assert!(rec.max_residual <= run.newton.tol, "t = {}", rec.t);
    }
}

#[test]
fn anisotropic_trace_respects_invariants() {
    let grid = full(32, 16);
    let data = aniso(0.2);
    assert!(validate_conditions(&data, 2, 2, 128, 3).passed);
    let (_, run) = continue_to_target(&grid, &data, HomotopyRun::default(), 2).unwrap();
    check_trace(&grid, &data, &run);
}

#[test]
fn tabulated_trace_respects_invariants() {
    // decreasing faster than 1/r^2 keeps ρ² f decreasing
    let radii: Vec<f64> = (0..=30).map(|i| 0.5 + 0.05 * i as f64).collect();
    let values: Vec<f64> = radii.iter().map(|r| 1.1 / r.powf(2.5)).collect();
    // root of r^2 L(r) = 1 for the piecewise-linear interpolant L, by bisection
    let lerp = |r: f64| {
        let i = ((r - 0.5) / 0.05).floor() as usize;
        let s = (r - radii[i]) / 0.05;
        (1.0 - s) * values[i] + s * values[i + 1]
    };
    let (mut lo, mut hi) = (1.0, 1.5);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid * mid * lerp(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let data =
        PrescribedData::new(Arc::new(BuiltinRhs::Tabulated { radii, values }), 0.6, 1.9).unwrap();
    assert!(validate_conditions(&data, 2, 2, 128, 4).passed);
    let grid = full(16, 8);
    let (rho, run) = continue_to_target(&grid, &data, HomotopyRun::default(), 2).unwrap();
    check_trace(&grid, &data, &run);
    assert!(
        rho.values().iter().all(|v| (v - lo).abs() < 1e-8),
        "{} vs {lo}",
        rho.min()
    );
}

#[test]
fn steps_stay_in_the_cone_and_decrease_the_residual() {
    let grid = full(32, 16);
    let data = aniso(0.25);
    let settings = NewtonSettings::default();
    let mut rho = RadialField::constant(&grid, 1.0).unwrap();
    for t in [0.25, 0.5, 0.75, 1.0] {
        let blended = homotopy_f(&data, 2, 2, 0.01, t).unwrap();
        let (next, report) = newton_solve(&grid, &rho, &blended, 2, &settings).unwrap();
        for w in report.residual_history.windows(2) {
            assert!(w[1] < w[0], "t = {t}: {:?}", report.residual_history);
        }
        let jet = surface_jet(&grid, &next).unwrap();
        for g in jet.nodes() {
            assert!(g.eta.with_order(2).unwrap().check_cone().is_ok());
            assert!(g.support > 0.0);
        }
        rho = next;
    }
}

#[test]
fn raw_and_root_forms_share_the_solution() {
    let grid = full(16, 8);
    let data = aniso(0.2);
    let solve = |form| {
        let mut run = HomotopyRun::default();
        run.newton.form = form;
        continue_to_target(&grid, &data, run, 2).unwrap().0
    };
    let a = solve(EquationForm::Raw);
    let b = solve(EquationForm::Root);
    let diff = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(diff < 1e-8, "{diff}");
}

#[test]
fn mean_curvature_case_recovers_the_sphere() {
    // k = 1: σ_1 of the unit sphere's η-spectrum is 2, so 2/r = c/r^3 at r = √(c/2)
    let grid = full(16, 8);
    let data = PrescribedData::new(
        Arc::new(BuiltinRhs::PowerDecay { c: 2.42, p: 3.0 }),
        0.5,
        2.0,
    )
    .unwrap();
    let (rho, _) = continue_to_target(&grid, &data, HomotopyRun::default(), 1).unwrap();
    assert!(rho.values().iter().all(|v| (v - 1.1).abs() < 1e-8));
}

#[test]
fn degenerate_monotonicity_is_flagged() {
    // ρ^2 · ρ^{-2} is constant along every ray
    let flat = PrescribedData::new(
        Arc::new(BuiltinRhs::PowerDecay { c: 1.0, p: 2.0 }),
        0.5,
        2.0,
    )
    .unwrap();
    let rep = validate_conditions(&flat, 2, 2, 64, 0);
    assert!(rep.passed && rep.monotonicity_degenerate, "{rep:?}");

    let strict = PrescribedData::new(
        Arc::new(BuiltinRhs::PowerDecay { c: 1.0, p: 3.0 }),
        0.5,
        2.0,
    )
    .unwrap();
    let rep = validate_conditions(&strict, 2, 2, 64, 0);
    assert!(rep.passed && !rep.monotonicity_degenerate, "{rep:?}");
    assert!(rep.worst_margin <= 0.0);
}

#[test]
fn validation_is_deterministic_in_the_seed() {
    let data = aniso(0.2);
    assert_eq!(
        validate_conditions(&data, 2, 2, 64, 9),
        validate_conditions(&data, 2, 2, 64, 9)
    );
}

fn smooth_state(grid: &SphereGrid, a: &[f64]) -> Vec<f64> {
    RadialField::from_fn(grid, |f| {
        let p = &f.point;
        1.2 + a[0] * p[0]
            + a[1] * p[1]
            + a[2] * p[2]
            + a[3] * p[0] * p[1]
            + a[4] * (p[2] * p[2] - 1.0 / 3.0)
    })
    .unwrap()
    .into_values()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn analytic_jacobian_matches_differenced(a in prop::collection::vec(-0.04f64..0.04, 5), root in any::<bool>()) {
        let grid = full(16, 8);
        let data = aniso(0.2);
        let x = smooth_state(&grid, &a);
        let form = if root { EquationForm::Root } else { EquationForm::Raw };
        let problem = |jacobian| CurvedProblem { grid: &grid, data: &data, k: 2, form, jacobian, bounds: (0.0, f64::INFINITY) };
        let ja = problem(JacobianMode::Analytic).dense_jacobian(&x).unwrap();
        let jf = problem(JacobianMode::FiniteDifference).dense_jacobian(&x).unwrap();
        let scale = ja.amax();
        prop_assert!((&ja - &jf).amax() <= 1e-5 * scale, "{} vs {}", (&ja - &jf).amax(), scale);
    }

    #[test]
    fn residual_of_a_sphere_vanishes_for_matched_data(r in 0.6f64..1.8) {
        // f = C / r^2 · (r/|X|)^3 has the radius-r sphere as a solution
        let grid = full(16, 8);
        let c = r;
        let data = PrescribedData::new(Arc::new(BuiltinRhs::PowerDecay { c, p: 3.0 }), 0.5, 2.0).unwrap();
        let rho = RadialField::constant(&grid, r).unwrap();
        let res = eta_hessian::solver::residual(&grid, &rho, &data, 2).unwrap();
        prop_assert!(res.iter().all(|v| v.abs() < 1e-12));
        let jet = surface_jet(&grid, &rho).unwrap();
        prop_assert!(SpectrumVector::new(jet.node(0).eta.values.clone(), 2).unwrap().check_cone().is_ok());
    }
}
