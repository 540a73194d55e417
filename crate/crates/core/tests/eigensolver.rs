mod common;

use approx::assert_abs_diff_eq;
use eigenbound::bounds::{best_dirichlet_upper_bound, dirichlet_lower_bound, neumann_lower_bound, neumann_upper_bound, GeometryParams};
use eigenbound::domains::{make_ball, make_circle, make_interval, make_interval_poly, Polynomial, DEFAULT_NODES};
use eigenbound::eigensolver::{
    boundary_gradient, circle_modes, gradient_ratio, mass_weights, operator_residual, solve_ball_radial, solve_interval,
    BoundaryCondition,
};
use std::f64::consts::PI;

#[test]
fn bessel_oracle_self_check() {
    let j = common::j0_first_zero();
    assert_abs_diff_eq!(j, 2.404_825_557_695_773, epsilon = 1e-13);
    assert_abs_diff_eq!(common::j1_max_on_first_lobe(), 0.581_865_2, epsilon = 1e-7);
}

#[test]
fn disk_first_mode_matches_bessel() {
    let j = common::j0_first_zero();
    let (spec, _) = make_ball(2, 1.0, DEFAULT_NODES).unwrap();
    let ep = &solve_ball_radial(&spec, 1).unwrap()[0];
    assert_abs_diff_eq!(ep.lambda, j * j, epsilon = 1e-4);
    assert_abs_diff_eq!(gradient_ratio(ep), j * common::j1_max_on_first_lobe(), epsilon = 1e-4);
    assert_abs_diff_eq!(boundary_gradient(ep, &spec).unwrap(), j * common::bessel_j(1, j), epsilon = 1e-4);
    // φ = J_0(j r)
    for r in [0.0, 0.25, 0.5, 0.9] {
        assert_abs_diff_eq!(ep.eval(r), common::bessel_j(0, j * r), epsilon = 1e-5);
    }
}

#[test]
fn disk_second_radial_mode() {
    // second zero of J_0
    let mut x: f64 = 5.52;
    for _ in 0..50 {
        x -= common::bessel_j(0, x) / -common::bessel_j(1, x);
    }
    let (spec, _) = make_ball(2, 1.0, DEFAULT_NODES).unwrap();
    let modes = solve_ball_radial(&spec, 2).unwrap();
    assert_abs_diff_eq!(modes[1].lambda, x * x, epsilon = 1e-3);
}

#[test]
fn discrete_eigenvalues_converge_at_second_order() {
    let err = |nodes: usize| {
        let (spec, _) = make_interval(PI, nodes).unwrap();
        let ep = &solve_interval(&spec, BoundaryCondition::Dirichlet, 3).unwrap()[2];
        (ep.lambda_discrete - 9.0).abs()
    };
    // h ∝ 1/(nodes+1): 63 → 127 interior nodes halves h exactly.
    let ratio = err(63) / err(127);
    assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
    let (spec, _) = make_ball(3, 1.0, 63).unwrap();
    let coarse = (solve_ball_radial(&spec, 1).unwrap()[0].lambda_discrete - PI * PI).abs();
    let (spec, _) = make_ball(3, 1.0, 127).unwrap();
    let fine = (solve_ball_radial(&spec, 1).unwrap()[0].lambda_discrete - PI * PI).abs();
    assert!((coarse / fine - 4.0).abs() < 0.2, "ratio {}", coarse / fine);
}

#[test]
fn modes_are_orthogonal_in_weighted_product() {
    let (spec, _) = make_interval_poly(1.0, 1024, &Polynomial::new(vec![0.0, 1.0, -2.0])).unwrap();
    for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
        let modes = solve_interval(&spec, bc, 5).unwrap();
        let m = mass_weights(&spec, bc).unwrap();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(&m).map(|((x, y), w)| x * y * w).sum::<f64>();
        for i in 0..5 {
            for j in 0..i {
                let c = dot(&modes[i].phi, &modes[j].phi) / (dot(&modes[i].phi, &modes[i].phi) * dot(&modes[j].phi, &modes[j].phi)).sqrt();
                assert!(c.abs() < 1e-10, "{bc:?} {i} {j}: {c}");
            }
        }
        if bc == BoundaryCondition::Neumann {
            // orthogonal to constants too
            let ones = vec![1.0; spec.grid.len()];
            for ep in &modes {
                assert!(dot(&ep.phi, &ones).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn analytic_modes_have_small_discrete_residual() {
    let residual = |nodes: usize| {
        let (spec, _) = make_interval(PI, nodes).unwrap();
        let phi: Vec<f64> = spec.grid.iter().map(|x| (2.0 * x).sin()).collect();
        operator_residual(&spec, BoundaryCondition::Dirichlet, 4.0, &phi).unwrap()
    };
    let (a, b) = (residual(255), residual(511));
    assert!(a < 1e-3);
    assert!((a / b - 4.0).abs() < 0.1);
}

#[test]
fn sandwich_holds_on_catalog() {
    let (spec, c) = make_interval(PI, DEFAULT_NODES).unwrap();
    let g = c.geometry(1, 1.0, 0.0);
    for ep in solve_interval(&spec, BoundaryCondition::Dirichlet, 5).unwrap() {
        let r = gradient_ratio(&ep);
        assert!(dirichlet_lower_bound(&g, ep.lambda).unwrap() <= r);
        assert!(r <= best_dirichlet_upper_bound(&g, ep.lambda).unwrap().upper);
    }
    for ep in solve_interval(&spec, BoundaryCondition::Neumann, 5).unwrap() {
        let r = gradient_ratio(&ep);
        assert!(neumann_lower_bound(&g, ep.lambda).unwrap() <= r);
        assert!(r <= neumann_upper_bound(0.0, ep.lambda).unwrap());
    }
    for d in [2, 3, 4] {
        let (spec, c) = make_ball(d, 1.0, 1024).unwrap();
        let g: GeometryParams = c.geometry(d, d as f64, 0.0);
        for ep in solve_ball_radial(&spec, 4).unwrap() {
            let r = gradient_ratio(&ep);
            assert!(dirichlet_lower_bound(&g, ep.lambda).unwrap() <= r);
            assert!(r <= best_dirichlet_upper_bound(&g, ep.lambda).unwrap().upper);
        }
    }
    let (spec, _) = make_circle(2.0 * PI, 1024).unwrap();
    let g = GeometryParams::flat(1);
    for ep in circle_modes(&spec, 6).unwrap() {
        let r = gradient_ratio(&ep);
        assert!(neumann_lower_bound(&g, ep.lambda).unwrap() <= r);
        assert!(r <= neumann_upper_bound(0.0, ep.lambda).unwrap());
    }
}

#[test]
fn sandwich_holds_with_drift() {
    let v = Polynomial::new(vec![0.0, 0.5, -1.0]);
    let (spec, c) = make_interval_poly(2.0, DEFAULT_NODES, &v).unwrap();
    let (n, k) = spec.default_cd().unwrap();
    let g = c.geometry(1, n, k);
    for ep in solve_interval(&spec, BoundaryCondition::Dirichlet, 5).unwrap() {
        let r = gradient_ratio(&ep);
        assert!(dirichlet_lower_bound(&g, ep.lambda).unwrap() <= r);
        assert!(r <= best_dirichlet_upper_bound(&g, ep.lambda).unwrap().upper);
    }
}

#[test]
fn boundary_gradient_obeys_survival_chain() {
    use eigenbound::bounds::boundary_gradient_bound;
    use eigenbound::optimize::log_grid;
    let grid = log_grid(1e-3, 10.0, 300);
    let (spec, c) = make_interval(PI, DEFAULT_NODES).unwrap();
    for ep in solve_interval(&spec, BoundaryCondition::Dirichlet, 5).unwrap() {
        let (bound, _) = boundary_gradient_bound(c.alpha, ep.lambda, &grid).unwrap();
        assert!(boundary_gradient(&ep, &spec).unwrap() <= bound);
    }
    let (spec, c) = make_ball(2, 1.0, DEFAULT_NODES).unwrap();
    for ep in solve_ball_radial(&spec, 3).unwrap() {
        let (bound, _) = boundary_gradient_bound(c.alpha, ep.lambda, &grid).unwrap();
        assert!(boundary_gradient(&ep, &spec).unwrap() <= bound);
    }
}
