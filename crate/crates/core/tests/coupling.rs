mod common;

use fsi_schur::assembly::{BlockOperatorSet, BoundaryLayout, Discretization, PhysicalConstants};
use fsi_schur::coupling::{
    advance, constraint_residual, densify_schur, monolithic_solve, run_transient, FsiSystem,
    Previous, SchurSolver, TimeState,
};
use fsi_schur::manufactured::{ExactSolution, Variant};
use fsi_schur::mesh::BoundaryTag;
use fsi_schur::sparse::KrylovOptions;
use fsi_schur::FsiError;

use common::*;

fn system(n: usize, dt: f64, layout: BoundaryLayout, c: PhysicalConstants) -> FsiSystem {
    let disc = Discretization::unit_boxes(n, 1, layout).unwrap();
    FsiSystem::build(BlockOperatorSet::assemble(disc, c).unwrap(), dt).unwrap()
}

fn tight() -> KrylovOptions {
    KrylovOptions {
        rel_tol: 1e-13,
        max_iter: None,
    }
}

#[test]
fn schur_equals_its_block_definition() {
    // S = A_f W_f^-1 A_f^T + A_s W_s^-1 A_s^T assembled from dense inverses
    let sys = system(
        2,
        0.1,
        BoundaryLayout::default(),
        PhysicalConstants::default(),
    );
    let wf = sys.w_f().to_dense().try_inverse().unwrap();
    let ws = sys.w_s().to_dense().try_inverse().unwrap();
    let (af, as_) = (sys.a_f().to_dense(), sys.a_s().to_dense());
    let s = &af * wf * af.transpose() + &as_ * ws * as_.transpose();
    let dense = densify_schur(&sys, 4000).unwrap();
    assert!((dense - &s).amax() < 1e-12 * s.amax());
}

#[test]
fn mixed_layouts_and_constants_match_the_monolithic_solve() {
    let c = PhysicalConstants {
        rho_f: 1.0,
        rho_s: 10.0,
        nu_f: 0.5,
        nu_s: 2.0,
        lambda: 0.0,
    };
    let layout = BoundaryLayout {
        fluid_neumann: vec![BoundaryTag::Right],
        solid_neumann: vec![BoundaryTag::Top],
    };
    let sys = system(3, 0.05, layout, c);
    let e = ExactSolution::new(c, Variant::Printed);
    let s0 = TimeState::initial(&sys, &e, 0.2);
    let mut a = s0.clone();
    let mut b = s0;
    for _ in 0..3 {
        a = advance(&sys, &a, &e, SchurSolver::Pcg, &tight()).unwrap().0;
        b = monolithic_solve(&sys, &b, &e).unwrap();
    }
    assert!(rel_diff(&a.u, &b.u, 1e-14) < 1e-8);
    assert!(rel_diff(&a.eta, &b.eta, 1e-14) < 1e-8);
    assert!(rel_diff(&a.p, &b.p, 1e-14) < 1e-8);
    assert!(rel_diff(&a.g, &b.g, 1e-14) < 1e-8);
    assert!((a.time - 0.35).abs() < 1e-14);
    assert_eq!(a.step, 3);
}

#[test]
fn kinematic_constraint_holds_every_step() {
    let sys = system(
        4,
        0.01,
        BoundaryLayout::default(),
        PhysicalConstants::default(),
    );
    let e = ExactSolution::new(PhysicalConstants::default(), Variant::Corrected);
    let mut s = TimeState::initial(&sys, &e, 0.0);
    for _ in 0..5 {
        let prev = s.eta.clone();
        let (next, d) = advance(&sys, &s, &e, SchurSolver::Cg, &KrylovOptions::default()).unwrap();
        let r = constraint_residual(&sys, &next.u, &next.eta, &prev);
        assert!(r < 1e-8, "{r}");
        assert!((d.constraint_residual - r).abs() < 1e-15);
        assert!(matches!(next.previous, Previous::Displacement(_)));
        s = next;
    }
}

#[test]
fn transient_rejects_incommensurate_final_time() {
    let sys = system(
        2,
        0.3,
        BoundaryLayout::default(),
        PhysicalConstants::default(),
    );
    let s = TimeState::zero(sys.dofs());
    let e = ExactSolution::new(PhysicalConstants::default(), Variant::Corrected);
    let err = run_transient(
        &sys,
        s,
        1.0,
        &e,
        SchurSolver::Pcg,
        &KrylovOptions::default(),
    )
    .unwrap_err();
    assert_eq!(err.kind(), "invalid-argument");
}

#[test]
fn iteration_cap_reports_no_convergence() {
    let sys = system(
        4,
        1e-3,
        BoundaryLayout::default(),
        PhysicalConstants::default(),
    );
    let e = ExactSolution::new(PhysicalConstants::default(), Variant::Corrected);
    let s = TimeState::initial(&sys, &e, 0.0);
    let opts = KrylovOptions {
        rel_tol: 1e-12,
        max_iter: Some(2),
    };
    match advance(&sys, &s, &e, SchurSolver::Cg, &opts) {
        Err(FsiError::NoConvergence { iterations, .. }) => assert_eq!(iterations, 2),
        other => panic!("expected no-convergence, got {other:?}"),
    }
}

#[test]
fn preconditioning_reduces_iterations() {
    let sys = system(
        8,
        1e-5,
        BoundaryLayout::default(),
        PhysicalConstants::default(),
    );
    let e = ExactSolution::new(PhysicalConstants::default(), Variant::Corrected);
    let s = TimeState::initial(&sys, &e, 0.0);
    let (_, cg) = advance(&sys, &s, &e, SchurSolver::Cg, &KrylovOptions::default()).unwrap();
    let (_, pcg) = advance(&sys, &s, &e, SchurSolver::Pcg, &KrylovOptions::default()).unwrap();
    let (_, direct) =
        advance(&sys, &s, &e, SchurSolver::Direct, &KrylovOptions::default()).unwrap();
    assert!(pcg.schur_iterations < cg.schur_iterations);
    assert_eq!(direct.schur_iterations, 0);
}
