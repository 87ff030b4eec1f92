mod common;

use fsi_schur::assembly::{BoundaryLayout, Discretization, PhysicalConstants};
use fsi_schur::manufactured::{
    compute_error_norms, convergence_rate, DiscreteFields, ExactSolution, ProblemData, Variant,
};
use proptest::prelude::*;

use common::*;

fn exact(c: PhysicalConstants, v: Variant) -> ExactSolution {
    ExactSolution::new(c, v)
}

#[test]
fn forcing_matches_finite_differences() {
    let c = PhysicalConstants {
        rho_f: 2.0,
        rho_s: 0.5,
        nu_f: 0.3,
        nu_s: 1.4,
        lambda: 3.0,
    };
    let mut r = rng(11);
    for v in [Variant::Corrected, Variant::Printed] {
        let e = exact(c, v);
        for _ in 0..50 {
            let (x, y, t) = random_point(&mut r, 0.0);
            let (a, b) = (e.fluid_forcing(x, y, t), fd_fluid_forcing(&e, x, y, t));
            let (xs, ys, ts) = random_point(&mut r, 1.0);
            let (c2, d) = (
                e.solid_forcing(xs, ys, ts),
                fd_solid_forcing(&e, xs, ys, ts),
            );
            for i in 0..2 {
                assert!((a[i] - b[i]).abs() < 1e-6, "fluid {a:?} vs {b:?}");
                assert!((c2[i] - d[i]).abs() < 1e-6, "solid {c2:?} vs {d:?}");
            }
        }
    }
}

#[test]
fn printed_variant_differs_only_in_the_second_displacement_component() {
    let c = PhysicalConstants::default();
    let (a, b) = (exact(c, Variant::Corrected), exact(c, Variant::Printed));
    let (p, q) = (a.displacement(0.3, 1.4, 0.2), b.displacement(0.3, 1.4, 0.2));
    assert_eq!(p[0], q[0]);
    assert_ne!(p[1], q[1]);
    assert_eq!(a.velocity(0.3, 0.4, 0.2), b.velocity(0.3, 0.4, 0.2));
}

#[test]
fn interface_traction_balance_and_velocity_match() {
    // fluid traction equals minus the solid traction on y = 1, and u = eta_t there
    let e = exact(PhysicalConstants::default(), Variant::Corrected);
    let mut r = rng(3);
    for _ in 0..20 {
        let (x, _, t) = random_point(&mut r, 0.0);
        let tf = e.fluid_traction(x, 1.0, t, [0.0, 1.0]);
        let ts = e.solid_traction(x, 1.0, t, [0.0, -1.0]);
        let g = e.multiplier(x, t);
        let u = e.velocity(x, 1.0, t);
        let rate = e.displacement_rate(x, 1.0, t);
        for i in 0..2 {
            assert!((tf[i] + ts[i]).abs() < 1e-12);
            assert!((g[i] - tf[i]).abs() < 1e-12);
            assert!((u[i] - rate[i]).abs() < 1e-12);
        }
    }
}

#[test]
fn problem_data_forwards_closed_forms() {
    let e = exact(PhysicalConstants::default(), Variant::Corrected);
    let d: &dyn ProblemData = &e;
    assert_eq!(d.fluid_force(0.1, 0.2, 0.3), e.fluid_forcing(0.1, 0.2, 0.3));
    assert_eq!(d.displacement(0.1, 1.2, 0.3), e.displacement(0.1, 1.2, 0.3));
}

#[test]
fn interpolant_errors_converge_at_element_rates() {
    let e = exact(PhysicalConstants::default(), Variant::Corrected);
    let mut l2 = Vec::new();
    let mut h1 = Vec::new();
    let hs = [0.25, 0.125, 0.0625];
    for h in hs {
        let n = (1.0 / h) as usize;
        let d = Discretization::unit_boxes(n, 1, BoundaryLayout::default()).unwrap();
        let t = 0.4;
        let u = d.velocity.interpolate_vector(|x, y| e.velocity(x, y, t));
        let eta = d
            .displacement
            .interpolate_vector(|x, y| e.displacement(x, y, t));
        let p = d.pressure.interpolate(|x, y| e.pressure(x, y, t));
        let g = vec![0.0; d.dofs.n_gamma];
        let errs = compute_error_norms(
            &d,
            DiscreteFields {
                u: &u,
                p: &p,
                eta: &eta,
                g: &g,
            },
            &e,
            t,
        )
        .unwrap();
        l2.push(errs.eta_l2);
        h1.push(errs.u_h1);
    }
    let r2 = convergence_rate(&l2, &hs).unwrap();
    let r1 = convergence_rate(&h1, &hs).unwrap();
    assert!(r2.iter().all(|r| (r.unwrap() - 3.0).abs() < 0.3), "{r2:?}");
    assert!(r1.iter().all(|r| (r.unwrap() - 2.0).abs() < 0.2), "{r1:?}");
}

#[test]
fn tabulated_displacement_errors_give_cubic_rates() {
    let errors = [
        1.936e-03, 2.421e-04, 3.026e-05, 3.783e-06, 4.729e-07, 5.956e-08,
    ];
    let dx = [0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625];
    let printed = [3.00, 3.00, 3.00, 3.00, 2.99];
    for (r, p) in convergence_rate(&errors, &dx).unwrap().iter().zip(printed) {
        assert!((r.unwrap() - p).abs() < 0.005, "{r:?} vs {p}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rate_recovers_power_laws(c in 0.01f64..100.0, k in 0.5f64..4.0, h0 in 0.1f64..1.0) {
        let hs = [h0, h0 / 2.0, h0 / 4.0];
        let e: Vec<f64> = hs.iter().map(|h| c * h.powf(k)).collect();
        for r in convergence_rate(&e, &hs).unwrap() {
            prop_assert!((r.unwrap() - k).abs() < 1e-10);
        }
    }

    #[test]
    fn multiplier_is_the_fluid_traction(x in 0.0f64..1.0, t in 0.0f64..2.0, nu in 0.1f64..3.0) {
        let e = exact(PhysicalConstants { nu_f: nu, ..Default::default() }, Variant::Corrected);
        let g = e.multiplier(x, t);
        let fd = fd_fluid_traction(&e, x, 1.0, t, [0.0, 1.0]);
        prop_assert!((g[0] - fd[0]).abs() < 1e-7 && (g[1] - fd[1]).abs() < 1e-7);
    }
}
