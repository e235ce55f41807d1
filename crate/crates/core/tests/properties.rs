mod common;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use turnpike_core::analysis::envelope;
use turnpike_core::direct::NlpIterate;
use turnpike_core::model::fd_hessian_blocks;
use turnpike_core::static_solver::transversality_residual;
use turnpike_core::*;

fn setup(p: Problem) -> (Problem, StaticSolution, HyperbolicSplitting) {
    let s = solve_static(&p, &ExtremalPoint::zeros(p.n(), p.m())).unwrap();
    let d = assemble_abw(&hessian_blocks(&p, &s.point()).unwrap()).unwrap();
    let h = build_hamiltonian_matrix(&d, &d.huu).unwrap();
    let split = solve_splitting(&h, &d, &d.huu).unwrap();
    (p, s, split)
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, m: usize) -> ExtremalPoint {
    let mut v = |k: usize| DVector::from_fn(k, |_, _| rng.random_range(-2.0..2.0));
    ExtremalPoint::new(v(n), v(n), v(m)).unwrap()
}

fn close_rel(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
    a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= tol * x.abs().max(1.0))
}

#[test]
fn fd_hessian_blocks_match_analytic() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for p in [registry::oscillator_lq(), registry::cubic_oscillator()] {
        for _ in 0..20 {
            let e = random_point(&mut rng, p.n(), p.m());
            let exact = hessian_blocks(&p, &e).unwrap();
            let fd = fd_hessian_blocks(&p, &e).unwrap();
            for (a, b) in [
                (&exact.hxx, &fd.hxx),
                (&exact.hxl, &fd.hxl),
                (&exact.hxu, &fd.hxu),
                (&exact.hlu, &fd.hlu),
                (&exact.huu, &fd.huu),
            ] {
                assert!(close_rel(a, b, 1e-5), "{}: {a} vs {b}", p.name());
            }
            let (fx, _) = p.fd_dynamics_jacobians(&e.x, &e.u);
            assert!((&exact.hxl - fx).amax() <= 1e-6);
        }
    }
}

#[test]
fn static_solutions_are_stationary() {
    for p in [registry::oscillator_lq(), registry::cubic_oscillator()] {
        let (p, s, _) = setup(p);
        assert!(p.dynamics(&s.x_bar, &s.u_bar).amax() <= 1e-9);
        assert!(s.kkt_residual <= 1e-9);
    }
    let p = registry::oscillator_lq();
    let newton = solve_static(&p, &ExtremalPoint::zeros(2, 1)).unwrap();
    let direct = solve_static_lq(&p).unwrap();
    assert!((&newton.x_bar - &direct.x_bar).amax() <= 1e-9);
    assert!((&newton.lambda_bar - &direct.lambda_bar).amax() <= 1e-9);
    assert!((&newton.u_bar - &direct.u_bar).amax() <= 1e-9);
}

#[test]
fn gamma_bar_is_least_squares_optimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for p in [registry::oscillator_lq(), registry::cubic_oscillator()] {
        let (p, s, _) = setup(p);
        let best = transversality_residual(&p, &s, &s.gamma_bar).norm();
        for _ in 0..100 {
            let scale = 10f64.powf(rng.random_range(-6.0..1.0));
            let dg = DVector::from_fn(p.k(), |_, _| rng.random_range(-1.0..1.0)) * scale;
            let other = transversality_residual(&p, &s, &(&s.gamma_bar + dg)).norm();
            assert!(other >= best, "{}: {other} < {best}", p.name());
        }
    }
}

#[test]
fn ex1_envelope_properties() {
    let (p, s, split) = setup(registry::oscillator_lq());
    let opts = ShootingOptions::default();
    for horizon in [10.0, 20.0, 30.0] {
        let e = midpoint_shoot(&p, horizon, (100.0 * horizon) as usize, &s, &opts).unwrap();
        let r = turnpike_report(&e, &p, &s, &split);
        assert!(r.envelope_ok);
        let ends = r.deviation[0].max(*r.deviation.last().unwrap());
        assert!(r.c1_fit >= ends / 2.0);
        for (ti, di) in r.t.iter().zip(&r.deviation) {
            assert!(*di <= r.c1_fit * envelope(r.c2, horizon, *ti) * (1.0 + 1e-12));
        }
        assert!(r.mid_third_max <= 2.0 * r.c1_fit * (-r.c2 * horizon / 3.0).exp());
        let d0 = (&e.x[0] - &s.x_bar).norm() + (&e.lambda[0] - &s.lambda_bar).norm() + (&e.u[0] - &s.u_bar).norm();
        assert!((r.deviation[0] - d0).abs() <= 1e-14 * d0.max(1.0));
    }
}

#[test]
fn ex1_lq_bound_constants_within_factor_ten() {
    let (p, s, split) = setup(registry::oscillator_lq());
    let bounds = lq_bound_constants(&p, &s, &split).unwrap();
    let horizon = 30.0;
    let e = common::lq_oracle(&p, horizon, 3000);
    let fit = fit_envelope(&e.t, &deviation_profile(&e, &s), split.c2, horizon);
    let ratio = fit.c1_fit / bounds.c1();
    assert!((0.1..=10.0).contains(&ratio), "C1_fit {} vs bound {}", fit.c1_fit, bounds.c1());
}

#[test]
fn ex1_oscillates_around_the_turnpike() {
    let (p, s, _) = setup(registry::oscillator_lq());
    let opts = ShootingOptions::default();
    let crossings = |horizon: f64| {
        let e = midpoint_shoot(&p, horizon, (100.0 * horizon) as usize, &s, &opts).unwrap();
        count_crossings(&e, &s)
    };
    let (short, long) = (crossings(15.0), crossings(30.0));
    assert!(long >= 2);
    assert!(long >= short);
}

#[test]
fn ex1_cost_average_approaches_static_cost() {
    let (p, s, _) = setup(registry::oscillator_lq());
    let f0 = p.running_cost(&s.x_bar, &s.u_bar);
    assert!((f0 - 25.5).abs() < 1e-12);
    let gap = |horizon: f64| {
        let e = common::lq_oracle(&p, horizon, (100.0 * horizon) as usize);
        (time_averages(&e, &p).cost_avg - f0).abs()
    };
    let gaps = [gap(10.0), gap(20.0), gap(40.0), gap(80.0)];
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn ex2_warm_start_against_zero_start() {
    let (p, s, _) = setup(registry::cubic_oscillator());
    let t = transcribe(&p, 20.0, 1000).unwrap();
    let opts = DirectOptions::default();
    let warm = solve_nlp(&t, &warm_start_from_static(&t, &s), &opts).unwrap();
    assert!(warm.kkt_residual <= opts.tolerance);
    let cold = solve_nlp(&t, &NlpIterate::from_decision(&t, DVector::zeros(t.decision_dim())), &opts);
    match cold {
        Ok(c) => println!("ex2 direct iterations: warm {}, zero {}", warm.iterations, c.iterations),
        Err(err) => println!("ex2 direct iterations: warm {}, zero start failed: {err}", warm.iterations),
    }
}
