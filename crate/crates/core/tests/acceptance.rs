//! Acceptance suite, run without the libtest harness so that every
//! criterion prints its `PASS`/`FAIL` line with the measured value next to
//! its tolerance. Exits nonzero if any criterion fails.

mod common;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use turnpike_core::linalg::{self, inf_norm};
use turnpike_core::model::{controllability_matrix, LinearizationData};
use turnpike_core::riccati::{are_residual, diagonalization_error};
use turnpike_core::*;

fn verdict(id: &str, what: &str, pass: bool, detail: String) {
    println!("{} [{id}] {what}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} failed: {detail}");
}

struct Pipeline {
    p: Problem,
    s: StaticSolution,
    split: HyperbolicSplitting,
}

fn pipeline(p: Problem) -> Pipeline {
    let s = solve_static(&p, &ExtremalPoint::zeros(p.n(), p.m())).unwrap();
    let d = assemble_abw(&hessian_blocks(&p, &s.point()).unwrap()).unwrap();
    let h = build_hamiltonian_matrix(&d, &d.huu).unwrap();
    let split = solve_splitting(&h, &d, &d.huu).unwrap();
    Pipeline { p, s, split }
}

fn ex1() -> Pipeline {
    pipeline(registry::oscillator_lq())
}

fn ex2() -> Pipeline {
    pipeline(registry::cubic_oscillator())
}

fn gap(a: &DVector<f64>, b: &[f64]) -> f64 {
    (a - DVector::from_column_slice(b)).amax()
}

fn criterion_01_static_example_one() {
    let p = registry::oscillator_lq();
    let s = solve_static(&p, &ExtremalPoint::zeros(2, 1)).unwrap();
    let err = gap(&s.x_bar, &[1.0, 0.0])
        .max(gap(&s.u_bar, &[1.0]))
        .max(gap(&s.lambda_bar, &[-7.0, 1.0]));
    verdict("1", "ex1 static solution", err <= 1e-8, format!("max error {err:.3e} <= 1e-8"));
}

fn criterion_02_static_example_two() {
    let p = registry::cubic_oscillator();
    let s = solve_static(&p, &ExtremalPoint::zeros(2, 1)).unwrap();
    let err = gap(&s.x_bar, &[1.25, 0.0])
        .max(gap(&s.u_bar, &[0.25]))
        .max(gap(&s.lambda_bar, &[-0.5, -0.75]));
    verdict("2", "ex2 static solution", err <= 1e-8, format!("max error {err:.3e} <= 1e-8"));
}

/// Entries uniform in (-1, 1), `W = G G^T + I`, `U = R R^T + I`, and a
/// controllability matrix whose singular values span at most two decades.
fn random_controllable(rng: &mut ChaCha8Rng) -> LinearizationData {
    loop {
        let n = rng.random_range(1..=6);
        let m = rng.random_range(1..=n.min(3));
        let mut draw = |r: usize, c: usize| DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0));
        let a = draw(n, n);
        let b = draw(n, m);
        let g = draw(n, n);
        let r = draw(m, m);
        let sv = linalg::singular_values(&controllability_matrix(&a, &b));
        if sv.min() < 1e-2 * sv.max() {
            continue;
        }
        return LinearizationData {
            a,
            b,
            w: linalg::symmetrize(&(&g * g.transpose() + DMatrix::identity(n, n))),
            huu: -linalg::symmetrize(&(&r * r.transpose() + DMatrix::identity(m, m))),
        };
    }
}

fn criterion_03_riccati() {
    let mut cases = Vec::new();
    let e = ex1();
    cases.push(assemble_abw(&hessian_blocks(&e.p, &e.s.point()).unwrap()).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(0x7u64);
    for _ in 0..20 {
        cases.push(random_controllable(&mut rng));
    }
    let mut worst_are: f64 = 0.0;
    let mut worst_off: f64 = 0.0;
    let mut worst_pair: f64 = 0.0;
    let mut definite = true;
    for d in &cases {
        let h = build_hamiltonian_matrix(d, &d.huu).unwrap();
        let s = solve_splitting(&h, d, &d.huu).unwrap();
        worst_are = worst_are
            .max(are_residual(&h, d, &s.e_minus))
            .max(are_residual(&h, d, &s.e_plus));
        let (off, _) = diagonalization_error(&h, &s).unwrap();
        worst_off = worst_off.max(off / inf_norm(&h.m));
        worst_pair = worst_pair.max(verify_spectrum(&h).pairing_error);
        definite &= linalg::sym_eig_range(&s.e_minus).1 < 0.0 && linalg::sym_eig_range(&s.e_plus).0 > 0.0;
    }
    // (b^2/u) X^2 + 2 a X - w = 0 for n = m = 1
    let mut worst_scalar: f64 = 0.0;
    for (a, b, u, w) in [(0.0, 1.0, 1.0, 1.0), (1.0, 1.0, 1.0, 3.0), (-0.5, 2.0, 3.0, 0.7)] {
        let d = LinearizationData {
            a: DMatrix::from_element(1, 1, a),
            b: DMatrix::from_element(1, 1, b),
            w: DMatrix::from_element(1, 1, w),
            huu: DMatrix::from_element(1, 1, -u),
        };
        let h = build_hamiltonian_matrix(&d, &d.huu).unwrap();
        let s = solve_splitting(&h, &d, &d.huu).unwrap();
        let q = b * b / u;
        let disc = (a * a + q * w).sqrt();
        let (em, ep) = ((-a - disc) / q, (-a + disc) / q);
        worst_scalar = worst_scalar
            .max((s.e_minus[(0, 0)] - em).abs())
            .max((s.e_plus[(0, 0)] - ep).abs())
            .max((s.c2 - disc).abs());
    }
    let pass = worst_are <= 1e-8 && worst_off <= 1e-8 && worst_pair <= 1e-8 && definite && worst_scalar <= 1e-12;
    verdict(
        "3",
        "Riccati splitting on ex1 + 20 random instances",
        pass,
        format!(
            "ARE {worst_are:.2e} <= 1e-8, offdiag/|M| {worst_off:.2e} <= 1e-8, pairing {worst_pair:.2e} <= 1e-8, definite {definite}, scalar {worst_scalar:.2e} <= 1e-12"
        ),
    );
}

fn criterion_04_lq_oracle_equivalence() {
    let e = ex1();
    let opts = ShootingOptions::default();
    let mut worst: f64 = 0.0;
    for horizon in [5.0, 10.0] {
        let steps = 10_000;
        let oracle = common::lq_oracle(&e.p, horizon, steps);
        let classic = classic_shoot(&e.p, horizon, steps, &DVector::zeros(4), &DVector::zeros(2), &opts).unwrap();
        let mid = midpoint_shoot(&e.p, horizon, steps, &e.s, &opts).unwrap();
        worst = worst
            .max(classic.full_distance(&oracle).unwrap())
            .max(mid.full_distance(&oracle).unwrap())
            .max(classic.full_distance(&mid).unwrap());
    }
    verdict(
        "4",
        "ex1 classic/midpoint shooting vs exact LQ solution, T in {5, 10}",
        worst <= 1e-6,
        format!("sup distance {worst:.3e} <= 1e-6"),
    );
}

fn ex1_report(e: &Pipeline, horizon: f64) -> TurnpikeReport {
    let steps = (100.0 * horizon) as usize;
    let x = midpoint_shoot(&e.p, horizon, steps, &e.s, &ShootingOptions::default()).unwrap();
    turnpike_report(&x, &e.p, &e.s, &e.split)
}

fn criterion_05a_envelope_dominance() {
    let e = ex1();
    let r = ex1_report(&e, 30.0);
    let mut worst: f64 = 0.0;
    for (t, d) in r.t.iter().zip(&r.deviation) {
        let env = r.c1_fit * analysis::envelope(r.c2, 30.0, *t);
        worst = worst.max(d - env);
    }
    let pass = r.envelope_ok && worst <= 1e-12 * r.c1_fit;
    verdict(
        "5a",
        "ex1 T=30 deviation under C1_fit (e^{-C2 t} + e^{-C2 (T-t)})",
        pass,
        format!("C1_fit {:.4}, C2 {:.6}, max excess {worst:.2e} <= 0", r.c1_fit, r.c2),
    );
}

fn criterion_05b_mid_third_max() {
    let e = ex1();
    let r = ex1_report(&e, 30.0);
    verdict(
        "5b",
        "ex1 T=30 max deviation over [T/3, 2T/3]",
        r.mid_third_max <= 1e-3,
        format!("{:.4e} <= 1e-3", r.mid_third_max),
    );
}

fn criterion_05c_uniform_constant() {
    let e = ex1();
    let fits: Vec<f64> = [10.0, 20.0, 30.0].iter().map(|&t| ex1_report(&e, t).c1_fit).collect();
    let lo = fits.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = fits.iter().copied().fold(0.0, f64::max);
    verdict(
        "5c",
        "ex1 C1_fit across T in {10, 20, 30}",
        hi / lo < 3.0,
        format!("C1_fit {fits:.4?}, ratio {:.4} < 3", hi / lo),
    );
}

fn criterion_06_time_averages() {
    let e = ex1();
    let f0_bar = e.p.running_cost(&e.s.x_bar, &e.s.u_bar);
    let measure = |horizon: f64| {
        let r = ex1_report(&e, horizon);
        ((&r.averages.x_avg - &e.s.x_bar).norm(), (r.averages.cost_avg - f0_bar).abs())
    };
    let (x20, c20) = measure(20.0);
    let (x40, c40) = measure(40.0);
    let pass = x40 <= 0.75 * x20 && c40 <= 0.75 * c20;
    verdict(
        "6",
        "ex1 time averages, T=40 vs T=20",
        pass,
        format!(
            "|x_avg - x_bar| {x40:.4e} / {x20:.4e} = {:.3}, |cost_avg - f0| {c40:.4e} / {c20:.4e} = {:.3}, both <= 0.75",
            x40 / x20,
            c40 / c20
        ),
    );
}

fn criterion_07_midpoint_robustness() {
    let e = ex2();
    let steps = 1000;
    let mid = midpoint_shoot(&e.p, 20.0, steps, &e.s, &ShootingOptions::default()).unwrap();
    let t = transcribe(&e.p, 20.0, steps).unwrap();
    let direct = solve_nlp(&t, &warm_start_from_static(&t, &e.s), &DirectOptions::default()).unwrap();
    let dist = mid.state_distance(&direct.extremal).unwrap();
    let pass = mid.boundary_residual <= 1e-9 && mid.iterations <= 50 && dist <= 5e-2;
    verdict(
        "7",
        "ex2 T=20 midpoint shooting from the static point",
        pass,
        format!(
            "residual {:.2e} <= 1e-9, iterations {} <= 50, distance to direct {dist:.3e} <= 5e-2",
            mid.boundary_residual, mid.iterations
        ),
    );
}

fn criterion_08_direct_order() {
    let e = ex1();
    let horizon = 10.0;
    let errors: Vec<f64> = [500, 1000, 2000]
        .iter()
        .map(|&n| {
            let t = transcribe(&e.p, horizon, n).unwrap();
            let sol = solve_nlp(&t, &warm_start_from_static(&t, &e.s), &DirectOptions::default()).unwrap();
            sol.extremal.full_distance(&common::lq_oracle(&e.p, horizon, n)).unwrap()
        })
        .collect();
    let ratios = [errors[0] / errors[1], errors[1] / errors[2]];
    let pass = ratios.iter().all(|r| (1.5..=2.5).contains(r));
    verdict(
        "8",
        "ex1 T=10 direct error vs exact LQ solution, N = 500, 1000, 2000",
        pass,
        format!("errors {errors:.4?}, ratios {ratios:.3?} in [1.5, 2.5]"),
    );
}

fn criterion_09_degenerate_fixed_point() {
    let p = Problem::new("ex1-periodic", registry::oscillator_lq_model(), Terminal::Periodic).unwrap();
    let s = solve_static(&p, &ExtremalPoint::zeros(2, 1)).unwrap();
    let mid = midpoint_shoot(&p, 20.0, 2000, &s, &ShootingOptions::default()).unwrap();
    let t = transcribe(&p, 20.0, 1000).unwrap();
    let direct = solve_nlp(&t, &warm_start_from_static(&t, &s), &DirectOptions::default()).unwrap();
    let pass = mid.iterations == 0 && direct.iterations == 0 && s.defect == 0.0;
    verdict(
        "9",
        "periodic problem at the static point",
        pass,
        format!(
            "midpoint iterations {}, direct iterations {}, defect {:e}; all must be 0",
            mid.iterations, direct.iterations, s.defect
        ),
    );
}

fn criterion_10_wellposedness() {
    let r1 = {
        let e = ex1();
        build_wellposedness_matrix(&e.p, &e.s, &e.split).rcond
    };
    let r2 = {
        let e = ex2();
        build_wellposedness_matrix(&e.p, &e.s, &e.split).rcond
    };
    verdict(
        "10",
        "shooting matrix Q for ex1 and ex2",
        r1 >= 1e-8 && r2 >= 1e-8,
        format!("rcond {r1:.3e}, {r2:.3e} >= 1e-8"),
    );
}

fn main() {
    let criteria: &[(&str, fn())] = &[
        ("criterion_01_static_example_one", criterion_01_static_example_one),
        ("criterion_02_static_example_two", criterion_02_static_example_two),
        ("criterion_03_riccati", criterion_03_riccati),
        ("criterion_04_lq_oracle_equivalence", criterion_04_lq_oracle_equivalence),
        ("criterion_05a_envelope_dominance", criterion_05a_envelope_dominance),
        ("criterion_05b_mid_third_max", criterion_05b_mid_third_max),
        ("criterion_05c_uniform_constant", criterion_05c_uniform_constant),
        ("criterion_06_time_averages", criterion_06_time_averages),
        ("criterion_07_midpoint_robustness", criterion_07_midpoint_robustness),
        ("criterion_08_direct_order", criterion_08_direct_order),
        ("criterion_09_degenerate_fixed_point", criterion_09_degenerate_fixed_point),
        ("criterion_10_wellposedness", criterion_10_wellposedness),
    ];
    std::panic::set_hook(Box::new(|info| eprintln!("  {info}")));
    let mut failed = Vec::new();
    for (name, run) in criteria {
        if std::panic::catch_unwind(run).is_err() {
            failed.push(*name);
        }
    }
    println!("acceptance: {} passed, {} failed", criteria.len() - failed.len(), failed.len());
    if !failed.is_empty() {
        println!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}
