//! Turnpike diagnostics on a computed extremal.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::model::{Problem, TerminalKind};
use crate::riccati::HyperbolicSplitting;
use crate::static_solver::StaticSolution;
use crate::trajectory::Extremal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeFit {
    /// Smallest `C1` with `d(t) <= C1 (e^{-C2 t} + e^{-C2 (T - t)})` on the grid.
    pub c1_fit: f64,
    pub envelope_ok: bool,
    /// Largest deviation over `[T/3, 2T/3]`.
    pub mid_third_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Averages {
    pub x_avg: DVector<f64>,
    pub lambda_avg: DVector<f64>,
    pub u_avg: DVector<f64>,
    pub cost_avg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurnpikeReport {
    pub t: Vec<f64>,
    pub deviation: Vec<f64>,
    pub c2: f64,
    /// `C2 / 2`, the rate appearing in the transient estimates.
    pub conservative_rate: f64,
    pub c1_fit: f64,
    pub envelope_ok: bool,
    pub mid_third_max: f64,
    pub averages: Averages,
    pub crossings: usize,
    pub defect: f64,
}

/// `|x - x_bar| + |lambda - lambda_bar| + |u - u_bar|` at every node.
pub fn deviation_profile(e: &Extremal, s: &StaticSolution) -> Vec<f64> {
    (0..e.t.len())
        .map(|i| {
            (&e.x[i] - &s.x_bar).norm()
                + (&e.lambda[i] - &s.lambda_bar).norm()
                + (&e.u[i] - &s.u_bar).norm()
        })
        .collect()
}

/// `e^{-C2 t} + e^{-C2 (T - t)}`.
pub fn envelope(c2: f64, horizon: f64, t: f64) -> f64 {
    libm::exp(-c2 * t) + libm::exp(-c2 * (horizon - t))
}

fn in_window(t: f64, lo: f64, hi: f64, horizon: f64) -> bool {
    let slack = 1e-12 * horizon.abs().max(1.0);
    t >= lo - slack && t <= hi + slack
}

pub fn fit_envelope(t: &[f64], d: &[f64], c2: f64, horizon: f64) -> EnvelopeFit {
    let mut c1_fit: f64 = 0.0;
    let mut mid_third_max: f64 = 0.0;
    for (&ti, &di) in t.iter().zip(d) {
        c1_fit = c1_fit.max(di / envelope(c2, horizon, ti));
        if in_window(ti, horizon / 3.0, 2.0 * horizon / 3.0, horizon) {
            mid_third_max = mid_third_max.max(di);
        }
    }
    EnvelopeFit {
        c1_fit,
        envelope_ok: c1_fit.is_finite(),
        mid_third_max,
    }
}

fn trapezoid(t: &[f64], values: impl Fn(usize) -> DVector<f64>) -> DVector<f64> {
    let mut acc = values(0) * 0.0;
    for i in 0..t.len() - 1 {
        acc += (values(i) + values(i + 1)) * (0.5 * (t[i + 1] - t[i]));
    }
    acc / (t[t.len() - 1] - t[0])
}

/// Trapezoidal time averages of `x`, `lambda`, `u` and of the running cost.
pub fn time_averages(e: &Extremal, p: &Problem) -> Averages {
    if e.t.len() < 2 {
        return Averages {
            x_avg: e.x[0].clone(),
            lambda_avg: e.lambda[0].clone(),
            u_avg: e.u[0].clone(),
            cost_avg: p.running_cost(&e.x[0], &e.u[0]),
        };
    }
    let cost = trapezoid(&e.t, |i| DVector::from_element(1, p.running_cost(&e.x[i], &e.u[i])));
    Averages {
        x_avg: trapezoid(&e.t, |i| e.x[i].clone()),
        lambda_avg: trapezoid(&e.t, |i| e.lambda[i].clone()),
        u_avg: trapezoid(&e.t, |i| e.u[i].clone()),
        cost_avg: cost[0],
    }
}

/// Sign changes of `x_2(t) - x_bar_2` over `[T/4, 3T/4]`; zero for scalar
/// states.
pub fn count_crossings(e: &Extremal, s: &StaticSolution) -> usize {
    if s.x_bar.len() < 2 {
        return 0;
    }
    let horizon = e.horizon();
    let mut last = 0.0f64;
    let mut count = 0;
    for (ti, xi) in e.t.iter().zip(&e.x) {
        if !in_window(*ti, horizon / 4.0, 3.0 * horizon / 4.0, horizon) {
            continue;
        }
        let v = xi[1] - s.x_bar[1];
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = v;
    }
    count
}

pub fn turnpike_report(
    e: &Extremal,
    p: &Problem,
    s: &StaticSolution,
    split: &HyperbolicSplitting,
) -> TurnpikeReport {
    let deviation = deviation_profile(e, s);
    let fit = fit_envelope(&e.t, &deviation, split.c2, e.horizon());
    TurnpikeReport {
        t: e.t.clone(),
        c2: split.c2,
        conservative_rate: split.conservative_rate(),
        c1_fit: fit.c1_fit,
        envelope_ok: fit.envelope_ok,
        mid_third_max: fit.mid_third_max,
        averages: time_averages(e, p),
        crossings: count_crossings(e, s),
        defect: s.defect,
        deviation,
    }
}

/// Leading constants of the explicit LQ estimates for a fixed initial
/// state and free final point:
///
/// `|x(t) - x_bar| <= |x0 - x_bar| e^{-C2 t} + |E_+^{-1} lambda_bar| e^{-C2 (T - t)}`,
/// `|lambda(t) - lambda_bar| <= |E_-| |x0 - x_bar| e^{-C2 t} + |E_+| |E_+^{-1} lambda_bar| e^{-C2 (T - t)}`,
/// `|u(t) - u_bar| <= |U^{-1}| |B| |lambda(t) - lambda_bar|`,
///
/// up to terms of order `e^{-C2 T}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LqBoundConstants {
    pub initial_gap: f64,
    pub final_gap: f64,
    pub e_minus_norm: f64,
    pub e_plus_norm: f64,
    pub control_gain: f64,
}

impl LqBoundConstants {
    /// Coefficients `(a, b)` of the summed bound `a e^{-C2 t} + b e^{-C2 (T - t)}`.
    pub fn deviation_coefficients(&self) -> (f64, f64) {
        let g = 1.0 + self.control_gain;
        (
            self.initial_gap * (1.0 + self.e_minus_norm * g),
            self.final_gap * (1.0 + self.e_plus_norm * g),
        )
    }

    /// Single constant in front of `e^{-C2 t} + e^{-C2 (T - t)}`.
    pub fn c1(&self) -> f64 {
        let (a, b) = self.deviation_coefficients();
        a.max(b)
    }
}

fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    crate::linalg::singular_values(a).max()
}

/// Constants of the explicit LQ estimates; `None` unless the problem is LQ
/// with a fixed initial state and free final point.
pub fn lq_bound_constants(
    p: &Problem,
    s: &StaticSolution,
    split: &HyperbolicSplitting,
) -> Option<LqBoundConstants> {
    let lq = p.linear_quadratic()?;
    if p.terminal().kind() != TerminalKind::FixedInitial {
        return None;
    }
    let x0 = p.terminal().initial_state()?;
    let e_plus_inv = crate::linalg::inverse(&split.e_plus)?;
    Some(LqBoundConstants {
        initial_gap: (x0 - &s.x_bar).norm(),
        final_gap: (e_plus_inv * &s.lambda_bar).norm(),
        e_minus_norm: spectral_norm(&split.e_minus),
        e_plus_norm: spectral_norm(&split.e_plus),
        control_gain: spectral_norm(lq.u_inv()) * spectral_norm(&lq.b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ExtremalPoint, Terminal};
    use crate::registry;
    use crate::static_solver::solve_static;
    use nalgebra::dvector;

    fn periodic_static() -> (Problem, StaticSolution) {
        let p = Problem::new("periodic", registry::oscillator_lq_model(), Terminal::Periodic).unwrap();
        let s = solve_static(&p, &ExtremalPoint::zeros(2, 1)).unwrap();
        (p, s)
    }

    #[test]
    fn constant_extremal_diagnostics() {
        let (p, s) = periodic_static();
        let e = Extremal::constant(&s.x_bar, &s.lambda_bar, &s.u_bar, s.gamma_bar.clone(), 12.0, 120);
        let d = deviation_profile(&e, &s);
        assert!(d.iter().all(|v| *v == 0.0));
        let fit = fit_envelope(&e.t, &d, 0.7, 12.0);
        assert_eq!(fit.c1_fit, 0.0);
        assert!(fit.envelope_ok);
        let avg = time_averages(&e, &p);
        assert!((&avg.x_avg - &s.x_bar).amax() < 1e-15);
        assert!((&avg.lambda_avg - &s.lambda_bar).amax() < 1e-14);
        assert!((&avg.u_avg - &s.u_bar).amax() < 1e-15);
        assert!((avg.cost_avg - 25.5).abs() < 1e-13);
        assert_eq!(count_crossings(&e, &s), 0);
    }

    #[test]
    fn envelope_itself_fits_with_unit_constant() {
        let (c2, horizon) = (0.8, 10.0);
        let t = Extremal::uniform_grid(horizon, 200);
        let d: Vec<f64> = t.iter().map(|&ti| envelope(c2, horizon, ti)).collect();
        let fit = fit_envelope(&t, &d, c2, horizon);
        assert!((fit.c1_fit - 1.0).abs() < 1e-15);
        assert!(fit.mid_third_max <= 2.0 * libm::exp(-c2 * horizon / 3.0) + 1e-15);
    }

    #[test]
    fn crossings_in_middle_half_only() {
        let (_, s) = periodic_static();
        let mut e = Extremal::constant(&s.x_bar, &s.lambda_bar, &s.u_bar, s.gamma_bar.clone(), 8.0, 8);
        // t = 1 lies outside [2, 6]
        let signs = [0.0, -1.0, 0.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        for (x, v) in e.x.iter_mut().zip(signs) {
            x[1] += v;
        }
        assert_eq!(count_crossings(&e, &s), 3);
    }

    #[test]
    fn deviation_at_start() {
        let (_, s) = periodic_static();
        let mut e = Extremal::constant(&s.x_bar, &s.lambda_bar, &s.u_bar, s.gamma_bar.clone(), 1.0, 4);
        e.x[0] = dvector![1.0, 3.0];
        e.lambda[0] = dvector![-7.0, 5.0];
        e.u[0] = dvector![-2.0];
        let d = deviation_profile(&e, &s);
        assert!((d[0] - (3.0 + 4.0 + 3.0)).abs() < 1e-14);
    }
}
