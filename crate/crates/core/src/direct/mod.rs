//! Direct method: explicit Euler transcription solved by Newton's method on
//! the KKT system of the resulting equality-constrained program.
//!
//! With the Lagrangian
//! `L = sum_i h f0(x_i, u_i) + sum_i mu_i^T (x_{i+1} - x_i - h f(x_i, u_i)) + nu^T R(x_0, x_N)`
//! the stationarity conditions are a discrete Pontryagin system in which
//! `mu_i` plays the costate at `t_{i+1}` and `-nu` the boundary multiplier.

mod kkt;

use alloc::vec::Vec;
use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::vec_inf_norm;
use crate::model::Problem;
use crate::shooting::{boundary_residual, pointwise_control};
use crate::static_solver::StaticSolution;
use crate::trajectory::Extremal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// First Hessian shift; multiplied by 10 on each factorization failure.
    pub initial_regularization: f64,
    pub max_regularization: f64,
    pub max_halvings: usize,
}

impl Default for DirectOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 300,
            initial_regularization: 1e-8,
            max_regularization: 1e8,
            max_halvings: 40,
        }
    }
}

/// Euler transcription of a problem on `[0, T]` with `N` steps.
#[derive(Debug, Clone, Copy)]
pub struct Transcription<'a> {
    pub problem: &'a Problem,
    pub horizon: f64,
    pub steps: usize,
}

impl<'a> Transcription<'a> {
    pub fn h(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// `n (N + 1) + m N`.
    pub fn decision_dim(&self) -> usize {
        let (n, m) = (self.problem.n(), self.problem.m());
        n * (self.steps + 1) + m * self.steps
    }

    /// `n N + k`.
    pub fn constraint_dim(&self) -> usize {
        self.problem.n() * self.steps + self.problem.k()
    }

    /// Offset of `x_i` in the decision vector `(x_0, ..., x_N, u_0, ..., u_{N-1})`.
    pub fn x_offset(&self, i: usize) -> usize {
        i * self.problem.n()
    }

    pub fn u_offset(&self, i: usize) -> usize {
        self.problem.n() * (self.steps + 1) + i * self.problem.m()
    }

    fn split(&self, decision: &DVector<f64>) -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
        let (n, m) = (self.problem.n(), self.problem.m());
        let x = (0..=self.steps)
            .map(|i| decision.rows(self.x_offset(i), n).into_owned())
            .collect();
        let u = (0..self.steps)
            .map(|i| decision.rows(self.u_offset(i), m).into_owned())
            .collect();
        (x, u)
    }

    fn join(&self, x: &[DVector<f64>], u: &[DVector<f64>]) -> DVector<f64> {
        let (n, m) = (self.problem.n(), self.problem.m());
        let mut out = DVector::zeros(self.decision_dim());
        for (i, xi) in x.iter().enumerate() {
            out.rows_mut(self.x_offset(i), n).copy_from(xi);
        }
        for (i, ui) in u.iter().enumerate() {
            out.rows_mut(self.u_offset(i), m).copy_from(ui);
        }
        out
    }

    /// Left-endpoint rectangle rule `sum_i h f0(x_i, u_i)`.
    pub fn objective(&self, decision: &DVector<f64>) -> f64 {
        let (x, u) = self.split(decision);
        let h = self.h();
        (0..self.steps)
            .map(|i| h * self.problem.running_cost(&x[i], &u[i]))
            .sum()
    }

    /// Euler defects followed by `R(x_0, x_N)`.
    pub fn constraints(&self, decision: &DVector<f64>) -> DVector<f64> {
        let (x, u) = self.split(decision);
        let (n, h) = (self.problem.n(), self.h());
        let mut out = DVector::zeros(self.constraint_dim());
        for i in 0..self.steps {
            let c = &x[i + 1] - &x[i] - self.problem.dynamics(&x[i], &u[i]) * h;
            out.rows_mut(i * n, n).copy_from(&c);
        }
        let r = self.problem.terminal_residual(&x[0], &x[self.steps]);
        out.rows_mut(self.steps * n, r.len()).copy_from(&r);
        out
    }
}

/// Primal decision vector with the constraint multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct NlpIterate {
    pub decision: DVector<f64>,
    /// Multipliers of the Euler defects, `n` per step.
    pub mu: DVector<f64>,
    /// Multipliers of the terminal constraints.
    pub nu: DVector<f64>,
}

impl NlpIterate {
    /// A primal point with zero multipliers.
    pub fn from_decision(t: &Transcription, decision: DVector<f64>) -> Self {
        Self {
            decision,
            mu: DVector::zeros(t.problem.n() * t.steps),
            nu: DVector::zeros(t.problem.k()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSolution {
    /// Nodes with costates recovered from the multipliers and `u_N` from
    /// the pointwise control law.
    pub extremal: Extremal,
    pub decision: DVector<f64>,
    pub kkt_residual: f64,
    pub objective: f64,
    pub max_defect: f64,
    pub iterations: usize,
}

pub fn transcribe(p: &Problem, horizon: f64, steps: usize) -> Result<Transcription<'_>> {
    if steps < 2 {
        return Err(Error::InvalidArgument("transcription needs at least 2 steps".into()));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidArgument("T must be positive".into()));
    }
    Ok(Transcription {
        problem: p,
        horizon,
        steps,
    })
}

/// Every state node at `x_bar`, every control at `u_bar`, fixed endpoints
/// overwritten; defect multipliers at `lambda_bar` and `nu = -Gamma_bar`.
pub fn warm_start_from_static(t: &Transcription, s: &StaticSolution) -> NlpIterate {
    let p = t.problem;
    let mut x = alloc::vec![s.x_bar.clone(); t.steps + 1];
    if let Some(x0) = p.terminal().initial_state() {
        x[0] = x0.clone();
    }
    if let Some(x1) = p.terminal().final_state() {
        x[t.steps] = x1.clone();
    }
    let u = alloc::vec![s.u_bar.clone(); t.steps];
    let mut mu = DVector::zeros(p.n() * t.steps);
    for i in 0..t.steps {
        mu.rows_mut(i * p.n(), p.n()).copy_from(&s.lambda_bar);
    }
    NlpIterate {
        decision: t.join(&x, &u),
        mu,
        nu: -&s.gamma_bar,
    }
}

/// Solves the transcribed program from `init`.
pub fn solve_nlp(t: &Transcription, init: &NlpIterate, opts: &DirectOptions) -> Result<DiscreteSolution> {
    let (n, k) = (t.problem.n(), t.problem.k());
    if init.decision.len() != t.decision_dim() || init.mu.len() != n * t.steps || init.nu.len() != k {
        return Err(Error::DimensionMismatch {
            what: "direct initial iterate",
            expected: t.decision_dim() + n * t.steps + k,
            got: init.decision.len() + init.mu.len() + init.nu.len(),
        });
    }
    let all = init.decision.iter().chain(init.mu.iter()).chain(init.nu.iter());
    if !all.into_iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument("direct initial iterate is not finite".into()));
    }
    let (x, u) = t.split(&init.decision);
    let mu = (0..t.steps).map(|i| init.mu.rows(i * n, n).into_owned()).collect();
    let start = kkt::State {
        x,
        u,
        mu,
        nu: init.nu.clone(),
    };
    let (state, kkt_residual, iterations) = kkt::newton(t, start, opts)?;
    finish(t, state, kkt_residual, iterations)
}

fn finish(t: &Transcription, s: kkt::State, kkt_residual: f64, iterations: usize) -> Result<DiscreteSolution> {
    let p = t.problem;
    let nsteps = t.steps;
    let h = t.h();
    let mut lambda = Vec::with_capacity(nsteps + 1);
    let (hx0, _) = p.hamiltonian_gradients(&s.x[0], &s.mu[0], &s.u[0]);
    lambda.push(&s.mu[0] + hx0 * h);
    lambda.extend(s.mu.iter().cloned());
    let mut u = s.u.clone();
    let warm = u[nsteps - 1].clone();
    u.push(pointwise_control(p, &s.x[nsteps], &lambda[nsteps], &warm)?);
    let gamma = -&s.nu;
    let z0 = crate::linalg::vstack(&s.x[0], &lambda[0]);
    let z_t = crate::linalg::vstack(&s.x[nsteps], &lambda[nsteps]);
    let boundary = vec_inf_norm(&boundary_residual(p, &z0, &z_t, &gamma));
    let decision = t.join(&s.x, &s.u);
    let cons = t.constraints(&decision);
    let max_defect = vec_inf_norm(&cons.rows(0, p.n() * nsteps).into_owned());
    let objective = t.objective(&decision);
    Ok(DiscreteSolution {
        extremal: Extremal {
            t: Extremal::uniform_grid(t.horizon, nsteps),
            x: s.x,
            lambda,
            u,
            gamma,
            boundary_residual: boundary,
            iterations,
        },
        decision,
        kkt_residual,
        objective,
        max_defect,
        iterations,
    })
}
