//! Static solve, linearization, Riccati splitting, then one of the three
//! solvers.

use nalgebra::DVector;
use turnpike_core::model::{AssumptionReport, LinearizationData, Problem};
use turnpike_core::riccati::SpectrumReport;
use turnpike_core::{
    assemble_abw, build_hamiltonian_matrix, check_assumptions, classic_shoot, hessian_blocks,
    midpoint_shoot, solve_nlp, solve_static, solve_static_lq, transcribe, verify_spectrum,
    warm_start_from_static, ExtremalPoint, Extremal, HamiltonianMatrix, HyperbolicSplitting,
    StaticSolution,
};

use crate::config::{Method, RunConfig};
use crate::error::Result;
use crate::problem;

pub struct Prepared {
    pub problem: Problem,
    pub static_solution: StaticSolution,
    pub linearization: LinearizationData,
    pub assumptions: AssumptionReport,
    pub hamiltonian: HamiltonianMatrix,
    pub spectrum: SpectrumReport,
    pub splitting: HyperbolicSplitting,
}

/// Static solution: the exact linear solve for LQ problems, Newton from
/// zero otherwise.
pub fn static_solution(p: &Problem) -> Result<StaticSolution> {
    Ok(if p.linear_quadratic().is_some() {
        solve_static_lq(p)?
    } else {
        solve_static(p, &ExtremalPoint::zeros(p.n(), p.m()))?
    })
}

pub fn prepare(p: Problem) -> Result<Prepared> {
    let s = static_solution(&p)?;
    let d = assemble_abw(&hessian_blocks(&p, &s.point())?)?;
    let assumptions = check_assumptions(&d, &p, &s);
    let h = build_hamiltonian_matrix(&d, &d.huu)?;
    let spectrum = verify_spectrum(&h);
    let splitting = turnpike_core::solve_splitting(&h, &d, &d.huu)?;
    Ok(Prepared {
        problem: p,
        static_solution: s,
        linearization: d,
        assumptions,
        hamiltonian: h,
        spectrum,
        splitting,
    })
}

pub fn prepare_id(id: &str) -> Result<Prepared> {
    prepare(problem::resolve(id)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectStats {
    pub objective: f64,
    pub kkt_residual: f64,
    pub max_defect: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solved {
    pub extremal: Extremal,
    pub direct: Option<DirectStats>,
}

/// Runs the configured solver. Classic shooting starts from zero; the
/// other two start from the static solution.
pub fn solve(prep: &Prepared, cfg: &RunConfig) -> Result<Solved> {
    cfg.validate()?;
    let p = &prep.problem;
    let s = &prep.static_solution;
    match cfg.method {
        Method::ShootClassic => {
            let e = classic_shoot(
                p,
                cfg.horizon,
                cfg.steps,
                &DVector::zeros(2 * p.n()),
                &DVector::zeros(p.k()),
                &cfg.shooting,
            )?;
            Ok(Solved { extremal: e, direct: None })
        }
        Method::ShootMid => {
            let e = midpoint_shoot(p, cfg.horizon, cfg.steps, s, &cfg.shooting)?;
            Ok(Solved { extremal: e, direct: None })
        }
        Method::Direct => {
            let t = transcribe(p, cfg.horizon, cfg.steps)?;
            let sol = solve_nlp(&t, &warm_start_from_static(&t, s), &cfg.direct)?;
            Ok(Solved {
                direct: Some(DirectStats {
                    objective: sol.objective,
                    kkt_residual: sol.kkt_residual,
                    max_defect: sol.max_defect,
                    iterations: sol.iterations,
                }),
                extremal: sol.extremal,
            })
        }
    }
}
