//! Turnpike computations for long-horizon optimal control problems.
//!
//! The pipeline runs: static problem, linearization at the static point,
//! Riccati splitting of the Hamiltonian matrix, then an extremal by
//! shooting or direct transcription, and finally the turnpike diagnostics
//! on that extremal.
//!
//! The crate is `no_std` with `alloc`; file formats and the command line
//! live in the companion `turnpike` crate.

#![no_std]
// `!(a > b)` is used on purpose so that NaN falls into the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
#[macro_use]
extern crate std;

pub mod analysis;
pub mod direct;
pub mod error;
pub mod fd;
pub mod linalg;
pub mod model;
pub mod registry;
pub mod riccati;
pub mod shooting;
pub mod static_solver;
mod trajectory;

pub use analysis::{
    count_crossings, deviation_profile, fit_envelope, lq_bound_constants, time_averages,
    turnpike_report, Averages, EnvelopeFit, LqBoundConstants, TurnpikeReport,
};
pub use direct::{solve_nlp, transcribe, warm_start_from_static, DirectOptions, DiscreteSolution, Transcription};
pub use error::{Error, Result};
pub use model::{
    assemble_abw, check_assumptions, eval_hamiltonian, hessian_blocks, AssumptionReport,
    ExtremalPoint, HamiltonianBlocks, LinearQuadratic, LinearizationData, Model, Problem,
    Terminal, TerminalKind,
};
pub use riccati::{
    build_hamiltonian_matrix, solve_splitting, verify_spectrum, HamiltonianMatrix,
    HyperbolicSplitting, SpectrumReport,
};
pub use shooting::{
    build_wellposedness_matrix, classic_shoot, integrate_extremal, midpoint_shoot,
    pointwise_control, ShootingOptions, WellPosednessMatrix,
};
pub use static_solver::{
    compute_defect, compute_gamma_bar, solve_static, solve_static_lq, StaticSolution,
};
pub use trajectory::Extremal;
