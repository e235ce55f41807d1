//! Built-in problems.

use alloc::boxed::Box;
use alloc::vec;
use nalgebra::{dmatrix, dvector, DMatrix};

use crate::error::{Error, Result};
use crate::model::{ControlAffineQuadratic, LinearQuadratic, Problem, Terminal};

pub const IDS: [&str; 2] = ["ex1", "ex2"];

/// Looks up a built-in problem by id.
pub fn by_id(id: &str) -> Result<Problem> {
    match id {
        "ex1" => Ok(oscillator_lq()),
        "ex2" => Ok(cubic_oscillator()),
        other => Err(Error::InvalidArgument(alloc::format!(
            "unknown problem id '{other}' (known: ex1, ex2)"
        ))),
    }
}

/// Harmonic oscillator `x1' = x2`, `x2' = -x1 + u` from `x(0) = (0, 0)` with
/// free final point and cost `1/2 ((x1 - 2)^2 + (x2 - 7)^2 + u^2)`.
pub fn oscillator_lq() -> Problem {
    Problem::new("ex1", oscillator_lq_model(), Terminal::FixedInitial { x0: dvector![0.0, 0.0] })
        .expect("ex1 is well formed")
}

pub fn oscillator_lq_model() -> LinearQuadratic {
    LinearQuadratic::new(
        dmatrix![0.0, 1.0; -1.0, 0.0],
        dmatrix![0.0; 1.0],
        DMatrix::identity(2, 2),
        dmatrix![1.0],
        dvector![2.0, 7.0],
        dvector![0.0],
    )
    .expect("ex1 data is valid")
}

/// `x1' = x2`, `x2' = 1 - x1 + x2^3 + u` steered from `(1, 1)` to `(3, 0)`
/// with cost `1/2 ((x1 - 1/2)^2 + (x2 - 1/2)^2 + (u - 1)^2)`.
pub fn cubic_oscillator() -> Problem {
    Problem::new(
        "ex2",
        cubic_oscillator_model(),
        Terminal::FixedBoth {
            x0: dvector![1.0, 1.0],
            x1: dvector![3.0, 0.0],
        },
    )
    .expect("ex2 is well formed")
}

pub fn cubic_oscillator_model() -> ControlAffineQuadratic {
    ControlAffineQuadratic::new(
        Box::new(|x| dvector![x[1], 1.0 - x[0] + x[1] * x[1] * x[1]]),
        vec![Box::new(|_x| dvector![0.0, 1.0])],
        DMatrix::identity(2, 2),
        dmatrix![1.0],
        dvector![0.5, 0.5],
        dvector![1.0],
    )
    .expect("ex2 data is valid")
    .with_jacobians(
        Box::new(|x| dmatrix![0.0, 1.0; -1.0, 3.0 * x[1] * x[1]]),
        vec![Box::new(|_x| DMatrix::zeros(2, 2))],
    )
    .with_curvature(Box::new(|x, lambda, _u| {
        dmatrix![0.0, 0.0; 0.0, 6.0 * lambda[1] * x[1]]
    }))
}
