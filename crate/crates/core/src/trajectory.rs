use alloc::vec::Vec;
use nalgebra::DVector;

use crate::error::{Error, Result};

/// Extremal sampled on a uniform grid `0 = t_0 < ... < t_N = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Extremal {
    pub t: Vec<f64>,
    pub x: Vec<DVector<f64>>,
    pub lambda: Vec<DVector<f64>>,
    pub u: Vec<DVector<f64>>,
    pub gamma: DVector<f64>,
    pub boundary_residual: f64,
    /// Newton iterations spent by the solver that produced it.
    pub iterations: usize,
}

impl Extremal {
    pub fn uniform_grid(horizon: f64, steps: usize) -> Vec<f64> {
        (0..=steps)
            .map(|i| {
                if i == steps {
                    horizon
                } else {
                    horizon * i as f64 / steps as f64
                }
            })
            .collect()
    }

    /// The extremal sitting at one point for the whole horizon.
    pub fn constant(
        x: &DVector<f64>,
        lambda: &DVector<f64>,
        u: &DVector<f64>,
        gamma: DVector<f64>,
        horizon: f64,
        steps: usize,
    ) -> Self {
        let t = Self::uniform_grid(horizon, steps);
        let len = t.len();
        Self {
            t,
            x: alloc::vec![x.clone(); len],
            lambda: alloc::vec![lambda.clone(); len],
            u: alloc::vec![u.clone(); len],
            gamma,
            boundary_residual: 0.0,
            iterations: 0,
        }
    }

    pub fn steps(&self) -> usize {
        self.t.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.t[self.t.len() - 1]
    }

    pub fn n(&self) -> usize {
        self.x[0].len()
    }

    pub fn m(&self) -> usize {
        self.u[0].len()
    }

    /// Keeps every `stride`-th node.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        if stride == 0 || !self.steps().is_multiple_of(stride) {
            return Err(Error::InvalidArgument(alloc::format!(
                "cannot subsample {} steps with stride {stride}",
                self.steps()
            )));
        }
        let pick = |v: &Vec<DVector<f64>>| v.iter().step_by(stride).cloned().collect();
        Ok(Self {
            t: self.t.iter().step_by(stride).copied().collect(),
            x: pick(&self.x),
            lambda: pick(&self.lambda),
            u: pick(&self.u),
            gamma: self.gamma.clone(),
            boundary_residual: self.boundary_residual,
            iterations: self.iterations,
        })
    }

    /// Brings two extremals on the same horizon to the coarser of their grids.
    pub fn common_grid(a: &Self, b: &Self) -> Result<(Self, Self)> {
        if (a.horizon() - b.horizon()).abs() > 1e-12 * a.horizon().abs().max(1.0) {
            return Err(Error::InvalidArgument("extremals have different horizons".into()));
        }
        let (na, nb) = (a.steps(), b.steps());
        if na >= nb {
            Ok((a.subsample(na / nb.max(1)).and_then(|s| check(s, nb))?, b.clone()))
        } else {
            Ok((a.clone(), b.subsample(nb / na.max(1)).and_then(|s| check(s, na))?))
        }
    }

    /// Largest `|x_a(t_i) - x_b(t_i)|_inf` over the grid.
    pub fn state_distance(&self, other: &Self) -> Result<f64> {
        let (a, b) = Self::common_grid(self, other)?;
        Ok(max_gap(&a.x, &b.x))
    }

    /// Largest infinity-norm gap over states, costates and controls.
    pub fn full_distance(&self, other: &Self) -> Result<f64> {
        let (a, b) = Self::common_grid(self, other)?;
        Ok(max_gap(&a.x, &b.x)
            .max(max_gap(&a.lambda, &b.lambda))
            .max(max_gap(&a.u, &b.u)))
    }
}

fn check(e: Extremal, steps: usize) -> Result<Extremal> {
    if e.steps() == steps {
        Ok(e)
    } else {
        Err(Error::InvalidArgument("step counts are not multiples of each other".into()))
    }
}

fn max_gap(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q).amax())
        .fold(0.0, f64::max)
}
