//! JSON reports. Keys come out in field declaration order.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use turnpike_core::model::AssumptionReport;
use turnpike_core::riccati::are_residual;
use turnpike_core::{lq_bound_constants, turnpike_report, Extremal, LqBoundConstants, TurnpikeReport};

use crate::config::RunConfig;
use crate::pipeline::{DirectStats, Prepared};

fn vec_of(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct StaticJson {
    pub x_bar: Vec<f64>,
    pub u_bar: Vec<f64>,
    pub lambda_bar: Vec<f64>,
    pub gamma_bar: Vec<f64>,
    pub kkt_residual: f64,
    pub defect: f64,
}

impl StaticJson {
    pub fn new(prep: &Prepared) -> Self {
        let s = &prep.static_solution;
        Self {
            x_bar: vec_of(&s.x_bar),
            u_bar: vec_of(&s.u_bar),
            lambda_bar: vec_of(&s.lambda_bar),
            gamma_bar: vec_of(&s.gamma_bar),
            kkt_residual: s.kkt_residual,
            defect: s.defect,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AreResiduals {
    #[serde(rename = "E_minus")]
    pub e_minus: f64,
    #[serde(rename = "E_plus")]
    pub e_plus: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RiccatiJson {
    #[serde(rename = "E_minus")]
    pub e_minus: Vec<Vec<f64>>,
    #[serde(rename = "E_plus")]
    pub e_plus: Vec<Vec<f64>>,
    #[serde(rename = "C2")]
    pub c2: f64,
    pub spectrum: Vec<Complex>,
    pub hyperbolicity_margin: f64,
    pub are_residuals: AreResiduals,
    pub warnings: Vec<String>,
}

impl RiccatiJson {
    pub fn new(prep: &Prepared) -> Self {
        let split = &prep.splitting;
        let mut spectrum: Vec<Complex> = prep
            .spectrum
            .eigenvalues
            .iter()
            .map(|z| Complex { re: z.re, im: z.im })
            .collect();
        spectrum.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Self {
            e_minus: rows_of(&split.e_minus),
            e_plus: rows_of(&split.e_plus),
            c2: split.c2,
            spectrum,
            hyperbolicity_margin: prep.spectrum.margin,
            are_residuals: AreResiduals {
                e_minus: are_residual(&prep.hamiltonian, &prep.linearization, &split.e_minus),
                e_plus: are_residual(&prep.hamiltonian, &prep.linearization, &split.e_plus),
            },
            warnings: split.warnings.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionsJson {
    pub kalman_rank: usize,
    pub kalman_ok: bool,
    pub huu_negdef: bool,
    pub huu_min_eig: f64,
    pub w_posdef: bool,
    pub w_min_eig: f64,
    pub r_full_rank: bool,
    pub r_rank: usize,
}

impl From<&AssumptionReport> for AssumptionsJson {
    fn from(a: &AssumptionReport) -> Self {
        Self {
            kalman_rank: a.kalman_rank,
            kalman_ok: a.kalman_ok,
            huu_negdef: a.huu_negdef,
            huu_min_eig: a.huu_min_eig,
            w_posdef: a.w_posdef,
            w_min_eig: a.w_min_eig,
            r_full_rank: a.r_full_rank,
            r_rank: a.r_rank,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectJson {
    pub objective: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
}

impl From<&DirectStats> for DirectJson {
    fn from(d: &DirectStats) -> Self {
        Self {
            objective: d.objective,
            kkt_residual: d.kkt_residual,
            iterations: d.iterations,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AveragesJson {
    pub x_avg: Vec<f64>,
    pub lambda_avg: Vec<f64>,
    pub u_avg: Vec<f64>,
    pub cost_avg: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LqBoundsJson {
    pub initial_gap: f64,
    pub final_gap: f64,
    pub e_minus_norm: f64,
    pub e_plus_norm: f64,
    pub control_gain: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
}

impl From<&LqBoundConstants> for LqBoundsJson {
    fn from(b: &LqBoundConstants) -> Self {
        Self {
            initial_gap: b.initial_gap,
            final_gap: b.final_gap,
            e_minus_norm: b.e_minus_norm,
            e_plus_norm: b.e_plus_norm,
            control_gain: b.control_gain,
            c1: b.c1(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TurnpikeJson {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub steps: usize,
    #[serde(rename = "C2")]
    pub c2: f64,
    pub conservative_rate: f64,
    #[serde(rename = "C1_fit")]
    pub c1_fit: f64,
    pub envelope_ok: bool,
    pub mid_third_max: f64,
    pub averages: AveragesJson,
    pub crossings: usize,
    pub defect: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lq_bounds: Option<LqBoundsJson>,
    pub t: Vec<f64>,
    pub deviation: Vec<f64>,
}

impl TurnpikeJson {
    pub fn new(prep: &Prepared, e: &Extremal) -> Self {
        let r: TurnpikeReport = turnpike_report(e, &prep.problem, &prep.static_solution, &prep.splitting);
        let bounds = lq_bound_constants(&prep.problem, &prep.static_solution, &prep.splitting);
        Self {
            horizon: e.horizon(),
            steps: e.steps(),
            c2: r.c2,
            conservative_rate: r.conservative_rate,
            c1_fit: r.c1_fit,
            envelope_ok: r.envelope_ok,
            mid_third_max: r.mid_third_max,
            averages: AveragesJson {
                x_avg: vec_of(&r.averages.x_avg),
                lambda_avg: vec_of(&r.averages.lambda_avg),
                u_avg: vec_of(&r.averages.u_avg),
                cost_avg: r.averages.cost_avg,
            },
            crossings: r.crossings,
            defect: r.defect,
            lq_bounds: bounds.as_ref().map(LqBoundsJson::from),
            t: r.t,
            deviation: r.deviation,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverJson {
    pub method: String,
    pub iterations: usize,
    pub boundary_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direct: Option<DirectJson>,
}

/// Full report of `run`.
#[derive(Debug, Clone, Serialize)]
pub struct RunJson {
    pub problem: String,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub steps: usize,
    #[serde(rename = "static")]
    pub static_solution: StaticJson,
    pub assumptions: AssumptionsJson,
    pub riccati: RiccatiJson,
    pub solver: SolverJson,
    pub turnpike: TurnpikeJson,
}

impl RunJson {
    pub fn new(prep: &Prepared, cfg: &RunConfig, e: &Extremal, direct: Option<&DirectStats>) -> Self {
        Self {
            problem: cfg.problem.clone(),
            horizon: cfg.horizon,
            steps: cfg.steps,
            static_solution: StaticJson::new(prep),
            assumptions: (&prep.assumptions).into(),
            riccati: RiccatiJson::new(prep),
            solver: SolverJson {
                method: cfg.method.to_string(),
                iterations: e.iterations,
                boundary_residual: e.boundary_residual,
                direct: direct.map(DirectJson::from),
            },
            turnpike: TurnpikeJson::new(prep, e),
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}
