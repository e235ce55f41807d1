//! `compare` and `sweep`: several solves of one problem, summarized as CSV.

use std::io::Write;
use std::thread;

use serde::Serialize;
use turnpike_core::Extremal;

use crate::config::{Method, RunConfig};
use crate::error::{CliError, Result};
use crate::pipeline::{self, Prepared};
use crate::report::TurnpikeJson;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub run_a: String,
    pub run_b: String,
    pub converged_a: bool,
    pub converged_b: bool,
    pub iterations_a: Option<usize>,
    pub iterations_b: Option<usize>,
    /// Sup over common nodes of `|x_a - x_b|_inf`.
    pub state_distance: Option<f64>,
    /// Same with `lambda` and `u` included.
    pub full_distance: Option<f64>,
}

fn label(cfg: &RunConfig) -> String {
    format!("{}/N={}", cfg.method, cfg.steps)
}

/// Solves every config and measures all pairwise distances. Grids of
/// different resolution are compared on the coarser one.
pub fn compare(prep: &Prepared, configs: &[RunConfig]) -> Result<Vec<CompareRow>> {
    if configs.len() < 2 {
        return Err(CliError::Config("compare needs at least two runs".into()));
    }
    if configs.iter().any(|c| c.horizon != configs[0].horizon) {
        return Err(CliError::Config("compared runs must share T".into()));
    }
    for c in configs {
        c.validate()?;
    }
    let runs: Vec<Option<Extremal>> = configs
        .iter()
        .map(|c| pipeline::solve(prep, c).ok().map(|s| s.extremal))
        .collect();
    let mut rows = Vec::new();
    for i in 0..configs.len() {
        for j in i + 1..configs.len() {
            let (a, b) = (&runs[i], &runs[j]);
            let common = match (a, b) {
                (Some(a), Some(b)) => Extremal::common_grid(a, b).ok(),
                _ => None,
            };
            rows.push(CompareRow {
                run_a: label(&configs[i]),
                run_b: label(&configs[j]),
                converged_a: a.is_some(),
                converged_b: b.is_some(),
                iterations_a: a.as_ref().map(|e| e.iterations),
                iterations_b: b.as_ref().map(|e| e.iterations),
                state_distance: common.as_ref().and_then(|(a, b)| a.state_distance(b).ok()),
                full_distance: common.as_ref().and_then(|(a, b)| a.full_distance(b).ok()),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub steps: usize,
    pub method: String,
    pub converged: bool,
    pub iterations: Option<usize>,
    #[serde(rename = "C2")]
    pub c2: Option<f64>,
    #[serde(rename = "C1_fit")]
    pub c1_fit: Option<f64>,
    pub mid_third_max: Option<f64>,
    pub crossings: Option<usize>,
    /// `|x_avg - x_bar|`.
    pub x_avg_error: Option<f64>,
    pub cost_avg: Option<f64>,
    pub error: String,
}

fn sweep_one(cfg: &RunConfig) -> SweepRow {
    let mut row = SweepRow {
        horizon: cfg.horizon,
        steps: cfg.steps,
        method: cfg.method.to_string(),
        converged: false,
        iterations: None,
        c2: None,
        c1_fit: None,
        mid_third_max: None,
        crossings: None,
        x_avg_error: None,
        cost_avg: None,
        error: String::new(),
    };
    let outcome = pipeline::prepare_id(&cfg.problem).and_then(|prep| {
        let solved = pipeline::solve(&prep, cfg)?;
        Ok((TurnpikeJson::new(&prep, &solved.extremal), prep, solved))
    });
    match outcome {
        Ok((r, prep, solved)) => {
            let x_bar = &prep.static_solution.x_bar;
            let gap = r.averages.x_avg.iter().zip(x_bar.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
            row.converged = true;
            row.iterations = Some(solved.extremal.iterations);
            row.c2 = Some(r.c2);
            row.c1_fit = Some(r.c1_fit);
            row.mid_third_max = Some(r.mid_third_max);
            row.crossings = Some(r.crossings);
            row.x_avg_error = Some(gap.sqrt());
            row.cost_avg = Some(r.averages.cost_avg);
        }
        Err(e) => row.error = e.to_string(),
    }
    row
}

/// One solve per config on scoped worker threads; rows keep input order.
pub fn sweep(configs: &[RunConfig], workers: usize) -> Vec<SweepRow> {
    let workers = workers.max(1);
    let mut rows: Vec<Option<SweepRow>> = vec![None; configs.len()];
    for (chunk_cfg, chunk_out) in configs.chunks(workers).zip(rows.chunks_mut(workers)) {
        thread::scope(|scope| {
            for (cfg, slot) in chunk_cfg.iter().zip(chunk_out.iter_mut()) {
                scope.spawn(move || *slot = Some(sweep_one(cfg)));
            }
        });
    }
    rows.into_iter().map(|r| r.expect("every worker fills its slot")).collect()
}

/// Configs for `sweep`: one per horizon, `steps` fixed or 100 per unit time.
pub fn sweep_configs(
    problem: &str,
    method: Method,
    horizons: &[f64],
    steps: Option<usize>,
    template: &RunConfig,
) -> Vec<RunConfig> {
    horizons
        .iter()
        .map(|&h| RunConfig {
            problem: problem.to_string(),
            method,
            horizon: h,
            steps: steps.unwrap_or_else(|| crate::config::default_steps(h)),
            ..template.clone()
        })
        .collect()
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CliError::io("<csv output>", e))?;
    Ok(())
}
