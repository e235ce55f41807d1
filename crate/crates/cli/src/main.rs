use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use turnpike::batch;
use turnpike::config::{default_steps, Method, RunConfig};
use turnpike::error::{CliError, Result};
use turnpike::pipeline;
use turnpike::report::{self, DirectJson, RiccatiJson, RunJson, StaticJson, TurnpikeJson};
use turnpike::trajectory_csv;

#[derive(Parser)]
#[command(name = "turnpike", version, about = "Long-horizon optimal control and turnpike diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the static problem and print it as JSON.
    Static {
        #[arg(long)]
        problem: String,
    },
    /// Riccati splitting at the static point, as JSON.
    Riccati {
        #[arg(long)]
        problem: String,
    },
    /// Compute an extremal and write it as trajectory CSV.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        /// Trajectory CSV path; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Where the direct method's JSON summary goes; stderr when omitted.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Turnpike report for a trajectory CSV.
    VerifyTurnpike {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        problem: String,
    },
    /// Pairwise distances between solvers on one horizon, as CSV.
    Compare {
        #[arg(long)]
        problem: String,
        #[arg(long, value_delimiter = ',', default_value = "direct,shoot-mid")]
        methods: Vec<String>,
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long)]
        steps: Option<usize>,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Solve and verify over several horizons in parallel, as CSV.
    Sweep {
        #[arg(long)]
        problem: String,
        #[arg(long = "T", value_delimiter = ',', required = true)]
        horizons: Vec<f64>,
        #[arg(long, default_value = "shoot-mid")]
        method: String,
        /// Fixed step count; 100 per unit time when omitted.
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Full pipeline: writes the trajectory CSV and a JSON report.
    Run {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        trajectory: Option<PathBuf>,
        /// JSON report path; stdout when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    problem: String,
    #[arg(long, default_value = "shoot-mid")]
    method: String,
    #[arg(long = "T")]
    horizon: f64,
    /// Defaults to 100 steps per unit time.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    anchor_fraction: f64,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Args)]
struct TolArgs {
    /// Shooting residual tolerance.
    #[arg(long)]
    shoot_tol: Option<f64>,
    /// KKT tolerance of the direct method.
    #[arg(long)]
    kkt_tol: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
}

impl TolArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(t) = self.shoot_tol {
            cfg.shooting.tolerance = t;
        }
        if let Some(t) = self.kkt_tol {
            cfg.direct.tolerance = t;
        }
        if let Some(k) = self.max_iterations {
            cfg.shooting.max_iterations = k;
            cfg.direct.max_iterations = k;
        }
    }
}

fn steps_for(horizon: f64, steps: Option<usize>) -> usize {
    if horizon > 0.0 && horizon.is_finite() {
        steps.unwrap_or_else(|| default_steps(horizon))
    } else {
        steps.unwrap_or(2)
    }
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::new(
            self.problem.clone(),
            self.method.parse::<Method>()?,
            self.horizon,
            steps_for(self.horizon, self.steps),
        );
        cfg.shooting.anchor_fraction = self.anchor_fraction;
        self.tol.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            writeln!(w, "{text}").and_then(|_| w.flush()).map_err(|e| CliError::io(p, e))
        }
        None => writeln!(io::stdout().lock(), "{text}").map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn write_trajectory(path: Option<&Path>, e: &turnpike_core::Extremal) -> Result<()> {
    match path {
        Some(p) => trajectory_csv::write(e, create(p)?),
        None => trajectory_csv::write(e, io::stdout().lock()),
    }
}

fn write_rows<T: serde::Serialize>(path: Option<&Path>, rows: &[T]) -> Result<()> {
    match path {
        Some(p) => batch::write_csv(rows, create(p)?),
        None => batch::write_csv(rows, io::stdout().lock()),
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Static { problem } => {
            let prep = pipeline::prepare_id(&problem)?;
            write_text(None, &report::to_json(&StaticJson::new(&prep)))
        }
        Command::Riccati { problem } => {
            let prep = pipeline::prepare_id(&problem)?;
            write_text(None, &report::to_json(&RiccatiJson::new(&prep)))
        }
        Command::Solve { run, output, summary } => {
            let cfg = run.config()?;
            let prep = pipeline::prepare_id(&cfg.problem)?;
            let solved = pipeline::solve(&prep, &cfg)?;
            write_trajectory(output.as_deref(), &solved.extremal)?;
            if let Some(d) = &solved.direct {
                let text = report::to_json(&DirectJson::from(d));
                match summary.as_deref() {
                    Some(p) => write_text(Some(p), &text)?,
                    None => eprintln!("{text}"),
                }
            }
            Ok(())
        }
        Command::VerifyTurnpike { input, problem } => {
            let prep = pipeline::prepare_id(&problem)?;
            let file = File::open(&input).map_err(|e| CliError::io(&input, e))?;
            let e = trajectory_csv::read(io::BufReader::new(file))?;
            if e.n() != prep.problem.n() || e.m() != prep.problem.m() {
                return Err(CliError::Trajectory(format!(
                    "trajectory has n = {}, m = {} but problem has n = {}, m = {}",
                    e.n(),
                    e.m(),
                    prep.problem.n(),
                    prep.problem.m()
                )));
            }
            write_text(None, &report::to_json(&TurnpikeJson::new(&prep, &e)))
        }
        Command::Compare { problem, methods, horizon, steps, tol, output } => {
            let prep = pipeline::prepare_id(&problem)?;
            let configs = methods
                .iter()
                .map(|m| {
                    let mut cfg = RunConfig::new(problem.clone(), m.parse()?, horizon, steps_for(horizon, steps));
                    tol.apply(&mut cfg);
                    Ok(cfg)
                })
                .collect::<Result<Vec<_>>>()?;
            let rows = batch::compare(&prep, &configs)?;
            write_rows(output.as_deref(), &rows)
        }
        Command::Sweep { problem, horizons, method, steps, threads, tol, output } => {
            let mut template = RunConfig::new(problem.clone(), method.parse()?, 1.0, 2);
            tol.apply(&mut template);
            let configs = batch::sweep_configs(&problem, template.method, &horizons, steps, &template);
            let workers = threads.unwrap_or_else(|| {
                std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
            });
            let rows = batch::sweep(&configs, workers);
            write_rows(output.as_deref(), &rows)
        }
        Command::Run { run, trajectory, report: report_path } => {
            let cfg = run.config()?;
            let prep = pipeline::prepare_id(&cfg.problem)?;
            let solved = pipeline::solve(&prep, &cfg)?;
            if let Some(p) = trajectory.as_deref() {
                write_trajectory(Some(p), &solved.extremal)?;
            }
            let json = RunJson::new(&prep, &cfg, &solved.extremal, solved.direct.as_ref());
            write_text(report_path.as_deref(), &report::to_json(&json))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
