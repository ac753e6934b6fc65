//! Command-line front end: `run`, `check`, `laplace` and `demo`.
//!
//! [`run`] takes the arguments and returns what would be printed together
//! with the exit code, so the binary is a thin wrapper and the commands can
//! be exercised in tests. Exit codes are 0 when everything passes, 1 when a
//! law check fails and 2 for usage or input errors.

pub mod catalog;
pub mod suites;

use std::ffi::OsString;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::coalg::SystemSpec;
use crate::error::{Error, Result};
use crate::laplace::{run_stack, LaplaceModel};
use crate::monad::{Categorical, Dist, Rng};
use crate::poly::{Point, Space, Time};
use crate::random_bundle::{ou_csv, MeasurePreservingSystem};
use crate::report::SuiteReport;

use suites::BayesSpec;

#[derive(Debug, Parser)]
#[command(name = "polydyn", version, about = "Run and law-check open dynamical systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a system spec and print its state laws as CSV.
    Run {
        /// Path to a JSON system spec, or `builtin:<name>`.
        #[arg(long)]
        spec: String,
        /// Name or index of the section to close the system with.
        #[arg(long)]
        section: Option<String>,
        /// Start from this state instead of the file's initial law.
        #[arg(long)]
        init: Option<String>,
        #[arg(long, default_value_t = 10)]
        horizon: u64,
        /// Sample this many trajectories instead of propagating laws exactly.
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Run a law suite and print a JSON report.
    Check {
        /// flow, measure, rds, bundle, comonoid, bayes, opindex or all.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Spec for the flow, measure and bayes suites.
        #[arg(long)]
        spec: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        /// Steps for flow pairs and trace comparisons.
        #[arg(long, default_value_t = 6)]
        horizon: u64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Run a Laplace predictive stack and print per-level means and free
    /// energies as CSV.
    Laplace {
        #[arg(long, default_value = "builtin:laplace_1d")]
        spec: String,
        /// Ticks to run; defaults to the model's own count.
        #[arg(long)]
        horizon: Option<u64>,
        /// Override the model's learning rate.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Bundled demonstrations: `ou`, `laplace` or `stack`.
    Demo {
        #[arg(default_value = "ou")]
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long)]
        out: Option<String>,
    },
}

/// What a command printed and how it exits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Outcome {
        Outcome { code: 0, stdout, stderr: String::new() }
    }

    fn error(e: &Error) -> Outcome {
        let diag = json!({"error": e.kind(), "message": e.to_string()});
        Outcome { code: 2, stdout: String::new(), stderr: format!("{diag}\n") }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome::ok(text)
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match execute(cli.command) {
        Ok(o) => o,
        Err(e) => Outcome::error(&e),
    }
}

fn execute(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Run { spec, section, init, horizon, samples, seed, out } => {
            let spec = catalog::load_text(&spec)?.parse::<SystemSpec>()?;
            let csv = run_csv(&spec, section.as_deref(), init.as_deref(), horizon, samples, seed)?;
            emit(csv, out.as_deref(), 0)
        }
        Command::Check { suite, spec, tol, horizon, out } => {
            let reports = check(&suite, spec.as_deref(), tol, horizon)?;
            let passed = reports.iter().all(|r| r.passed);
            let body = json!({"passed": passed, "suites": reports});
            let text = serde_json::to_string_pretty(&body).expect("reports serialize") + "\n";
            emit(text, out.as_deref(), if passed { 0 } else { 1 })
        }
        Command::Laplace { spec, horizon, lambda, out } => {
            let mut model = LaplaceModel::from_json(&catalog::load_text(&spec)?)?;
            if let Some(l) = lambda {
                model.config.lambda = l;
                model.config.validate()?;
            }
            let steps = horizon.unwrap_or(model.steps);
            emit(laplace_csv(&model, steps)?, out.as_deref(), 0)
        }
        Command::Demo { name, seed, horizon, out } => {
            let text = match name.as_str() {
                "ou" => ou_csv(1.0, 0.5, 1.0, 0.01, horizon.unwrap_or(1000) as usize, seed)?,
                "laplace" | "stack" => {
                    let builtin = if name == "laplace" { "builtin:laplace_1d" } else { "builtin:laplace_stack" };
                    let model = LaplaceModel::from_json(&catalog::load_text(builtin)?)?;
                    laplace_csv(&model, horizon.unwrap_or(model.steps))?
                }
                other => return Err(Error::Parse(format!("unknown demo {other:?}; expected ou, laplace or stack"))),
            };
            emit(text, out.as_deref(), 0)
        }
    }
}

fn emit(text: String, out: Option<&str>, code: i32) -> Result<Outcome> {
    match out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| Error::Parse(format!("cannot write {path}: {e}")))?;
            Ok(Outcome { code, stdout: String::new(), stderr: String::new() })
        }
        None => Ok(Outcome { code, stdout: text, stderr: String::new() }),
    }
}

fn csv_text(header: Vec<String>, rows: Vec<Vec<String>>) -> Result<String> {
    let wrap = |e: csv::Error| Error::Invalid(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).map_err(wrap)?;
    for row in rows {
        w.write_record(&row).map_err(wrap)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

/// Columns for a point: its real coordinates when it has any, otherwise its
/// key as a single column.
fn point_cells(p: &Point) -> Vec<String> {
    match p.flatten_reals() {
        Some(xs) if !xs.is_empty() => xs.iter().map(ToString::to_string).collect(),
        _ => vec![p.key()],
    }
}

fn point_header(prefix: &str, p: &Point) -> Vec<String> {
    match p.flatten_reals() {
        Some(xs) if !xs.is_empty() => (0..xs.len()).map(|k| format!("{prefix}_{k}")).collect(),
        _ => vec![prefix.to_string()],
    }
}

/// Empirical state laws from `n` trajectories.
fn sampled_laws(cl: &crate::coalg::ClosedSystem, init: &Dist, horizon: u64, n: usize, seed: u64) -> Result<Vec<Dist>> {
    let mut rng = Rng::seed(seed);
    let mut hits: Vec<Vec<(Point, f64)>> = vec![Vec::with_capacity(n); horizon as usize + 1];
    let w = 1.0 / n as f64;
    for _ in 0..n {
        let mut s = init.sample(&mut rng);
        for (t, row) in hits.iter_mut().enumerate() {
            if t > 0 {
                s = cl.step(Time(1), &s)?.sample(&mut rng);
            }
            row.push((s.clone(), w));
        }
    }
    hits.into_iter().map(|row| Categorical::normalized(row).map(Dist::from_categorical)).collect()
}

/// The trajectory of `spec` closed by the chosen section.
///
/// When every state law is a point the columns are `step,t`, the state and
/// the exposed position; on finite state spaces they are the state
/// probabilities; otherwise the state means.
pub fn run_csv(spec: &SystemSpec, section: Option<&str>, init: Option<&str>, horizon: u64, samples: usize, seed: u64) -> Result<String> {
    let sys = &spec.system;
    let sigma = match section {
        None => spec.sections.first().ok_or_else(|| Error::Parse("spec lists no sections".into()))?,
        Some(key) => spec
            .sections
            .iter()
            .find(|s| s.name() == key)
            .or_else(|| key.parse::<usize>().ok().and_then(|k| spec.sections.get(k)))
            .ok_or_else(|| Error::Parse(format!("no section named {key:?}")))?,
    };
    let init = match init {
        Some(key) => Dist::dirac(sys.states().point_from_key(key)?),
        None => spec.init.clone().ok_or_else(|| Error::Parse("spec has no \"init\"; pass --init".into()))?,
    };
    let cl = sys.closure(sigma)?;
    let laws = if samples > 0 { sampled_laws(&cl, &init, horizon, samples, seed)? } else { cl.laws(&init, horizon)? };
    let clock = sys.time();
    let lead = |k: usize| vec![k.to_string(), clock.to_real(Time(k as u64)).to_string()];
    let mut header = vec!["step".to_string(), "t".to_string()];
    let mut rows = Vec::with_capacity(laws.len());
    if laws.iter().all(Dist::is_dirac) {
        let first = laws[0].as_dirac().expect("dirac");
        header.extend(point_header("state", first));
        header.extend(point_header("position", &sys.output(Time(0), first)?));
        for (k, law) in laws.iter().enumerate() {
            let s = law.as_dirac().expect("dirac");
            let mut row = lead(k);
            row.extend(point_cells(s));
            row.extend(point_cells(&sys.output(Time(k as u64), s)?));
            rows.push(row);
        }
    } else if sys.states().is_finite() {
        let states = sys.states().enumerate()?;
        header.extend(states.iter().map(|s| format!("p_{}", s.key())));
        for (k, law) in laws.iter().enumerate() {
            let mut row = lead(k);
            row.extend(states.iter().map(|s| law.weight(s).to_string()));
            rows.push(row);
        }
    } else {
        let first = laws[0].mean_point()?;
        header.extend(point_header("mean", &first));
        for (k, law) in laws.iter().enumerate() {
            let mut row = lead(k);
            row.extend(point_cells(&law.mean_point()?));
            rows.push(row);
        }
    }
    csv_text(header, rows)
}

/// `step,level,mean_0..,free_energy` for every level at every tick.
pub fn laplace_csv(model: &LaplaceModel, steps: u64) -> Result<String> {
    let run = run_stack(&model.levels, &model.config, &model.prior, &model.datum, steps)?;
    let width = model.levels.iter().map(|g| g.in_dim()).max().unwrap_or(0);
    let mut header = vec!["step".to_string(), "level".to_string()];
    header.extend((0..width).map(|k| format!("mean_{k}")));
    header.push("free_energy".into());
    let mut rows = Vec::new();
    for (step, levels) in run.iter().enumerate() {
        for (k, level) in levels.iter().enumerate() {
            let mut row = vec![step.to_string(), k.to_string()];
            row.extend((0..width).map(|j| level.x.get(j).map(ToString::to_string).unwrap_or_default()));
            row.push(level.free_energy.to_string());
            rows.push(row);
        }
    }
    csv_text(header, rows)
}

fn spec_or(spec: Option<&str>, default: &str) -> Result<String> {
    catalog::load_text(spec.unwrap_or(default))
}

/// The reports of one suite, or of all of them when `suite` is `all`.
pub fn check(suite: &str, spec: Option<&str>, tol: Option<f64>, horizon: u64) -> Result<Vec<SuiteReport>> {
    if let Some(t) = tol {
        if !(t >= 0.0) {
            return Err(Error::Invalid(format!("tolerance must be non-negative, got {t}")));
        }
    }
    let flow = |text: &str| -> Result<SuiteReport> {
        suites::flow_suite(&text.parse::<SystemSpec>()?, horizon, tol.unwrap_or(1e-12))
    };
    let measure = |text: &str| -> Result<SuiteReport> {
        let (name, mp) = MeasurePreservingSystem::from_json(&serde_json::from_str(text)?)?;
        Ok(suites::measure_suite(&name, &mp))
    };
    let bayes = |text: &str| -> Result<SuiteReport> {
        let spec: BayesSpec = serde_json::from_str(text)?;
        suites::bayes_suite(&spec, horizon.max(1), tol.unwrap_or(1e-9))
    };
    let comonoid = || suites::comonoid_suite(&Space::finite(["0", "1", "2"])?, horizon, tol.unwrap_or(0.0));
    Ok(match suite {
        "flow" => vec![flow(&spec_or(spec, "builtin:counter")?)?],
        "measure" => vec![measure(&spec_or(spec, "builtin:cyclic_shift")?)?],
        "bayes" => vec![bayes(&spec_or(spec, "builtin:bayes")?)?],
        "rds" => vec![suites::rds_suite()?],
        "bundle" => vec![suites::bundle_suite()?],
        "comonoid" => vec![comonoid()?],
        "opindex" => vec![suites::opindex_suite(tol.unwrap_or(0.0))?],
        "all" => {
            let mut out = Vec::new();
            for name in ["counter", "markov", "thermostat", "decay"] {
                out.push(flow(&catalog::load_text(&format!("builtin:{name}"))?)?);
            }
            out.push(measure(&catalog::load_text("builtin:cyclic_shift")?)?);
            out.push(suites::rds_suite()?);
            out.push(suites::bundle_suite()?);
            out.push(comonoid()?);
            out.push(bayes(&catalog::load_text("builtin:bayes")?)?);
            out.push(suites::opindex_suite(tol.unwrap_or(0.0))?);
            out
        }
        other => {
            return Err(Error::Parse(format!("unknown suite {other:?}; expected one of {} or all", suites::SUITES.join(", "))))
        }
    })
}
