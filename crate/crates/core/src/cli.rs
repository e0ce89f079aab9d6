//! The `qsheaf` command-line front end. [`run`] returns the exit status and
//! the report text so that it can be driven from tests.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bkk::bkk_count_check;
use crate::classes::is_nef_fano;
use crate::correlator::{
    classical_contour, fiber_integral_delta, q_expansion, quantum_contour, quantum_scale_factor, quantum_sum,
    trmc_hypersurface, Quadrature,
};
use crate::cycles::{build_cycle, enumerate_plus_flags, tau_regularity};
use crate::error::{Error, Result};
use crate::problem::{Model, ProblemSpec};
use crate::solve::{continue_in_t, solve_qsc};

pub const DEFAULT_EPS_MAX: f64 = 0.1;
pub const DEFAULT_ORDER: usize = 3;
pub const DEFAULT_RADIUS: f64 = 0.05;
pub const DEFAULT_TAU: f64 = 0.1;

#[derive(Debug, Parser)]
#[command(name = "qsheaf", version, about = "Quantum sheaf cohomology correlators on toric varieties")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the fan.
    Validate(Common),
    /// Dump divisor classes and Mori data.
    Classes(Common),
    /// Solve the QSC relations.
    Solve(Common),
    /// Evaluate the correlator of the query.
    Correlator(Common),
    /// q-expansion coefficients of the query.
    Expand(Common),
    /// Mixed-volume certificates.
    Bkk(Common),
    /// Flags, compatible bases and the cycle.
    Cycles(Common),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Sum,
    Contour,
    Fiber,
    Trmc,
    Classical,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Problem file (JSON).
    pub spec: PathBuf,
    #[arg(long, value_enum, default_value = "sum")]
    pub method: MethodArg,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub eps_max: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub xi: Option<Vec<f64>>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub t_steps: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Options after merging flags over the problem file.
#[derive(Debug, Clone, Serialize)]
struct Resolved {
    method: MethodArg,
    eps_max: Option<f64>,
    xi: Option<Vec<f64>>,
    tol: f64,
    nodes: Option<usize>,
    seed: Option<u64>,
    order: usize,
    t_steps: usize,
    radius: f64,
    tau: f64,
}

fn resolve(c: &Common, spec: &ProblemSpec) -> Resolved {
    let o = &spec.options;
    Resolved {
        method: c.method,
        eps_max: c.eps_max.or(o.eps_max),
        xi: c.xi.clone().or_else(|| o.xi.clone()),
        tol: c.tol.or(o.tol).unwrap_or(1e-8),
        nodes: c.nodes.or(o.nodes),
        seed: c.seed.or(o.seed),
        order: c.order.or(o.order).unwrap_or(DEFAULT_ORDER),
        t_steps: c.t_steps.or(o.t_steps).unwrap_or(0),
        radius: DEFAULT_RADIUS,
        tau: DEFAULT_TAU,
    }
}

fn quad(base: Quadrature, opts: &Resolved) -> Quadrature {
    let start = opts.nodes.unwrap_or(base.start);
    Quadrature {
        start,
        max: base.max.max(start),
        tol: opts.tol,
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate(_) => "validate",
            Command::Classes(_) => "classes",
            Command::Solve(_) => "solve",
            Command::Correlator(_) => "correlator",
            Command::Expand(_) => "expand",
            Command::Bkk(_) => "bkk",
            Command::Cycles(_) => "cycles",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Validate(c)
            | Command::Classes(c)
            | Command::Solve(c)
            | Command::Correlator(c)
            | Command::Expand(c)
            | Command::Bkk(c)
            | Command::Cycles(c) => c,
        }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serializes")
}

fn query_sigma(model: &Model, spec: &ProblemSpec) -> Result<crate::poly::MultiPoly> {
    let q = spec.query.as_ref().ok_or_else(|| Error::Parse("problem file needs a query".into()))?;
    model.sigma(q)
}

fn execute(cmd: &Command, spec: &ProblemSpec, opts: &Resolved) -> Result<Value> {
    if let Command::Validate(_) = cmd {
        spec.fan.validate()?;
    }
    let model = Model::from_spec(spec, opts.seed)?;
    let (fan, cd, bundle) = (&model.fan, &model.cd, &model.bundle);
    Ok(match cmd {
        Command::Validate(_) => json!({
            "valid": true,
            "dimension": fan.dim(),
            "rays": fan.num_rays(),
            "picard_rank": fan.picard_rank(),
            "euler": fan.euler_characteristic(),
            "nef_fano": to_value(&is_nef_fano(fan, cd)),
            "primitive_collections": to_value(&fan.primitive_collections()),
        }),
        Command::Classes(_) => json!({
            "class_data": to_value(cd),
            "nef_fano": to_value(&is_nef_fano(fan, cd)),
            "bundle_is_tangent": bundle.is_tangent(cd),
            "deformation_norm": bundle.deformation_norm(cd),
        }),
        Command::Solve(_) => {
            let q = model.q_of(spec)?;
            let sys = model.system(&q)?;
            let set = solve_qsc(&sys)?;
            let mut v = json!({ "system": to_value(&sys.describe()), "solutions": to_value(&set) });
            if opts.t_steps > 0 {
                let rep = continue_in_t(cd, bundle, &q, 1.0, opts.t_steps, model.euler())?;
                v["continuation"] = to_value(&rep);
            }
            v
        }
        Command::Correlator(_) => {
            let sigma = query_sigma(&model, spec)?;
            let rep = match opts.method {
                MethodArg::Sum => quantum_sum(&model.system(&model.q_of(spec)?)?, &sigma)?,
                MethodArg::Trmc => trmc_hypersurface(fan, cd, bundle, &model.system(&model.q_of(spec)?)?, &sigma)?,
                MethodArg::Fiber => {
                    fiber_integral_delta(&model.system(&model.q_of(spec)?)?, &sigma, quad(Quadrature::FIBER, opts))?
                }
                MethodArg::Classical | MethodArg::Contour => {
                    let xi = match &opts.xi {
                        Some(x) => x.clone(),
                        None => cd.default_xi()?,
                    };
                    let flags = enumerate_plus_flags(cd, &xi)?;
                    let cycle = build_cycle(cd, bundle, &flags, opts.eps_max.unwrap_or(DEFAULT_EPS_MAX))?;
                    if opts.method == MethodArg::Classical {
                        classical_contour(bundle, &sigma, &cycle, quad(Quadrature::CONTOUR, opts))?
                    } else {
                        let sys = model.system(&model.q_of(spec)?)?;
                        let cycle = if opts.eps_max.is_some() {
                            cycle
                        } else {
                            cycle.scaled(quantum_scale_factor(&sys, &cycle)?)
                        };
                        quantum_contour(&sys, &sigma, &cycle, quad(Quadrature::CONTOUR, opts))?
                    }
                }
            };
            to_value(&rep)
        }
        Command::Expand(_) => {
            let sigma = query_sigma(&model, spec)?;
            let q = model.q_of(spec).unwrap_or_else(|_| vec![crate::linalg::C64::new(opts.radius, 0.0); cd.r]);
            let sys = model.system(&q)?;
            let e = q_expansion(cd, &sys, &sigma, opts.order, opts.radius, quad(Quadrature::EXPANSION, opts))?;
            let entries = |m: &std::collections::BTreeMap<Vec<i64>, crate::linalg::C64>| -> Vec<Value> {
                m.iter().map(|(b, v)| json!({ "beta": b, "value": to_value(v) })).collect()
            };
            json!({
                "coefficients": entries(&e.coefficients),
                "laurent": entries(&e.laurent),
                "radius": e.radius,
                "nodes": e.nodes,
                "change": e.change,
            })
        }
        Command::Bkk(_) => to_value(&bkk_count_check(cd, fan)?),
        Command::Cycles(_) => {
            let xi = match &opts.xi {
                Some(x) => x.clone(),
                None => cd.default_xi()?,
            };
            let flags = enumerate_plus_flags(cd, &xi)?;
            let cycle = build_cycle(cd, bundle, &flags, opts.eps_max.unwrap_or(DEFAULT_EPS_MAX))?;
            json!({
                "xi": xi,
                "flags": to_value(&flags),
                "cycle": to_value(&cycle),
                "tau_regularity": to_value(&tau_regularity(cd, &xi, opts.tau)),
            })
        }
    })
}

/// Runs one command; returns `(exit status, report)`.
pub fn run_command(cmd: &Command) -> (i32, String) {
    let common = cmd.common();
    let (code, report) = match ProblemSpec::read(&common.spec) {
        Err(e) => (e.exit_code(), error_report(cmd.name(), None, &e)),
        Ok(spec) => {
            let opts = resolve(common, &spec);
            match execute(cmd, &spec, &opts) {
                Ok(result) => (
                    0,
                    json!({ "command": cmd.name(), "options": to_value(&opts), "result": result }),
                ),
                Err(e) => (e.exit_code(), error_report(cmd.name(), Some(&opts), &e)),
            }
        }
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    (code, text)
}

fn error_report(name: &str, opts: Option<&Resolved>, e: &Error) -> Value {
    json!({
        "command": name,
        "options": opts.map(to_value),
        "error": { "code": e.code(), "message": e.to_string() },
    })
}

/// Parses `args` (including the program name) and runs the command, writing
/// the report to `--out` or stdout.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (code, text) = run_command(&cli.command);
    match &cli.command.common().out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("cannot write {}: {e}", path.display());
                return 2;
            }
        }
        None => print!("{text}"),
    }
    code
}

/// Caps the worker pool at `QSHEAF_THREADS` when it is set.
pub fn init_threads() {
    if let Some(n) = std::env::var("QSHEAF_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}
