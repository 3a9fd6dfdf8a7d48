//! `omin`: command-line front end. Every command writes one JSON report.
//!
//! Exit codes: 0 success, 1 a check failed, 2 unreadable or invalid input,
//! 3 certification incomplete.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Value};

use omin_core::abel::{run_invariant_suite, AbelFunction, SuiteScale};
use omin_core::census::{
    count_nonsingular_zeros, reduce_phi_complexity, sample_regular_value, search_radius, track_path, DeformationPath,
    SquareSystem, SystemFile, DEFAULT_MAX_DEPTH, DEFAULT_RADIUS,
};
use omin_core::morse::{component_bound, gamma_estimate, AffineSubspace, FormulaFile, MilnorSchedule, PipelineOptions};
use omin_core::term::{eval, gradient, interval_eval, parse_term};
use omin_core::{Error, IntervalBox, REPORT_VERSION};

#[derive(Parser, Debug)]
#[command(name = "omin", version, about = "Super-logarithm checks, certified zero counts and component bounds")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Seed for every sampling step; required by sampling commands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Search radius; otherwise taken from the input file or derived.
    #[arg(long, global = true)]
    radius: Option<f64>,
    /// Maximum bisection depth.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_DEPTH)]
    depth: usize,
    /// Worker thread cap.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Load the Abel function from a file instead of building it.
    #[arg(long, global = true)]
    abel: Option<PathBuf>,
    /// Seed smoothness order used when building.
    #[arg(long, global = true, default_value_t = 3)]
    order: usize,
    /// Build tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the Abel-function invariant suite.
    SlogCheck {
        /// Also save the Abel function to this file.
        #[arg(long)]
        save_abel: Option<PathBuf>,
    },
    /// Evaluate a term, its gradient and optionally an interval enclosure.
    Eval {
        term: String,
        /// Comma-separated variable names.
        #[arg(long, default_value = "x")]
        vars: String,
        /// Comma-separated point.
        #[arg(long)]
        at: String,
        /// Box as `lo:hi,lo:hi,...`.
        #[arg(long = "box")]
        bx: Option<String>,
    },
    /// Count certified non-singular zeros of a system.
    Zeros {
        system: PathBuf,
        /// Sample a regular target value first (needs --seed).
        #[arg(long)]
        regular: bool,
        /// Replace phi applications by tabulated primitives before counting.
        #[arg(long)]
        reduce: bool,
    },
    /// Count zeros along a deformation path.
    Track {
        system: PathBuf,
        path: PathBuf,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Bound the components of a quantifier-free set.
    Components {
        formula: PathBuf,
        /// JSON list of affine rows restricting the set.
        #[arg(long)]
        affine: Option<PathBuf>,
        /// Skip the flood-fill oracle.
        #[arg(long)]
        no_oracle: bool,
    },
    /// Sampled estimate of the largest component count of affine sections.
    Gamma {
        formula: PathBuf,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
}

/// Failure class, mapped to the exit code.
enum Failure {
    Input(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Syntax { .. }
            | Error::UnknownIdentifier { .. }
            | Error::Arity { .. }
            | Error::NonSquare { .. }
            | Error::ParamRange { .. }
            | Error::Dimension { .. }
            | Error::Invalid(_) => Failure::Input(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

type Outcome = std::result::Result<(Value, Status), Failure>;

#[derive(Clone, Copy, PartialEq)]
enum Status {
    Ok,
    CheckFailed,
    Incomplete,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> std::result::Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_abel(c: &Common) -> std::result::Result<AbelFunction, Failure> {
    match &c.abel {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
            Ok(AbelFunction::from_json(&text)?)
        }
        None => Ok(AbelFunction::build(c.order, c.tol)?),
    }
}

fn need_seed(c: &Common, what: &str) -> std::result::Result<u64, Failure> {
    c.seed.ok_or_else(|| Failure::Input(format!("{what} samples at random and needs --seed")))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| Failure::Input(format!("`{t}`: {e}"))))
        .collect()
}

fn cmd_slog_check(c: &Common, save: &Option<PathBuf>) -> Outcome {
    // A damaged file that no longer loads is a failed check, not bad input.
    let abel = match load_abel(c) {
        Ok(a) => a,
        Err(Failure::Other(msg)) => {
            return Ok((json!({ "pass": false, "load_error": msg }), Status::CheckFailed));
        }
        Err(e) => return Err(e),
    };
    if let Some(p) = save {
        std::fs::write(p, abel.to_json()).map_err(|e| Failure::Other(format!("{}: {e}", p.display())))?;
    }
    let report = run_invariant_suite(&abel, &SuiteScale::for_tol(abel.tol()))?;
    let status = if report.pass { Status::Ok } else { Status::CheckFailed };
    Ok((to_value(&report), status))
}

fn cmd_eval(c: &Common, term: &str, vars: &str, at: &str, bx: &Option<String>) -> Outcome {
    let abel = load_abel(c)?;
    let names: Vec<&str> = vars.split(',').map(str::trim).collect();
    let t = parse_term(term, &names)?;
    let x = parse_list(at)?;
    if x.len() != names.len() {
        return Err(Failure::Input(format!("{} coordinates for {} variables", x.len(), names.len())));
    }
    let mut report = json!({
        "term": term,
        "point": x,
        "value": eval(&t, &x, &abel)?,
        "gradient": gradient(&t, &x, &abel)?,
    });
    if let Some(b) = bx {
        let bounds = b
            .split(',')
            .map(|p| {
                let (lo, hi) = p.split_once(':').ok_or_else(|| Failure::Input(format!("`{p}` is not lo:hi")))?;
                let lo = lo.trim().parse::<f64>().map_err(|e| Failure::Input(e.to_string()))?;
                let hi = hi.trim().parse::<f64>().map_err(|e| Failure::Input(e.to_string()))?;
                Ok((lo, hi))
            })
            .collect::<std::result::Result<Vec<_>, Failure>>()?;
        let iv = interval_eval(&t, &IntervalBox::from_bounds(&bounds), &abel)?;
        report["enclosure"] = json!([iv.lo, iv.hi]);
    }
    Ok((report, Status::Ok))
}

fn load_system(path: &Path) -> std::result::Result<(SquareSystem, Option<f64>), Failure> {
    let file: SystemFile = read_json(path)?;
    Ok((SquareSystem::from_file(&file)?, file.radius))
}

fn cmd_zeros(c: &Common, path: &Path, regular: bool, reduce: bool) -> Outcome {
    let abel = load_abel(c)?;
    let (mut system, file_radius) = load_system(path)?;
    let derived = search_radius(&system, DEFAULT_RADIUS, &abel)?;
    let radius = c.radius.or(file_radius).unwrap_or(derived.radius);
    if !radius.is_finite() {
        return Err(Failure::Input(format!(
            "derived radius overflows (s = {}, d = {}); pass --radius",
            derived.s, derived.d
        )));
    }
    if reduce {
        system = reduce_phi_complexity(&system, radius, &abel)?;
    }
    let mut report = json!({ "radius": to_value(&derived), "search_radius_used": radius });
    if regular {
        let seed = need_seed(c, "zeros --regular")?;
        match sample_regular_value(&system, radius, c.depth, seed, 20, &abel) {
            Ok(rv) => {
                report["regular_value"] = to_value(&rv);
                let eye = DMatrix::identity(system.dim(), system.dim());
                system = system.tilted(&eye, &rv.eta)?;
            }
            Err(Error::Budget(n)) => {
                report["regular_value"] = json!({ "error": format!("no regular value in {n} attempts") });
            }
            Err(e) => return Err(e.into()),
        }
    }
    let census = count_nonsingular_zeros(&system, radius, c.depth, &abel)?;
    let status = if census.exact { Status::Ok } else { Status::Incomplete };
    report["census"] = to_value(&census);
    Ok((report, status))
}

fn cmd_track(c: &Common, system: &Path, path: &Path, steps: usize) -> Outcome {
    let abel = load_abel(c)?;
    let (system, file_radius) = load_system(system)?;
    let path: DeformationPath = read_json(path)?;
    let radius = c.radius.or(file_radius).unwrap_or(DEFAULT_RADIUS);
    let report = track_path(&system, &path, steps, radius, c.depth, &abel)?;
    let status = if report.steps.iter().all(|s| s.exact) {
        Status::Ok
    } else {
        Status::Incomplete
    };
    Ok((json!({ "radius": radius, "track": to_value(&report) }), status))
}

fn cmd_components(c: &Common, path: &Path, affine: &Option<PathBuf>, no_oracle: bool) -> Outcome {
    let abel = load_abel(c)?;
    let seed = need_seed(c, "components")?;
    let file: FormulaFile = read_json(path)?;
    let formula = file.normalized()?;
    let radius = c.radius.or(file.radius).unwrap_or(2.0);
    let l = match affine {
        Some(p) => AffineSubspace::new(formula.dim, read_json(p)?)?,
        None => AffineSubspace::full(formula.dim),
    };
    let schedule = MilnorSchedule::for_radius(radius)?;
    let options = PipelineOptions {
        max_depth: c.depth,
        oracle: !no_oracle,
        oracle_resolution: None,
    };
    match component_bound(&formula, &l, radius, &schedule, seed, &options, &abel) {
        Ok(r) => {
            let sound = r.oracle_components.is_none_or(|o| o <= r.component_bound);
            let status = if sound { Status::Ok } else { Status::CheckFailed };
            Ok((to_value(&r), status))
        }
        Err(Error::Certification(msg)) => Ok((json!({ "certification_error": msg }), Status::Incomplete)),
        Err(e) => Err(e.into()),
    }
}

fn cmd_gamma(c: &Common, path: &Path, trials: usize) -> Outcome {
    let abel = load_abel(c)?;
    let seed = need_seed(c, "gamma")?;
    let file: FormulaFile = read_json(path)?;
    let formula = file.normalized()?;
    let radius = c.radius.or(file.radius).unwrap_or(2.0);
    let options = PipelineOptions {
        max_depth: c.depth,
        ..Default::default()
    };
    let r = gamma_estimate(&formula, trials, radius, seed, &options, &abel)?;
    let status = if !r.within_bounds {
        Status::CheckFailed
    } else if r.uncertified_trials > 0 {
        Status::Incomplete
    } else {
        Status::Ok
    };
    Ok((to_value(&r), status))
}

fn run(cli: &Cli) -> Outcome {
    let c = &cli.common;
    match &cli.command {
        Command::SlogCheck { save_abel } => cmd_slog_check(c, save_abel),
        Command::Eval { term, vars, at, bx } => cmd_eval(c, term, vars, at, bx),
        Command::Zeros { system, regular, reduce } => cmd_zeros(c, system, *regular, *reduce),
        Command::Track { system, path, steps } => cmd_track(c, system, path, *steps),
        Command::Components {
            formula,
            affine,
            no_oracle,
        } => cmd_components(c, formula, affine, *no_oracle),
        Command::Gamma { formula, trials } => cmd_gamma(c, formula, *trials),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::SlogCheck { .. } => "slog-check",
        Command::Eval { .. } => "eval",
        Command::Zeros { .. } => "zeros",
        Command::Track { .. } => "track",
        Command::Components { .. } => "components",
        Command::Gamma { .. } => "gamma",
    }
}

fn emit(cli: &Cli, body: Value) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(&body).expect("report serializes") + "\n";
    match &cli.common.out {
        Some(p) => std::fs::write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// The report envelope and exit code for one invocation.
fn respond(cli: &Cli) -> (Value, u8) {
    let name = command_name(&cli.command);
    match run(cli) {
        Ok((report, status)) => {
            let (label, code) = match status {
                Status::Ok => ("ok", 0),
                Status::CheckFailed => ("check_failed", 1),
                Status::Incomplete => ("incomplete", 3),
            };
            (
                json!({ "version": REPORT_VERSION, "command": name, "status": label, "report": report }),
                code,
            )
        }
        Err(f) => {
            let (label, msg, code) = match f {
                Failure::Input(m) => ("invalid_input", m, 2),
                Failure::Other(m) => ("error", m, 1),
            };
            eprintln!("error: {msg}");
            (
                json!({ "version": REPORT_VERSION, "command": name, "status": label, "error": msg }),
                code,
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let (body, code) = respond(&cli);
    if let Err(e) = emit(&cli, body) {
        eprintln!("error: writing report: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
