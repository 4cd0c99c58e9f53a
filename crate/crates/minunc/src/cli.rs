//! Command-line front end.
//!
//! Every command resolves its arguments into a [`RunConfig`], computes one
//! artifact, and writes it plus a `<path>.meta.json` sidecar describing the
//! run. Outputs are deterministic: identical configs produce byte-identical
//! files. `--seed-check` skips the artifact and instead runs a battery of
//! invariant checks wired to the same code paths, for use as a smoke test
//! in scripts and CI.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::path::PathBuf;

use clap::{Arg, ArgAction, ArgMatches, Command};
use serde_json::{json, Value};

use crate::boson::{self, PairCoherentParams, Parity, SqueezeParams};
use crate::dynamics::{self, CavityParams};
use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::hilbert::{
    annihilation, momentum, position, tensor, Basis, ModeSpace, SpinSpace, StateVector,
};
use crate::serialize::{self, complex_value, GridFormat};
use crate::spin::{self, AtomicSqueezedSpec, Pole, SpinDirectionFrame};
use crate::uncertainty;
use crate::C64;

const MAX_GRID_POINTS: usize = 2001;
/// Largest atom count whose full amplitude vector is written out.
const MAX_EMITTED_ATOMS: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    State,
    Uncertainty,
    Wigner,
    Quadgrid,
    Catdyn,
    Ghz,
    Ramsey,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::State => "state",
            CommandKind::Uncertainty => "uncertainty",
            CommandKind::Wigner => "wigner",
            CommandKind::Quadgrid => "quadgrid",
            CommandKind::Catdyn => "catdyn",
            CommandKind::Ghz => "ghz",
            CommandKind::Ramsey => "ramsey",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        match name {
            "state" => Some(CommandKind::State),
            "uncertainty" => Some(CommandKind::Uncertainty),
            "wigner" => Some(CommandKind::Wigner),
            "quadgrid" => Some(CommandKind::Quadgrid),
            "catdyn" => Some(CommandKind::Catdyn),
            "ghz" => Some(CommandKind::Ghz),
            "ramsey" => Some(CommandKind::Ramsey),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        }
    }

    fn grid(self) -> GridFormat {
        match self {
            OutputFormat::Json => GridFormat::Json,
            OutputFormat::Csv => GridFormat::Csv,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    /// Raw argument strings as given on the command line, keyed by flag name.
    pub params: BTreeMap<String, String>,
    pub output_path: PathBuf,
    pub format: OutputFormat,
    pub seed_check: bool,
}

fn with_io(cmd: Command) -> Command {
    cmd.arg(
        Arg::new("out")
            .long("out")
            .value_name("PATH")
            .help("Output file (default: $MINUNC_OUT_DIR/<command>.<ext>)"),
    )
    .arg(
        Arg::new("format")
            .long("format")
            .value_name("FMT")
            .value_parser(["json", "csv"])
            .default_value("json")
            .help("Output format"),
    )
    .arg(
        Arg::new("seed-check")
            .long("seed-check")
            .action(ArgAction::SetTrue)
            .help("Run this command's invariant battery instead of writing output"),
    )
}

fn flag(name: &'static str, value: &'static str, help: &'static str) -> Arg {
    // Values are mostly numbers; let leading minus signs through.
    Arg::new(name)
        .long(name)
        .value_name(value)
        .allow_hyphen_values(true)
        .help(help)
}

pub fn build_command() -> Command {
    Command::new("minunc")
        .about("Minimum-uncertainty states: construction, checks, and phase-space maps")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(with_io(
            Command::new("state")
                .about("Construct a state and write its amplitudes")
                .arg(flag(
                    "kind",
                    "KIND",
                    "coherent | squeezed | cat | pair | spin-coherent | spin-squeezed",
                ))
                .arg(flag("cutoff", "N", "Fock cutoff per mode"))
                .arg(flag("alpha", "RE[,IM]", "Displacement amplitude"))
                .arg(flag("lambda", "RE[,IM]", "Variance-ratio parameter, Re > 0"))
                .arg(flag("parity", "P", "Cat parity: even | odd (default even)"))
                .arg(flag("xi", "RE[,IM]", "Pair-coherent amplitude"))
                .arg(flag("q", "Q", "Photon-number difference (default 0)"))
                .arg(flag("two-s", "2S", "Twice the total spin"))
                .arg(flag("theta", "RAD", "Polar angle (default 0)"))
                .arg(flag("phi", "RAD", "Azimuthal angle (default 0)"))
                .arg(flag("pole", "P", "Seed pole: plus | minus (default plus)"))
                .arg(flag("eta", "ETA", "Squeezing asymmetry, |eta| < 1"))
                .arg(flag("two-m", "2M", "Twice the seed projection")),
        ))
        .subcommand(with_io(
            Command::new("uncertainty")
                .about("Solve the minimum-uncertainty eigenproblem and report variances")
                .arg(flag("pair", "A,B", "Observable pair; only x,p is wired up (default)"))
                .arg(flag("lambda", "RE[,IM]", "Variance-ratio parameter"))
                .arg(flag("cutoff", "N", "Fock cutoff (default 120)"))
                .arg(flag("target", "RE[,IM]", "Solve near this eigenvalue instead of enumerating")),
        ))
        .subcommand(with_io(
            Command::new("wigner")
                .about("Sample a Gaussian Wigner function on a phase-space grid")
                .arg(flag("alpha", "V", "Momentum variance <p^2>"))
                .arg(flag("beta", "V", "Position variance <q^2>"))
                .arg(flag("gamma", "V", "Symmetrized cross moment (default 0)"))
                .arg(flag("min", "X", "Grid lower edge (default -6)"))
                .arg(flag("max", "X", "Grid upper edge (default 6)"))
                .arg(flag("points", "N", "Samples per axis (default 161)")),
        ))
        .subcommand(with_io(
            Command::new("quadgrid")
                .about("Sample a pair-coherent quadrature density |Phi(x,y)|^2")
                .arg(flag("xi", "RE[,IM]", "Pair-coherent amplitude (default 3)"))
                .arg(flag("q", "Q", "Photon-number difference (default 0)"))
                .arg(flag("cutoff", "N", "Fock cutoff per mode (default 40)"))
                .arg(flag("min", "X", "Grid lower edge (default -6)"))
                .arg(flag("max", "X", "Grid upper edge (default 6)"))
                .arg(flag("points", "N", "Samples per axis (default 161)")),
        ))
        .subcommand(with_io(
            Command::new("catdyn")
                .about("Evolve an atomic coherent state under the dispersive cavity shift")
                .arg(flag("n", "N", "Number of atoms"))
                .arg(flag("theta", "RAD", "Initial polar angle"))
                .arg(flag("phi", "RAD", "Initial azimuthal angle"))
                .arg(flag("eta-t", "X", "Dimensionless evolution time (shift rate times t)"))
                .arg(flag("nbar", "NBAR", "Thermal photon number of the cavity (default 0)"))
                .arg(flag(
                    "decompose-m",
                    "M",
                    "Also project onto an M-component superposition (json only)",
                )),
        ))
        .subcommand(with_io(
            Command::new("ghz")
                .about("Emit a GHZ state, or verify the evolved state reaches it")
                .arg(flag("n", "N", "Number of atoms"))
                .arg(
                    Arg::new("check")
                        .long("check")
                        .action(ArgAction::SetTrue)
                        .help("Report the fidelity of the quarter-period evolved state instead"),
                ),
        ))
        .subcommand(with_io(
            Command::new("ramsey")
                .about("Ramsey fringes of an evolved state, optionally with its dephased mixture")
                .arg(flag("n", "N", "Number of atoms"))
                .arg(flag("theta", "RAD", "Initial polar angle"))
                .arg(flag("phi", "RAD", "Initial azimuthal angle"))
                .arg(flag("eta-t", "X", "Dimensionless evolution time"))
                .arg(flag("alpha", "RAD", "Polar angle of the projection family"))
                .arg(flag("beta-min", "RAD", "Fringe scan start (default -pi)"))
                .arg(flag("beta-max", "RAD", "Fringe scan end (default pi)"))
                .arg(flag("points", "N", "Scan samples (default 129)"))
                .arg(flag(
                    "mixture-m",
                    "M",
                    "Also emit the incoherent M-component mixture fringe",
                )),
        ))
}

pub fn config_from_matches(matches: &ArgMatches) -> Result<RunConfig> {
    let (name, sub) = matches
        .subcommand()
        .ok_or_else(|| Error::InvalidArgument("a subcommand is required".into()))?;
    let command = CommandKind::from_name(name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown command `{name}`")))?;
    let format = match sub.get_one::<String>("format").map(String::as_str) {
        Some("csv") => OutputFormat::Csv,
        _ => OutputFormat::Json,
    };
    let mut params = BTreeMap::new();
    for id in sub.ids() {
        let key = id.as_str();
        match key {
            "out" | "format" | "seed-check" => {}
            "check" => {
                if sub.get_flag("check") {
                    params.insert(key.to_string(), "true".to_string());
                }
            }
            _ => {
                if let Some(value) = sub.get_one::<String>(key) {
                    params.insert(key.to_string(), value.clone());
                }
            }
        }
    }
    let output_path = match sub.get_one::<String>("out") {
        Some(path) => PathBuf::from(path),
        None => {
            let dir = std::env::var_os("MINUNC_OUT_DIR")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("."));
            dir.join(format!("{}.{}", command.name(), format.extension()))
        }
    };
    Ok(RunConfig {
        command,
        params,
        output_path,
        format,
        seed_check: sub.get_flag("seed-check"),
    })
}

pub fn run(config: &RunConfig) -> Result<()> {
    if config.seed_check {
        return run_battery(config.command);
    }
    let derived = match config.command {
        CommandKind::State => exec_state(config)?,
        CommandKind::Uncertainty => exec_uncertainty(config)?,
        CommandKind::Wigner => exec_wigner(config)?,
        CommandKind::Quadgrid => exec_quadgrid(config)?,
        CommandKind::Catdyn => exec_catdyn(config)?,
        CommandKind::Ghz => exec_ghz(config)?,
        CommandKind::Ramsey => exec_ramsey(config)?,
    };
    write_meta(config, derived)?;
    println!("wrote {}", config.output_path.display());
    Ok(())
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) | Error::BasisMismatch(_) => 2,
        Error::Io(_) => 1,
        _ => 3,
    }
}

fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::InvalidArgument(_) => "invalid-argument",
        Error::BasisMismatch(_) => "basis-mismatch",
        Error::NotHermitian { .. } => "not-hermitian",
        Error::TruncationCapture { .. } => "truncation-capture",
        Error::Unphysical(_) => "unphysical",
        Error::IllConditioned(_) => "ill-conditioned",
        Error::Numerical(_) => "numerical",
        Error::Io(_) => "io",
    }
}

/// Machine-readable error object for stderr.
pub fn error_json(err: &Error) -> String {
    json!({ "error": { "kind": error_kind(err), "message": err.to_string() } }).to_string()
}

fn write_meta(config: &RunConfig, derived: Option<Value>) -> Result<()> {
    let mut params = serde_json::Map::new();
    for (k, v) in &config.params {
        params.insert(k.clone(), Value::String(v.clone()));
    }
    let mut doc = serde_json::Map::new();
    doc.insert(
        "command".into(),
        Value::String(config.command.name().into()),
    );
    doc.insert(
        "format".into(),
        Value::String(config.format.extension().into()),
    );
    doc.insert("params".into(), Value::Object(params));
    if let Some(d) = derived {
        doc.insert("derived".into(), d);
    }
    doc.insert(
        "tool_version".into(),
        Value::String(env!("CARGO_PKG_VERSION").into()),
    );
    let mut os = config.output_path.clone().into_os_string();
    os.push(".meta.json");
    serialize::write_json_value(&PathBuf::from(os), &Value::Object(doc))
}

// ---- parameter access ----

fn req<'a>(config: &'a RunConfig, key: &str) -> Result<&'a str> {
    config
        .params
        .get(key)
        .map(String::as_str)
        .ok_or_else(|| Error::InvalidArgument(format!("missing required --{key}")))
}

fn opt<'a>(config: &'a RunConfig, key: &str) -> Option<&'a str> {
    config.params.get(key).map(String::as_str)
}

fn parse_f64(text: &str, key: &str) -> Result<f64> {
    text.trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("--{key}: `{text}` is not a real number")))
}

fn req_f64(config: &RunConfig, key: &str) -> Result<f64> {
    parse_f64(req(config, key)?, key)
}

fn opt_f64(config: &RunConfig, key: &str, default: f64) -> Result<f64> {
    match opt(config, key) {
        Some(text) => parse_f64(text, key),
        None => Ok(default),
    }
}

fn parse_usize(text: &str, key: &str) -> Result<usize> {
    text.trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("--{key}: `{text}` is not a nonnegative integer")))
}

fn opt_usize(config: &RunConfig, key: &str, default: usize) -> Result<usize> {
    match opt(config, key) {
        Some(text) => parse_usize(text, key),
        None => Ok(default),
    }
}

fn req_u32(config: &RunConfig, key: &str) -> Result<u32> {
    req(config, key)?
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("--{key}: not a nonnegative integer")))
}

fn req_i64(config: &RunConfig, key: &str) -> Result<i64> {
    req(config, key)?
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("--{key}: not an integer")))
}

/// Accepts `RE` or `RE,IM`.
fn parse_complex(text: &str, key: &str) -> Result<C64> {
    let mut parts = text.splitn(2, ',');
    let re = parse_f64(parts.next().unwrap_or(""), key)?;
    let im = match parts.next() {
        Some(part) => parse_f64(part, key)?,
        None => 0.0,
    };
    Ok(C64::new(re, im))
}

fn req_complex(config: &RunConfig, key: &str) -> Result<C64> {
    parse_complex(req(config, key)?, key)
}

fn opt_complex(config: &RunConfig, key: &str, default: C64) -> Result<C64> {
    match opt(config, key) {
        Some(text) => parse_complex(text, key),
        None => Ok(default),
    }
}

fn linspace(min: f64, max: f64, points: usize, key: &str) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && max > min) {
        return Err(Error::InvalidArgument(format!(
            "--{key}: need finite bounds with max > min"
        )));
    }
    if !(2..=MAX_GRID_POINTS).contains(&points) {
        return Err(Error::InvalidArgument(format!(
            "--points must lie in 2..={MAX_GRID_POINTS}"
        )));
    }
    let step = (max - min) / (points - 1) as f64;
    Ok((0..points).map(|i| min + step * i as f64).collect())
}

fn basis_value(basis: &Basis) -> Value {
    match basis {
        Basis::Mode(space) => json!({ "type": "mode", "cutoff": space.cutoff() }),
        Basis::Spin(space) => json!({ "type": "spin", "two_s": space.two_s() }),
        Basis::Product(factors) => json!({
            "type": "product",
            "factors": factors.iter().map(basis_value).collect::<Vec<_>>(),
        }),
    }
}

fn amplitudes_value(state: &StateVector) -> Value {
    Value::Array(
        state
            .amplitudes()
            .iter()
            .map(|&z| complex_value(z))
            .collect(),
    )
}

fn write_state(config: &RunConfig, head: Value, state: &StateVector) -> Result<()> {
    match config.format {
        OutputFormat::Json => {
            let mut doc = match head {
                Value::Object(map) => map,
                _ => serde_json::Map::new(),
            };
            doc.insert("dim".into(), json!(state.dim()));
            doc.insert("basis".into(), basis_value(state.basis()));
            doc.insert("amplitudes".into(), amplitudes_value(state));
            serialize::write_json_value(&config.output_path, &Value::Object(doc))
        }
        OutputFormat::Csv => {
            let amps: Vec<C64> = state.amplitudes().iter().copied().collect();
            serialize::write_amplitudes_csv(&config.output_path, &amps)
        }
    }
}

// ---- commands ----

fn exec_state(config: &RunConfig) -> Result<Option<Value>> {
    let kind = req(config, "kind")?;
    let state = match kind {
        "coherent" => {
            let space = ModeSpace::new(opt_usize(config, "cutoff", 60)?)?;
            boson::coherent(&space, req_complex(config, "alpha")?)?
        }
        "squeezed" => {
            let space = ModeSpace::new(opt_usize(config, "cutoff", 120)?)?;
            let lambda = req_complex(config, "lambda")?;
            let alpha = opt_complex(config, "alpha", C64::new(0.0, 0.0))?;
            boson::squeezed_coherent(&space, &SqueezeParams::from_lambda(lambda, alpha)?)?
        }
        "cat" => {
            let space = ModeSpace::new(opt_usize(config, "cutoff", 60)?)?;
            let parity = match opt(config, "parity").unwrap_or("even") {
                "even" => Parity::Even,
                "odd" => Parity::Odd,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "--parity must be even or odd, got `{other}`"
                    )))
                }
            };
            boson::even_odd_cat(&space, req_complex(config, "alpha")?, parity)?
        }
        "pair" => {
            let cutoff = opt_usize(config, "cutoff", 40)?;
            let space = ModeSpace::new(cutoff)?;
            let params = PairCoherentParams {
                xi: req_complex(config, "xi")?,
                q: opt_usize(config, "q", 0)?,
            };
            boson::pair_coherent(&space, &space, &params)?
        }
        "spin-coherent" => {
            let space = SpinSpace::new(req_u32(config, "two-s")?)?;
            let pole = match opt(config, "pole").unwrap_or("plus") {
                "plus" => Pole::Plus,
                "minus" => Pole::Minus,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "--pole must be plus or minus, got `{other}`"
                    )))
                }
            };
            spin::atomic_coherent(
                &space,
                opt_f64(config, "theta", 0.0)?,
                opt_f64(config, "phi", 0.0)?,
                pole,
            )?
        }
        "spin-squeezed" => {
            let space = SpinSpace::new(req_u32(config, "two-s")?)?;
            let spec = AtomicSqueezedSpec {
                frame: SpinDirectionFrame::new(
                    opt_f64(config, "theta", 0.0)?,
                    opt_f64(config, "phi", 0.0)?,
                )?,
                eta: req_f64(config, "eta")?,
                two_m: req_i64(config, "two-m")?,
            };
            spin::atomic_squeezed(&space, &spec)?
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown state kind `{other}`"
            )))
        }
    };
    write_state(config, json!({ "kind": kind }), &state)?;
    Ok(Some(json!({
        "dim": state.dim(),
        "edge_amplitude": state.edge_amplitude(),
    })))
}

fn exec_uncertainty(config: &RunConfig) -> Result<Option<Value>> {
    let pair = opt(config, "pair").unwrap_or("x,p");
    if pair != "x,p" {
        return Err(Error::InvalidArgument(format!(
            "--pair: only x,p is wired up, got `{pair}`"
        )));
    }
    let cutoff = opt_usize(config, "cutoff", 120)?;
    let lambda = req_complex(config, "lambda")?;
    let space = ModeSpace::new(cutoff)?;
    let x = position(&space);
    let p = momentum(&space);
    let solutions = match opt(config, "target") {
        Some(text) => {
            let target = parse_complex(text, "target")?;
            uncertainty::solve_min_uncertainty_at(&x, &p, lambda, target)?
        }
        None => uncertainty::solve_min_uncertainty(&x, &p, lambda)?,
    };
    let best = solutions
        .iter()
        .min_by(|s, t| s.residual.total_cmp(&t.residual))
        .ok_or_else(|| {
            Error::Numerical("no normalizable eigenvector at this cutoff".into())
        })?;
    let report = uncertainty::uncertainty_report(&best.state, &x, &p)?;
    let identities = uncertainty::solution_identities(best, &x, &p)?;
    match config.format {
        OutputFormat::Json => {
            let doc = json!({
                "pair": "x,p",
                "cutoff": cutoff,
                "lambda": complex_value(lambda),
                "solution_count": solutions.len(),
                "eigenvalue": complex_value(best.eigenvalue),
                "solver_residual": best.residual,
                "report": {
                    "var_a": report.var_a,
                    "var_b": report.var_b,
                    "product": report.product,
                    "commutator_mean": complex_value(report.commutator_mean),
                    "anticommutator_mean": report.anticommutator_mean,
                    "bound": report.bound,
                    "equality_residual": report.equality_residual,
                },
                "identities": {
                    "variance_lhs": identities.variance_lhs,
                    "variance_rhs": identities.variance_rhs,
                    "correlation_lhs": identities.correlation_lhs,
                    "correlation_rhs": identities.correlation_rhs,
                    "correlation_checked": identities.correlation_checked,
                },
            });
            serialize::write_json_value(&config.output_path, &doc)?;
        }
        OutputFormat::Csv => {
            let real = |v: f64| C64::new(v, 0.0);
            let rows = vec![
                ("lambda", lambda),
                ("eigenvalue", best.eigenvalue),
                ("solver_residual", real(best.residual)),
                ("var_a", real(report.var_a)),
                ("var_b", real(report.var_b)),
                ("product", real(report.product)),
                ("commutator_mean", report.commutator_mean),
                ("anticommutator_mean", real(report.anticommutator_mean)),
                ("bound", real(report.bound)),
                ("equality_residual", real(report.equality_residual)),
                ("variance_lhs", real(identities.variance_lhs)),
                ("variance_rhs", real(identities.variance_rhs)),
                ("correlation_lhs", real(identities.correlation_lhs)),
                ("correlation_rhs", real(identities.correlation_rhs)),
                (
                    "correlation_checked",
                    real(if identities.correlation_checked { 1.0 } else { 0.0 }),
                ),
            ];
            serialize::write_fields_csv(&config.output_path, &rows)?;
        }
    }
    Ok(Some(json!({ "solution_count": solutions.len() })))
}

fn exec_wigner(config: &RunConfig) -> Result<Option<Value>> {
    let gaussian = GaussianState::new(
        req_f64(config, "alpha")?,
        req_f64(config, "beta")?,
        opt_f64(config, "gamma", 0.0)?,
    )?;
    let min = opt_f64(config, "min", -6.0)?;
    let max = opt_f64(config, "max", 6.0)?;
    let points = opt_usize(config, "points", 161)?;
    let axis = linspace(min, max, points, "min/max")?;
    let values = gaussian.wigner_eval(&axis, &axis)?;
    serialize::write_grid(
        &config.output_path,
        config.format.grid(),
        "q",
        "p",
        &axis,
        &axis,
        &values,
    )?;
    Ok(Some(json!({
        "sigma": gaussian.sigma(),
        "entropy": gaussian.entropy()?,
    })))
}

fn exec_quadgrid(config: &RunConfig) -> Result<Option<Value>> {
    let params = PairCoherentParams {
        xi: opt_complex(config, "xi", C64::new(3.0, 0.0))?,
        q: opt_usize(config, "q", 0)?,
    };
    let space = ModeSpace::new(opt_usize(config, "cutoff", 40)?)?;
    let min = opt_f64(config, "min", -6.0)?;
    let max = opt_f64(config, "max", 6.0)?;
    let points = opt_usize(config, "points", 161)?;
    let axis = linspace(min, max, points, "min/max")?;
    let state = boson::pair_coherent(&space, &space, &params)?;
    let psi = boson::quadrature_wavefunction(&state, &axis, &axis)?;
    let density = psi.mapv(|z| z.norm_sqr());
    serialize::write_grid(
        &config.output_path,
        config.format.grid(),
        "x",
        "y",
        &axis,
        &axis,
        &density,
    )?;
    Ok(Some(json!({
        "gaussian_fit_residual": boson::gaussian_fit_residual(&axis, &axis, &density)?,
        "mandel_q_a": boson::mandel_q(&state, 0)?,
        "mandel_q_b": boson::mandel_q(&state, 1)?,
    })))
}

fn exec_catdyn(config: &RunConfig) -> Result<Option<Value>> {
    let n = req_u32(config, "n")?;
    if n > MAX_EMITTED_ATOMS {
        return Err(Error::InvalidArgument(format!(
            "--n: amplitude output is limited to {MAX_EMITTED_ATOMS} atoms"
        )));
    }
    let theta = req_f64(config, "theta")?;
    let phi = req_f64(config, "phi")?;
    let eta_t = req_f64(config, "eta-t")?;
    let nbar = opt_f64(config, "nbar", 0.0)?;
    let state = if nbar == 0.0 {
        dynamics::evolve_analytic(theta, phi, n, 1.0, eta_t)?
    } else {
        // Unit-rate cavity: the drift scales linearly in the shift rate, so
        // eta-t is the only time variable that matters.
        let params = CavityParams::new(1.0, 1.0, 0.0, nbar)?;
        let space = SpinSpace::new(n)?;
        let hamiltonian = dynamics::effective_hamiltonian(&space, &params);
        let start = dynamics::evolve_analytic(theta, phi, n, 1.0, 0.0)?;
        dynamics::evolve_numeric(&start, &hamiltonian, eta_t)?
    };
    let decomposition = match opt(config, "decompose-m") {
        Some(text) => {
            if config.format == OutputFormat::Csv {
                return Err(Error::InvalidArgument(
                    "--decompose-m output is json only".into(),
                ));
            }
            let m = parse_usize(text, "decompose-m")?;
            Some(dynamics::cat_decompose(&state, m, theta, phi)?)
        }
        None => None,
    };
    let mut head = serde_json::Map::new();
    head.insert("n".into(), json!(n));
    head.insert("theta".into(), json!(theta));
    head.insert("phi".into(), json!(phi));
    head.insert("eta_t".into(), json!(eta_t));
    head.insert("nbar".into(), json!(nbar));
    let derived = decomposition.as_ref().map(|d| {
        json!({ "decomposition_residual": d.residual })
    });
    if let Some(d) = decomposition {
        head.insert(
            "decomposition".into(),
            json!({
                "m": d.m,
                "theta": d.theta,
                "residual": d.residual,
                "coefficients": d.coefficients.iter().map(|&c| complex_value(c)).collect::<Vec<_>>(),
                "component_phis": d.component_phis,
            }),
        );
    }
    write_state(config, Value::Object(head), &state)?;
    Ok(derived)
}

fn exec_ghz(config: &RunConfig) -> Result<Option<Value>> {
    let n = req_u32(config, "n")?;
    if opt(config, "check").is_some() {
        let evolved = dynamics::evolve_analytic(FRAC_PI_2, -FRAC_PI_2, n, 1.0, FRAC_PI_2)?;
        let fidelity = dynamics::ghz_fidelity(&evolved)?;
        match config.format {
            OutputFormat::Json => {
                let doc = json!({ "n": n, "fidelity": fidelity });
                serialize::write_json_value(&config.output_path, &doc)?;
            }
            OutputFormat::Csv => {
                let rows = vec![
                    ("n", C64::new(f64::from(n), 0.0)),
                    ("fidelity", C64::new(fidelity, 0.0)),
                ];
                serialize::write_fields_csv(&config.output_path, &rows)?;
            }
        }
        return Ok(Some(json!({ "fidelity": fidelity })));
    }
    if n > MAX_EMITTED_ATOMS {
        return Err(Error::InvalidArgument(format!(
            "--n: amplitude output is limited to {MAX_EMITTED_ATOMS} atoms; use --check for larger n"
        )));
    }
    let state = dynamics::ghz_state(n)?;
    write_state(config, json!({ "n": n }), &state)?;
    Ok(None)
}

fn exec_ramsey(config: &RunConfig) -> Result<Option<Value>> {
    let n = req_u32(config, "n")?;
    let theta = req_f64(config, "theta")?;
    let phi = req_f64(config, "phi")?;
    let eta_t = req_f64(config, "eta-t")?;
    let alpha = req_f64(config, "alpha")?;
    let beta_min = opt_f64(config, "beta-min", -PI)?;
    let beta_max = opt_f64(config, "beta-max", PI)?;
    let points = opt_usize(config, "points", 129)?;
    let grid = linspace(beta_min, beta_max, points, "beta-min/beta-max")?;
    let state = dynamics::evolve_analytic(theta, phi, n, 1.0, eta_t)?;
    let fringe = dynamics::ramsey_fringe(&state, alpha, &grid)?;
    let mixture = match opt(config, "mixture-m") {
        Some(text) => {
            let m = parse_usize(text, "mixture-m")?;
            let d = dynamics::cat_decompose(&state, m, theta, phi)?;
            let components: Vec<StateVector> = d
                .component_phis
                .iter()
                .map(|&cp| dynamics::evolve_analytic(d.theta, cp, n, 1.0, 0.0))
                .collect::<Result<_>>()?;
            let weights: Vec<f64> = d.coefficients.iter().map(|c| c.norm_sqr()).collect();
            Some(dynamics::ramsey_fringe_mixture(
                &components,
                &weights,
                alpha,
                &grid,
            )?)
        }
        None => None,
    };
    let derived = mixture.as_ref().map(|mix| {
        let max_gap = fringe
            .iter()
            .zip(mix)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0f64, f64::max);
        json!({ "max_gap": max_gap })
    });
    match config.format {
        OutputFormat::Json => {
            let mut doc = serde_json::Map::new();
            doc.insert("n".into(), json!(n));
            doc.insert("alpha".into(), json!(alpha));
            doc.insert("eta_t".into(), json!(eta_t));
            doc.insert("beta".into(), json!(grid));
            doc.insert("p".into(), json!(fringe));
            if let Some(mix) = &mixture {
                doc.insert("mixture".into(), json!(mix));
            }
            serialize::write_json_value(&config.output_path, &Value::Object(doc))?;
        }
        OutputFormat::Csv => {
            let mut names = vec!["beta", "p"];
            let mut columns: Vec<&[f64]> = vec![&grid, &fringe];
            if let Some(mix) = &mixture {
                names.push("mixture");
                columns.push(mix);
            }
            serialize::write_columns_csv(&config.output_path, &names, &columns)?;
        }
    }
    Ok(derived)
}

// ---- invariant batteries ----

struct Battery {
    failures: usize,
}

impl Battery {
    fn new() -> Self {
        Battery { failures: 0 }
    }

    fn check(&mut self, label: &str, outcome: Result<bool>) {
        match outcome {
            Ok(true) => println!("ok {label}"),
            Ok(false) => {
                println!("FAIL {label}");
                self.failures += 1;
            }
            Err(err) => {
                println!("FAIL {label}: {err}");
                self.failures += 1;
            }
        }
    }

    fn finish(self) -> Result<()> {
        if self.failures == 0 {
            Ok(())
        } else {
            Err(Error::Numerical(format!(
                "{} invariant check(s) failed",
                self.failures
            )))
        }
    }
}

fn residual_against(state: &StateVector, op_applied: &ndarray::Array1<C64>, z: C64) -> f64 {
    let diff = op_applied - &state.amplitudes().mapv(|a| a * z);
    diff.iter().map(|d| d.norm_sqr()).sum::<f64>().sqrt()
}

fn run_battery(command: CommandKind) -> Result<()> {
    let mut battery = Battery::new();
    match command {
        CommandKind::State => battery_state(&mut battery),
        CommandKind::Uncertainty => battery_uncertainty(&mut battery),
        CommandKind::Wigner => battery_wigner(&mut battery),
        CommandKind::Quadgrid => battery_quadgrid(&mut battery),
        CommandKind::Catdyn => battery_catdyn(&mut battery),
        CommandKind::Ghz => battery_ghz(&mut battery),
        CommandKind::Ramsey => battery_ramsey(&mut battery),
    }
    battery.finish()
}

fn battery_state(battery: &mut Battery) {
    battery.check("coherent displacement eigenrelation", (|| {
        let space = ModeSpace::new(40)?;
        let alpha = C64::new(0.8, 0.3);
        let state = boson::coherent(&space, alpha)?;
        let applied = annihilation(&space).apply(&state)?;
        Ok(residual_against(&state, &applied, alpha) < 1e-9)
    })());
    battery.check("even cat parity support", (|| {
        let space = ModeSpace::new(60)?;
        let state = boson::even_odd_cat(&space, C64::new(1.2, 0.0), Parity::Even)?;
        let worst = state
            .amplitudes()
            .iter()
            .skip(1)
            .step_by(2)
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        Ok(worst < 1e-12)
    })());
    battery.check("pair-coherent intermodal eigenrelation", (|| {
        let space = ModeSpace::new(30)?;
        let params = PairCoherentParams {
            xi: C64::new(1.5, 0.0),
            q: 1,
        };
        let state = boson::pair_coherent(&space, &space, &params)?;
        let ab = tensor(&annihilation(&space), &annihilation(&space));
        let applied = ab.apply(&state)?;
        Ok(residual_against(&state, &applied, params.xi) < 1e-9)
    })());
    battery.check("squeezed quadrature eigenrelation", (|| {
        let space = ModeSpace::new(80)?;
        let params = SqueezeParams::from_lambda(C64::new(2.0, 0.0), C64::new(0.4, 0.0))?;
        let state = boson::squeezed_coherent(&space, &params)?;
        let op = position(&space).add(&momentum(&space).scale(C64::new(0.0, 1.0) * params.lambda))?;
        let applied = op.apply(&state)?;
        Ok(residual_against(&state, &applied, params.quadrature_eigenvalue()) < 1e-8)
    })());
}

fn battery_uncertainty(battery: &mut Battery) {
    battery.check("unit-lambda vacuum saturation", (|| {
        let space = ModeSpace::new(60)?;
        let x = position(&space);
        let p = momentum(&space);
        let solutions = uncertainty::solve_min_uncertainty(&x, &p, C64::new(1.0, 0.0))?;
        let best = solutions
            .iter()
            .min_by(|s, t| s.residual.total_cmp(&t.residual))
            .ok_or_else(|| Error::Numerical("no solution".into()))?;
        let report = uncertainty::uncertainty_report(&best.state, &x, &p)?;
        Ok((report.product - 0.25).abs() < 1e-9
            && report.equality_residual.abs() < 1e-9
            && best.eigenvalue.norm() < 1e-9)
    })());
    battery.check("lambda-two variance ratio", (|| {
        let space = ModeSpace::new(100)?;
        let x = position(&space);
        let p = momentum(&space);
        let solutions = uncertainty::solve_min_uncertainty(&x, &p, C64::new(2.0, 0.0))?;
        let best = solutions
            .iter()
            .min_by(|s, t| s.residual.total_cmp(&t.residual))
            .ok_or_else(|| Error::Numerical("no solution".into()))?;
        let report = uncertainty::uncertainty_report(&best.state, &x, &p)?;
        Ok((report.var_a / report.var_b - 4.0).abs() < 1e-6
            && report.equality_residual.abs() < 1e-9)
    })());
    battery.check("report bound ordering", (|| {
        let space = ModeSpace::new(30)?;
        let amps = ndarray::Array1::from_iter((0..space.dim()).map(|k| {
            let k = k as f64;
            C64::new((0.3 * k + 0.2).sin(), (0.1 * k).cos()) * (-0.1 * k).exp()
        }));
        let state = StateVector::new(space.basis(), amps)?;
        let report =
            uncertainty::uncertainty_report(&state, &position(&space), &momentum(&space))?;
        Ok(report.product >= report.bound - 1e-10 && report.equality_residual >= -1e-10)
    })());
}

fn battery_wigner(battery: &mut Battery) {
    battery.check("vacuum peak height", (|| {
        let g = GaussianState::new(0.5, 0.5, 0.0)?;
        let w = g.wigner_eval(&[0.0], &[0.0])?;
        Ok((w[[0, 0]] - 1.0 / PI).abs() < 1e-12)
    })());
    battery.check("thermal entropy benchmark", (|| {
        let g = GaussianState::new(1.5, 1.5, 0.0)?;
        Ok((g.sigma() - 1.0).abs() < 1e-12 && (g.entropy()? - 2.0 * 2.0f64.ln()).abs() < 1e-12)
    })());
    battery.check("grid unit mass", (|| {
        let g = GaussianState::new(0.5, 0.5, 0.0)?;
        let axis: Vec<f64> = (0..121).map(|i| -6.0 + 0.1 * i as f64).collect();
        let w = g.wigner_eval(&axis, &axis)?;
        let weights = boson::trapezoid_weights(&axis);
        let mut mass = 0.0;
        for (i, wi) in weights.iter().enumerate() {
            for (j, wj) in weights.iter().enumerate() {
                mass += wi * wj * w[[i, j]];
            }
        }
        Ok((mass - 1.0).abs() < 1e-6)
    })());
}

fn battery_quadgrid(battery: &mut Battery) {
    battery.check("two-mode ground profile", (|| {
        let space = ModeSpace::new(20)?;
        let params = PairCoherentParams {
            xi: C64::new(0.0, 0.0),
            q: 0,
        };
        let state = boson::pair_coherent(&space, &space, &params)?;
        let axis: Vec<f64> = (0..81).map(|i| -4.0 + 0.1 * i as f64).collect();
        let psi = boson::quadrature_wavefunction(&state, &axis, &axis)?;
        let mut worst = 0.0f64;
        for (i, &x) in axis.iter().enumerate() {
            for (j, &y) in axis.iter().enumerate() {
                let expected = (-(x * x + y * y) / 2.0).exp() / PI.sqrt();
                worst = worst.max((psi[[i, j]].norm() - expected).abs());
            }
        }
        Ok(worst < 1e-8)
    })());
    battery.check("pair grid unit mass and fit residual", (|| {
        let space = ModeSpace::new(25)?;
        let params = PairCoherentParams {
            xi: C64::new(1.0, 0.0),
            q: 0,
        };
        let state = boson::pair_coherent(&space, &space, &params)?;
        let axis: Vec<f64> = (0..141).map(|i| -7.0 + 0.1 * i as f64).collect();
        let density = boson::quadrature_wavefunction(&state, &axis, &axis)?.mapv(|z| z.norm_sqr());
        let weights = boson::trapezoid_weights(&axis);
        let mut mass = 0.0;
        for (i, wi) in weights.iter().enumerate() {
            for (j, wj) in weights.iter().enumerate() {
                mass += wi * wj * density[[i, j]];
            }
        }
        let residual = boson::gaussian_fit_residual(&axis, &axis, &density)?;
        Ok((mass - 1.0).abs() < 1e-6 && residual.is_finite() && residual >= 0.0)
    })());
}

fn battery_catdyn(battery: &mut Battery) {
    battery.check("analytic equals matrix propagator", (|| {
        let analytic = dynamics::evolve_analytic(0.9, 0.4, 8, 1.0, 0.37)?;
        let params = CavityParams::new(1.0, 1.0, 0.0, 0.0)?;
        let hamiltonian = dynamics::effective_hamiltonian(&SpinSpace::new(8)?, &params);
        let start = dynamics::evolve_analytic(0.9, 0.4, 8, 1.0, 0.0)?;
        let numeric = dynamics::evolve_numeric(&start, &hamiltonian, 0.37)?;
        Ok(analytic.fidelity(&numeric)? > 1.0 - 1e-10)
    })());
    battery.check("full revival", (|| {
        let start = dynamics::evolve_analytic(FRAC_PI_2, 0.3, 6, 1.0, 0.0)?;
        let revived = dynamics::evolve_analytic(FRAC_PI_2, 0.3, 6, 1.0, 2.0 * PI)?;
        Ok(start.fidelity(&revived)? > 1.0 - 1e-10)
    })());
    battery.check("quarter-period two-component split", (|| {
        let state = dynamics::evolve_analytic(FRAC_PI_2, 0.0, 6, 1.0, FRAC_PI_2)?;
        let d = dynamics::cat_decompose(&state, 2, FRAC_PI_2, 0.0)?;
        let weights_even = d
            .coefficients
            .iter()
            .all(|c| (c.norm_sqr() - 0.5).abs() < 1e-9);
        Ok(d.residual < 1e-9 && weights_even)
    })());
}

fn battery_ghz(battery: &mut Battery) {
    for n in [4u32, 5] {
        battery.check(&format!("{n}-atom dynamics equivalence"), (|| {
            let evolved = dynamics::evolve_analytic(FRAC_PI_2, -FRAC_PI_2, n, 1.0, FRAC_PI_2)?;
            Ok(dynamics::ghz_fidelity(&evolved)? > 1.0 - 1e-10)
        })());
    }
    battery.check("uniform branch magnitudes", (|| {
        let state = dynamics::ghz_state(6)?;
        let expected = 2.0f64.powi(-3);
        Ok(state
            .amplitudes()
            .iter()
            .all(|z| (z.norm() - expected).abs() < 1e-12))
    })());
}

fn battery_ramsey(battery: &mut Battery) {
    battery.check("self peak", (|| {
        let state = dynamics::evolve_analytic(0.7, 0.3, 5, 1.0, 0.0)?;
        let p = dynamics::ramsey_fringe(&state, 0.7, &[0.1, 0.3, 0.5])?;
        Ok((p[1] - 1.0).abs() < 1e-12 && p.iter().all(|&v| v <= 1.0 + 1e-12))
    })());
    battery.check("mixture averaging", (|| {
        let a = dynamics::evolve_analytic(0.7, 0.2, 5, 1.0, 0.0)?;
        let b = dynamics::evolve_analytic(0.7, 1.2, 5, 1.0, 0.0)?;
        let grid: Vec<f64> = (0..33).map(|i| -PI + 2.0 * PI * i as f64 / 32.0).collect();
        let pa = dynamics::ramsey_fringe(&a, 0.7, &grid)?;
        let pb = dynamics::ramsey_fringe(&b, 0.7, &grid)?;
        let mix = dynamics::ramsey_fringe_mixture(
            &[a, b],
            &[0.25, 0.75],
            0.7,
            &grid,
        )?;
        let worst = mix
            .iter()
            .zip(pa.iter().zip(&pb))
            .map(|(m, (x, y))| (m - (0.25 * x + 0.75 * y)).abs())
            .fold(0.0f64, f64::max);
        Ok(worst < 1e-14)
    })());
    battery.check("interference gap ceiling", (|| {
        let n = 5u32;
        let state = dynamics::evolve_analytic(FRAC_PI_2, 0.0, n, 1.0, FRAC_PI_2)?;
        let d = dynamics::cat_decompose(&state, 2, FRAC_PI_2, 0.0)?;
        let components: Vec<StateVector> = d
            .component_phis
            .iter()
            .map(|&cp| dynamics::evolve_analytic(d.theta, cp, n, 1.0, 0.0))
            .collect::<Result<_>>()?;
        let weights: Vec<f64> = d.coefficients.iter().map(|c| c.norm_sqr()).collect();
        let grid: Vec<f64> = (0..65).map(|i| -PI + 2.0 * PI * i as f64 / 64.0).collect();
        let p = dynamics::ramsey_fringe(&state, FRAC_PI_2, &grid)?;
        let mix = dynamics::ramsey_fringe_mixture(&components, &weights, FRAC_PI_2, &grid)?;
        let gap = p
            .iter()
            .zip(&mix)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max);
        let ceiling = 2.0f64.powi(-(n as i32));
        Ok(gap <= ceiling + 1e-10 && gap > 0.03)
    })());
}
