//! Command-line front end for the `toric-mirror` library.
//!
//! [`run`] does all the work and returns the exit code together with the
//! text destined for stdout and stderr, so the binary is a thin wrapper.

use std::path::Path;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use toric_mirror::builtins::{self, BUILTIN_NAMES};
use toric_mirror::fan::{Fan, FanError, Gate, Toric};
use toric_mirror::mirror::{MirrorEngine, MirrorError};
use toric_mirror::seidel;
use toric_mirror::series::{SeriesError, TruncatedSeries};
use toric_mirror::verify::{self, VerificationReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_GATE: i32 = 3;
pub const EXIT_CHECKS: i32 = 4;

pub const DEFAULT_ORDER: u32 = 8;
pub const DEFAULT_ORDER_3FOLD: u32 = 6;

#[derive(Debug, Parser)]
#[command(name = "toric-mirror", version, about = "Mirror map, disc potential and Seidel elements of toric manifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Path to a fan TOML file, or a builtin name (see `examples`).
    #[arg(long)]
    pub fan: String,
    /// Truncation order (total nef degree); overrides ORDER and the file.
    #[arg(long)]
    pub order: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the fan and print its divisor data and cones.
    Validate(Common),
    /// Mirror map log q = log y + g(y) and its inverse.
    MirrorMap(Common),
    /// Hypergeometric series g_0^(j)(y).
    G0 {
        #[command(flatten)]
        common: Common,
        /// Ray index (1-based); all rays when omitted.
        #[arg(long)]
        j: Option<usize>,
    },
    /// Correction terms f_j(q).
    Corrections(Common),
    /// Potential W = sum_j f_j z_j.
    Potential(Common),
    /// Open Gromov-Witten invariant: the q^d coefficient of f_i.
    OpenGw {
        #[command(flatten)]
        common: Common,
        /// Ray index (1-based).
        #[arg(long)]
        i: usize,
        /// Curve class, comma-separated coordinates in the dual nef basis.
        #[arg(long, allow_hyphen_values = true)]
        d: String,
    },
    /// Batyrev elements and Seidel elements in the nef basis.
    Seidel(Common),
    /// Lifted Seidel elements in the divisor basis.
    Lifts(Common),
    /// Run the full identity suite.
    Verify(Common),
    /// List builtin fans.
    Examples {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: syntax error at line {line}, column {column}: {message}")]
    Syntax { path: String, line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Malformed { path: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Fan(FanError),
    #[error("{0}")]
    Mirror(MirrorError),
    #[error("identity checks failed")]
    ChecksFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Syntax { .. } | CliError::Malformed { .. } | CliError::Io { .. } => {
                EXIT_USAGE
            }
            CliError::Fan(e) => match e {
                FanError::GateFailed { .. }
                | FanError::BadWall { .. }
                | FanError::InvalidBasis(_)
                | FanError::BasisSearchFailed(_) => EXIT_GATE,
                _ => EXIT_USAGE,
            },
            CliError::Mirror(MirrorError::OutOfModel(_) | MirrorError::RayIndex { .. }) => EXIT_USAGE,
            CliError::Mirror(_) => EXIT_INTERNAL,
            CliError::ChecksFailed => EXIT_CHECKS,
        }
    }
}

impl From<FanError> for CliError {
    fn from(e: FanError) -> Self {
        CliError::Fan(e)
    }
}

impl From<MirrorError> for CliError {
    fn from(e: MirrorError) -> Self {
        CliError::Mirror(e)
    }
}

impl From<SeriesError> for CliError {
    fn from(e: SeriesError) -> Self {
        CliError::Mirror(e.into())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FanFile {
    fan: FanSection,
    basis: Option<BasisSection>,
    options: Option<OptionsSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FanSection {
    dim: usize,
    rays: Vec<Vec<i64>>,
    max_cones: Vec<Vec<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BasisSection {
    divisor_matrix: Vec<Vec<i64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptionsSection {
    order: Option<u32>,
}

/// A structurally valid fan with the optional extras of its source.
#[derive(Debug, Clone)]
pub struct FanInput {
    pub fan: Fan,
    pub divisor_matrix: Option<Vec<Vec<i64>>>,
    pub order: Option<u32>,
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

pub fn parse_fan_str(text: &str, path: &str) -> Result<FanInput, CliError> {
    let file: FanFile = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_column(text, s.start));
        CliError::Syntax { path: path.into(), line, column, message: e.message().trim().to_string() }
    })?;
    let mut cones = Vec::with_capacity(file.fan.max_cones.len());
    for (c, cone) in file.fan.max_cones.iter().enumerate() {
        if cone.contains(&0) {
            return Err(CliError::Malformed {
                path: path.into(),
                message: format!("maximal cone {} contains index 0; ray indices are 1-based", c + 1),
            });
        }
        cones.push(cone.iter().map(|i| i - 1).collect());
    }
    let fan = Fan::new(file.fan.dim, file.fan.rays, cones)?;
    Ok(FanInput {
        fan,
        divisor_matrix: file.basis.map(|b| b.divisor_matrix),
        order: file.options.and_then(|o| o.order),
    })
}

pub fn parse_fan_file(path: &Path) -> Result<FanInput, CliError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io { path: shown.clone(), message: e.to_string() })?;
    parse_fan_str(&text, &shown)
}

/// Builtin name or file path.
pub fn load_fan(source: &str) -> Result<FanInput, CliError> {
    if let Some(b) = builtins::builtin(source) {
        return Ok(FanInput { fan: b.fan(), divisor_matrix: Some(b.divisor_matrix), order: None });
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "'{source}' is neither a fan file nor a builtin ({})",
            BUILTIN_NAMES.join(", ")
        )));
    }
    parse_fan_file(path)
}

/// Flag, then `ORDER`, then the file's `[options] order`, then the default.
pub fn resolve_order(flag: Option<u32>, env: Option<&str>, file: Option<u32>, dim: usize) -> Result<u32, CliError> {
    let env = match env {
        Some(s) => Some(
            s.trim()
                .parse::<u32>()
                .map_err(|_| CliError::Usage(format!("ORDER must be a positive integer, got '{s}'")))?,
        ),
        None => None,
    };
    let default = if dim >= 3 { DEFAULT_ORDER_3FOLD } else { DEFAULT_ORDER };
    let n = flag.or(env).or(file).unwrap_or(default);
    if n == 0 {
        return Err(CliError::Usage("order must be at least 1".into()));
    }
    Ok(n)
}

fn gate_error(e: FanError) -> CliError {
    if let FanError::GateFailed { gate: Gate::SemiPositive, detail } = &e {
        return CliError::Fan(FanError::GateFailed {
            gate: Gate::SemiPositive,
            detail: format!(
                "{detail}; the potential and correction terms are computed only when c1 pairs nonnegatively with every curve class"
            ),
        });
    }
    CliError::Fan(e)
}

struct Session {
    engine: MirrorEngine,
    format: Format,
}

fn session(common: &Common, env_order: Option<&str>) -> Result<Session, CliError> {
    let input = load_fan(&common.fan)?;
    let order = resolve_order(common.order, env_order, input.order, input.fan.dim())?;
    let toric = Toric::new(input.fan, input.divisor_matrix).map_err(gate_error)?;
    let engine = MirrorEngine::new(Arc::new(toric), order)?;
    Ok(Session { engine, format: common.format })
}

fn series_json(s: &TruncatedSeries) -> Value {
    serde_json::to_value(s.to_records()).expect("records serialize")
}

fn pretty_json(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

fn cmd_validate(common: &Common) -> Result<String, CliError> {
    let input = load_fan(&common.fan)?;
    let report = input.fan.validate();
    let gate = report.first_failure();
    let toric = match gate {
        None => Some(Toric::new(input.fan.clone(), input.divisor_matrix.clone()).map_err(gate_error)?),
        Some(_) => None,
    };
    let out = match common.format {
        Format::Json => {
            let mut v = json!({
                "smooth": report.smooth,
                "complete": report.complete,
                "projective": report.projective,
                "semi_positive": report.semi_positive,
                "fano": report.fano,
            });
            if let Some(t) = &toric {
                let walls: Vec<Value> = t
                    .wall_curves()
                    .iter()
                    .map(|w| json!({ "wall": one_based(&w.wall), "pairings": w.pairings }))
                    .collect();
                v["divisor_matrix"] = json!(t.divisor_matrix().rows());
                v["wall_curves"] = Value::Array(walls);
                v["mori_generators"] = json!(t.cones().mori_generators);
                v["nef_generators"] = json!(t.cones().nef_generators);
                v["fan_polytope_vertices"] =
                    json!(one_based(&t.fan_polytope_vertices().iter().copied().collect::<Vec<_>>()));
            }
            pretty_json(&v)
        }
        Format::Text => {
            let mut s = format!("{report}\n");
            if let Some(t) = &toric {
                s.push_str("divisor matrix:\n");
                for row in t.divisor_matrix().rows() {
                    s.push_str(&format!("  {row:?}\n"));
                }
                s.push_str(&format!("mori generators: {:?}\n", t.cones().mori_generators));
                s.push_str(&format!("nef generators: {:?}\n", t.cones().nef_generators));
                s.push_str(&format!(
                    "fan polytope vertices: {:?}\n",
                    one_based(&t.fan_polytope_vertices().iter().copied().collect::<Vec<_>>())
                ));
            }
            s
        }
    };
    match gate {
        None => Ok(out),
        Some(g) => {
            let detail = match Toric::new(input.fan, None) {
                Err(e) => gate_error(e).to_string(),
                Ok(_) => format!("fan is not {g}"),
            };
            Err(CliError::Fan(FanError::GateFailed { gate: g, detail: format!("{detail}\n{out}") }))
        }
    }
}

fn cmd_mirror_map(s: &Session) -> String {
    let map = s.engine.mirror_map();
    let warn = !map.g00.is_zero();
    match s.format {
        Format::Json => pretty_json(&json!({
            "order": s.engine.order(),
            "forward": map.forward.iter().map(series_json).collect::<Vec<_>>(),
            "inverse": map.inverse.iter().map(series_json).collect::<Vec<_>>(),
            "g00": series_json(&map.g00),
            "scalar_defect": warn,
        })),
        Format::Text => {
            let mut out = format!("order {}\n", s.engine.order());
            for (a, g) in map.forward.iter().enumerate() {
                out.push_str(&format!("g_{}(y) = {}\n", a + 1, g.pretty("y")));
            }
            for (a, u) in map.inverse.iter().enumerate() {
                out.push_str(&format!("y_{0} = q_{0} * ({1})\n", a + 1, u.pretty("q")));
            }
            out.push_str(&format!("g00(y) = {}\n", map.g00.pretty("y")));
            if warn {
                out.push_str("warning: the 1/z term has a nonzero scalar part, ignored by the mirror map\n");
            }
            out
        }
    }
}

fn cmd_g0(s: &Session, j: Option<usize>) -> Result<String, CliError> {
    let m = s.engine.toric().m();
    let indices: Vec<usize> = match j {
        Some(j) if j == 0 || j > m => {
            return Err(CliError::Usage(format!("--j must lie in 1..={m}")));
        }
        Some(j) => vec![j - 1],
        None => (0..m).collect(),
    };
    Ok(match s.format {
        Format::Json => pretty_json(&json!({
            "order": s.engine.order(),
            "g0": indices.iter().map(|&j| json!({ "j": j + 1, "series": series_json(&s.engine.g0()[j]) })).collect::<Vec<_>>(),
        })),
        Format::Text => indices
            .iter()
            .map(|&j| format!("g0_{}(y) = {}\n", j + 1, s.engine.g0()[j].pretty("y")))
            .collect(),
    })
}

fn cmd_corrections(s: &Session) -> String {
    let f = &s.engine.corrections().f;
    match s.format {
        Format::Json => pretty_json(&json!({
            "order": s.engine.order(),
            "f": f.iter().map(series_json).collect::<Vec<_>>(),
        })),
        Format::Text => f
            .iter()
            .enumerate()
            .map(|(j, fj)| format!("f_{}(q) = {}\n", j + 1, fj.pretty("q")))
            .collect(),
    }
}

fn cmd_potential(s: &Session) -> String {
    let w = s.engine.potential();
    match s.format {
        Format::Json => pretty_json(&json!({
            "order": s.engine.order(),
            "disc_order": w.total.order(),
            "weights": s.engine.toric().disc_ring().weights(),
            "terms": w.terms.iter().map(series_json).collect::<Vec<_>>(),
            "W": series_json(&w.total),
        })),
        Format::Text => {
            let mut out = format!("W = {}\n", w.total.pretty("z"));
            for (j, f) in w.f.iter().enumerate() {
                out.push_str(&format!("w_{0} = ({1}) * z{0}\n", j + 1, f.pretty("q")));
            }
            out
        }
    }
}

fn parse_class(text: &str) -> Result<Vec<i64>, CliError> {
    let trimmed = text.trim().trim_start_matches('[').trim_end_matches(']');
    trimmed
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<i64>()
                .map_err(|_| CliError::Usage(format!("--d must be comma-separated integers, got '{text}'")))
        })
        .collect()
}

fn cmd_open_gw(s: &Session, i: usize, d: &str) -> Result<String, CliError> {
    let m = s.engine.toric().m();
    if i == 0 || i > m {
        return Err(CliError::Usage(format!("--i must lie in 1..={m}")));
    }
    let d = parse_class(d)?;
    let n = s.engine.open_gw(i - 1, &d)?;
    Ok(match s.format {
        Format::Json => pretty_json(&json!({ "i": i, "d": d, "value": n.to_string() })),
        Format::Text => format!("{n}\n"),
    })
}

fn element_text(name: &str, j: usize, coeffs: &[TruncatedSeries], basis: &str) -> String {
    let parts: Vec<String> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(a, c)| format!("({}) {}{}", c.pretty("q"), basis, a + 1))
        .collect();
    let body = if parts.is_empty() { "0".to_string() } else { parts.join(" + ") };
    format!("{name}_{} = {body}\n", j + 1)
}

fn cmd_seidel(s: &Session) -> Result<String, CliError> {
    let batyrev = seidel::batyrev_elements(&s.engine)?;
    let seidel_el = seidel::seidel_elements(&s.engine)?;
    Ok(match s.format {
        Format::Json => pretty_json(&json!({
            "order": s.engine.order(),
            "batyrev": batyrev.iter().map(|e| e.coeffs.iter().map(series_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "seidel": seidel_el.iter().map(|e| e.coeffs.iter().map(series_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })),
        Format::Text => {
            let mut out = String::new();
            for (j, e) in batyrev.iter().enumerate() {
                out.push_str(&element_text("D~", j, &e.coeffs, "p"));
            }
            for (j, e) in seidel_el.iter().enumerate() {
                out.push_str(&element_text("S~", j, &e.coeffs, "p"));
            }
            out
        }
    })
}

fn cmd_lifts(s: &Session) -> Result<String, CliError> {
    let lifts = seidel::seidel_lifts_closed(&s.engine)?;
    Ok(match s.format {
        Format::Json => pretty_json(&json!({
            "order": s.engine.order(),
            "lifts": lifts.iter().map(|e| e.coeffs.iter().map(series_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })),
        Format::Text => lifts
            .iter()
            .enumerate()
            .map(|(j, e)| element_text("S^", j, &e.coeffs, "D"))
            .collect(),
    })
}

/// Report with 1-based `j`/`k` as printed by the CLI.
pub fn report_for_output(report: &VerificationReport) -> VerificationReport {
    let mut r = report.clone();
    for c in &mut r.checks {
        for f in &mut c.failures {
            f.j = f.j.map(|x| x + 1);
            f.k = f.k.map(|x| x + 1);
        }
    }
    r
}

fn cmd_verify(s: &Session) -> Result<(String, bool), CliError> {
    let report = report_for_output(&verify::verification_report(&s.engine)?);
    let pass = report.pass();
    let out = match s.format {
        Format::Json => format!("{}\n", report.to_json()),
        Format::Text => {
            let mut out = format!("fan {}\norder {}\n", report.fan_hash, report.order);
            for c in &report.checks {
                if c.pass {
                    out.push_str(&format!("PASS {}\n", c.name));
                } else {
                    out.push_str(&format!("FAIL {} ({} coefficient(s))\n", c.name, c.failures.len()));
                    for f in c.failures.iter().take(5) {
                        out.push_str(&format!(
                            "  j={} k={} exp={:?} coeff={}\n",
                            f.j.map_or("-".into(), |x| x.to_string()),
                            f.k.map_or("-".into(), |x| x.to_string()),
                            f.exp,
                            f.coeff
                        ));
                    }
                }
            }
            out
        }
    };
    Ok((out, pass))
}

fn cmd_examples(format: Format) -> String {
    let all = builtins::all_builtins();
    match format {
        Format::Json => pretty_json(&Value::Array(
            all.iter()
                .map(|b| {
                    json!({
                        "name": b.name,
                        "description": b.description,
                        "dim": b.dim,
                        "rays": b.rays,
                        "max_cones": b.max_cones.iter().map(|c| one_based(c)).collect::<Vec<_>>(),
                        "divisor_matrix": b.divisor_matrix,
                    })
                })
                .collect(),
        )),
        Format::Text => all.iter().map(|b| format!("{:<6} {}\n", b.name, b.description)).collect(),
    }
}

/// Exit code and captured output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn ensure_newline(mut s: String) -> String {
    if !s.is_empty() && !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

pub fn execute(cli: &Cli, env_order: Option<&str>) -> Result<(String, bool), CliError> {
    let ok = |s: String| Ok((s, true));
    match &cli.command {
        Command::Validate(c) => ok(cmd_validate(c)?),
        Command::MirrorMap(c) => ok(cmd_mirror_map(&session(c, env_order)?)),
        Command::G0 { common, j } => ok(cmd_g0(&session(common, env_order)?, *j)?),
        Command::Corrections(c) => ok(cmd_corrections(&session(c, env_order)?)),
        Command::Potential(c) => ok(cmd_potential(&session(c, env_order)?)),
        Command::OpenGw { common, i, d } => ok(cmd_open_gw(&session(common, env_order)?, *i, d)?),
        Command::Seidel(c) => ok(cmd_seidel(&session(c, env_order)?)?),
        Command::Lifts(c) => ok(cmd_lifts(&session(c, env_order)?)?),
        Command::Verify(c) => cmd_verify(&session(c, env_order)?),
        Command::Examples { format } => ok(cmd_examples(*format)),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, S>(args: I, env_order: Option<&str>) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: text }
            } else {
                Outcome { code: EXIT_OK, stdout: text, stderr: String::new() }
            };
        }
    };
    match execute(&cli, env_order) {
        Ok((out, true)) => Outcome { code: EXIT_OK, stdout: ensure_newline(out), stderr: String::new() },
        Ok((out, false)) => Outcome {
            code: CliError::ChecksFailed.exit_code(),
            stdout: ensure_newline(out),
            stderr: format!("error: {}\n", CliError::ChecksFailed),
        },
        Err(e) => Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}
