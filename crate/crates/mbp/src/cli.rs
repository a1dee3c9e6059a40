//! The `mbp` command line.

use crate::json::{self, FormatError};
use clap::{Parser, Subcommand, ValueEnum};
use mbp_core::algebra::{build_based_algebra, build_bipartite_problem, check_rdcc, parse_presentation, quiver_problem, AlgebraError};
use mbp_core::canonical::{self, CanonicalError};
use mbp_core::classify::{detect_wild_config, reduction_tree, TreeOptions};
use mbp_core::exact::{fmt_q, parse_q, RatMatrix, Q};
use mbp_core::problem::{Problem, Representation};
use mbp_core::reduce::ReduceError;
use mbp_core::weyr::{weyr_canonical, WeyrError};
use serde_json::{json, Value};
use std::io::IsTerminal;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "mbp", version, about = "Matrix bimodule problems: reductions, canonical forms and wild configurations")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Weyr canonical form of a square JSON matrix.
    Weyr { matrix: PathBuf },
    /// Problem JSON from a quiver file.
    Build {
        quiver: PathBuf,
        /// Representations of the quiver itself instead of the bipartite
        /// problem of its algebra; relations are ignored.
        #[arg(long)]
        reps: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Checks the problem axioms.
    Validate { problem: PathBuf },
    /// Differentials of the solid generators.
    Diffs { problem: PathBuf },
    /// Canonical form of a representation.
    Canon {
        #[arg(long)]
        problem: Option<PathBuf>,
        #[arg(long)]
        rep: Option<PathBuf>,
        /// Writes the reduction trace as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
        files: Vec<PathBuf>,
    },
    /// Whether two representations are isomorphic.
    Iso {
        #[arg(long)]
        problem: Option<PathBuf>,
        files: Vec<PathBuf>,
    },
    /// Whether a representation is indecomposable.
    Indec {
        #[arg(long)]
        problem: Option<PathBuf>,
        #[arg(long)]
        rep: Option<PathBuf>,
        files: Vec<PathBuf>,
    },
    /// Explores the reductions at a size vector.
    Tree {
        #[arg(long)]
        problem: PathBuf,
        /// Comma-separated class sizes.
        #[arg(long)]
        sizes: String,
        /// Comma-separated eigenvalue samples.
        #[arg(long, default_value = "0")]
        eigen: String,
        #[arg(long, default_value_t = 64)]
        depth: usize,
        /// Adds the branch keeping each loop as a parameter.
        #[arg(long)]
        param: bool,
    },
    /// Looks for a wild configuration at the first solid generator.
    DetectWild {
        #[arg(long)]
        problem: Option<PathBuf>,
        file: Option<PathBuf>,
    },
    /// The reduction sequence from a problem to a descendant.
    Replay {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        target: PathBuf,
    },
}

/// Exit code with what goes to standard output and standard error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandResult {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
    Format(String),
    Algebra(AlgebraError),
    Canonical(CanonicalError),
    Reduce(ReduceError),
    Weyr(WeyrError),
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::Format(e.0)
    }
}

impl From<AlgebraError> for Failure {
    fn from(e: AlgebraError) -> Self {
        Failure::Algebra(e)
    }
}

impl From<CanonicalError> for Failure {
    fn from(e: CanonicalError) -> Self {
        match e {
            CanonicalError::Weyr(w) => Failure::Weyr(w),
            CanonicalError::Reduce(r) => Failure::Reduce(r),
            e => Failure::Canonical(e),
        }
    }
}

impl From<ReduceError> for Failure {
    fn from(e: ReduceError) -> Self {
        Failure::Reduce(e)
    }
}

impl From<WeyrError> for Failure {
    fn from(e: WeyrError) -> Self {
        Failure::Weyr(e)
    }
}

impl Failure {
    fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "Usage",
            Failure::Io(_) => "Io",
            Failure::Format(_) => "Format",
            Failure::Algebra(_) => "Algebra",
            Failure::Canonical(_) => "Canonical",
            Failure::Reduce(ReduceError::NotRegularizable { .. }) => "NotRegularizable",
            Failure::Reduce(_) => "Reduction",
            Failure::Weyr(WeyrError::NonSplitSpectrum(_)) => "NonSplitSpectrum",
            Failure::Weyr(_) => "Weyr",
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(s) | Failure::Io(s) | Failure::Format(s) => s.clone(),
            Failure::Algebra(e) => e.to_string(),
            Failure::Canonical(e) => e.to_string(),
            Failure::Reduce(e) => e.to_string(),
            Failure::Weyr(e) => e.to_string(),
        }
    }
}

struct Ctx {
    format: Format,
    color: bool,
}

impl Ctx {
    fn verdict(&self, v: bool) -> String {
        let word = if v { "true" } else { "false" };
        if self.color {
            format!("\x1b[{}m{word}\x1b[0m", if v { 32 } else { 31 })
        } else {
            word.to_string()
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::Format(format!("{}: {e}", path.display())))
}

/// A problem from its JSON or from a quiver file (bipartite problem).
fn load_problem(path: &Path) -> Result<Problem, Failure> {
    let text = read(path)?;
    if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(&text).map_err(|e| Failure::Format(format!("{}: {e}", path.display())))?;
        Ok(json::problem_from_json(&v)?)
    } else {
        let pres = parse_presentation(&text)?;
        Ok(build_bipartite_problem(&build_based_algebra(&pres)?))
    }
}

fn load_rep(p: &Problem, path: &Path) -> Result<Representation, Failure> {
    Ok(json::rep_from_json(p, &read_json(path)?)?)
}

fn problem_arg(flag: Option<PathBuf>, files: &mut Vec<PathBuf>) -> Result<PathBuf, Failure> {
    match flag {
        Some(p) => Ok(p),
        None if !files.is_empty() => Ok(files.remove(0)),
        None => Err(Failure::Usage("missing problem file".into())),
    }
}

// every JSON document carries the schema version
fn pretty(v: &Value) -> String {
    let mut v = v.clone();
    if let Value::Object(m) = &mut v {
        m.entry("version").or_insert_with(|| json::VERSION.into());
    }
    let mut s = serde_json::to_string_pretty(&v).expect("serializable");
    s.push('\n');
    s
}

fn matrix_text(m: &RatMatrix, indent: &str) -> String {
    let cells: Vec<Vec<String>> = (0..m.rows()).map(|i| (0..m.cols()).map(|j| fmt_q(m.get(i, j))).collect()).collect();
    let w = cells.iter().flatten().map(|c| c.chars().count()).max().unwrap_or(1);
    let mut out = String::new();
    for row in &cells {
        let padded: Vec<String> = row.iter().map(|c| format!("{c:>w$}")).collect();
        out.push_str(&format!("{indent}[{}]\n", padded.join(" ")));
    }
    out
}

fn parse_list<T>(s: &str, what: &str, f: impl Fn(&str) -> Option<T>) -> Result<Vec<T>, Failure> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|x| f(x.trim()).ok_or_else(|| Failure::Usage(format!("bad {what} `{}`", x.trim())))).collect()
}

fn rep_text(p: &Problem, r: &Representation) -> String {
    let mut out = String::new();
    let sizes: Vec<String> = p.classes.iter().zip(&r.sizes).map(|(c, s)| format!("{}={s}", c.name)).collect();
    out.push_str(&format!("sizes: {}\n", sizes.join(" ")));
    for (a, m) in p.solid.iter().zip(&r.blocks) {
        out.push_str(&format!("{}:\n{}", a.label, matrix_text(m, "  ")));
    }
    out
}

fn exec(cli: Cli, ctx: &Ctx) -> Result<(i32, String), Failure> {
    let json_out = ctx.format == Format::Json;
    if ctx.format == Format::Dot && !matches!(cli.cmd, Cmd::Tree { .. }) {
        return Err(Failure::Usage("--format dot applies to `tree` only".into()));
    }
    match cli.cmd {
        Cmd::Weyr { matrix } => {
            let a = json::matrix_from_json(&read_json(&matrix)?, None)?;
            let (w, s) = weyr_canonical(&a)?;
            if json_out {
                return Ok((EXIT_OK, pretty(&json::weyr_to_json(&w, &s))));
            }
            let mut out = String::new();
            for (l, m) in &w.eigen {
                let seq: Vec<String> = m.iter().map(|k| k.to_string()).collect();
                out.push_str(&format!("eigenvalue {}: m = ({})\n", fmt_q(l), seq.join(", ")));
            }
            out.push_str(&format!("weyr:\n{}transform:\n{}", matrix_text(&w.matrix, "  "), matrix_text(&s, "  ")));
            Ok((EXIT_OK, out))
        }
        Cmd::Build { quiver, reps, output } => {
            let pres = parse_presentation(&read(&quiver)?)?;
            let p = if reps { quiver_problem(&pres.quiver)? } else { build_bipartite_problem(&build_based_algebra(&pres)?) };
            let text = pretty(&json::problem_to_json(&p));
            match output {
                Some(path) => {
                    std::fs::write(&path, &text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
                    Ok((EXIT_OK, String::new()))
                }
                None => Ok((EXIT_OK, text)),
            }
        }
        Cmd::Validate { problem } => {
            let p = load_problem(&problem)?;
            let diags = p.validate();
            let rdcc = check_rdcc(&p);
            let code = if diags.is_empty() { EXIT_OK } else { EXIT_FALSE };
            if json_out {
                let d: Vec<Value> = diags.iter().map(|d| json!({"axiom": d.axiom, "detail": d.detail})).collect();
                return Ok((code, pretty(&json!({"valid": diags.is_empty(), "diagnostics": d, "rdcc": rdcc.holds()}))));
            }
            let mut out = format!("valid: {}\n", ctx.verdict(diags.is_empty()));
            for d in &diags {
                out.push_str(&format!("  {}: {}\n", d.axiom, d.detail));
            }
            out.push_str(&format!("rdcc: {}\n", rdcc.holds()));
            Ok((code, out))
        }
        Cmd::Diffs { problem } => {
            let p = load_problem(&problem)?;
            let lines: Vec<String> = p.differentials().rows.iter().map(|d| p.render_differential(d)).collect();
            if json_out {
                return Ok((EXIT_OK, pretty(&json!({"differentials": lines}))));
            }
            Ok((EXIT_OK, lines.iter().map(|l| format!("{l}\n")).collect()))
        }
        Cmd::Canon { problem, rep, trace, mut files } => {
            let p = load_problem(&problem_arg(problem, &mut files)?)?;
            let rp = rep.or_else(|| files.first().cloned()).ok_or_else(|| Failure::Usage("missing representation file".into()))?;
            let r = load_rep(&p, &rp)?;
            let cf = canonical::canonical_form(&p, &r)?;
            if let Some(path) = trace {
                let t = pretty(&json!({"steps": json::trace_to_json(&cf.trace.problems, &cf.trace.steps)}));
                std::fs::write(&path, t).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            }
            if json_out {
                return Ok((EXIT_OK, pretty(&json::canonical_to_json(&p, &cf))));
            }
            let mut out = format!("links: {}\ndimension: {}\n", cf.links, canonical::dimension(&cf.rep));
            out.push_str(&rep_text(&p, &cf.rep));
            Ok((EXIT_OK, out))
        }
        Cmd::Iso { problem, mut files } => {
            let p = load_problem(&problem_arg(problem, &mut files)?)?;
            if files.len() != 2 {
                return Err(Failure::Usage("iso takes exactly two representation files".into()));
            }
            let (a, b) = (load_rep(&p, &files[0])?, load_rep(&p, &files[1])?);
            let v = canonical::isomorphic(&p, &a, &b)?;
            let code = if v { EXIT_OK } else { EXIT_FALSE };
            if json_out {
                return Ok((code, pretty(&json!({"isomorphic": v}))));
            }
            Ok((code, format!("isomorphic: {}\n", ctx.verdict(v))))
        }
        Cmd::Indec { problem, rep, mut files } => {
            let p = load_problem(&problem_arg(problem, &mut files)?)?;
            let rp = rep.or_else(|| files.first().cloned()).ok_or_else(|| Failure::Usage("missing representation file".into()))?;
            let r = load_rep(&p, &rp)?;
            let d = canonical::dimension(&r);
            if d == 0 {
                return Err(Failure::Canonical(CanonicalError::Precondition("representation is zero".into())));
            }
            let cf = canonical::canonical_form(&p, &r)?;
            let v = cf.links + 1 == d;
            let code = if v { EXIT_OK } else { EXIT_FALSE };
            if json_out {
                return Ok((code, pretty(&json!({"indecomposable": v, "links": cf.links, "dimension": d}))));
            }
            Ok((code, format!("indecomposable: {}\nlinks: {}\ndimension: {d}\n", ctx.verdict(v), cf.links)))
        }
        Cmd::Tree { problem, sizes, eigen, depth, param } => {
            let p = load_problem(&problem)?;
            let sizes = parse_list(&sizes, "size", |s| s.parse::<usize>().ok())?;
            let eigenvalues: Vec<Q> = parse_list(&eigen, "eigenvalue", parse_q)?;
            let t = reduction_tree(&p, &sizes, &TreeOptions { eigenvalues, depth, parameter_branch: param })?;
            let out = match ctx.format {
                Format::Json => pretty(&json::tree_to_json(&p, &t)),
                Format::Dot => json::tree_to_dot(&t),
                Format::Text => json::tree_to_text(&t),
            };
            Ok((EXIT_OK, out))
        }
        Cmd::DetectWild { problem, file } => {
            let path = problem.or(file).ok_or_else(|| Failure::Usage("missing problem file".into()))?;
            let p = load_problem(&path)?;
            let w = detect_wild_config(&p);
            let code = if w.is_some() { EXIT_OK } else { EXIT_FALSE };
            if json_out {
                return Ok((code, pretty(&json!({"wild": w.as_ref().map(json::wild_to_json)}))));
            }
            Ok((
                code,
                match w {
                    None => "wild: none\n".into(),
                    Some(w) => {
                        let mut s = format!("wild: {:?} at {} ({} -> {})\n", w.case, w.arrow, w.source, w.target);
                        if let Some(f) = &w.f_text {
                            s.push_str(&format!("f: {f}\n"));
                        }
                        if let Some(t) = &w.tag {
                            s.push_str(&format!("tag: {t}\n"));
                        }
                        s.push_str(&format!("differential: δ({})={}\n", w.arrow, w.raw));
                        s
                    }
                },
            ))
        }
        Cmd::Replay { problem, target } => {
            let p = load_problem(&problem)?;
            let t = load_problem(&target)?;
            let tr = canonical::replay_sequence(&p, &t)?;
            if json_out {
                return Ok((EXIT_OK, pretty(&json!({"steps": json::trace_to_json(&tr.problems, &tr.steps)}))));
            }
            Ok((EXIT_OK, canonical::describe(&tr).iter().map(|l| format!("{l}\n")).collect()))
        }
    }
}

fn error_payload(f: &Failure) -> Value {
    let mut v = json!({"kind": f.kind(), "message": f.message()});
    match f {
        Failure::Reduce(ReduceError::NotRegularizable { coeffs }) => {
            v["coefficients"] = json!(coeffs.len());
        }
        Failure::Weyr(WeyrError::NonSplitSpectrum(poly)) => {
            v["factor"] = json!(poly.fmt_vars(&["x"]));
        }
        _ => {}
    }
    json!({"error": v})
}

/// Runs with an explicit color choice.
pub fn run_with<I, S>(args: I, color: bool) -> CommandResult
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            return if code == EXIT_OK { CommandResult { code, stdout: text, stderr: String::new() } } else { CommandResult { code, stdout: String::new(), stderr: text } };
        }
    };
    let ctx = Ctx { format: cli.format, color };
    match exec(cli, &ctx) {
        Ok((code, stdout)) => CommandResult { code, stdout, stderr: String::new() },
        Err(f) => {
            let code = if matches!(f, Failure::Usage(_)) { EXIT_USAGE } else { EXIT_ERROR };
            if ctx.format == Format::Json && code == EXIT_ERROR {
                CommandResult { code, stdout: pretty(&error_payload(&f)), stderr: String::new() }
            } else {
                CommandResult { code, stdout: String::new(), stderr: format!("error: {}: {}\n", f.kind(), f.message()) }
            }
        }
    }
}

/// Colors only on a terminal, and never with `MBP_COLOR=0`.
pub fn color_enabled() -> bool {
    match std::env::var("MBP_COLOR").as_deref() {
        Ok("0") => false,
        Ok("1") => true,
        _ => std::io::stdout().is_terminal(),
    }
}

pub fn run<I, S>(args: I) -> CommandResult
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    run_with(args, color_enabled())
}
