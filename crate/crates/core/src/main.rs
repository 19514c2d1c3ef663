//! Command-line surface: parse/generate clique-width terms, evaluate them to
//! port-labeled graphs, compile monadic second-order formulas to fly
//! automata, and run the deciders, counters and optimizers on top — plus the
//! brute-force oracles and a small benchmark suite.
//!
//! Exit codes: 0 true/success, 1 false, 2 usage or parse error, 3 resource
//! guard tripped.

use std::fmt::Write as _;
use std::io::Read;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;

use flyaut::fa::determinize;
use flyaut::mso::{compile, handbuilt, parse_formula, Formula};
use flyaut::pgraph::{GraphFamily, PGraph, PortLabel, DEFAULT_ORACLE_GUARD};
use flyaut::pgraph::{
    oracle_count, oracle_count_colorings, oracle_mso_eval, oracle_multispectrum, oracle_spectrum,
    Assignment, OracleError,
};
use flyaut::solve::{
    check_sat, count_assignments, min_card, multispectrum, spectrum, Tropical,
};
use flyaut::term::{check_irredundant, gen_term, parse_term, term_from_graph, Irredundancy, Term};

// ============================================================================
// Argument structure
// ============================================================================

#[derive(Parser)]
#[command(
    name = "flyaut",
    about = "Clique-width terms, MSO formulas, and fly automata",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Suppress progress notes on stderr (results still print).
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Dot,
    Json,
}

#[derive(Args)]
struct TermInput {
    /// Path to a term file (`-` for stdin).
    #[arg(long)]
    term: String,
}

#[derive(Args)]
struct FormulaInput {
    /// Path to a formula file (`-` for stdin). The first line may pin the
    /// free-variable order: `vars: X Y`.
    #[arg(long)]
    formula: String,
    /// Free-variable context order, e.g. `--vars "X Y"`. Overrides the
    /// file's `vars:` header; defaults to first-occurrence order.
    #[arg(long)]
    vars: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print a term for a named graph family (path, cycle, clique, grid,
    /// star, petersen).
    Gen {
        family: String,
        /// Size parameters: one integer for path/cycle/clique/star, two for
        /// grid, none for petersen.
        params: Vec<u32>,
    },
    /// Evaluate a term to its port-labeled graph.
    Eval {
        #[command(flatten)]
        term: TermInput,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Decide a formula on a term; prints true/false and exits 0/1.
    Check {
        #[command(flatten)]
        term: TermInput,
        #[command(flatten)]
        formula: FormulaInput,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Count satisfying assignments of the free variables.
    Count {
        #[command(flatten)]
        term: TermInput,
        #[command(flatten)]
        formula: FormulaInput,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Satisfiable cardinality tuples of the free variables.
    Spectrum {
        #[command(flatten)]
        term: TermInput,
        #[command(flatten)]
        formula: FormulaInput,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Cardinality tuples with their multiplicities.
    Multispectrum {
        #[command(flatten)]
        term: TermInput,
        #[command(flatten)]
        formula: FormulaInput,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Minimal cardinality of the first free variable over satisfying
    /// assignments (`infinity` if there are none).
    Mincard {
        #[command(flatten)]
        term: TermInput,
        #[command(flatten)]
        formula: FormulaInput,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Brute-force reference answers on a graph file, for audit.
    Oracle {
        /// Path to a graph file (`-` for stdin).
        #[arg(long)]
        graph: String,
        #[command(flatten)]
        formula: Option<FormulaBox>,
        /// What to compute: count (default), spectrum, multispectrum,
        /// mincard, or check (needs an all-empty assignment arity of 0).
        #[arg(long, value_enum, default_value = "count")]
        value: OracleValue,
        /// Count proper k-colorings instead of evaluating a formula.
        #[arg(long, value_name = "K", conflicts_with = "value")]
        colorings: Option<u32>,
        /// Enumeration budget override (number of assignments).
        #[arg(long)]
        guard: Option<u64>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run a benchmark suite; pass no id to list the suites.
    Bench { suite: Option<String> },
    /// Report whether every edge addition in a term adds at least one edge.
    Irredundant {
        #[command(flatten)]
        term: TermInput,
    },
}

// clap can't flatten Option<FormulaInput> with required fields, so the
// oracle subcommand takes its own optional pair.
#[derive(Args)]
struct FormulaBox {
    /// Path to a formula file (`-` for stdin); optional with --colorings.
    #[arg(long)]
    formula: Option<String>,
    /// Free-variable context order (see `count --help`).
    #[arg(long)]
    vars: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleValue {
    Count,
    Spectrum,
    Multispectrum,
    Mincard,
    Check,
}

// ============================================================================
// Failure plumbing
// ============================================================================

/// A failure that already knows its exit code: 2 for usage/parse problems,
/// 3 for tripped resource guards.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Failure {
        Failure {
            code: 2,
            msg: msg.into(),
        }
    }
}

trait IntoFailure {
    fn guard_tripped(&self) -> bool {
        false
    }
}

impl IntoFailure for OracleError {
    fn guard_tripped(&self) -> bool {
        matches!(
            self,
            OracleError::GuardExceeded { .. } | OracleError::TooManyVertices { .. }
        )
    }
}

fn fail<E: std::fmt::Display + IntoFailure>(e: E) -> Failure {
    Failure {
        code: if e.guard_tripped() { 3 } else { 2 },
        msg: e.to_string(),
    }
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::usage(e.to_string())
}

// ============================================================================
// Input loading
// ============================================================================

fn read_input(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Failure::usage(format!("reading stdin: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("reading {path}: {e}")))
    }
}

fn load_term(input: &TermInput) -> Result<Term, Failure> {
    parse_term(&read_input(&input.term)?).map_err(usage)
}

/// Splits an optional `vars: X Y` header off a formula file.
fn split_vars_header(text: &str) -> (Option<Vec<String>>, &str) {
    let trimmed = text.trim_start();
    if let Some(rest) = trimmed.strip_prefix("vars:") {
        let (line, tail) = rest.split_once('\n').unwrap_or((rest, ""));
        let names = line
            .split([' ', ',', '\t'])
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        (Some(names), tail)
    } else {
        (None, text)
    }
}

/// Loads a formula file and fixes the context order: `--vars` wins, then the
/// file's `vars:` header, then free variables in first-occurrence order.
fn load_formula(path: &str, vars: &Option<String>) -> Result<(Formula, Vec<String>), Failure> {
    let text = read_input(path)?;
    let (header, body) = split_vars_header(&text);
    let phi = parse_formula(body).map_err(usage)?;
    let free = phi.free_vars();
    let ctx = if let Some(v) = vars {
        v.split([' ', ','])
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect()
    } else if let Some(h) = header {
        h
    } else {
        free.clone()
    };
    for x in &free {
        if !ctx.contains(x) {
            return Err(Failure::usage(format!(
                "free variable {x} is not in the context (have: {})",
                ctx.join(" ")
            )));
        }
    }
    Ok((phi, ctx))
}

// ============================================================================
// Rendering
// ============================================================================

fn render_count(c: &BigUint, format: Format) -> String {
    match format {
        Format::Json => format!("{{\"count\":\"{c}\"}}"),
        _ => c.to_string(),
    }
}

fn render_bool(b: bool, format: Format) -> String {
    match format {
        Format::Json => format!("{{\"result\":{b}}}"),
        _ => b.to_string(),
    }
}

fn render_tuple(t: &[u64]) -> String {
    let inner = t
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(",");
    format!("({inner})")
}

fn render_spectrum(s: &std::collections::BTreeSet<Vec<u64>>, format: Format) -> String {
    match format {
        Format::Json => {
            let items: Vec<serde_json::Value> = s
                .iter()
                .map(|t| serde_json::Value::from(t.clone()))
                .collect();
            serde_json::Value::from(items).to_string()
        }
        _ => {
            let mut out = String::from("[");
            for (i, t) in s.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&render_tuple(t));
            }
            out.push(']');
            out
        }
    }
}

fn render_multispectrum(
    m: &std::collections::BTreeMap<Vec<u64>, BigUint>,
    format: Format,
) -> String {
    match format {
        Format::Json => {
            let items: Vec<serde_json::Value> = m
                .iter()
                .map(|(t, c)| {
                    serde_json::json!({"tuple": t, "count": c.to_string()})
                })
                .collect();
            serde_json::Value::from(items).to_string()
        }
        _ => {
            let mut out = String::new();
            for (t, c) in m {
                if !out.is_empty() {
                    out.push(' ');
                }
                let _ = write!(out, "{}:{}", render_tuple(t), c);
            }
            if out.is_empty() {
                out.push_str("[]");
            }
            out
        }
    }
}

fn render_mincard(v: &Tropical, format: Format) -> String {
    match format {
        Format::Json => format!("{{\"mincard\":\"{v}\"}}"),
        _ => v.to_string(),
    }
}

fn render_graph(g: &PGraph, format: Format) -> String {
    match format {
        Format::Text => g.to_text(),
        Format::Dot => g.to_dot(),
        Format::Json => {
            let vertices: Vec<serde_json::Value> = g
                .vertices()
                .map(|v| {
                    serde_json::json!({
                        "id": v.to_string(),
                        "port": g.port(v).map(PortLabel::get),
                    })
                })
                .collect();
            let edges: Vec<serde_json::Value> = g
                .edges()
                .map(|e| serde_json::json!([e.lo().to_string(), e.hi().to_string()]))
                .collect();
            serde_json::json!({"vertices": vertices, "edges": edges}).to_string()
        }
    }
}

// ============================================================================
// Subcommands
// ============================================================================

fn cmd_gen(family: &str, params: &[u32]) -> Result<String, Failure> {
    let fam = GraphFamily::parse(family, params).map_err(usage)?;
    // Families without a specialized construction go through the generic
    // graph-to-term translation.
    let (term, _) = match gen_term(&fam) {
        Ok(pair) => pair,
        Err(_) => term_from_graph(&PGraph::builtin(&fam)).map_err(usage)?,
    };
    Ok(term.to_string())
}

/// Compiles the formula and checks the context arity against the term's
/// annotation width: sentences run over plain terms, and an annotated term
/// must carry exactly one bit per context variable.
fn compile_for_term(
    phi: &Formula,
    ctx: &[String],
    t: &Term,
) -> Result<flyaut::fa::Dfa, Failure> {
    let width = t.annotation_width().map_err(usage)?;
    if width != 0 && width != ctx.len() {
        return Err(Failure::usage(format!(
            "term carries {width} annotation bits but the context has {} variables",
            ctx.len()
        )));
    }
    Ok(compile(phi, ctx).map_err(usage)?.dfa)
}

fn cmd_check(
    term: &TermInput,
    formula: &FormulaInput,
    format: Format,
) -> Result<(String, bool), Failure> {
    let t = load_term(term)?;
    let (phi, ctx) = load_formula(&formula.formula, &formula.vars)?;
    let dfa = compile_for_term(&phi, &ctx, &t)?;
    // A plain term under free variables means: is some assignment accepted?
    let plain = t.annotation_width().map_err(usage)? == 0;
    let verdict = if plain && !ctx.is_empty() {
        check_sat(&dfa, &t).map_err(usage)?
    } else {
        dfa.accepts(&t).map_err(usage)?
    };
    Ok((render_bool(verdict, format), verdict))
}

fn run_value_cmd(
    which: &str,
    term: &TermInput,
    formula: &FormulaInput,
    format: Format,
) -> Result<String, Failure> {
    let t = load_term(term)?;
    let (phi, ctx) = load_formula(&formula.formula, &formula.vars)?;
    if ctx.is_empty() {
        return Err(Failure::usage(format!(
            "{which} needs at least one free variable in the context"
        )));
    }
    let dfa = compile_for_term(&phi, &ctx, &t)?;
    Ok(match which {
        "count" => render_count(&count_assignments(&dfa, &t).map_err(usage)?, format),
        "spectrum" => render_spectrum(&spectrum(&dfa, &t).map_err(usage)?, format),
        "multispectrum" => {
            render_multispectrum(&multispectrum(&dfa, &t).map_err(usage)?, format)
        }
        "mincard" => render_mincard(&min_card(&dfa, &t).map_err(usage)?, format),
        _ => unreachable!(),
    })
}

fn cmd_oracle(
    graph: &str,
    formula: &Option<FormulaBox>,
    value: OracleValue,
    colorings: Option<u32>,
    guard: Option<u64>,
    format: Format,
) -> Result<(String, bool), Failure> {
    let g = PGraph::from_text(&read_input(graph)?).map_err(usage)?;
    let guard = guard.unwrap_or(DEFAULT_ORACLE_GUARD);
    if let Some(k) = colorings {
        let c = oracle_count_colorings(&g, k, guard).map_err(fail)?;
        return Ok((render_count(&c, format), true));
    }
    let spec = formula
        .as_ref()
        .and_then(|f| f.formula.as_ref())
        .ok_or_else(|| Failure::usage("oracle needs --formula or --colorings"))?;
    let vars = formula.as_ref().and_then(|f| f.vars.clone());
    let (phi, ctx) = load_formula(spec, &vars)?;
    match value {
        OracleValue::Count => {
            let c = oracle_count(&g, &phi, &ctx, guard).map_err(fail)?;
            Ok((render_count(&c, format), true))
        }
        OracleValue::Spectrum => {
            let s = oracle_spectrum(&g, &phi, &ctx, guard).map_err(fail)?;
            Ok((render_spectrum(&s, format), true))
        }
        OracleValue::Multispectrum => {
            let m = oracle_multispectrum(&g, &phi, &ctx, guard).map_err(fail)?;
            Ok((render_multispectrum(&m, format), true))
        }
        OracleValue::Mincard => {
            if ctx.is_empty() {
                return Err(Failure::usage(
                    "mincard needs at least one free variable in the context",
                ));
            }
            let m = oracle_multispectrum(&g, &phi, &ctx, guard).map_err(fail)?;
            let v = m
                .keys()
                .map(|t| t[0])
                .min()
                .map_or(Tropical::Infinity, Tropical::Finite);
            Ok((render_mincard(&v, format), true))
        }
        OracleValue::Check => {
            if !ctx.is_empty() {
                return Err(Failure::usage(
                    "oracle --value check needs a sentence (no free variables)",
                ));
            }
            let b =
                oracle_mso_eval(&g, &phi, &ctx, &Assignment(vec![])).map_err(fail)?;
            Ok((render_bool(b, format), b))
        }
    }
}

fn cmd_irredundant(term: &TermInput) -> Result<(String, bool), Failure> {
    let t = load_term(term)?;
    match check_irredundant(&t) {
        Irredundancy::Irredundant => Ok(("irredundant".into(), true)),
        Irredundancy::RedundantAt(p) => Ok((format!("redundant at {p}"), false)),
    }
}

// ============================================================================
// Benchmarks
// ============================================================================

fn cmd_bench(suite: Option<&str>, quiet: bool) -> Result<String, Failure> {
    match suite {
        None | Some("") => Ok("suites:\n  grid3col        3-colorability of square grids, 4x4 through 8x8\n  grid3col-quick  the same suite capped at 6x6\n".into()),
        Some(id @ ("grid3col" | "grid3col-quick")) => {
            let top = if id == "grid3col" { 8 } else { 6 };
            let mut out = String::from("suite: 3-colorability of square grid terms\n");
            // One deterministic automaton shared across sizes, so transition
            // caches warm up across the suite like they would in a real run.
            let dfa = determinize(&handbuilt::col3_nfa()).memoized();
            for n in 4..=top {
                if !quiet {
                    eprintln!("grid {n}x{n}...");
                }
                let (t, _) = gen_term(&GraphFamily::Grid(n, n)).map_err(usage)?;
                let start = Instant::now();
                let (root, transitions) = dfa.run_counted(&t).map_err(usage)?;
                let ms = start.elapsed().as_millis();
                let positions = t.num_positions();
                let colorable = dfa.is_accepting(&root);
                let _ = writeln!(
                    out,
                    "grid {n}x{n}: 3colorable={colorable} positions={positions} transitions={transitions} time_ms={ms}"
                );
            }
            Ok(out)
        }
        Some(other) => Err(Failure::usage(format!(
            "unknown suite {other}; run `bench` with no id to list suites"
        ))),
    }
}

// ============================================================================
// Entry point
// ============================================================================

fn run(cli: &Cli) -> Result<(String, bool), Failure> {
    match &cli.cmd {
        Cmd::Gen { family, params } => cmd_gen(family, params).map(|s| (s, true)),
        Cmd::Eval { term, format } => {
            let t = load_term(term)?;
            let g = t.eval();
            Ok((render_graph(&g, *format).trim_end().into(), true))
        }
        Cmd::Check {
            term,
            formula,
            format,
        } => cmd_check(term, formula, *format),
        Cmd::Count {
            term,
            formula,
            format,
        } => run_value_cmd("count", term, formula, *format).map(|s| (s, true)),
        Cmd::Spectrum {
            term,
            formula,
            format,
        } => run_value_cmd("spectrum", term, formula, *format).map(|s| (s, true)),
        Cmd::Multispectrum {
            term,
            formula,
            format,
        } => run_value_cmd("multispectrum", term, formula, *format).map(|s| (s, true)),
        Cmd::Mincard {
            term,
            formula,
            format,
        } => run_value_cmd("mincard", term, formula, *format).map(|s| (s, true)),
        Cmd::Oracle {
            graph,
            formula,
            value,
            colorings,
            guard,
            format,
        } => cmd_oracle(graph, formula, *value, *colorings, *guard, *format),
        Cmd::Bench { suite } => cmd_bench(suite.as_deref(), cli.quiet).map(|s| (s, true)),
        Cmd::Irredundant { term } => cmd_irredundant(term),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((output, verdict)) => {
            println!("{output}");
            ExitCode::from(if verdict { 0 } else { 1 })
        }
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
