//! The `lassokit` command-line front end.
//!
//! Machine output goes to stdout or the named files; diagnostics go to
//! stderr. Exit codes are listed on [`Exit`].

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::colimits::colimit;
use crate::contraction::{
    contract, diagram_isomorphism, pushforward_images, pushforward_span, ContractionError,
    Equivalence,
};
use crate::cset::Hom;
use crate::decomposition::{decomposition_colimit, pullback_decomposition, to_diagram, DecompositionError};
use crate::dot::{contraction_to_dot, decomposition_to_dot, instance_to_dot};
use crate::io::{
    contraction_doc, decomposition_to_json, instance_to_json, parse_decomposition, parse_hom,
    parse_instance, pushforward_doc, read_file, write_file, IoError,
};
use crate::lasso::{
    builtin_lassos, canonicity_probe, check_lasso_axioms, check_strong, morphism_matrix,
    resolve_name, LassoError,
};
use crate::random::{random_subobject, random_tree_decomposition, rng, RandomError, TreeBounds};
use crate::schema::{shared_builtin, Builtin, Schema, SchemaError};
use crate::universe::{Bounds, Universe, UniverseError};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(i32)]
pub enum Exit {
    Ok = 0,
    CheckFailed = 1,
    Parse = 2,
    Precondition = 3,
    SchemaMismatch = 4,
    Misaligned = 5,
    BoundExceeded = 6,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Largest per-sort bound accepted when nothing else is configured.
pub const DEFAULT_MAX_CARRIER: usize = 6;

pub const MAX_CARRIER_ENV: &str = "LASSOKIT_MAX_CARRIER";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Lasso(#[from] LassoError),
    #[error(transparent)]
    Contraction(#[from] ContractionError),
    #[error(transparent)]
    Universe(#[from] UniverseError),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Random(#[from] RandomError),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{0}")]
    Precondition(String),
    #[error("bound {bound} exceeds the carrier ceiling {ceiling}")]
    Ceiling { bound: usize, ceiling: usize },
}

impl CliError {
    pub fn exit(&self) -> Exit {
        match self {
            CliError::Io(IoError::SchemaMismatch) => Exit::SchemaMismatch,
            CliError::Io(IoError::Decomposition(DecompositionError::ColimitMismatch)) => Exit::Misaligned,
            CliError::Io(_) | CliError::Config(_) | CliError::Schema(_) => Exit::Parse,
            CliError::Lasso(LassoError::SchemaMismatch { .. }) => Exit::SchemaMismatch,
            CliError::Lasso(LassoError::Universe(_)) => Exit::BoundExceeded,
            CliError::Lasso(LassoError::UnknownName(_) | LassoError::UnknownKind(_)) => Exit::Parse,
            CliError::Lasso(LassoError::ColorOutOfRange { .. } | LassoError::NoColors) => Exit::Parse,
            CliError::Lasso(_) => Exit::Precondition,
            CliError::Contraction(e) => match e {
                ContractionError::SchemaMismatch(_) => Exit::SchemaMismatch,
                ContractionError::ColimitMisalignment => Exit::Misaligned,
                ContractionError::Universe(_) => Exit::BoundExceeded,
                ContractionError::Postcondition(_) => Exit::CheckFailed,
                ContractionError::Lasso(LassoError::SchemaMismatch { .. }) => Exit::SchemaMismatch,
                _ => Exit::Precondition,
            },
            CliError::Universe(_) | CliError::Ceiling { .. } => Exit::BoundExceeded,
            CliError::Random(_) | CliError::Precondition(_) => Exit::Precondition,
        }
    }
}

impl From<DecompositionError> for CliError {
    fn from(e: DecompositionError) -> Self {
        CliError::Io(IoError::Decomposition(e))
    }
}

#[derive(Debug, Parser)]
#[command(name = "lassokit", version, about = "Lasso contractions of graphs and their decompositions")]
pub struct Cli {
    /// TOML file with `max_carrier` and `seed`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Contract an instance along a subobject.
    Contract {
        #[arg(long)]
        base: PathBuf,
        /// Mono hom into the base instance.
        #[arg(long)]
        sub: PathBuf,
        #[arg(long)]
        lasso: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Push a decomposition forward along a contraction.
    Pushforward {
        #[arg(long)]
        decomp: PathBuf,
        #[arg(long)]
        sub: PathBuf,
        #[arg(long)]
        lasso: String,
        #[arg(long, value_enum, default_value_t = Method::Images)]
        method: Method,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Pull a decomposition back along a hom into its colimit.
    Pullback {
        #[arg(long)]
        decomp: PathBuf,
        #[arg(long)]
        hom: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Check the lasso axioms on a bounded universe, or run the canonicity probe.
    Check(CheckArgs),
    /// Glue a decomposition back together.
    Colimit {
        #[arg(long)]
        decomp: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Summaries of a bounded universe: lasso morphisms or seeded pushforwards.
    Explore(ExploreArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Images,
    Span,
    Both,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, required_unless_present = "probe")]
    pub lasso: Option<String>,
    #[arg(long)]
    pub max_vertices: usize,
    #[arg(long)]
    pub max_edges: usize,
    /// Also check preservation of the initial object and of coequalizers.
    #[arg(long)]
    pub strong: bool,
    /// Enumerate every quotient family that survives the lasso constraints.
    #[arg(long)]
    pub probe: bool,
    /// Builtin schema; inferred from the lasso name when absent.
    #[arg(long)]
    pub schema: Option<String>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExploreArgs {
    #[arg(long, default_value = "RGrph")]
    pub schema: String,
    #[arg(long, default_value_t = 2)]
    pub max_vertices: usize,
    #[arg(long, default_value_t = 3)]
    pub max_edges: usize,
    /// Run this many seeded random pushforwards instead of the morphism table.
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long)]
    pub lasso: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub max_carrier: Option<usize>,
    pub seed: Option<u64>,
}

impl Config {
    pub fn load(path: Option<&PathBuf>) -> Result<Self, CliError> {
        match path {
            None => Ok(Config::default()),
            Some(p) => {
                let text = read_file(&p.to_string_lossy())?;
                toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))
            }
        }
    }

    /// The environment variable wins over the file, which wins over the default.
    pub fn ceiling(&self) -> Result<usize, CliError> {
        match std::env::var(MAX_CARRIER_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{MAX_CARRIER_ENV}={v} is not a number"))),
            Err(_) => Ok(self.max_carrier.unwrap_or(DEFAULT_MAX_CARRIER)),
        }
    }
}

fn path_str(p: &std::path::Path) -> String {
    p.to_string_lossy().into_owned()
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => Ok(write_file(&path_str(p), text)?),
        None => {
            use std::io::Write;
            // A closed pipe downstream is not an error worth reporting.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports always serialize")
}

/// Schema for a lasso name when none is given: reflexive-graph names and the
/// smoothing fixture live on RGrph, colour names on the smallest CGr_k that
/// holds their colours, everything else on Grph.
pub fn infer_schema(name: &str) -> Builtin {
    if name.contains("rgrph:") || name.contains("smoothing") {
        return Builtin::RGrph;
    }
    let max_color = name
        .split("color:")
        .skip(1)
        .filter_map(|rest| rest.split('}').next())
        .flat_map(|set| set.trim_start_matches('{').split(',').map(str::trim).collect::<Vec<_>>())
        .filter_map(|c| c.parse::<usize>().ok())
        .max();
    match max_color {
        Some(k) => Builtin::Colored(k.max(1)),
        None => Builtin::Grph,
    }
}

/// The schema named explicitly, or the one a lasso name implies.
pub fn schema_for(explicit: Option<&str>, lasso: Option<&str>) -> Result<Arc<Schema>, CliError> {
    let builtin = match (explicit, lasso) {
        (Some(s), _) => s.parse::<Builtin>()?,
        (None, Some(l)) => infer_schema(l),
        (None, None) => Builtin::Grph,
    };
    Ok(shared_builtin(builtin)?)
}

pub fn bounds_within(bounds: &Bounds, ceiling: usize) -> Result<(), CliError> {
    match bounds.max.iter().copied().find(|&b| b > ceiling) {
        Some(bound) => Err(CliError::Ceiling { bound, ceiling }),
        None => Ok(()),
    }
}

/// Parses and runs a command line; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { Exit::Parse.code() } else { Exit::Ok.code() };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(exit) => exit.code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit().code()
        }
    }
}

/// Runs a parsed command.
pub fn execute(cli: &Cli) -> Result<Exit, CliError> {
    let config = Config::load(cli.config.as_ref())?;
    match &cli.command {
        Command::Contract { base, sub, lasso, out, dot } => {
            let base = parse_instance(&read_file(&path_str(base))?)?;
            let sub = parse_hom(&read_file(&path_str(sub))?)?;
            if !sub.cod().same_schema(&base) || sub.dom().schema() != base.schema() {
                return Err(IoError::SchemaMismatch.into());
            }
            if sub.cod() != &base {
                return Err(CliError::Precondition("sub does not map into the base instance".into()));
            }
            let lasso = resolve_name(lasso, base.schema())?.into_lasso()?;
            let c = contract(&sub, &lasso)?;
            emit(out.as_ref(), &to_json(&contraction_doc(&c)))?;
            if let Some(p) = dot {
                write_file(&path_str(p), &contraction_to_dot(&c))?;
            }
            eprintln!(
                "contracted {:?} to {:?} with {}",
                c.base.carriers(),
                c.result.carriers(),
                c.lasso
            );
            Ok(Exit::Ok)
        }
        Command::Pushforward { decomp, sub, lasso, method, out, dot } => {
            let d = parse_decomposition(&read_file(&path_str(decomp))?)?;
            let f = parse_hom(&read_file(&path_str(sub))?)?;
            if f.dom().schema() != &d.schema {
                return Err(IoError::SchemaMismatch.into());
            }
            let lasso = resolve_name(lasso, &d.schema)?.into_lasso()?;
            let (text, output, exit) = match method {
                Method::Images => {
                    let r = pushforward_images(&d, &f, &lasso)?;
                    (to_json(&pushforward_doc("images", &r)), r.output, Exit::Ok)
                }
                Method::Span => {
                    let r = pushforward_span(&d, &f, &lasso)?;
                    (to_json(&pushforward_doc("span", &r)), r.output, Exit::Ok)
                }
                Method::Both => {
                    let a = pushforward_images(&d, &f, &lasso)?;
                    let b = pushforward_span(&d, &f, &lasso)?;
                    let verdict = diagram_isomorphism(&a.output, &b.output);
                    #[derive(Serialize)]
                    struct Both {
                        images: crate::io::PushforwardDoc,
                        span: crate::io::PushforwardDoc,
                        equivalence: Equivalence,
                    }
                    let exit = if verdict.equivalent { Exit::Ok } else { Exit::CheckFailed };
                    eprintln!("constructions equivalent: {}", verdict.equivalent);
                    let both = Both {
                        images: pushforward_doc("images", &a),
                        span: pushforward_doc("span", &b),
                        equivalence: verdict,
                    };
                    (to_json(&both), a.output, exit)
                }
            };
            emit(out.as_ref(), &text)?;
            if let Some(p) = dot {
                write_file(&path_str(p), &decomposition_to_dot(&output))?;
            }
            Ok(exit)
        }
        Command::Pullback { decomp, hom, out, dot } => {
            let d = parse_decomposition(&read_file(&path_str(decomp))?)?;
            let h = parse_hom(&read_file(&path_str(hom))?)?;
            if h.dom().schema() != &d.schema {
                return Err(IoError::SchemaMismatch.into());
            }
            let pb = pullback_decomposition(&d, &h)?;
            emit(out.as_ref(), &decomposition_to_json(&pb.decomposition))?;
            if let Some(p) = dot {
                write_file(&path_str(p), &decomposition_to_dot(&pb.decomposition))?;
            }
            Ok(Exit::Ok)
        }
        Command::Check(args) => check(args, &config),
        Command::Colimit { decomp, out, dot } => {
            let d = parse_decomposition(&read_file(&path_str(decomp))?)?;
            let apex = decomposition_colimit(&d).apex;
            debug_assert_eq!(apex, colimit(&to_diagram(&d)).apex);
            emit(out.as_ref(), &instance_to_json(&apex))?;
            if let Some(p) = dot {
                write_file(&path_str(p), &instance_to_dot(&apex))?;
            }
            Ok(Exit::Ok)
        }
        Command::Explore(args) => explore(args, &config),
    }
}

fn check(args: &CheckArgs, config: &Config) -> Result<Exit, CliError> {
    let schema = schema_for(args.schema.as_deref(), args.lasso.as_deref())?;
    let bounds = Bounds::graph_like(&schema, args.max_vertices, args.max_edges);
    bounds_within(&bounds, config.ceiling()?)?;
    let started = Instant::now();
    if args.probe {
        let report = canonicity_probe(&schema, &bounds)?;
        emit(args.report.as_ref(), &to_json(&report))?;
        let names: Vec<String> = report
            .survivor_names()
            .into_iter()
            .map(|n| n.unwrap_or_else(|| "<unmatched>".into()))
            .collect();
        eprintln!(
            "probe over {} instances: {} survivors [{}] in {:.2?}",
            report.universe_size,
            names.len(),
            names.join(", "),
            started.elapsed()
        );
        return Ok(Exit::Ok);
    }
    let name = args.lasso.as_deref().expect("clap requires a lasso without --probe");
    let named = resolve_name(name, &schema)?;
    let report = if args.strong {
        check_strong(named.functor(), &bounds)?
    } else {
        check_lasso_axioms(named.functor(), &bounds)?
    };
    emit(args.report.as_ref(), &to_json(&report))?;
    eprintln!(
        "{}: {} over {} instances in {:.2?}",
        report.functor,
        if report.passed() { "pass" } else { "FAIL" },
        report.universe_size,
        started.elapsed()
    );
    Ok(if report.passed() { Exit::Ok } else { Exit::CheckFailed })
}

#[derive(Debug, Serialize)]
struct MorphismTable {
    schema: String,
    bounds: indexmap::IndexMap<String, usize>,
    universe_size: usize,
    lassos: Vec<String>,
    /// `exists[i][j]`: a lasso morphism from lasso `i` to lasso `j`.
    exists: Vec<Vec<bool>>,
}

#[derive(Debug, Serialize)]
struct RandomCase {
    seed: u64,
    case: usize,
    bags: usize,
    width_before: Vec<usize>,
    width_after: Vec<usize>,
    equivalent: bool,
}

fn explore(args: &ExploreArgs, config: &Config) -> Result<Exit, CliError> {
    let schema = shared_builtin(args.schema.parse::<Builtin>()?)?;
    bounds_within(&Bounds::graph_like(&schema, args.max_vertices, args.max_edges), config.ceiling()?)?;
    if let Some(n) = args.random {
        let seed = args.seed.or(config.seed).unwrap_or(0);
        let lasso_name = args.lasso.as_deref().unwrap_or("cc");
        let lasso = resolve_name(lasso_name, &schema)?.into_lasso()?;
        let mut r = rng(seed);
        let bounds = TreeBounds {
            max_vertices: args.max_vertices,
            max_edges: args.max_edges,
            ..TreeBounds::default()
        };
        let mut cases = Vec::with_capacity(n);
        let mut all_equivalent = true;
        for case in 0..n {
            let (d, y) = random_tree_decomposition(&mut r, &schema, bounds)?;
            let f: Hom = random_subobject(&mut r, &y);
            let a = pushforward_images(&d, &f, &lasso)?;
            let b = pushforward_span(&d, &f, &lasso)?;
            let equivalent = diagram_isomorphism(&a.output, &b.output).equivalent;
            all_equivalent &= equivalent;
            let (before, after) = a.widths();
            cases.push(RandomCase {
                seed,
                case,
                bags: d.bags.len(),
                width_before: before.0,
                width_after: after.0,
                equivalent,
            });
        }
        emit(args.out.as_ref(), &to_json(&cases))?;
        return Ok(if all_equivalent { Exit::Ok } else { Exit::CheckFailed });
    }
    let bounds = Bounds::graph_like(&schema, args.max_vertices, args.max_edges);
    let lassos = builtin_lassos(&schema);
    let table = MorphismTable {
        schema: args.schema.clone(),
        bounds: bounds.named(&schema).into_iter().collect(),
        universe_size: Universe::get(&schema, &bounds)?.len(),
        lassos: lassos.iter().map(|l| l.name().to_string()).collect(),
        exists: morphism_matrix(&lassos, &bounds)?,
    };
    emit(args.out.as_ref(), &to_json(&table))?;
    Ok(Exit::Ok)
}
