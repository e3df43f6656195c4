//! The `locsym` command line. [`main_with`] runs it against arbitrary
//! arguments and writers so tests can drive it in-process.

pub mod counting;
pub mod pipeline;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use locsym_core::balance::{is_balance_relation, BalanceError};
use locsym_core::bundled;
use locsym_core::compositional::{
    global_invariant_oracle, CompositionalError, DEFAULT_STATE_CAP,
};
use locsym_core::dsl::{parse_model_named, pretty_print, Diagnostics, ModelDocument};
use locsym_core::relations::{check_outward_facing, RelationError};
use locsym_core::spaces::{build_global_space, build_local_space, PropositionSet, SpaceError};
use locsym_core::tiles::{exactly_on_edges, generate, Family, TileError};
use locsym_core::{FormulaError, ModelError};

use pipeline::{analyse, check, network, CheckOptions};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(Diagnostics),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("explored state count exceeds the cap of {0}; raise --cap")]
    Cap(usize),
    #[error("{0}")]
    Limit(String),
    #[error("{0}")]
    Analysis(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Cap(_) | CliError::Limit(_) => 3,
            CliError::Io(_) | CliError::Analysis(_) => 4,
            CliError::Usage(_) | CliError::Parse(_) => 2,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::StateCap(c) => CliError::Cap(c),
            ModelError::EnumerationCap(_) => CliError::Limit(e.to_string()),
            e => CliError::Usage(e.to_string()),
        }
    }
}

impl From<BalanceError> for CliError {
    fn from(e: BalanceError) -> Self {
        match e {
            BalanceError::Model(m) => m.into(),
            BalanceError::DegreeCap { .. } | BalanceError::NodeCap { .. } => CliError::Limit(e.to_string()),
            e => CliError::Analysis(e.to_string()),
        }
    }
}

impl From<CompositionalError> for CliError {
    fn from(e: CompositionalError) -> Self {
        match e {
            CompositionalError::Balance(b) => b.into(),
            CompositionalError::Model(m) => m.into(),
            e => CliError::Analysis(e.to_string()),
        }
    }
}

impl From<SpaceError> for CliError {
    fn from(e: SpaceError) -> Self {
        match e {
            SpaceError::Model(m) => m.into(),
            e => CliError::Analysis(e.to_string()),
        }
    }
}

impl From<RelationError> for CliError {
    fn from(e: RelationError) -> Self {
        match e {
            RelationError::Model(m) => m.into(),
            RelationError::Space(s) => s.into(),
            e => CliError::Analysis(e.to_string()),
        }
    }
}

impl From<FormulaError> for CliError {
    fn from(e: FormulaError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<TileError> for CliError {
    fn from(e: TileError) -> Self {
        match e {
            TileError::Model(m) => m.into(),
            e => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "locsym", version, about = "Local symmetry reduction for process networks")]
pub struct Cli {
    /// Cap on explored global states.
    #[arg(long, global = true, default_value_t = DEFAULT_STATE_CAP)]
    pub cap: usize,
    /// Machine-readable output.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ModelArg {
    /// Model file, or the name of a bundled model (e.g. `ring3`).
    pub model: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a formula at representatives of the largest balance.
    Check {
        #[command(flatten)]
        model: ModelArg,
        /// Formula name from the model, or formula text.
        formula: String,
        /// Check at this node only.
        #[arg(long, conflicts_with = "all_reps")]
        node: Option<String>,
        /// Check at every representative (the default).
        #[arg(long)]
        all_reps: bool,
        /// Also model check the node-relative global space.
        #[arg(long)]
        oracle: bool,
    },
    /// Largest balance relation and its classes.
    Balance {
        #[command(flatten)]
        model: ModelArg,
    },
    /// Strongest compositional invariant per representative.
    Invariant {
        #[command(flatten)]
        model: ModelArg,
        /// List the local states.
        #[arg(long)]
        dump: bool,
        /// Confirm coverage and inductiveness on the global system.
        #[arg(long)]
        oracle: bool,
    },
    /// Sizes of the local space of a node.
    Spaces {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        node: String,
        /// Write the transition system to this file.
        #[arg(long)]
        dump: Option<String>,
        /// Also build the node-relative global space.
        #[arg(long)]
        global: bool,
    },
    /// Outward-facing status of every ordered neighbor pair.
    Outward {
        #[command(flatten)]
        model: ModelArg,
    },
    /// Validate a network against its tile set, or generate a family member.
    Tiles {
        #[command(flatten)]
        model: ModelArg,
        /// Family (`ring`, `red_black_ring`, `torus`) followed by its sizes.
        #[arg(long, num_args = 2..=3, value_names = ["FAMILY", "SIZE"])]
        generate: Option<Vec<String>>,
        /// Initial constraint for generated networks: COUNT edges hold VALUE.
        #[arg(long, num_args = 2, value_names = ["COUNT", "VALUE"])]
        exactly: Option<Vec<String>>,
    },
    /// Reports that need no model.
    Report {
        #[command(subcommand)]
        report: Report,
    },
}

#[derive(Debug, Subcommand)]
pub enum Report {
    /// Counter-abstraction size against the local representative size.
    Counting { m: u32, n: u32, b: u32 },
}

/// Reads a model file, falling back to the bundled models.
pub fn load_model(source: &str) -> Result<ModelDocument, CliError> {
    let path = Path::new(source);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        return parse_model_named(&text, source).map_err(CliError::Parse);
    }
    match bundled::load(source) {
        Some(r) => r.map_err(CliError::Parse),
        None => Err(CliError::Usage(format!(
            "`{source}` is neither a file nor a bundled model"
        ))),
    }
}

/// Parses `args` (program name first), runs, and returns the exit code:
/// 0 success, 1 property violated, 2 usage or parse error, 3 state cap,
/// 4 other failure.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match run(&cli, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    // `Value` maps are ordered, so keys come out sorted.
    let v = serde_json::to_value(value).map_err(|e| CliError::Analysis(e.to_string()))?;
    let text = serde_json::to_string_pretty(&v).map_err(|e| CliError::Analysis(e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(())
}

/// Runs a parsed command. `Ok(false)` means a checked property failed.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<bool, CliError> {
    match &cli.command {
        Command::Check {
            model,
            formula,
            node,
            oracle,
            ..
        } => {
            let doc = load_model(&model.model)?;
            let opts = CheckOptions {
                node: node.clone(),
                oracle: oracle.then_some(cli.cap),
            };
            let report = check(&doc, formula, &opts)?;
            if cli.json {
                emit(out, &report)?;
            } else {
                write!(out, "{}", render_check(&report))?;
            }
            Ok(report.passed())
        }
        Command::Balance { model } => {
            let doc = load_model(&model.model)?;
            let net = network(&doc)?;
            let (scheme, _) = analyse(net)?;
            let b = locsym_core::balance::largest_balance(net)?;
            let valid = is_balance_relation(net, &b)?.is_ok();
            let classes: Vec<Vec<String>> = scheme
                .classes
                .iter()
                .map(|c| c.iter().map(|&n| net.node(n).name.clone()).collect())
                .collect();
            if cli.json {
                emit(
                    out,
                    &serde_json::json!({
                        "model": net.name,
                        "similarities": b.len(),
                        "valid": valid,
                        "classes": classes,
                    }),
                )?;
            } else {
                writeln!(out, "network {}: {} similarities, valid: {valid}", net.name, b.len())?;
                for c in &classes {
                    writeln!(out, "  class {{{}}}", c.join(", "))?;
                }
            }
            Ok(valid)
        }
        Command::Invariant { model, dump, oracle } => {
            let doc = load_model(&model.model)?;
            let net = network(&doc)?;
            let (_, inv) = analyse(net)?;
            let report = if *oracle {
                Some(global_invariant_oracle(net, inv.all(), cli.cap)?)
            } else {
                None
            };
            let reps: Vec<_> = inv
                .per_representative()
                .iter()
                .map(|(&r, set)| {
                    serde_json::json!({
                        "node": net.node(r).name,
                        "size": set.len(),
                        "states": if *dump {
                            set.iter().map(|s| net.show_local(s)).collect::<Vec<_>>()
                        } else {
                            Vec::new()
                        },
                    })
                })
                .collect();
            if cli.json {
                emit(
                    out,
                    &serde_json::json!({
                        "model": net.name,
                        "representatives": reps,
                        "oracle": report,
                    }),
                )?;
            } else {
                for (&r, set) in inv.per_representative() {
                    writeln!(out, "θ_{}: {} states", net.node(r).name, set.len())?;
                    if *dump {
                        for s in set {
                            writeln!(out, "  {}", net.show_local(s))?;
                        }
                    }
                }
                if let Some(rep) = &report {
                    match &rep.failure {
                        None => writeln!(
                            out,
                            "oracle: covers {} reachable states, inductive ({} witnesses)",
                            rep.reachable, rep.consistent
                        )?,
                        Some(f) => writeln!(out, "oracle: {}", f.describe(net))?,
                    }
                }
            }
            Ok(report.is_none_or(|r| r.holds()))
        }
        Command::Spaces {
            model,
            node,
            dump,
            global,
        } => {
            let doc = load_model(&model.model)?;
            let net = network(&doc)?;
            let n = net
                .node_by_name(node)
                .ok_or_else(|| CliError::Usage(format!("unknown node `{node}`")))?;
            let (_, inv) = analyse(net)?;
            let props = PropositionSet::for_template(net.template(n));
            let h = build_local_space(net, inv.all(), n, &props)?;
            let g = if *global {
                Some(build_global_space(net, n, &props, cli.cap)?)
            } else {
                None
            };
            if let Some(path) = dump {
                let mut text = h.dump();
                if let Some(g) = &g {
                    text.push_str("\n# global\n");
                    text.push_str(&g.dump());
                }
                std::fs::write(path, text)?;
            }
            let sizes = |states: usize, transitions: usize, initial: usize| {
                serde_json::json!({"states": states, "transitions": transitions, "initial": initial})
            };
            if cli.json {
                emit(
                    out,
                    &serde_json::json!({
                        "node": node,
                        "local": sizes(h.len(), h.transitions().len(), h.initial().len()),
                        "global": g.as_ref().map(|g| sizes(g.len(), g.transitions().len(), g.initial().len())),
                    }),
                )?;
            } else {
                writeln!(
                    out,
                    "local space of {node}: {} states, {} transitions, {} initial",
                    h.len(),
                    h.transitions().len(),
                    h.initial().len()
                )?;
                if let Some(g) = &g {
                    writeln!(
                        out,
                        "global space of {node}: {} states, {} transitions, {} initial",
                        g.len(),
                        g.transitions().len(),
                        g.initial().len()
                    )?;
                }
            }
            Ok(true)
        }
        Command::Outward { model } => {
            let doc = load_model(&model.model)?;
            let net = network(&doc)?;
            let (_, inv) = analyse(net)?;
            let mut rows = Vec::new();
            for m in net.node_ids() {
                for &n in net.neighbors(m) {
                    let v = check_outward_facing(net, inv.all(), n, m)?;
                    rows.push((net.node(n).name.clone(), net.node(m).name.clone(), v));
                }
            }
            let all = rows.iter().all(|(_, _, v)| v.holds);
            if cli.json {
                let pairs: Vec<_> = rows
                    .iter()
                    .map(|(n, m, v)| serde_json::json!({"from": n, "toward": m, "verdict": v}))
                    .collect();
                emit(out, &serde_json::json!({"model": net.name, "pairs": pairs, "all": all}))?;
            } else {
                for (n, m, v) in &rows {
                    let mark = if v.holds { "outward-facing" } else { "not outward-facing" };
                    writeln!(out, "{n} toward {m}: {mark}")?;
                    if let Some(c) = &v.counterexample {
                        writeln!(out, "  {}: {}", c.reason, c.path.join(" "))?;
                    }
                }
            }
            Ok(true)
        }
        Command::Tiles {
            model,
            generate: fam,
            exactly,
        } => {
            let doc = load_model(&model.model)?;
            let tiles = doc
                .tile_sets
                .first()
                .ok_or_else(|| CliError::Usage("model declares no tile set".into()))?;
            if let Some(args) = fam {
                let params = args[1..]
                    .iter()
                    .map(|p| p.parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| CliError::Usage(format!("bad family size: {e}")))?;
                let mut net = generate(tiles, Family::parse(&args[0], &params)?)?;
                if let Some(ex) = exactly {
                    let count = ex[0]
                        .parse()
                        .map_err(|e| CliError::Usage(format!("bad count: {e}")))?;
                    net = net.with_initially(Some(exactly_on_edges(&net, count, &ex[1])))?;
                }
                let mut gen = doc.clone();
                gen.networks = vec![net];
                gen.spans.clear();
                write!(out, "{}", pretty_print(&gen))?;
                return Ok(true);
            }
            let net = network(&doc)?;
            tiles.validate_instance(net)?;
            let b = tiles.induced_balance(net)?;
            let valid = is_balance_relation(net, &b)?.is_ok();
            if cli.json {
                emit(
                    out,
                    &serde_json::json!({
                        "model": net.name,
                        "tile_set": tiles.name,
                        "conforms": true,
                        "induced_similarities": b.len(),
                        "induced_is_balance": valid,
                    }),
                )?;
            } else {
                writeln!(out, "network {} conforms to tile set {}", net.name, tiles.name)?;
                writeln!(out, "induced relation: {} similarities, balance: {valid}", b.len())?;
            }
            Ok(valid)
        }
        Command::Report {
            report: Report::Counting { m, n, b },
        } => {
            let r = counting::counting_report(*m, *n, *b);
            if cli.json {
                emit(out, &r)?;
            } else {
                writeln!(out, "{r}")?;
            }
            Ok(true)
        }
    }
}

fn render_check(r: &pipeline::VerdictReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} on {} ({} formula, balance classes: {})",
        r.formula, r.model, r.formula_class, r.classes
    );
    for v in &r.verdicts {
        let _ = writeln!(
            s,
            "node {} (class {{{}}}): local {} on {} states",
            v.node,
            v.class.join(", "),
            if v.local { "holds" } else { "fails" },
            v.local_states
        );
        for f in &v.failing_states {
            let _ = writeln!(s, "  failing initial state {f}");
        }
        let outward: Vec<String> = v
            .outward
            .iter()
            .map(|(n, ok)| format!("{n}: {}", if *ok { "yes" } else { "no" }))
            .collect();
        let _ = writeln!(s, "  outward-facing neighbors: {}", outward.join(", "));
        let _ = writeln!(s, "  claim: {}", v.claim_text);
        if let Some(o) = &v.oracle {
            let _ = writeln!(
                s,
                "  global: {} on {} states; agrees with claim: {}",
                if o.global { "holds" } else { "fails" },
                o.global_states,
                o.agrees
            );
            if !o.trace.is_empty() {
                let _ = writeln!(s, "  trace:");
                for t in &o.trace {
                    let _ = writeln!(s, "    {t}");
                }
            }
        }
    }
    s
}
