// SPDX-License-Identifier: Apache-2.0
//! The `cequiv` command-line front end.
//!
//! Exit status: 0 for a positive answer or a completed report, 1 for a
//! negative answer to a yes/no query, 2 for a usage error and 3 for
//! unreadable or invalid input.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::admissibility::{g_admissible, minimal_admissible_subset};
use crate::boundary::{markov_boundary, markov_boundary_in_order, reduced_markov_boundary};
use crate::equivalence::{
    boundary_union_equivalent, c_equivalent, c_equivalent_reduced, equivalence_chain, pairwise_sufficient,
    set_subset_equivalent,
};
use crate::error::Error;
use crate::falsify::{demo_candidates, falsify, FalsificationReport, DEFAULT_TOL};
use crate::graph::{parse_graph, Dag, NodeId, VarSet};
use crate::oracle::{
    attempt_seed, estimand_gap, parse_model, parse_table, random_binary_model, search_violation, write_model,
    DiscreteModel, Distribution, EstimandTable, CONFIRM_TOL,
};
use crate::separation::{d_separated, find_open_trail, Backend, SeparationQuery, PATHS_NODE_LIMIT};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "cequiv", version, about = "Confounding equivalence of covariate sets in causal DAGs")]
struct Cli {
    /// Print machine-readable JSON instead of prose.
    #[arg(long, global = true)]
    json: bool,
    /// d-separation backend.
    #[arg(long, global = true, default_value_t = Backend::Reach)]
    backend: Backend,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GraphArg {
    /// Graph file in native or DOT-subset format.
    #[arg(long, short = 'g')]
    graph: PathBuf,
}

#[derive(Args, Debug)]
struct Pair {
    #[arg(short = 'x')]
    x: NodeId,
    #[arg(short = 'y')]
    y: NodeId,
}

#[derive(Args, Debug)]
struct TwoSets {
    /// First covariate set, comma-separated ("" for empty).
    #[arg(short = 't')]
    t: VarSet,
    /// Second covariate set.
    #[arg(short = 'z')]
    z: VarSet,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Is A d-separated from B given S?
    Dsep {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(short = 'a')]
        a: VarSet,
        #[arg(short = 'b')]
        b: VarSet,
        #[arg(short = 's', default_value = "")]
        s: VarSet,
    },
    /// Markov boundary of X within S.
    Mb {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(short = 'x')]
        x: NodeId,
        #[arg(short = 's')]
        s: VarSet,
        /// Removal order to try (a permutation of S).
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<NodeId>>,
        /// Drop members separated from this outcome given X first.
        #[arg(long, value_name = "Y")]
        reduced: Option<NodeId>,
    },
    /// Back-door admissibility of S.
    Admissible {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        pair: Pair,
        #[arg(short = 's')]
        s: VarSet,
        /// Also report a minimal admissible subset.
        #[arg(long)]
        minimal: bool,
    },
    /// Decide whether T and Z are c-equivalent.
    Cequiv {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        sets: TwoSets,
        /// Compare reduced boundaries; only a positive answer is conclusive.
        #[arg(long)]
        reduced: bool,
    },
    /// Pairwise independence test (sufficient only).
    T1 {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        sets: TwoSets,
    },
    /// Set-subset test: is T c-equivalent to T ∪ S via a split of S?
    T3 {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        pair: Pair,
        #[arg(short = 't')]
        t: VarSet,
        #[arg(short = 's')]
        s: VarSet,
    },
    /// Boundary-union test built from independences only.
    T4 {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        sets: TwoSets,
    },
    /// One-variable-at-a-time chain from T to Z.
    Chain {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        sets: TwoSets,
    },
    /// Adjustment estimand and interventional distribution on a model.
    Estimand {
        /// Model file; otherwise a random binary model on --graph.
        #[arg(long, conflicts_with = "graph")]
        model: Option<PathBuf>,
        #[arg(long, short = 'g', required_unless_present = "model")]
        graph: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        pair: Pair,
        #[arg(short = 'z', default_value = "")]
        z: VarSet,
        /// Print the model that was used.
        #[arg(long)]
        dump_model: bool,
    },
    /// Cross-check the graphical verdict against random models.
    Verify {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        sets: TwoSets,
        /// Models used to confirm an equivalence.
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        /// Models tried when searching for a counterexample.
        #[arg(long, default_value_t = 100)]
        attempts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest gap still read as agreement.
        #[arg(long, default_value_t = CONFIRM_TOL)]
        tol: f64,
    },
    /// Test candidate graphs against a model or contingency table.
    Falsify {
        /// Model file whose joint distribution is the data.
        #[arg(long, conflicts_with_all = ["table", "demo"])]
        model: Option<PathBuf>,
        /// Contingency table file holding the data.
        #[arg(long, conflicts_with = "demo")]
        table: Option<PathBuf>,
        /// Candidate graph (repeat at least twice).
        #[arg(long = "graph", short = 'g')]
        graphs: Vec<PathBuf>,
        #[arg(short = 'x', required_unless_present = "demo")]
        x: Option<NodeId>,
        #[arg(short = 'y', required_unless_present = "demo")]
        y: Option<NodeId>,
        #[arg(short = 't', required_unless_present = "demo")]
        t: Option<VarSet>,
        #[arg(short = 'z', required_unless_present = "demo")]
        z: Option<VarSet>,
        /// Largest gap still read as agreement.
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Run the built-in three-candidate scenario.
        #[arg(long)]
        demo: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    Usage(String),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = std::result::Result<i32, Failure>;

/// Runs the command line `argv` (including the program name), writing the
/// report to `out` and diagnostics to `err`. Returns the exit status.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let mut ctx = Ctx { json: cli.json, backend: cli.backend, out };
    match dispatch(&mut ctx, cli.command) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Input(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
    }
}

struct Ctx<'o> {
    json: bool,
    backend: Backend,
    out: &'o mut dyn Write,
}

impl Ctx<'_> {
    fn emit(&mut self, value: Value, prose: impl FnOnce() -> String) -> Result<(), Failure> {
        let text = if self.json {
            serde_json::to_string_pretty(&value).expect("JSON values serialize")
        } else {
            prose()
        };
        writeln!(self.out, "{}", text.trim_end()).map_err(|e| Failure::Input(format!("writing output: {e}")))
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<Dag, Failure> {
    parse_graph(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<DiscreteModel, Failure> {
    parse_model(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn csv(s: &VarSet) -> String {
    if s.is_empty() {
        "∅".into()
    } else {
        s.to_csv()
    }
}

fn code(positive: bool) -> i32 {
    if positive {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    }
}

fn table_json(t: &EstimandTable) -> Value {
    json!((0..t.x_arity).map(|x| t.row(x).to_vec()).collect::<Vec<_>>())
}

fn table_prose(name: &str, t: &EstimandTable) -> String {
    let mut s = String::new();
    for x in 0..t.x_arity {
        let row: Vec<String> = t.row(x).iter().map(|p| format!("{p:.6}")).collect();
        s.push_str(&format!("  {name}[x={x}] = [{}]\n", row.join(", ")));
    }
    s
}

fn dispatch(c: &mut Ctx<'_>, cmd: Command) -> Outcome {
    match cmd {
        Command::Dsep { graph, a, b, s } => {
            let g = load_graph(&graph.graph)?;
            let q = SeparationQuery::new(&g, a, b, s)?;
            let sep = d_separated(&q, c.backend)?;
            let witness = if !sep && g.len() <= PATHS_NODE_LIMIT {
                find_open_trail(&g, q.a(), q.b(), q.s())?
            } else {
                None
            };
            c.emit(
                json!({
                    "separated": sep,
                    "backend": c.backend,
                    "open_trail": witness.as_ref().map(|t| t.to_string()),
                }),
                || match (&witness, sep) {
                    (_, true) => format!("{} ⊥ {} | {}: d-separated", q.a(), q.b(), q.s()),
                    (Some(t), false) => format!("{} and {} are d-connected given {}\nopen trail: {t}", q.a(), q.b(), q.s()),
                    (None, false) => format!("{} and {} are d-connected given {}", q.a(), q.b(), q.s()),
                },
            )?;
            Ok(code(sep))
        }
        Command::Mb { graph, x, s, order, reduced } => {
            let g = load_graph(&graph.graph)?;
            if let Some(y) = reduced {
                if order.is_some() {
                    return Err(Failure::Usage("--order and --reduced cannot be combined".into()));
                }
                let bound = reduced_markov_boundary(&g, &x, &y, &s)?;
                c.emit(json!({ "boundary": bound, "reduced": true }), || csv(&bound))?;
                return Ok(EXIT_OK);
            }
            let r = match order {
                Some(o) => markov_boundary_in_order(&g, &x, &s, &o)?,
                None => markov_boundary(&g, &x, &s)?,
            };
            c.emit(json!({ "boundary": r.boundary, "removed": r.removed }), || {
                let mut text = csv(&r.boundary);
                for step in &r.removed {
                    text.push_str(&format!("\n  removed {} (separated from {x} by {})", step.node, step.given));
                }
                text
            })?;
            Ok(EXIT_OK)
        }
        Command::Admissible { graph, pair, s, minimal } => {
            let g = load_graph(&graph.graph)?;
            let v = g_admissible(&g, &pair.x, &pair.y, &s)?;
            let min = if minimal {
                minimal_admissible_subset(&g, &pair.x, &pair.y, &s)?
            } else {
                None
            };
            let mut value = serde_json::to_value(&v).expect("verdict serializes");
            if minimal {
                value["minimal_subset"] = json!(min);
            }
            c.emit(value, || {
                let mut text = format!(
                    "{s} is {}admissible for ({}, {})",
                    if v.admissible { "" } else { "not " },
                    pair.x,
                    pair.y
                );
                if !v.violating_descendants.is_empty() {
                    text.push_str(&format!("\ndescendants of {}: {}", pair.x, v.violating_descendants));
                }
                if let Some(t) = &v.open_backdoor {
                    text.push_str(&format!("\nopen back-door trail: {t}"));
                }
                if let Some(m) = &min {
                    text.push_str(&format!("\nminimal admissible subset: {m}"));
                }
                text
            })?;
            Ok(code(v.admissible))
        }
        Command::Cequiv { graph, pair, sets, reduced } => {
            let g = load_graph(&graph.graph)?;
            let v = if reduced {
                c_equivalent_reduced(&g, &pair.x, &pair.y, &sets.t, &sets.z)?
            } else {
                c_equivalent(&g, &pair.x, &pair.y, &sets.t, &sets.z)?
            };
            c.emit(serde_json::to_value(&v).expect("verdict serializes"), || {
                let mut text = format!(
                    "{} {} {}: {}\n  boundaries: {} and {}\n  admissible: {} and {}",
                    sets.t,
                    if v.equivalent { "≈" } else { "≉" },
                    sets.z,
                    v.reason,
                    v.t_boundary,
                    v.z_boundary,
                    v.t_admissible,
                    v.z_admissible
                );
                if reduced && !v.equivalent {
                    text.push_str("\n  (reduced mode: a negative answer is inconclusive)");
                }
                text
            })?;
            Ok(code(v.equivalent))
        }
        Command::T1 { graph, pair, sets } => {
            let g = load_graph(&graph.graph)?;
            let s = pairwise_sufficient(&g, &pair.x, &pair.y, &sets.t, &sets.z)?;
            c.emit(json!({ "sufficient": s.holds(), "direction": s }), || {
                format!("pairwise independence test: {s}")
            })?;
            Ok(code(s.holds()))
        }
        Command::T3 { graph, pair, t, s } => {
            let g = load_graph(&graph.graph)?;
            let p = set_subset_equivalent(&g, &pair.x, &pair.y, &t, &s)?;
            c.emit(json!({ "holds": p.is_some(), "partition": p }), || match &p {
                Some(p) => format!("{t} ≈ {}: S1 = {}, S2 = {}", t.union(&s), p.s1, p.s2),
                None => format!("no split of {s} certifies {t} ≈ {}", t.union(&s)),
            })?;
            Ok(code(p.is_some()))
        }
        Command::T4 { graph, pair, sets } => {
            let g = load_graph(&graph.graph)?;
            let holds = boundary_union_equivalent(&g, &pair.x, &pair.y, &sets.t, &sets.z)?;
            c.emit(json!({ "equivalent": holds }), || {
                format!("boundary-union test: {}", if holds { "equivalent" } else { "not equivalent" })
            })?;
            Ok(code(holds))
        }
        Command::Chain { graph, pair, sets } => {
            let g = load_graph(&graph.graph)?;
            let chain = equivalence_chain(&g, &pair.x, &pair.y, &sets.t, &sets.z)?;
            c.emit(json!({ "chain": chain }), || match &chain {
                Some(ch) => {
                    let mut text = ch.to_string();
                    for (i, l) in ch.licenses.iter().enumerate() {
                        text.push_str(&format!("\n  {} -> {}: {l}", ch.steps[i], ch.steps[i + 1]));
                    }
                    text
                }
                None => format!("{} and {} are not c-equivalent", sets.t, sets.z),
            })?;
            Ok(code(chain.is_some()))
        }
        Command::Estimand { model, graph, seed, pair, z, dump_model } => {
            let m = match (model, graph) {
                (Some(path), _) => load_model(&path)?,
                (None, Some(path)) => random_binary_model(&load_graph(&path)?, seed)?,
                (None, None) => return Err(Failure::Usage("give --model or --graph".into())),
            };
            let a = m.adjustment_estimand(&pair.x, &pair.y, &z)?;
            let e = m.causal_effect(&pair.x, &pair.y)?;
            let gap = a.max_abs_diff(&e);
            let mut value = json!({ "estimand": table_json(&a), "effect": table_json(&e), "gap": gap });
            if dump_model {
                value["model"] = json!(write_model(&m));
            }
            c.emit(value, || {
                let mut text = format!("A({}, {}, {z}):\n{}", pair.x, pair.y, table_prose("A", &a));
                text.push_str(&format!("P({} | do({})):\n{}", pair.y, pair.x, table_prose("P", &e)));
                text.push_str(&format!("max gap: {gap:.3e}"));
                if dump_model {
                    text.push_str("\nmodel:\n");
                    text.push_str(&write_model(&m));
                }
                text
            })?;
            Ok(EXIT_OK)
        }
        Command::Verify { graph, pair, sets, seeds, attempts, seed, tol } => {
            let g = load_graph(&graph.graph)?;
            verify(c, &g, &pair, &sets, seeds, attempts, seed, tol)
        }
        Command::Falsify { model, table, graphs, x, y, t, z, tol, demo, seed } => {
            if demo {
                return falsify_demo(c, seed, tol);
            }
            let d = match (model, table) {
                (Some(p), None) => load_model(&p)?.joint()?,
                (None, Some(p)) => parse_table(&read(&p)?).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
                _ => return Err(Failure::Usage("give exactly one of --model or --table".into())),
            };
            if graphs.len() < 2 {
                return Err(Failure::Usage("give at least two --graph candidates".into()));
            }
            let gs = graphs.iter().map(|p| load_graph(p)).collect::<Result<Vec<_>, _>>()?;
            let (x, y, t, z) = (x.unwrap(), y.unwrap(), t.unwrap(), z.unwrap());
            let r = falsify(&d, &gs, &x, &y, &t, &z, tol)?;
            let names: Vec<String> = graphs.iter().map(|p| p.display().to_string()).collect();
            c.emit(serde_json::to_value(&r).expect("report serializes"), || falsify_prose(&r, &names))?;
            Ok(EXIT_OK)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn verify(c: &mut Ctx<'_>, g: &Dag, pair: &Pair, sets: &TwoSets, seeds: usize, attempts: usize, seed: u64, tol: f64) -> Outcome {
    let v = c_equivalent(g, &pair.x, &pair.y, &sets.t, &sets.z)?;
    if v.equivalent {
        let mut worst = 0.0f64;
        let mut failed = None;
        for i in 0..seeds {
            let s = attempt_seed(seed, i);
            let d = random_binary_model(g, s)?.joint()?;
            let gap = estimand_gap(&d, &pair.x, &pair.y, &sets.t, &sets.z)?;
            worst = worst.max(gap);
            if gap > tol && failed.is_none() {
                failed = Some(s);
            }
        }
        c.emit(
            json!({
                "verdict": v,
                "models": seeds,
                "max_gap": worst,
                "confirmed": failed.is_none(),
                "contradicting_seed": failed,
            }),
            || match failed {
                None => format!(
                    "{} ≈ {} ({}); confirmed on {seeds} models, max gap {worst:.3e}",
                    sets.t, sets.z, v.reason
                ),
                Some(s) => format!(
                    "{} ≈ {} ({}) but model seed {s} disagrees; max gap {worst:.3e}",
                    sets.t, sets.z, v.reason
                ),
            },
        )?;
        Ok(code(failed.is_none()))
    } else {
        let found = search_violation(g, &pair.x, &pair.y, &sets.t, &sets.z, attempts, seed)?;
        let summary = found.as_ref().map(|f| f.summary());
        c.emit(
            json!({ "verdict": v, "attempts": attempts, "violation": summary }),
            || match &summary {
                Some(s) => format!(
                    "{} ≉ {}; counterexample at attempt {} (seed {}), gap {:.3e}",
                    sets.t, sets.z, s.attempt, s.seed, s.gap
                ),
                None => format!(
                    "{} ≉ {} graphically, but no counterexample in {attempts} models",
                    sets.t, sets.z
                ),
            },
        )?;
        Ok(EXIT_NEGATIVE)
    }
}

fn falsify_prose(r: &FalsificationReport, names: &[String]) -> String {
    let mut text = String::new();
    for cand in &r.candidates {
        let verdict = if cand.rejected { "rejected" } else { "consistent" };
        text.push_str(&format!("candidate {}: {verdict}\n", names[cand.index]));
        if cand.descendant_conflict {
            text.push_str("  sets contain descendants of the treatment here; no predictions\n");
        }
        for p in &cand.predictions {
            let mark = if p.refuted { "refuted" } else { "ok" };
            text.push_str(&format!("  {:<40} gap {:.3e}  {mark}\n", p.claim.to_string(), p.gap));
        }
    }
    text
}

fn falsify_demo(c: &mut Ctx<'_>, seed: u64, tol: f64) -> Outcome {
    let graphs = demo_candidates();
    let names = ["(a)", "(b)", "(c)"].map(String::from);
    let (t, z): (VarSet, VarSet) = ("T".parse()?, "Z".parse()?);
    let mut runs = Vec::new();
    for truth in [2usize, 1] {
        let d: Distribution = random_binary_model(&graphs[truth], seed)?.joint()?;
        runs.push((truth, falsify(&d, &graphs, "X", "Y", &t, &z, tol)?));
    }
    let value = json!({
        "candidates": graphs.iter().map(|g| g.to_native()).collect::<Vec<_>>(),
        "runs": runs.iter().map(|(truth, r)| json!({ "truth": truth, "report": r })).collect::<Vec<_>>(),
    });
    c.emit(value, || {
        let mut text = String::from("candidates:\n");
        for (n, g) in names.iter().zip(&graphs) {
            let edges: Vec<String> = g.edges().iter().map(|(a, b)| format!("{a}→{b}")).collect();
            text.push_str(&format!("  {n} {}\n", edges.join(", ")));
        }
        for (truth, r) in &runs {
            text.push_str(&format!("\ndata drawn from {}:\n", names[*truth]));
            text.push_str(&falsify_prose(r, &names));
        }
        text
    })?;
    Ok(EXIT_OK)
}
