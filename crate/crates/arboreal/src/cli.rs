//! Command-line entry point.
//!
//! # Subcommands
//! `tree` wraps canonical forms, automorphisms, and pruning; `front`
//! builds models, samples meshes, and answers membership queries;
//! `tangency` prints loci and runs the numeric agreement oracle; `sign`
//! computes the polarization sign of a tree edge; `verify` runs the
//! symbolic identity suite and the flow demonstrator.
//!
//! # Conventions
//! File arguments accept `-` for standard input.  Rational values are
//! written `p` or `p/q`; no floats appear in JSON output.  Exit codes:
//! `0` success, `1` verification failure, `2` usage or input error.

use std::fmt::Write as _;
use std::fs;
use std::io::Read as _;

use clap::{Args, Parser, Subcommand};

use crate::fronts::{build_front, sample_mesh, Front};
use crate::poly::{parse_rat, Rat, RationalPoint};
use crate::symlin::{model_edge_sign, SymlinError};
use crate::tangency::{oracle_agreement, t_locus, tau_locus, tau_of_tau_check};
use crate::trees::SignedRootedTree;
use crate::verify::{run_all, run_normalization_flow, VerifyError};

/// Parsed command line.
#[derive(Debug, Parser)]
#[command(
    name = "arboreal",
    version,
    about = "Exact front models, tangency loci, and verified identities for signed rooted trees"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

/// Top-level subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Canonical form, automorphisms, and pruning of signed rooted trees.
    Tree {
        #[command(subcommand)]
        action: TreeAction,
    },
    /// Front construction, mesh export, and membership queries.
    Front {
        #[command(subcommand)]
        action: FrontAction,
    },
    /// Tangency loci and the numeric agreement oracle.
    Tangency {
        #[command(subcommand)]
        action: TangencyAction,
    },
    /// Polarization sign of a tree edge from the conormal model.
    Sign(SignArgs),
    /// Symbolic identity checks and the numeric flow demonstrator.
    Verify {
        #[command(subcommand)]
        action: VerifyAction,
    },
}

/// Actions on tree files.
#[derive(Debug, Subcommand)]
pub enum TreeAction {
    /// Print the canonical form string.
    Canon {
        /// Tree JSON file, or `-` for stdin.
        #[arg(long)]
        tree: String,
    },
    /// Print the automorphism count and the nontrivial automorphisms.
    Aut {
        /// Tree JSON file, or `-` for stdin.
        #[arg(long)]
        tree: String,
    },
    /// Remove a leaf and print the smaller tree.
    Prune {
        /// Tree JSON file, or `-` for stdin.
        #[arg(long)]
        tree: String,
        /// Leaf vertex to remove.
        #[arg(long)]
        leaf: String,
    },
}

/// Actions on fronts.
#[derive(Debug, Subcommand)]
pub enum FrontAction {
    /// Build the front of a tree and print it as JSON.
    Build {
        /// Tree JSON file, or `-` for stdin.
        #[arg(long)]
        tree: String,
    },
    /// Sample every piece on an exact grid and write an OBJ mesh.
    Sample {
        /// Tree JSON file, or `-` for stdin.
        #[arg(long)]
        tree: String,
        /// Half-width of the sampling box.
        #[arg(long = "box", default_value_t = 1.0)]
        box_bound: f64,
        /// Grid subdivisions per axis.
        #[arg(long, default_value_t = 16)]
        res: usize,
        /// Output path, or `-` for stdout.
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// List the pieces containing a point.
    Membership {
        /// Front JSON file, or `-` for stdin.
        #[arg(long, default_value = "-")]
        front: String,
        /// Comma-separated rational coordinates in ambient order.
        #[arg(long)]
        point: String,
    },
}

/// Actions on tangency loci.
#[derive(Debug, Subcommand)]
pub enum TangencyAction {
    /// Print the cell description of a tangency locus.
    Locus {
        /// Ambient model level.
        #[arg(long)]
        n: usize,
        /// First piece index.
        #[arg(long)]
        i: usize,
        /// Second piece index (j < i).
        #[arg(long)]
        j: usize,
        /// Print only the primary tangency cell.
        #[arg(long)]
        primary: bool,
    },
    /// Compare the loci against the brute-force numeric oracle.
    Verify {
        /// Largest model level to test.
        #[arg(long)]
        n: usize,
        /// Grid points per axis.
        #[arg(long, default_value_t = 201)]
        samples: usize,
        /// Numeric tolerance for the oracle.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

/// Arguments of the `sign` subcommand.
#[derive(Debug, Args)]
pub struct SignArgs {
    /// Tree JSON file, or `-` for stdin.
    #[arg(long)]
    pub tree: String,
    /// Edge written `a-b`.
    #[arg(long)]
    pub edge: String,
    /// Polarization choice; only the vertical fiber is supported.
    #[arg(long, default_value = "vertical")]
    pub eta: String,
}

/// Actions of the verification suite.
#[derive(Debug, Subcommand)]
pub enum VerifyAction {
    /// Run every symbolic check up to a dimension bound.
    All {
        /// Largest model level to check.
        #[arg(long = "max-n", default_value_t = 6)]
        max_n: usize,
        /// Emit the reports as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Run the numeric normalization-flow demonstrator.
    Flow {
        /// Perturbation coefficient, as `p` or `p/q`.
        #[arg(long, default_value = "1/10")]
        beta: String,
        /// Fixed RK4 step count.
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// Half-width of the sampled box.
        #[arg(long = "box", default_value_t = 0.2)]
        box_bound: f64,
        /// Emit the report as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
}

/// Error type for input and usage problems (exit code 2).
#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn input_err<T, E: std::fmt::Display>(context: &str, e: E) -> Result<T, InputError> {
    Err(InputError(format!("{context}: {e}")))
}

/// Reads a file argument, with `-` meaning standard input.
fn read_source(path: &str) -> Result<String, InputError> {
    if path == "-" {
        let mut buf = String::new();
        match std::io::stdin().read_to_string(&mut buf) {
            Ok(_) => Ok(buf),
            Err(e) => input_err("reading stdin", e),
        }
    } else {
        fs::read_to_string(path).or_else(|e| input_err(path, e))
    }
}

fn load_tree(path: &str) -> Result<SignedRootedTree, InputError> {
    let text = read_source(path)?;
    SignedRootedTree::from_json(&text).or_else(|e| input_err("tree", e))
}

/// Parses comma-separated rationals against the ambient variable list.
fn parse_point(text: &str, ambient: &[String]) -> Result<RationalPoint, InputError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != ambient.len() {
        return Err(InputError(format!(
            "point has {} coordinates, ambient needs {} ({})",
            parts.len(),
            ambient.len(),
            ambient.join(",")
        )));
    }
    let mut point = RationalPoint::new();
    for (v, part) in ambient.iter().zip(parts) {
        let value = parse_rat(part.trim()).or_else(|e| input_err("point", e))?;
        point.insert(v.clone(), value);
    }
    Ok(point)
}

/// Executes a parsed command line and returns the process exit code.
pub fn run(config: RunConfig) -> i32 {
    match execute(config.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn execute(command: Command) -> Result<i32, InputError> {
    match command {
        Command::Tree { action } => run_tree(action),
        Command::Front { action } => run_front(action),
        Command::Tangency { action } => run_tangency(action),
        Command::Sign(args) => run_sign(args),
        Command::Verify { action } => run_verify(action),
    }
}

fn run_tree(action: TreeAction) -> Result<i32, InputError> {
    match action {
        TreeAction::Canon { tree } => {
            println!("{}", load_tree(&tree)?.canonical_form());
        }
        TreeAction::Aut { tree } => {
            let tree = load_tree(&tree)?;
            let autos = tree.automorphisms();
            println!("order: {}", tree.automorphism_order());
            for auto in autos {
                let moved: Vec<String> = auto
                    .iter()
                    .filter(|(a, b)| a != b)
                    .map(|(a, b)| format!("{a}->{b}"))
                    .collect();
                if !moved.is_empty() {
                    println!("{}", moved.join(" "));
                }
            }
        }
        TreeAction::Prune { tree, leaf } => {
            let pruned = load_tree(&tree)?
                .prune_leaf(&leaf)
                .or_else(|e| input_err("prune", e))?;
            println!("{}", pruned.to_json());
        }
    }
    Ok(0)
}

fn run_front(action: FrontAction) -> Result<i32, InputError> {
    match action {
        FrontAction::Build { tree } => {
            println!("{}", build_front(&load_tree(&tree)?).to_json());
        }
        FrontAction::Sample { tree, box_bound, res, out } => {
            let front = build_front(&load_tree(&tree)?);
            let mesh =
                sample_mesh(&front, box_bound, res).or_else(|e| input_err("sample", e))?;
            let obj = mesh.to_obj();
            if out == "-" {
                print!("{obj}");
            } else {
                fs::write(&out, &obj).or_else(|e| input_err(&out, e))?;
                let (vertices, faces): (usize, usize) = mesh
                    .pieces
                    .iter()
                    .fold((0, 0), |(v, f), p| (v + p.vertices.len(), f + p.faces.len()));
                println!("wrote {out}: {vertices} vertices, {faces} faces");
            }
        }
        FrontAction::Membership { front, point } => {
            let front =
                Front::from_json(&read_source(&front)?).or_else(|e| input_err("front", e))?;
            let point = parse_point(&point, &front.ambient_vars)?;
            let members = front.membership(&point).or_else(|e| input_err("membership", e))?;
            for vertex in members {
                println!("{vertex}");
            }
        }
    }
    Ok(0)
}

fn run_tangency(action: TangencyAction) -> Result<i32, InputError> {
    match action {
        TangencyAction::Locus { n, i, j, primary } => {
            let set = if primary { tau_locus(n, i, j) } else { t_locus(n, i, j) };
            let set = set.or_else(|e| input_err("locus", e))?;
            print!("{}", set.render());
            Ok(0)
        }
        TangencyAction::Verify { n, samples, tol } => {
            if tol <= 0.0 {
                return Err(InputError("tolerance must be positive".to_string()));
            }
            let report = oracle_agreement(n, samples, tol);
            for pair in &report.pairs {
                println!(
                    "pieces ({}, {}): {} grid survivors, max residual {:.3e}, {} exact cell \
                     samples: {}",
                    pair.i,
                    pair.j,
                    pair.survivors,
                    pair.max_residual,
                    pair.cell_samples,
                    if pair.pass { "ok" } else { "MISMATCH" }
                );
            }
            let mut all = report.pass;
            for j in 1..n {
                for k in 0..j {
                    let check =
                        tau_of_tau_check(n, j, k).or_else(|e| input_err("iterated tangency", e))?;
                    println!(
                        "iterated tangency (j={j}, k={k}): {} samples: {}",
                        check.samples_checked,
                        if check.pass { "ok" } else { "MISMATCH" }
                    );
                    all = all && check.pass;
                }
            }
            println!("agreement at n = {n}: {}", if all { "pass" } else { "fail" });
            Ok(if all { 0 } else { 1 })
        }
    }
}

fn run_sign(args: SignArgs) -> Result<i32, InputError> {
    if args.eta != "vertical" {
        return Err(InputError(format!(
            "unsupported polarization `{}`; only `vertical` is available",
            args.eta
        )));
    }
    let tree = load_tree(&args.tree)?;
    let Some((a, b)) = args.edge.split_once('-') else {
        return Err(InputError(format!("edge `{}` is not of the form a-b", args.edge)));
    };
    match model_edge_sign(&tree, a, b) {
        Ok(sign) => {
            println!("{sign:+}");
            Ok(0)
        }
        Err(SymlinError::DegeneratePolarization) => Err(InputError(
            "the vertical polarization degenerates on this edge; root-adjacent edges carry no \
             sign"
                .to_string(),
        )),
        Err(e) => input_err("sign", e),
    }
}

fn run_verify(action: VerifyAction) -> Result<i32, InputError> {
    match action {
        VerifyAction::All { max_n, json } => {
            if max_n == 0 {
                return Err(InputError("--max-n must be at least 1".to_string()));
            }
            let reports = run_all(max_n);
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&reports).expect("reports serialize")
                );
            } else {
                let width = reports.iter().map(|r| r.lemma.len()).max().unwrap_or(0);
                for report in &reports {
                    let mut line = format!(
                        "{:<width$}  {}  {:>9.1} ms  [{}]",
                        report.lemma,
                        if report.pass { "pass" } else { "FAIL" },
                        report.wall_ms,
                        report.range,
                    );
                    if let Some(ce) = &report.counterexample {
                        let _ = write!(line, "  counterexample: {ce}");
                    }
                    println!("{line}");
                    for note in &report.notes {
                        println!("{:<width$}    note: {note}", "");
                    }
                }
            }
            Ok(if reports.iter().all(|r| r.pass) { 0 } else { 1 })
        }
        VerifyAction::Flow { beta, steps, box_bound, json } => {
            let beta: Rat = parse_rat(&beta).or_else(|e| input_err("beta", e))?;
            if steps == 0 {
                return Err(InputError("--steps must be positive".to_string()));
            }
            if box_bound <= 0.0 {
                return Err(InputError("--box must be positive".to_string()));
            }
            let report = match run_normalization_flow(2, &beta, steps, box_bound) {
                Ok(report) => report,
                Err(e @ VerifyError::UnsupportedDimension(_))
                | Err(e @ VerifyError::NonPositiveDenominator(_))
                | Err(e @ VerifyError::Divergent) => return input_err("flow", e),
            };
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("report serializes")
                );
            } else {
                println!(
                    "flow with beta = {}, {} steps on [-{2:.3}, {2:.3}]^2:",
                    report.beta, report.steps, report.box_bound
                );
                println!("  max graph deviation: {:.3e}", report.max_graph_deviation);
                println!("  zero level max |x0|: {:.3e}", report.zero_level_max);
                match report.order_ratio {
                    Some(r) => println!(
                        "  error ratio when halving the step at {} steps: {:.1}",
                        report.ratio_steps, r
                    ),
                    None => println!("  error at roundoff; order test skipped"),
                }
                for note in &report.notes {
                    println!("  note: {note}");
                }
                println!("  {}", if report.pass { "pass" } else { "fail" });
            }
            Ok(if report.pass { 0 } else { 1 })
        }
    }
}
