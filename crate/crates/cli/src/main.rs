//! `dbcount`: model counting over disjoint branches decompositions.
//!
//! Exit status is 0 on success, 1 on unreadable or invalid input, and 2 when
//! an instance is not decomposable or a check fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use dbcount_core::counter::{
    brute_force_count, count_models, count_models_using, translate_decomposition, CountError,
    CspNegInstance,
};
use dbcount_core::decomposer::{compute_db, find_single_decomposition, DecomposeError};
use dbcount_core::formats::{
    decode_utf8, parse_input, read_decomposition, write_cspneg, write_decomposition, write_dimacs,
    DecompositionError,
};
use dbcount_core::hypergraph::{
    is_disjoint_branches, is_join_tree, Decomposition, EdgeId, Hypergraph,
};
use dbcount_core::testkit::{classify, gen_db_instance, instance_hypergraph, GeneratorConfig};

#[derive(Parser)]
#[command(
    name = "dbcount",
    version,
    about = "Exact model counting for CNF and negative-representation CSPs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the number of models.
    Count {
        input: PathBuf,
        /// Enumerate all assignments instead (small instances only).
        #[arg(long, conflicts_with = "decomposition")]
        brute: bool,
        /// Use this decomposition instead of searching for one.
        #[arg(long)]
        decomposition: Option<PathBuf>,
    },
    /// Print a disjoint branches decomposition as JSON.
    Decompose {
        input: PathBuf,
        /// Edge id to root the decomposition at.
        #[arg(long)]
        root: Option<usize>,
    },
    /// Check that a decomposition fits an instance.
    Check {
        input: PathBuf,
        decomposition: PathBuf,
    },
    /// Report acyclicity properties of the instance's hypergraph.
    Classify { input: PathBuf },
    /// Generate a random decomposable instance and its witness decomposition.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        edges: usize,
        #[arg(long, default_value_t = 4)]
        max_edge_size: usize,
        #[arg(long, default_value_t = 3)]
        branching: usize,
        #[arg(long, default_value_t = 0)]
        tuples_min: usize,
        #[arg(long, default_value_t = 3)]
        tuples_max: usize,
        #[arg(long, default_value_t = 16)]
        max_vars: usize,
        #[arg(long, default_value_t = 0)]
        fresh_min: usize,
        #[arg(long, default_value_t = 2)]
        fresh_max: usize,
        #[arg(long, value_enum, default_value_t = Format::Cnf)]
        format: Format,
        /// Instance output path.
        #[arg(long)]
        out: PathBuf,
        /// Witness decomposition output path.
        #[arg(long)]
        witness: PathBuf,
    },
    /// Count models by exhaustive enumeration.
    BruteCount { input: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Cnf,
    Cspneg,
}

/// A definite negative answer, as opposed to an input error.
enum Outcome {
    Done,
    Rejected,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Rejected) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let text = decode_utf8(&bytes).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    Ok(text.to_string())
}

fn load_instance(path: &Path) -> Result<CspNegInstance> {
    let text = read_text(path)?;
    let parsed = parse_input(&text).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    parsed
        .to_instance()
        .with_context(|| format!("{}: invalid instance", path.display()))
}

fn load_decomposition(path: &Path) -> Result<(Hypergraph, Decomposition), DecompositionError> {
    let text = read_text(path).map_err(|e| DecompositionError::Schema(format!("{e:#}")))?;
    read_decomposition(&text)
}

fn not_decomposable(component: usize) -> Outcome {
    println!("NOT_DECOMPOSABLE component={component}");
    Outcome::Rejected
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Count {
            input,
            brute,
            decomposition,
        } => {
            let inst = load_instance(&input)?;
            let result = if brute {
                brute_force_count(&inst)
            } else if let Some(path) = decomposition {
                let (dh, d) =
                    load_decomposition(&path).map_err(|e| anyhow!("{}: {e}", path.display()))?;
                count_models_using(&inst, &dh, &d)
            } else {
                count_models(&inst)
            };
            match result {
                Ok(n) => {
                    println!("{n}");
                    Ok(Outcome::Done)
                }
                Err(CountError::NotDecomposable { component, .. }) => {
                    Ok(not_decomposable(component))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Decompose { input, root } => {
            let h = instance_hypergraph(&load_instance(&input)?);
            if h.is_empty() {
                bail!("{}: instance has no constraints", input.display());
            }
            let d = match root {
                Some(r) => {
                    let r = EdgeId(r);
                    if !h.contains_edge(r) {
                        bail!(
                            "no edge with id {r}; ids run from 0 to {}",
                            h.num_edges() - 1
                        );
                    }
                    match compute_db(&h, r) {
                        Ok(d) => d,
                        Err(e @ DecomposeError::Reject { .. }) => {
                            eprintln!("{e}");
                            println!("NOT_ROOTABLE root={r}");
                            return Ok(Outcome::Rejected);
                        }
                        Err(DecomposeError::NotDecomposable { component, .. }) => {
                            return Ok(not_decomposable(component));
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
                None => match find_single_decomposition(&h) {
                    Ok(d) => d,
                    Err(DecomposeError::NotDecomposable { component, .. }) => {
                        return Ok(not_decomposable(component));
                    }
                    Err(e) => return Err(e.into()),
                },
            };
            if !is_join_tree(&h, &d)? || !is_disjoint_branches(&h, &d)? {
                bail!("internal error: produced an invalid decomposition");
            }
            print!("{}", write_decomposition(&d, &h)?);
            Ok(Outcome::Done)
        }
        Command::Check {
            input,
            decomposition,
        } => {
            let h = instance_hypergraph(&load_instance(&input)?);
            let (dh, d) = match load_decomposition(&decomposition) {
                Ok(x) => x,
                Err(DecompositionError::Validation(m)) => {
                    println!("FAIL: {m}");
                    return Ok(Outcome::Rejected);
                }
                Err(e) => bail!("{}: {e}", decomposition.display()),
            };
            let verdict = match translate_decomposition(&h, &dh, &d) {
                Ok(t) if is_join_tree(&h, &t)? && is_disjoint_branches(&h, &t)? => None,
                Ok(_) => Some("not a disjoint branches decomposition".to_string()),
                Err(e) => Some(e.to_string()),
            };
            match verdict {
                None => {
                    println!("OK");
                    Ok(Outcome::Done)
                }
                Some(m) => {
                    println!("FAIL: {m}");
                    Ok(Outcome::Rejected)
                }
            }
        }
        Command::Classify { input } => {
            let h = instance_hypergraph(&load_instance(&input)?);
            println!("{}", classify(&h));
            Ok(Outcome::Done)
        }
        Command::Gen {
            seed,
            edges,
            max_edge_size,
            branching,
            tuples_min,
            tuples_max,
            max_vars,
            fresh_min,
            fresh_max,
            format,
            out,
            witness,
        } => {
            if edges == 0 || max_edge_size == 0 || branching == 0 || max_vars == 0 {
                bail!("edges, max-edge-size, branching and max-vars must be positive");
            }
            if tuples_min > tuples_max || fresh_min > fresh_max {
                bail!("range minimum exceeds maximum");
            }
            let cfg = GeneratorConfig {
                seed,
                edges,
                max_edge_size,
                branching,
                tuples: (tuples_min, tuples_max),
                max_vars,
                fresh: (fresh_min, fresh_max),
            };
            let (inst, d) = gen_db_instance(&cfg);
            let text = match format {
                Format::Cnf => write_dimacs(&inst),
                Format::Cspneg => write_cspneg(&inst),
            };
            fs::write(&out, text).with_context(|| format!("cannot write {}", out.display()))?;
            let json = write_decomposition(&d, &instance_hypergraph(&inst))?;
            fs::write(&witness, json)
                .with_context(|| format!("cannot write {}", witness.display()))?;
            Ok(Outcome::Done)
        }
        Command::BruteCount { input } => {
            let inst = load_instance(&input)?;
            println!("{}", brute_force_count(&inst)?);
            Ok(Outcome::Done)
        }
    }
}
