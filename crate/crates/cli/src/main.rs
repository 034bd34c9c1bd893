use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use causal_id::identify::{identify_with, parse_set, IdentifyOptions, Query};
use causal_id::oracle::{random_scm, uniform_cards, verify};
use causal_id::{Error, FixingSequence, IdentificationResult, MixedGraph, Scm64};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

const EXIT_NOT_IDENTIFIED: u8 = 1;
const EXIT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(
    name = "ident",
    version,
    about = "Causal effect identification on ADMGs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the latent projection of a hidden-variable DAG.
    Project { graph: PathBuf },
    /// Identify p(outcome | do(treatment)).
    Identify {
        graph: PathBuf,
        #[arg(long, default_value = "")]
        treatment: String,
        #[arg(long)]
        outcome: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Keep the kernels as synthesized, without simplification.
        #[arg(long)]
        raw: bool,
    },
    /// Print the districts of the graph.
    Districts { graph: PathBuf },
    /// Replay a fixing sequence and print the resulting CADMG.
    Fix {
        graph: PathBuf,
        #[arg(long)]
        sequence: String,
    },
    /// Print the reachable closure of a set.
    Closure {
        graph: PathBuf,
        #[arg(long)]
        set: String,
    },
    /// Check the identified estimand against random discrete models.
    Verify {
        graph: PathBuf,
        #[arg(long, default_value = "")]
        treatment: String,
        #[arg(long)]
        outcome: String,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, env = "IDENT_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Cardinality of every variable.
        #[arg(long, default_value_t = 2)]
        card: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Latex,
    Json,
    Dot,
}

fn read_graph(path: &Path) -> Result<MixedGraph, Error> {
    let mut text = String::new();
    if path == Path::new("-") {
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Error::InvalidInput(format!("reading standard input: {e}")))?;
    } else {
        text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("reading {}: {e}", path.display())))?;
    }
    MixedGraph::from_json(&text)
}

/// Projects hidden-variable input, with a notice on standard error.
fn read_admg(path: &Path) -> Result<MixedGraph, Error> {
    let g = read_graph(path)?;
    if g.hidden().is_empty() {
        return Ok(g);
    }
    eprintln!(
        "note: projecting out hidden vertices {}",
        causal_id::graph::fmt_set(g.hidden())
    );
    g.latent_project()
}

fn pretty(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}

fn names(set: &causal_id::VertexSet) -> Vec<String> {
    set.iter().map(|v| v.to_string()).collect()
}

fn explain(result: &IdentificationResult) {
    if let IdentificationResult::NotIdentified {
        failing_district,
        closure,
        witness,
        ..
    } = result
    {
        eprintln!(
            "not identified: district {} is not intrinsic; fixing gets stuck at its reachable closure {}",
            causal_id::graph::fmt_set(failing_district),
            causal_id::graph::fmt_set(closure)
        );
        eprintln!("{witness}");
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Project { graph } => {
            print!("{}", read_graph(&graph)?.latent_project()?.to_json());
        }
        Command::Identify {
            graph,
            treatment,
            outcome,
            format,
            raw,
        } => {
            let g = read_admg(&graph)?;
            let q = Query::parse(&outcome, &treatment)?;
            let options = if raw {
                IdentifyOptions::raw()
            } else {
                IdentifyOptions::default()
            };
            let result = identify_with(&g, &q, options)?;
            match (&result, format) {
                (_, Format::Json) => println!("{}", pretty(&result.to_json_value())),
                (IdentificationResult::Identified { estimand, .. }, Format::Text) => {
                    println!("{estimand}")
                }
                (IdentificationResult::Identified { estimand, .. }, Format::Latex) => {
                    print!("{}", estimand.latex_document())
                }
                (IdentificationResult::Identified { ystar, .. }, Format::Dot) => {
                    print!("{}", g.to_dot_highlighting(ystar))
                }
                (IdentificationResult::NotIdentified { witness, .. }, Format::Dot) => {
                    print!("{}", g.to_dot_highlighting(&witness.outer.vertices))
                }
                (IdentificationResult::NotIdentified { witness, .. }, _) => {
                    println!("{}", pretty(&witness.to_json_value()))
                }
            }
            if !result.is_identified() {
                explain(&result);
                return Ok(EXIT_NOT_IDENTIFIED);
            }
        }
        Command::Districts { graph } => {
            let g = read_admg(&graph)?;
            let ds: Vec<Vec<String>> = g.districts().iter().map(names).collect();
            println!("{}", pretty(&json!(ds)));
        }
        Command::Fix { graph, sequence } => {
            let g = read_admg(&graph)?;
            let steps: Vec<String> = sequence
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            let seq = FixingSequence::from_names(steps)?;
            print!("{}", g.fix_all(&seq)?.to_json());
        }
        Command::Closure { graph, set } => {
            let g = read_admg(&graph)?;
            let s = parse_set(&set)?;
            let closure = g.reachable_closure(&s)?;
            println!(
                "{}",
                pretty(&json!({
                    "set": names(&s),
                    "closure": names(&closure),
                    "reachable": closure == s,
                    "intrinsic": g.is_intrinsic(&s)?,
                }))
            );
        }
        Command::Verify {
            graph,
            treatment,
            outcome,
            trials,
            seed,
            tol,
            card,
        } => {
            let dag = read_graph(&graph)?;
            if !dag.bidirected_edges().is_empty() {
                return Err(Error::InvalidInput(
                    "verify needs the hidden-variable DAG; an ADMG does not determine a structural model"
                        .into(),
                ));
            }
            let admg = dag.latent_project()?;
            let q = Query::parse(&outcome, &treatment)?;
            let result = identify_with(&admg, &q, IdentifyOptions::default())?;
            if !result.is_identified() {
                println!("not identified; nothing to verify");
                if let Some(w) = result.witness() {
                    println!("{}", pretty(&w.to_json_value()));
                }
                explain(&result);
                return Ok(EXIT_NOT_IDENTIFIED);
            }
            let cards = uniform_cards(&dag, card);
            let mut worst: f64 = 0.0;
            let mut points = 0;
            let mut failed = 0;
            for t in 0..trials {
                let scm: Scm64 = random_scm(&dag, &cards, seed.wrapping_add(t))?;
                let report = verify(&scm, &admg, &q, &result, tol)?;
                worst = worst.max(report.max_abs_deviation);
                points += report.points;
                failed += u64::from(!report.passed);
            }
            println!(
                "{}",
                pretty(&json!({
                    "query": q.to_string(),
                    "estimand": result.estimand().map(|e| e.render_text()),
                    "trials": trials,
                    "seed": seed,
                    "points": points,
                    "max_abs_deviation": worst,
                    "tolerance": tol,
                    "failed_trials": failed,
                    "passed": failed == 0,
                }))
            );
            if failed > 0 {
                eprintln!("verification failed in {failed} of {trials} trials");
                return Ok(EXIT_NOT_IDENTIFIED);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
