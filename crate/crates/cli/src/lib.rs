//! Command-line front end for the questgraph library: run constructions
//! against their oracles, benchmark computation-graph simulators, and
//! transform DAG edge lists.

pub mod commands;
pub mod dot;
pub mod machine_file;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use questgraph::cgsim::Variant;

use commands::{BenchArgs, Emit, EXIT_INPUT};

#[derive(Parser, Debug)]
#[command(name = "questgraph", version, about = "Quest Graph automata: constructions, oracles and benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a construction and its oracle on one input; exit 0 when they agree.
    Run {
        /// tm-qg, dpda-fqdp, cfl-nfqdp, tm-rqdp or lm-fsm
        construction: String,
        /// JSON machine file
        file: PathBuf,
        #[arg(default_value = "")]
        input: String,
        /// Step budget; overrides the QUESTGRAPH_BUDGET environment variable.
        #[arg(long)]
        budget: Option<usize>,
        /// Write the final rollout as Graphviz DOT.
        #[arg(long, value_name = "PATH")]
        trace_dot: Option<PathBuf>,
    },
    /// Operation-count benchmark over complete computation graphs.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "qg,rqdp,fqdp", value_parser = parse_variant)]
        variants: Vec<Variant>,
        #[arg(long = "N", value_delimiter = ',', required = true, num_args = 1..)]
        ns: Vec<usize>,
        #[arg(long = "C", default_value_t = 4)]
        c: usize,
        /// Largest N attempted for the exponential fqdp variant.
        #[arg(long, default_value_t = 16)]
        cap: usize,
        /// CSV destination; stdout when omitted.
        out: Option<PathBuf>,
    },
    /// Totalize a DAG edge list into an MCG or bounded MCG.
    Graph {
        path: PathBuf,
        #[arg(long = "C", default_value_t = 4)]
        c: usize,
        #[arg(long, value_enum, default_value = "mcg")]
        emit: EmitArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum EmitArg {
    Mcg,
    Bmcg,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    Variant::parse(s).ok_or_else(|| format!("unknown variant {s:?}; expected qg, rqdp or fqdp"))
}

/// Runs a parsed command and maps errors to the input-error exit code.
pub fn execute(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Run {
            construction,
            file,
            input,
            budget,
            trace_dot,
        } => commands::cmd_run(&construction, &file, &input, budget, trace_dot.as_deref()),
        Command::Bench {
            variants,
            ns,
            c,
            cap,
            out,
        } => commands::cmd_bench(&BenchArgs {
            variants,
            ns,
            c,
            cap,
            out,
        })
        .map(|(code, _)| code),
        Command::Graph { path, c, emit, output } => {
            let emit = match emit {
                EmitArg::Mcg => Emit::Mcg,
                EmitArg::Bmcg => Emit::Bmcg,
            };
            commands::cmd_graph(&path, c, emit, output.as_deref())
        }
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        EXIT_INPUT
    })
}
