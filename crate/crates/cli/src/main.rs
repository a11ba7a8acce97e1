use clap::Parser;
use questgraph_cli::{execute, Cli};

fn main() {
    std::process::exit(execute(Cli::parse()));
}
