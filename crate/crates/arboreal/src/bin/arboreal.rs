use arboreal::cli::{run, RunConfig};
use clap::Parser;

fn main() {
    std::process::exit(run(RunConfig::parse()));
}
