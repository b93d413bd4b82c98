use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use normembed::tasks::{RecsysLoss, DEFAULT_MARGIN};
use normembed_cli::commands::{self, CapacityArgs, Family, RecsysArgs};
use normembed_cli::plan::CommonArgs;

#[derive(Parser)]
#[command(
    name = "normembed",
    version,
    about = "Embed graphs into normed, hyperbolic and product spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the edge list of a generator expression such as `tree(3,5)`.
    Generate {
        expr: String,
        /// Edge-list path; a `.nodes` map is written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Grid-searched reconstruction of one graph in each space and seed.
    Reconstruct {
        /// Generator expression or edge-list file.
        graph: String,
        /// Read a third weight column from the edge list.
        #[arg(long)]
        weighted: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Distortion and runtime across sizes of a graph family.
    Capacity {
        #[arg(value_enum)]
        family: Family,
        /// Tree heights, grid dimensions or fullerene sizes: `a..=b`, `a..b` or a list.
        #[arg(long)]
        sizes: String,
        #[arg(long, default_value_t = 3)]
        branching: usize,
        /// Side length of every grid axis.
        #[arg(long, default_value_t = 5)]
        side: usize,
        #[arg(long, default_value = "data/fullerenes")]
        data_dir: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Metric recommender on `<prefix>.{train,dev,test}.tsv`.
    Recsys {
        prefix: PathBuf,
        #[arg(long, default_value = "hinge")]
        loss: RecsysLoss,
        #[arg(long, default_value_t = DEFAULT_MARGIN)]
        margin: f64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Shallow Fermi-Dirac link prediction.
    Linkpred {
        /// Generator expression or edge-list file.
        graph: String,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { expr, out } => commands::generate(&expr, &out),
        Command::Reconstruct {
            graph,
            weighted,
            common,
        } => commands::reconstruct(&graph, weighted, &common),
        Command::Capacity {
            family,
            sizes,
            branching,
            side,
            data_dir,
            common,
        } => {
            let sizes = commands::parse_sizes(&sizes)?;
            commands::capacity(
                &CapacityArgs {
                    family,
                    sizes,
                    branching,
                    side,
                    data_dir,
                },
                &common,
            )
        }
        Command::Recsys {
            prefix,
            loss,
            margin,
            common,
        } => commands::recsys(
            &RecsysArgs {
                prefix,
                loss,
                margin,
            },
            &common,
        ),
        Command::Linkpred { graph, common } => commands::linkpred(&graph, &common),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
