//! Subcommands of the `pdmp` binary.

mod chain;
mod distance;
mod estimate;
mod kernels;
mod simulate;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use chain::{run_chain, ChainArgs, ChainKind};
pub use distance::{run_distance, DistanceArgs, Metric};
pub use estimate::{run_estimate, EstimateArgs};
pub use kernels::{run_kernels, KernelsArgs};
pub use simulate::{run_simulate, SimulateArgs};

use crate::config::Config;
use crate::error::Result;
use crate::model::{Model, ModelKind};

#[derive(Debug, Parser)]
#[command(name = "pdmp", version, about = "Simulate PDMPs, run coupling experiments and estimate jump-time densities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate trajectories and write them as CSV.
    Simulate(SimulateArgs),
    /// Distance curves between two TCP laws over time.
    Distance(DistanceArgs),
    /// Sweep the total masses of the H and J kernels.
    Kernels(KernelsArgs),
    /// Export an embedded or observation chain.
    Chain(ChainArgs),
    /// Estimate the inter-jump density from a chain.
    Estimate(EstimateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// Jump rate of the tcp-constant variant.
    #[arg(long)]
    pub r: Option<f64>,
    /// key = value file with [section] headers; flags win over its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl ModelArgs {
    pub fn load_config(&self) -> Result<Option<Config>> {
        self.config.as_deref().map(Config::load).transpose()
    }

    pub fn model(&self, config: Option<&Config>) -> Result<Model> {
        Model::resolve(self.model, self.r, config)
    }
}

/// Runs a parsed command line; returns the summary text for stderr.
pub fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Simulate(a) => run_simulate(&a),
        Command::Distance(a) => run_distance(&a),
        Command::Kernels(a) => run_kernels(&a),
        Command::Chain(a) => run_chain(&a),
        Command::Estimate(a) => run_estimate(&a),
    }
}
