use std::path::PathBuf;

use clap::Args;
use pdmp::chains::embedded_chain;
use pdmp::engine::path_stream;
use pdmp::estimation::{build_partition, estimate_density, DensityMethod, KernelShape};
use pdmp::models::tcp_true_density;

use super::ModelArgs;
use crate::config::Settings;
use crate::error::{CliError, Result};
use crate::grid::{parse_grid, parse_range};
use crate::model::ModelKind;
use crate::table::{num, read_chain, Table};

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Embedded-chain CSV `n,Z,S`; simulates the model when absent.
    #[arg(long)]
    pub chain: Option<PathBuf>,
    /// Jumps to simulate when no chain file is given.
    #[arg(long)]
    pub jumps: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Query point.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    /// Width of the set A around the query point.
    #[arg(long)]
    pub a_width: Option<f64>,
    #[arg(long)]
    pub blocks: Option<usize>,
    /// Kernel bandwidth (default: n^(-1/5) times the sample sd of the S used).
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// epanechnikov, triangular or uniform.
    #[arg(long)]
    pub kernel: Option<String>,
    /// smoothed_product or pointwise_product.
    #[arg(long)]
    pub method: Option<String>,
    /// Evaluation times, `lo:hi[:step]` or `a,b,c`.
    #[arg(long)]
    pub grid: Option<String>,
    /// State-space closure `lo:hi` of the first coordinate.
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// CSV `t,f_hat[,f_true]`; `f_true` is the exact density and is present
/// for the linear-rate TCP model.
pub fn run_estimate(a: &EstimateArgs) -> Result<String> {
    let cfg = a.model.load_config()?;
    let model = a.model.model(cfg.as_ref())?;
    let set = Settings::new(cfg.as_ref(), "estimate");
    let seed = set.u64(a.seed, "seed")?;
    let x = set.f64(a.x, "x")?.ok_or_else(|| CliError::usage("--x is required"))?;
    let grid_text = set.string(a.grid.as_deref(), "grid")?.ok_or_else(|| CliError::usage("--grid is required"))?;
    let grid = parse_grid(&grid_text)?;
    let a_width = set.f64(a.a_width, "a_width")?.unwrap_or(0.2);
    let blocks = set.usize(a.blocks, "blocks")?.unwrap_or(8);
    let bandwidth = set.f64(a.bandwidth, "bandwidth")?;
    let shape = match set.string(a.kernel.as_deref(), "kernel")? {
        Some(k) => KernelShape::parse(&k).map_err(|e| CliError::usage(e.to_string()))?,
        None => KernelShape::default(),
    };
    let method = match set.string(a.method.as_deref(), "method")? {
        Some(m) => DensityMethod::parse(&m).map_err(|e| CliError::usage(e.to_string()))?,
        None => DensityMethod::default(),
    };
    let domain = match set.string(a.domain.as_deref(), "domain")? {
        Some(d) => parse_range(&d)?,
        None if a.chain.is_some() && a.model.model.is_none() => parse_range("-inf:inf")?,
        None => model.domain(),
    };

    let (chain, seed) = match &a.chain {
        Some(path) => (read_chain(path)?, seed),
        None => {
            let seed = seed.unwrap_or(0);
            let jumps = set.usize(a.jumps, "jumps")?.unwrap_or(200_000);
            let x0 = set.f64_list(a.x0.as_deref(), "x0")?.unwrap_or_else(|| vec![1.0; model.space_dim()]);
            let start = model.start_state(&x0, 0)?;
            let tr = model.chars.simulate_jumps(&start, jumps, &mut path_stream(seed, 0))?;
            (embedded_chain(&tr), Some(seed))
        }
    };
    let with_truth = model.kind == ModelKind::Tcp && (a.chain.is_none() || a.model.model == Some(ModelKind::Tcp));

    let partition = build_partition(&chain, x, a_width, blocks, domain)?;
    let f = estimate_density(&chain, x, &partition, &grid, bandwidth, shape, method)?;

    let edges: Vec<String> = partition
        .blocks
        .iter()
        .map(|b| b.lo)
        .chain(partition.blocks.last().map(|b| b.hi))
        .map(num)
        .collect();
    let mut t = Table::new(seed);
    t.comment("x", num(x))
        .comment("A", format!("[{},{}]", num(partition.set_a.lo), num(partition.set_a.hi)))
        .comment("blocks", edges.join(" "))
        .comment("bandwidth", num(f.bandwidth))
        .comment("kernel", shape.name())
        .comment("method", method.name())
        .comment("n_used", f.n_used);
    let empty = f.zero_at_risk.iter().filter(|z| **z).count();
    if empty > 0 {
        t.comment("zero_at_risk_points", empty);
    }
    t.header(if with_truth { &["t", "f_hat", "f_true"][..] } else { &["t", "f_hat"][..] });
    for (&time, &v) in grid.iter().zip(&f.values) {
        let mut row = vec![num(time), num(v)];
        if with_truth {
            row.push(num(tcp_true_density(x, time)?));
        }
        t.line(row);
    }
    t.write_to(a.out.as_deref())?;
    Ok(format!("n_used={} bandwidth={}", f.n_used, num(f.bandwidth)))
}
