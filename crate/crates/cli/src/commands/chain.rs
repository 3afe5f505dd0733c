use std::path::PathBuf;

use clap::{Args, ValueEnum};
use pdmp::chains::{embedded_chain, observation_chain};
use pdmp::engine::path_stream;

use super::ModelArgs;
use crate::config::Settings;
use crate::error::{CliError, Result};
use crate::model::Model;
use crate::table::{num, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ChainKind {
    /// Post-jump states and holding times.
    Embedded,
    /// Jump states merged with states at unit-rate Poisson clock points.
    Observation,
}

#[derive(Debug, Clone, Args)]
pub struct ChainArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value = "embedded")]
    pub kind: ChainKind,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    #[arg(long)]
    pub mode: Option<usize>,
    /// Number of jumps to simulate.
    #[arg(long)]
    pub jumps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub(crate) fn state_columns(model: &Model) -> Vec<String> {
    let d = model.space_dim();
    let mut cols: Vec<String> = if d == 1 {
        vec!["Z".into()]
    } else {
        (0..d).map(|j| format!("Z_{j}")).collect()
    };
    if model.switching.is_some() {
        cols.push("mode".into());
    }
    cols
}

/// Embedded chain as `n,Z,S`; observation chain as `n,Z,S,origin` with `S`
/// the time since the previous entry. Uses stream `(seed, 0)` for the path
/// and `(seed, 1)` for the observation clock.
pub fn run_chain(a: &ChainArgs) -> Result<String> {
    let cfg = a.model.load_config()?;
    let model = a.model.model(cfg.as_ref())?;
    let set = Settings::new(cfg.as_ref(), "chain");
    let x0 = set.f64_list(a.x0.as_deref(), "x0")?.unwrap_or_else(|| vec![1.0; model.space_dim()]);
    let mode = set.usize(a.mode, "mode")?.unwrap_or(0);
    let jumps = set.usize(a.jumps, "jumps")?.unwrap_or(1000);
    let seed = set.u64(a.seed, "seed")?.unwrap_or(0);
    if jumps == 0 {
        return Err(CliError::usage("--jumps must be at least 1"));
    }
    let x = model.start_state(&x0, mode)?;
    let tr = model.chars.simulate_jumps(&x, jumps, &mut path_stream(seed, 0))?;

    let mut header = vec!["n".to_string()];
    header.extend(state_columns(&model));
    header.push("S".into());
    let mut t = Table::new(Some(seed));
    t.comment("model", model.name()).comment("kind", format!("{:?}", a.kind).to_lowercase());
    let rows = match a.kind {
        ChainKind::Embedded => {
            let chain = embedded_chain(&tr);
            t.header(&header);
            for (n, (z, s)) in chain.entries.iter().enumerate() {
                t.line(std::iter::once(n.to_string()).chain(z.iter().map(|v| num(*v))).chain([num(*s)]));
            }
            chain.len()
        }
        ChainKind::Observation => {
            let chain = observation_chain(&tr, &mut path_stream(seed, 1))?;
            header.push("origin".into());
            t.header(&header);
            let mut prev = 0.0;
            for (n, (z, time, origin)) in chain.entries.iter().enumerate() {
                let row = std::iter::once(n.to_string())
                    .chain(z.iter().map(|v| num(*v)))
                    .chain([num(time - prev), origin.as_str().to_string()]);
                t.line(row);
                prev = *time;
            }
            chain.len()
        }
    };
    t.write_to(a.out.as_deref())?;
    Ok(format!("entries={rows} jumps={}", tr.n_jumps()))
}
