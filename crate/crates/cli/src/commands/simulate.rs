use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use pdmp::engine::path_stream;

use super::ModelArgs;
use crate::config::Settings;
use crate::error::{CliError, Result};
use crate::parallel::par_map;
use crate::table::{num, Table};

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Start state, comma-separated for several coordinates (default 0).
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    /// Starting mode of the switching model.
    #[arg(long)]
    pub mode: Option<usize>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Trajectory CSV: `path_id,event_index,time,kind,coord_0,…` (plus `mode`
/// for the switching model). Path `i` uses stream `(seed, i)`.
pub fn run_simulate(a: &SimulateArgs) -> Result<String> {
    let start = Instant::now();
    let cfg = a.model.load_config()?;
    let model = a.model.model(cfg.as_ref())?;
    let set = Settings::new(cfg.as_ref(), "simulate");
    let d = model.space_dim();
    let x0 = set.f64_list(a.x0.as_deref(), "x0")?.unwrap_or_else(|| vec![0.0; d]);
    let mode = set.usize(a.mode, "mode")?.unwrap_or(0);
    let horizon = set.f64(a.horizon, "horizon")?.unwrap_or(10.0);
    let paths = set.usize(a.paths, "paths")?.unwrap_or(1);
    let seed = set.u64(a.seed, "seed")?.unwrap_or(0);
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(CliError::usage("--horizon must be positive and finite"));
    }
    if paths == 0 {
        return Err(CliError::usage("--paths must be at least 1"));
    }
    let x = model.start_state(&x0, mode)?;
    let switching = model.switching.is_some();

    let blocks = par_map(paths, |i| {
        let mut stream = path_stream(seed, i);
        let tr = model.chars.simulate(&x, horizon, &mut stream)?;
        let mut rows = String::new();
        for (k, (t, kind, z)) in tr.events().into_iter().enumerate() {
            let _ = write!(rows, "{i},{k},{},{}", num(t), kind.as_str());
            for v in &z[..d] {
                let _ = write!(rows, ",{}", num(*v));
            }
            if switching {
                let _ = write!(rows, ",{}", z[d] as usize);
            }
            rows.push('\n');
        }
        Ok((rows, tr.n_jumps()))
    })?;

    let mut header: Vec<String> = ["path_id", "event_index", "time", "kind"].map(String::from).to_vec();
    header.extend((0..d).map(|j| format!("coord_{j}")));
    if switching {
        header.push("mode".into());
    }
    let mut t = Table::new(Some(seed));
    t.comment("model", model.name())
        .comment("x0", x0.iter().map(|v| num(*v)).collect::<Vec<_>>().join(" "))
        .comment("horizon", num(horizon))
        .header(&header);
    let mut total = 0;
    for (rows, jumps) in &blocks {
        t.raw(rows);
        total += jumps;
    }
    t.write_to(a.out.as_deref())?;
    Ok(format!(
        "paths={paths} total_jumps={total} wall_time={:.3}s",
        start.elapsed().as_secs_f64()
    ))
}
