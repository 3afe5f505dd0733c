use std::path::PathBuf;

use clap::Args;
use pdmp::chains::{check_markov_kernel, kernel_h_mass, kernel_j_mass};
use pdmp::IntervalSet;

use super::ModelArgs;
use crate::config::Settings;
use crate::error::Result;
use crate::grid::{parse_grid, parse_range};
use crate::parallel::par_map;
use crate::table::{num, Table};

#[derive(Debug, Clone, Args)]
pub struct KernelsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Starting points, `lo:hi[:step]` or `a,b,c` (default 0:5:0.5).
    #[arg(long)]
    pub xs: Option<String>,
    /// Target set `lo:hi` for the masses (default: the whole line).
    #[arg(long, allow_hyphen_values = true)]
    pub set: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// CSV `x,H_mass,J_mass,deviation`; `deviation` is `|H(x, E) + J(x, E) − 1|`.
pub fn run_kernels(a: &KernelsArgs) -> Result<String> {
    let cfg = a.model.load_config()?;
    let model = a.model.model(cfg.as_ref())?;
    let set = Settings::new(cfg.as_ref(), "kernels");
    let xs = parse_grid(&set.string(a.xs.as_deref(), "xs")?.unwrap_or_else(|| "0:5:0.5".into()))?;
    let target = match set.string(a.set.as_deref(), "set")? {
        Some(s) => {
            let r = parse_range(&s)?;
            IntervalSet::single(r.lo, r.hi)
        }
        None => IntervalSet::full(),
    };
    let rows = par_map(xs.len(), |i| {
        let x = [xs[i]];
        let h = kernel_h_mass(&model.chars, &x, &target)?;
        let j = kernel_j_mass(&model.chars, &x, &target)?;
        let dev = check_markov_kernel(&model.chars, &x)?;
        Ok([xs[i], h, j, dev])
    })?;
    let worst = rows.iter().map(|r| r[3]).fold(0.0, f64::max);
    let mut t = Table::new(None);
    t.comment("model", model.name());
    if let Some(s) = &a.set {
        t.comment("set", s);
    }
    t.header(&["x", "H_mass", "J_mass", "deviation"]);
    for r in rows {
        t.line(r.map(num));
    }
    t.write_to(a.out.as_deref())?;
    Ok(format!("points={} max_deviation={}", xs.len(), num(worst)))
}
