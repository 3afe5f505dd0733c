use std::path::PathBuf;

use clap::{Args, ValueEnum};
use pdmp::coupling::{
    composite_tv_path, empirical_wasserstein, fit_rate_window, not_coalesced_fractions, pair_on_grid,
    pathwise_moment, CompositeConfig, Estimate, RateFit,
};
use pdmp::models::tv_lower_bound;
use pdmp::RandomStream;

use crate::config::{Config, Settings};
use crate::error::{CliError, Result};
use crate::grid::parse_grid;
use crate::parallel::par_map;
use crate::table::{num, read_samples, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    /// `E|X_t − Y_t|` under the dynamical coupling.
    W1,
    /// `E|X_t − Y_t|^{1/2}` under the dynamical coupling.
    #[value(name = "w_half")]
    WHalf,
    /// Non-coalescence fraction under the composite coupling.
    #[value(name = "tv_upper")]
    TvUpper,
}

impl Metric {
    fn name(self) -> &'static str {
        match self {
            Metric::W1 => "w1",
            Metric::WHalf => "w_half",
            Metric::TvUpper => "tv_upper",
        }
    }

    fn power(self) -> f64 {
        match self {
            Metric::WHalf => 0.5,
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DistanceArgs {
    #[arg(long, value_enum)]
    pub metric: Option<Metric>,
    /// Starting points of the two TCP paths.
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub y: Option<f64>,
    /// Times, `lo:hi[:step]` or `a,b,c`.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Gap threshold of the composite coupling (tv_upper).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Compare two sample files by order statistics instead of simulating.
    #[arg(long, requires = "b_samples")]
    pub a_samples: Option<PathBuf>,
    #[arg(long, requires = "a_samples")]
    pub b_samples: Option<PathBuf>,
    /// Fit window for the exponential rate (default: every grid point with a
    /// positive estimate).
    #[arg(long)]
    pub fit_min: Option<f64>,
    #[arg(long)]
    pub fit_max: Option<f64>,
    /// Also write the fit as CSV `rate,intercept,t_min,t_max,residual_rms`.
    #[arg(long)]
    pub fit_out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_distance(a: &DistanceArgs) -> Result<String> {
    let cfg = a.config.as_deref().map(Config::load).transpose()?;
    let set = Settings::new(cfg.as_ref(), "distance");
    let metric = match (a.metric, set.string(None, "metric")?) {
        (Some(m), _) => m,
        (None, Some(s)) => {
            Metric::from_str(&s, false).map_err(|_| CliError::data(format!("unknown metric '{s}'")))?
        }
        (None, None) => return Err(CliError::usage("--metric is required")),
    };
    if let (Some(fa), Some(fb)) = (&a.a_samples, &a.b_samples) {
        return samples_distance(metric, &read_samples(fa)?, &read_samples(fb)?, a.out.as_deref());
    }

    let x = set.f64(a.x, "x")?.ok_or_else(|| CliError::usage("--x is required"))?;
    let y = set.f64(a.y, "y")?.ok_or_else(|| CliError::usage("--y is required"))?;
    let grid_text = set.string(a.grid.as_deref(), "grid")?.ok_or_else(|| CliError::usage("--grid is required"))?;
    let grid = parse_grid(&grid_text)?;
    let pairs = set.usize(a.pairs, "pairs")?.unwrap_or(10_000);
    let seed = set.u64(a.seed, "seed")?.unwrap_or(0);
    if pairs == 0 {
        return Err(CliError::usage("--pairs must be at least 1"));
    }
    if grid[0] < 0.0 {
        return Err(CliError::usage("grid times must be non-negative"));
    }

    let mut t = Table::new(Some(seed));
    t.comment("metric", metric.name()).comment("x", num(x)).comment("y", num(y)).comment("pairs", pairs);
    let estimates = match metric {
        Metric::TvUpper => {
            let composite = match set.f64(a.epsilon, "epsilon")? {
                Some(e) => CompositeConfig::with_epsilon(e),
                None => CompositeConfig::default(),
            };
            t.comment("epsilon", num(composite.epsilon)).comment("t1", num(composite.phase_one()));
            tv_upper(x, y, &grid, pairs, seed, &composite)?
        }
        _ => coupling_moment(x, y, &grid, pairs, seed, metric.power())?,
    };

    let mut header = vec!["t", "estimate", "stderr", "n"];
    if metric == Metric::TvUpper {
        header.push("lower_bound");
    }
    t.header(&header);
    for (&time, e) in grid.iter().zip(&estimates) {
        let mut row = vec![num(time), num(e.value), num(e.stderr), e.n.to_string()];
        if metric == Metric::TvUpper {
            row.push(num(tv_lower_bound(x, y, time)?));
        }
        t.line(row);
    }

    let fit_min = set.f64(a.fit_min, "fit_min")?;
    let fit_max = set.f64(a.fit_max, "fit_max")?;
    // without an explicit window, fit the points with a positive estimate
    let (times, values): (Vec<f64>, Vec<f64>) = grid
        .iter()
        .zip(&estimates)
        .filter(|(_, e)| fit_min.is_some() || fit_max.is_some() || e.value > 0.0)
        .map(|(&t, e)| (t, e.value))
        .unzip();
    let t_min = fit_min.unwrap_or(grid[0]);
    let t_max = fit_max.unwrap_or(grid[grid.len() - 1]);
    let summary = match fit_rate_window(&times, &values, t_min, t_max) {
        Ok(fit) => {
            t.note(&format!("fit {}", fit_line(&fit)));
            if let Some(p) = &a.fit_out {
                let mut f = Table::new(Some(seed));
                f.comment("metric", metric.name()).header(&["rate", "intercept", "t_min", "t_max", "residual_rms"]);
                f.line([fit.rate, fit.intercept, fit.window.0, fit.window.1, fit.residual_rms].map(num));
                f.write_to(Some(p))?;
            }
            format!("fit {}", fit_line(&fit))
        }
        Err(e) => {
            t.note(&format!("fit unavailable: {e}"));
            format!("fit unavailable: {e}")
        }
    };
    t.write_to(a.out.as_deref())?;
    Ok(summary)
}

fn fit_line(f: &RateFit) -> String {
    format!(
        "rate={} intercept={} t_min={} t_max={} residual_rms={}",
        num(f.rate),
        num(f.intercept),
        num(f.window.0),
        num(f.window.1),
        num(f.residual_rms)
    )
}

/// Pair `i` uses stream `(seed, i)`, the same convention as the core's
/// `tv_upper_curve`.
fn tv_upper(x: f64, y: f64, grid: &[f64], pairs: usize, seed: u64, cfg: &CompositeConfig) -> Result<Vec<Estimate>> {
    let horizon = grid[grid.len() - 1];
    let times = par_map(pairs, |i| {
        let mut s = RandomStream::new(seed, i as u64);
        Ok(composite_tv_path(x, y, horizon, cfg, &mut s)?.coalesced_at)
    })?;
    Ok(not_coalesced_fractions(&times, grid))
}

fn coupling_moment(x: f64, y: f64, grid: &[f64], pairs: usize, seed: u64, p: f64) -> Result<Vec<Estimate>> {
    let paths = par_map(pairs, |i| {
        let mut s = RandomStream::new(seed, i as u64);
        Ok(pair_on_grid(x, y, grid, &mut s)?)
    })?;
    Ok((0..grid.len())
        .map(|k| {
            let at: Vec<(f64, f64)> = paths.iter().map(|p| p[k]).collect();
            pathwise_moment(&at, p)
        })
        .collect())
}

fn samples_distance(metric: Metric, a: &[f64], b: &[f64], out: Option<&std::path::Path>) -> Result<String> {
    if metric == Metric::TvUpper {
        return Err(CliError::usage("tv_upper needs simulated pairs, not sample files"));
    }
    if a.len() != b.len() {
        return Err(CliError::data(format!("sample files differ in size ({} vs {})", a.len(), b.len())));
    }
    let w = empirical_wasserstein(a, b, metric.power())?;
    let mut t = Table::new(None);
    t.comment("metric", metric.name())
        .comment("source", "samples")
        .header(&["t", "estimate", "stderr", "n"])
        .line([String::new(), num(w), num(f64::NAN), a.len().to_string()]);
    t.write_to(out)?;
    Ok(format!("{}={}", metric.name(), num(w)))
}
