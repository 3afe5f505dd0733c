//! Model selection from flags and config files.

use std::sync::Arc;

use clap::ValueEnum;
use pdmp::models::{BoxSet, SwitchingModel, SwitchingRates, TcpModel, VectorField};
use pdmp::{Interval, LocalCharacteristics};

use crate::config::Config;
use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    /// TCP window size, jump rate x.
    Tcp,
    /// TCP window size, constant jump rate r.
    TcpConstant,
    /// Markov switching between affine vector fields (config only).
    Switching,
}

impl ModelKind {
    fn parse(s: &str) -> Result<Self> {
        <Self as ValueEnum>::from_str(s, true).map_err(|_| CliError::data(format!("unknown model variant '{s}'")))
    }
}

pub struct Model {
    pub kind: ModelKind,
    pub chars: LocalCharacteristics,
    pub switching: Option<Arc<SwitchingModel>>,
}

impl Model {
    /// `--model` wins over `[model] variant`; `--r` over `[model] r`.
    pub fn resolve(kind: Option<ModelKind>, r: Option<f64>, config: Option<&Config>) -> Result<Self> {
        let kind = match (kind, config) {
            (Some(k), _) => k,
            (None, Some(c)) => match c.string("model", "variant")? {
                Some(v) => ModelKind::parse(&v)?,
                None => ModelKind::Tcp,
            },
            (None, None) => ModelKind::Tcp,
        };
        match kind {
            ModelKind::Tcp => Ok(Self {
                kind,
                chars: TcpModel::LinearRate.characteristics()?,
                switching: None,
            }),
            ModelKind::TcpConstant => {
                let r = match (r, config) {
                    (Some(r), _) => Some(r),
                    (None, Some(c)) => c.f64("model", "r")?,
                    (None, None) => None,
                };
                let r = r.ok_or_else(|| CliError::usage("tcp-constant needs --r or [model] r"))?;
                Ok(Self {
                    kind,
                    chars: TcpModel::constant(r)?.characteristics()?,
                    switching: None,
                })
            }
            ModelKind::Switching => {
                let c = config.ok_or_else(|| CliError::usage("the switching model is defined by --config"))?;
                let model = Arc::new(switching_from_config(c)?);
                Ok(Self {
                    kind,
                    chars: model.characteristics(),
                    switching: Some(model),
                })
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ModelKind::Tcp => "tcp",
            ModelKind::TcpConstant => "tcp-constant",
            ModelKind::Switching => "switching",
        }
    }

    /// Continuous dimension (the switching mode is not counted).
    pub fn space_dim(&self) -> usize {
        match &self.switching {
            Some(m) => m.dim(),
            None => 1,
        }
    }

    /// Closure of the first coordinate's range.
    pub fn domain(&self) -> Interval {
        match &self.switching {
            Some(m) => Interval::new(m.compact().lo[0], m.compact().hi[0]),
            None => Interval::new(0.0, f64::INFINITY),
        }
    }

    /// Full engine state from a continuous start and a mode.
    pub fn start_state(&self, x0: &[f64], mode: usize) -> Result<Vec<f64>> {
        let d = self.space_dim();
        if x0.len() != d {
            return Err(CliError::usage(format!("--x0 needs {d} value(s), got {}", x0.len())));
        }
        match &self.switching {
            Some(m) => {
                if mode >= m.n_modes() {
                    return Err(CliError::usage(format!("--mode must be below {}", m.n_modes())));
                }
                let mut x = x0.to_vec();
                x.push(mode as f64);
                Ok(x)
            }
            None => Ok(x0.to_vec()),
        }
    }
}

/// Reads `[model]` (d, rates, optional rate_bound), `[field0]`, `[field1]`, …
/// (matrix row-major, offset) and `[compact]` (lo, hi).
pub fn switching_from_config(c: &Config) -> Result<SwitchingModel> {
    let missing = |what: &str| CliError::data(format!("switching config is missing {what}"));
    let d = c.usize("model", "d")?.ok_or_else(|| missing("[model] d"))?;
    let mut fields = Vec::new();
    while c.has_section(&format!("field{}", fields.len())) {
        let sec = format!("field{}", fields.len());
        let matrix = c.f64_list(&sec, "matrix")?.ok_or_else(|| missing(&format!("[{sec}] matrix")))?;
        let offset = match c.f64_list(&sec, "offset")? {
            Some(b) => b,
            None => vec![0.0; d],
        };
        fields.push(VectorField::affine(matrix, offset));
    }
    let n = fields.len();
    if n == 0 {
        return Err(missing("[field0]"));
    }
    if let Some(declared) = c.usize("model", "n")? {
        if declared != n {
            return Err(CliError::data(format!("[model] n = {declared} but {n} field sections found")));
        }
    }
    let rates = c.f64_list("model", "rates")?.ok_or_else(|| missing("[model] rates"))?;
    if rates.len() != n * n {
        return Err(CliError::data(format!("[model] rates needs {} entries", n * n)));
    }
    let row_max = rates.chunks(n).map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max);
    let bound = c.f64("model", "rate_bound")?.unwrap_or(row_max);
    let lo = c.f64_list("compact", "lo")?.ok_or_else(|| missing("[compact] lo"))?;
    let hi = c.f64_list("compact", "hi")?.ok_or_else(|| missing("[compact] hi"))?;
    Ok(SwitchingModel::new(d, fields, SwitchingRates::Constant(rates), bound, BoxSet::new(lo, hi))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_WELLS: &str = r#"
[model]
variant = "switching"
d = 1
rates = [0.0, 1.0, 1.0, 0.0]

[field0]
matrix = [-1.0]
offset = [1.0]

[field1]
matrix = [-1.0]
offset = [-1.0]

[compact]
lo = [-1.0]
hi = [1.0]
"#;

    #[test]
    fn default_is_tcp() {
        let m = Model::resolve(None, None, None).unwrap();
        assert_eq!(m.kind, ModelKind::Tcp);
        assert_eq!(m.chars.jump_rate(&[2.0]), 2.0);
        assert_eq!(m.start_state(&[0.5], 0).unwrap(), vec![0.5]);
    }

    #[test]
    fn constant_rate_needs_r() {
        assert_eq!(Model::resolve(Some(ModelKind::TcpConstant), None, None).err().unwrap().exit_code(), 1);
        let m = Model::resolve(Some(ModelKind::TcpConstant), Some(3.0), None).unwrap();
        assert_eq!(m.chars.jump_rate(&[10.0]), 3.0);
    }

    #[test]
    fn switching_from_text() {
        let c = Config::parse(TWO_WELLS, "two_wells").unwrap();
        let m = Model::resolve(None, None, Some(&c)).unwrap();
        assert_eq!(m.kind, ModelKind::Switching);
        assert_eq!(m.space_dim(), 1);
        assert_eq!(m.start_state(&[0.2], 1).unwrap(), vec![0.2, 1.0]);
        assert!(m.start_state(&[0.2], 2).is_err());
        assert_eq!(m.domain(), Interval::new(-1.0, 1.0));
        // flag overrides the config's variant
        let t = Model::resolve(Some(ModelKind::Tcp), None, Some(&c)).unwrap();
        assert_eq!(t.kind, ModelKind::Tcp);
    }

    #[test]
    fn broken_switching_configs() {
        let no_rates = TWO_WELLS.replace("rates = [0.0, 1.0, 1.0, 0.0]", "");
        let c = Config::parse(&no_rates, "x").unwrap();
        assert_eq!(switching_from_config(&c).err().unwrap().exit_code(), 2);
        let bad_n = TWO_WELLS.replace("d = 1", "d = 1\nn = 3");
        assert!(switching_from_config(&Config::parse(&bad_n, "x").unwrap()).is_err());
        let reducible = TWO_WELLS.replace("[0.0, 1.0, 1.0, 0.0]", "[0.0, 1.0, 0.0, 0.0]");
        assert!(switching_from_config(&Config::parse(&reducible, "x").unwrap()).is_err());
    }
}
