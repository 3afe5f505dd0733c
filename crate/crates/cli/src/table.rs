//! CSV output and input.
//!
//! Every output starts with `# seed=<seed> version=<crate version>`, may
//! carry further `# key=value` comment lines, then a header row. Floats are
//! written in shortest round-trip form.

use std::io::Write;
use std::path::Path;

use pdmp::chains::EmbeddedChain;

use crate::error::{CliError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A CSV document assembled in memory, then written in one go.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    text: String,
}

impl Table {
    pub fn new(seed: Option<u64>) -> Self {
        let seed = seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        Self {
            text: format!("# seed={seed} version={VERSION}\n"),
        }
    }

    pub fn comment(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.text.push_str(&format!("# {key}={value}\n"));
        self
    }

    /// Free-form `# text` line.
    pub fn note(&mut self, text: &str) -> &mut Self {
        self.text.push_str(&format!("# {text}\n"));
        self
    }

    pub fn header<S: AsRef<str>>(&mut self, cols: &[S]) -> &mut Self {
        self.line(cols.iter().map(|c| c.as_ref().to_string()))
    }

    pub fn line(&mut self, fields: impl IntoIterator<Item = String>) -> &mut Self {
        let fields: Vec<String> = fields.into_iter().collect();
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
        self
    }

    /// Pre-rendered rows (each already newline-terminated).
    pub fn raw(&mut self, rows: &str) -> &mut Self {
        self.text.push_str(rows);
        self
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    /// Writes to `path`, or to stdout when `path` is `None`.
    pub fn write_to(&self, path: Option<&Path>) -> Result<()> {
        match path {
            Some(p) => std::fs::write(p, &self.text).map_err(|source| CliError::Io {
                path: p.display().to_string(),
                source,
            }),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(self.text.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|source| CliError::Io {
                        path: "<stdout>".to_string(),
                        source,
                    })
            }
        }
    }
}

/// Shortest round-trip form, in exponent notation outside `[1e-5, 1e16)`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-5..1e16).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| CliError::Csv {
            path: path.display().to_string(),
            source,
        })
}

fn records(path: &Path) -> Result<Vec<csv::StringRecord>> {
    reader(path)?
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|source| CliError::Csv {
            path: path.display().to_string(),
            source,
        })
}

fn field(path: &Path, row: usize, rec: &csv::StringRecord, col: usize) -> Result<f64> {
    let raw = rec.get(col).unwrap_or("");
    raw.parse::<f64>()
        .map_err(|_| CliError::data(format!("{}: row {row}: '{raw}' is not a number", path.display())))
}

/// First column of a CSV of numbers; a non-numeric first row is a header.
pub fn read_samples(path: &Path) -> Result<Vec<f64>> {
    let recs = records(path)?;
    let skip = match recs.first() {
        Some(r) if r.get(0).is_some_and(|f| f.parse::<f64>().is_err()) => 1,
        _ => 0,
    };
    let out = recs[skip..]
        .iter()
        .enumerate()
        .map(|(i, r)| field(path, i + skip + 1, r, 0))
        .collect::<Result<Vec<_>>>()?;
    if out.is_empty() {
        return Err(CliError::data(format!("{}: no samples", path.display())));
    }
    Ok(out)
}

/// Embedded-chain CSV `n,Z…,S` (as written by `pdmp chain`): every column
/// between `n` and `S` is a state coordinate.
pub fn read_chain(path: &Path) -> Result<EmbeddedChain> {
    let recs = records(path)?;
    let header = recs
        .first()
        .ok_or_else(|| CliError::data(format!("{}: empty chain file", path.display())))?;
    let cols: Vec<&str> = header.iter().collect();
    let s_col = cols.iter().position(|c| *c == "S");
    if cols.first() != Some(&"n") || s_col.is_none_or(|s| s < 2) {
        return Err(CliError::data(format!("{}: expected header n,Z…,S", path.display())));
    }
    let s_col = s_col.unwrap_or_default();
    let mut entries = Vec::with_capacity(recs.len() - 1);
    for (i, r) in recs[1..].iter().enumerate() {
        let z = (1..s_col).map(|c| field(path, i + 2, r, c)).collect::<Result<Vec<_>>>()?;
        entries.push((z, field(path, i + 2, r, s_col)?));
    }
    if entries.is_empty() {
        return Err(CliError::data(format!("{}: chain has no entries", path.display())));
    }
    Ok(EmbeddedChain { entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_rows() {
        let mut t = Table::new(Some(7));
        t.comment("x", 0.5).header(&["a", "b"]).line([num(1.0), num(0.25)]);
        assert_eq!(t.as_str(), format!("# seed=7 version={VERSION}\n# x=0.5\na,b\n1,0.25\n"));
        assert!(Table::new(None).as_str().starts_with("# seed=none "));
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5e-7, 3e20] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(2.5e-8), "2.5e-8");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(f64::NAN), "NaN");
    }

    #[test]
    fn samples_with_and_without_header() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        std::fs::write(&a, "# seed=1\nx,y\n1.5,9\n2,9\n").unwrap();
        assert_eq!(read_samples(&a).unwrap(), vec![1.5, 2.0]);
        let b = dir.path().join("b.csv");
        std::fs::write(&b, "3\n4\n").unwrap();
        assert_eq!(read_samples(&b).unwrap(), vec![3.0, 4.0]);
        let c = dir.path().join("c.csv");
        std::fs::write(&c, "x\n1\nbad\n").unwrap();
        assert_eq!(read_samples(&c).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn chain_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("chain.csv");
        std::fs::write(&p, "# seed=3 version=0\nn,Z,S\n0,1,0\n1,0.75,0.5\n2,0.5,0.25\n").unwrap();
        let c = read_chain(&p).unwrap();
        assert_eq!(c.entries, vec![(vec![1.0], 0.0), (vec![0.75], 0.5), (vec![0.5], 0.25)]);
        std::fs::write(&p, "n,S\n0,1\n").unwrap();
        assert!(read_chain(&p).is_err());
        let missing = dir.path().join("nope.csv");
        assert_eq!(read_chain(&missing).unwrap_err().exit_code(), 2);
    }
}
