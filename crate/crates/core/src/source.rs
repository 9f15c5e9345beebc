//! Textual descriptions of partitions and measures: spec strings and table files.
//!
//! Spec strings:
//! - partitions: `gauss`, `powerlaw:<alpha>`, `table:<path>`
//! - measures: `geometric:<q>`, `logsquare`, `zeta:<beta>`, `table:<path>`,
//!   `markov1:<eps>:<base measure>`
//!
//! Table files hold one `n,value` pair per line for `n = 1, 2, …` in order.
//! Blank lines and `#` comments are ignored. An optional last line
//! `tail=<rule>` continues the table analytically; measure tables require it.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::digit::DEFAULT_N_TABLE;
use crate::measures::DigitMeasure;
use crate::partition::PartitionSpec;
use crate::sequence::TailRule;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum PartitionSource {
    Gauss,
    PowerLaw { alpha: f64 },
    Table { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeasureSource {
    Geometric { q: f64 },
    LogSquare,
    Zeta { beta: f64 },
    Table { path: PathBuf },
    Markov1 { eps: f64, base: Box<MeasureSource> },
}

/// Parsed table file: `values[i]` belongs to index `i + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct TableFile {
    pub values: Vec<f64>,
    pub tail: Option<TailRule>,
}

fn spec_error(text: &str, why: impl fmt::Display) -> Error {
    Error::InvalidSpec(format!("`{text}`: {why}"))
}

fn parse_param(text: &str, raw: &str, name: &str) -> Result<f64> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| spec_error(text, format!("{name} `{raw}` is not a number")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(spec_error(text, format!("{name} must be finite")))
    }
}

fn parse_path(text: &str, raw: &str) -> Result<PathBuf> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Err(spec_error(text, "table path is empty"));
    }
    Ok(PathBuf::from(raw))
}

impl FromStr for PartitionSource {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let t = text.trim();
        let (head, rest) = match t.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (t, None),
        };
        match (head, rest) {
            ("gauss", None) => Ok(PartitionSource::Gauss),
            ("powerlaw", Some(a)) => Ok(PartitionSource::PowerLaw {
                alpha: parse_param(text, a, "alpha")?,
            }),
            ("table", Some(p)) => Ok(PartitionSource::Table {
                path: parse_path(text, p)?,
            }),
            _ => Err(spec_error(text, "expected gauss, powerlaw:<alpha> or table:<path>")),
        }
    }
}

impl fmt::Display for PartitionSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionSource::Gauss => write!(f, "gauss"),
            PartitionSource::PowerLaw { alpha } => write!(f, "powerlaw:{alpha}"),
            PartitionSource::Table { path } => write!(f, "table:{}", path.display()),
        }
    }
}

impl FromStr for MeasureSource {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let t = text.trim();
        let (head, rest) = match t.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (t, None),
        };
        match (head, rest) {
            ("logsquare", None) => Ok(MeasureSource::LogSquare),
            ("geometric", Some(q)) => Ok(MeasureSource::Geometric {
                q: parse_param(text, q, "q")?,
            }),
            ("zeta", Some(b)) => Ok(MeasureSource::Zeta {
                beta: parse_param(text, b, "beta")?,
            }),
            ("table", Some(p)) => Ok(MeasureSource::Table {
                path: parse_path(text, p)?,
            }),
            ("markov1", Some(r)) => {
                let (eps, base) = r
                    .split_once(':')
                    .ok_or_else(|| spec_error(text, "expected markov1:<eps>:<base measure>"))?;
                let base: MeasureSource = base.parse()?;
                if matches!(base, MeasureSource::Markov1 { .. }) {
                    return Err(spec_error(text, "markov1 base must be a Bernoulli law"));
                }
                Ok(MeasureSource::Markov1 {
                    eps: parse_param(text, eps, "eps")?,
                    base: Box::new(base),
                })
            }
            _ => Err(spec_error(
                text,
                "expected geometric:<q>, logsquare, zeta:<beta>, table:<path> or markov1:<eps>:<base>",
            )),
        }
    }
}

impl fmt::Display for MeasureSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureSource::Geometric { q } => write!(f, "geometric:{q}"),
            MeasureSource::LogSquare => write!(f, "logsquare"),
            MeasureSource::Zeta { beta } => write!(f, "zeta:{beta}"),
            MeasureSource::Table { path } => write!(f, "table:{}", path.display()),
            MeasureSource::Markov1 { eps, base } => write!(f, "markov1:{eps}:{base}"),
        }
    }
}

/// Parses a table file body; errors carry 1-based line numbers.
pub fn parse_table(text: &str) -> Result<TableFile> {
    let mut values = Vec::new();
    let mut tail = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if tail.is_some() {
            return Err(Error::parse(line_no, "content after the tail= footer"));
        }
        if let Some(rule) = line.strip_prefix("tail=") {
            let rule = rule
                .trim()
                .parse()
                .map_err(|e: Error| Error::parse(line_no, e.to_string()))?;
            tail = Some(rule);
            continue;
        }
        let (n, v) = line
            .split_once(',')
            .ok_or_else(|| Error::parse(line_no, "expected `n,value`"))?;
        let n: u64 = n
            .trim()
            .parse()
            .map_err(|_| Error::parse(line_no, format!("index `{}` is not a positive integer", n.trim())))?;
        if n != values.len() as u64 + 1 {
            return Err(Error::parse(
                line_no,
                format!("index {n} out of order, expected {}", values.len() + 1),
            ));
        }
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::parse(line_no, format!("value `{}` is not a number", v.trim())))?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::parse(line_no, format!("value {v} must be positive and finite")));
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::parse(text.lines().count().max(1), "table has no entries"));
    }
    Ok(TableFile { values, tail })
}

fn read_table(path: &Path, base_dir: &Path) -> Result<(PathBuf, TableFile)> {
    let full = base_dir.join(path);
    let text =
        fs::read_to_string(&full).map_err(|e| Error::InvalidSpec(format!("cannot read {}: {e}", full.display())))?;
    let table = parse_table(&text).map_err(|e| match e {
        Error::Parse { line, message } => Error::InvalidSpec(format!("{}:{line}: {message}", full.display())),
        other => other,
    })?;
    Ok((full, table))
}

fn table_n(len: usize) -> u64 {
    DEFAULT_N_TABLE.max(len as u64)
}

impl PartitionSource {
    /// Builds the partition; relative table paths resolve against `base_dir`.
    pub fn load(&self, base_dir: &Path) -> Result<PartitionSpec> {
        match self {
            PartitionSource::Gauss => Ok(PartitionSpec::gauss()),
            PartitionSource::PowerLaw { alpha } => PartitionSpec::power_law(*alpha),
            PartitionSource::Table { path } => {
                let (_, t) = read_table(path, base_dir)?;
                PartitionSpec::from_table(&t.values, t.tail, table_n(t.values.len()))
            }
        }
    }
}

impl MeasureSource {
    /// Builds the measure; relative table paths resolve against `base_dir`.
    pub fn load(&self, base_dir: &Path) -> Result<DigitMeasure> {
        match self {
            MeasureSource::Geometric { q } => DigitMeasure::geometric(*q),
            MeasureSource::LogSquare => Ok(DigitMeasure::log_square()),
            MeasureSource::Zeta { beta } => DigitMeasure::zeta(*beta),
            MeasureSource::Table { path } => {
                let (full, t) = read_table(path, base_dir)?;
                let tail = t.tail.ok_or_else(|| {
                    Error::InvalidSpec(format!("{}: measure tables need a tail=<rule> footer", full.display()))
                })?;
                DigitMeasure::from_table(&t.values, tail, table_n(t.values.len()))
            }
            MeasureSource::Markov1 { eps, base } => DigitMeasure::markov1(*eps, base.load(base_dir)?),
        }
    }
}
