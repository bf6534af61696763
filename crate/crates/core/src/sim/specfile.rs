//! Sweep descriptions as `key = value` text, with the same keys and value
//! syntax as the `sweep` command-line flags:
//!
//! ```text
//! # Figure-style sweep
//! n = 16
//! model = comb:1..16
//! algo = bsa,hgbsa,dsa,hybrid
//! trials = 500
//! seed = 42
//! initial-screen = false
//! out = results/n16.csv
//! ```

use std::path::{Path, PathBuf};

use super::{Regime, SweepAlgorithm, SweepSpec};
use crate::algorithms::AlgorithmKind;
use crate::error::{Error, Result};

/// A parsed sweep file. Keys absent from the file are `None`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepFile {
    pub n: Option<usize>,
    pub model: Option<String>,
    pub algo: Option<String>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub initial_screen: Option<bool>,
    pub out: Option<PathBuf>,
    pub chart: Option<PathBuf>,
}

fn value<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::param(format!("{key}: cannot parse {raw:?}")))
}

impl SweepFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut file = SweepFile::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, raw) = line
                .split_once('=')
                .ok_or_else(|| Error::param(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, raw) = (key.trim(), raw.trim());
            match key {
                "n" => file.n = Some(value(key, raw)?),
                "model" => file.model = Some(raw.to_string()),
                "algo" => file.algo = Some(raw.to_string()),
                "trials" => file.trials = Some(value(key, raw)?),
                "seed" => file.seed = Some(value(key, raw)?),
                "initial-screen" | "initial_screen" => file.initial_screen = Some(value(key, raw)?),
                "out" => file.out = Some(PathBuf::from(raw)),
                "chart" => file.chart = Some(PathBuf::from(raw)),
                other => {
                    return Err(Error::param(format!("line {}: unknown key {other:?}", lineno + 1)))
                }
            }
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Builds the spec, defaulting trials to 500, seed to 0, and algorithms
    /// to all four.
    pub fn to_spec(&self) -> Result<SweepSpec> {
        let n = self.n.ok_or_else(|| Error::param("n is required"))?;
        let model = self
            .model
            .as_deref()
            .ok_or_else(|| Error::param("model is required"))?;
        let kinds = match self.algo.as_deref() {
            None => AlgorithmKind::ALL.to_vec(),
            Some(list) => list
                .split(',')
                .map(str::parse)
                .collect::<Result<Vec<AlgorithmKind>>>()?,
        };
        let initial_screen = self.initial_screen.unwrap_or(false);
        Ok(SweepSpec {
            n,
            regime: parse_regime(model, n)?,
            trials: self.trials.unwrap_or(500),
            algorithms: kinds
                .into_iter()
                .map(|kind| SweepAlgorithm {
                    kind,
                    initial_screen,
                })
                .collect(),
            base_seed: self.seed.unwrap_or(0),
        })
    }
}

fn round_grid(v: f64) -> f64 {
    (v * 1e10).round() / 1e10
}

/// Parses `comb:LIST` or `prob:LIST`. List items are comma separated and
/// are single values, inclusive ranges `a..b`, or stepped ranges `a..b:step`.
/// `comb:all` is `1..n`.
pub fn parse_regime(text: &str, n: usize) -> Result<Regime> {
    let (tag, list) = text
        .split_once(':')
        .ok_or_else(|| Error::param(format!("model {text:?} must look like comb:K or prob:P")))?;
    match tag.trim() {
        "comb" => {
            if list.trim() == "all" {
                return Ok(Regime::Combinatorial((1..=n).collect()));
            }
            let mut ks = Vec::new();
            for item in list.split(',') {
                let item = item.trim();
                match item.split_once("..") {
                    None => ks.push(value("k", item)?),
                    Some((a, rest)) => {
                        let (b, step) = rest.split_once(':').unwrap_or((rest, "1"));
                        let (a, b, step): (usize, usize, usize) =
                            (value("k", a)?, value("k", b)?, value("step", step)?);
                        if step == 0 {
                            return Err(Error::param("range step must be positive"));
                        }
                        ks.extend((a..=b).step_by(step));
                    }
                }
            }
            Ok(Regime::Combinatorial(ks))
        }
        "prob" => {
            let mut ps = Vec::new();
            for item in list.split(',') {
                let item = item.trim();
                match item.split_once("..") {
                    None => ps.push(value("p", item)?),
                    Some((a, rest)) => {
                        let (b, step) = rest
                            .split_once(':')
                            .ok_or_else(|| Error::param("probability ranges need a step, e.g. 0..1:0.1"))?;
                        let (a, b, step): (f64, f64, f64) =
                            (value("p", a)?, value("p", b)?, value("step", step)?);
                        if step <= 0.0 || b < a {
                            return Err(Error::param(format!("bad probability range {item}")));
                        }
                        let count = ((b - a) / step + 1e-9).floor() as usize;
                        ps.extend((0..=count).map(|i| round_grid(a + i as f64 * step)));
                    }
                }
            }
            Ok(Regime::Probabilistic(ps))
        }
        other => Err(Error::param(format!("unknown model {other:?} (expected comb or prob)"))),
    }
}
