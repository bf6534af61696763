//! Seeded instance sweeps over the infection count or probability, with
//! per-point aggregation of tests and stages.
//!
//! Trial `t` of parameter point `j` draws its instance from
//! `trial_seed(base_seed, j, t)`, and every algorithm in the sweep sees that
//! same instance, so algorithm comparisons are paired.
//!
//! With the `parallel` feature (on by default) trials run on the rayon
//! pool. Results are gathered in trial order before any statistics are
//! taken, so both execution modes produce identical rows.

mod output;
mod specfile;

use std::fmt;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub use output::{csv_string, render_chart, write_csv, Metric, CSV_HEADER};
pub use specfile::{parse_regime, SweepFile};

use crate::algorithms::{run, AlgorithmConfig, AlgorithmKind, CountKnowledge};
use crate::error::{Error, Result};
use crate::instance::{InfectionInstance, Model};

/// Parameter values swept over.
#[derive(Debug, Clone, PartialEq)]
pub enum Regime {
    Combinatorial(Vec<usize>),
    Probabilistic(Vec<f64>),
}

impl Regime {
    pub fn tag(&self) -> &'static str {
        match self {
            Regime::Combinatorial(_) => "comb",
            Regime::Probabilistic(_) => "prob",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Regime::Combinatorial(ks) => ks.len(),
            Regime::Probabilistic(ps) => ps.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn model(&self, j: usize) -> Model {
        match self {
            Regime::Combinatorial(ks) => Model::Combinatorial { k: ks[j] },
            Regime::Probabilistic(ps) => Model::Probabilistic { p: ps[j] },
        }
    }
}

/// An algorithm entry of a sweep. HGBSA's count input is filled in per
/// point: the true `k` for combinatorial sweeps, `round(p n)` treated as an
/// estimate for probabilistic ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepAlgorithm {
    pub kind: AlgorithmKind,
    pub initial_screen: bool,
}

impl SweepAlgorithm {
    pub fn new(kind: AlgorithmKind) -> Self {
        Self {
            kind,
            initial_screen: false,
        }
    }

    pub fn config_for(&self, n: usize, model: Model) -> AlgorithmConfig {
        let (k_input, knowledge) = match model {
            Model::Combinatorial { k } => (k, CountKnowledge::Exact),
            Model::Probabilistic { p } => ((p * n as f64).round() as usize, CountKnowledge::Estimate),
        };
        AlgorithmConfig::new(self.kind.with_count(k_input, knowledge)).with_screen(self.initial_screen)
    }
}

impl fmt::Display for SweepAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.name())?;
        if self.initial_screen {
            f.write_str("+screen")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub n: usize,
    pub regime: Regime,
    pub trials: usize,
    pub algorithms: Vec<SweepAlgorithm>,
    pub base_seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::param("population size must be at least 1"));
        }
        if self.trials == 0 {
            return Err(Error::param("trials must be at least 1"));
        }
        if self.regime.is_empty() {
            return Err(Error::param("no parameter values to sweep"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::param("no algorithms to run"));
        }
        for j in 0..self.regime.len() {
            self.regime.model(j).validate(self.n)?;
        }
        for alg in &self.algorithms {
            alg.config_for(self.n, self.regime.model(0)).validate(self.n)?;
        }
        Ok(())
    }
}

/// Aggregated tests and stages for one (algorithm, parameter) point.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub algorithm: String,
    pub n: usize,
    pub regime: &'static str,
    pub param: f64,
    pub trials: usize,
    pub mean_tests: f64,
    pub std_tests: f64,
    pub mean_stages: f64,
    pub std_stages: f64,
    pub seed: u64,
}

/// Seed of trial `trial` at parameter index `point`: SplitMix64 finalizers
/// chained over the three inputs.
pub fn trial_seed(base_seed: u64, point: usize, trial: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(mix(base_seed) ^ point as u64) ^ trial as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        return Execution::Parallel;
        #[cfg(not(feature = "parallel"))]
        return Execution::Sequential;
    }
}

/// Per-trial `(tests, stages)` for every algorithm, in spec order.
type TrialOutcome = Vec<(usize, usize)>;

fn run_trial(spec: &SweepSpec, point: usize, trial: usize) -> Result<TrialOutcome> {
    let model = spec.regime.model(point);
    let seed = trial_seed(spec.base_seed, point, trial);
    let context = |alg: &SweepAlgorithm, source: Error| Error::Trial {
        algorithm: alg.to_string(),
        param: model.to_string(),
        seed,
        source: Box::new(source),
    };
    let instance = InfectionInstance::generate(model, spec.n, seed)
        .map_err(|e| context(&spec.algorithms[0], e))?;
    spec.algorithms
        .iter()
        .map(|alg| {
            let result = run(&instance, &alg.config_for(spec.n, model)).map_err(|e| context(alg, e))?;
            if !result.diagnosis.matches(&instance) {
                return Err(context(
                    alg,
                    Error::Protocol("diagnosis differs from the ground truth".into()),
                ));
            }
            Ok((result.ledger.tests_total(), result.ledger.stages_total()))
        })
        .collect()
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let count = values.clone().count();
    let mean = values.clone().sum::<f64>() / count as f64;
    if count < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (count - 1) as f64).sqrt())
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<AggregateRow>> {
    run_sweep_with(spec, Execution::default())
}

pub fn run_sweep_with(spec: &SweepSpec, execution: Execution) -> Result<Vec<AggregateRow>> {
    spec.validate()?;
    let jobs: Vec<(usize, usize)> = (0..spec.regime.len())
        .flat_map(|j| (0..spec.trials).map(move |t| (j, t)))
        .collect();
    let outcomes: Vec<TrialOutcome> = match execution {
        Execution::Sequential => jobs
            .iter()
            .map(|&(j, t)| run_trial(spec, j, t))
            .collect::<Result<_>>()?,
        #[cfg(feature = "parallel")]
        Execution::Parallel => jobs
            .par_iter()
            .map(|&(j, t)| run_trial(spec, j, t))
            .collect::<Result<_>>()?,
    };

    let mut rows = Vec::with_capacity(spec.algorithms.len() * spec.regime.len());
    for (a, alg) in spec.algorithms.iter().enumerate() {
        for j in 0..spec.regime.len() {
            let point = &outcomes[j * spec.trials..(j + 1) * spec.trials];
            let (mean_tests, std_tests) = mean_std(point.iter().map(|o| o[a].0 as f64));
            let (mean_stages, std_stages) = mean_std(point.iter().map(|o| o[a].1 as f64));
            let param = match &spec.regime {
                Regime::Combinatorial(ks) => ks[j] as f64,
                Regime::Probabilistic(ps) => ps[j],
            };
            rows.push(AggregateRow {
                algorithm: alg.to_string(),
                n: spec.n,
                regime: spec.regime.tag(),
                param,
                trials: spec.trials,
                mean_tests,
                std_tests,
                mean_stages,
                std_stages,
                seed: spec.base_seed,
            });
        }
    }
    rows.sort_by(|x, y| {
        x.algorithm
            .cmp(&y.algorithm)
            .then(x.param.total_cmp(&y.param))
    });
    Ok(rows)
}
