//! Zero-error adaptive strategies, all driven one stage at a time.
//!
//! An [`Adaptive`] strategy proposes a whole stage of pools and only sees
//! their outcomes once the stage has been answered, so no pool can depend on
//! another outcome from the same stage.

mod bsa;
mod dsa;
mod hgbsa;
mod hybrid;
mod splitting;

use std::fmt;

pub use bsa::Bsa;
pub use dsa::Dsa;
pub use hgbsa::Hgbsa;
pub use hybrid::Hybrid;

use crate::error::{Error, Result};
use crate::instance::InfectionInstance;
use crate::ledger::{Diagnosis, Oracle, Pool, Resolution, SimulatedOracle, Status, TestLedger};
use crate::tree::tree_depth;

pub trait Adaptive {
    /// Pools for the next stage, or `None` once every individual is resolved.
    fn next_stage(&mut self) -> Result<Option<Vec<Pool>>>;

    /// Outcomes for the stage last returned by [`Adaptive::next_stage`], in order.
    fn observe(&mut self, outcomes: &[bool]) -> Result<()>;

    fn diagnosis(&self) -> Result<Diagnosis>;
}

/// Whether HGBSA may trust its count input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountKnowledge {
    /// The input equals the true count: once it is used up the rest is
    /// declared healthy without testing.
    Exact,
    /// The input is a guess: leftovers are tested as a group and split
    /// further if positive.
    Estimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Bsa,
    Hgbsa { k_input: usize, knowledge: CountKnowledge },
    Dsa,
    Hybrid,
}

impl Algorithm {
    pub fn kind(&self) -> AlgorithmKind {
        match self {
            Algorithm::Bsa => AlgorithmKind::Bsa,
            Algorithm::Hgbsa { .. } => AlgorithmKind::Hgbsa,
            Algorithm::Dsa => AlgorithmKind::Dsa,
            Algorithm::Hybrid => AlgorithmKind::Hybrid,
        }
    }

    pub fn name(&self) -> &'static str {
        self.kind().name()
    }
}

/// Algorithm family without per-run parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlgorithmKind {
    Bsa,
    Hgbsa,
    Dsa,
    Hybrid,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 4] = [
        AlgorithmKind::Bsa,
        AlgorithmKind::Hgbsa,
        AlgorithmKind::Dsa,
        AlgorithmKind::Hybrid,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmKind::Bsa => "bsa",
            AlgorithmKind::Hgbsa => "hgbsa",
            AlgorithmKind::Dsa => "dsa",
            AlgorithmKind::Hybrid => "hybrid",
        }
    }

    /// Full algorithm; `k_input` and `knowledge` only matter for HGBSA.
    pub fn with_count(self, k_input: usize, knowledge: CountKnowledge) -> Algorithm {
        match self {
            AlgorithmKind::Bsa => Algorithm::Bsa,
            AlgorithmKind::Hgbsa => Algorithm::Hgbsa { k_input, knowledge },
            AlgorithmKind::Dsa => Algorithm::Dsa,
            AlgorithmKind::Hybrid => Algorithm::Hybrid,
        }
    }
}

impl std::str::FromStr for AlgorithmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bsa" => Ok(AlgorithmKind::Bsa),
            "hgbsa" => Ok(AlgorithmKind::Hgbsa),
            "dsa" => Ok(AlgorithmKind::Dsa),
            "hybrid" => Ok(AlgorithmKind::Hybrid),
            other => Err(Error::param(format!(
                "unknown algorithm {other:?} (expected bsa, hgbsa, dsa or hybrid)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlgorithmConfig {
    pub algorithm: Algorithm,
    /// Spend one test on the whole population before the algorithm proper.
    pub initial_screen: bool,
}

impl AlgorithmConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            initial_screen: false,
        }
    }

    pub fn with_screen(mut self, initial_screen: bool) -> Self {
        self.initial_screen = initial_screen;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::param("population size must be at least 1"));
        }
        match self.algorithm {
            Algorithm::Dsa | Algorithm::Hybrid => tree_depth(n).map(drop),
            Algorithm::Hgbsa { k_input, .. } if k_input > n => Err(Error::param(format!(
                "HGBSA count input {k_input} exceeds n = {n}"
            ))),
            _ => Ok(()),
        }
    }

    /// A fresh strategy instance for a population of `n`.
    pub fn build(&self, n: usize) -> Result<Box<dyn Adaptive + Send>> {
        self.validate(n)?;
        let inner: Box<dyn Adaptive + Send> = match self.algorithm {
            Algorithm::Bsa => Box::new(Bsa::new(n)?),
            Algorithm::Hgbsa { k_input, knowledge } => Box::new(Hgbsa::new(n, k_input, knowledge)?),
            Algorithm::Dsa => Box::new(Dsa::new(n)?),
            Algorithm::Hybrid => Box::new(Hybrid::new(n)?),
        };
        Ok(if self.initial_screen {
            Box::new(Screened::new(n, inner))
        } else {
            inner
        })
    }
}

impl fmt::Display for AlgorithmConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.algorithm.name())?;
        if self.initial_screen {
            f.write_str("+screen")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub diagnosis: Diagnosis,
    pub ledger: TestLedger,
}

/// Runs `strategy` to completion against `oracle`, one stage per round trip.
pub fn drive(strategy: &mut dyn Adaptive, oracle: &mut dyn Oracle) -> Result<Diagnosis> {
    while let Some(pools) = strategy.next_stage()? {
        let expected = pools.len();
        let outcomes = oracle.run_stage(pools)?;
        if outcomes.len() != expected {
            return Err(Error::Protocol(format!(
                "oracle answered {} of {expected} pools",
                outcomes.len()
            )));
        }
        strategy.observe(&outcomes)?;
    }
    strategy.diagnosis()
}

pub fn run(instance: &InfectionInstance, config: &AlgorithmConfig) -> Result<RunResult> {
    let mut strategy = config.build(instance.n())?;
    let mut oracle = SimulatedOracle::new(instance);
    let diagnosis = drive(strategy.as_mut(), &mut oracle)?;
    Ok(RunResult {
        diagnosis,
        ledger: oracle.into_ledger(),
    })
}

pub fn run_dsa(instance: &InfectionInstance, initial_screen: bool) -> Result<RunResult> {
    run(instance, &AlgorithmConfig::new(Algorithm::Dsa).with_screen(initial_screen))
}

pub fn run_bsa(instance: &InfectionInstance) -> Result<RunResult> {
    run(instance, &AlgorithmConfig::new(Algorithm::Bsa))
}

pub fn run_hgbsa(
    instance: &InfectionInstance,
    k_input: usize,
    knowledge: CountKnowledge,
) -> Result<RunResult> {
    run(
        instance,
        &AlgorithmConfig::new(Algorithm::Hgbsa { k_input, knowledge }),
    )
}

pub fn run_hybrid(instance: &InfectionInstance, initial_screen: bool) -> Result<RunResult> {
    run(instance, &AlgorithmConfig::new(Algorithm::Hybrid).with_screen(initial_screen))
}

/// Tests the whole population first and only hands over to `inner` if that
/// test is positive.
pub struct Screened {
    n: usize,
    inner: Box<dyn Adaptive + Send>,
    state: ScreenState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScreenState {
    Fresh,
    Awaiting,
    Negative,
    Delegated,
}

impl Screened {
    pub fn new(n: usize, inner: Box<dyn Adaptive + Send>) -> Self {
        Self {
            n,
            inner,
            state: ScreenState::Fresh,
        }
    }
}

impl Adaptive for Screened {
    fn next_stage(&mut self) -> Result<Option<Vec<Pool>>> {
        match self.state {
            ScreenState::Fresh => {
                self.state = ScreenState::Awaiting;
                Ok(Some(vec![Pool::range(1, self.n)?]))
            }
            ScreenState::Awaiting => Err(Error::Protocol("screen outcome not yet observed".into())),
            ScreenState::Negative => Ok(None),
            ScreenState::Delegated => self.inner.next_stage(),
        }
    }

    fn observe(&mut self, outcomes: &[bool]) -> Result<()> {
        match self.state {
            ScreenState::Awaiting => {
                let [positive] = outcomes else {
                    return Err(Error::Protocol("screen stage has exactly one pool".into()));
                };
                self.state = if *positive {
                    ScreenState::Delegated
                } else {
                    ScreenState::Negative
                };
                Ok(())
            }
            ScreenState::Delegated => self.inner.observe(outcomes),
            _ => Err(Error::Protocol("no stage awaiting outcomes".into())),
        }
    }

    fn diagnosis(&self) -> Result<Diagnosis> {
        match self.state {
            ScreenState::Negative => {
                let mut res = Resolution::new(self.n);
                for i in 1..=self.n {
                    res.set(i, Status::Healthy)?;
                }
                res.into_diagnosis()
            }
            _ => self.inner.diagnosis(),
        }
    }
}

fn check_outcomes(expected: usize, outcomes: &[bool]) -> Result<()> {
    if expected == 0 {
        return Err(Error::Protocol("no stage awaiting outcomes".into()));
    }
    if outcomes.len() != expected {
        return Err(Error::Protocol(format!(
            "stage had {expected} pools but {} outcomes were given",
            outcomes.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn screen_short_circuits_healthy_population() {
        let inst = InfectionInstance::from_infected(8, &[]).unwrap();
        for algorithm in [Algorithm::Dsa, Algorithm::Hybrid, Algorithm::Bsa] {
            let r = run(&inst, &AlgorithmConfig::new(algorithm).with_screen(true)).unwrap();
            assert_eq!((r.ledger.tests_total(), r.ledger.stages_total()), (1, 1));
            assert!(r.diagnosis.matches(&inst));
        }
    }

    #[test]
    fn screen_adds_one_stage() {
        let inst = InfectionInstance::from_infected(8, &[1]).unwrap();
        let plain = run_dsa(&inst, false).unwrap();
        let screened = run_dsa(&inst, true).unwrap();
        assert_eq!(screened.ledger.tests_total(), plain.ledger.tests_total() + 1);
        assert_eq!(screened.ledger.stages_total(), plain.ledger.stages_total() + 1);
        assert!(screened.diagnosis.matches(&inst));
    }

    #[test]
    fn config_validation() {
        assert!(AlgorithmConfig::new(Algorithm::Dsa).validate(12).is_err());
        assert!(AlgorithmConfig::new(Algorithm::Hybrid).validate(1).is_err());
        assert!(AlgorithmConfig::new(Algorithm::Bsa).validate(12).is_ok());
        let hg = Algorithm::Hgbsa {
            k_input: 9,
            knowledge: CountKnowledge::Exact,
        };
        assert!(AlgorithmConfig::new(hg).validate(8).is_err());
    }

    #[test]
    fn protocol_misuse_is_rejected() {
        let mut dsa = Dsa::new(8).unwrap();
        assert!(dsa.observe(&[true]).is_err());
        let pools = dsa.next_stage().unwrap().unwrap();
        assert_eq!(pools.len(), 4);
        assert!(dsa.next_stage().is_err());
        assert!(dsa.observe(&[true, false]).is_err());
    }
}
