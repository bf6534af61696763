//! Pools, the staged test ledger, and the oracles algorithms are driven against.

use std::fmt;

use crate::error::{Error, Result};
use crate::instance::InfectionInstance;

/// A set of individuals mixed into one test, stored as sorted 1-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pool(Box<[u32]>);

impl Pool {
    pub fn new(mut members: Vec<u32>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidPool("empty pool".into()));
        }
        members.sort_unstable();
        if members[0] == 0 {
            return Err(Error::InvalidPool("indices are 1-based".into()));
        }
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPool("duplicate member".into()));
        }
        Ok(Pool(members.into_boxed_slice()))
    }

    /// Contiguous pool `lo..=hi`.
    pub fn range(lo: usize, hi: usize) -> Result<Self> {
        if lo == 0 || hi < lo {
            return Err(Error::InvalidPool(format!("bad range {lo}..={hi}")));
        }
        Ok(Pool((lo as u32..=hi as u32).collect()))
    }

    pub fn singleton(i: usize) -> Result<Self> {
        Self::range(i, i)
    }

    /// Caller guarantees members are sorted, distinct and 1-based.
    pub(crate) fn from_sorted(members: Vec<u32>) -> Self {
        debug_assert!(!members.is_empty() && members[0] >= 1);
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Pool(members.into_boxed_slice())
    }

    pub fn members(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        self.0.len() == 1
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&(i as u32)).is_ok()
    }
}

/// Compressed range notation, e.g. `1-4,7`.
impl fmt::Display for Pool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut i = 0;
        let m = &self.0;
        while i < m.len() {
            let mut j = i;
            while j + 1 < m.len() && m[j + 1] == m[j] + 1 {
                j += 1;
            }
            if !first {
                f.write_str(",")?;
            }
            first = false;
            if j == i {
                write!(f, "{}", m[i])?;
            } else {
                write!(f, "{}-{}", m[i], m[j])?;
            }
            i = j + 1;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestRecord {
    pub pool: Pool,
    pub outcome: bool,
}

/// One stage: pools tested in parallel.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stage {
    pub tests: Vec<TestRecord>,
}

/// Every test performed during a run, grouped by stage.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TestLedger {
    stages: Vec<Stage>,
    tests_total: usize,
}

impl TestLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn tests_total(&self) -> usize {
        self.tests_total
    }

    pub fn stages_total(&self) -> usize {
        self.stages.len()
    }

    /// Evaluates `pools` against `instance` as a single stage and records them.
    pub fn submit_batch(&mut self, instance: &InfectionInstance, pools: Vec<Pool>) -> Result<Vec<bool>> {
        if pools.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let outcomes = pools
            .iter()
            .map(|p| instance.evaluate_pool(p))
            .collect::<Result<Vec<_>>>()?;
        self.record(pools, &outcomes)?;
        Ok(outcomes)
    }

    /// Records a stage whose outcomes were obtained elsewhere.
    pub fn record(&mut self, pools: Vec<Pool>, outcomes: &[bool]) -> Result<()> {
        if pools.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if pools.len() != outcomes.len() {
            return Err(Error::Protocol(format!(
                "{} pools but {} outcomes",
                pools.len(),
                outcomes.len()
            )));
        }
        self.tests_total += pools.len();
        self.stages.push(Stage {
            tests: pools
                .into_iter()
                .zip(outcomes)
                .map(|(pool, &outcome)| TestRecord { pool, outcome })
                .collect(),
        });
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Infected,
    Healthy,
}

/// A complete status assignment for the population.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnosis {
    statuses: Vec<Status>,
}

impl Diagnosis {
    pub fn statuses(&self) -> &[Status] {
        &self.statuses
    }

    pub fn infected(&self) -> Vec<usize> {
        self.statuses
            .iter()
            .enumerate()
            .filter_map(|(i, &s)| (s == Status::Infected).then_some(i + 1))
            .collect()
    }

    pub fn matches(&self, instance: &InfectionInstance) -> bool {
        self.statuses.len() == instance.n()
            && self
                .statuses
                .iter()
                .zip(instance.statuses())
                .all(|(&s, &truth)| (s == Status::Infected) == truth)
    }
}

/// Per-individual resolution state accumulated while an algorithm runs.
#[derive(Debug, Clone)]
pub struct Resolution {
    statuses: Vec<Option<Status>>,
}

impl Resolution {
    pub fn new(n: usize) -> Self {
        Self {
            statuses: vec![None; n],
        }
    }

    pub fn n(&self) -> usize {
        self.statuses.len()
    }

    pub fn get(&self, i: usize) -> Option<Status> {
        self.statuses[i - 1]
    }

    pub fn set(&mut self, i: usize, status: Status) -> Result<()> {
        let slot = &mut self.statuses[i - 1];
        match *slot {
            Some(prev) if prev != status => Err(Error::Protocol(format!(
                "individual {i} resolved as both {prev:?} and {status:?}"
            ))),
            _ => {
                *slot = Some(status);
                Ok(())
            }
        }
    }

    pub fn clear_all(&mut self, members: &[u32]) -> Result<()> {
        members
            .iter()
            .try_for_each(|&m| self.set(m as usize, Status::Healthy))
    }

    pub fn is_complete(&self) -> bool {
        self.statuses.iter().all(Option::is_some)
    }

    pub fn into_diagnosis(self) -> Result<Diagnosis> {
        let unresolved = self.statuses.iter().position(Option::is_none);
        if let Some(i) = unresolved {
            return Err(Error::Protocol(format!("individual {} left unresolved", i + 1)));
        }
        Ok(Diagnosis {
            statuses: self.statuses.into_iter().flatten().collect(),
        })
    }
}

/// Answers one stage of pooled tests at a time.
pub trait Oracle {
    fn run_stage(&mut self, pools: Vec<Pool>) -> Result<Vec<bool>>;
}

/// Oracle backed by a ground-truth instance, metering into a ledger.
#[derive(Debug)]
pub struct SimulatedOracle<'a> {
    instance: &'a InfectionInstance,
    ledger: TestLedger,
}

impl<'a> SimulatedOracle<'a> {
    pub fn new(instance: &'a InfectionInstance) -> Self {
        Self {
            instance,
            ledger: TestLedger::new(),
        }
    }

    pub fn into_ledger(self) -> TestLedger {
        self.ledger
    }
}

impl Oracle for SimulatedOracle<'_> {
    fn run_stage(&mut self, pools: Vec<Pool>) -> Result<Vec<bool>> {
        self.ledger.submit_batch(self.instance, pools)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pools(ranges: &[(usize, usize)]) -> Vec<Pool> {
        ranges.iter().map(|&(lo, hi)| Pool::range(lo, hi).unwrap()).collect()
    }

    #[test]
    fn pool_validation() {
        assert!(Pool::new(vec![]).is_err());
        assert!(Pool::new(vec![0, 1]).is_err());
        assert!(Pool::new(vec![2, 2]).is_err());
        let p = Pool::new(vec![7, 1, 2, 3, 5]).unwrap();
        assert_eq!(p.members(), &[1, 2, 3, 5, 7]);
        assert_eq!(p.to_string(), "1-3,5,7");
    }

    #[test]
    fn batch_accounting() {
        let inst = InfectionInstance::from_infected(8, &[1]).unwrap();
        let mut ledger = TestLedger::new();
        assert_eq!(ledger.stages_total(), 0);
        assert_eq!(ledger.tests_total(), 0);

        let out = ledger.submit_batch(&inst, pools(&[(1, 4), (5, 6), (7, 7), (8, 8)])).unwrap();
        assert_eq!(out, vec![true, false, false, false]);
        assert_eq!((ledger.tests_total(), ledger.stages_total()), (4, 1));

        ledger.submit_batch(&inst, pools(&[(1, 2), (3, 3), (4, 4), (5, 5), (6, 6)])).unwrap();
        assert_eq!((ledger.tests_total(), ledger.stages_total()), (9, 2));
    }

    #[test]
    fn empty_batch_rejected() {
        let inst = InfectionInstance::from_infected(8, &[]).unwrap();
        let mut ledger = TestLedger::new();
        assert!(matches!(ledger.submit_batch(&inst, vec![]), Err(Error::EmptyBatch)));
        assert_eq!(ledger, TestLedger::new());
    }

    #[test]
    fn conflicting_resolution_is_an_error() {
        let mut r = Resolution::new(4);
        r.set(2, Status::Infected).unwrap();
        r.set(2, Status::Infected).unwrap();
        assert!(r.set(2, Status::Healthy).is_err());
        assert!(r.clone().into_diagnosis().is_err());
    }
}
