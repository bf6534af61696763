use super::splitting::{Halving, Step};
use super::{check_outcomes, Adaptive, CountKnowledge};
use crate::error::{Error, Result};
use crate::ledger::{Diagnosis, Pool, Resolution, Status};

/// Hwang's generalized binary splitting over an arbitrary set of
/// individuals, with `k` believed infections among them.
///
/// While `2k >= n + 1` for the `n` unresolved members, everything left is
/// tested individually in one stage. Otherwise a group of `2^a` members is
/// tested, with `a` the largest integer such that `k * 2^a <= n - k + 1`; a
/// negative group is cleared and a positive one is halved down to one
/// infection.
#[derive(Debug, Clone)]
pub(crate) struct HgbsaCore {
    unresolved: Vec<u32>,
    believed: usize,
    knowledge: CountKnowledge,
    phase: Phase,
}

#[derive(Debug, Clone)]
enum Phase {
    Idle,
    Group(Vec<u32>),
    Halving(Halving),
    Individual(Vec<u32>),
    Verify,
    Done,
}

/// Largest `a` with `k * 2^a <= n - k + 1`, for `1 <= k` and `2k <= n`.
pub(crate) fn group_exponent(n: usize, k: usize) -> u32 {
    let budget = n - k + 1;
    let mut a = 0;
    while k << (a + 1) <= budget {
        a += 1;
    }
    a
}

impl HgbsaCore {
    /// `members` must be sorted.
    pub fn new(members: Vec<u32>, believed: usize, knowledge: CountKnowledge) -> Self {
        Self {
            unresolved: members,
            believed,
            knowledge,
            phase: Phase::Idle,
        }
    }

    pub fn is_done(&self) -> bool {
        matches!(self.phase, Phase::Done)
    }

    fn pending(&self) -> usize {
        match &self.phase {
            Phase::Group(_) | Phase::Halving(_) | Phase::Verify => 1,
            Phase::Individual(items) => items.len(),
            Phase::Idle | Phase::Done => 0,
        }
    }

    pub fn next_pools(&mut self, res: &mut Resolution) -> Result<Option<Vec<Pool>>> {
        match &self.phase {
            Phase::Done => return Ok(None),
            Phase::Halving(h) => return Ok(Some(vec![h.probe()])),
            Phase::Idle => {}
            _ => return Err(Error::Protocol("previous stage not yet observed".into())),
        }
        let n = self.unresolved.len();
        if n == 0 {
            self.phase = Phase::Done;
            return Ok(None);
        }
        if self.believed == 0 {
            return match self.knowledge {
                CountKnowledge::Exact => {
                    res.clear_all(&self.unresolved)?;
                    self.unresolved.clear();
                    self.phase = Phase::Done;
                    Ok(None)
                }
                CountKnowledge::Estimate => {
                    self.phase = Phase::Verify;
                    Ok(Some(vec![Pool::from_sorted(self.unresolved.clone())]))
                }
            };
        }
        let k = self.believed.min(n);
        if 2 * k > n {
            let items = std::mem::take(&mut self.unresolved);
            let pools = items.iter().map(|&i| Pool::from_sorted(vec![i])).collect();
            self.phase = Phase::Individual(items);
            return Ok(Some(pools));
        }
        let size = 1usize << group_exponent(n, k);
        let group: Vec<u32> = self.unresolved.drain(..size).collect();
        let pool = Pool::from_sorted(group.clone());
        self.phase = Phase::Group(group);
        Ok(Some(vec![pool]))
    }

    pub fn observe(&mut self, outcomes: &[bool], res: &mut Resolution) -> Result<()> {
        check_outcomes(self.pending(), outcomes)?;
        let step = match std::mem::replace(&mut self.phase, Phase::Idle) {
            Phase::Individual(items) => {
                for (&i, &positive) in items.iter().zip(outcomes) {
                    let status = if positive { Status::Infected } else { Status::Healthy };
                    res.set(i as usize, status)?;
                }
                self.phase = Phase::Done;
                return Ok(());
            }
            Phase::Group(group) if !outcomes[0] => {
                res.clear_all(&group)?;
                return Ok(());
            }
            Phase::Group(group) => Halving::start(group, res)?,
            Phase::Verify if !outcomes[0] => {
                res.clear_all(&self.unresolved)?;
                self.unresolved.clear();
                self.phase = Phase::Done;
                return Ok(());
            }
            // More infections than believed: keep splitting the leftovers.
            Phase::Verify => Halving::start(std::mem::take(&mut self.unresolved), res)?,
            Phase::Halving(h) => h.advance(outcomes[0], res, &mut self.unresolved)?,
            Phase::Idle | Phase::Done => unreachable!(),
        };
        match step {
            Step::Continue(h) => self.phase = Phase::Halving(h),
            Step::Found => {
                self.believed = self.believed.saturating_sub(1);
                self.unresolved.sort_unstable();
            }
        }
        Ok(())
    }
}

/// HGBSA over the whole population.
pub struct Hgbsa {
    resolution: Resolution,
    core: HgbsaCore,
}

impl Hgbsa {
    pub fn new(n: usize, k_input: usize, knowledge: CountKnowledge) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("population size must be at least 1"));
        }
        if k_input > n {
            return Err(Error::param(format!("HGBSA count input {k_input} exceeds n = {n}")));
        }
        Ok(Self {
            resolution: Resolution::new(n),
            core: HgbsaCore::new((1..=n as u32).collect(), k_input, knowledge),
        })
    }
}

impl Adaptive for Hgbsa {
    fn next_stage(&mut self) -> Result<Option<Vec<Pool>>> {
        self.core.next_pools(&mut self.resolution)
    }

    fn observe(&mut self, outcomes: &[bool]) -> Result<()> {
        self.core.observe(outcomes, &mut self.resolution)
    }

    fn diagnosis(&self) -> Result<Diagnosis> {
        self.resolution.clone().into_diagnosis()
    }
}
