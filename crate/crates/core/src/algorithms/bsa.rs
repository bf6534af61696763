use super::splitting::{Halving, Step};
use super::{check_outcomes, Adaptive};
use crate::error::{Error, Result};
use crate::ledger::{Diagnosis, Pool, Resolution};

/// Classical sequential binary splitting: test everything still unresolved;
/// if positive, halve down to one infected individual, then start over on
/// whatever is left. One test per stage.
pub struct Bsa {
    resolution: Resolution,
    unresolved: Vec<u32>,
    phase: Phase,
}

enum Phase {
    Idle,
    Whole,
    Halving(Halving),
}

impl Bsa {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("population size must be at least 1"));
        }
        Ok(Self {
            resolution: Resolution::new(n),
            unresolved: (1..=n as u32).collect(),
            phase: Phase::Idle,
        })
    }
}

impl Adaptive for Bsa {
    fn next_stage(&mut self) -> Result<Option<Vec<Pool>>> {
        match &self.phase {
            Phase::Idle if self.unresolved.is_empty() => Ok(None),
            Phase::Idle => {
                self.phase = Phase::Whole;
                Ok(Some(vec![Pool::from_sorted(self.unresolved.clone())]))
            }
            Phase::Halving(h) => Ok(Some(vec![h.probe()])),
            Phase::Whole => Err(Error::Protocol("previous stage not yet observed".into())),
        }
    }

    fn observe(&mut self, outcomes: &[bool]) -> Result<()> {
        let expected = usize::from(!matches!(self.phase, Phase::Idle));
        check_outcomes(expected, outcomes)?;
        let positive = outcomes[0];
        let step = match std::mem::replace(&mut self.phase, Phase::Idle) {
            Phase::Whole if !positive => {
                self.resolution.clear_all(&self.unresolved)?;
                self.unresolved.clear();
                return Ok(());
            }
            Phase::Whole => Halving::start(std::mem::take(&mut self.unresolved), &mut self.resolution)?,
            Phase::Halving(h) => h.advance(positive, &mut self.resolution, &mut self.unresolved)?,
            Phase::Idle => unreachable!(),
        };
        match step {
            Step::Continue(h) => self.phase = Phase::Halving(h),
            Step::Found => self.unresolved.sort_unstable(),
        }
        Ok(())
    }

    fn diagnosis(&self) -> Result<Diagnosis> {
        self.resolution.clone().into_diagnosis()
    }
}
