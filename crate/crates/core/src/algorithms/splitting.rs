//! Binary search for one infected member of a set known to be positive.

use crate::error::Result;
use crate::ledger::{Pool, Resolution, Status};

/// A known-positive set being halved. Each probe tests the left half: a
/// positive half becomes the new set and the right half is handed back
/// unresolved; a negative half is cleared and the right half is then known
/// positive without a test.
#[derive(Debug, Clone)]
pub(crate) struct Halving {
    current: Vec<u32>,
}

pub(crate) enum Step {
    Continue(Halving),
    Found,
}

impl Halving {
    /// `members` must be sorted and known to contain an infection.
    pub fn start(members: Vec<u32>, res: &mut Resolution) -> Result<Step> {
        Self { current: members }.settle(res)
    }

    fn split_at(&self) -> usize {
        self.current.len().div_ceil(2)
    }

    pub fn probe(&self) -> Pool {
        Pool::from_sorted(self.current[..self.split_at()].to_vec())
    }

    /// Applies the probe outcome; members returned to the unresolved pile
    /// are appended to `handed_back`.
    pub fn advance(mut self, positive: bool, res: &mut Resolution, handed_back: &mut Vec<u32>) -> Result<Step> {
        let right = self.current.split_off(self.split_at());
        if positive {
            handed_back.extend(right);
        } else {
            res.clear_all(&self.current)?;
            self.current = right;
        }
        self.settle(res)
    }

    fn settle(self, res: &mut Resolution) -> Result<Step> {
        if let [only] = self.current[..] {
            res.set(only as usize, Status::Infected)?;
            Ok(Step::Found)
        } else {
            Ok(Step::Continue(self))
        }
    }
}
