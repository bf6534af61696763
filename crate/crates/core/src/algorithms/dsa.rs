use super::{check_outcomes, Adaptive};
use crate::error::Result;
use crate::ledger::{Diagnosis, Pool, Resolution, Status};
use crate::tree::{diagonal_layout, SubtreeRef};

/// Diagonal splitting: slice every positive subtree diagonally, all in the
/// same stage, until only singletons were positive.
pub struct Dsa {
    resolution: Resolution,
    frontier: Vec<SubtreeRef>,
    pending: Vec<SubtreeRef>,
}

impl Dsa {
    pub fn new(n: usize) -> Result<Self> {
        Ok(Self {
            resolution: Resolution::new(n),
            frontier: vec![SubtreeRef::root(n)?],
            pending: Vec::new(),
        })
    }
}

impl Adaptive for Dsa {
    fn next_stage(&mut self) -> Result<Option<Vec<Pool>>> {
        if !self.pending.is_empty() {
            return Err(crate::Error::Protocol("previous stage not yet observed".into()));
        }
        if self.frontier.is_empty() {
            return Ok(None);
        }
        for origin in std::mem::take(&mut self.frontier) {
            self.pending.extend_from_slice(diagonal_layout(origin)?.nodes());
        }
        Ok(Some(self.pending.iter().map(SubtreeRef::pool).collect()))
    }

    fn observe(&mut self, outcomes: &[bool]) -> Result<()> {
        check_outcomes(self.pending.len(), outcomes)?;
        for (node, &positive) in std::mem::take(&mut self.pending).iter().zip(outcomes) {
            if !positive {
                for i in node.leaf_lo()..=node.leaf_hi() {
                    self.resolution.set(i, Status::Healthy)?;
                }
            } else if node.is_leaf() {
                self.resolution.set(node.leaf_lo(), Status::Infected)?;
            } else {
                self.frontier.push(*node);
            }
        }
        Ok(())
    }

    fn diagnosis(&self) -> Result<Diagnosis> {
        self.resolution.clone().into_diagnosis()
    }
}
