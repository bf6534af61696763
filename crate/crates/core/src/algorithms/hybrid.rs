use super::hgbsa::HgbsaCore;
use super::{check_outcomes, Adaptive, CountKnowledge};
use crate::error::{Error, Result};
use crate::ledger::{Diagnosis, Pool, Resolution, Status};
use crate::likelihood::{allocate_estimate, cached_estimate, OutcomePattern};
use crate::tree::{diagonal_layout, SubtreeRef};

/// One diagonal stage, a maximum-likelihood estimate of the infection count
/// from its outcome pattern, then HGBSA inside every positive subtree with
/// its share of the estimate. The subtree runs advance in lockstep and their
/// tests for the same round share a stage.
pub struct Hybrid {
    n: usize,
    resolution: Resolution,
    phase: Phase,
    estimate: Option<usize>,
}

enum Phase {
    Start,
    First(Vec<SubtreeRef>),
    Subtrees {
        runs: Vec<HgbsaCore>,
        // (run index, pools contributed) for the stage in flight
        in_flight: Vec<(usize, usize)>,
    },
}

impl Hybrid {
    pub fn new(n: usize) -> Result<Self> {
        SubtreeRef::root(n)?;
        Ok(Self {
            n,
            resolution: Resolution::new(n),
            phase: Phase::Start,
            estimate: None,
        })
    }

    /// The count estimate, once the first stage has been observed.
    pub fn estimate(&self) -> Option<usize> {
        self.estimate
    }

    fn observe_first(&mut self, nodes: Vec<SubtreeRef>, outcomes: &[bool]) -> Result<()> {
        let pattern = OutcomePattern::new(self.n, outcomes.to_vec())?;
        let k_hat = cached_estimate(self.n, &pattern)?;
        self.estimate = Some(k_hat);

        let mut certified = 0;
        let mut positive = Vec::new();
        for (node, &out) in nodes.iter().zip(outcomes) {
            if !out {
                for i in node.leaf_lo()..=node.leaf_hi() {
                    self.resolution.set(i, Status::Healthy)?;
                }
            } else if node.is_leaf() {
                self.resolution.set(node.leaf_lo(), Status::Infected)?;
                certified += 1;
            } else {
                positive.push(*node);
            }
        }
        let leaf_counts: Vec<usize> = positive.iter().map(SubtreeRef::leaf_count).collect();
        let shares = allocate_estimate(k_hat, certified, &leaf_counts);
        let runs = positive
            .iter()
            .zip(shares)
            .map(|(node, share)| {
                let members = (node.leaf_lo() as u32..=node.leaf_hi() as u32).collect();
                HgbsaCore::new(members, share, CountKnowledge::Estimate)
            })
            .collect();
        self.phase = Phase::Subtrees {
            runs,
            in_flight: Vec::new(),
        };
        Ok(())
    }
}

impl Adaptive for Hybrid {
    fn next_stage(&mut self) -> Result<Option<Vec<Pool>>> {
        match &mut self.phase {
            Phase::Start => {
                let layout = diagonal_layout(SubtreeRef::root(self.n)?)?;
                let pools = layout.pools();
                self.phase = Phase::First(layout.nodes().to_vec());
                Ok(Some(pools))
            }
            Phase::First(_) => Err(Error::Protocol("previous stage not yet observed".into())),
            Phase::Subtrees { runs, in_flight } => {
                if !in_flight.is_empty() {
                    return Err(Error::Protocol("previous stage not yet observed".into()));
                }
                let mut stage = Vec::new();
                for (idx, run) in runs.iter_mut().enumerate() {
                    if run.is_done() {
                        continue;
                    }
                    if let Some(pools) = run.next_pools(&mut self.resolution)? {
                        in_flight.push((idx, pools.len()));
                        stage.extend(pools);
                    }
                }
                Ok((!stage.is_empty()).then_some(stage))
            }
        }
    }

    fn observe(&mut self, outcomes: &[bool]) -> Result<()> {
        match std::mem::replace(&mut self.phase, Phase::Start) {
            Phase::First(nodes) => {
                if let Err(e) = check_outcomes(nodes.len(), outcomes) {
                    self.phase = Phase::First(nodes);
                    return Err(e);
                }
                self.observe_first(nodes, outcomes)
            }
            Phase::Subtrees { mut runs, mut in_flight } => {
                let expected = in_flight.iter().map(|&(_, c)| c).sum();
                let checked = check_outcomes(expected, outcomes);
                if checked.is_ok() {
                    let mut offset = 0;
                    for &(idx, count) in &in_flight {
                        runs[idx].observe(&outcomes[offset..offset + count], &mut self.resolution)?;
                        offset += count;
                    }
                    in_flight.clear();
                }
                self.phase = Phase::Subtrees { runs, in_flight };
                checked
            }
            Phase::Start => Err(Error::Protocol("no stage awaiting outcomes".into())),
        }
    }

    fn diagnosis(&self) -> Result<Diagnosis> {
        self.resolution.clone().into_diagnosis()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::drive;
    use crate::instance::InfectionInstance;
    use crate::ledger::SimulatedOracle;

    fn run(n: usize, infected: &[usize]) -> (usize, usize, usize) {
        let inst = InfectionInstance::from_infected(n, infected).unwrap();
        let mut hybrid = Hybrid::new(n).unwrap();
        let mut oracle = SimulatedOracle::new(&inst);
        let diagnosis = drive(&mut hybrid, &mut oracle).unwrap();
        assert!(diagnosis.matches(&inst));
        let ledger = oracle.into_ledger();
        (ledger.tests_total(), ledger.stages_total(), hybrid.estimate().unwrap())
    }

    #[test]
    fn healthy_population() {
        assert_eq!(run(8, &[]), (4, 1, 0));
    }

    #[test]
    fn everyone_infected() {
        assert_eq!(run(8, &[1, 2, 3, 4, 5, 6, 7, 8]), (10, 2, 8));
    }

    #[test]
    fn lone_certified_singleton() {
        assert_eq!(run(8, &[7]), (4, 1, 1));
    }

    #[test]
    fn rejects_ragged_population() {
        assert!(Hybrid::new(12).is_err());
    }
}
