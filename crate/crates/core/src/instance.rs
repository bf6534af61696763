//! Ground-truth infection vectors and the two infection models they are drawn from.

use std::fmt;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// How an instance's infections were generated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    /// Exactly `k` infected, every k-subset equally likely.
    Combinatorial { k: usize },
    /// Every individual infected independently with probability `p`.
    Probabilistic { p: f64 },
}

impl Model {
    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            Model::Combinatorial { k } if k > n => {
                Err(Error::param(format!("k = {k} exceeds population size {n}")))
            }
            Model::Probabilistic { p } if !(0.0..=1.0).contains(&p) => {
                Err(Error::param(format!("p = {p} is outside [0, 1]")))
            }
            _ => Ok(()),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Model::Combinatorial { .. } => "comb",
            Model::Probabilistic { .. } => "prob",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Combinatorial { k } => write!(f, "comb:{k}"),
            Model::Probabilistic { p } => write!(f, "prob:{p}"),
        }
    }
}

/// A population with known infection statuses, indexed 1..=n externally.
#[derive(Debug, Clone, PartialEq)]
pub struct InfectionInstance {
    statuses: Vec<bool>,
    model: Model,
    seed: u64,
}

impl InfectionInstance {
    /// Draws an instance from `model` with a ChaCha8 stream seeded by `seed`.
    pub fn generate(model: Model, n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("population size must be at least 1"));
        }
        model.validate(n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let statuses = match model {
            Model::Combinatorial { k } => {
                let mut statuses = vec![false; n];
                for i in index::sample(&mut rng, n, k) {
                    statuses[i] = true;
                }
                statuses
            }
            Model::Probabilistic { p } => (0..n).map(|_| rng.random_bool(p)).collect(),
        };
        Ok(Self { statuses, model, seed })
    }

    /// Builds an instance from explicit 1-based infected indices. The model is
    /// recorded as combinatorial with the resulting count.
    pub fn from_infected(n: usize, infected: &[usize]) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("population size must be at least 1"));
        }
        let mut statuses = vec![false; n];
        for &i in infected {
            if i == 0 || i > n {
                return Err(Error::param(format!("infected index {i} outside 1..={n}")));
            }
            statuses[i - 1] = true;
        }
        let k = statuses.iter().filter(|&&s| s).count();
        Ok(Self {
            statuses,
            model: Model::Combinatorial { k },
            seed: 0,
        })
    }

    pub fn from_statuses(statuses: Vec<bool>) -> Result<Self> {
        if statuses.is_empty() {
            return Err(Error::param("population size must be at least 1"));
        }
        let k = statuses.iter().filter(|&&s| s).count();
        Ok(Self {
            statuses,
            model: Model::Combinatorial { k },
            seed: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.statuses.len()
    }

    pub fn statuses(&self) -> &[bool] {
        &self.statuses
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn infected_count(&self) -> usize {
        self.statuses.iter().filter(|&&s| s).count()
    }

    /// 1-based indices of infected individuals.
    pub fn infected(&self) -> Vec<usize> {
        self.statuses
            .iter()
            .enumerate()
            .filter_map(|(i, &s)| s.then_some(i + 1))
            .collect()
    }

    /// Noiseless OR channel: positive iff any member is infected.
    pub fn evaluate_pool(&self, pool: &crate::ledger::Pool) -> Result<bool> {
        let n = self.n();
        if let Some(&last) = pool.members().last() {
            if last as usize > n {
                return Err(Error::InvalidPool(format!(
                    "member {last} outside population 1..={n}"
                )));
            }
        }
        Ok(pool
            .members()
            .iter()
            .any(|&m| self.statuses[m as usize - 1]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::Pool;

    #[test]
    fn forced_models() {
        for seed in 0..5 {
            let none = InfectionInstance::generate(Model::Combinatorial { k: 0 }, 8, seed).unwrap();
            assert!(none.statuses().iter().all(|&s| !s));
            let all = InfectionInstance::generate(Model::Combinatorial { k: 8 }, 8, seed).unwrap();
            assert!(all.statuses().iter().all(|&s| s));
            let sure = InfectionInstance::generate(Model::Probabilistic { p: 1.0 }, 16, seed).unwrap();
            assert!(sure.statuses().iter().all(|&s| s));
        }
    }

    #[test]
    fn combinatorial_count_is_exact() {
        for seed in 0..50 {
            let inst = InfectionInstance::generate(Model::Combinatorial { k: 5 }, 32, seed).unwrap();
            assert_eq!(inst.n(), 32);
            assert_eq!(inst.infected_count(), 5);
        }
    }

    #[test]
    fn regeneration_is_bit_identical() {
        let a = InfectionInstance::generate(Model::Probabilistic { p: 0.3 }, 1024, 99).unwrap();
        let b = InfectionInstance::generate(Model::Probabilistic { p: 0.3 }, 1024, 99).unwrap();
        assert_eq!(a, b);
        let c = InfectionInstance::generate(Model::Probabilistic { p: 0.3 }, 1024, 100).unwrap();
        assert_ne!(a.statuses(), c.statuses());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(InfectionInstance::generate(Model::Combinatorial { k: 9 }, 8, 0).is_err());
        assert!(InfectionInstance::generate(Model::Probabilistic { p: 1.5 }, 8, 0).is_err());
        assert!(InfectionInstance::generate(Model::Probabilistic { p: -0.1 }, 8, 0).is_err());
        assert!(InfectionInstance::generate(Model::Combinatorial { k: 0 }, 0, 0).is_err());
    }

    #[test]
    fn pool_evaluation() {
        let healthy = InfectionInstance::from_infected(8, &[]).unwrap();
        assert!(!healthy.evaluate_pool(&Pool::range(1, 8).unwrap()).unwrap());

        let inst = InfectionInstance::from_infected(8, &[3]).unwrap();
        assert!(!inst.evaluate_pool(&Pool::new(vec![5, 6]).unwrap()).unwrap());
        assert!(inst.evaluate_pool(&Pool::new(vec![1, 3]).unwrap()).unwrap());
        assert!(inst.evaluate_pool(&Pool::new(vec![9]).unwrap()).is_err());
    }

    /// Each individual should be infected with frequency k/n across seeds.
    #[test]
    fn combinatorial_marginals_are_uniform() {
        let (n, k, trials) = (16usize, 4usize, 2000u64);
        let mut hits = vec![0u64; n];
        for seed in 0..trials {
            let inst = InfectionInstance::generate(Model::Combinatorial { k }, n, seed).unwrap();
            for (h, &s) in hits.iter_mut().zip(inst.statuses()) {
                *h += s as u64;
            }
        }
        let expected = trials as f64 * k as f64 / n as f64;
        let chi2: f64 = hits
            .iter()
            .map(|&h| (h as f64 - expected).powi(2) / expected)
            .sum();
        // 15 degrees of freedom, p = 0.001 critical value.
        assert!(chi2 < 37.7, "chi-square {chi2}");
    }
}
