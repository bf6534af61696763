use diagsplit::{
    run, Algorithm, AlgorithmConfig, AlgorithmKind, CountKnowledge, InfectionInstance, Model,
};
use proptest::prelude::*;

fn configs(k: usize) -> Vec<AlgorithmConfig> {
    AlgorithmKind::ALL
        .iter()
        .map(|kind| AlgorithmConfig::new(kind.with_count(k, CountKnowledge::Exact)))
        .collect()
}

#[test]
fn every_instance_of_eight() {
    for mask in 0u32..256 {
        let statuses: Vec<bool> = (0..8).map(|i| mask >> i & 1 == 1).collect();
        let inst = InfectionInstance::from_statuses(statuses).unwrap();
        for screen in [false, true] {
            for config in configs(inst.infected_count()) {
                let r = run(&inst, &config.with_screen(screen)).unwrap();
                assert!(r.diagnosis.matches(&inst), "{config} on {:?}", inst.infected());
                assert!(r.ledger.stages_total() <= r.ledger.tests_total());
            }
        }
    }
}

#[test]
fn random_large_instances() {
    for (i, model) in [
        Model::Combinatorial { k: 1 },
        Model::Combinatorial { k: 37 },
        Model::Combinatorial { k: 600 },
        Model::Probabilistic { p: 0.01 },
        Model::Probabilistic { p: 0.4 },
    ]
    .into_iter()
    .enumerate()
    {
        for seed in 0..4 {
            let inst = InfectionInstance::generate(model, 1024, seed * 31 + i as u64).unwrap();
            for config in configs(inst.infected_count()) {
                let r = run(&inst, &config).unwrap();
                assert!(r.diagnosis.matches(&inst), "{config} {model}");
            }
        }
    }
}

/// Replaying every recorded pool reproduces its recorded outcome.
fn assert_replays(inst: &InfectionInstance, config: &AlgorithmConfig) {
    let r = run(inst, config).unwrap();
    let mut tests = 0;
    for stage in r.ledger.stages() {
        assert!(!stage.tests.is_empty());
        for t in &stage.tests {
            assert_eq!(inst.evaluate_pool(&t.pool).unwrap(), t.outcome);
            tests += 1;
        }
    }
    assert_eq!(tests, r.ledger.tests_total());
}

proptest! {
    #[test]
    fn zero_error_under_wrong_estimates(statuses in prop::collection::vec(any::<bool>(), 32), guess in 0usize..=32) {
        let inst = InfectionInstance::from_statuses(statuses).unwrap();
        let config = AlgorithmConfig::new(Algorithm::Hgbsa { k_input: guess, knowledge: CountKnowledge::Estimate });
        let r = run(&inst, &config).unwrap();
        prop_assert!(r.diagnosis.matches(&inst));
    }

    #[test]
    fn ledgers_replay(statuses in prop::collection::vec(any::<bool>(), 64)) {
        let inst = InfectionInstance::from_statuses(statuses).unwrap();
        for config in configs(inst.infected_count()) {
            assert_replays(&inst, &config);
        }
    }

    #[test]
    fn runs_are_deterministic(seed in any::<u64>(), k in 0usize..=64) {
        let a = InfectionInstance::generate(Model::Combinatorial { k }, 64, seed).unwrap();
        let b = InfectionInstance::generate(Model::Combinatorial { k }, 64, seed).unwrap();
        prop_assert_eq!(&a, &b);
        for config in configs(k) {
            prop_assert_eq!(run(&a, &config).unwrap().ledger, run(&b, &config).unwrap().ledger);
        }
    }

    #[test]
    fn baselines_handle_ragged_populations(statuses in prop::collection::vec(any::<bool>(), 1..40)) {
        let inst = InfectionInstance::from_statuses(statuses).unwrap();
        let k = inst.infected_count();
        for kind in [AlgorithmKind::Bsa, AlgorithmKind::Hgbsa] {
            let r = run(&inst, &AlgorithmConfig::new(kind.with_count(k, CountKnowledge::Exact))).unwrap();
            prop_assert!(r.diagnosis.matches(&inst));
        }
    }
}
