mod common;

use proptest::prelude::*;

use qccs_core::gen::Gen;
use qccs_core::qnum::random::random_state;

use common::{alpha_invariance, cases, edge_lemmas, random_config, rng, state_independence, substitution_lemmas};

proptest! {
    #![proptest_config(cases(300))]

    #[test]
    fn edges_respect_operations_and_free_variables(seed in any::<u64>()) {
        let g = Gen::new();
        let mut r = rng(seed);
        let c = random_config(&g, &g.process(&mut r), &mut r);
        edge_lemmas(&g, &c).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn transitions_do_not_depend_on_the_state(seed in any::<u64>()) {
        let g = Gen::new();
        let mut r = rng(seed);
        let c = random_config(&g, &g.process(&mut r), &mut r);
        let sigma = random_state(c.state.register(), 1, &mut r);
        state_independence(&g, &c, &sigma).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn alpha_equivalent_processes_move_alike(seed in any::<u64>()) {
        let g = Gen::new();
        let mut r = rng(seed);
        let c = random_config(&g, &g.process(&mut r), &mut r);
        alpha_invariance(&g, &c).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn renaming_commutes_with_transitions(seed in any::<u64>()) {
        let g = Gen::new();
        let mut r = rng(seed);
        let c = random_config(&g, &g.process(&mut r), &mut r);
        substitution_lemmas(&g, &c, &mut r).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn deeper_terms(seed in any::<u64>()) {
        let mut g = Gen::new();
        g.max_depth = 6;
        let mut r = rng(seed);
        let c = random_config(&g, &g.process(&mut r), &mut r);
        edge_lemmas(&g, &c).map_err(TestCaseError::fail)?;
        substitution_lemmas(&g, &c, &mut r).map_err(TestCaseError::fail)?;
    }
}
