use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use aat_core::generate;
use aat_core::{
    axioms, compat, identify, io, popsim, represent, structures, AatModel, Alt, AttentionFunction, BehaviorOracle,
    ChoiceDataset, ChoiceTree, FnOracle, Menu, Observation, ProblemId,
};

fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_history(r: &mut ChaCha8Rng, menus: &[Menu], max: usize) -> Vec<Menu> {
    let len = r.gen_range(0..=max);
    (0..len).map(|_| *menus.choose(r).unwrap()).collect()
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(48)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn engine_invariants(seed in any::<u64>(), n in 3usize..=5) {
        let mut r = seeded(seed);
        let model = generate::random_model(&mut r, n);
        let menus = model.universe().menus(false);
        for _ in 0..20 {
            let h = random_history(&mut r, &menus, 5);
            let a = *menus.choose(&mut r).unwrap();
            let c = model.choose(&h, a).unwrap();
            let cons = model.consideration(&h, a).unwrap();
            prop_assert!(cons.contains(c) && cons.is_subset(a.set()));

            // Longer histories only add to what is considered.
            let h2: Vec<Menu> = h.iter().copied().chain(random_history(&mut r, &menus, 3)).collect();
            prop_assert!(cons.is_subset(model.consideration(&h2, a).unwrap()));

            // Histories with the same chosen set behave alike.
            let mut swapped = h.clone();
            swapped.reverse();
            if model.chosen_set(&swapped).unwrap() == model.chosen_set(&h).unwrap() {
                prop_assert_eq!(model.choose(&swapped, a).unwrap(), c);
            }

            // Repeating a menu repeats the choice; choosing something seen adds nothing.
            let mut rep = h.clone();
            rep.extend([a, a]);
            let run = model.run_sequence(&rep).unwrap();
            prop_assert_eq!(run[run.len() - 1], run[run.len() - 2]);
            let before = model.chosen_set(&h).unwrap();
            let mut ext = h.clone();
            ext.push(a);
            if before.contains(c) {
                prop_assert_eq!(model.chosen_set(&ext).unwrap(), before);
            }
        }
    }

    #[test]
    fn revealed_relations_respect_utility(seed in any::<u64>(), n in 3usize..=4) {
        let mut r = seeded(seed);
        let model = generate::random_model(&mut r, n);
        let tree = ChoiceTree::explore(&model, 4).unwrap();
        let (p, s) = identify::reveal(&tree);
        for (x, y) in s.pairs() {
            prop_assert!(model.utility().prefers(x, y));
        }
        for (x, y) in p.pairs() {
            prop_assert!(!p.contains(y, x));
        }
    }

    #[test]
    fn no_realized_means_no_counterfactual(seed in any::<u64>(), n in 3usize..=4) {
        let mut r = seeded(seed);
        let model = generate::random_model(&mut r, n);
        let tree = ChoiceTree::explore(&model, 4).unwrap();
        if axioms::realized_violations(&tree).is_empty() {
            prop_assert!(axioms::counterfactual_violations(&tree).is_empty());
        }
    }

    #[test]
    fn preference_is_unique_within_the_envelope(seed in any::<u64>(), n in 3usize..=4) {
        let mut r = seeded(seed);
        let model = generate::random_model(&mut r, n);
        let u = model.universe().clone();
        let tree = ChoiceTree::explore(&model, 4).unwrap();
        let pref = identify::infer_preference_tree(&tree).unwrap();
        let bounds = identify::gamma_plus_tree(&tree).unwrap();
        let cat = tree.catalog().clone();
        let g = AttentionFunction::from_fn(&u, false, |m| {
            let p = cat.find(m, None).unwrap();
            let (lo, hi) = (bounds.lower(p), bounds.upper(p));
            hi.difference(lo).iter().filter(|_| r.gen_bool(0.5)).fold(lo, |s, a| s.with(a))
        })
        .unwrap();
        let other = AatModel::new(pref.utility(&u), g);
        let tree2 = ChoiceTree::explore(&other, 4).unwrap();
        prop_assert_eq!(identify::infer_preference_tree(&tree2).unwrap().order, pref.order.clone());

        // Dropping the default choice from an envelope top changes c₀.
        let top = bounds.upper_attention().unwrap();
        for m in u.menus(false) {
            let p = cat.find(m, None).unwrap();
            let c0 = tree.default_choice(p).unwrap();
            let rest = top.get(m).without(c0);
            if !rest.is_empty() {
                let cut = AatModel::new(pref.utility(&u), top.with(m, rest).unwrap());
                prop_assert_ne!(cut.default_choice(m).unwrap(), c0);
            }
        }
    }

    #[test]
    fn construction_is_idempotent(seed in any::<u64>(), n in 3usize..=4) {
        let mut r = seeded(seed);
        let model = generate::random_model(&mut r, n);
        let tree = ChoiceTree::explore(&model, 4).unwrap();
        let once = represent::construct_tree(&tree).unwrap();
        let twice = represent::construct_representation(&once.model, 4).unwrap();
        prop_assert!(represent::verify_representation(&twice.model, &model, 4).unwrap().passed());
        let pref = identify::infer_preference_tree(&tree).unwrap();
        let on_hat: Vec<Alt> = once.order.total.iter().copied().filter(|&a| pref.ever_chosen.contains(a)).collect();
        prop_assert_eq!(on_hat, pref.order);
    }

    #[test]
    fn perturbed_behavior_has_self_evidencing_reports(seed in any::<u64>(), n in 3usize..=4) {
        let mut r = seeded(seed);
        let model = generate::random_model(&mut r, n);
        let cat = model.catalog().clone();
        let ids: Vec<ProblemId> = cat.ids().collect();
        let h = vec![*ids.choose(&mut r).unwrap()];
        let p = *ids.choose(&mut r).unwrap();
        let alt = cat.mask(p).iter().collect::<Vec<_>>().choose(&mut r).copied().unwrap();
        let base = model.clone();
        let oracle = FnOracle::new(cat, move |_, hist: &[ProblemId], q| {
            if hist == h.as_slice() && q == p { alt } else { base.choose_at(hist, q).unwrap() }
        });
        let tree = ChoiceTree::explore(&oracle, 4).unwrap();
        let reports = axioms::check_axioms(&tree);
        for rep in reports.iter().filter(|x| x.violated()) {
            prop_assert!(rep.replays(&oracle));
        }
        let any_violated = reports.iter().any(|x| x.violated());
        prop_assert_eq!(represent::construct_tree(&tree).is_ok(), !any_violated);
    }

    #[test]
    fn cla_axiom_matches_filter_search(seed in any::<u64>(), filter in any::<bool>()) {
        let mut r = seeded(seed);
        let u = generate::universe(3);
        let g = if filter { generate::random_filter(&mut r, &u) } else { generate::random_gamma(&mut r, &u) };
        let model = AatModel::new(generate::random_utility(&mut r, &u), g);
        let tree = ChoiceTree::explore(&model, 4).unwrap();
        let axiom = structures::axiom_cla(&tree).passed();
        let found = structures::cla_representation(&tree).unwrap();
        prop_assert_eq!(axiom, found.is_some());
        if let Some(m) = found {
            prop_assert!(structures::is_attention_filter(m.gamma()));
        }
        if filter {
            prop_assert!(axiom);
        }
    }

    #[test]
    fn reachable_one_shots_are_cousins(seed in any::<u64>(), n in 3usize..=4) {
        let mut r = seeded(seed);
        let u = generate::universe(n);
        let order = generate::random_order(&mut r, &u);
        let f = compat::ChoiceFunction::new(&u, |s| {
            let v: Vec<Alt> = s.iter().collect();
            *v.choose(&mut r).unwrap()
        })
        .unwrap();
        prop_assert!(compat::cousins(&u, &f, &compat::ChoiceFunction::from_order(&u, &order)).iter().any(|(_, g)| *g == f));
        let model = compat::model_for(&u, &f, &order);
        let kappa = compat::ChoiceFunction::from_order(&u, &order);
        let reached: BTreeSet<_> = compat::reachable_states(&model).into_iter().map(|(t, _)| t).collect();
        let shots: BTreeSet<_> = reached.iter().map(|&t| compat::one_shot(&model, t)).collect();
        let from_cousins: BTreeSet<_> = reached.iter().map(|&t| compat::cousin(&u, &f, &kappa, t)).collect();
        prop_assert_eq!(shots, from_cousins);
    }

    #[test]
    fn model_json_round_trips(seed in any::<u64>(), n in 3usize..=5) {
        let mut r = seeded(seed);
        let model = generate::random_model(&mut r, n);
        let json = io::model_json(&model);
        let back = io::parse_model(&json).unwrap();
        prop_assert_eq!(io::model_json(&back), json);
        let tree = ChoiceTree::explore(&model, 3).unwrap();
        prop_assert!(represent::verify_tree(&back, &tree).unwrap().passed());
    }

    #[test]
    fn observed_sequences_never_falsify(seed in any::<u64>(), n in 3usize..=4) {
        let mut r = seeded(seed);
        let model = generate::random_model(&mut r, n);
        let u = model.universe().clone();
        let menus = u.menus(false);
        let obs: Vec<Observation> = (0..6)
            .map(|_| {
                let mut seq = random_history(&mut r, &menus, 4);
                seq.push(*menus.choose(&mut r).unwrap());
                let choices = model.run_sequence(&seq).unwrap();
                Observation::plain(seq, choices)
            })
            .collect();
        let data = ChoiceDataset::new(u.clone(), obs).unwrap();
        let back = io::parse_dataset(&io::dataset_json(&data)).unwrap();
        prop_assert_eq!(back.observations().len(), data.observations().len());
        let tree = ChoiceTree::from_dataset(&data).unwrap();
        for rep in axioms::check_axioms(&tree) {
            prop_assert!(!rep.violated() && !rep.passed());
        }
    }

    #[test]
    fn convergence_identity(seed in any::<u64>(), den in 1i64..40) {
        let mut r = seeded(seed);
        let params = popsim::random_params(&mut r, den, false);
        let cf = popsim::ratios_closed_form(&params);
        prop_assert_eq!(cf.a_t2, cf.b_t2);
    }
}
