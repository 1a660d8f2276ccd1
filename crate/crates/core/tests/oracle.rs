mod naive;

use std::collections::BTreeSet;

use ilwb::groupoid::build_groupoid_slice;
use ilwb::semantics::{enumerate_models, eval_formula, is_model};
use ilwb::syntax::coherent_normal_form;
use ilwb::verify::{
    decidable_graph_theory, graph_theory, linear_order_theory, random_coherent_formula, random_formula,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn enumerator_matches_brute_force() {
    for (t, cap) in [
        (graph_theory(), 3),
        (decidable_graph_theory(), 3),
        (linear_order_theory(), 4),
    ] {
        let lib: BTreeSet<String> = enumerate_models(&t, cap)
            .unwrap()
            .iter()
            .map(naive::model_key)
            .collect();
        let brute: BTreeSet<String> = naive::models(&t, cap).iter().map(naive::model_key).collect();
        assert_eq!(lib, brute);
    }
}

#[test]
fn known_model_counts() {
    // labelled graphs on n vertices: 2^(n choose 2)
    assert_eq!(naive::models(&graph_theory(), 3).len(), 1 + 1 + 2 + 8);
    // linear orders on n elements: n!
    assert_eq!(naive::models(&linear_order_theory(), 4).len(), 1 + 1 + 2 + 6 + 24);
}

#[test]
fn model_check_agrees() {
    let t = graph_theory();
    let lang = t.language().clone();
    let all_structures = naive::models(&ilwb::syntax::Theory::empty(lang), 3);
    for m in &all_structures {
        assert_eq!(is_model(m, &t).unwrap(), naive::is_model(m, &t));
    }
}

#[test]
fn evaluator_matches_brute_force() {
    let t = graph_theory();
    let models = naive::models(&t, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..300 {
        let ctx = k % 3;
        let f = if k % 2 == 0 {
            random_coherent_formula(&mut rng, t.language(), ctx, 4)
        } else {
            random_formula(&mut rng, t.language(), ctx, 4)
        };
        for m in &models {
            assert_eq!(naive::as_set(&eval_formula(&f, m).unwrap()), naive::eval(&f, m), "{f}");
        }
    }
}

#[test]
fn normal_form_matches_brute_force() {
    let t = graph_theory();
    let models = naive::models(&t, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for k in 0..200 {
        let f = random_coherent_formula(&mut rng, t.language(), k % 3, 4);
        let nf = coherent_normal_form(&f).unwrap();
        for m in &models {
            assert_eq!(naive::eval(&nf, m), naive::eval(&f, m), "{f}");
        }
    }
}

#[test]
fn groupoid_matches_brute_force() {
    for (t, cap) in [(graph_theory(), 3), (linear_order_theory(), 3)] {
        let slice = build_groupoid_slice(&t, cap, 1_000_000).unwrap();
        let models = slice.models();
        let mut expected = 0;
        for m in models {
            for n in models {
                expected += naive::isos(m, n).len();
            }
        }
        assert_eq!(slice.morphisms().len(), expected);
        for g in slice.morphisms() {
            assert!(naive::is_iso(&models[g.source], &models[g.target], &g.permutation));
        }
        let autos = slice.automorphism_counts();
        for (i, m) in models.iter().enumerate() {
            assert_eq!(autos[i], naive::isos(m, m).len());
        }
    }
}
