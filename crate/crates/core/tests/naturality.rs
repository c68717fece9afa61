mod common;

use std::sync::Arc;

use common::{eval, load};
use lawvere::{all_homs, enumerate_models, induced_family, EnumOptions, Term, Theory};
use proptest::prelude::*;

/// Every monoid term over `n` variables of depth at most `depth`.
fn all_terms(theory: &Theory, n: usize, depth: usize) -> Vec<Term> {
    let mul = theory.symbol("mul").unwrap().clone();
    let e = theory.symbol("e").unwrap().clone();
    let mut terms: Vec<Term> = (0..n).map(Term::Var).chain([Term::constant(&e)]).collect();
    for _ in 0..depth {
        let mut next: Vec<Term> = (0..n).map(Term::Var).chain([Term::constant(&e)]).collect();
        for a in &terms {
            for b in &terms {
                next.push(Term::apply2(&mul, a.clone(), b.clone()));
            }
        }
        terms = next;
    }
    terms
}

#[test]
fn every_shallow_monoid_term_is_natural() {
    let t = load("monoid");
    let models: Vec<_> = enumerate_models(&t, 3, &EnumOptions::up_to_iso()).unwrap().into_iter().map(Arc::new).collect();
    let homs = all_homs(&models).unwrap();
    let mut failures = 0;
    let mut checked = 0;
    for n in 0..=2 {
        for term in all_terms(&t, n, 3) {
            let family = induced_family(std::slice::from_ref(&term), n, &models).unwrap();
            checked += 1;
            if family.check_naturality(&homs).unwrap().is_some() {
                failures += 1;
            }
        }
    }
    assert_eq!(failures, 0);
    assert!(checked > 20_000);
}

fn arb_term(vars: usize) -> impl Strategy<Value = Term> {
    let t = load("group");
    let sig: Vec<_> = t.signature().to_vec();
    let leaf = (0..vars).prop_map(Term::Var).boxed();
    leaf.prop_recursive(4, 24, 2, move |inner| {
        let sig = sig.clone();
        (0..sig.len(), proptest::collection::vec(inner, 2)).prop_map(move |(i, args)| {
            let s = &sig[i];
            Term::App(s.clone(), args.into_iter().take(s.arity()).collect())
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_terms_are_natural(term in arb_term(2)) {
        let t = load("group");
        let models: Vec<_> = enumerate_models(&t, 4, &EnumOptions::up_to_iso()).unwrap().into_iter().map(Arc::new).collect();
        let family = induced_family(std::slice::from_ref(&term), 2, &models).unwrap();
        prop_assert!(family.check_naturality(&all_homs(&models).unwrap()).unwrap().is_none());
        for c in family.components() {
            for (row, env) in common::all_tuples(c.algebra.size(), 2).iter().enumerate() {
                prop_assert_eq!(c.table[row], eval(&c.algebra, &term, env));
            }
        }
    }
}
