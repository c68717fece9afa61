mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::{all_tuples, eval, load};
use lawvere::{enumerate_homs, enumerate_models, free_algebra, EnumOptions, FreeAlgebraResult, FreeBounds, Term};

/// Every semilattice term over `n` variables of depth at most `depth`.
fn meet_terms(theory: &lawvere::Theory, n: usize, depth: usize) -> Vec<Term> {
    let meet = theory.symbol("meet").unwrap().clone();
    let mut terms: Vec<Term> = (0..n).map(Term::Var).collect();
    for _ in 0..depth {
        let mut next = terms.clone();
        for a in &terms {
            for b in &terms {
                next.push(Term::apply2(&meet, a.clone(), b.clone()));
            }
        }
        next.sort();
        next.dedup();
        terms = next;
    }
    terms
}

#[test]
fn semilattice_free_algebras_match_aci_normal_forms() {
    let t = load("semilattice");
    for n in 1..=3 {
        let depth = if n == 3 { 2 } else { 3 };
        // modulo associativity, commutativity and idempotency a term is
        // determined by the set of variables it mentions
        let classes: BTreeSet<Vec<usize>> = meet_terms(&t, n, depth)
            .iter()
            .map(|x| x.variables().into_iter().collect::<BTreeSet<_>>().into_iter().collect())
            .collect();
        let free = free_algebra(&t, n, FreeBounds::default());
        let FreeAlgebraResult::Finite { algebra, generators, element_terms, .. } = free else { panic!("F({n}) is finite") };
        assert_eq!(algebra.size(), classes.len());
        assert_eq!(algebra.size(), (1 << n) - 1);
        for (i, term) in element_terms.iter().enumerate() {
            assert_eq!(eval(&algebra, term, &generators), i);
        }
    }
}

#[test]
fn universal_property_of_free_semilattice() {
    let t = load("semilattice");
    let FreeAlgebraResult::Finite { algebra, generators, .. } = free_algebra(&t, 2, FreeBounds::default()) else {
        panic!()
    };
    for target in enumerate_models(&t, 3, &EnumOptions::default()).unwrap() {
        let target = Arc::new(target);
        let homs = enumerate_homs(&algebra, &target).unwrap();
        for env in all_tuples(target.size(), 2) {
            let extending = homs.iter().filter(|h| generators.iter().zip(&env).all(|(&g, &v)| h.apply(g) == v)).count();
            assert_eq!(extending, 1, "assignment {env:?} into {target:?}");
        }
    }
}

#[test]
fn monoid_on_one_generator_keeps_growing() {
    let t = load("monoid");
    let FreeAlgebraResult::BoundExceeded { trace, .. } = free_algebra(&t, 1, FreeBounds::default()) else {
        panic!("free monoid on one generator is infinite")
    };
    assert!(trace.len() >= 3);
    assert!(trace.windows(2).all(|w| w[0] < w[1]), "{trace:?}");
}

#[test]
fn pointed_and_empty_cases() {
    let p = load("pointed");
    for n in 0..=3 {
        let free = free_algebra(&p, n, FreeBounds::default());
        assert_eq!(free.algebra().unwrap().size(), n + 1);
    }
    let s = load("semilattice");
    assert_eq!(free_algebra(&s, 0, FreeBounds::default()).algebra().unwrap().size(), 0);
}
