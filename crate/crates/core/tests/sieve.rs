mod common;

use std::sync::Arc;

use common::{eval, load};
use lawvere::clone::{validate_theory_morphism, ModelCategory};
use lawvere::dsl::{morphism_endpoints, parse_theory_morphism};
use lawvere::{induced_family, parse_candidates, parse_term, Equivalence, Sieve, Validity};
use proptest::prelude::*;

fn candidates(theory: &str, file: &str) -> Vec<lawvere::Equation> {
    let text = std::fs::read_to_string(common::theory_path(file)).unwrap();
    parse_candidates(&text, &load(theory)).unwrap()
}

#[test]
fn commutativity_needs_three_elements() {
    let t = load("monoid");
    let eqs = candidates("monoid", "monoid-candidates.eqs");
    let comm = eqs.iter().find(|e| e.name == "comm").unwrap();
    let Validity::Refuted(c) = Sieve::new(&t, 3).unwrap().check(comm).unwrap() else { panic!() };
    assert_eq!(c.model.size(), 3);
    let (l, r) = (eval(&c.model, &comm.lhs, &c.env), eval(&c.model, &comm.rhs, &c.env));
    assert_ne!(l, r);
    assert_eq!((l, r), (c.lhs_value, c.rhs_value));

    let assoc = eqs.iter().find(|e| e.name == "assoc").unwrap();
    assert_eq!(Sieve::new(&t, 4).unwrap().check(assoc).unwrap(), Validity::ValidUpTo(4));
}

#[test]
fn candidate_file_outcome() {
    let t = load("monoid");
    let out = Sieve::new(&t, 3).unwrap().sieve(&candidates("monoid", "monoid-candidates.eqs")).unwrap();
    let names = |v: &[lawvere::Equation]| v.iter().map(|e| e.name.clone()).collect::<Vec<_>>();
    assert_eq!(names(&out.surviving), vec!["assoc", "unit_swap"]);
    let refuted: Vec<&str> = out.refuted.iter().map(|(e, _)| e.name.as_str()).collect();
    assert_eq!(refuted, vec!["comm", "idem"]);
    assert_eq!(out.duplicates.len(), 1);
    for (eq, c) in &out.refuted {
        assert_ne!(eval(&c.model, &eq.lhs, &c.env), eval(&c.model, &eq.rhs, &c.env));
    }
}

#[test]
fn ring_consequences() {
    let t = load("ring");
    let out = Sieve::new(&t, 4).unwrap().sieve(&candidates("ring", "ring-candidates.eqs")).unwrap();
    let survivors: Vec<&str> = out.surviving.iter().map(|e| e.name.as_str()).collect();
    // the smallest noncommutative ring with unit has 8 elements
    assert_eq!(survivors, vec!["mul_comm", "zero_mul", "neg_mul"]);
    let refuted: Vec<&str> = out.refuted.iter().map(|(e, _)| e.name.as_str()).collect();
    assert_eq!(refuted, vec!["square_idem"]);
}

#[test]
fn morphism_files() {
    let load_morphism = |file: &str| {
        let text = std::fs::read_to_string(common::theory_path(file)).unwrap();
        let (s, t) = morphism_endpoints(&text).unwrap();
        let strip = |p: String| load(p.trim_end_matches(".thy"));
        parse_theory_morphism(&text, strip(s), strip(t)).unwrap()
    };
    assert_eq!(validate_theory_morphism(&load_morphism("monoid-opposite.thm"), 3).unwrap(), None);
    assert_eq!(validate_theory_morphism(&load_morphism("monoid-in-group.thm"), 3).unwrap(), None);
    let bad = validate_theory_morphism(&load_morphism("group-in-monoid.thm"), 2).unwrap().unwrap();
    assert_eq!(bad.equation.name, "left_inv");
    let c = bad.counterexample;
    assert_ne!(eval(&c.model, &bad.translated.lhs, &c.env), eval(&c.model, &bad.translated.rhs, &c.env));
}

fn arb_monoid_term() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![Just("x".to_string()), Just("y".to_string()), Just("e()".to_string())];
    leaf.prop_recursive(3, 12, 2, |inner| (inner.clone(), inner).prop_map(|(a, b)| format!("mul({a},{b})")))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn equivalence_is_equality_of_induced_families(a in arb_monoid_term(), b in arb_monoid_term()) {
        let t = load("monoid");
        let vars = ["x".to_string(), "y".to_string()];
        let (ta, _) = parse_term(&a, &t, Some(&vars)).unwrap();
        let (tb, _) = parse_term(&b, &t, Some(&vars)).unwrap();
        let cat = ModelCategory::new(&t, 3).unwrap();
        let sieve = Sieve::from_models(&t, 3, cat.algebras().iter().map(|x| (**x).clone()).collect());
        let same = induced_family(&[ta.clone()], 2, cat.algebras()).unwrap() == induced_family(&[tb.clone()], 2, cat.algebras()).unwrap();
        let equivalent = matches!(sieve.equivalent(&ta, &tb, 2).unwrap(), Equivalence::EquivalentUpTo(3));
        prop_assert_eq!(same, equivalent);
    }

    #[test]
    fn validity_is_monotone(a in arb_monoid_term(), b in arb_monoid_term()) {
        let t = Arc::new((*load("monoid")).clone());
        let vars = ["x".to_string(), "y".to_string()];
        let (ta, _) = parse_term(&a, &t, Some(&vars)).unwrap();
        let (tb, _) = parse_term(&b, &t, Some(&vars)).unwrap();
        let small = Sieve::new(&t, 2).unwrap().equivalent(&ta, &tb, 2).unwrap();
        let large = Sieve::new(&t, 3).unwrap().equivalent(&ta, &tb, 2).unwrap();
        if matches!(small, Equivalence::Distinguished(_)) {
            prop_assert!(matches!(large, Equivalence::Distinguished(_)));
        }
    }
}
