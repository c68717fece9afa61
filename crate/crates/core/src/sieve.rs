//! Validity of equations over every model up to a size bound.
//!
//! Nothing here claims unbounded validity: a surviving equation is only
//! known to hold in all models of size at most `k`. A refutation is a
//! concrete model and environment, the first one met when models are taken
//! in canonical order (smaller first, then lexicographic tables) and
//! environments lexicographically.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::enumerate::{enumerate_models, EnumError, EnumOptions};
use crate::model::{decode, pow, Compiled, Elem, FiniteAlgebra, ModelError};
use crate::record::algebra_hash;
use crate::term::{Equation, Term, TermError, Theory};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SieveError {
    #[error(transparent)]
    Enumeration(#[from] EnumError),
    #[error("equation `{equation}` is not over the signature: {source}")]
    IllFormed {
        equation: String,
        #[source]
        source: TermError,
    },
}

/// A model and environment where two terms disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub model: Arc<FiniteAlgebra>,
    pub env: Vec<Elem>,
    pub lhs_value: Elem,
    pub rhs_value: Elem,
}

impl Counterexample {
    /// Evaluates both sides again from scratch.
    pub fn reproduces(&self, lhs: &Term, rhs: &Term) -> Result<bool, ModelError> {
        let l = self.model.evaluate(lhs, &self.env)?;
        let r = self.model.evaluate(rhs, &self.env)?;
        Ok(l == self.lhs_value && r == self.rhs_value && l != r)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validity {
    ValidUpTo(usize),
    Refuted(Counterexample),
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::ValidUpTo(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equivalence {
    EquivalentUpTo(usize),
    Distinguished(Counterexample),
}

/// An equation dropped because an earlier candidate is the same up to
/// renaming of variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Duplicate {
    pub equation: Equation,
    pub same_as: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SieveOutcome {
    pub k: usize,
    pub surviving: Vec<Equation>,
    pub refuted: Vec<(Equation, Counterexample)>,
    pub duplicates: Vec<Duplicate>,
}

impl SieveOutcome {
    pub fn report(&self) -> SieveReport {
        SieveReport {
            k: self.k,
            surviving: self.surviving.iter().map(|e| e.name.clone()).collect(),
            refuted: self
                .refuted
                .iter()
                .map(|(eq, c)| RefutedEntry {
                    eq: eq.name.clone(),
                    model: algebra_hash(&c.model),
                    size: c.model.size(),
                    env: c.env.clone(),
                    lhs: c.lhs_value,
                    rhs: c.rhs_value,
                })
                .collect(),
            duplicates: self
                .duplicates
                .iter()
                .map(|d| DuplicateEntry { eq: d.equation.name.clone(), same_as: d.same_as.clone() })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SieveReport {
    pub k: usize,
    pub surviving: Vec<String>,
    pub refuted: Vec<RefutedEntry>,
    pub duplicates: Vec<DuplicateEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RefutedEntry {
    pub eq: String,
    pub model: String,
    pub size: usize,
    pub env: Vec<Elem>,
    pub lhs: Elem,
    pub rhs: Elem,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DuplicateEntry {
    pub eq: String,
    pub same_as: String,
}

/// The models of a theory up to size `k`, one per isomorphism class,
/// shared by every check.
#[derive(Clone, Debug)]
pub struct Sieve {
    theory: Arc<Theory>,
    k: usize,
    models: Vec<Arc<FiniteAlgebra>>,
}

impl Sieve {
    pub fn new(theory: &Arc<Theory>, k: usize) -> Result<Self, SieveError> {
        let models = enumerate_models(theory, k, &EnumOptions { up_to_iso: true, jobs: 0, ..Default::default() })?;
        Ok(Sieve::from_models(theory, k, models))
    }

    /// Uses `models` as given; they must be sorted canonically and cover
    /// every model of size at most `k` up to isomorphism.
    pub fn from_models(theory: &Arc<Theory>, k: usize, models: Vec<FiniteAlgebra>) -> Self {
        Sieve { theory: theory.clone(), k, models: models.into_iter().map(Arc::new).collect() }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn models(&self) -> &[Arc<FiniteAlgebra>] {
        &self.models
    }

    fn first_disagreement(&self, name: &str, lhs: &Term, rhs: &Term, vars: usize) -> Result<Option<Counterexample>, SieveError> {
        let ill = |source| SieveError::IllFormed { equation: name.to_string(), source };
        self.theory.check_term(lhs, vars).map_err(ill)?;
        self.theory.check_term(rhs, vars).map_err(ill)?;
        let pair = Equation { name: name.to_string(), var_count: vars, lhs: lhs.clone(), rhs: rhs.clone() };
        let prog = Compiled::pair(&self.theory, &pair).expect("checked against the signature");
        let mut stack = Vec::new();
        let mut env = vec![0; vars];
        for model in &self.models {
            for i in 0..pow(model.size(), vars) {
                decode(i, model.size(), &mut env);
                let (l, r) = prog.eval_pair(model, &env, &mut stack);
                if l != r {
                    return Ok(Some(Counterexample { model: model.clone(), env, lhs_value: l, rhs_value: r }));
                }
            }
        }
        Ok(None)
    }

    pub fn check(&self, eq: &Equation) -> Result<Validity, SieveError> {
        Ok(match self.first_disagreement(&eq.name, &eq.lhs, &eq.rhs, eq.var_count)? {
            None => Validity::ValidUpTo(self.k),
            Some(c) => Validity::Refuted(c),
        })
    }

    /// Splits candidates into survivors and refuted ones, keeping input
    /// order in each part. Repeats up to variable renaming are dropped and
    /// noted.
    pub fn sieve(&self, candidates: &[Equation]) -> Result<SieveOutcome, SieveError> {
        let mut unique: Vec<&Equation> = Vec::new();
        let mut duplicates = Vec::new();
        for eq in candidates {
            let key = eq.alpha_key();
            match unique.iter().find(|u| u.alpha_key() == key) {
                Some(first) => duplicates.push(Duplicate { equation: eq.clone(), same_as: first.name.clone() }),
                None => unique.push(eq),
            }
        }
        let verdicts: Vec<Validity> = unique.par_iter().map(|eq| self.check(eq)).collect::<Result<_, _>>()?;
        let mut outcome = SieveOutcome { k: self.k, surviving: Vec::new(), refuted: Vec::new(), duplicates };
        for (eq, verdict) in unique.into_iter().zip(verdicts) {
            match verdict {
                Validity::ValidUpTo(_) => outcome.surviving.push(eq.clone()),
                Validity::Refuted(c) => outcome.refuted.push((eq.clone(), c)),
            }
        }
        Ok(outcome)
    }

    /// Whether two terms over `vars` variables denote the same operation
    /// in every model of size at most `k`.
    pub fn equivalent(&self, lhs: &Term, rhs: &Term, vars: usize) -> Result<Equivalence, SieveError> {
        Ok(match self.first_disagreement("equivalence", lhs, rhs, vars)? {
            None => Equivalence::EquivalentUpTo(self.k),
            Some(c) => Equivalence::Distinguished(c),
        })
    }
}

pub fn check_validity(theory: &Arc<Theory>, eq: &Equation, k: usize) -> Result<Validity, SieveError> {
    Sieve::new(theory, k)?.check(eq)
}

pub fn sieve_candidates(theory: &Arc<Theory>, candidates: &[Equation], k: usize) -> Result<SieveOutcome, SieveError> {
    Sieve::new(theory, k)?.sieve(candidates)
}

pub fn syntactic_equivalence(theory: &Arc<Theory>, lhs: &Term, rhs: &Term, vars: usize, k: usize) -> Result<Equivalence, SieveError> {
    Sieve::new(theory, k)?.equivalent(lhs, rhs, vars)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::fixtures::{group, m, monoid, x};

    fn comm() -> Equation {
        Equation::new("comm", 2, m(x(0), x(1)), m(x(1), x(0))).unwrap()
    }

    #[test]
    fn axioms_survive() {
        let t = Arc::new(monoid());
        let sieve = Sieve::new(&t, 3).unwrap();
        for eq in t.equations() {
            assert_eq!(sieve.check(eq).unwrap(), Validity::ValidUpTo(3));
        }
    }

    #[test]
    fn commutativity_refuted_at_size_three() {
        let t = Arc::new(monoid());
        assert!(check_validity(&t, &comm(), 2).unwrap().is_valid());
        let Validity::Refuted(c) = check_validity(&t, &comm(), 3).unwrap() else { panic!("should be refuted") };
        assert_eq!(c.model.size(), 3);
        assert!(c.reproduces(&comm().lhs, &comm().rhs).unwrap());
        let (a, b) = (c.env[0], c.env[1]);
        assert_ne!(a, b);
        // the two non-identity elements form a left- or right-zero band
        let mul = |p, q| c.model.evaluate(&m(x(0), x(1)), &[p, q]).unwrap();
        let left_zero = mul(a, b) == a && mul(b, a) == b;
        let right_zero = mul(a, b) == b && mul(b, a) == a;
        assert!(left_zero || right_zero);
    }

    #[test]
    fn idempotency_fails_in_groups() {
        let t = Arc::new(group());
        let idem = Equation::new("idem", 1, m(x(0), x(0)), x(0)).unwrap();
        let Validity::Refuted(c) = check_validity(&t, &idem, 3).unwrap() else { panic!() };
        assert_eq!((c.model.size(), c.env.clone(), c.lhs_value, c.rhs_value), (2, vec![1], 0, 1));
    }

    #[test]
    fn sieve_partitions_and_dedups() {
        let t = Arc::new(monoid());
        let assoc = t.equations()[0].clone();
        let renamed = Equation::new("comm2", 2, m(x(1), x(0)), m(x(0), x(1))).unwrap();
        let out = sieve_candidates(&t, &[assoc.clone(), comm(), comm(), renamed], 3).unwrap();
        assert_eq!(out.surviving, vec![assoc]);
        assert_eq!(out.refuted.len(), 1);
        assert_eq!(out.duplicates.len(), 2);
        assert!(out.duplicates.iter().all(|d| d.same_as == "comm"));

        let empty = sieve_candidates(&t, &[], 3).unwrap();
        assert!(empty.surviving.is_empty() && empty.refuted.is_empty());
    }

    #[test]
    fn equivalence() {
        let t = Arc::new(monoid());
        let sieve = Sieve::new(&t, 3).unwrap();
        let l = m(m(x(0), x(1)), x(2));
        let r = m(x(0), m(x(1), x(2)));
        assert_eq!(sieve.equivalent(&l, &r, 3).unwrap(), Equivalence::EquivalentUpTo(3));
        assert_eq!(sieve.equivalent(&l, &l, 3).unwrap(), Equivalence::EquivalentUpTo(3));
        let Equivalence::Distinguished(c) = sieve.equivalent(&m(x(0), x(1)), &m(x(1), x(0)), 2).unwrap() else { panic!() };
        assert_eq!(c.model.size(), 3);
        assert!(sieve.equivalent(&x(3), &x(0), 2).is_err());
    }

    #[test]
    fn monotone_in_k() {
        let t = Arc::new(monoid());
        for k in 1..=3 {
            let here = check_validity(&t, &comm(), k).unwrap();
            let next = check_validity(&t, &comm(), k + 1).unwrap();
            if !here.is_valid() {
                assert!(!next.is_valid());
            }
        }
    }
}
