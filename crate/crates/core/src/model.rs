//! Finite algebras of a theory: term evaluation, axiom checking and
//! canonical relabeling.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::term::{Equation, Term, Theory};

/// A carrier element, `0..size`.
pub type Elem = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("expected {expected} table(s), one per symbol, got {found}")]
    TableCount { expected: usize, found: usize },
    #[error("table for `{symbol}` has {found} entries, expected {expected}")]
    TableShape { symbol: String, expected: usize, found: usize },
    #[error("table for `{symbol}` holds {value}, outside a carrier of size {size}")]
    OutOfRange { symbol: String, value: usize, size: usize },
    #[error("term mentions `{0}`, which this theory does not declare")]
    UnknownSymbol(String),
    #[error("variable {index} has no value (environment of length {len})")]
    UnboundVariable { index: usize, len: usize },
    #[error("environment value {value} is outside a carrier of size {size}")]
    EnvOutOfRange { value: usize, size: usize },
    #[error("algebra belongs to theory `{found}`, expected `{expected}`")]
    TheoryMismatch { expected: String, found: String },
}

/// `base^exp` for table sizes.
pub(crate) fn pow(base: usize, exp: usize) -> usize {
    (0..exp).fold(1usize, |acc, _| acc.saturating_mul(base))
}

/// Writes the base-`size` digits of `index` into `out`, most significant
/// first. This is the row-major order of table cells.
pub(crate) fn decode(mut index: usize, size: usize, out: &mut [Elem]) {
    for slot in out.iter_mut().rev() {
        *slot = index % size;
        index /= size;
    }
}

pub(crate) fn encode(tuple: &[Elem], size: usize) -> usize {
    tuple.iter().fold(0, |acc, &x| acc * size + x)
}

/// All `len`-tuples over `0..size` in lexicographic order.
pub fn tuples(size: usize, len: usize) -> impl Iterator<Item = Vec<Elem>> {
    let count = pow(size, len);
    (0..count).map(move |i| {
        let mut t = vec![0; len];
        decode(i, size.max(1), &mut t);
        t
    })
}

/// A finite model candidate: one total table per signature symbol, in
/// signature order, stored row-major.
#[derive(Clone)]
pub struct FiniteAlgebra {
    theory: Arc<Theory>,
    size: usize,
    tables: Vec<Vec<Elem>>,
}

impl FiniteAlgebra {
    pub fn new(theory: Arc<Theory>, size: usize, tables: Vec<Vec<Elem>>) -> Result<Self, ModelError> {
        let sig = theory.signature();
        if tables.len() != sig.len() {
            return Err(ModelError::TableCount { expected: sig.len(), found: tables.len() });
        }
        for (symbol, table) in sig.iter().zip(&tables) {
            let expected = pow(size, symbol.arity());
            if table.len() != expected {
                return Err(ModelError::TableShape {
                    symbol: symbol.name().to_string(),
                    expected,
                    found: table.len(),
                });
            }
            if let Some(&value) = table.iter().find(|&&v| v >= size) {
                return Err(ModelError::OutOfRange { symbol: symbol.name().to_string(), value, size });
            }
        }
        Ok(FiniteAlgebra { theory, size, tables })
    }

    /// Tables given by closures, e.g. `|args| (args[0] + args[1]) % 4`.
    pub fn from_fns(
        theory: Arc<Theory>,
        size: usize,
        ops: &[&dyn Fn(&[Elem]) -> Elem],
    ) -> Result<Self, ModelError> {
        let tables = theory
            .signature()
            .iter()
            .zip(ops)
            .map(|(s, f)| tuples(size, s.arity()).map(|t| f(&t)).collect())
            .collect();
        FiniteAlgebra::new(theory, size, tables)
    }

    pub fn theory(&self) -> &Arc<Theory> {
        &self.theory
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn tables(&self) -> &[Vec<Elem>] {
        &self.tables
    }

    pub fn table(&self, symbol: &str) -> Option<&[Elem]> {
        self.theory.symbol_index(symbol).map(|i| self.tables[i].as_slice())
    }

    /// Applies the `op`-th signature symbol.
    pub fn apply(&self, op: usize, args: &[Elem]) -> Elem {
        self.tables[op][encode(args, self.size)]
    }

    /// All tables concatenated in signature order; the comparison key for
    /// canonical ordering.
    pub fn flat(&self) -> Vec<Elem> {
        self.tables.iter().flatten().copied().collect()
    }

    /// Evaluates `term` with `env[i]` substituted for variable `i`.
    pub fn evaluate(&self, term: &Term, env: &[Elem]) -> Result<Elem, ModelError> {
        if let Some(&value) = env.iter().find(|&&v| v >= self.size) {
            return Err(ModelError::EnvOutOfRange { value, size: self.size });
        }
        self.eval_unchecked(term, env)
    }

    fn eval_unchecked(&self, term: &Term, env: &[Elem]) -> Result<Elem, ModelError> {
        match term {
            Term::Var(i) => env
                .get(*i)
                .copied()
                .ok_or(ModelError::UnboundVariable { index: *i, len: env.len() }),
            Term::App(symbol, args) => {
                let op = self
                    .theory
                    .symbol_index(symbol.name())
                    .filter(|&i| self.theory.signature()[i].arity() == args.len())
                    .ok_or_else(|| ModelError::UnknownSymbol(symbol.name().to_string()))?;
                let mut cell = 0;
                for a in args {
                    cell = cell * self.size + self.eval_unchecked(a, env)?;
                }
                Ok(self.tables[op][cell])
            }
        }
    }

    /// Every failing instance of every equation, equations in theory order
    /// and environments in lexicographic order. Empty iff `self` is a model.
    pub fn check_model(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for eq in self.theory.equations() {
            out.extend(self.violations_of(eq));
        }
        out
    }

    pub fn is_model(&self) -> bool {
        self.theory
            .equations()
            .iter()
            .all(|eq| self.first_violation(eq).is_none())
    }

    /// Failing environments of one equation, in lexicographic order.
    pub fn violations_of(&self, eq: &Equation) -> Vec<Violation> {
        let prog = Compiled::pair(&self.theory, eq).expect("equation over this signature");
        let mut stack = Vec::new();
        tuples(self.size, eq.var_count)
            .filter_map(|env| {
                let (l, r) = prog.eval_pair(self, &env, &mut stack);
                (l != r).then(|| Violation { equation: eq.clone(), env, lhs_value: l, rhs_value: r })
            })
            .collect()
    }

    pub fn first_violation(&self, eq: &Equation) -> Option<Violation> {
        let prog = Compiled::pair(&self.theory, eq).ok()?;
        let mut stack = Vec::new();
        let mut env = vec![0; eq.var_count];
        for i in 0..pow(self.size, eq.var_count) {
            decode(i, self.size, &mut env);
            let (l, r) = prog.eval_pair(self, &env, &mut stack);
            if l != r {
                return Some(Violation { equation: eq.clone(), env, lhs_value: l, rhs_value: r });
            }
        }
        None
    }

    /// Relabels the carrier along `perm` (old element `a` becomes
    /// `perm[a]`).
    pub fn permute(&self, perm: &[Elem]) -> FiniteAlgebra {
        assert_eq!(perm.len(), self.size, "permutation of the wrong length");
        let mut inverse = vec![0; self.size];
        for (a, &b) in perm.iter().enumerate() {
            inverse[b] = a;
        }
        let mut args = Vec::new();
        let tables = self
            .theory
            .signature()
            .iter()
            .zip(&self.tables)
            .map(|(symbol, table)| {
                args.resize(symbol.arity(), 0);
                (0..table.len())
                    .map(|cell| {
                        decode(cell, self.size, &mut args);
                        let old: usize = args.iter().fold(0, |acc, &b| acc * self.size + inverse[b]);
                        perm[table[old]]
                    })
                    .collect()
            })
            .collect();
        FiniteAlgebra { theory: self.theory.clone(), size: self.size, tables }
    }

    /// The lexicographically least relabeling of `self` over all carrier
    /// permutations. Isomorphic algebras have identical canonical forms.
    pub fn canonicalize(&self) -> FiniteAlgebra {
        let mut best = self.clone();
        let mut best_flat = best.flat();
        let mut perm: Vec<Elem> = (0..self.size).collect();
        while next_permutation(&mut perm) {
            let candidate = self.permute(&perm);
            let flat = candidate.flat();
            if flat < best_flat {
                best = candidate;
                best_flat = flat;
            }
        }
        best
    }

    pub fn is_isomorphic(&self, other: &FiniteAlgebra) -> bool {
        self.size == other.size && self.canonicalize().tables == other.canonicalize().tables
    }
}

/// Advances to the next permutation in lexicographic order.
pub(crate) fn next_permutation(perm: &mut [usize]) -> bool {
    if perm.len() < 2 {
        return false;
    }
    let mut i = perm.len() - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = perm.len() - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

impl PartialEq for FiniteAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.size == other.size
            && self.tables == other.tables
            && (Arc::ptr_eq(&self.theory, &other.theory) || self.theory == other.theory)
    }
}

impl Eq for FiniteAlgebra {}

impl PartialOrd for FiniteAlgebra {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Smaller carriers first, then flattened tables.
impl Ord for FiniteAlgebra {
    fn cmp(&self, other: &Self) -> Ordering {
        self.size
            .cmp(&other.size)
            .then_with(|| self.tables.iter().flatten().cmp(other.tables.iter().flatten()))
    }
}

impl std::hash::Hash for FiniteAlgebra {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.size.hash(state);
        self.tables.hash(state);
    }
}

impl fmt::Debug for FiniteAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("FiniteAlgebra");
        d.field("theory", &self.theory.name()).field("size", &self.size);
        for (s, t) in self.theory.signature().iter().zip(&self.tables) {
            d.field(s.name(), t);
        }
        d.finish()
    }
}

/// An equation instance that fails in an algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub equation: Equation,
    pub env: Vec<Elem>,
    pub lhs_value: Elem,
    pub rhs_value: Elem,
}

/// Postfix form of a term over a fixed signature, for hot evaluation
/// loops.
#[derive(Clone, Debug)]
pub(crate) struct Compiled {
    code: Vec<Instr>,
    split: usize,
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum Instr {
    Var(usize),
    Apply { op: usize, arity: usize },
}

impl Compiled {
    pub(crate) fn term(theory: &Theory, term: &Term) -> Result<Self, ModelError> {
        let mut code = Vec::new();
        compile_into(theory, term, &mut code)?;
        let split = code.len();
        Ok(Compiled { code, split })
    }

    /// Both sides of an equation, evaluated together.
    pub(crate) fn pair(theory: &Theory, eq: &Equation) -> Result<Self, ModelError> {
        let mut code = Vec::new();
        compile_into(theory, &eq.lhs, &mut code)?;
        let split = code.len();
        compile_into(theory, &eq.rhs, &mut code)?;
        Ok(Compiled { code, split })
    }

    fn run(code: &[Instr], alg: &FiniteAlgebra, env: &[Elem], stack: &mut Vec<Elem>) -> Elem {
        stack.clear();
        for instr in code {
            match *instr {
                Instr::Var(i) => stack.push(env[i]),
                Instr::Apply { op, arity } => {
                    let base = stack.len() - arity;
                    let cell = stack[base..].iter().fold(0, |acc, &x| acc * alg.size + x);
                    stack.truncate(base);
                    stack.push(alg.tables[op][cell]);
                }
            }
        }
        stack[0]
    }

    pub(crate) fn halves(&self) -> (&[Instr], &[Instr]) {
        self.code.split_at(self.split)
    }

    pub(crate) fn eval(&self, alg: &FiniteAlgebra, env: &[Elem], stack: &mut Vec<Elem>) -> Elem {
        Self::run(&self.code[..self.split], alg, env, stack)
    }

    pub(crate) fn eval_pair(&self, alg: &FiniteAlgebra, env: &[Elem], stack: &mut Vec<Elem>) -> (Elem, Elem) {
        (
            Self::run(&self.code[..self.split], alg, env, stack),
            Self::run(&self.code[self.split..], alg, env, stack),
        )
    }
}

fn compile_into(theory: &Theory, term: &Term, code: &mut Vec<Instr>) -> Result<(), ModelError> {
    match term {
        Term::Var(i) => code.push(Instr::Var(*i)),
        Term::App(symbol, args) => {
            let op = theory
                .symbol_index(symbol.name())
                .filter(|&i| theory.signature()[i].arity() == args.len())
                .ok_or_else(|| ModelError::UnknownSymbol(symbol.name().to_string()))?;
            for a in args {
                compile_into(theory, a, code)?;
            }
            code.push(Instr::Apply { op, arity: args.len() });
        }
    }
    Ok(())
}

/// Algebras used by unit tests across the crate.
#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::term::fixtures::{group, monoid};

    /// Z_n as a monoid: addition mod n, identity 0.
    pub fn cyclic_monoid(n: usize) -> FiniteAlgebra {
        FiniteAlgebra::from_fns(Arc::new(monoid()), n, &[&|a| (a[0] + a[1]) % n, &|_| 0]).unwrap()
    }

    /// Z_n as a group.
    pub fn cyclic_group(theory: &Arc<Theory>, n: usize) -> FiniteAlgebra {
        FiniteAlgebra::from_fns(
            theory.clone(),
            n,
            &[&|a| (a[0] + a[1]) % n, &|_| 0, &|a| (n - a[0]) % n],
        )
        .unwrap()
    }

    pub fn klein(theory: &Arc<Theory>) -> FiniteAlgebra {
        FiniteAlgebra::from_fns(theory.clone(), 4, &[&|a| a[0] ^ a[1], &|_| 0, &|a| a[0]]).unwrap()
    }

    pub fn or_monoid() -> FiniteAlgebra {
        FiniteAlgebra::from_fns(Arc::new(monoid()), 2, &[&|a| a[0] | a[1], &|_| 0]).unwrap()
    }

    pub fn group_theory() -> Arc<Theory> {
        Arc::new(group())
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::term::fixtures::{m, monoid, unit, x};
    use proptest::prelude::*;

    #[test]
    fn evaluate_examples() {
        let z2 = cyclic_monoid(2);
        let z3 = cyclic_monoid(3);
        assert_eq!(z3.evaluate(&x(0), &[2]).unwrap(), 2);
        assert_eq!(z2.evaluate(&m(x(0), x(0)), &[1]).unwrap(), 0);
        assert_eq!(or_monoid().evaluate(&m(x(0), x(1)), &[1, 0]).unwrap(), 1);
        assert!(matches!(z2.evaluate(&x(1), &[1]), Err(ModelError::UnboundVariable { .. })));
        assert!(matches!(z2.evaluate(&x(0), &[2]), Err(ModelError::EnvOutOfRange { .. })));
    }

    #[test]
    fn check_model_examples() {
        assert!(cyclic_monoid(2).check_model().is_empty());

        let theory = Arc::new(monoid());
        let sub = FiniteAlgebra::from_fns(theory.clone(), 3, &[&|a| (a[0] + 3 - a[1]) % 3, &|_| 0]).unwrap();
        let v = sub.violations_of(&theory.equations()[0]);
        assert_eq!(v[0].env, vec![0, 0, 1]);
        let at_111 = v.iter().find(|v| v.env == vec![1, 1, 1]).unwrap();
        assert_eq!((at_111.lhs_value, at_111.rhs_value), (2, 1));

        let bad_unit = FiniteAlgebra::new(theory.clone(), 2, vec![vec![0, 1, 1, 0], vec![1]]).unwrap();
        let v = bad_unit.check_model();
        let left = v.iter().find(|v| v.equation.name == "left_unit").unwrap();
        assert_eq!((left.env.clone(), left.lhs_value, left.rhs_value), (vec![0], 1, 0));
    }

    #[test]
    fn shape_errors() {
        let theory = Arc::new(monoid());
        assert!(matches!(
            FiniteAlgebra::new(theory.clone(), 2, vec![vec![0, 1, 1]]),
            Err(ModelError::TableCount { .. })
        ));
        assert!(matches!(
            FiniteAlgebra::new(theory.clone(), 2, vec![vec![0, 1, 1], vec![0]]),
            Err(ModelError::TableShape { .. })
        ));
        assert!(matches!(
            FiniteAlgebra::new(theory, 2, vec![vec![0, 1, 1, 2], vec![0]]),
            Err(ModelError::OutOfRange { .. })
        ));
    }

    #[test]
    fn canonical_forms() {
        let z2 = cyclic_monoid(2);
        assert_eq!(z2.canonicalize(), z2);

        let theory = z2.theory().clone();
        let shifted = FiniteAlgebra::new(theory, 2, vec![vec![1, 0, 0, 1], vec![1]]).unwrap();
        assert!(shifted.is_model());
        let canon = shifted.canonicalize();
        assert_eq!(canon.tables(), &[vec![0, 1, 1, 0], vec![0]]);
        assert_eq!(canon.table("e").unwrap(), &[0]);
    }

    #[test]
    fn permute_is_an_isomorphism() {
        let z3 = cyclic_monoid(3);
        let p = z3.permute(&[2, 0, 1]);
        assert!(p.is_model());
        // identity element 0 moved to 2
        assert_eq!(p.table("e").unwrap(), &[2]);
        assert_eq!(p.evaluate(&m(x(0), unit()), &[1]).unwrap(), 1);
    }

    proptest! {
        #[test]
        fn canonicalize_is_orbit_invariant(seed in 0usize..10_000, n in 1usize..5) {
            let g = group_theory();
            let base = if n == 4 && seed % 2 == 0 { klein(&g) } else { cyclic_group(&g, n) };
            let mut perm: Vec<usize> = (0..n).collect();
            for _ in 0..(seed % 24) {
                if !next_permutation(&mut perm) {
                    perm.sort();
                }
            }
            let moved = base.permute(&perm);
            prop_assert!(moved.is_model());
            prop_assert_eq!(moved.canonicalize(), base.canonicalize());
        }

        #[test]
        fn evaluation_commutes_with_substitution(env in proptest::collection::vec(0usize..3, 2)) {
            use crate::term::substitute;
            let z3 = cyclic_monoid(3);
            let t = m(x(0), m(x(1), x(0)));
            let sub = [m(x(1), x(1)), m(x(0), unit())];
            let direct = z3.evaluate(&substitute(&t, &sub).unwrap(), &env).unwrap();
            let inner: Vec<usize> = sub.iter().map(|s| z3.evaluate(s, &env).unwrap()).collect();
            prop_assert_eq!(direct, z3.evaluate(&t, &inner).unwrap());
        }
    }
}
