//! Terms, equations, theory presentations and the morphisms of a Lawvere
//! theory.
//!
//! Variables are 0-based indices. A term is well-formed over `n` variables
//! when every index it mentions is below `n`; a morphism `n -> m` of the
//! theory is an `m`-tuple of such terms, and composition is simultaneous
//! substitution.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use thiserror::Error;

/// A named operation symbol. Arity 0 is a constant.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    name: Arc<str>,
    arity: usize,
}

impl Symbol {
    pub fn new(name: impl AsRef<str>, arity: usize) -> Self {
        Symbol { name: Arc::from(name.as_ref()), arity }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_constant(&self) -> bool {
        self.arity == 0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name, self.arity)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("variable {index} is out of range for {var_count} variable(s)")]
    Malformed { index: usize, var_count: usize },
    #[error("symbol `{symbol}` expects {expected} argument(s), got {found}")]
    ArityMismatch { symbol: String, expected: usize, found: usize },
    #[error("symbol `{0}` is not in the signature")]
    UnknownSymbol(String),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("cannot compose {first_domain}->{first_codomain} with {second_domain}->{second_codomain}")]
    Composition {
        first_domain: usize,
        first_codomain: usize,
        second_domain: usize,
        second_codomain: usize,
    },
    #[error("theory morphism assigns nothing to `{0}`")]
    IncompleteMorphism(String),
}

/// A term over numbered variables.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(usize),
    App(Symbol, Vec<Term>),
}

impl Term {
    pub fn var(index: usize) -> Self {
        Term::Var(index)
    }

    /// Builds an application, checking the argument count.
    pub fn app(symbol: &Symbol, args: Vec<Term>) -> Result<Self, TermError> {
        if args.len() != symbol.arity() {
            return Err(TermError::ArityMismatch {
                symbol: symbol.name().to_string(),
                expected: symbol.arity(),
                found: args.len(),
            });
        }
        Ok(Term::App(symbol.clone(), args))
    }

    /// `symbol()` for a constant. Panics if the symbol is not 0-ary.
    pub fn constant(symbol: &Symbol) -> Self {
        assert!(symbol.is_constant(), "{} is not a constant", symbol);
        Term::App(symbol.clone(), Vec::new())
    }

    /// Binary application helper used all over the tests.
    pub fn apply2(symbol: &Symbol, lhs: Term, rhs: Term) -> Self {
        assert_eq!(symbol.arity(), 2, "{} is not binary", symbol);
        Term::App(symbol.clone(), vec![lhs, rhs])
    }

    /// Largest variable index plus one (0 for closed terms).
    pub fn var_bound(&self) -> usize {
        match self {
            Term::Var(i) => i + 1,
            Term::App(_, args) => args.iter().map(Term::var_bound).max().unwrap_or(0),
        }
    }

    pub fn is_well_formed(&self, var_count: usize) -> bool {
        self.check_well_formed(var_count).is_ok()
    }

    pub fn check_well_formed(&self, var_count: usize) -> Result<(), TermError> {
        match self {
            Term::Var(i) if *i < var_count => Ok(()),
            Term::Var(i) => Err(TermError::Malformed { index: *i, var_count }),
            Term::App(symbol, args) => {
                if args.len() != symbol.arity() {
                    return Err(TermError::ArityMismatch {
                        symbol: symbol.name().to_string(),
                        expected: symbol.arity(),
                        found: args.len(),
                    });
                }
                args.iter().try_for_each(|a| a.check_well_formed(var_count))
            }
        }
    }

    /// Height of the term tree; variables and constants have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => args.iter().map(|a| a.depth() + 1).max().unwrap_or(0),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    /// Variables in order of first occurrence (left to right).
    pub fn variables(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<usize>) {
        match self {
            Term::Var(i) => {
                if !out.contains(i) {
                    out.push(*i);
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn symbols(&self) -> BTreeSet<&Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols<'a>(&'a self, out: &mut BTreeSet<&'a Symbol>) {
        if let Term::App(symbol, args) = self {
            out.insert(symbol);
            args.iter().for_each(|a| a.collect_symbols(out));
        }
    }

    /// Renames variables with `f`, keeping the shape.
    pub fn map_vars(&self, f: &impl Fn(usize) -> usize) -> Term {
        match self {
            Term::Var(i) => Term::Var(f(*i)),
            Term::App(symbol, args) => {
                Term::App(symbol.clone(), args.iter().map(|a| a.map_vars(f)).collect())
            }
        }
    }

    /// Orders smaller terms first, breaking ties structurally.
    pub fn size_cmp(&self, other: &Term) -> Ordering {
        self.size().cmp(&other.size()).then_with(|| self.cmp(other))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(i) => write!(f, "x{}", i),
            Term::App(symbol, args) => {
                write!(f, "{}(", symbol.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", a)?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Replaces every `Var(i)` in `term` by `env[i]`, simultaneously.
pub fn substitute(term: &Term, env: &[Term]) -> Result<Term, TermError> {
    match term {
        Term::Var(i) => env.get(*i).cloned().ok_or(TermError::Malformed {
            index: *i,
            var_count: env.len(),
        }),
        Term::App(symbol, args) => {
            let args = args
                .iter()
                .map(|a| substitute(a, env))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Term::App(symbol.clone(), args))
        }
    }
}

/// A universally quantified identity `lhs = rhs` over `var_count` variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Equation {
    pub name: String,
    pub var_count: usize,
    pub lhs: Term,
    pub rhs: Term,
}

impl Equation {
    pub fn new(name: impl Into<String>, var_count: usize, lhs: Term, rhs: Term) -> Result<Self, TermError> {
        lhs.check_well_formed(var_count)?;
        rhs.check_well_formed(var_count)?;
        Ok(Equation { name: name.into(), var_count, lhs, rhs })
    }

    /// Renumbers variables by first occurrence across `lhs` then `rhs` and
    /// drops unused ones. Two equations that differ only by a renaming of
    /// variables (or by their names) share this key.
    pub fn alpha_key(&self) -> (Term, Term) {
        let mut order = self.lhs.variables();
        for v in self.rhs.variables() {
            if !order.contains(&v) {
                order.push(v);
            }
        }
        let rename = |i: usize| order.iter().position(|&v| v == i).unwrap_or(i);
        (self.lhs.map_vars(&rename), self.rhs.map_vars(&rename))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoryError {
    #[error("duplicate operation symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("duplicate equation name `{0}`")]
    DuplicateEquation(String),
    #[error("equation `{equation}`: {source}")]
    Equation {
        equation: String,
        #[source]
        source: TermError,
    },
}

/// A finitary algebraic theory given by a signature and equations.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Theory {
    name: String,
    signature: Vec<Symbol>,
    equations: Vec<Equation>,
}

impl Theory {
    pub fn new(
        name: impl Into<String>,
        signature: Vec<Symbol>,
        equations: Vec<Equation>,
    ) -> Result<Self, TheoryError> {
        for (i, s) in signature.iter().enumerate() {
            if signature[..i].iter().any(|o| o.name() == s.name()) {
                return Err(TheoryError::DuplicateSymbol(s.name().to_string()));
            }
        }
        for (i, eq) in equations.iter().enumerate() {
            if equations[..i].iter().any(|o| o.name == eq.name) {
                return Err(TheoryError::DuplicateEquation(eq.name.clone()));
            }
        }
        let theory = Theory { name: name.into(), signature, equations };
        for eq in &theory.equations {
            theory
                .check_equation(eq)
                .map_err(|source| TheoryError::Equation { equation: eq.name.clone(), source })?;
        }
        Ok(theory)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn signature(&self) -> &[Symbol] {
        &self.signature
    }

    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }

    pub fn symbol(&self, name: &str) -> Option<&Symbol> {
        self.signature.iter().find(|s| s.name() == name)
    }

    pub fn symbol_index(&self, name: &str) -> Option<usize> {
        self.signature.iter().position(|s| s.name() == name)
    }

    pub fn has_constants(&self) -> bool {
        self.signature.iter().any(Symbol::is_constant)
    }

    /// Checks that `term` only uses symbols of this signature, with their
    /// declared arities, and is well-formed over `var_count` variables.
    pub fn check_term(&self, term: &Term, var_count: usize) -> Result<(), TermError> {
        term.check_well_formed(var_count)?;
        for s in term.symbols() {
            match self.symbol(s.name()) {
                Some(own) if own == s => {}
                Some(own) => {
                    return Err(TermError::ArityMismatch {
                        symbol: s.name().to_string(),
                        expected: own.arity(),
                        found: s.arity(),
                    })
                }
                None => return Err(TermError::UnknownSymbol(s.name().to_string())),
            }
        }
        Ok(())
    }

    pub fn check_equation(&self, eq: &Equation) -> Result<(), TermError> {
        self.check_term(&eq.lhs, eq.var_count)?;
        self.check_term(&eq.rhs, eq.var_count)
    }
}

/// A morphism `domain -> components.len()` of the Lawvere theory: a tuple
/// of terms over `domain` variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LawvereMorphism {
    domain: usize,
    components: Vec<Term>,
}

impl LawvereMorphism {
    pub fn new(domain: usize, components: Vec<Term>) -> Result<Self, TermError> {
        components.iter().try_for_each(|c| c.check_well_formed(domain))?;
        Ok(LawvereMorphism { domain, components })
    }

    pub fn identity(n: usize) -> Self {
        LawvereMorphism { domain: n, components: (0..n).map(Term::Var).collect() }
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn codomain(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Term] {
        &self.components
    }

    /// Diagrammatic composition: `self: n -> m` followed by `then: m -> p`.
    pub fn compose(&self, then: &LawvereMorphism) -> Result<LawvereMorphism, TermError> {
        if self.codomain() != then.domain {
            return Err(TermError::Composition {
                first_domain: self.domain,
                first_codomain: self.codomain(),
                second_domain: then.domain,
                second_codomain: then.codomain(),
            });
        }
        let components = then
            .components
            .iter()
            .map(|g| substitute(g, &self.components))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LawvereMorphism { domain: self.domain, components })
    }
}

/// `compose(f, g)` is `g` after `f`.
pub fn compose(f: &LawvereMorphism, g: &LawvereMorphism) -> Result<LawvereMorphism, TermError> {
    f.compose(g)
}

/// Interpretation of every source symbol of arity `a` as a target term
/// over `a` variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoryMorphism {
    name: String,
    source: Arc<Theory>,
    target: Arc<Theory>,
    assignment: IndexMap<String, Term>,
}

impl TheoryMorphism {
    pub fn new(
        name: impl Into<String>,
        source: Arc<Theory>,
        target: Arc<Theory>,
        assignment: IndexMap<String, Term>,
    ) -> Result<Self, TermError> {
        for (key, term) in &assignment {
            let symbol = source
                .symbol(key)
                .ok_or_else(|| TermError::UnknownSymbol(key.clone()))?;
            target.check_term(term, symbol.arity())?;
        }
        if let Some(missing) = source
            .signature()
            .iter()
            .find(|s| !assignment.contains_key(s.name()))
        {
            return Err(TermError::IncompleteMorphism(missing.name().to_string()));
        }
        // keep source signature order
        let assignment = source
            .signature()
            .iter()
            .map(|s| (s.name().to_string(), assignment[s.name()].clone()))
            .collect();
        Ok(TheoryMorphism { name: name.into(), source, target, assignment })
    }

    /// Every symbol sent to itself; `source`'s signature must be contained
    /// in `target`'s.
    pub fn inclusion(source: Arc<Theory>, target: Arc<Theory>) -> Result<Self, TermError> {
        let assignment = source
            .signature()
            .iter()
            .map(|s| {
                let args = (0..s.arity()).map(Term::Var).collect();
                (s.name().to_string(), Term::App(s.clone(), args))
            })
            .collect();
        let name = format!("{}->{}", source.name(), target.name());
        TheoryMorphism::new(name, source, target, assignment)
    }

    pub fn identity(theory: Arc<Theory>) -> Self {
        TheoryMorphism::inclusion(theory.clone(), theory).expect("identity is always valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &Arc<Theory> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Theory> {
        &self.target
    }

    pub fn assignment(&self) -> &IndexMap<String, Term> {
        &self.assignment
    }

    /// Rewrites a source term into the target theory.
    pub fn translate(&self, term: &Term) -> Result<Term, TermError> {
        match term {
            Term::Var(i) => Ok(Term::Var(*i)),
            Term::App(symbol, args) => {
                let image = self
                    .assignment
                    .get(symbol.name())
                    .ok_or_else(|| TermError::IncompleteMorphism(symbol.name().to_string()))?;
                let args = args
                    .iter()
                    .map(|a| self.translate(a))
                    .collect::<Result<Vec<_>, _>>()?;
                substitute(image, &args)
            }
        }
    }

    pub fn translate_equation(&self, eq: &Equation) -> Result<Equation, TermError> {
        Ok(Equation {
            name: eq.name.clone(),
            var_count: eq.var_count,
            lhs: self.translate(&eq.lhs)?,
            rhs: self.translate(&eq.rhs)?,
        })
    }
}

/// Test theories shared by unit tests across the crate.
#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn mul() -> Symbol {
        Symbol::new("mul", 2)
    }

    pub fn e() -> Symbol {
        Symbol::new("e", 0)
    }

    pub fn inv() -> Symbol {
        Symbol::new("inv", 1)
    }

    pub fn x(i: usize) -> Term {
        Term::Var(i)
    }

    pub fn m(a: Term, b: Term) -> Term {
        Term::apply2(&mul(), a, b)
    }

    pub fn unit() -> Term {
        Term::constant(&e())
    }

    pub fn monoid() -> Theory {
        Theory::new(
            "monoid",
            vec![mul(), e()],
            vec![
                Equation::new("assoc", 3, m(m(x(0), x(1)), x(2)), m(x(0), m(x(1), x(2)))).unwrap(),
                Equation::new("left_unit", 1, m(unit(), x(0)), x(0)).unwrap(),
                Equation::new("right_unit", 1, m(x(0), unit()), x(0)).unwrap(),
            ],
        )
        .unwrap()
    }

    pub fn group() -> Theory {
        let i = |t| Term::App(inv(), vec![t]);
        let mut eqs = monoid().equations().to_vec();
        eqs.push(Equation::new("left_inv", 1, m(i(x(0)), x(0)), unit()).unwrap());
        eqs.push(Equation::new("right_inv", 1, m(x(0), i(x(0))), unit()).unwrap());
        Theory::new("group", vec![mul(), e(), inv()], eqs).unwrap()
    }

    pub fn semilattice() -> Theory {
        let meet = Symbol::new("meet", 2);
        let mt = |a, b| Term::apply2(&meet, a, b);
        Theory::new(
            "semilattice",
            vec![meet.clone()],
            vec![
                Equation::new("assoc", 3, mt(mt(x(0), x(1)), x(2)), mt(x(0), mt(x(1), x(2)))).unwrap(),
                Equation::new("comm", 2, mt(x(0), x(1)), mt(x(1), x(0))).unwrap(),
                Equation::new("idem", 1, mt(x(0), x(0)), x(0)).unwrap(),
            ],
        )
        .unwrap()
    }

    pub fn pointed() -> Theory {
        Theory::new("pointed", vec![e()], vec![]).unwrap()
    }

    pub fn sets() -> Theory {
        Theory::new("sets", vec![], vec![]).unwrap()
    }

    pub fn opposite(theory: Arc<Theory>) -> TheoryMorphism {
        let mut assignment = IndexMap::new();
        assignment.insert("mul".to_string(), m(x(1), x(0)));
        assignment.insert("e".to_string(), unit());
        TheoryMorphism::new("opposite", theory.clone(), theory, assignment).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn substitute_examples() {
        assert_eq!(substitute(&x(0), &[x(0)]).unwrap(), x(0));
        assert_eq!(substitute(&m(x(0), x(1)), &[x(1), x(0)]).unwrap(), m(x(1), x(0)));
        assert_eq!(
            substitute(&m(x(0), unit()), &[m(x(0), x(1))]).unwrap(),
            m(m(x(0), x(1)), unit())
        );
        assert_eq!(
            substitute(&m(x(0), x(2)), &[x(0), x(1)]),
            Err(TermError::Malformed { index: 2, var_count: 2 })
        );
    }

    #[test]
    fn compose_examples() {
        let g = LawvereMorphism::new(2, vec![m(x(0), x(1))]).unwrap();
        assert_eq!(LawvereMorphism::identity(2).compose(&g).unwrap(), g);

        let f = LawvereMorphism::new(3, vec![x(0), m(x(1), x(2))]).unwrap();
        let h = compose(&f, &g).unwrap();
        assert_eq!(h.domain(), 3);
        assert_eq!(h.components(), &[m(x(0), m(x(1), x(2)))]);

        let to_zero = LawvereMorphism::new(4, vec![]).unwrap();
        let constant = LawvereMorphism::new(0, vec![unit()]).unwrap();
        let c = to_zero.compose(&constant).unwrap();
        assert_eq!((c.domain(), c.components()), (4, &[unit()][..]));

        assert!(matches!(g.compose(&f), Err(TermError::Composition { .. })));
    }

    #[test]
    fn translate_examples() {
        let monoid = Arc::new(monoid());
        let group = Arc::new(group());
        let t = m(x(0), unit());

        assert_eq!(TheoryMorphism::identity(monoid.clone()).translate(&t).unwrap(), t);
        let incl = TheoryMorphism::inclusion(monoid.clone(), group).unwrap();
        assert_eq!(incl.translate(&t).unwrap(), t);
        assert_eq!(opposite(monoid).translate(&t).unwrap(), m(unit(), x(0)));
    }

    #[test]
    fn incomplete_theory_morphism_rejected() {
        let monoid = Arc::new(monoid());
        let mut assignment = IndexMap::new();
        assignment.insert("mul".to_string(), m(x(0), x(1)));
        let err = TheoryMorphism::new("bad", monoid.clone(), monoid.clone(), assignment).unwrap_err();
        assert_eq!(err, TermError::IncompleteMorphism("e".into()));

        let mut assignment = IndexMap::new();
        assignment.insert("mul".to_string(), m(x(0), x(2)));
        assignment.insert("e".to_string(), unit());
        assert!(TheoryMorphism::new("bad", monoid.clone(), monoid, assignment).is_err());
    }

    #[test]
    fn theory_validation() {
        assert_eq!(
            Theory::new("t", vec![mul(), Symbol::new("mul", 1)], vec![]),
            Err(TheoryError::DuplicateSymbol("mul".into()))
        );
        let bad = Equation::new("idem", 1, m(x(0), x(0)), x(0)).unwrap();
        assert!(matches!(
            Theory::new("t", vec![e()], vec![bad]),
            Err(TheoryError::Equation { .. })
        ));
        assert_eq!(monoid().signature().len(), 2);
    }

    #[test]
    fn alpha_key_ignores_names_and_renaming() {
        let a = Equation::new("a", 2, m(x(0), x(1)), m(x(1), x(0))).unwrap();
        let b = Equation::new("b", 3, m(x(2), x(0)), m(x(0), x(2))).unwrap();
        assert_eq!(a.alpha_key(), b.alpha_key());
    }

    fn arb_term(vars: usize) -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![(0..vars).prop_map(Term::Var), Just(unit())];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| m(a, b)),
                inner.prop_map(|a| Term::App(inv(), vec![a])),
            ]
        })
    }

    fn arb_env(len: usize, vars: usize) -> impl Strategy<Value = Vec<Term>> {
        proptest::collection::vec(arb_term(vars), len)
    }

    proptest! {
        #[test]
        fn substitution_is_associative(t in arb_term(3), e1 in arb_env(3, 2), e2 in arb_env(2, 3)) {
            let lhs = substitute(&substitute(&t, &e1).unwrap(), &e2).unwrap();
            let inner: Vec<Term> = e1.iter().map(|s| substitute(s, &e2).unwrap()).collect();
            prop_assert_eq!(lhs, substitute(&t, &inner).unwrap());
        }

        #[test]
        fn composition_is_associative_and_unital(
            f in arb_env(2, 3), g in arb_env(3, 2), h in arb_env(1, 3)
        ) {
            let f = LawvereMorphism::new(3, f).unwrap();
            let g = LawvereMorphism::new(2, g).unwrap();
            let h = LawvereMorphism::new(3, h).unwrap();
            let left = f.compose(&g).unwrap().compose(&h).unwrap();
            let right = f.compose(&g.compose(&h).unwrap()).unwrap();
            prop_assert_eq!(&left, &right);
            prop_assert!(left.components().iter().all(|c| c.is_well_formed(3)));
            prop_assert_eq!(LawvereMorphism::identity(3).compose(&f).unwrap(), f.clone());
            prop_assert_eq!(f.compose(&LawvereMorphism::identity(2)).unwrap(), f);
        }

        #[test]
        fn translate_commutes_with_substitute(t in arb_term(2), env in arb_env(2, 3)) {
            let group = Arc::new(group());
            let i = |t| Term::App(inv(), vec![t]);
            let mut assignment = IndexMap::new();
            assignment.insert("mul".to_string(), m(x(1), x(0)));
            assignment.insert("e".to_string(), unit());
            assignment.insert("inv".to_string(), i(i(x(0))));
            let f = TheoryMorphism::new("twist", group.clone(), group, assignment).unwrap();

            let lhs = f.translate(&substitute(&t, &env).unwrap()).unwrap();
            let env2: Vec<Term> = env.iter().map(|s| f.translate(s).unwrap()).collect();
            let rhs = substitute(&f.translate(&t).unwrap(), &env2).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
