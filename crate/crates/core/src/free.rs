//! Free algebras on `n` generators by congruence closure.
//!
//! Terms are grown one layer at a time: every operation is applied to every
//! tuple of existing classes that has no result yet. After each layer the
//! classes are closed under the equations (every instance over existing
//! classes whose sides are both defined is merged) and under congruence
//! (equal arguments give equal results). When the operation tables become
//! total the classes form a model generated by the variables, which is the
//! free algebra. Theories that are not locally finite keep growing until a
//! bound is hit.

use std::collections::HashMap;
use std::sync::Arc;

use crate::model::{pow, Elem, FiniteAlgebra};
use crate::term::{Term, Theory};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FreeBounds {
    /// Largest number of classes allowed after closure.
    pub max_elements: usize,
    /// Largest number of term layers generated.
    pub max_depth: usize,
}

impl Default for FreeBounds {
    fn default() -> Self {
        FreeBounds { max_elements: 64, max_depth: 8 }
    }
}

/// Cap on equation instances evaluated per closure sweep.
const INSTANCE_LIMIT: usize = 4_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundReason {
    Elements,
    Depth,
    Work,
}

#[derive(Clone, Debug)]
pub enum FreeAlgebraResult {
    Finite {
        algebra: Arc<FiniteAlgebra>,
        /// element denoted by each variable
        generators: Vec<Elem>,
        /// smallest known term for each element
        element_terms: Vec<Term>,
        /// class count after each closure
        trace: Vec<usize>,
    },
    BoundExceeded {
        classes_found: usize,
        depth_reached: usize,
        trace: Vec<usize>,
        reason: BoundReason,
    },
}

impl FreeAlgebraResult {
    pub fn is_finite(&self) -> bool {
        matches!(self, FreeAlgebraResult::Finite { .. })
    }

    pub fn trace(&self) -> &[usize] {
        match self {
            FreeAlgebraResult::Finite { trace, .. } | FreeAlgebraResult::BoundExceeded { trace, .. } => trace,
        }
    }

    pub fn algebra(&self) -> Option<&Arc<FiniteAlgebra>> {
        match self {
            FreeAlgebraResult::Finite { algebra, .. } => Some(algebra),
            FreeAlgebraResult::BoundExceeded { .. } => None,
        }
    }
}

struct Closure<'a> {
    theory: &'a Theory,
    parent: Vec<usize>,
    rep: Vec<Term>,
    /// (symbol, argument classes) -> node
    table: HashMap<(usize, Vec<usize>), usize>,
}

impl<'a> Closure<'a> {
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn add(&mut self, term: Term) -> usize {
        let id = self.parent.len();
        self.parent.push(id);
        self.rep.push(term);
        id
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        let (keep, drop) = if self.rep[a].size_cmp(&self.rep[b]).is_le() { (a, b) } else { (b, a) };
        self.parent[drop] = keep;
        true
    }

    fn roots(&mut self) -> Vec<usize> {
        let mut roots: Vec<usize> = (0..self.parent.len()).filter(|&i| self.parent[i] == i).collect();
        roots.sort_by(|&a, &b| self.rep[a].size_cmp(&self.rep[b]));
        roots
    }

    /// Re-keys the table by current roots, merging results of entries that
    /// now collide.
    fn congruence(&mut self) -> bool {
        let mut changed = false;
        loop {
            let entries: Vec<((usize, Vec<usize>), usize)> = self.table.drain().collect();
            let mut merged = false;
            for ((op, args), node) in entries {
                let key = (op, args.iter().map(|&a| self.find(a)).collect::<Vec<_>>());
                match self.table.get(&key) {
                    Some(&other) => merged |= self.union(other, node),
                    None => {
                        self.table.insert(key, node);
                    }
                }
            }
            if !merged {
                return changed;
            }
            changed = true;
        }
    }

    fn eval(&mut self, term: &Term, env: &[usize]) -> Option<usize> {
        match term {
            Term::Var(i) => Some(env[*i]),
            Term::App(symbol, args) => {
                let op = self.theory.symbol_index(symbol.name())?;
                let mut key = Vec::with_capacity(args.len());
                for a in args {
                    key.push(self.eval(a, env)?);
                }
                let node = *self.table.get(&(op, key))?;
                Some(self.find(node))
            }
        }
    }

    /// One pass over every equation instance on current classes.
    fn equations(&mut self, roots: &[usize]) -> bool {
        let mut changed = false;
        let mut env = vec![0; 0];
        for eq in self.theory.equations() {
            env.resize(eq.var_count, 0);
            let count = pow(roots.len(), eq.var_count);
            for i in 0..count {
                let mut rest = i;
                for slot in env.iter_mut().rev() {
                    *slot = roots[rest % roots.len()];
                    rest /= roots.len();
                }
                // classes merged earlier in this pass
                for slot in env.iter_mut() {
                    *slot = self.find(*slot);
                }
                if let (Some(l), Some(r)) = (self.eval(&eq.lhs, &env), self.eval(&eq.rhs, &env)) {
                    if self.union(l, r) {
                        changed = true;
                        self.congruence();
                    }
                }
            }
        }
        changed
    }

    fn instance_work(&self, roots: usize) -> usize {
        self.theory
            .equations()
            .iter()
            .map(|eq| pow(roots, eq.var_count))
            .fold(0usize, usize::saturating_add)
    }

    /// Closes under equations and congruence; `false` if the work cap was
    /// hit first.
    fn close(&mut self) -> bool {
        self.congruence();
        loop {
            let roots = self.roots();
            if self.instance_work(roots.len()) > INSTANCE_LIMIT {
                return false;
            }
            if !self.equations(&roots) {
                return true;
            }
        }
    }

    /// Operation applications over `roots` with no result yet.
    fn missing(&mut self, roots: &[usize]) -> Vec<(usize, Vec<usize>)> {
        let mut out = Vec::new();
        for (op, symbol) in self.theory.signature().iter().enumerate() {
            let mut args = vec![0; symbol.arity()];
            for i in 0..pow(roots.len(), symbol.arity()) {
                let mut rest = i;
                for slot in args.iter_mut().rev() {
                    *slot = roots[rest % roots.len()];
                    rest /= roots.len();
                }
                if !self.table.contains_key(&(op, args.clone())) {
                    out.push((op, args.clone()));
                }
            }
        }
        out
    }
}

/// The free algebra on `n` generators, or the point where the
/// construction gave up.
pub fn free_algebra(theory: &Arc<Theory>, n: usize, bounds: FreeBounds) -> FreeAlgebraResult {
    let mut cc = Closure { theory, parent: Vec::new(), rep: Vec::new(), table: HashMap::new() };
    let vars: Vec<usize> = (0..n).map(|i| cc.add(Term::Var(i))).collect();
    let mut trace = Vec::new();
    let mut depth = 0;
    let exceeded = |classes, depth, trace, reason| FreeAlgebraResult::BoundExceeded {
        classes_found: classes,
        depth_reached: depth,
        trace,
        reason,
    };

    loop {
        if !cc.close() {
            let classes = cc.roots().len();
            return exceeded(classes, depth, trace, BoundReason::Work);
        }
        let roots = cc.roots();
        trace.push(roots.len());
        if roots.len() > bounds.max_elements {
            return exceeded(roots.len(), depth, trace, BoundReason::Elements);
        }
        let missing = cc.missing(&roots);
        if missing.is_empty() {
            return finish(cc, &roots, &vars, trace);
        }
        if depth >= bounds.max_depth {
            return exceeded(roots.len(), depth, trace, BoundReason::Depth);
        }
        if cc.instance_work(roots.len() + missing.len()) > INSTANCE_LIMIT {
            return exceeded(roots.len(), depth, trace, BoundReason::Work);
        }
        for (op, args) in missing {
            let symbol = theory.signature()[op].clone();
            let term = Term::App(symbol, args.iter().map(|&a| cc.rep[a].clone()).collect());
            let node = cc.add(term);
            cc.table.insert((op, args), node);
        }
        depth += 1;
    }
}

fn finish(mut cc: Closure<'_>, roots: &[usize], vars: &[usize], trace: Vec<usize>) -> FreeAlgebraResult {
    let index: HashMap<usize, Elem> = roots.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let size = roots.len();
    let theory = cc.theory;
    let mut tables = Vec::new();
    for (op, symbol) in theory.signature().iter().enumerate() {
        let mut table = Vec::with_capacity(pow(size, symbol.arity()));
        let mut args = vec![0; symbol.arity()];
        for i in 0..pow(size, symbol.arity()) {
            crate::model::decode(i, size, &mut args);
            let key: Vec<usize> = args.iter().map(|&a| roots[a]).collect();
            let node = cc.table[&(op, key)];
            table.push(index[&cc.find(node)]);
        }
        tables.push(table);
    }
    let algebra = FiniteAlgebra::new(Arc::new(theory.clone()), size, tables).expect("closure tables are total");
    debug_assert!(algebra.is_model(), "closed term algebra satisfies its equations");
    let generators = vars.iter().map(|&v| index[&cc.find(v)]).collect();
    let element_terms = roots.iter().map(|&r| cc.rep[r].clone()).collect();
    FreeAlgebraResult::Finite { algebra: Arc::new(algebra), generators, element_terms, trace }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::format_term;
    use crate::term::fixtures::{group, monoid, pointed, semilattice, sets};

    fn rendered(result: &FreeAlgebraResult) -> Vec<String> {
        match result {
            FreeAlgebraResult::Finite { element_terms, .. } => {
                element_terms.iter().map(|t| format_term(t, &["x0", "x1", "x2"])).collect()
            }
            other => panic!("expected a finite result, got {:?}", other),
        }
    }

    #[test]
    fn pointed_set_on_two_generators() {
        let r = free_algebra(&Arc::new(pointed()), 2, FreeBounds::default());
        assert_eq!(rendered(&r), vec!["x0", "x1", "e()"]);
    }

    #[test]
    fn semilattice_on_two_and_three_generators() {
        let t = Arc::new(semilattice());
        let r = free_algebra(&t, 2, FreeBounds::default());
        assert_eq!(rendered(&r), vec!["x0", "x1", "meet(x0,x1)"]);
        let r3 = free_algebra(&t, 3, FreeBounds::default());
        assert_eq!(r3.algebra().unwrap().size(), 7);
        assert!(r3.algebra().unwrap().is_model());
    }

    #[test]
    fn monoid_on_one_generator_grows() {
        let r = free_algebra(&Arc::new(monoid()), 1, FreeBounds::default());
        match r {
            FreeAlgebraResult::BoundExceeded { ref trace, .. } => {
                assert!(trace.len() >= 3);
                assert!(trace.windows(2).all(|w| w[0] < w[1]), "{:?}", trace);
            }
            _ => panic!("free monoid on one generator is infinite"),
        }
    }

    #[test]
    fn degenerate_cases() {
        let empty = free_algebra(&Arc::new(semilattice()), 0, FreeBounds::default());
        assert_eq!(empty.algebra().unwrap().size(), 0);
        let r = free_algebra(&Arc::new(sets()), 3, FreeBounds::default());
        assert_eq!(r.algebra().unwrap().size(), 3);
        let g = free_algebra(&Arc::new(group()), 0, FreeBounds::default());
        assert_eq!(g.algebra().unwrap().size(), 1);
    }

    #[test]
    fn tight_bounds_stop_early() {
        let t = Arc::new(semilattice());
        let r = free_algebra(&t, 3, FreeBounds { max_elements: 4, max_depth: 8 });
        assert!(matches!(r, FreeAlgebraResult::BoundExceeded { reason: BoundReason::Elements, .. }));
        let r = free_algebra(&t, 2, FreeBounds { max_elements: 64, max_depth: 0 });
        assert!(matches!(r, FreeAlgebraResult::BoundExceeded { reason: BoundReason::Depth, depth_reached: 0, .. }));
    }
}
