//! Term operations versus natural families of the forgetful functor, over
//! the category of models of size at most `k`.
//!
//! Every term gives a family of functions `A^n -> A^m` that commutes with
//! all homomorphisms. Over the full category of models the converse holds
//! too, but only finitely many models are available here, so a search over
//! that truncated category can find natural families that no term induces.
//! Reports say so instead of claiming equality.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dsl::{default_var_names, format_term};
use crate::enumerate::{enumerate_models, EnumError, EnumOptions};
use crate::free::{free_algebra, FreeAlgebraResult, FreeBounds};
use crate::hom::{all_homs, FamilyComponent, HomError, Homomorphism, NaturalFamily};
use crate::model::{decode, encode, pow, Compiled, Elem, FiniteAlgebra, ModelError, Violation};
use crate::record::algebra_hash;
use crate::sieve::{Counterexample, Sieve, SieveError, Validity};
use crate::term::{Equation, Term, TermError, Theory, TheoryMorphism};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CloneError {
    #[error(transparent)]
    Enumeration(#[from] EnumError),
    #[error(transparent)]
    Hom(#[from] HomError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("family search gave up: {0}")]
    BoundExceeded(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CloneOptions {
    pub free_bounds: FreeBounds,
    /// Branching nodes allowed in one family search.
    pub node_budget: u64,
    /// Families collected before a search gives up.
    pub max_families: usize,
    /// Largest `|A|^m` allowed as a variable domain.
    pub max_domain: usize,
    /// Read families off a finite free algebra when possible.
    pub shortcut: bool,
}

impl Default for CloneOptions {
    fn default() -> Self {
        CloneOptions {
            free_bounds: FreeBounds::default(),
            node_budget: 2_000_000,
            max_families: 100_000,
            max_domain: 1 << 12,
            shortcut: true,
        }
    }
}

/// `α_A(a) = t(a)` in every algebra, one term per output coordinate.
pub fn induced_family(terms: &[Term], n: usize, algebras: &[Arc<FiniteAlgebra>]) -> Result<NaturalFamily, CloneError> {
    let Some(first) = algebras.first() else {
        return Ok(NaturalFamily::new(n, terms.len(), Vec::new())?);
    };
    let theory = first.theory();
    let progs = terms
        .iter()
        .map(|t| {
            theory.check_term(t, n)?;
            Ok(Compiled::term(theory, t)?)
        })
        .collect::<Result<Vec<_>, CloneError>>()?;
    let mut stack = Vec::new();
    let components = algebras
        .iter()
        .map(|a| {
            let mut env = vec![0; n];
            let mut table = Vec::with_capacity(pow(a.size(), n) * terms.len());
            for i in 0..pow(a.size(), n) {
                decode(i, a.size(), &mut env);
                table.extend(progs.iter().map(|p| p.eval(a, &env, &mut stack)));
            }
            FamilyComponent { algebra: a.clone(), table }
        })
        .collect();
    Ok(NaturalFamily::new(n, terms.len(), components)?)
}

fn family_key(family: &NaturalFamily) -> Vec<Elem> {
    family.components().iter().flat_map(|c| c.table.iter().copied()).collect()
}

/// The models of size at most `k` (one per isomorphism class) and every
/// homomorphism between them.
#[derive(Clone, Debug)]
pub struct ModelCategory {
    theory: Arc<Theory>,
    k: usize,
    algebras: Vec<Arc<FiniteAlgebra>>,
    homs: Vec<Homomorphism>,
}

impl ModelCategory {
    pub fn new(theory: &Arc<Theory>, k: usize) -> Result<Self, CloneError> {
        let models = enumerate_models(theory, k, &EnumOptions { up_to_iso: true, jobs: 0, ..Default::default() })?;
        ModelCategory::from_models(theory, k, models)
    }

    /// Uses `models` as the objects; they should be one per isomorphism
    /// class of every model of size at most `k`, in canonical order.
    pub fn from_models(theory: &Arc<Theory>, k: usize, models: Vec<FiniteAlgebra>) -> Result<Self, CloneError> {
        let algebras: Vec<_> = models.into_iter().map(Arc::new).collect();
        let homs = all_homs(&algebras)?;
        Ok(ModelCategory { theory: theory.clone(), k, algebras, homs })
    }

    pub fn theory(&self) -> &Arc<Theory> {
        &self.theory
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn algebras(&self) -> &[Arc<FiniteAlgebra>] {
        &self.algebras
    }

    pub fn homs(&self) -> &[Homomorphism] {
        &self.homs
    }

    fn is_natural(&self, family: &NaturalFamily) -> Result<bool, CloneError> {
        Ok(family.check_naturality(&self.homs)?.is_none())
    }

    /// Every natural family `U^n => U^m` over this category, sorted by
    /// their tables.
    pub fn natural_families(&self, n: usize, m: usize, opts: &CloneOptions) -> Result<FamilySearch, CloneError> {
        if opts.shortcut {
            if let Some(found) = self.yoneda_families(n, m, opts)? {
                return Ok(found);
            }
        }
        let mut families = FamilyCsp::new(self, n, m, opts)?.solve()?;
        families.sort_by_cached_key(family_key);
        Ok(FamilySearch { families, method: FamilyMethod::Search })
    }

    fn yoneda_families(&self, n: usize, m: usize, opts: &CloneOptions) -> Result<Option<FamilySearch>, CloneError> {
        let FreeAlgebraResult::Finite { algebra, element_terms, .. } = free_algebra(&self.theory, n, opts.free_bounds) else {
            return Ok(None);
        };
        // the free algebra has to be one of the objects, up to isomorphism
        if algebra.size() == 0 || algebra.size() > self.k {
            return Ok(None);
        }
        let count = pow(element_terms.len(), m);
        if count > opts.max_families {
            return Err(CloneError::BoundExceeded(format!("{count} families exceed the limit of {}", opts.max_families)));
        }
        let mut families = Vec::with_capacity(count);
        let mut choice = vec![0; m];
        for i in 0..count {
            decode(i, element_terms.len(), &mut choice);
            let terms: Vec<Term> = choice.iter().map(|&c| element_terms[c].clone()).collect();
            let family = induced_family(&terms, n, &self.algebras)?;
            if !self.is_natural(&family)? {
                return Ok(None);
            }
            families.push(family);
        }
        families.sort_by_cached_key(family_key);
        Ok(Some(FamilySearch { families, method: FamilyMethod::Yoneda }))
    }

    /// Term operations over `n` variables up to depth `depth`, one per
    /// family they induce on this category.
    pub fn term_clone(&self, n: usize, depth: usize, bounds: FreeBounds) -> Result<TermClone, CloneError> {
        TermCloneBuilder::new(self, n, bounds).run(depth)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyMethod {
    Yoneda,
    Search,
}

#[derive(Clone, Debug)]
pub struct FamilySearch {
    pub families: Vec<NaturalFamily>,
    pub method: FamilyMethod,
}

pub fn natural_families(
    theory: &Arc<Theory>,
    n: usize,
    m: usize,
    k: usize,
    opts: &CloneOptions,
) -> Result<FamilySearch, CloneError> {
    ModelCategory::new(theory, k)?.natural_families(n, m, opts)
}

/// Constraint search for natural families. Variables are pairs (algebra,
/// input tuple) with domain `A^m`; each homomorphism `f: A -> B` links
/// `(A, t)` to `(B, f t)` by `f^m(value(A, t)) = value(B, f t)`.
struct FamilyCsp<'a> {
    cat: &'a ModelCategory,
    n: usize,
    m: usize,
    opts: &'a CloneOptions,
    /// first variable of each algebra
    offsets: Vec<usize>,
    owner: Vec<usize>,
    words: Vec<usize>,
    constraints: Vec<Link>,
    incident: Vec<Vec<usize>>,
    images: Vec<Vec<u32>>,
    nodes: u64,
}

struct Link {
    from: usize,
    to: usize,
    image: usize,
}

type Domains = Vec<Vec<u64>>;

fn bit(set: &[u64], i: usize) -> bool {
    set[i / 64] >> (i % 64) & 1 == 1
}

fn count(set: &[u64]) -> usize {
    set.iter().map(|w| w.count_ones() as usize).sum()
}

fn members(set: &[u64]) -> impl Iterator<Item = usize> + '_ {
    set.iter().enumerate().flat_map(|(w, &word)| {
        (0..64).filter(move |b| word >> b & 1 == 1).map(move |b| w * 64 + b)
    })
}

impl<'a> FamilyCsp<'a> {
    fn new(cat: &'a ModelCategory, n: usize, m: usize, opts: &'a CloneOptions) -> Result<Self, CloneError> {
        let mut offsets = Vec::new();
        let mut owner = Vec::new();
        let mut words = Vec::new();
        for (i, a) in cat.algebras.iter().enumerate() {
            let domain = pow(a.size(), m);
            if domain > opts.max_domain {
                return Err(CloneError::BoundExceeded(format!(
                    "{}^{m} values per variable exceed the limit of {}",
                    a.size(),
                    opts.max_domain
                )));
            }
            offsets.push(owner.len());
            for _ in 0..pow(a.size(), n) {
                owner.push(i);
                words.push(domain.div_ceil(64));
            }
        }
        let index_of = |a: &Arc<FiniteAlgebra>| cat.algebras.iter().position(|b| Arc::ptr_eq(a, b) || **a == **b);
        let mut constraints = Vec::new();
        let mut images = Vec::new();
        let mut incident = vec![Vec::new(); owner.len()];
        let mut tuple = vec![0; n.max(m)];
        for f in &cat.homs {
            let (Some(src), Some(tgt)) = (index_of(f.source()), index_of(f.target())) else {
                return Err(HomError::MissingComponent(f.source().size()).into());
            };
            let (a, b) = (f.source().size(), f.target().size());
            if src == tgt && f.map().iter().enumerate().all(|(x, &y)| x == y) {
                continue;
            }
            let image: Vec<u32> = (0..pow(a, m))
                .map(|v| {
                    decode(v, a, &mut tuple[..m]);
                    let moved: Vec<Elem> = tuple[..m].iter().map(|&x| f.apply(x)).collect();
                    encode(&moved, b) as u32
                })
                .collect();
            images.push(image);
            for t in 0..pow(a, n) {
                decode(t, a, &mut tuple[..n]);
                let moved: Vec<Elem> = tuple[..n].iter().map(|&x| f.apply(x)).collect();
                let link = Link { from: offsets[src] + t, to: offsets[tgt] + encode(&moved, b), image: images.len() - 1 };
                incident[link.from].push(constraints.len());
                incident[link.to].push(constraints.len());
                constraints.push(link);
            }
        }
        Ok(FamilyCsp { cat, n, m, opts, offsets, owner, words, constraints, incident, images, nodes: 0 })
    }

    fn full_domains(&self) -> Domains {
        self.owner
            .iter()
            .map(|&i| {
                let size = pow(self.cat.algebras[i].size(), self.m);
                let mut set = vec![0u64; size.div_ceil(64)];
                for v in 0..size {
                    set[v / 64] |= 1 << (v % 64);
                }
                set
            })
            .collect()
    }

    /// Arc consistency from the given dirty variables. False on a wipeout.
    fn propagate(&self, doms: &mut Domains, dirty: &[usize]) -> bool {
        let mut queued = vec![false; self.constraints.len()];
        let mut queue = std::collections::VecDeque::new();
        for &v in dirty {
            for &c in &self.incident[v] {
                if !queued[c] {
                    queued[c] = true;
                    queue.push_back(c);
                }
            }
        }
        while let Some(c) = queue.pop_front() {
            queued[c] = false;
            let link = &self.constraints[c];
            let image = &self.images[link.image];
            let mut allowed = vec![0u64; self.words[link.to]];
            for x in members(&doms[link.from]) {
                let y = image[x] as usize;
                allowed[y / 64] |= 1 << (y % 64);
            }
            let mut changed = Vec::new();
            let to = &mut doms[link.to];
            let before = count(to);
            for (w, a) in to.iter_mut().zip(&allowed) {
                *w &= a;
            }
            if count(to) != before {
                changed.push(link.to);
            }
            let target = doms[link.to].clone();
            let from = &mut doms[link.from];
            let before = count(from);
            for x in members(&from.clone()) {
                if !bit(&target, image[x] as usize) {
                    from[x / 64] &= !(1 << (x % 64));
                }
            }
            if count(from) != before {
                changed.push(link.from);
            }
            for v in changed {
                if count(&doms[v]) == 0 {
                    return false;
                }
                for &d in &self.incident[v] {
                    if !queued[d] {
                        queued[d] = true;
                        queue.push_back(d);
                    }
                }
            }
        }
        true
    }

    fn solve(mut self) -> Result<Vec<NaturalFamily>, CloneError> {
        let mut doms = self.full_domains();
        let mut out = Vec::new();
        let all: Vec<usize> = (0..self.owner.len()).collect();
        if self.propagate(&mut doms, &all) {
            self.branch(doms, &mut out)?;
        }
        Ok(out)
    }

    fn branch(&mut self, doms: Domains, out: &mut Vec<NaturalFamily>) -> Result<(), CloneError> {
        self.nodes += 1;
        if self.nodes > self.opts.node_budget {
            return Err(CloneError::BoundExceeded(format!("more than {} search nodes", self.opts.node_budget)));
        }
        let pick = (0..doms.len()).filter(|&v| count(&doms[v]) > 1).min_by_key(|&v| (count(&doms[v]), v));
        let Some(var) = pick else {
            if out.len() >= self.opts.max_families {
                return Err(CloneError::BoundExceeded(format!("more than {} families", self.opts.max_families)));
            }
            out.push(self.family(&doms)?);
            return Ok(());
        };
        for value in members(&doms[var]).collect::<Vec<_>>() {
            let mut next = doms.clone();
            next[var].iter_mut().for_each(|w| *w = 0);
            next[var][value / 64] |= 1 << (value % 64);
            if self.propagate(&mut next, &[var]) {
                self.branch(next, out)?;
            }
        }
        Ok(())
    }

    fn family(&self, doms: &Domains) -> Result<NaturalFamily, CloneError> {
        let mut components = Vec::new();
        let mut out = vec![0; self.m];
        for (i, a) in self.cat.algebras.iter().enumerate() {
            let mut table = Vec::new();
            for t in 0..pow(a.size(), self.n) {
                let value = members(&doms[self.offsets[i] + t]).next().expect("assigned");
                decode(value, a.size(), &mut out);
                table.extend_from_slice(&out);
            }
            components.push(FamilyComponent { algebra: a.clone(), table });
        }
        let family = NaturalFamily::new(self.n, self.m, components)?;
        debug_assert!(self.cat.is_natural(&family).unwrap_or(false));
        Ok(family)
    }
}

/// One representative term per distinct induced family.
#[derive(Clone, Debug)]
pub struct TermClone {
    pub arity: usize,
    pub depth: usize,
    pub ops: Vec<Term>,
    keys: Vec<Vec<Elem>>,
    /// merges of terms that agree on every model but could not be shown
    /// equal in the free algebra
    pub unresolved: usize,
    pub unresolved_examples: Vec<(Term, Term)>,
    /// true when the last layer produced no new operation
    pub saturated: bool,
}

const UNRESOLVED_EXAMPLES: usize = 8;

struct TermCloneBuilder<'a> {
    cat: &'a ModelCategory,
    n: usize,
    /// start of each algebra in a key
    offsets: Vec<usize>,
    free: Option<(Arc<FiniteAlgebra>, Vec<Elem>)>,
    clone: TermClone,
    index: HashMap<Vec<Elem>, usize>,
}

impl<'a> TermCloneBuilder<'a> {
    fn new(cat: &'a ModelCategory, n: usize, bounds: FreeBounds) -> Self {
        let mut offsets = Vec::new();
        let mut total = 0;
        for a in &cat.algebras {
            offsets.push(total);
            total += pow(a.size(), n);
        }
        let free = match free_algebra(&cat.theory, n, bounds) {
            FreeAlgebraResult::Finite { algebra, generators, .. } => Some((algebra, generators)),
            FreeAlgebraResult::BoundExceeded { .. } => None,
        };
        TermCloneBuilder {
            cat,
            n,
            offsets,
            free,
            clone: TermClone {
                arity: n,
                depth: 0,
                ops: Vec::new(),
                keys: Vec::new(),
                unresolved: 0,
                unresolved_examples: Vec::new(),
                saturated: false,
            },
            index: HashMap::new(),
        }
    }

    fn offer(&mut self, term: Term, key: Vec<Elem>) -> bool {
        if let Some(&existing) = self.index.get(&key) {
            let known = &self.clone.ops[existing];
            let confirmed = self.free.as_ref().is_some_and(|(f, gens)| {
                matches!((f.evaluate(known, gens), f.evaluate(&term, gens)), (Ok(a), Ok(b)) if a == b)
            });
            if !confirmed {
                self.clone.unresolved += 1;
                if self.clone.unresolved_examples.len() < UNRESOLVED_EXAMPLES {
                    self.clone.unresolved_examples.push((known.clone(), term));
                }
            }
            return false;
        }
        self.index.insert(key.clone(), self.clone.ops.len());
        self.clone.ops.push(term);
        self.clone.keys.push(key);
        true
    }

    fn run(mut self, depth: usize) -> Result<TermClone, CloneError> {
        let theory = self.cat.theory.clone();
        let mut tuple = vec![0; self.n];
        for v in 0..self.n {
            let mut key = Vec::new();
            for a in &self.cat.algebras {
                for t in 0..pow(a.size(), self.n) {
                    decode(t, a.size(), &mut tuple);
                    key.push(tuple[v]);
                }
            }
            self.offer(Term::Var(v), key);
        }
        for (op, symbol) in theory.signature().iter().enumerate() {
            if symbol.is_constant() {
                let key = self
                    .cat
                    .algebras
                    .iter()
                    .flat_map(|a| std::iter::repeat(a.tables()[op][0]).take(pow(a.size(), self.n)))
                    .collect();
                self.offer(Term::constant(symbol), key);
            }
        }
        let mut tried: HashSet<(usize, Vec<usize>)> = HashSet::new();
        let mut args = Vec::new();
        for d in 1..=depth {
            let known = self.clone.ops.len();
            let mut grew = false;
            for (op, symbol) in theory.signature().iter().enumerate() {
                let arity = symbol.arity();
                if arity == 0 {
                    continue;
                }
                args.resize(arity, 0);
                for combo in 0..pow(known, arity) {
                    decode(combo, known, &mut args);
                    if !tried.insert((op, args.clone())) {
                        continue;
                    }
                    let key = self.apply_keys(op, &args);
                    let term = Term::App(symbol.clone(), args.iter().map(|&c| self.clone.ops[c].clone()).collect());
                    grew |= self.offer(term, key);
                }
            }
            self.clone.depth = d;
            if !grew {
                self.clone.saturated = true;
                break;
            }
        }
        if depth == 0 {
            self.clone.saturated = false;
        }
        Ok(self.clone)
    }

    fn apply_keys(&self, op: usize, args: &[usize]) -> Vec<Elem> {
        let mut key = Vec::with_capacity(self.clone.keys[0].len());
        let mut vals = vec![0; args.len()];
        for (a, &off) in self.cat.algebras.iter().zip(&self.offsets) {
            for t in 0..pow(a.size(), self.n) {
                for (v, &c) in vals.iter_mut().zip(args) {
                    *v = self.clone.keys[c][off + t];
                }
                key.push(a.tables()[op][encode(&vals, a.size())]);
            }
        }
        key
    }
}

impl TermClone {
    /// The family induced by an `m`-tuple of clone operations, laid out
    /// like [`NaturalFamily`] tables concatenated over the category.
    fn tuple_key(&self, cat: &ModelCategory, choice: &[usize]) -> Vec<Elem> {
        let mut key = Vec::new();
        let mut off = 0;
        for a in &cat.algebras {
            let rows = pow(a.size(), self.arity);
            for t in 0..rows {
                key.extend(choice.iter().map(|&c| self.keys[c][off + t]));
            }
            off += rows;
        }
        key
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Equal,
    ExtraNatural,
    BoundExceeded,
}

#[derive(Clone, Debug)]
pub struct ReconstructionCell {
    pub n: usize,
    pub m: usize,
    /// `m`-tuples of clone operations
    pub term_ops: Vec<Vec<Term>>,
    pub natural_count: Option<usize>,
    pub verdict: Verdict,
    pub witnesses: Vec<NaturalFamily>,
    /// every natural family found, with the term tuple inducing it
    pub families: Vec<ClassifiedFamily>,
    pub method: Option<FamilyMethod>,
    pub unresolved: usize,
    pub saturated: bool,
    pub note: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ClassifiedFamily {
    pub family: NaturalFamily,
    pub term: Option<Vec<Term>>,
}

#[derive(Clone, Debug)]
pub struct ReconstructionReport {
    pub theory: String,
    pub k: usize,
    pub depth: usize,
    pub options: CloneOptions,
    pub cells: Vec<ReconstructionCell>,
}

impl ReconstructionReport {
    pub fn cell(&self, n: usize, m: usize) -> Option<&ReconstructionCell> {
        self.cells.iter().find(|c| c.n == n && c.m == m)
    }

    pub fn all_equal(&self) -> bool {
        self.cells.iter().all(|c| c.verdict == Verdict::Equal)
    }

    pub fn to_json(&self) -> ReportJson {
        ReportJson {
            theory: self.theory.clone(),
            k: self.k,
            depth: self.depth,
            bounds: BoundsJson {
                max_elements: self.options.free_bounds.max_elements,
                max_depth: self.options.free_bounds.max_depth,
                node_budget: self.options.node_budget,
                max_families: self.options.max_families,
            },
            cells: self.cells.iter().map(CellJson::from_cell).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportJson {
    pub theory: String,
    pub k: usize,
    pub depth: usize,
    pub bounds: BoundsJson,
    pub cells: Vec<CellJson>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsJson {
    pub max_elements: usize,
    pub max_depth: usize,
    pub node_budget: u64,
    pub max_families: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CellJson {
    pub n: usize,
    pub m: usize,
    pub term_ops: Vec<String>,
    pub natural_count: Option<usize>,
    pub verdict: Verdict,
    pub witnesses: Vec<FamilyJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<FamilyMethod>,
    pub unresolved: usize,
    pub saturated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyJson {
    pub components: Vec<ComponentJson>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentJson {
    pub model: String,
    pub size: usize,
    pub table: Vec<Elem>,
}

impl FamilyJson {
    pub fn from_family(family: &NaturalFamily) -> Self {
        FamilyJson {
            components: family
                .components()
                .iter()
                .map(|c| ComponentJson { model: algebra_hash(&c.algebra), size: c.algebra.size(), table: c.table.clone() })
                .collect(),
        }
    }
}

/// `x0`, `(x0, e())` and so on, with the short variable names.
pub fn render_op_tuple(terms: &[Term], n: usize) -> String {
    let names = default_var_names(n);
    let parts: Vec<String> = terms.iter().map(|t| format_term(t, &names)).collect();
    if parts.len() == 1 {
        parts.into_iter().next().unwrap_or_default()
    } else {
        format!("({})", parts.join(", "))
    }
}

impl CellJson {
    fn from_cell(cell: &ReconstructionCell) -> Self {
        CellJson {
            n: cell.n,
            m: cell.m,
            term_ops: cell.term_ops.iter().map(|t| render_op_tuple(t, cell.n)).collect(),
            natural_count: cell.natural_count,
            verdict: cell.verdict,
            witnesses: cell.witnesses.iter().map(FamilyJson::from_family).collect(),
            method: cell.method,
            unresolved: cell.unresolved,
            saturated: cell.saturated,
            note: cell.note.clone(),
        }
    }
}

/// Term operations against natural families for one `(n, m)`.
pub fn compare_cell(cat: &ModelCategory, clone: &TermClone, m: usize, opts: &CloneOptions) -> ReconstructionCell {
    let count = pow(clone.ops.len(), m);
    let mut choice = vec![0; m];
    let mut term_ops = Vec::with_capacity(count);
    let mut term_keys = HashMap::with_capacity(count);
    for i in 0..count {
        decode(i, clone.ops.len(), &mut choice);
        term_keys.insert(clone.tuple_key(cat, &choice), term_ops.len());
        term_ops.push(choice.iter().map(|&c| clone.ops[c].clone()).collect::<Vec<_>>());
    }
    let mut cell = ReconstructionCell {
        n: clone.arity,
        m,
        term_ops,
        natural_count: None,
        verdict: Verdict::BoundExceeded,
        witnesses: Vec::new(),
        families: Vec::new(),
        method: None,
        unresolved: clone.unresolved,
        saturated: clone.saturated,
        note: None,
    };
    match cat.natural_families(clone.arity, m, opts) {
        Ok(found) => {
            let natural: HashSet<Vec<Elem>> = found.families.iter().map(family_key).collect();
            cell.natural_count = Some(found.families.len());
            cell.method = Some(found.method);
            for family in found.families {
                let term = term_keys.get(&family_key(&family)).map(|&i| cell.term_ops[i].clone());
                if term.is_none() {
                    cell.witnesses.push(family.clone());
                }
                cell.families.push(ClassifiedFamily { family, term });
            }
            if term_keys.keys().any(|k| !natural.contains(k)) {
                cell.note = Some("a term-induced family failed a naturality square".into());
            }
            cell.verdict = if cell.witnesses.is_empty() && cell.note.is_none() {
                Verdict::Equal
            } else {
                Verdict::ExtraNatural
            };
        }
        Err(e) => cell.note = Some(e.to_string()),
    }
    cell
}

/// Compares term operations with natural families for every `n` in
/// `0..=n_max` and `m` in `1..=m_max`.
pub fn reconstruct_theory(
    theory: &Arc<Theory>,
    n_max: usize,
    m_max: usize,
    k: usize,
    depth: usize,
    opts: &CloneOptions,
) -> Result<ReconstructionReport, CloneError> {
    reconstruct_in(&ModelCategory::new(theory, k)?, n_max, m_max, depth, opts)
}

/// [`reconstruct_theory`] over an already built category.
pub fn reconstruct_in(
    cat: &ModelCategory,
    n_max: usize,
    m_max: usize,
    depth: usize,
    opts: &CloneOptions,
) -> Result<ReconstructionReport, CloneError> {
    let clones: Vec<TermClone> = (0..=n_max)
        .into_par_iter()
        .map(|n| cat.term_clone(n, depth, opts.free_bounds))
        .collect::<Result<_, _>>()?;
    let pairs: Vec<(usize, usize)> = (0..=n_max).flat_map(|n| (1..=m_max).map(move |m| (n, m))).collect();
    let cells = pairs.par_iter().map(|&(n, m)| compare_cell(cat, &clones[n], m, opts)).collect();
    Ok(ReconstructionReport { theory: cat.theory.name().to_string(), k: cat.k, depth, options: *opts, cells })
}

/// A source equation whose translation fails in some target model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphismCounterexample {
    pub equation: Equation,
    pub translated: Equation,
    pub counterexample: Counterexample,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RestrictError {
    #[error("equation `{}` does not survive translation", .0.equation.name)]
    Invalid(Box<MorphismCounterexample>),
    #[error("algebra is for theory `{found}`, the morphism targets `{expected}`")]
    TheoryMismatch { expected: String, found: String },
    #[error("algebra is not a model: equation `{}` fails", .0.equation.name)]
    NotAModel(Violation),
    #[error(transparent)]
    Sieve(#[from] SieveError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Term(#[from] TermError),
}

/// `None` when every translated source equation holds in every target
/// model of size at most `k`.
pub fn validate_theory_morphism(f: &TheoryMorphism, k: usize) -> Result<Option<MorphismCounterexample>, RestrictError> {
    validate_with(f, &Sieve::new(f.target(), k)?)
}

/// Validation against the models held by `sieve`, which must be models of
/// the target theory.
pub fn validate_with(f: &TheoryMorphism, sieve: &Sieve) -> Result<Option<MorphismCounterexample>, RestrictError> {
    for eq in f.source().equations() {
        let translated = f.translate_equation(eq)?;
        if let Validity::Refuted(counterexample) = sieve.check(&translated)? {
            return Ok(Some(MorphismCounterexample { equation: eq.clone(), translated, counterexample }));
        }
    }
    Ok(None)
}

/// `B` seen as a source-theory algebra, after validating `f` at bound `k`.
pub fn restrict_along(f: &TheoryMorphism, b: &FiniteAlgebra, k: usize) -> Result<FiniteAlgebra, RestrictError> {
    if let Some(c) = validate_theory_morphism(f, k)? {
        return Err(RestrictError::Invalid(Box::new(c)));
    }
    restrict_validated(f, b)
}

/// Restriction without validating `f`; `b` must still be a model.
pub fn restrict_validated(f: &TheoryMorphism, b: &FiniteAlgebra) -> Result<FiniteAlgebra, RestrictError> {
    if **b.theory() != **f.target() {
        return Err(RestrictError::TheoryMismatch {
            expected: f.target().name().to_string(),
            found: b.theory().name().to_string(),
        });
    }
    if let Some(v) = b.check_model().into_iter().next() {
        return Err(RestrictError::NotAModel(v));
    }
    let mut tables = Vec::new();
    for (symbol, image) in f.source().signature().iter().zip(f.assignment().values()) {
        let prog = Compiled::term(f.target(), image)?;
        let mut env = vec![0; symbol.arity()];
        let mut stack = Vec::new();
        let table = (0..pow(b.size(), symbol.arity()))
            .map(|i| {
                decode(i, b.size(), &mut env);
                prog.eval(b, &env, &mut stack)
            })
            .collect();
        tables.push(table);
    }
    Ok(FiniteAlgebra::new(f.source().clone(), b.size(), tables)?)
}
