//! Exhaustive enumeration of finite models.
//!
//! Table cells are filled in a fixed global order (constants first, then
//! every other symbol in signature order, each table row-major). Each
//! equation instance is evaluated as far as the partial tables allow; an
//! instance that gets stuck on an unassigned cell waits on that cell and is
//! resumed when the cell receives a value. A contradiction prunes the
//! branch immediately.
//!
//! The first few cells are split off as a work prefix so that subtrees can
//! be searched by independent workers; the merged output is sorted, so the
//! result does not depend on the number of workers.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{decode, pow, Compiled, Elem, FiniteAlgebra};
use crate::term::Theory;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumOptions {
    /// Only size `k` instead of `1..=k`.
    pub exact_size: bool,
    /// One canonical representative per isomorphism class.
    pub up_to_iso: bool,
    /// Worker threads; 0 uses the ambient rayon pool.
    pub jobs: usize,
    /// Admit the empty carrier when the signature has no constants.
    pub allow_empty: bool,
    /// Abort after this many search nodes.
    pub node_budget: Option<u64>,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions { exact_size: false, up_to_iso: false, jobs: 1, allow_empty: false, node_budget: None }
    }
}

impl EnumOptions {
    pub fn up_to_iso() -> Self {
        EnumOptions { up_to_iso: true, ..Default::default() }
    }

    pub fn exact() -> Self {
        EnumOptions { exact_size: true, ..Default::default() }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub labeled_models: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumError {
    #[error("size bound must be at least 1")]
    InvalidBound,
    #[error("search budget of {budget} nodes exceeded while enumerating size {size}")]
    BoundExceeded { size: usize, budget: u64, nodes: u64 },
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

/// All models of `theory` of size `1..=k` (or exactly `k`), smaller sizes
/// first and each size in lexicographic order of flattened tables.
pub fn enumerate_models(theory: &Arc<Theory>, k: usize, opts: &EnumOptions) -> Result<Vec<FiniteAlgebra>, EnumError> {
    enumerate_models_with_stats(theory, k, opts).map(|(models, _)| models)
}

pub fn enumerate_models_with_stats(
    theory: &Arc<Theory>,
    k: usize,
    opts: &EnumOptions,
) -> Result<(Vec<FiniteAlgebra>, SearchStats), EnumError> {
    if k == 0 {
        return Err(EnumError::InvalidBound);
    }
    let low = if opts.exact_size {
        k
    } else if opts.allow_empty && !theory.has_constants() {
        0
    } else {
        1
    };
    let run = || -> Result<(Vec<FiniteAlgebra>, SearchStats), EnumError> {
        let mut all = Vec::new();
        let mut stats = SearchStats::default();
        for size in low..=k {
            let remaining = opts.node_budget.map(|b| b.saturating_sub(stats.nodes));
            let (tables, nodes) = search_size(theory, size, remaining).map_err(|used| EnumError::BoundExceeded {
                size,
                budget: opts.node_budget.unwrap_or(0),
                nodes: stats.nodes + used,
            })?;
            stats.nodes += nodes;
            stats.labeled_models += tables.len();
            let models = tables
                .into_iter()
                .map(|t| FiniteAlgebra::new(theory.clone(), size, t).expect("search respects table shapes"));
            if opts.up_to_iso {
                let classes: BTreeSet<FiniteAlgebra> = models.map(|m| m.canonicalize()).collect();
                all.extend(classes);
            } else {
                all.extend(models);
            }
        }
        Ok((all, stats))
    };
    if opts.jobs == 0 {
        return run();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| EnumError::Pool(e.to_string()))?
        .install(run)
}

const UNSET: Elem = Elem::MAX;

/// Read-only description of the search for one carrier size.
struct Space {
    size: usize,
    arities: Vec<usize>,
    /// global cell -> (symbol, row-major index)
    cells: Vec<(usize, usize)>,
    /// symbol -> row-major index -> global cell
    cell_id: Vec<Vec<usize>>,
    programs: Vec<Compiled>,
    /// (equation, environment) pairs; environments stored flat
    instances: Vec<(usize, usize)>,
    envs: Vec<Elem>,
    var_counts: Vec<usize>,
}

enum Outcome {
    Holds,
    Fails,
    Waits(usize),
}

impl Space {
    fn new(theory: &Theory, size: usize) -> Space {
        let sig = theory.signature();
        let arities: Vec<usize> = sig.iter().map(|s| s.arity()).collect();
        let mut order: Vec<usize> = (0..sig.len()).filter(|&i| arities[i] == 0).collect();
        order.extend((0..sig.len()).filter(|&i| arities[i] > 0));
        let mut cells = Vec::new();
        let mut cell_id = vec![Vec::new(); sig.len()];
        for &op in &order {
            let n = pow(size, arities[op]);
            cell_id[op] = (cells.len()..cells.len() + n).collect();
            cells.extend((0..n).map(|c| (op, c)));
        }
        let programs: Vec<Compiled> = theory
            .equations()
            .iter()
            .map(|eq| Compiled::pair(theory, eq).expect("theory equations are well-formed"))
            .collect();
        let var_counts: Vec<usize> = theory.equations().iter().map(|e| e.var_count).collect();
        let mut instances = Vec::new();
        let mut envs = Vec::new();
        for (eq, &vars) in var_counts.iter().enumerate() {
            let mut env = vec![0; vars];
            for i in 0..pow(size, vars) {
                decode(i, size.max(1), &mut env);
                instances.push((eq, envs.len()));
                envs.extend_from_slice(&env);
            }
        }
        Space { size, arities, cells, cell_id, programs, instances, envs, var_counts }
    }

    fn check(&self, inst: usize, tables: &[Vec<Elem>], stack: &mut Vec<Elem>) -> Outcome {
        let (eq, start) = self.instances[inst];
        let env = &self.envs[start..start + self.var_counts[eq]];
        match self.programs[eq].eval_partial(tables, self.size, env, stack, UNSET) {
            Ok((l, r)) if l == r => Outcome::Holds,
            Ok(_) => Outcome::Fails,
            Err((op, cell)) => Outcome::Waits(self.cell_id[op][cell]),
        }
    }
}

/// Mutable search state owned by one worker.
struct Worker<'a> {
    space: &'a Space,
    tables: Vec<Vec<Elem>>,
    watch: Vec<Vec<usize>>,
    /// cells whose watch list grew, for undo
    trail: Vec<usize>,
    stack: Vec<Elem>,
    out: Vec<Vec<Vec<Elem>>>,
}

impl<'a> Worker<'a> {
    /// `None` when some instance fails before anything is assigned.
    fn new(space: &'a Space) -> Option<Self> {
        let tables = space.arities.iter().map(|&a| vec![UNSET; pow(space.size, a)]).collect();
        let mut w = Worker {
            space,
            tables,
            watch: vec![Vec::new(); space.cells.len()],
            trail: Vec::new(),
            stack: Vec::new(),
            out: Vec::new(),
        };
        for inst in 0..space.instances.len() {
            match space.check(inst, &w.tables, &mut w.stack) {
                Outcome::Holds => {}
                Outcome::Fails => return None,
                Outcome::Waits(cell) => w.watch[cell].push(inst),
            }
        }
        w.trail.clear();
        Some(w)
    }

    /// Assigns `cell = value` and wakes the instances waiting on it.
    /// Returns the trail mark to undo to, or `None` after undoing a
    /// contradiction.
    fn assign(&mut self, cell: usize, value: Elem) -> Option<usize> {
        let (op, idx) = self.space.cells[cell];
        self.tables[op][idx] = value;
        let mark = self.trail.len();
        let mut i = 0;
        while i < self.watch[cell].len() {
            let inst = self.watch[cell][i];
            i += 1;
            match self.space.check(inst, &self.tables, &mut self.stack) {
                Outcome::Holds => {}
                Outcome::Fails => {
                    self.undo(mark);
                    self.tables[op][idx] = UNSET;
                    return None;
                }
                Outcome::Waits(next) => {
                    debug_assert!(next > cell, "instances only wait on later cells");
                    self.watch[next].push(inst);
                    self.trail.push(next);
                }
            }
        }
        Some(mark)
    }

    fn unassign(&mut self, cell: usize, mark: usize) {
        self.undo(mark);
        let (op, idx) = self.space.cells[cell];
        self.tables[op][idx] = UNSET;
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let cell = self.trail.pop().expect("trail above mark");
            self.watch[cell].pop();
        }
    }

    fn search(&mut self, depth: usize, budget: &Budget) -> Result<(), ()> {
        if depth == self.space.cells.len() {
            self.out.push(self.tables.clone());
            return Ok(());
        }
        for value in 0..self.space.size {
            if let Some(mark) = self.assign(depth, value) {
                let res = budget.spend(1).and_then(|_| self.search(depth + 1, budget));
                self.unassign(depth, mark);
                res?;
            } else {
                budget.spend(1)?;
            }
        }
        Ok(())
    }
}

struct Budget {
    limit: Option<u64>,
    used: AtomicU64,
    exceeded: AtomicBool,
}

impl Budget {
    fn spend(&self, n: u64) -> Result<(), ()> {
        let used = self.used.fetch_add(n, Ordering::Relaxed) + n;
        match self.limit {
            Some(limit) if used > limit => {
                self.exceeded.store(true, Ordering::Relaxed);
                Err(())
            }
            _ if self.exceeded.load(Ordering::Relaxed) => Err(()),
            _ => Ok(()),
        }
    }
}

/// Number of leading cells fixed per work unit.
const PREFIX_UNITS: usize = 64;

/// All labeled models of one size as raw tables, sorted.
/// `Err` carries the nodes spent before the budget ran out.
fn search_size(theory: &Theory, size: usize, budget: Option<u64>) -> Result<(Vec<Vec<Vec<Elem>>>, u64), u64> {
    if size == 0 {
        if theory.has_constants() {
            return Ok((Vec::new(), 0));
        }
        let empty = theory.signature().iter().map(|_| Vec::new()).collect();
        return Ok((vec![empty], 0));
    }
    let space = Space::new(theory, size);
    let budget_state = Budget { limit: budget, used: AtomicU64::new(0), exceeded: AtomicBool::new(false) };
    if Worker::new(&space).is_none() {
        return Ok((Vec::new(), 0));
    }
    let mut prefix_len = 0;
    while prefix_len < space.cells.len() && pow(size, prefix_len) < PREFIX_UNITS {
        prefix_len += 1;
    }
    let units = pow(size, prefix_len);

    let results: Vec<Result<Vec<Vec<Vec<Elem>>>, ()>> = (0..units)
        .into_par_iter()
        .map(|unit| {
            let mut w = Worker::new(&space).expect("root checked above");
            let mut prefix = vec![0; prefix_len];
            decode(unit, size, &mut prefix);
            for (cell, &value) in prefix.iter().enumerate() {
                budget_state.spend(1)?;
                if w.assign(cell, value).is_none() {
                    return Ok(Vec::new());
                }
            }
            w.search(prefix_len, &budget_state)?;
            Ok(w.out)
        })
        .collect();

    let nodes = budget_state.used.load(Ordering::Relaxed);
    if budget_state.exceeded.load(Ordering::Relaxed) {
        return Err(nodes);
    }
    let mut tables: Vec<Vec<Vec<Elem>>> = results.into_iter().flat_map(|r| r.expect("no abort")).collect();
    tables.sort_by(|a, b| a.iter().flatten().cmp(b.iter().flatten()));
    Ok((tables, nodes))
}

impl Compiled {
    /// Evaluates both sides against partial tables; `Err((symbol, cell))`
    /// names the first unassigned cell met.
    fn eval_partial(
        &self,
        tables: &[Vec<Elem>],
        size: usize,
        env: &[Elem],
        stack: &mut Vec<Elem>,
        unset: Elem,
    ) -> Result<(Elem, Elem), (usize, usize)> {
        let (lhs, rhs) = self.halves();
        let l = run_partial(lhs, tables, size, env, stack, unset)?;
        let r = run_partial(rhs, tables, size, env, stack, unset)?;
        Ok((l, r))
    }
}

fn run_partial(
    code: &[crate::model::Instr],
    tables: &[Vec<Elem>],
    size: usize,
    env: &[Elem],
    stack: &mut Vec<Elem>,
    unset: Elem,
) -> Result<Elem, (usize, usize)> {
    use crate::model::Instr;
    stack.clear();
    for instr in code {
        match *instr {
            Instr::Var(i) => stack.push(env[i]),
            Instr::Apply { op, arity } => {
                let base = stack.len() - arity;
                let cell = stack[base..].iter().fold(0, |acc, &x| acc * size + x);
                stack.truncate(base);
                let v = tables[op][cell];
                if v == unset {
                    return Err((op, cell));
                }
                stack.push(v);
            }
        }
    }
    Ok(stack[0])
}

/// Every total table assignment of one size, filtered through
/// `check_model`. Exponential; only for cross-checking on tiny inputs.
pub fn naive_models(theory: &Arc<Theory>, size: usize) -> Vec<FiniteAlgebra> {
    let shapes: Vec<usize> = theory.signature().iter().map(|s| pow(size, s.arity())).collect();
    let total: usize = shapes.iter().sum();
    let mut out = Vec::new();
    let mut flat = vec![0; total];
    for i in 0..pow(size, total) {
        decode(i, size, &mut flat);
        let mut rest = &flat[..];
        let tables = shapes
            .iter()
            .map(|&n| {
                let (head, tail) = rest.split_at(n);
                rest = tail;
                head.to_vec()
            })
            .collect();
        let alg = FiniteAlgebra::new(theory.clone(), size, tables).expect("shapes match");
        if alg.check_model().is_empty() {
            out.push(alg);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::fixtures::{group, monoid, semilattice, sets};

    fn count(theory: &Theory, k: usize, opts: EnumOptions) -> usize {
        enumerate_models(&Arc::new(theory.clone()), k, &opts).unwrap().len()
    }

    #[test]
    fn empty_signature_has_one_algebra_per_size() {
        assert_eq!(count(&sets(), 3, EnumOptions::exact()), 1);
        let opts = EnumOptions { allow_empty: true, ..Default::default() };
        let models = enumerate_models(&Arc::new(sets()), 2, &opts).unwrap();
        assert_eq!(models.iter().map(|m| m.size()).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn empty_carrier_needs_constant_free_signature() {
        let opts = EnumOptions { allow_empty: true, ..Default::default() };
        let models = enumerate_models(&Arc::new(monoid()), 1, &opts).unwrap();
        assert_eq!(models.len(), 1);
        assert_eq!(models[0].size(), 1);
    }

    #[test]
    fn labeled_monoids_of_size_two() {
        assert_eq!(count(&monoid(), 2, EnumOptions::exact()), 4);
    }

    #[test]
    fn matches_naive_filter_on_small_sizes() {
        for theory in [monoid(), semilattice(), sets()] {
            let theory = Arc::new(theory);
            for size in 1..=2 {
                let fast = enumerate_models(&theory, size, &EnumOptions::exact()).unwrap();
                assert_eq!(fast, naive_models(&theory, size), "{} size {}", theory.name(), size);
            }
        }
    }

    #[test]
    fn output_sorted_and_verified() {
        let models = enumerate_models(&Arc::new(monoid()), 3, &EnumOptions::default()).unwrap();
        assert!(models.windows(2).all(|w| w[0] < w[1]));
        assert!(models.iter().all(FiniteAlgebra::is_model));
    }

    #[test]
    fn independent_of_jobs() {
        let theory = Arc::new(group());
        let one = enumerate_models(&theory, 4, &EnumOptions { jobs: 1, ..Default::default() }).unwrap();
        let many = enumerate_models(&theory, 4, &EnumOptions { jobs: 8, ..Default::default() }).unwrap();
        assert_eq!(one, many);
    }

    #[test]
    fn budget_is_enforced() {
        let opts = EnumOptions { node_budget: Some(50), ..Default::default() };
        let err = enumerate_models(&Arc::new(monoid()), 3, &opts).unwrap_err();
        assert!(matches!(err, EnumError::BoundExceeded { budget: 50, .. }));
        assert_eq!(enumerate_models(&Arc::new(monoid()), 0, &EnumOptions::default()), Err(EnumError::InvalidBound));
    }
}
