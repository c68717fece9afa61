//! The `lawvere` command line.
//!
//! Machine output is JSON on stdout. Exit status: 0 on success, 1 when a
//! negative result was found (a refuted candidate, an extra natural family,
//! a failed model check), 2 on usage or input errors and 3 when a search
//! bound was hit. A negative result wins over a bound.

pub mod args;
pub mod cache;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Parser;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use lawvere::clone::{
    compare_cell, reconstruct_in, render_op_tuple, restrict_validated, validate_with, CloneError, CloneOptions, FamilyJson,
    ModelCategory, ReconstructionCell, RestrictError, Verdict,
};
use lawvere::dsl::{format_equation, morphism_endpoints, parse_theory_morphism};
use lawvere::record::{algebra_hash, theory_hash, AlgebraRecord, HomRecord};
use lawvere::sieve::{Equivalence, Sieve, SieveError};
use lawvere::{
    automorphism_group, enumerate_homs, enumerate_isos, format_term, free_algebra, parse_candidates, parse_term, parse_theory,
    EnumError, FiniteAlgebra, FreeAlgebraResult, FreeBounds, HomError, ParseError, Theory,
};

use args::{Cli, Command, GlobalArgs, SearchArgs};
use cache::ModelCache;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BOUND: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{source}", path.display())]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error("{0}")]
    Bound(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Bound(_) => EXIT_BOUND,
            _ => EXIT_USAGE,
        }
    }
}

impl From<EnumError> for CliError {
    fn from(e: EnumError) -> Self {
        match e {
            EnumError::BoundExceeded { .. } => CliError::Bound(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<CloneError> for CliError {
    fn from(e: CloneError) -> Self {
        match e {
            CloneError::Enumeration(e) => e.into(),
            CloneError::BoundExceeded(_) => CliError::Bound(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<SieveError> for CliError {
    fn from(e: SieveError) -> Self {
        match e {
            SieveError::Enumeration(e) => e.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<HomError> for CliError {
    fn from(e: HomError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<RestrictError> for CliError {
    fn from(e: RestrictError) -> Self {
        match e {
            RestrictError::Sieve(e) => e.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}

/// Runs the command line with `args` (program name first) and returns the
/// exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.global.jobs as usize).build() {
        Ok(pool) => pool,
        Err(e) => {
            let _ = writeln!(err, "error: could not start worker pool: {e}");
            return EXIT_USAGE;
        }
    };
    let mut session = Session::new(&cli.global);
    let result = pool.install(|| session.dispatch(&cli.command));
    for warning in session.cache.take_warnings() {
        let _ = writeln!(err, "warning: {warning}");
    }
    let code = match result {
        Ok(output) => {
            let _ = out.write_all(output.stdout.as_bytes());
            if cli.global.pretty || cli.global.verbose {
                let _ = err.write_all(output.summary.as_bytes());
            }
            output.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    };
    if cli.global.verbose {
        let s = session.cache.stats();
        let _ = writeln!(err, "cache: {} hit(s), {} computation(s), {} write(s)", s.hits, s.computations, s.writes);
    }
    let _ = out.flush();
    code
}

struct Output {
    stdout: String,
    summary: String,
    code: i32,
}

impl Output {
    fn new() -> Self {
        Output { stdout: String::new(), summary: String::new(), code: EXIT_OK }
    }

    fn json(&mut self, value: &impl Serialize) {
        self.stdout.push_str(&serde_json::to_string(value).expect("output serializes"));
        self.stdout.push('\n');
    }

    fn note(&mut self, line: impl AsRef<str>) {
        self.summary.push_str(line.as_ref());
        self.summary.push('\n');
    }
}

struct Session {
    cache: ModelCache,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn load_theory(path: &Path) -> Result<Arc<Theory>, CliError> {
    parse_theory(&read(path)?).map(Arc::new).map_err(|source| CliError::Parse { path: path.to_path_buf(), source })
}

fn load_algebra(path: &Path, theory: &Arc<Theory>) -> Result<FiniteAlgebra, CliError> {
    AlgebraRecord::from_json(&read(path)?)
        .and_then(|r| r.to_algebra(theory))
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn require_model(path: &Path, a: &FiniteAlgebra) -> Result<(), CliError> {
    match a.check_model().into_iter().next() {
        None => Ok(()),
        Some(v) => Err(CliError::Input(format!(
            "{}: not a model, `{}` fails at {:?}",
            path.display(),
            v.equation.name,
            v.env
        ))),
    }
}

fn positive(name: &str, k: usize) -> Result<(), CliError> {
    if k == 0 {
        return Err(CliError::Input(format!("--{name} must be at least 1")));
    }
    Ok(())
}

fn clone_options(search: &SearchArgs) -> CloneOptions {
    CloneOptions {
        free_bounds: FreeBounds { max_elements: search.max_elements, max_depth: search.free_depth },
        node_budget: search.node_budget,
        shortcut: !search.no_shortcut,
        ..Default::default()
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Equal => "EQUAL",
        Verdict::ExtraNatural => "EXTRA_NATURAL",
        Verdict::BoundExceeded => "BOUND_EXCEEDED",
    }
}

impl Session {
    fn new(global: &GlobalArgs) -> Self {
        let dir = if global.no_cache { None } else { Some(global.cache_dir.clone().unwrap_or_else(ModelCache::default_dir)) };
        Session { cache: ModelCache::new(dir) }
    }

    fn category(&mut self, theory: &Arc<Theory>, k: usize) -> Result<ModelCategory, CliError> {
        let models = self.cache.models(theory, k, true)?;
        Ok(ModelCategory::from_models(theory, k, models)?)
    }

    fn sieve(&mut self, theory: &Arc<Theory>, k: usize) -> Result<Sieve, CliError> {
        let models = self.cache.models(theory, k, true)?;
        Ok(Sieve::from_models(theory, k, models))
    }

    fn dispatch(&mut self, command: &Command) -> Result<Output, CliError> {
        match command {
            Command::Check { file, model } => self.check(file, model.as_deref()),
            Command::Models { file, max_size, exact, up_to_iso } => self.models(file, *max_size, *exact, *up_to_iso),
            Command::Homs { file, from, to, isos_only } => self.homs(file, from, to, *isos_only),
            Command::Auts { file, model } => self.auts(file, model),
            Command::Free { file, generators, max_elements, max_depth } => {
                self.free(file, *generators, FreeBounds { max_elements: *max_elements, max_depth: *max_depth })
            }
            Command::Clone { file, arity, coarity, max_size, depth, search } => {
                self.clone_cmd(file, *arity, *coarity, *max_size, *depth, search)
            }
            Command::Reconstruct { file, max_arity, max_coarity, max_size, depth, search } => {
                self.reconstruct(file, *max_arity, *max_coarity, *max_size, *depth, search)
            }
            Command::Sieve { file, candidates, max_size } => self.sieve_cmd(file, candidates, *max_size),
            Command::Equiv { file, lhs, rhs, max_size, vars } => self.equiv(file, lhs, rhs, *max_size, vars.as_deref()),
            Command::Restrict { morphism, model, max_size } => self.restrict(morphism, model, *max_size),
        }
    }

    fn check(&mut self, file: &Path, model: Option<&Path>) -> Result<Output, CliError> {
        let theory = load_theory(file)?;
        let mut out = Output::new();
        let operations: Vec<_> = theory.signature().iter().map(|s| json!({"name": s.name(), "arity": s.arity()})).collect();
        let equations: Vec<String> = theory.equations().iter().map(format_equation).collect();
        let mut doc = json!({
            "theory": theory.name(),
            "theory_hash": theory_hash(&theory),
            "operations": operations,
            "equations": equations,
        });
        out.note(format!("theory {}: {} operation(s), {} equation(s)", theory.name(), operations.len(), equations.len()));
        if let Some(path) = model {
            let a = load_algebra(path, &theory)?;
            let violations = a.check_model();
            let listed: Vec<_> = violations
                .iter()
                .map(|v| json!({"equation": v.equation.name, "env": v.env, "lhs": v.lhs_value, "rhs": v.rhs_value}))
                .collect();
            doc["model"] = json!({
                "hash": algebra_hash(&a),
                "size": a.size(),
                "is_model": violations.is_empty(),
                "violations": listed,
            });
            if let Some(v) = violations.first() {
                out.code = EXIT_NEGATIVE;
                out.note(format!("not a model: {} violation(s), first `{}` at {:?}", violations.len(), v.equation.name, v.env));
            } else {
                out.note(format!("model of size {} satisfies every equation", a.size()));
            }
        }
        out.json(&doc);
        Ok(out)
    }

    fn models(&mut self, file: &Path, k: usize, exact: bool, up_to_iso: bool) -> Result<Output, CliError> {
        positive("max-size", k)?;
        let theory = load_theory(file)?;
        let models = self.cache.models(&theory, k, up_to_iso)?;
        let mut out = Output::new();
        let mut counts = vec![0usize; k + 1];
        for a in models.iter().filter(|a| !exact || a.size() == k) {
            counts[a.size()] += 1;
            out.json(&AlgebraRecord::from_algebra(a));
        }
        let kind = if up_to_iso { "up to isomorphism" } else { "labeled" };
        for (size, count) in counts.iter().enumerate().skip(if exact { k } else { 1 }) {
            out.note(format!("size {size}: {count} model(s) {kind}"));
        }
        Ok(out)
    }

    fn homs(&mut self, file: &Path, from: &Path, to: &Path, isos_only: bool) -> Result<Output, CliError> {
        let theory = load_theory(file)?;
        let a = Arc::new(load_algebra(from, &theory)?);
        let b = Arc::new(load_algebra(to, &theory)?);
        let homs = if isos_only { enumerate_isos(&a, &b)? } else { enumerate_homs(&a, &b)? };
        let mut out = Output::new();
        for h in &homs {
            out.json(&HomRecord::from_hom(h));
        }
        out.note(format!("{} {}", homs.len(), if isos_only { "isomorphism(s)" } else { "homomorphism(s)" }));
        Ok(out)
    }

    fn auts(&mut self, file: &Path, model: &Path) -> Result<Output, CliError> {
        let theory = load_theory(file)?;
        let a = Arc::new(load_algebra(model, &theory)?);
        require_model(model, &a)?;
        let auts = automorphism_group(&a)?;
        let maps: Vec<&[usize]> = auts.iter().map(|h| h.map()).collect();
        let mut out = Output::new();
        out.json(&json!({"model": algebra_hash(&a), "size": a.size(), "order": auts.len(), "automorphisms": maps}));
        out.note(format!("automorphism group of order {}", auts.len()));
        Ok(out)
    }

    fn free(&mut self, file: &Path, n: usize, bounds: FreeBounds) -> Result<Output, CliError> {
        let theory = load_theory(file)?;
        let mut out = Output::new();
        match free_algebra(&theory, n, bounds) {
            FreeAlgebraResult::Finite { algebra, generators, element_terms, trace } => {
                let names = lawvere::dsl::default_var_names(n);
                let elements: Vec<String> = element_terms.iter().map(|t| format_term(t, &names)).collect();
                out.note(format!("F({n}) is finite with {} element(s): {}", elements.len(), elements.join(", ")));
                out.json(&json!({
                    "status": "finite",
                    "generators": n,
                    "size": algebra.size(),
                    "elements": elements,
                    "generator_elements": generators,
                    "trace": trace,
                    "algebra": AlgebraRecord::from_algebra(&algebra),
                }));
            }
            FreeAlgebraResult::BoundExceeded { classes_found, depth_reached, trace, reason } => {
                let reason = format!("{reason:?}").to_lowercase();
                out.note(format!("gave up at depth {depth_reached} with {classes_found} classes ({reason} bound); trace {trace:?}"));
                out.json(&json!({
                    "status": "bound_exceeded",
                    "generators": n,
                    "classes_found": classes_found,
                    "depth_reached": depth_reached,
                    "reason": reason,
                    "trace": trace,
                }));
                out.code = EXIT_BOUND;
            }
        }
        Ok(out)
    }

    fn clone_cmd(&mut self, file: &Path, n: usize, m: usize, k: usize, depth: usize, search: &SearchArgs) -> Result<Output, CliError> {
        positive("max-size", k)?;
        positive("coarity", m)?;
        let theory = load_theory(file)?;
        let opts = clone_options(search);
        let cat = self.category(&theory, k)?;
        let clone = cat.term_clone(n, depth, opts.free_bounds)?;
        let cell = compare_cell(&cat, &clone, m, &opts);
        let families: Vec<_> = cell
            .families
            .iter()
            .map(|f| {
                json!({
                    "term": f.term.as_ref().map(|t| render_op_tuple(t, n)),
                    "components": FamilyJson::from_family(&f.family).components,
                })
            })
            .collect();
        let mut out = Output::new();
        out.json(&json!({
            "theory": theory.name(),
            "k": k,
            "depth": depth,
            "n": n,
            "m": m,
            "method": cell.method,
            "natural_count": cell.natural_count,
            "term_op_count": cell.term_ops.len(),
            "verdict": cell.verdict,
            "families": families,
            "unresolved": cell.unresolved,
            "note": cell.note,
        }));
        summarize_cell(&mut out, &cell);
        out.code = cell_code(&[&cell]);
        Ok(out)
    }

    fn reconstruct(
        &mut self,
        file: &Path,
        n_max: usize,
        m_max: usize,
        k: usize,
        depth: usize,
        search: &SearchArgs,
    ) -> Result<Output, CliError> {
        positive("max-size", k)?;
        positive("max-coarity", m_max)?;
        let theory = load_theory(file)?;
        let cat = self.category(&theory, k)?;
        let report = reconstruct_in(&cat, n_max, m_max, depth, &clone_options(search))?;
        let mut out = Output::new();
        out.json(&report.to_json());
        for cell in &report.cells {
            summarize_cell(&mut out, cell);
        }
        out.code = cell_code(&report.cells.iter().collect::<Vec<_>>());
        Ok(out)
    }

    fn sieve_cmd(&mut self, file: &Path, candidates: &Path, k: usize) -> Result<Output, CliError> {
        positive("max-size", k)?;
        let theory = load_theory(file)?;
        let eqs = parse_candidates(&read(candidates)?, &theory)
            .map_err(|source| CliError::Parse { path: candidates.to_path_buf(), source })?;
        let outcome = self.sieve(&theory, k)?.sieve(&eqs)?;
        let mut out = Output::new();
        out.json(&outcome.report());
        for eq in &outcome.surviving {
            out.note(format!("survives k={k}: {}", format_equation(eq)));
        }
        for (eq, c) in &outcome.refuted {
            out.note(format!(
                "refuted: {} in a model of size {} at {:?} ({} vs {})",
                eq.name,
                c.model.size(),
                c.env,
                c.lhs_value,
                c.rhs_value
            ));
        }
        for d in &outcome.duplicates {
            out.note(format!("duplicate: {} repeats {}", d.equation.name, d.same_as));
        }
        if !outcome.refuted.is_empty() {
            out.code = EXIT_NEGATIVE;
        }
        Ok(out)
    }

    fn equiv(&mut self, file: &Path, lhs: &str, rhs: &str, k: usize, vars: Option<&[String]>) -> Result<Output, CliError> {
        positive("max-size", k)?;
        let theory = load_theory(file)?;
        let term_error = |which: &str, e: ParseError| CliError::Input(format!("--{which}: {e}"));
        let names: Vec<String> = match vars {
            Some(v) => v.to_vec(),
            None => {
                let (_, mut names) = parse_term(lhs, &theory, None).map_err(|e| term_error("lhs", e))?;
                let (_, more) = parse_term(rhs, &theory, None).map_err(|e| term_error("rhs", e))?;
                for name in more {
                    if !names.contains(&name) {
                        names.push(name);
                    }
                }
                names
            }
        };
        let (l, _) = parse_term(lhs, &theory, Some(&names)).map_err(|e| term_error("lhs", e))?;
        let (r, _) = parse_term(rhs, &theory, Some(&names)).map_err(|e| term_error("rhs", e))?;
        let verdict = self.sieve(&theory, k)?.equivalent(&l, &r, names.len())?;
        let mut out = Output::new();
        let mut doc = json!({
            "lhs": format_term(&l, &names),
            "rhs": format_term(&r, &names),
            "vars": names,
            "k": k,
        });
        match verdict {
            Equivalence::EquivalentUpTo(_) => {
                doc["verdict"] = "EQUIVALENT".into();
                out.note(format!("equivalent on every model of size at most {k}"));
            }
            Equivalence::Distinguished(c) => {
                doc["verdict"] = "DISTINGUISHED".into();
                doc["model"] = algebra_hash(&c.model).into();
                doc["size"] = c.model.size().into();
                doc["env"] = json!(c.env);
                doc["lhs_value"] = c.lhs_value.into();
                doc["rhs_value"] = c.rhs_value.into();
                out.note(format!("distinguished in a model of size {} at {:?}", c.model.size(), c.env));
                out.code = EXIT_NEGATIVE;
            }
        }
        out.json(&doc);
        Ok(out)
    }

    fn restrict(&mut self, morphism: &Path, model: &Path, k: usize) -> Result<Output, CliError> {
        positive("max-size", k)?;
        let text = read(morphism)?;
        let parse_error = |source| CliError::Parse { path: morphism.to_path_buf(), source };
        let (source_path, target_path) = morphism_endpoints(&text).map_err(parse_error)?;
        let base = morphism.parent().unwrap_or(Path::new(""));
        let source = load_theory(&base.join(source_path))?;
        let target = load_theory(&base.join(target_path))?;
        let f = parse_theory_morphism(&text, source, target.clone()).map_err(parse_error)?;
        let b = load_algebra(model, &target)?;
        require_model(model, &b)?;
        let mut out = Output::new();
        if let Some(bad) = validate_with(&f, &self.sieve(&target, k)?)? {
            let c = &bad.counterexample;
            out.json(&json!({
                "valid": false,
                "morphism": f.name(),
                "equation": bad.equation.name,
                "translated": format_equation(&bad.translated),
                "model": algebra_hash(&c.model),
                "size": c.model.size(),
                "env": c.env,
                "lhs": c.lhs_value,
                "rhs": c.rhs_value,
            }));
            out.note(format!(
                "morphism {} is not valid: `{}` becomes `{}`, which fails in a model of size {} at {:?}",
                f.name(),
                bad.equation.name,
                format_equation(&bad.translated),
                c.model.size(),
                c.env
            ));
            out.code = EXIT_NEGATIVE;
            return Ok(out);
        }
        let restricted = restrict_validated(&f, &b)?;
        out.json(&AlgebraRecord::from_algebra(&restricted));
        out.note(format!("restricted along {} to a {} model of size {}", f.name(), f.source().name(), restricted.size()));
        Ok(out)
    }
}

fn summarize_cell(out: &mut Output, cell: &ReconstructionCell) {
    let mut line = format!(
        "n={} m={}: {} term op(s), {} natural, {}",
        cell.n,
        cell.m,
        cell.term_ops.len(),
        cell.natural_count.map_or("?".to_string(), |c| c.to_string()),
        verdict_name(cell.verdict)
    );
    if cell.unresolved > 0 {
        let _ = write!(line, ", {} unconfirmed merge(s)", cell.unresolved);
    }
    if let Some(note) = &cell.note {
        let _ = write!(line, " ({note})");
    }
    out.note(line);
}

fn cell_code(cells: &[&ReconstructionCell]) -> i32 {
    if cells.iter().any(|c| c.verdict == Verdict::ExtraNatural) {
        EXIT_NEGATIVE
    } else if cells.iter().any(|c| c.verdict == Verdict::BoundExceeded) {
        EXIT_BOUND
    } else {
        EXIT_OK
    }
}
