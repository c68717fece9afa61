//! Homomorphisms between finite algebras, automorphism groups and
//! naturality checks for families of functions indexed by algebras.

use std::sync::Arc;

use thiserror::Error;

use crate::model::{decode, pow, tuples, Elem, FiniteAlgebra};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HomError {
    #[error("algebras belong to different theories (`{0}` and `{1}`)")]
    TheoryMismatch(String, String),
    #[error("map has {found} entries but the source has {expected} elements")]
    SizeMismatch { expected: usize, found: usize },
    #[error("map sends {element} to {value}, outside a target of size {size}")]
    OutOfRange { element: Elem, value: Elem, size: usize },
    #[error("homomorphisms are not composable")]
    NotComposable,
    #[error("square for `{}` does not commute at {:?}", .0.symbol, .0.input)]
    NotHomomorphism(FailedSquare),
    #[error("automorphisms fail to form a group")]
    NotAGroup,
    #[error("family has no component for an algebra of size {0} used by a homomorphism")]
    MissingComponent(usize),
    #[error("family component for an algebra of size {size} has {found} entries, expected {expected}")]
    ComponentShape { size: usize, expected: usize, found: usize },
}

/// A square `map(op_A(input)) = op_B(map(input))` that does not commute.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FailedSquare {
    pub symbol: String,
    pub input: Vec<Elem>,
    /// `map(op_A(input))`
    pub via_source: Elem,
    /// `op_B(map(input))`
    pub via_target: Elem,
}

fn same_theory(a: &FiniteAlgebra, b: &FiniteAlgebra) -> Result<(), HomError> {
    if Arc::ptr_eq(a.theory(), b.theory()) || a.theory() == b.theory() {
        Ok(())
    } else {
        Err(HomError::TheoryMismatch(a.theory().name().into(), b.theory().name().into()))
    }
}

fn check_map(map: &[Elem], a: &FiniteAlgebra, b: &FiniteAlgebra) -> Result<(), HomError> {
    same_theory(a, b)?;
    if map.len() != a.size() {
        return Err(HomError::SizeMismatch { expected: a.size(), found: map.len() });
    }
    if let Some((element, &value)) = map.iter().enumerate().find(|(_, &v)| v >= b.size()) {
        return Err(HomError::OutOfRange { element, value, size: b.size() });
    }
    Ok(())
}

/// The first non-commuting square, symbols in signature order and inputs
/// lexicographic; `None` when `map` is a homomorphism.
pub fn first_failed_square(map: &[Elem], a: &FiniteAlgebra, b: &FiniteAlgebra) -> Result<Option<FailedSquare>, HomError> {
    check_map(map, a, b)?;
    let mut image = Vec::new();
    for (op, symbol) in a.theory().signature().iter().enumerate() {
        for input in tuples(a.size(), symbol.arity()) {
            image.clear();
            image.extend(input.iter().map(|&x| map[x]));
            let via_source = map[a.apply(op, &input)];
            let via_target = b.apply(op, &image);
            if via_source != via_target {
                return Ok(Some(FailedSquare {
                    symbol: symbol.name().to_string(),
                    input,
                    via_source,
                    via_target,
                }));
            }
        }
    }
    Ok(None)
}

pub fn is_homomorphism(map: &[Elem], a: &FiniteAlgebra, b: &FiniteAlgebra) -> bool {
    matches!(first_failed_square(map, a, b), Ok(None))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Homomorphism {
    source: Arc<FiniteAlgebra>,
    target: Arc<FiniteAlgebra>,
    map: Vec<Elem>,
}

impl Homomorphism {
    /// Checks every square before accepting `map`.
    pub fn new(source: Arc<FiniteAlgebra>, target: Arc<FiniteAlgebra>, map: Vec<Elem>) -> Result<Self, HomError> {
        match first_failed_square(&map, &source, &target)? {
            None => Ok(Homomorphism { source, target, map }),
            Some(square) => Err(HomError::NotHomomorphism(square)),
        }
    }

    pub fn identity(algebra: Arc<FiniteAlgebra>) -> Self {
        let map = (0..algebra.size()).collect();
        Homomorphism { source: algebra.clone(), target: algebra, map }
    }

    pub fn source(&self) -> &Arc<FiniteAlgebra> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteAlgebra> {
        &self.target
    }

    pub fn map(&self) -> &[Elem] {
        &self.map
    }

    pub fn apply(&self, x: Elem) -> Elem {
        self.map[x]
    }

    pub fn is_bijective(&self) -> bool {
        if self.source.size() != self.target.size() {
            return false;
        }
        let mut seen = vec![false; self.target.size()];
        self.map.iter().all(|&y| !std::mem::replace(&mut seen[y], true))
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Homomorphism) -> Result<Homomorphism, HomError> {
        if *self.target != *next.source {
            return Err(HomError::NotComposable);
        }
        Ok(Homomorphism {
            source: self.source.clone(),
            target: next.target.clone(),
            map: self.map.iter().map(|&x| next.map[x]).collect(),
        })
    }

    pub fn inverse(&self) -> Option<Homomorphism> {
        if !self.is_bijective() {
            return None;
        }
        let mut map = vec![0; self.map.len()];
        for (x, &y) in self.map.iter().enumerate() {
            map[y] = x;
        }
        Some(Homomorphism { source: self.target.clone(), target: self.source.clone(), map })
    }
}

/// Backtracking over element images. Constants are pinned first; after
/// each choice every operation instance whose arguments all have images
/// forces the image of its result.
struct HomSearch<'a> {
    a: &'a FiniteAlgebra,
    b: &'a FiniteAlgebra,
    arities: Vec<usize>,
    out: Vec<Vec<Elem>>,
}

const FREE: Elem = Elem::MAX;

impl HomSearch<'_> {
    /// Closes `map` under the operations; false on a clash.
    fn propagate(&self, map: &mut [Elem]) -> bool {
        let (a, b) = (self.a, self.b);
        let mut input = Vec::new();
        let mut image = Vec::new();
        loop {
            let mut changed = false;
            for (op, &arity) in self.arities.iter().enumerate() {
                input.resize(arity, 0);
                for cell in 0..pow(a.size(), arity) {
                    decode(cell, a.size(), &mut input);
                    if input.iter().any(|&x| map[x] == FREE) {
                        continue;
                    }
                    image.clear();
                    image.extend(input.iter().map(|&x| map[x]));
                    let forced = b.apply(op, &image);
                    let result = a.tables()[op][cell];
                    if map[result] == FREE {
                        map[result] = forced;
                        changed = true;
                    } else if map[result] != forced {
                        return false;
                    }
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn search(&mut self, mut map: Vec<Elem>) {
        if !self.propagate(&mut map) {
            return;
        }
        match map.iter().position(|&y| y == FREE) {
            None => self.out.push(map),
            Some(x) => {
                for y in 0..self.b.size() {
                    let mut next = map.clone();
                    next[x] = y;
                    self.search(next);
                }
            }
        }
    }
}

/// All homomorphisms `a -> b`, in lexicographic order of their maps.
pub fn enumerate_homs(a: &Arc<FiniteAlgebra>, b: &Arc<FiniteAlgebra>) -> Result<Vec<Homomorphism>, HomError> {
    same_theory(a, b)?;
    let arities = a.theory().signature().iter().map(|s| s.arity()).collect();
    let mut search = HomSearch { a, b, arities, out: Vec::new() };
    if a.size() == 0 {
        search.out.push(Vec::new());
    } else if b.size() > 0 {
        search.search(vec![FREE; a.size()]);
    }
    let mut maps = search.out;
    maps.sort();
    Ok(maps
        .into_iter()
        .map(|map| Homomorphism { source: a.clone(), target: b.clone(), map })
        .collect())
}

/// Bijective homomorphisms only.
pub fn enumerate_isos(a: &Arc<FiniteAlgebra>, b: &Arc<FiniteAlgebra>) -> Result<Vec<Homomorphism>, HomError> {
    let mut homs = enumerate_homs(a, b)?;
    homs.retain(Homomorphism::is_bijective);
    Ok(homs)
}

/// Bijective endomorphisms, checked to contain the identity and be closed
/// under composition and inverses.
pub fn automorphism_group(a: &Arc<FiniteAlgebra>) -> Result<Vec<Homomorphism>, HomError> {
    let auts = enumerate_isos(a, a)?;
    if !is_group(&auts) {
        return Err(HomError::NotAGroup);
    }
    Ok(auts)
}

fn is_group(auts: &[Homomorphism]) -> bool {
    let contains = |h: &Homomorphism| auts.iter().any(|g| g.map == h.map);
    let Some(first) = auts.first() else { return false };
    contains(&Homomorphism::identity(first.source.clone()))
        && auts.iter().all(|f| f.inverse().is_some_and(|inv| contains(&inv)))
        && auts
            .iter()
            .all(|f| auts.iter().all(|g| f.then(g).is_ok_and(|fg| contains(&fg))))
}

/// A function `A^n -> A^m` for each algebra `A` of a collection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NaturalFamily {
    arity: usize,
    coarity: usize,
    components: Vec<FamilyComponent>,
}

/// `table[encode(input) * coarity + j]` is the `j`-th output coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyComponent {
    pub algebra: Arc<FiniteAlgebra>,
    pub table: Vec<Elem>,
}

/// A naturality square that does not commute.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NaturalityFailure {
    /// index into the checked homomorphism list
    pub hom: usize,
    pub input: Vec<Elem>,
    /// `f^m(alpha_A(input))`
    pub via_source: Vec<Elem>,
    /// `alpha_B(f^n(input))`
    pub via_target: Vec<Elem>,
}

impl NaturalFamily {
    pub fn new(arity: usize, coarity: usize, components: Vec<FamilyComponent>) -> Result<Self, HomError> {
        for c in &components {
            let expected = pow(c.algebra.size(), arity) * coarity;
            if c.table.len() != expected {
                return Err(HomError::ComponentShape { size: c.algebra.size(), expected, found: c.table.len() });
            }
            if c.table.iter().any(|&v| v >= c.algebra.size()) {
                return Err(HomError::OutOfRange { element: 0, value: c.algebra.size(), size: c.algebra.size() });
            }
        }
        Ok(NaturalFamily { arity, coarity, components })
    }

    /// `α_A = f(A)` for each algebra, `f` returning a full table.
    pub fn from_fn(
        arity: usize,
        coarity: usize,
        algebras: &[Arc<FiniteAlgebra>],
        mut f: impl FnMut(&FiniteAlgebra, &[Elem]) -> Vec<Elem>,
    ) -> Result<Self, HomError> {
        let components = algebras
            .iter()
            .map(|a| FamilyComponent {
                algebra: a.clone(),
                table: tuples(a.size(), arity).flat_map(|t| f(a, &t)).collect(),
            })
            .collect();
        NaturalFamily::new(arity, coarity, components)
    }

    pub fn identity(arity: usize, algebras: &[Arc<FiniteAlgebra>]) -> Self {
        NaturalFamily::from_fn(arity, arity, algebras, |_, t| t.to_vec()).expect("identity tables fit")
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn coarity(&self) -> usize {
        self.coarity
    }

    pub fn components(&self) -> &[FamilyComponent] {
        &self.components
    }

    pub fn component(&self, algebra: &FiniteAlgebra) -> Option<&FamilyComponent> {
        self.components.iter().find(|c| *c.algebra == *algebra)
    }

    /// `α_A(input)`.
    pub fn apply(&self, component: &FamilyComponent, input: &[Elem]) -> Vec<Elem> {
        let row = crate::model::encode(input, component.algebra.size()) * self.coarity;
        component.table[row..row + self.coarity].to_vec()
    }

    /// Checks `f^m ∘ α_A = α_B ∘ f^n` pointwise for every `f: A -> B` in
    /// `homs`. Returns the first failing square, homs in list order and
    /// inputs lexicographic.
    pub fn check_naturality(&self, homs: &[Homomorphism]) -> Result<Option<NaturalityFailure>, HomError> {
        for (index, f) in homs.iter().enumerate() {
            let src = self.component(f.source()).ok_or(HomError::MissingComponent(f.source().size()))?;
            let tgt = self.component(f.target()).ok_or(HomError::MissingComponent(f.target().size()))?;
            for input in tuples(f.source().size(), self.arity) {
                let via_source: Vec<Elem> = self.apply(src, &input).into_iter().map(|y| f.apply(y)).collect();
                let moved: Vec<Elem> = input.iter().map(|&x| f.apply(x)).collect();
                let via_target = self.apply(tgt, &moved);
                if via_source != via_target {
                    return Ok(Some(NaturalityFailure { hom: index, input, via_source, via_target }));
                }
            }
        }
        Ok(None)
    }
}

/// Free function form of [`NaturalFamily::check_naturality`].
pub fn check_naturality(family: &NaturalFamily, homs: &[Homomorphism]) -> Result<Option<NaturalityFailure>, HomError> {
    family.check_naturality(homs)
}

/// Homomorphisms between every ordered pair of `algebras` (including each
/// algebra with itself), pairs in collection order.
pub fn all_homs(algebras: &[Arc<FiniteAlgebra>]) -> Result<Vec<Homomorphism>, HomError> {
    use rayon::prelude::*;
    let pairs: Vec<(usize, usize)> = (0..algebras.len())
        .flat_map(|i| (0..algebras.len()).map(move |j| (i, j)))
        .collect();
    let per_pair: Result<Vec<Vec<Homomorphism>>, HomError> = pairs
        .par_iter()
        .map(|&(i, j)| enumerate_homs(&algebras[i], &algebras[j]))
        .collect();
    Ok(per_pair?.into_iter().flatten().collect())
}
