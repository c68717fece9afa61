//! Finitary algebraic theories, computed at desk scale.
//!
//! A theory is presented by operation symbols and equations ([`term`],
//! [`dsl`]). Its finite models are enumerated by [`enumerate`], related by
//! homomorphisms in [`hom`], and the theory's operations are recovered as
//! the natural families of the forgetful functor in [`clone`]. [`sieve`]
//! checks candidate equations against every model up to a size bound.

pub mod clone;
pub mod dsl;
pub mod enumerate;
pub mod free;
pub mod hom;
pub mod model;
pub mod record;
pub mod sieve;
pub mod term;

pub use dsl::{format_term, parse_candidates, parse_term, parse_theory, render_theory, ParseError, ParseErrorKind, SourceSpan};
pub use enumerate::{enumerate_models, EnumError, EnumOptions};
pub use model::{Elem, FiniteAlgebra, ModelError, Violation};
pub use term::{compose, substitute, Equation, LawvereMorphism, Symbol, Term, TermError, Theory, TheoryMorphism};
pub use clone::{
    induced_family, natural_families, reconstruct_theory, restrict_along, validate_theory_morphism, CloneError, CloneOptions,
    ModelCategory, ReconstructionReport, Verdict,
};
pub use free::{free_algebra, FreeAlgebraResult, FreeBounds};
pub use hom::{all_homs, check_naturality, enumerate_homs, enumerate_isos, automorphism_group, Homomorphism, HomError, NaturalFamily};
pub use record::{algebra_hash, theory_hash, AlgebraRecord};
pub use sieve::{check_validity, sieve_candidates, syntactic_equivalence, Equivalence, Sieve, SieveError, Validity};
