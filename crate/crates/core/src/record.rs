//! JSON records for algebras and homomorphisms, and content hashes.

use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dsl::render_theory;
use crate::hom::Homomorphism;
use crate::model::{Elem, FiniteAlgebra, ModelError};
use crate::term::Theory;

/// SHA-256 of the canonical rendering, hex encoded.
pub fn theory_hash(theory: &Theory) -> String {
    hex::encode(Sha256::digest(render_theory(theory).as_bytes()))
}

/// A constant is stored as a bare integer, everything else as a flat
/// row-major array.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TableValue {
    Constant(Elem),
    Table(Vec<Elem>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraRecord {
    pub theory: String,
    pub theory_hash: String,
    pub size: usize,
    pub tables: IndexMap<String, TableValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecordError {
    #[error("record is for theory `{found}` ({found_hash}), expected `{expected}` ({expected_hash})")]
    TheoryMismatch { expected: String, expected_hash: String, found: String, found_hash: String },
    #[error("record has no table for `{0}`")]
    MissingTable(String),
    #[error("record has a table for undeclared symbol `{0}`")]
    ExtraTable(String),
    #[error("`{0}` is a constant and needs a single integer, or an operation and needs an array")]
    TableKind(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid JSON: {0}")]
    Json(String),
}

impl AlgebraRecord {
    pub fn from_algebra(algebra: &FiniteAlgebra) -> Self {
        let theory = algebra.theory();
        let tables = theory
            .signature()
            .iter()
            .zip(algebra.tables())
            .map(|(s, t)| {
                let value = if s.is_constant() { TableValue::Constant(t[0]) } else { TableValue::Table(t.clone()) };
                (s.name().to_string(), value)
            })
            .collect();
        AlgebraRecord {
            theory: theory.name().to_string(),
            theory_hash: theory_hash(theory),
            size: algebra.size(),
            tables,
        }
    }

    /// Rebuilds the algebra; the record must have been written for
    /// `theory`.
    pub fn to_algebra(&self, theory: &Arc<Theory>) -> Result<FiniteAlgebra, RecordError> {
        let expected_hash = theory_hash(theory);
        if self.theory_hash != expected_hash {
            return Err(RecordError::TheoryMismatch {
                expected: theory.name().to_string(),
                expected_hash,
                found: self.theory.clone(),
                found_hash: self.theory_hash.clone(),
            });
        }
        if let Some(extra) = self.tables.keys().find(|k| theory.symbol(k).is_none()) {
            return Err(RecordError::ExtraTable(extra.clone()));
        }
        let tables = theory
            .signature()
            .iter()
            .map(|s| match (self.tables.get(s.name()), s.is_constant()) {
                (None, _) => Err(RecordError::MissingTable(s.name().to_string())),
                (Some(TableValue::Constant(c)), true) => Ok(vec![*c]),
                (Some(TableValue::Table(t)), false) => Ok(t.clone()),
                // an empty-carrier nullary table cannot occur; a 1-entry
                // array for a unary op on a 1-element carrier is fine
                (Some(TableValue::Constant(c)), false) if s.arity() > 0 && self.size == 1 => Ok(vec![*c]),
                _ => Err(RecordError::TableKind(s.name().to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FiniteAlgebra::new(theory.clone(), self.size, tables)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, RecordError> {
        serde_json::from_str(text).map_err(|e| RecordError::Json(e.to_string()))
    }
}

/// First 16 hex digits of the SHA-256 of the algebra's compact record.
pub fn algebra_hash(algebra: &FiniteAlgebra) -> String {
    let json = AlgebraRecord::from_algebra(algebra).to_json();
    hex::encode(Sha256::digest(json.as_bytes()))[..16].to_string()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomRecord {
    pub source: String,
    pub target: String,
    pub map: Vec<Elem>,
}

impl HomRecord {
    pub fn from_hom(hom: &Homomorphism) -> Self {
        HomRecord { source: algebra_hash(hom.source()), target: algebra_hash(hom.target()), map: hom.map().to_vec() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{enumerate_models, EnumOptions};
    use crate::term::fixtures::{group, monoid};
    use proptest::prelude::*;

    #[test]
    fn record_shape() {
        let t = Arc::new(monoid());
        let z2 = FiniteAlgebra::from_fns(t.clone(), 2, &[&|a| a[0] ^ a[1], &|_| 0]).unwrap();
        let json = AlgebraRecord::from_algebra(&z2).to_json();
        let hash = theory_hash(&t);
        assert_eq!(hash.len(), 64);
        assert_eq!(
            json,
            format!(r#"{{"theory":"monoid","theory_hash":"{}","size":2,"tables":{{"mul":[0,1,1,0],"e":0}}}}"#, hash)
        );
        assert_eq!(algebra_hash(&z2).len(), 16);
    }

    #[test]
    fn rejects_foreign_records() {
        let t = Arc::new(monoid());
        let z2 = FiniteAlgebra::from_fns(t.clone(), 2, &[&|a| a[0] ^ a[1], &|_| 0]).unwrap();
        let rec = AlgebraRecord::from_algebra(&z2);
        assert!(matches!(rec.to_algebra(&Arc::new(group())), Err(RecordError::TheoryMismatch { .. })));

        let mut missing = rec.clone();
        missing.tables.shift_remove("e");
        assert_eq!(missing.to_algebra(&t), Err(RecordError::MissingTable("e".into())));

        let mut wrong = rec.clone();
        wrong.tables.insert("e".into(), TableValue::Table(vec![0]));
        assert_eq!(wrong.to_algebra(&t), Err(RecordError::TableKind("e".into())));

        assert!(matches!(AlgebraRecord::from_json("{"), Err(RecordError::Json(_))));
    }

    proptest! {
        #[test]
        fn json_round_trip(index in 0usize..64) {
            let t = Arc::new(group());
            let models = enumerate_models(&t, 4, &EnumOptions::default()).unwrap();
            let a = &models[index % models.len()];
            let rec = AlgebraRecord::from_json(&AlgebraRecord::from_algebra(a).to_json()).unwrap();
            prop_assert_eq!(&rec.to_algebra(&t).unwrap(), a);
        }
    }
}
