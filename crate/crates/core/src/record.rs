//! Modality-tagged data records and their schemas.
//!
//! A [`ModalRecord`] is a set of named fields, each carrying a value and a
//! declared modality tag: `language` for natural-language expressions,
//! `other` for everything else (images, grids, coordinates, ...). Tags are
//! declared by dataset and game authors, never inferred from content.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::action::PayloadSchema;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Language,
    Other,
}

/// A single field of a [`ModalRecord`]: a value plus its modality tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalField {
    pub value: Value,
    pub modality: Modality,
}

impl ModalField {
    pub fn language(value: impl Into<Value>) -> Self {
        ModalField {
            value: value.into(),
            modality: Modality::Language,
        }
    }

    pub fn other(value: impl Into<Value>) -> Self {
        ModalField {
            value: value.into(),
            modality: Modality::Other,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecordError {
    #[error("record has no fields")]
    EmptyRecord,
    #[error("field {field}: {reason}")]
    SchemaViolation { field: String, reason: String },
}

/// Flags derived from a record's modality tags alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModalityProfile {
    pub has_language: bool,
    pub has_other: bool,
}

/// A record of named, modality-tagged fields.
///
/// Field order is canonical (sorted by name), so two records with the same
/// fields compare and serialize identically regardless of insertion order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModalRecord {
    fields: BTreeMap<String, ModalField>,
}

impl ModalRecord {
    pub fn new() -> Self {
        ModalRecord::default()
    }

    pub fn with(mut self, name: impl Into<String>, field: ModalField) -> Self {
        self.fields.insert(name.into(), field);
        self
    }

    pub fn insert(&mut self, name: impl Into<String>, field: ModalField) {
        self.fields.insert(name.into(), field);
    }

    pub fn get(&self, name: &str) -> Option<&ModalField> {
        self.fields.get(name)
    }

    pub fn value(&self, name: &str) -> Option<&Value> {
        self.fields.get(name).map(|f| &f.value)
    }

    pub fn fields(&self) -> impl Iterator<Item = (&String, &ModalField)> {
        self.fields.iter()
    }

    pub fn field_names(&self) -> impl Iterator<Item = &String> {
        self.fields.keys()
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// Modality flags computed from tags only, never from value content.
    ///
    /// A record "contains language" iff at least one field is tagged
    /// `language`. Errors on a record with zero fields.
    pub fn modality_profile(&self) -> Result<ModalityProfile, RecordError> {
        if self.fields.is_empty() {
            return Err(RecordError::EmptyRecord);
        }
        Ok(ModalityProfile {
            has_language: self
                .fields
                .values()
                .any(|f| f.modality == Modality::Language),
            has_other: self.fields.values().any(|f| f.modality == Modality::Other),
        })
    }

    /// Canonical JSON encoding. Keys are sorted, so equal records yield
    /// equal bytes.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("record serialization cannot fail")
    }

    /// Projection onto a subset of fields (missing names are skipped).
    pub fn project<'a>(&self, keep: impl IntoIterator<Item = &'a str>) -> ModalRecord {
        let mut out = ModalRecord::new();
        for name in keep {
            if let Some(f) = self.fields.get(name) {
                out.insert(name, f.clone());
            }
        }
        out
    }
}

/// Declared schema for one record field: modality plus admissible values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSchema {
    pub modality: Modality,
    pub payloads: PayloadSchema,
}

impl FieldSchema {
    pub fn language(payloads: PayloadSchema) -> Self {
        FieldSchema {
            modality: Modality::Language,
            payloads,
        }
    }

    pub fn other(payloads: PayloadSchema) -> Self {
        FieldSchema {
            modality: Modality::Other,
            payloads,
        }
    }
}

/// Schema for a whole record: the exact set of fields it must carry.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RecordSchema {
    fields: BTreeMap<String, FieldSchema>,
}

impl RecordSchema {
    pub fn new() -> Self {
        RecordSchema::default()
    }

    pub fn with(mut self, name: impl Into<String>, schema: FieldSchema) -> Self {
        self.fields.insert(name.into(), schema);
        self
    }

    pub fn fields(&self) -> impl Iterator<Item = (&String, &FieldSchema)> {
        self.fields.iter()
    }

    pub fn field_names(&self) -> impl Iterator<Item = &String> {
        self.fields.keys()
    }

    pub fn contains_field(&self, name: &str) -> bool {
        self.fields.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// True iff any field is declared with language modality.
    pub fn has_language(&self) -> bool {
        self.fields
            .values()
            .any(|f| f.modality == Modality::Language)
    }

    /// True iff any field is declared with non-language modality.
    pub fn has_other(&self) -> bool {
        self.fields.values().any(|f| f.modality == Modality::Other)
    }

    /// Checks a record against this schema: exactly the declared fields,
    /// matching modality tags, and values admitted by each field's payload
    /// schema.
    pub fn check(&self, record: &ModalRecord) -> Result<(), RecordError> {
        for (name, _) in record.fields() {
            if !self.fields.contains_key(name) {
                return Err(RecordError::SchemaViolation {
                    field: name.clone(),
                    reason: "field not declared in schema".into(),
                });
            }
        }
        for (name, schema) in &self.fields {
            let field = record.get(name).ok_or_else(|| RecordError::SchemaViolation {
                field: name.clone(),
                reason: "required field missing".into(),
            })?;
            if field.modality != schema.modality {
                return Err(RecordError::SchemaViolation {
                    field: name.clone(),
                    reason: "modality tag does not match schema".into(),
                });
            }
            if !schema.payloads.admits(&field.value) {
                return Err(RecordError::SchemaViolation {
                    field: name.clone(),
                    reason: "value outside declared payload schema".into(),
                });
            }
        }
        Ok(())
    }

    pub fn matches(&self, record: &ModalRecord) -> bool {
        self.check(record).is_ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn profile_language_only() {
        let rec = ModalRecord::new().with("question", ModalField::language("how many?"));
        let p = rec.modality_profile().unwrap();
        assert!(p.has_language && !p.has_other);
    }

    #[test]
    fn profile_other_only() {
        let rec = ModalRecord::new().with(
            "grid",
            ModalField::other(json!([[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]])),
        );
        let p = rec.modality_profile().unwrap();
        assert!(!p.has_language && p.has_other);
    }

    #[test]
    fn profile_mixed() {
        let rec = ModalRecord::new()
            .with("image", ModalField::other(json!("bytes...")))
            .with("caption", ModalField::language("a giraffe"));
        let p = rec.modality_profile().unwrap();
        assert!(p.has_language && p.has_other);
    }

    #[test]
    fn profile_rejects_empty_record() {
        assert_eq!(
            ModalRecord::new().modality_profile().unwrap_err(),
            RecordError::EmptyRecord
        );
    }

    #[test]
    fn schema_check_flags_missing_and_extra_fields() {
        let schema = RecordSchema::new().with("text", FieldSchema::language(PayloadSchema::AnyString));
        assert!(schema.matches(&ModalRecord::new().with("text", ModalField::language("a"))));
        assert!(!schema.matches(&ModalRecord::new()));
        assert!(!schema.matches(
            &ModalRecord::new()
                .with("text", ModalField::language("a"))
                .with("extra", ModalField::language("b"))
        ));
        // wrong modality tag
        assert!(!schema.matches(&ModalRecord::new().with("text", ModalField::other("a"))));
    }

    #[test]
    fn canonical_json_is_insertion_order_independent() {
        let a = ModalRecord::new()
            .with("b", ModalField::language("x"))
            .with("a", ModalField::other(json!(1)));
        let mut b = ModalRecord::new();
        b.insert("a", ModalField::other(json!(1)));
        b.insert("b", ModalField::language("x"));
        assert_eq!(a.canonical_json(), b.canonical_json());
    }
}
