use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::model::Ontology;
use crate::normalize::normalize_text;
use crate::schema::Field;
use crate::tsv::{read_table, TableError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Correction<'a> {
    Suppress,
    Remap(&'a str),
}

/// Curated suppress/remap rules for text-mined surface forms, keyed by the
/// normalized surface text and target field.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorrectionsList {
    suppressed: BTreeSet<(String, Field)>,
    remapped: BTreeMap<(String, Field), String>,
}

impl CorrectionsList {
    pub fn load(path: &Path) -> Result<CorrectionsList, TableError> {
        let mut list = CorrectionsList::default();
        for row in read_table(path, &["surface_text", "field", "action"])? {
            let surface = normalize_text(row.get(0));
            if surface.is_empty() {
                return Err(TableError::row(path, row.line, "empty surface_text"));
            }
            let field: Field = row.get(1).parse().map_err(|e| TableError::row(path, row.line, format!("{e}")))?;
            if !field.is_term_list() {
                return Err(TableError::row(path, row.line, format!("{field} does not hold terms")));
            }
            let result = match row.get(2) {
                "suppress" => list.suppress(&surface, field),
                "remap" => {
                    let curie = row.get(3);
                    if Ontology::from_curie(curie).is_none() {
                        return Err(TableError::row(path, row.line, format!("remap needs a known curie, got '{curie}'")));
                    }
                    list.remap(&surface, field, curie)
                }
                other => return Err(TableError::row(path, row.line, format!("unknown action '{other}'"))),
            };
            result.map_err(|m| TableError::row(path, row.line, m))?;
        }
        Ok(list)
    }

    pub fn suppress(&mut self, surface: &str, field: Field) -> Result<(), String> {
        let key = (normalize_text(surface), field);
        if self.remapped.contains_key(&key) {
            return Err(format!("'{}' is both suppressed and remapped for {field}", key.0));
        }
        self.suppressed.insert(key);
        Ok(())
    }

    pub fn remap(&mut self, surface: &str, field: Field, curie: &str) -> Result<(), String> {
        let key = (normalize_text(surface), field);
        if self.suppressed.contains(&key) {
            return Err(format!("'{}' is both suppressed and remapped for {field}", key.0));
        }
        self.remapped.insert(key, curie.to_string());
        Ok(())
    }

    pub fn correction(&self, surface: &str, field: Field) -> Option<Correction<'_>> {
        let key = (normalize_text(surface), field);
        if self.suppressed.contains(&key) {
            return Some(Correction::Suppress);
        }
        self.remapped.get(&key).map(|c| Correction::Remap(c))
    }

    pub fn is_empty(&self) -> bool {
        self.suppressed.is_empty() && self.remapped.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conflicting_rules_rejected() {
        let mut list = CorrectionsList::default();
        list.suppress("TB", Field::HealthCondition).unwrap();
        assert!(list.remap("tb", Field::HealthCondition, "MONDO:1").is_err());
        assert!(list.remap("tb", Field::Species, "NCBITaxon:1").is_ok());
        assert_eq!(list.correction("Tb", Field::HealthCondition), Some(Correction::Suppress));
        assert_eq!(list.correction("tb", Field::Species), Some(Correction::Remap("NCBITaxon:1")));
    }
}
