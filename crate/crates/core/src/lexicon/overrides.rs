use std::collections::BTreeMap;
use std::path::Path;

use crate::model::Classification;
use crate::tsv::{read_table, TableError};

/// Manually reviewed host/pathogen assignments that beat the lineage rule.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overrides {
    by_taxid: BTreeMap<u32, Classification>,
}

impl Overrides {
    pub fn load(path: &Path) -> Result<Overrides, TableError> {
        let mut by_taxid = BTreeMap::new();
        for row in read_table(path, &["taxid", "classification"])? {
            let taxid = row
                .get(0)
                .parse::<u32>()
                .map_err(|_| TableError::row(path, row.line, format!("taxid '{}' is not an integer", row.get(0))))?;
            let class = row.get(1).parse().map_err(|e: String| TableError::row(path, row.line, e))?;
            by_taxid.insert(taxid, class);
        }
        Ok(Overrides { by_taxid })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, Classification)>) -> Overrides {
        Overrides { by_taxid: pairs.into_iter().collect() }
    }

    pub fn get(&self, taxid: u32) -> Option<Classification> {
        self.by_taxid.get(&taxid).copied()
    }
}
