use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::normalize::normalize_text;
use crate::tsv::{parse_table, Row, TableError};

const HEADER: [&str; 5] = ["taxid", "scientific_name", "rank", "lineage", "synonyms"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineageNode {
    pub taxid: u32,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonEntry {
    pub taxid: u32,
    pub scientific_name: String,
    pub common_names: Vec<String>,
    pub synonyms: Vec<String>,
    pub rank: String,
    /// Ancestors from the root down to the parent.
    pub lineage: Vec<LineageNode>,
}

impl TaxonEntry {
    pub fn curie(&self) -> String {
        format!("NCBITaxon:{}", self.taxid)
    }

    /// Every name this taxon answers to: scientific, common, synonyms.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.scientific_name.as_str())
            .chain(self.common_names.iter().map(String::as_str))
            .chain(self.synonyms.iter().map(String::as_str))
    }
}

/// True iff some lineage node is named `group_name`, ignoring case.
pub fn lineage_contains(entry: &TaxonEntry, group_name: &str) -> bool {
    let group = group_name.trim().to_lowercase();
    entry.lineage.iter().any(|node| node.name.to_lowercase() == group)
}

#[derive(Debug, Clone, Default)]
pub struct TaxonomyLexicon {
    entries: BTreeMap<u32, TaxonEntry>,
    index: HashMap<String, u32>,
    warnings: Vec<String>,
}

fn parse_lineage(path: &Path, row: &Row) -> Result<Vec<LineageNode>, TableError> {
    row.list(3)
        .into_iter()
        .map(|node| {
            let (id, name) = node
                .split_once(':')
                .ok_or_else(|| TableError::row(path, row.line, format!("lineage node '{node}' is not taxid:name")))?;
            let taxid = id
                .trim()
                .parse::<u32>()
                .ok()
                .filter(|t| *t > 0)
                .ok_or_else(|| TableError::row(path, row.line, format!("lineage taxid '{id}' is not a positive integer")))?;
            Ok(LineageNode { taxid, name: name.trim().to_string() })
        })
        .collect()
}

impl TaxonomyLexicon {
    pub fn load(path: &Path) -> Result<TaxonomyLexicon, TableError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| TableError::Io { path: path.to_path_buf(), source })?;
        Self::parse(path, &text)
    }

    /// Parses the taxonomy table. An optional sixth column carries common
    /// names.
    pub fn parse(path: &Path, text: &str) -> Result<TaxonomyLexicon, TableError> {
        let mut entries = Vec::new();
        for row in parse_table(path, text, &HEADER)? {
            let taxid = row
                .get(0)
                .parse::<u32>()
                .ok()
                .filter(|t| *t > 0)
                .ok_or_else(|| TableError::row(path, row.line, format!("taxid '{}' is not a positive integer", row.get(0))))?;
            let scientific_name = row.get(1).to_string();
            if scientific_name.is_empty() {
                return Err(TableError::row(path, row.line, "empty scientific_name"));
            }
            entries.push((
                row.line,
                TaxonEntry {
                    taxid,
                    scientific_name,
                    rank: row.get(2).to_string(),
                    lineage: parse_lineage(path, &row)?,
                    synonyms: row.list(4),
                    common_names: row.list(5),
                },
            ));
        }
        Self::build(path, entries)
    }

    pub fn from_entries(entries: Vec<TaxonEntry>) -> Result<TaxonomyLexicon, TableError> {
        Self::build(Path::new("<memory>"), entries.into_iter().enumerate().map(|(i, e)| (i + 1, e)).collect())
    }

    fn build(path: &Path, entries: Vec<(usize, TaxonEntry)>) -> Result<TaxonomyLexicon, TableError> {
        let mut lex = TaxonomyLexicon::default();
        let mut root: Option<u32> = None;
        for (line, entry) in entries {
            if let Some(first) = entry.lineage.first() {
                match root {
                    Some(r) if r != first.taxid => {
                        return Err(TableError::row(path, line, format!("lineage starts at {} but the root is {r}", first.taxid)))
                    }
                    _ => root = Some(first.taxid),
                }
            }
            if lex.entries.contains_key(&entry.taxid) {
                return Err(TableError::row(path, line, format!("duplicate taxid {}", entry.taxid)));
            }
            lex.entries.insert(entry.taxid, entry);
        }
        if let Some(r) = root {
            if let Some(e) = lex.entries.get(&r) {
                if !e.lineage.is_empty() {
                    return Err(TableError::row(path, 0, format!("root taxon {r} has a lineage")));
                }
            }
        }
        // Lowest taxid wins every name collision; entries iterate in taxid order.
        for entry in lex.entries.values() {
            for name in entry.names() {
                let key = normalize_text(name);
                if key.is_empty() {
                    continue;
                }
                match lex.index.get(&key) {
                    None => {
                        lex.index.insert(key, entry.taxid);
                    }
                    Some(&holder) if holder != entry.taxid => lex.warnings.push(format!(
                        "name '{name}' is shared by taxids {holder} and {}; keeping {holder}",
                        entry.taxid
                    )),
                    Some(_) => {}
                }
            }
        }
        Ok(lex)
    }

    pub fn lookup_organism(&self, text: &str) -> Option<&TaxonEntry> {
        self.index.get(&normalize_text(text)).and_then(|id| self.entries.get(id))
    }

    pub fn get(&self, taxid: u32) -> Option<&TaxonEntry> {
        self.entries.get(&taxid)
    }

    /// Resolves an `NCBITaxon:<id>` curie.
    pub fn get_curie(&self, curie: &str) -> Option<&TaxonEntry> {
        curie.strip_prefix("NCBITaxon:")?.parse().ok().and_then(|id| self.get(id))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &TaxonEntry> {
        self.entries.values()
    }

    /// Normalized name → taxid, as used by lookup.
    pub fn name_index(&self) -> &HashMap<String, u32> {
        &self.index
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}
