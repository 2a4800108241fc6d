//! The source registry table.

use std::collections::BTreeMap;
use std::path::Path;

use crate::ids::is_valid_slug;
use crate::model::SourceRegistryEntry;
use crate::tsv::{parse_table, TableError};

/// The repository table shipped with the crate.
const BUNDLED: &str = include_str!("../../../fixtures/registry.tsv");

const HEADER: [&str; 5] = ["slug", "name", "type", "research_domain", "access"];

#[derive(Debug, Clone, Default)]
pub struct Registry {
    by_slug: BTreeMap<String, SourceRegistryEntry>,
}

impl Registry {
    pub fn load(path: &Path) -> Result<Registry, TableError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| TableError::Io { path: path.to_path_buf(), source })?;
        Self::parse(path, &text)
    }

    pub fn bundled() -> Registry {
        Self::parse(Path::new("registry.tsv"), BUNDLED).expect("bundled registry parses")
    }

    /// `path` only labels errors.
    pub fn parse(path: &Path, text: &str) -> Result<Registry, TableError> {
        if text.trim().is_empty() {
            return Ok(Registry::default());
        }
        let mut registry = Registry::default();
        for row in parse_table(path, text, &HEADER)? {
            let slug = row.get(0).to_string();
            if !is_valid_slug(&slug) {
                return Err(TableError::row(path, row.line, format!("slug '{slug}' is not lowercase and URL-safe")));
            }
            let research_domain = row.get(3).parse().map_err(|e: String| TableError::row(path, row.line, e))?;
            let access = row.get(4).parse().map_err(|e: String| TableError::row(path, row.line, e))?;
            let entry = SourceRegistryEntry {
                slug: slug.clone(),
                name: row.get(1).to_string(),
                source_type: row.get(2).to_string(),
                research_domain,
                access,
            };
            if registry.by_slug.insert(slug.clone(), entry).is_some() {
                return Err(TableError::row(path, row.line, format!("duplicate slug '{slug}'")));
            }
        }
        Ok(registry)
    }

    pub fn from_entries(entries: impl IntoIterator<Item = SourceRegistryEntry>) -> Registry {
        Registry { by_slug: entries.into_iter().map(|e| (e.slug.clone(), e)).collect() }
    }

    pub fn get(&self, slug: &str) -> Option<&SourceRegistryEntry> {
        self.by_slug.get(slug)
    }

    pub fn len(&self) -> usize {
        self.by_slug.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_slug.is_empty()
    }

    /// All entries ordered by display name, then slug.
    pub fn sorted_by_name(&self) -> Vec<&SourceRegistryEntry> {
        let mut entries: Vec<_> = self.by_slug.values().collect();
        entries.sort_by(|a, b| a.name.cmp(&b.name).then_with(|| a.slug.cmp(&b.slug)));
        entries
    }
}
