use std::collections::BTreeMap;
use std::path::Path;

use crate::tsv::TableError;

/// Publication-derived annotations standing in for a literature annotation
/// service.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PublicationAnnotations {
    pub pmid: String,
    pub diseases: Vec<String>,
    pub organisms: Vec<String>,
    pub grants: Vec<String>,
}

impl PublicationAnnotations {
    /// Parses `pmid` on the first line, then `disease|organism|grant<TAB>text`
    /// lines.
    pub fn parse(origin: &Path, text: &str) -> Result<PublicationAnnotations, TableError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let pmid = match lines.next() {
            Some((_, l)) => l.trim().to_string(),
            None => return Err(TableError::row(origin, 1, "missing pmid line")),
        };
        let mut ann = PublicationAnnotations { pmid, ..Default::default() };
        for (i, line) in lines {
            let (kind, value) = line
                .split_once('\t')
                .ok_or_else(|| TableError::row(origin, i + 1, "expected 'kind<TAB>text'"))?;
            let value = value.trim().to_string();
            if value.is_empty() {
                return Err(TableError::row(origin, i + 1, "empty annotation text"));
            }
            match kind.trim() {
                "disease" => ann.diseases.push(value),
                "organism" => ann.organisms.push(value),
                "grant" => ann.grants.push(value),
                other => return Err(TableError::row(origin, i + 1, format!("unknown annotation kind '{other}'"))),
            }
        }
        Ok(ann)
    }
}

/// Annotations keyed by pmid, loaded from a directory of `<pmid>.txt` files.
#[derive(Debug, Clone, Default)]
pub struct AnnotationStore {
    by_pmid: BTreeMap<String, PublicationAnnotations>,
}

impl AnnotationStore {
    pub fn load_dir(dir: &Path) -> Result<AnnotationStore, TableError> {
        let io = |source| TableError::Io { path: dir.to_path_buf(), source };
        let mut paths = Vec::new();
        for entry in std::fs::read_dir(dir).map_err(io)? {
            let path = entry.map_err(io)?.path();
            if path.extension().and_then(|e| e.to_str()) == Some("txt") {
                paths.push(path);
            }
        }
        paths.sort();
        let mut store = AnnotationStore::default();
        for path in paths {
            let text = std::fs::read_to_string(&path)
                .map_err(|source| TableError::Io { path: path.clone(), source })?;
            let ann = PublicationAnnotations::parse(&path, &text)?;
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            if stem != ann.pmid {
                return Err(TableError::row(&path, 1, format!("pmid {} does not match the file name", ann.pmid)));
            }
            store.insert(ann);
        }
        Ok(store)
    }

    pub fn insert(&mut self, ann: PublicationAnnotations) {
        self.by_pmid.insert(ann.pmid.clone(), ann);
    }

    pub fn get(&self, pmid: &str) -> Option<&PublicationAnnotations> {
        self.by_pmid.get(pmid.trim())
    }

    pub fn len(&self) -> usize {
        self.by_pmid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_pmid.is_empty()
    }
}

impl FromIterator<PublicationAnnotations> for AnnotationStore {
    fn from_iter<I: IntoIterator<Item = PublicationAnnotations>>(iter: I) -> Self {
        let mut store = AnnotationStore::default();
        iter.into_iter().for_each(|a| store.insert(a));
        store
    }
}
