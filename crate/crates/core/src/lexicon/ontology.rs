use std::collections::{BTreeMap, HashMap, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::Ontology;
use crate::normalize::normalize_text;
use crate::tsv::{parse_table, TableError};

const HEADER: [&str; 5] = ["curie", "label", "ontology", "parents", "synonyms"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologyTerm {
    pub curie: String,
    pub label: String,
    pub synonyms: Vec<String>,
    pub ontology: Ontology,
    pub parents: Vec<String>,
}

/// Terms of several ontologies held together, with a per-ontology name
/// index over labels and synonyms.
#[derive(Debug, Clone, Default)]
pub struct OntologyLexicon {
    terms: BTreeMap<String, OntologyTerm>,
    index: HashMap<(Ontology, String), String>,
    warnings: Vec<String>,
}

impl OntologyLexicon {
    pub fn load(path: &Path) -> Result<OntologyLexicon, TableError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| TableError::Io { path: path.to_path_buf(), source })?;
        Self::parse(path, &text)
    }

    pub fn parse(path: &Path, text: &str) -> Result<OntologyLexicon, TableError> {
        let mut terms = Vec::new();
        for row in parse_table(path, text, &HEADER)? {
            let curie = row.get(0).to_string();
            let ontology: Ontology = row.get(2).parse().map_err(|e: String| TableError::row(path, row.line, e))?;
            if ontology == Ontology::NcbiTaxon {
                return Err(TableError::row(path, row.line, "taxa belong in the taxonomy file"));
            }
            if Ontology::from_curie(&curie) != Some(ontology) {
                return Err(TableError::row(
                    path,
                    row.line,
                    format!("curie '{curie}' does not carry the {} prefix", ontology.curie_prefix()),
                ));
            }
            let label = row.get(1).to_string();
            if label.is_empty() {
                return Err(TableError::row(path, row.line, format!("term {curie} has no label")));
            }
            terms.push((row.line, OntologyTerm { curie, label, ontology, parents: row.list(3), synonyms: row.list(4) }));
        }
        Self::build(path, terms)
    }

    pub fn from_terms(terms: Vec<OntologyTerm>) -> Result<OntologyLexicon, TableError> {
        Self::build(Path::new("<memory>"), terms.into_iter().enumerate().map(|(i, t)| (i + 1, t)).collect())
    }

    fn build(path: &Path, terms: Vec<(usize, OntologyTerm)>) -> Result<OntologyLexicon, TableError> {
        let mut lex = OntologyLexicon::default();
        for (line, term) in terms {
            if lex.terms.contains_key(&term.curie) {
                return Err(TableError::row(path, line, format!("duplicate curie {}", term.curie)));
            }
            lex.terms.insert(term.curie.clone(), term);
        }
        for term in lex.terms.values() {
            for parent in &term.parents {
                if !lex.terms.contains_key(parent) {
                    lex.warnings.push(format!("{} has dangling parent {parent}", term.curie));
                }
            }
        }
        // Terms iterate in curie order, so the first claimant of a name is
        // the lexicographically smallest curie.
        for term in lex.terms.values() {
            for name in std::iter::once(&term.label).chain(&term.synonyms) {
                let key = normalize_text(name);
                if !key.is_empty() {
                    lex.index.entry((term.ontology, key)).or_insert_with(|| term.curie.clone());
                }
            }
        }
        Ok(lex)
    }

    pub fn lookup_ontology_term(&self, text: &str, ontology: Ontology) -> Option<&OntologyTerm> {
        self.index.get(&(ontology, normalize_text(text))).and_then(|c| self.terms.get(c))
    }

    pub fn get(&self, curie: &str) -> Option<&OntologyTerm> {
        self.terms.get(curie)
    }

    pub fn terms(&self) -> impl Iterator<Item = &OntologyTerm> {
        self.terms.values()
    }

    pub fn terms_of(&self, ontology: Ontology) -> impl Iterator<Item = &OntologyTerm> {
        self.terms.values().filter(move |t| t.ontology == ontology)
    }

    pub fn has_ontology(&self, ontology: Ontology) -> bool {
        self.terms.values().any(|t| t.ontology == ontology)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Shortest upward distance from `curie` to each of its ancestors
    /// (itself at 0).
    pub fn ancestor_distances(&self, curie: &str) -> HashMap<String, usize> {
        let mut dist = HashMap::new();
        let mut queue = VecDeque::from([(curie.to_string(), 0usize)]);
        while let Some((node, d)) = queue.pop_front() {
            if dist.contains_key(&node) {
                continue;
            }
            if let Some(term) = self.terms.get(&node) {
                for parent in &term.parents {
                    if !dist.contains_key(parent) {
                        queue.push_back((parent.clone(), d + 1));
                    }
                }
            }
            dist.insert(node, d);
        }
        dist
    }

    /// Distance between two terms when one is an ancestor of the other.
    pub fn lineal_distance(&self, a: &str, b: &str) -> Option<usize> {
        let up_a = self.ancestor_distances(a).get(b).copied();
        let up_b = self.ancestor_distances(b).get(a).copied();
        match (up_a, up_b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        }
    }
}
