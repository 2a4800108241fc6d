use std::collections::BTreeMap;
use std::path::Path;

use crate::normalize::normalize_text;
use crate::tsv::{read_table, TableError};

/// Keyword → EDAM topic table used by the default topic classifier.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TopicRules {
    by_keyword: BTreeMap<String, String>,
}

impl TopicRules {
    pub fn load(path: &Path) -> Result<TopicRules, TableError> {
        let mut by_keyword = BTreeMap::new();
        for row in read_table(path, &["keyword", "curie"])? {
            let key = normalize_text(row.get(0));
            if key.is_empty() || row.get(1).is_empty() {
                return Err(TableError::row(path, row.line, "keyword and curie are both required"));
            }
            by_keyword.insert(key, row.get(1).to_string());
        }
        Ok(TopicRules { by_keyword })
    }

    pub fn from_pairs<K: AsRef<str>, V: Into<String>>(pairs: impl IntoIterator<Item = (K, V)>) -> TopicRules {
        TopicRules {
            by_keyword: pairs.into_iter().map(|(k, v)| (normalize_text(k.as_ref()), v.into())).collect(),
        }
    }

    pub fn lookup(&self, text: &str) -> Option<&str> {
        self.by_keyword.get(&normalize_text(text)).map(String::as_str)
    }

    pub fn curies(&self) -> impl Iterator<Item = &str> {
        self.by_keyword.values().map(String::as_str)
    }
}
