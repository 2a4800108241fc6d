//! Surface-text normalization shared by lexicon lookup, citation filtering
//! and text mining.

/// Lowercases, turns every non-alphanumeric character into a space and
/// collapses runs of spaces. `"Homo.sapiens"`, `"HOMO-SAPIENS"` and
/// `" homo  sapiens "` all normalize to `"homo sapiens"`.
pub fn normalize_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.extend(ch.to_lowercase());
        } else {
            pending_space = true;
        }
    }
    out
}

/// Normalized tokens of `text`.
pub fn normalized_words(text: &str) -> Vec<String> {
    normalize_text(text).split(' ').filter(|w| !w.is_empty()).map(str::to_string).collect()
}

/// Whether `needle` occurs in `haystack` as a whole-word sequence after
/// normalizing both. An empty needle never occurs.
pub fn occurs_in(haystack: &str, needle: &str) -> bool {
    let needle = normalize_text(needle);
    if needle.is_empty() {
        return false;
    }
    let haystack = normalize_text(haystack);
    format!(" {haystack} ").contains(&format!(" {needle} "))
}
