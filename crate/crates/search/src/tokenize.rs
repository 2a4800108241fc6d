//! Text analysis shared by indexing and querying.

/// A token with its word position. Hyphen-joined forms share the position
/// of their first part so phrase matching runs over the parts alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Positioned {
    pub token: String,
    pub position: u32,
    pub joined: bool,
}

/// Lowercased alphanumeric runs; each element is the list of hyphen-linked
/// parts of one word ("RNA-seq" gives `["rna", "seq"]`).
fn word_groups(text: &str) -> Vec<Vec<String>> {
    let chars: Vec<char> = text.chars().collect();
    let mut groups: Vec<Vec<String>> = Vec::new();
    let mut current: Vec<String> = Vec::new();
    let mut part = String::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_alphanumeric() {
            part.extend(c.to_lowercase().filter(|l| l.is_alphanumeric()));
        } else {
            let linked = c == '-'
                && !part.is_empty()
                && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
            if !part.is_empty() {
                current.push(std::mem::take(&mut part));
            }
            if !linked && !current.is_empty() {
                groups.push(std::mem::take(&mut current));
            }
        }
        i += 1;
    }
    if !part.is_empty() {
        current.push(part);
    }
    if !current.is_empty() {
        groups.push(current);
    }
    groups
}

/// Splits text into lowercase tokens. Hyphenated words yield their parts
/// followed by the joined form: "RNA-seq" gives `rna`, `seq`, `rna-seq`.
pub fn tokenize(text: &str) -> Vec<String> {
    analyze(text, 0).into_iter().map(|p| p.token).collect()
}

/// The word sequence used for phrase matching: hyphen parts only.
pub fn words(text: &str) -> Vec<String> {
    word_groups(text).into_iter().flatten().collect()
}

/// Tokens with positions starting at `start`.
pub(crate) fn analyze(text: &str, start: u32) -> Vec<Positioned> {
    let mut out = Vec::new();
    let mut pos = start;
    for group in word_groups(text) {
        let first = pos;
        for part in &group {
            out.push(Positioned { token: part.clone(), position: pos, joined: false });
            pos += 1;
        }
        if group.len() > 1 {
            out.push(Positioned { token: group.join("-"), position: first, joined: true });
        }
    }
    out
}
