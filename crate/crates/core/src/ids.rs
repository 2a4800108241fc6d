//! Record keys of the form `<source_slug>_<native_id>`.

use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, CONTROLS};

/// Characters escaped inside the native part. `_` is the separator and `%`
/// is the escape character itself, so escaping both keeps the key reversible.
const NATIVE_ESCAPES: &AsciiSet = &CONTROLS.add(b'%').add(b'_');

/// Builds the record key. The native id is percent-encoded only when it
/// contains `_` or `%`.
pub fn make_id(slug: &str, native_id: &str) -> String {
    let native = native_id.trim();
    if native.contains(['_', '%']) {
        format!("{slug}_{}", utf8_percent_encode(native, NATIVE_ESCAPES))
    } else {
        format!("{slug}_{native}")
    }
}

/// Splits a record key into slug and decoded native id.
pub fn split_id(id: &str) -> Option<(&str, String)> {
    let (slug, native) = id.split_once('_')?;
    if slug.is_empty() || native.is_empty() {
        return None;
    }
    let native = if native.contains('%') {
        percent_decode_str(native).decode_utf8().ok()?.into_owned()
    } else {
        native.to_string()
    };
    Some((slug, native))
}

/// Whether a slug is lowercase and URL-safe.
pub fn is_valid_slug(slug: &str) -> bool {
    !slug.is_empty() && slug.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-')
}
