//! The shared query AST, the basic and advanced parsers, and the canonical
//! printer.

use std::fmt;

use harmonize_core::schema::{field_path, PathKind};
use harmonize_core::validate::normalize_date;
use serde::Serialize;
use thiserror::Error;

pub const EXISTS_KEYWORD: &str = "_exists_";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum QueryAst {
    Term { field: Option<String>, text: String },
    Phrase { field: Option<String>, text: String },
    Exists { field: String },
    Range { field: String, lo: Option<String>, hi: Option<String> },
    And { children: Vec<QueryAst> },
    Or { children: Vec<QueryAst> },
    Not { child: Box<QueryAst> },
    MatchAll,
}

impl QueryAst {
    pub fn term(text: &str) -> QueryAst {
        QueryAst::Term { field: None, text: text.into() }
    }

    pub fn field_term(field: &str, text: &str) -> QueryAst {
        QueryAst::Term { field: Some(field.into()), text: text.into() }
    }

    pub fn phrase(text: &str) -> QueryAst {
        QueryAst::Phrase { field: None, text: text.into() }
    }

    pub fn field_phrase(field: &str, text: &str) -> QueryAst {
        QueryAst::Phrase { field: Some(field.into()), text: text.into() }
    }

    pub fn exists(field: &str) -> QueryAst {
        QueryAst::Exists { field: field.into() }
    }

    pub fn and(children: Vec<QueryAst>) -> QueryAst {
        QueryAst::And { children }
    }

    pub fn or(children: Vec<QueryAst>) -> QueryAst {
        QueryAst::Or { children }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(child: QueryAst) -> QueryAst {
        QueryAst::Not { child: Box::new(child) }
    }

    /// Checks the structural invariants: arity, non-empty text, known
    /// fields, and date-only ranges with ordered normalized bounds.
    pub fn validate(&self) -> Result<(), String> {
        let known = |f: &str| field_path(f).ok_or_else(|| format!("unknown field '{f}'"));
        match self {
            QueryAst::Term { field, text } | QueryAst::Phrase { field, text } => {
                if text.is_empty() {
                    return Err("empty query text".into());
                }
                if let Some(f) = field {
                    known(f)?;
                }
                Ok(())
            }
            QueryAst::Exists { field } => known(field).map(|_| ()),
            QueryAst::Range { field, lo, hi } => {
                if known(field)?.kind != PathKind::Date {
                    return Err(format!("range on non-date field '{field}'"));
                }
                for d in [lo, hi].into_iter().flatten() {
                    if normalize_date(d).as_deref() != Some(d.as_str()) {
                        return Err(format!("'{d}' is not a YYYY-MM-DD date"));
                    }
                }
                if let (Some(l), Some(h)) = (lo, hi) {
                    if l > h {
                        return Err(format!("range start {l} is after end {h}"));
                    }
                }
                Ok(())
            }
            QueryAst::And { children } | QueryAst::Or { children } => {
                if children.len() < 2 {
                    return Err("AND/OR need at least two operands".into());
                }
                children.iter().try_for_each(QueryAst::validate)
            }
            QueryAst::Not { child } => child.validate(),
            QueryAst::MatchAll => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryErrorKind {
    Syntax,
    UnknownField,
    DateRange,
}

/// Parse failure. `position` counts characters from the start of the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at position {position}")]
pub struct QueryError {
    pub kind: QueryErrorKind,
    pub position: usize,
    pub message: String,
}

impl QueryError {
    fn syntax(position: usize, message: impl Into<String>) -> Self {
        QueryError { kind: QueryErrorKind::Syntax, position, message: message.into() }
    }
}

fn conjoin(mut nodes: Vec<QueryAst>) -> QueryAst {
    match nodes.len() {
        0 => QueryAst::MatchAll,
        1 => nodes.pop().unwrap(),
        _ => QueryAst::and(nodes),
    }
}

/// Free-text input: words are ANDed, double quotes make phrases, nothing
/// else is special.
pub fn parse_basic(q: &str) -> Result<QueryAst, QueryError> {
    let chars: Vec<char> = q.chars().collect();
    let mut nodes = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '"' {
            let close = chars[i + 1..]
                .iter()
                .position(|&c| c == '"')
                .ok_or_else(|| QueryError::syntax(i, "unbalanced quote"))?;
            let text: String = chars[i + 1..i + 1 + close].iter().collect();
            if !text.trim().is_empty() {
                nodes.push(QueryAst::phrase(&text));
            }
            i += close + 2;
        } else {
            let start = i;
            while i < chars.len() && !chars[i].is_whitespace() && chars[i] != '"' {
                i += 1;
            }
            nodes.push(QueryAst::term(&chars[start..i].iter().collect::<String>()));
        }
    }
    Ok(conjoin(nodes))
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Quoted(String),
    /// `literal` is set when any character was backslash-escaped, which
    /// keeps the word from being read as an operator.
    Word { text: String, literal: bool },
}

impl Tok {
    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self, Tok::Word { text, literal: false } if text == kw)
    }
}

fn lex(input: &str) -> Result<Vec<(usize, Tok)>, QueryError> {
    let chars: Vec<char> = input.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ':' => Some(Tok::Colon),
            _ => None,
        };
        if let Some(t) = single {
            out.push((i, t));
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c == '"' {
            let mut text = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err(QueryError::syntax(start, "unbalanced quote")),
                    Some('"') => break,
                    Some('\\') => {
                        let next = chars.get(i + 1).ok_or_else(|| QueryError::syntax(i, "dangling escape"))?;
                        text.push(*next);
                        i += 2;
                    }
                    Some(&ch) => {
                        text.push(ch);
                        i += 1;
                    }
                }
            }
            i += 1;
            out.push((start, Tok::Quoted(text)));
            continue;
        }
        let mut text = String::new();
        let mut literal = false;
        while let Some(&ch) = chars.get(i) {
            if ch.is_whitespace() || "()[]:\"".contains(ch) {
                break;
            }
            if ch == '\\' {
                let next = chars.get(i + 1).ok_or_else(|| QueryError::syntax(i, "dangling escape"))?;
                text.push(*next);
                literal = true;
                i += 2;
            } else {
                text.push(ch);
                i += 1;
            }
        }
        out.push((start, Tok::Word { text, literal }));
    }
    Ok(out)
}

struct AdvancedParser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl AdvancedParser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn next(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn parse_or(&mut self) -> Result<QueryAst, QueryError> {
        let mut children = vec![self.parse_and()?];
        while self.peek().is_some_and(|t| t.is_keyword("OR")) {
            self.pos += 1;
            children.push(self.parse_and()?);
        }
        Ok(if children.len() == 1 { children.pop().unwrap() } else { QueryAst::or(children) })
    }

    fn starts_operand(t: &Tok) -> bool {
        match t {
            Tok::LParen | Tok::Quoted(_) => true,
            Tok::Word { .. } => !t.is_keyword("AND") && !t.is_keyword("OR"),
            _ => false,
        }
    }

    fn parse_and(&mut self) -> Result<QueryAst, QueryError> {
        let mut children = vec![self.parse_unary()?];
        loop {
            match self.peek() {
                Some(t) if t.is_keyword("AND") => {
                    self.pos += 1;
                    children.push(self.parse_unary()?);
                }
                // Adjacent operands are an implicit AND.
                Some(t) if Self::starts_operand(t) => children.push(self.parse_unary()?),
                _ => break,
            }
        }
        Ok(if children.len() == 1 { children.pop().unwrap() } else { QueryAst::and(children) })
    }

    fn parse_unary(&mut self) -> Result<QueryAst, QueryError> {
        if self.peek().is_some_and(|t| t.is_keyword("NOT")) {
            self.pos += 1;
            return Ok(QueryAst::not(self.parse_unary()?));
        }
        self.parse_atom()
    }

    fn field_name(&self, at: usize, name: &str) -> Result<(), QueryError> {
        if field_path(name).is_none() {
            return Err(QueryError { kind: QueryErrorKind::UnknownField, position: at, message: format!("unknown field '{name}'") });
        }
        Ok(())
    }

    fn parse_atom(&mut self) -> Result<QueryAst, QueryError> {
        let at = self.here();
        let Some((_, tok)) = self.next() else {
            return Err(QueryError::syntax(at, "unexpected end of query"));
        };
        match tok {
            Tok::LParen => {
                let inner = self.parse_or()?;
                match self.next() {
                    Some((_, Tok::RParen)) => Ok(inner),
                    Some((p, _)) => Err(QueryError::syntax(p, "expected ')'")),
                    None => Err(QueryError::syntax(at, "unclosed parenthesis")),
                }
            }
            Tok::Quoted(text) if text.is_empty() => Err(QueryError::syntax(at, "empty phrase")),
            Tok::Quoted(text) => Ok(QueryAst::Phrase { field: None, text }),
            Tok::Word { ref text, literal } => {
                if matches!(self.peek(), Some(Tok::Colon)) {
                    self.pos += 1;
                    return self.parse_fielded(at, text);
                }
                if !literal && ["AND", "OR", "NOT"].contains(&text.as_str()) {
                    return Err(QueryError::syntax(at, format!("unexpected operator {text}")));
                }
                if !literal && text == "*" {
                    return Ok(QueryAst::MatchAll);
                }
                Ok(QueryAst::Term { field: None, text: text.clone() })
            }
            Tok::RParen => Err(QueryError::syntax(at, "unexpected ')'")),
            Tok::Colon => Err(QueryError::syntax(at, "unexpected ':'")),
            Tok::LBracket | Tok::RBracket => Err(QueryError::syntax(at, "range needs a field")),
        }
    }

    fn parse_fielded(&mut self, at: usize, field: &str) -> Result<QueryAst, QueryError> {
        let value_at = self.here();
        if field == EXISTS_KEYWORD {
            return match self.next() {
                Some((p, Tok::Word { text, .. })) => {
                    self.field_name(p, &text)?;
                    Ok(QueryAst::Exists { field: text })
                }
                _ => Err(QueryError::syntax(value_at, "expected a field name after _exists_:")),
            };
        }
        self.field_name(at, field)?;
        match self.next() {
            Some((_, Tok::Quoted(text))) if text.is_empty() => Err(QueryError::syntax(value_at, "empty phrase")),
            Some((_, Tok::Quoted(text))) => Ok(QueryAst::Phrase { field: Some(field.into()), text }),
            Some((_, Tok::Word { text, literal: false })) if text == "*" => Ok(QueryAst::exists(field)),
            Some((_, Tok::Word { text, .. })) => Ok(QueryAst::Term { field: Some(field.into()), text }),
            Some((_, Tok::LBracket)) => self.parse_range(at, value_at, field),
            _ => Err(QueryError::syntax(value_at, format!("expected a value after '{field}:'"))),
        }
    }

    fn parse_range(&mut self, field_at: usize, open_at: usize, field: &str) -> Result<QueryAst, QueryError> {
        let bad = |p: usize, m: String| QueryError { kind: QueryErrorKind::DateRange, position: p, message: m };
        if field_path(field).map(|f| f.kind) != Some(PathKind::Date) {
            return Err(bad(field_at, format!("range on non-date field '{field}'")));
        }
        let bound = |this: &mut Self| -> Result<Option<String>, QueryError> {
            let p = this.here();
            match this.next() {
                Some((_, Tok::Word { text, literal: false })) if text == "*" => Ok(None),
                Some((_, Tok::Word { text, .. })) => normalize_date(&text)
                    .map(Some)
                    .ok_or_else(|| bad(p, format!("'{text}' is not a date"))),
                _ => Err(bad(p, "expected a date or *".into())),
            }
        };
        let lo = bound(self)?;
        let to_at = self.here();
        if !self.next().is_some_and(|(_, t)| t.is_keyword("TO")) {
            return Err(bad(to_at, "expected TO".into()));
        }
        let hi = bound(self)?;
        match self.next() {
            Some((_, Tok::RBracket)) => {}
            Some((p, _)) => return Err(bad(p, "expected ']'".into())),
            None => return Err(bad(open_at, "unclosed range".into())),
        }
        if let (Some(l), Some(h)) = (&lo, &hi) {
            if l > h {
                return Err(bad(open_at, format!("range start {l} is after end {h}")));
            }
        }
        Ok(QueryAst::Range { field: field.into(), lo, hi })
    }
}

/// Fielded boolean syntax. Uppercase AND, OR and NOT are operators (AND
/// binds tighter); juxtaposed operands are ANDed; `field:value`,
/// `field:"phrase"`, `field:[date TO date]` and `_exists_:field` are atoms;
/// a backslash escapes the next character.
pub fn parse_advanced(expr: &str) -> Result<QueryAst, QueryError> {
    let toks = lex(expr)?;
    if toks.is_empty() {
        return Ok(QueryAst::MatchAll);
    }
    let mut p = AdvancedParser { toks, pos: 0, end: expr.chars().count() };
    let ast = p.parse_or()?;
    if let Some((at, _)) = p.toks.get(p.pos) {
        return Err(QueryError::syntax(*at, "unexpected input"));
    }
    Ok(ast)
}

fn escape_word(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if c.is_whitespace() || "()[]:\"\\".contains(c) {
            out.push('\\');
        }
        out.push(c);
    }
    if ["AND", "OR", "NOT", "*"].contains(&out.as_str()) {
        out.insert(0, '\\');
    }
    out
}

fn escape_phrase(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

fn prefix(field: &Option<String>) -> String {
    field.as_ref().map(|f| format!("{f}:")).unwrap_or_default()
}

impl fmt::Display for QueryAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryAst::Term { field, text } => write!(f, "{}{}", prefix(field), escape_word(text)),
            QueryAst::Phrase { field, text } => write!(f, "{}{}", prefix(field), escape_phrase(text)),
            QueryAst::Exists { field } => write!(f, "{EXISTS_KEYWORD}:{field}"),
            QueryAst::Range { field, lo, hi } => {
                write!(f, "{field}:[{} TO {}]", lo.as_deref().unwrap_or("*"), hi.as_deref().unwrap_or("*"))
            }
            QueryAst::And { children } | QueryAst::Or { children } => {
                let op = if matches!(self, QueryAst::And { .. }) { " AND " } else { " OR " };
                f.write_str("(")?;
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(op)?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
            QueryAst::Not { child } => write!(f, "(NOT {child})"),
            QueryAst::MatchAll => f.write_str("*"),
        }
    }
}

/// Fully parenthesized advanced-syntax text that parses back to `ast`.
pub fn to_canonical(ast: &QueryAst) -> String {
    ast.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_examples() {
        assert_eq!(parse_basic("Zika virus").unwrap(), QueryAst::and(vec![QueryAst::term("Zika"), QueryAst::term("virus")]));
        assert_eq!(parse_basic("\"Zika virus\"").unwrap(), QueryAst::phrase("Zika virus"));
        assert_eq!(parse_basic("").unwrap(), QueryAst::MatchAll);
        assert_eq!(parse_basic("   ").unwrap(), QueryAst::MatchAll);
        assert_eq!(parse_basic("a AND b").unwrap(), QueryAst::and(vec![QueryAst::term("a"), QueryAst::term("AND"), QueryAst::term("b")]));
        let err = parse_basic("flu \"open").unwrap_err();
        assert_eq!((err.kind, err.position), (QueryErrorKind::Syntax, 4));
    }

    #[test]
    fn advanced_examples() {
        assert_eq!(
            parse_advanced(r#"species:"Homo sapiens" AND measurementTechnique:"RNA-seq""#).unwrap(),
            QueryAst::and(vec![
                QueryAst::field_phrase("species", "Homo sapiens"),
                QueryAst::field_phrase("measurementTechnique", "RNA-seq"),
            ])
        );
        assert_eq!(
            parse_advanced("funding.identifier:AI123456 OR NOT _exists_:healthCondition").unwrap(),
            QueryAst::or(vec![
                QueryAst::field_term("funding.identifier", "AI123456"),
                QueryAst::not(QueryAst::exists("healthCondition")),
            ])
        );
        assert_eq!(
            parse_advanced("datePublished:[2020-01-01 TO 2021-01-01]").unwrap(),
            QueryAst::Range { field: "datePublished".into(), lo: Some("2020-01-01".into()), hi: Some("2021-01-01".into()) }
        );
    }

    #[test]
    fn precedence_and_implicit_and() {
        let (a, b, c) = (QueryAst::term("a"), QueryAst::term("b"), QueryAst::term("c"));
        assert_eq!(parse_advanced("a OR b AND c").unwrap(), QueryAst::or(vec![a.clone(), QueryAst::and(vec![b.clone(), c.clone()])]));
        assert_eq!(parse_advanced("a b").unwrap(), QueryAst::and(vec![a.clone(), b.clone()]));
        assert_eq!(parse_advanced("a and b").unwrap(), QueryAst::and(vec![a, QueryAst::term("and"), b]));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_advanced("(bad").unwrap_err();
        assert_eq!((e.kind, e.position), (QueryErrorKind::Syntax, 0));
        let e = parse_advanced("zika AND specie:human").unwrap_err();
        assert_eq!((e.kind, e.position), (QueryErrorKind::UnknownField, 9));
        let e = parse_advanced("name:[2020 TO 2021]").unwrap_err();
        assert_eq!(e.kind, QueryErrorKind::DateRange);
        let e = parse_advanced("dateCreated:[2021-13-01 TO *]").unwrap_err();
        assert_eq!((e.kind, e.position), (QueryErrorKind::DateRange, 13));
        let e = parse_advanced("a OR").unwrap_err();
        assert_eq!(e.position, 4);
        let e = parse_advanced("a )").unwrap_err();
        assert_eq!(e.position, 2);
    }

    #[test]
    fn canonical_printing() {
        let ast = QueryAst::and(vec![QueryAst::term("zika"), QueryAst::term("virus")]);
        assert_eq!(to_canonical(&ast), "(zika AND virus)");
        assert_eq!(to_canonical(&QueryAst::not(QueryAst::exists("species"))), "(NOT _exists_:species)");
        assert_eq!(to_canonical(&QueryAst::term("AND")), "\\AND");
        assert_eq!(to_canonical(&QueryAst::term("a b:c")), "a\\ b\\:c");
        assert_eq!(parse_advanced("\\AND").unwrap(), QueryAst::term("AND"));
    }
}
