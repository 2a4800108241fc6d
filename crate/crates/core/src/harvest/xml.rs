//! A small element tree over quick-xml events, with truncation reporting.

use quick_xml::events::Event;
use quick_xml::Reader;

use super::HarvestError;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct XmlNode {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<XmlNode>,
    pub text: String,
}

impl XmlNode {
    pub fn attr(&self, key: &str) -> Option<&str> {
        self.attrs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn child(&self, name: &str) -> Option<&XmlNode> {
        self.children.iter().find(|c| c.name == name)
    }

    pub fn children_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a XmlNode> + 'a {
        self.children.iter().filter(move |c| c.name == name)
    }

    /// Depth-first search for every descendant (or self) named `name`.
    pub fn descendants<'a>(&'a self, name: &str, out: &mut Vec<&'a XmlNode>) {
        if self.name == name {
            out.push(self);
        }
        for c in &self.children {
            c.descendants(name, out);
        }
    }

    pub fn find(&self, name: &str) -> Option<&XmlNode> {
        let mut out = Vec::new();
        self.descendants(name, &mut out);
        out.into_iter().next()
    }

    /// Follows a slash-separated child path.
    pub fn path(&self, path: &str) -> Option<&XmlNode> {
        path.split('/').filter(|s| !s.is_empty()).try_fold(self, |node, step| node.child(step))
    }

    pub fn text(&self) -> Option<&str> {
        let t = self.text.trim();
        (!t.is_empty()).then_some(t)
    }
}

fn element(start: &quick_xml::events::BytesStart<'_>, offset: u64) -> Result<XmlNode, HarvestError> {
    let mut attrs = Vec::new();
    for attr in start.attributes() {
        let attr = attr.map_err(|e| HarvestError::Xml { offset, message: e.to_string() })?;
        let value = attr
            .normalized_value(quick_xml::XmlVersion::Implicit1_0)
            .map_err(|e| HarvestError::Xml { offset, message: e.to_string() })?;
        attrs.push((attr.key.as_ref().to_string(), value.into_owned()));
    }
    Ok(XmlNode { name: start.name().as_ref().to_string(), attrs, ..Default::default() })
}

/// Parses a whole document into its root element. Errors carry the byte
/// offset; documents that end with elements still open name the innermost
/// one.
pub fn parse_xml(payload: &[u8]) -> Result<XmlNode, HarvestError> {
    let text = std::str::from_utf8(payload).map_err(|e| HarvestError::Xml {
        offset: e.valid_up_to() as u64,
        message: "payload is not UTF-8".into(),
    })?;
    let mut reader = Reader::from_str(text);
    let mut stack: Vec<XmlNode> = Vec::new();
    let mut root: Option<XmlNode> = None;
    loop {
        let event = reader.read_event().map_err(|e| {
            let open = stack.last().map(|n| format!(" inside unclosed element <{}>", n.name)).unwrap_or_default();
            HarvestError::Xml { offset: reader.error_position(), message: format!("{e}{open}") }
        })?;
        let offset = reader.buffer_position();
        match event {
            Event::Start(start) => stack.push(element(&start, offset)?),
            Event::Empty(start) => {
                let node = element(&start, offset)?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(node),
                    None => root = Some(node),
                }
            }
            Event::End(_) => {
                let node = stack.pop().ok_or_else(|| HarvestError::Xml { offset, message: "unexpected end tag".into() })?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(node),
                    None => root = Some(node),
                }
            }
            Event::Text(t) => {
                if let Some(node) = stack.last_mut() {
                    node.text.push_str(&t.xml10_content());
                }
            }
            Event::CData(t) => {
                if let Some(node) = stack.last_mut() {
                    node.text.push_str(&t.xml10_content());
                }
            }
            Event::GeneralRef(r) => {
                let resolved = match r.resolve_char_ref() {
                    Ok(Some(ch)) => ch.to_string(),
                    Ok(None) => quick_xml::escape::resolve_predefined_entity(&r)
                        .ok_or_else(|| HarvestError::Xml { offset, message: format!("unknown entity &{};", &*r) })?
                        .to_string(),
                    Err(e) => return Err(HarvestError::Xml { offset, message: e.to_string() }),
                };
                if let Some(node) = stack.last_mut() {
                    node.text.push_str(&resolved);
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    if let Some(open) = stack.last() {
        return Err(HarvestError::Xml {
            offset: text.len() as u64,
            message: format!("unexpected end of document: unclosed element <{}>", open.name),
        });
    }
    root.ok_or(HarvestError::Xml { offset: 0, message: "document has no root element".into() })
}
