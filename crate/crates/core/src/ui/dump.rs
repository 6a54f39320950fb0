use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{parse_bounds, BoundsError, Rect};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UiNode {
    pub class_name: String,
    pub resource_id: String,
    pub text: String,
    pub content_desc: String,
    pub package: String,
    pub clickable: bool,
    pub bounds: Rect,
    pub children: Vec<UiNode>,
    pub depth: usize,
    /// Position in a pre-order walk of the whole dump.
    pub document_order: usize,
}

/// A parsed dump. Top-level `node` elements (one per window) are roots at
/// depth 0.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UiTree {
    pub rotation: Option<i32>,
    pub roots: Vec<UiNode>,
}

impl UiTree {
    /// Pre-order iterator over every node.
    pub fn iter(&self) -> impl Iterator<Item = &UiNode> {
        let mut stack: Vec<&UiNode> = self.roots.iter().rev().collect();
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children.iter().rev());
            Some(node)
        })
    }

    pub fn node_count(&self) -> usize {
        self.iter().count()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DumpError {
    #[error("malformed XML at byte {position}: {message}")]
    Xml { position: u64, message: String },
    #[error("document has no <hierarchy> root")]
    MissingHierarchy,
    #[error("unexpected <{element}> element")]
    UnexpectedElement { element: String },
    #[error("node {document_order} has no bounds attribute")]
    MissingBounds { document_order: usize },
    #[error("node {document_order}: {source}")]
    Bounds { document_order: usize, source: BoundsError },
    #[error("unterminated <node> elements at end of document")]
    Unterminated,
}

pub fn parse_ui_dump(xml: &str) -> Result<UiTree, DumpError> {
    let mut reader = Reader::from_str(xml);
    reader.config_mut().trim_text(true);

    let mut tree = UiTree::default();
    let mut seen_hierarchy = false;
    let mut in_hierarchy = false;
    let mut stack: Vec<UiNode> = Vec::new();
    let mut next_order = 0;

    loop {
        let event = reader
            .read_event()
            .map_err(|e| DumpError::Xml { position: reader.error_position(), message: e.to_string() })?;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) if e.name().as_ref() == b"hierarchy" => {
                if seen_hierarchy {
                    return Err(DumpError::UnexpectedElement { element: "hierarchy".into() });
                }
                seen_hierarchy = true;
                in_hierarchy = matches!(event, Event::Start(_));
                tree.rotation = attr(e, b"rotation")?.and_then(|r| r.parse().ok());
            }
            Event::Start(e) if e.name().as_ref() == b"node" && in_hierarchy => {
                let node = build_node(&e, stack.len(), next_order)?;
                next_order += 1;
                stack.push(node);
            }
            Event::Empty(e) if e.name().as_ref() == b"node" && in_hierarchy => {
                let node = build_node(&e, stack.len(), next_order)?;
                next_order += 1;
                attach(&mut stack, &mut tree, node);
            }
            Event::End(e) if e.name().as_ref() == b"node" => {
                let node = stack.pop().ok_or(DumpError::UnexpectedElement { element: "/node".into() })?;
                attach(&mut stack, &mut tree, node);
            }
            Event::End(e) if e.name().as_ref() == b"hierarchy" => {
                if !stack.is_empty() {
                    return Err(DumpError::Unterminated);
                }
                in_hierarchy = false;
            }
            Event::Start(e) | Event::Empty(e) => {
                return Err(DumpError::UnexpectedElement {
                    element: String::from_utf8_lossy(e.name().as_ref()).into_owned(),
                })
            }
            Event::Eof => break,
            _ => {}
        }
    }

    if !seen_hierarchy {
        return Err(DumpError::MissingHierarchy);
    }
    if !stack.is_empty() || in_hierarchy {
        return Err(DumpError::Unterminated);
    }
    Ok(tree)
}

fn attach(stack: &mut [UiNode], tree: &mut UiTree, node: UiNode) {
    match stack.last_mut() {
        Some(parent) => parent.children.push(node),
        None => tree.roots.push(node),
    }
}

fn attr(e: &BytesStart<'_>, name: &[u8]) -> Result<Option<String>, DumpError> {
    for a in e.attributes() {
        let a = a.map_err(|err| DumpError::Xml { position: 0, message: err.to_string() })?;
        if a.key.as_ref() == name {
            let v = a
                .unescape_value()
                .map_err(|err| DumpError::Xml { position: 0, message: err.to_string() })?;
            return Ok(Some(v.into_owned()));
        }
    }
    Ok(None)
}

fn build_node(e: &BytesStart<'_>, depth: usize, document_order: usize) -> Result<UiNode, DumpError> {
    let bounds = attr(e, b"bounds")?.ok_or(DumpError::MissingBounds { document_order })?;
    let bounds = parse_bounds(&bounds).map_err(|source| DumpError::Bounds { document_order, source })?;
    Ok(UiNode {
        class_name: attr(e, b"class")?.unwrap_or_default(),
        resource_id: attr(e, b"resource-id")?.unwrap_or_default(),
        text: attr(e, b"text")?.unwrap_or_default(),
        content_desc: attr(e, b"content-desc")?.unwrap_or_default(),
        package: attr(e, b"package")?.unwrap_or_default(),
        clickable: attr(e, b"clickable")?.is_some_and(|v| v == "true"),
        bounds,
        children: Vec::new(),
        depth,
        document_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const NESTED: &str = r#"<?xml version='1.0' encoding='UTF-8' standalone='yes' ?>
<hierarchy rotation="0">
  <node index="0" text="" resource-id="" class="android.widget.FrameLayout" package="com.example" content-desc="" checkable="false" clickable="false" bounds="[0,0][1080,1920]">
    <node index="0" text="" resource-id="com.example:id/panel" class="android.widget.LinearLayout" package="com.example" content-desc="" clickable="false" bounds="[0,100][1080,1000]">
      <node index="0" text="OK" resource-id="com.example:id/ok" class="android.widget.Button" package="com.example" content-desc="confirm" clickable="true" bounds="[440,900][640,1000]" />
    </node>
  </node>
</hierarchy>"#;

    #[test]
    fn single_node() {
        let tree = parse_ui_dump(r#"<hierarchy rotation="1"><node class="a" bounds="[0,0][1080,1920]"/></hierarchy>"#).unwrap();
        assert_eq!(tree.rotation, Some(1));
        assert_eq!(tree.roots.len(), 1);
        assert_eq!(tree.roots[0].depth, 0);
        assert_eq!(tree.node_count(), 1);
    }

    #[test]
    fn nesting_depths_and_order() {
        let tree = parse_ui_dump(NESTED).unwrap();
        let nodes: Vec<_> = tree.iter().map(|n| (n.depth, n.document_order)).collect();
        assert_eq!(nodes, vec![(0, 0), (1, 1), (2, 2)]);
        let button = tree.iter().nth(2).unwrap();
        assert!(button.clickable);
        assert_eq!(button.class_name, "android.widget.Button");
        assert_eq!(button.text, "OK");
        assert_eq!(button.content_desc, "confirm");
        assert_eq!(button.resource_id, "com.example:id/ok");
        assert_eq!(button.package, "com.example");
        assert_eq!(button.bounds, Rect::new(440, 900, 640, 1000));
    }

    #[test]
    fn missing_optional_attributes_default() {
        let tree = parse_ui_dump(r#"<hierarchy><node bounds="[0,0][1,1]"/></hierarchy>"#).unwrap();
        let n = &tree.roots[0];
        assert!(n.class_name.is_empty() && n.text.is_empty() && !n.clickable);
    }

    #[test]
    fn errors_name_the_node() {
        let err = parse_ui_dump(r#"<hierarchy><node bounds="[0,0][1,1]"><node class="x"/></node></hierarchy>"#).unwrap_err();
        assert!(matches!(err, DumpError::MissingBounds { document_order: 1 }), "{err:?}");
        let err = parse_ui_dump(r#"<hierarchy><node bounds="[0,0][1"/></hierarchy>"#).unwrap_err();
        assert!(matches!(err, DumpError::Bounds { document_order: 0, .. }), "{err:?}");
        assert!(matches!(parse_ui_dump("<hierarchy><node bounds=\"[0,0][1,1]\"></hierarchy>"), Err(DumpError::Xml { .. } | DumpError::Unterminated)));
        assert!(matches!(parse_ui_dump("<nodes/>"), Err(DumpError::UnexpectedElement { .. })));
        assert!(matches!(parse_ui_dump(""), Err(DumpError::MissingHierarchy)));
    }

    #[test]
    fn escaped_text() {
        let tree = parse_ui_dump(r#"<hierarchy><node text="a &amp; b" bounds="[0,0][1,1]"/></hierarchy>"#).unwrap();
        assert_eq!(tree.roots[0].text, "a & b");
    }
}
