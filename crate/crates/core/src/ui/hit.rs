use super::{AxisRanges, ComponentSummary, ScreenPoint, UiNode, UiTree};

/// Scales a raw touch coordinate onto the screen and clamps it to the last
/// pixel on each axis.
pub fn map_raw_to_screen(x: i32, y: i32, ranges: &AxisRanges) -> ScreenPoint {
    fn axis(v: i32, lo: i32, hi: i32, dim: u32) -> i32 {
        let last = i64::from(dim.max(1)) - 1;
        let span = i64::from(hi) - i64::from(lo);
        let scaled = ((i64::from(v) - i64::from(lo)) * last) as f64 / span as f64;
        (scaled.round() as i64).clamp(0, last) as i32
    }
    ScreenPoint {
        x: axis(x, ranges.x_min, ranges.x_max, ranges.screen_width),
        y: axis(y, ranges.y_min, ranges.y_max, ranges.screen_height),
    }
}

/// The node a point landed on plus, when that node is not clickable, its
/// nearest clickable ancestor.
#[derive(Debug, Clone, Copy)]
pub struct Hit<'a> {
    pub node: &'a UiNode,
    pub clickable_ancestor: Option<&'a UiNode>,
}

/// Deepest node whose bounds contain `p`; among equally deep candidates the
/// one later in document order (drawn on top) wins. Children are not assumed
/// to lie inside their parents, so every node is visited.
pub fn hit_test<'a>(tree: &'a UiTree, p: ScreenPoint) -> Option<&'a UiNode> {
    hit_test_with_ancestor(tree, p).map(|h| h.node)
}

pub fn hit_test_with_ancestor<'a>(tree: &'a UiTree, p: ScreenPoint) -> Option<Hit<'a>> {
    struct Walk<'a> {
        p: ScreenPoint,
        path: Vec<&'a UiNode>,
        best: Option<Hit<'a>>,
    }

    impl<'a> Walk<'a> {
        fn visit(&mut self, node: &'a UiNode) {
            if node.bounds.contains(self.p.x, self.p.y) {
                let better = match self.best {
                    None => true,
                    Some(b) => (node.depth, node.document_order) > (b.node.depth, b.node.document_order),
                };
                if better {
                    let clickable_ancestor =
                        if node.clickable { None } else { self.path.iter().rev().copied().find(|n| n.clickable) };
                    self.best = Some(Hit { node, clickable_ancestor });
                }
            }
            self.path.push(node);
            for child in &node.children {
                self.visit(child);
            }
            self.path.pop();
        }
    }

    let mut walk = Walk { p, path: Vec::new(), best: None };
    for root in &tree.roots {
        walk.visit(root);
    }
    walk.best
}

pub fn component_summary(node: &UiNode) -> ComponentSummary {
    ComponentSummary {
        class_name: node.class_name.clone(),
        resource_id: node.resource_id.clone(),
        text: node.text.clone(),
        clickable: node.clickable,
        bounds: node.bounds,
    }
}
