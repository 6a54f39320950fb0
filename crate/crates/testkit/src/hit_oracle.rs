//! Brute-force hit test: flatten everything, keep what contains the point,
//! take the maximum (depth, document order).

use odbr_core::ui::{UiNode, UiTree};

fn inside(lo: i32, hi: i32, v: i32) -> bool {
    if hi == lo {
        v == lo
    } else {
        v >= lo && v < hi
    }
}

struct Flat<'a> {
    node: &'a UiNode,
    parent: Option<usize>,
}

fn flatten<'a>(node: &'a UiNode, parent: Option<usize>, out: &mut Vec<Flat<'a>>) {
    let me = out.len();
    out.push(Flat { node, parent });
    for c in &node.children {
        flatten(c, Some(me), out);
    }
}

/// Returns (hit node, nearest clickable ancestor when the hit node is not
/// clickable).
pub fn brute_hit(tree: &UiTree, x: i32, y: i32) -> Option<(&UiNode, Option<&UiNode>)> {
    let mut all = Vec::new();
    for r in &tree.roots {
        flatten(r, None, &mut all);
    }
    let best = (0..all.len())
        .filter(|&i| {
            let b = all[i].node.bounds;
            inside(b.left, b.right, x) && inside(b.top, b.bottom, y)
        })
        .max_by_key(|&i| (all[i].node.depth, all[i].node.document_order))?;
    let node = all[best].node;
    let mut ancestor = None;
    if !node.clickable {
        let mut cur = all[best].parent;
        while let Some(i) = cur {
            if all[i].node.clickable {
                ancestor = Some(all[i].node);
                break;
            }
            cur = all[i].parent;
        }
    }
    Some((node, ancestor))
}
