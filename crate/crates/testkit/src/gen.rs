//! Seeded random inputs for property and acceptance tests.

use std::collections::BTreeMap;

use odbr_core::event::InputEvent;
use rand::seq::SliceRandom;
use rand::Rng;

const ABS: u16 = 3;

fn abs(t: u64, dev: u32, code: u16, v: i32) -> InputEvent {
    InputEvent::new(t, dev, ABS, code, v)
}

/// A valid protocol-B session: at most `max_slots` slots and `max_frames`
/// SYN_REPORT frames. Contacts open with a position, move, lift, and may be
/// left open at the end. Unrelated events are sprinkled in.
pub fn protocol_b(rng: &mut impl Rng, max_slots: i32, max_frames: usize) -> Vec<InputEvent> {
    let dev = 1;
    let frames = rng.gen_range(0..=max_frames);
    let mut t: u64 = rng.gen_range(0..1_000_000);
    let mut next_id: i32 = rng.gen_range(0..1000);
    let mut open: BTreeMap<i32, i32> = BTreeMap::new();
    let mut cur_slot = 0;
    let mut out = Vec::new();

    for _ in 0..frames {
        t += rng.gen_range(0..30_000);
        let mut touched_slots: Vec<i32> = (0..max_slots).collect();
        touched_slots.shuffle(rng);
        touched_slots.truncate(rng.gen_range(0..=max_slots as usize));
        for slot in touched_slots {
            let select = |out: &mut Vec<InputEvent>, cur: &mut i32| {
                if *cur != slot {
                    out.push(abs(t, dev, 0x2f, slot));
                    *cur = slot;
                }
            };
            match open.get(&slot).copied() {
                None => {
                    if rng.gen_bool(0.5) {
                        select(&mut out, &mut cur_slot);
                        out.push(abs(t, dev, 0x39, next_id));
                        open.insert(slot, next_id);
                        next_id += 1;
                        out.push(abs(t, dev, 0x35, rng.gen_range(0..4096)));
                        out.push(abs(t, dev, 0x36, rng.gen_range(0..4096)));
                        if rng.gen_bool(0.5) {
                            out.push(abs(t, dev, 0x3a, rng.gen_range(1..256)));
                        }
                        if rng.gen_bool(0.3) {
                            out.push(abs(t, dev, 0x30, rng.gen_range(1..20)));
                        }
                    }
                }
                Some(_) => {
                    select(&mut out, &mut cur_slot);
                    match rng.gen_range(0..10) {
                        0..=2 => {
                            out.push(abs(t, dev, 0x39, -1));
                            open.remove(&slot);
                        }
                        3 => out.push(abs(t, dev, 0x35, rng.gen_range(0..4096))),
                        4 => out.push(abs(t, dev, 0x36, rng.gen_range(0..4096))),
                        5 => out.push(abs(t, dev, 0x3a, rng.gen_range(1..256))),
                        _ => {
                            out.push(abs(t, dev, 0x35, rng.gen_range(0..4096)));
                            out.push(abs(t, dev, 0x36, rng.gen_range(0..4096)));
                        }
                    }
                }
            }
        }
        if rng.gen_bool(0.1) {
            out.push(InputEvent::new(t, dev, 1, 0x14a, i32::from(!open.is_empty())));
        }
        if rng.gen_bool(0.05) {
            out.push(InputEvent::new(t, dev, 4, 5, rng.gen()));
        }
        out.push(InputEvent::new(t, dev, 0, 0, 0));
    }
    out
}

/// Arbitrary events across a few devices, timestamps non-decreasing.
pub fn event_log(rng: &mut impl Rng, max_len: usize) -> Vec<InputEvent> {
    let n = rng.gen_range(0..=max_len);
    let mut t: u64 = rng.gen_range(0..5_000_000);
    (0..n)
        .map(|_| {
            t += match rng.gen_range(0..4) {
                0 => 0,
                1 => rng.gen_range(0..2_000),
                2 => rng.gen_range(0..60_000),
                _ => rng.gen_range(0..1_500_000),
            };
            let ty = *[0u16, 1, 3, 3, 3, 4].choose(rng).unwrap();
            InputEvent::new(t, rng.gen_range(0..5), ty, rng.gen_range(0..0x40), rng.gen())
        })
        .collect()
}

/// A uiautomator-style dump with random nesting, overlaps, zero-area and
/// out-of-parent nodes.
pub fn ui_dump_xml(rng: &mut impl Rng, width: i32, height: i32, max_nodes: usize) -> String {
    let budget = rng.gen_range(1..=max_nodes);
    let mut count = 0;
    let mut xml = String::from("<?xml version='1.0' encoding='UTF-8' standalone='yes' ?><hierarchy rotation=\"0\">");
    while count < budget {
        node(rng, &mut xml, &mut count, budget, 0, (0, 0, width, height));
    }
    xml.push_str("</hierarchy>");
    xml
}

fn rect_in(rng: &mut impl Rng, (l, t, r, b): (i32, i32, i32, i32)) -> (i32, i32, i32, i32) {
    if rng.gen_bool(0.3) {
        return (l, t, r, b);
    }
    if rng.gen_bool(0.1) {
        // ignore the parent entirely
        let x = rng.gen_range(-50..r + 50);
        let y = rng.gen_range(-50..b + 50);
        return (x, y, x + rng.gen_range(0..300), y + rng.gen_range(0..300));
    }
    let x0 = rng.gen_range(l..=r);
    let y0 = rng.gen_range(t..=b);
    let x1 = if rng.gen_bool(0.05) { x0 } else { rng.gen_range(x0..=r) };
    let y1 = if rng.gen_bool(0.05) { y0 } else { rng.gen_range(y0..=b) };
    (x0, y0, x1, y1)
}

fn node(rng: &mut impl Rng, xml: &mut String, count: &mut usize, budget: usize, depth: usize, parent: (i32, i32, i32, i32)) {
    *count += 1;
    let r = rect_in(rng, parent);
    let class = ["android.widget.FrameLayout", "android.widget.Button", "android.widget.TextView", "android.view.View"].choose(rng).unwrap();
    let clickable = rng.gen_bool(0.3);
    xml.push_str(&format!(
        "<node index=\"0\" text=\"n{count}\" resource-id=\"id/n{count}\" class=\"{class}\" package=\"com.example\" content-desc=\"\" clickable=\"{clickable}\" bounds=\"[{},{}][{},{}]\"",
        r.0, r.1, r.2, r.3
    ));
    let kids = if depth < 8 && *count < budget { rng.gen_range(0..4) } else { 0 };
    if kids == 0 {
        xml.push_str(" />");
        return;
    }
    xml.push('>');
    for _ in 0..kids {
        if *count >= budget {
            break;
        }
        node(rng, xml, count, budget, depth + 1, r);
    }
    xml.push_str("</node>");
}

/// A random point, biased toward node edges when `edges` are provided.
pub fn point(rng: &mut impl Rng, width: i32, height: i32, edges: &[(i32, i32)]) -> (i32, i32) {
    if !edges.is_empty() && rng.gen_bool(0.3) {
        let &(x, y) = edges.choose(rng).unwrap();
        return (x + rng.gen_range(-1..=1), y + rng.gen_range(-1..=1));
    }
    (rng.gen_range(-10..width + 10), rng.gen_range(-10..height + 10))
}
