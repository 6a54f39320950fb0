//! Reference protocol-B simulator. Works frame by frame over an explicit
//! slot table and knows nothing about the production tracker's internals.

use std::collections::BTreeMap;

use odbr_core::event::{InputEvent, TouchPoint, TouchTrack};

const SYN: u16 = 0;
const KEY: u16 = 1;
const ABS: u16 = 3;

#[derive(Clone, Default)]
struct Contact {
    order: usize,
    id: i32,
    synthetic: bool,
    points: Vec<TouchPoint>,
    changed: bool,
    lifting: bool,
}

#[derive(Clone, Default)]
struct SlotRow {
    x: Option<i32>,
    y: Option<i32>,
    p: Option<i32>,
    contact: Option<Contact>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleOutput {
    pub tracks: Vec<TouchTrack>,
    pub unconsumed: Vec<InputEvent>,
}

/// `None` when the input uses protocol A.
pub fn simulate(events: &[InputEvent]) -> Option<OracleOutput> {
    let mut table: BTreeMap<i32, SlotRow> = BTreeMap::new();
    let mut active_slot = 0i32;
    let mut opened = 0usize;
    let mut done: Vec<(usize, TouchTrack)> = Vec::new();
    let mut unconsumed = Vec::new();
    let mut last_t = 0;

    let close = |done: &mut Vec<(usize, TouchTrack)>, slot: i32, c: Contact, up: u64, truncated: bool| {
        if let Some(first) = c.points.first() {
            let down = first.timestamp;
            done.push((
                c.order,
                TouchTrack {
                    tracking_id: c.id,
                    slot,
                    down_time: down,
                    up_time: if up < down { down } else { up },
                    points: c.points,
                    truncated,
                    synthetic: c.synthetic,
                },
            ));
        }
    };

    for ev in events {
        last_t = last_t.max(ev.timestamp);
        let (ty, code, v) = (ev.ev_type, ev.ev_code, ev.ev_value);
        if ty == SYN && code == 2 {
            return None;
        }
        if ty == SYN && code == 0 {
            for (&slot, row) in table.iter_mut() {
                let mut finished = false;
                if let Some(c) = row.contact.as_mut() {
                    if c.changed && row.x.is_some() && row.y.is_some() {
                        c.points.push(TouchPoint {
                            timestamp: ev.timestamp,
                            x: row.x.unwrap(),
                            y: row.y.unwrap(),
                            pressure: row.p,
                            slot,
                            tracking_id: c.id,
                        });
                        c.changed = false;
                    }
                    finished = c.lifting;
                }
                if finished {
                    let c = row.contact.take().unwrap();
                    close(&mut done, slot, c, ev.timestamp, false);
                }
            }
            continue;
        }
        if ty == KEY && (0x140..=0x14f).contains(&code) {
            continue;
        }
        if ty != ABS || !(0x2f..=0x3d).contains(&code) {
            unconsumed.push(*ev);
            continue;
        }
        match code {
            0x2f => {
                if v >= 0 {
                    active_slot = v;
                }
            }
            0x39 => {
                let row = table.entry(active_slot).or_default();
                if v < 0 {
                    if let Some(c) = row.contact.as_mut() {
                        c.lifting = true;
                    }
                } else {
                    let same = matches!(&row.contact, Some(c) if c.id == v && !c.lifting);
                    if !same {
                        if let Some(old) = row.contact.take() {
                            close(&mut done, active_slot, old, ev.timestamp, false);
                        }
                        row.contact = Some(Contact { order: opened, id: v, changed: true, ..Default::default() });
                        opened += 1;
                    }
                }
            }
            0x35 | 0x36 | 0x3a => {
                let row = table.entry(active_slot).or_default();
                match code {
                    0x35 => row.x = Some(v),
                    0x36 => row.y = Some(v),
                    _ => row.p = Some(v),
                }
                if row.contact.is_none() {
                    row.contact = Some(Contact { order: opened, id: -2 - active_slot, synthetic: true, ..Default::default() });
                    opened += 1;
                }
                row.contact.as_mut().unwrap().changed = true;
            }
            _ => {}
        }
    }

    for (slot, row) in table {
        if let Some(c) = row.contact {
            close(&mut done, slot, c, last_t, true);
        }
    }
    done.sort_by_key(|(order, _)| *order);
    Some(OracleOutput { tracks: done.into_iter().map(|(_, t)| t).collect(), unconsumed })
}
