use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{InputEvent, Micros, BTN_TOUCH_RANGE, EV_KEY};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyPress {
    pub key_code: u16,
    pub device_index: u32,
    pub down_time: Micros,
    pub up_time: Micros,
    pub key_name: Option<String>,
    /// The input ended before the key was released.
    pub truncated: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyExtraction {
    /// Ordered by press time.
    pub presses: Vec<KeyPress>,
    /// Events that were not key transitions.
    pub unconsumed: Vec<InputEvent>,
    /// Releases or repeats with no matching press.
    pub dropped: Vec<InputEvent>,
}

// (linux code, name, android keycode)
const KEYS: &[(u16, &str, Option<u16>)] = &[
    (1, "KEY_ESC", Some(111)),
    (14, "KEY_BACKSPACE", Some(67)),
    (15, "KEY_TAB", Some(61)),
    (28, "KEY_ENTER", Some(66)),
    (57, "KEY_SPACE", Some(62)),
    (102, "KEY_HOME", Some(3)),
    (103, "KEY_UP", Some(19)),
    (105, "KEY_LEFT", Some(21)),
    (106, "KEY_RIGHT", Some(22)),
    (108, "KEY_DOWN", Some(20)),
    (113, "KEY_MUTE", Some(164)),
    (114, "KEY_VOLUMEDOWN", Some(25)),
    (115, "KEY_VOLUMEUP", Some(24)),
    (116, "KEY_POWER", Some(26)),
    (139, "KEY_MENU", Some(82)),
    (158, "KEY_BACK", Some(4)),
    (172, "KEY_HOMEPAGE", Some(3)),
    (212, "KEY_CAMERA", Some(27)),
    (217, "KEY_SEARCH", Some(84)),
    (580, "KEY_APPSELECT", Some(187)),
];

/// Linux input key name for a key code, for the codes Android devices
/// commonly expose.
pub fn key_name(code: u16) -> Option<&'static str> {
    KEYS.iter().find(|(c, _, _)| *c == code).map(|(_, n, _)| *n)
}

/// Android `KeyEvent` code for a Linux key code, as accepted by
/// `input keyevent`.
pub fn android_keycode(code: u16) -> Option<u16> {
    KEYS.iter().find(|(c, _, _)| *c == code).and_then(|(_, _, a)| *a)
}

/// Pairs key downs with their releases. Auto-repeats extend an open press.
/// Touch contact buttons (`BTN_TOUCH` and friends) are left unconsumed.
pub fn extract_key_events(events: &[InputEvent]) -> KeyExtraction {
    let mut out = KeyExtraction::default();
    let mut open: BTreeMap<(u32, u16), Micros> = BTreeMap::new();
    let mut last = 0;

    for ev in events {
        last = last.max(ev.timestamp);
        if ev.ev_type != EV_KEY || BTN_TOUCH_RANGE.contains(&ev.ev_code) {
            out.unconsumed.push(*ev);
            continue;
        }
        let key = (ev.device_index, ev.ev_code);
        match ev.ev_value {
            0 => match open.remove(&key) {
                Some(down) => out.presses.push(press(key, down, ev.timestamp, false)),
                None => {
                    log::warn!("key {} released without a press at {}us", ev.ev_code, ev.timestamp);
                    out.dropped.push(*ev);
                }
            },
            1 => {
                open.entry(key).or_insert(ev.timestamp);
            }
            _ => {
                if !open.contains_key(&key) {
                    log::warn!("key {} repeat without a press at {}us", ev.ev_code, ev.timestamp);
                    out.dropped.push(*ev);
                }
            }
        }
    }
    for (key, down) in open {
        out.presses.push(press(key, down, last, true));
    }
    out.presses.sort_by_key(|p| (p.down_time, p.device_index, p.key_code));
    out
}

fn press((device_index, key_code): (u32, u16), down: Micros, up: Micros, truncated: bool) -> KeyPress {
    KeyPress {
        key_code,
        device_index,
        down_time: down,
        up_time: up.max(down),
        key_name: key_name(key_code).map(str::to_string),
        truncated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(t: u64, code: u16, v: i32) -> InputEvent {
        InputEvent::new(t, 0, EV_KEY, code, v)
    }

    #[test]
    fn power_press() {
        let out = extract_key_events(&[key(0, 116, 1), key(80_000, 116, 0)]);
        assert_eq!(
            out.presses,
            vec![KeyPress {
                key_code: 116,
                device_index: 0,
                down_time: 0,
                up_time: 80_000,
                key_name: Some("KEY_POWER".into()),
                truncated: false
            }]
        );
        assert_eq!(android_keycode(116), Some(26));
    }

    #[test]
    fn empty() {
        assert_eq!(extract_key_events(&[]), KeyExtraction::default());
    }

    #[test]
    fn unreleased_press_is_truncated() {
        let out = extract_key_events(&[key(10, 114, 1), InputEvent::new(40, 0, 0, 0, 0)]);
        assert_eq!(out.presses.len(), 1);
        assert!(out.presses[0].truncated);
        assert_eq!(out.presses[0].up_time, 40);
    }

    #[test]
    fn repeat_extends_and_orphans_drop() {
        let out = extract_key_events(&[key(0, 158, 0), key(5, 158, 1), key(9, 158, 2), key(12, 158, 0), key(20, 158, 2)]);
        assert_eq!(out.presses.len(), 1);
        assert_eq!((out.presses[0].down_time, out.presses[0].up_time), (5, 12));
        assert_eq!(out.dropped.len(), 2);
    }

    #[test]
    fn touch_buttons_left_alone() {
        let out = extract_key_events(&[key(0, 0x14a, 1), key(1, 0x14a, 0)]);
        assert!(out.presses.is_empty());
        assert_eq!(out.unconsumed.len(), 2);
    }
}
