use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub left: i32,
    pub top: i32,
    pub right: i32,
    pub bottom: i32,
}

impl Rect {
    pub fn new(left: i32, top: i32, right: i32, bottom: i32) -> Self {
        Rect { left, top, right, bottom }
    }

    /// Half-open containment; a zero-width (or zero-height) rect only
    /// matches its own coordinate on that axis.
    pub fn contains(&self, x: i32, y: i32) -> bool {
        fn axis(lo: i32, hi: i32, v: i32) -> bool {
            if lo == hi {
                v == lo
            } else {
                lo <= v && v < hi
            }
        }
        axis(self.left, self.right, x) && axis(self.top, self.bottom, y)
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}][{},{}]", self.left, self.top, self.right, self.bottom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed bounds {text:?}: {reason}")]
pub struct BoundsError {
    pub text: String,
    pub reason: &'static str,
}

pub fn format_bounds(r: &Rect) -> String {
    r.to_string()
}

/// Parses `[x1,y1][x2,y2]`.
pub fn parse_bounds(s: &str) -> Result<Rect, BoundsError> {
    let err = |reason| BoundsError { text: s.to_string(), reason };
    let mut rest = s;
    let mut nums = [0i32; 4];
    for pair in 0..2 {
        rest = rest.strip_prefix('[').ok_or_else(|| err("expected '['"))?;
        let close = rest.find(']').ok_or_else(|| err("expected ']'"))?;
        let (a, b) = rest[..close].split_once(',').ok_or_else(|| err("expected ','"))?;
        nums[pair * 2] = parse_int(a).ok_or_else(|| err("bad integer"))?;
        nums[pair * 2 + 1] = parse_int(b).ok_or_else(|| err("bad integer"))?;
        rest = &rest[close + 1..];
    }
    if !rest.is_empty() {
        return Err(err("trailing characters"));
    }
    let r = Rect::new(nums[0], nums[1], nums[2], nums[3]);
    if r.right < r.left || r.bottom < r.top {
        return Err(err("inverted rectangle"));
    }
    Ok(r)
}

fn parse_int(s: &str) -> Option<i32> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}
