use crate::event::{KeyPress, Micros, TouchTrack};

use super::GestureThresholds;

/// Tracks and key presses grouped into candidate steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    /// One or more tracks; several when their contacts overlapped.
    Touch(Vec<TouchTrack>),
    Key(KeyPress),
}

impl Segment {
    pub fn start_time(&self) -> Micros {
        match self {
            Segment::Touch(tracks) => tracks.iter().map(|t| t.down_time).min().unwrap_or(0),
            Segment::Key(k) => k.down_time,
        }
    }

    pub fn end_time(&self) -> Micros {
        match self {
            Segment::Touch(tracks) => tracks.iter().map(|t| t.up_time).max().unwrap_or(0),
            Segment::Key(k) => k.up_time,
        }
    }
}

fn overlap_us(a: &TouchTrack, b: &TouchTrack) -> i128 {
    i128::from(a.up_time.min(b.up_time)) - i128::from(a.down_time.max(b.down_time))
}

/// Groups tracks whose contacts overlap by at least the multi-touch
/// threshold (transitively); every other track or key press stands alone.
/// Segments come back ordered by start time.
pub fn segment_interactions(tracks: &[TouchTrack], keys: &[KeyPress], thresholds: &GestureThresholds) -> Vec<Segment> {
    let min_overlap = i128::from(thresholds.multi_touch_overlap_ms) * 1000;
    let n = tracks.len();

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if overlap_us(&tracks[i], &tracks[j]) >= min_overlap {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }

    let mut groups: Vec<(usize, Vec<TouchTrack>)> = Vec::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, g)) => g.push(tracks[i].clone()),
            None => groups.push((root, vec![tracks[i].clone()])),
        }
    }

    let mut segments: Vec<Segment> = groups
        .into_iter()
        .map(|(_, mut g)| {
            g.sort_by_key(|t| t.down_time);
            Segment::Touch(g)
        })
        .chain(keys.iter().cloned().map(Segment::Key))
        .collect();
    segments.sort_by_key(Segment::start_time);
    segments
}
