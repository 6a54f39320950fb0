use super::{InteractionKind, InteractionSource, UserInteraction};
use crate::ui::ScreenPoint;

fn pt(p: Option<ScreenPoint>) -> String {
    let p = p.unwrap_or(ScreenPoint::new(0, 0));
    format!("({},{})", p.x, p.y)
}

/// Natural-language summary of a step. Deterministic per kind; falls back
/// to coordinates only when no target component is known.
pub fn describe(step: &UserInteraction) -> String {
    let at = pt(step.start_point);
    match step.kind {
        InteractionKind::Tap => match &step.target {
            Some(t) => format!("Tap on {} '{}' at {at}", t.class_name, t.label()),
            None => format!("Tap at {at}"),
        },
        InteractionKind::LongPress => match &step.target {
            Some(t) => format!("Long-press on {} '{}' at {at} for {}ms", t.class_name, t.label(), step.duration_ms),
            None => format!("Long-press at {at} for {}ms", step.duration_ms),
        },
        InteractionKind::Swipe => format!("Swipe from {at} to {}", pt(step.end_point)),
        InteractionKind::MultiTouch => {
            format!("Multi-touch gesture with {} fingers from {at}", step.finger_count())
        }
        InteractionKind::KeyPress => match &step.raw_tracks {
            InteractionSource::Key { press } => match &press.key_name {
                Some(name) => format!("Press {name}"),
                None => format!("Press key {}", press.key_code),
            },
            InteractionSource::Touch { .. } => "Press key".to_string(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::KeyPress;
    use crate::ui::{ComponentSummary, Rect};

    fn step(kind: InteractionKind, a: (i32, i32), b: (i32, i32)) -> UserInteraction {
        UserInteraction {
            index: 0,
            kind,
            start_point: Some(ScreenPoint::new(a.0, a.1)),
            end_point: Some(ScreenPoint::new(b.0, b.1)),
            start_time: 0,
            end_time: 900_000,
            duration_ms: 900,
            target: None,
            clickable_ancestor: None,
            screenshot_ref: None,
            ui_dump_ref: None,
            description: String::new(),
            raw_tracks: InteractionSource::Touch { tracks: vec![] },
        }
    }

    fn button(text: &str, id: &str) -> ComponentSummary {
        ComponentSummary {
            class_name: "android.widget.Button".into(),
            resource_id: id.into(),
            text: text.into(),
            clickable: true,
            bounds: Rect::new(440, 900, 640, 1000),
        }
    }

    #[test]
    fn templates() {
        assert_eq!(describe(&step(InteractionKind::Swipe, (100, 200), (400, 200))), "Swipe from (100,200) to (400,200)");

        let mut tap = step(InteractionKind::Tap, (540, 960), (540, 960));
        assert_eq!(describe(&tap), "Tap at (540,960)");
        tap.target = Some(button("OK", ""));
        assert_eq!(describe(&tap), "Tap on android.widget.Button 'OK' at (540,960)");
        tap.target = Some(button("", "com.example:id/ok"));
        assert_eq!(describe(&tap), "Tap on android.widget.Button 'com.example:id/ok' at (540,960)");
        tap.target = Some(button("", ""));
        assert_eq!(describe(&tap), "Tap on android.widget.Button 'android.widget.Button' at (540,960)");

        let mut lp = step(InteractionKind::LongPress, (5, 6), (5, 6));
        assert_eq!(describe(&lp), "Long-press at (5,6) for 900ms");
        lp.target = Some(button("OK", ""));
        assert_eq!(describe(&lp), "Long-press on android.widget.Button 'OK' at (5,6) for 900ms");
    }

    #[test]
    fn multi_touch_and_keys() {
        let mut mt = step(InteractionKind::MultiTouch, (1, 2), (3, 4));
        let t = crate::event::TouchTrack {
            tracking_id: 0,
            slot: 0,
            points: vec![],
            down_time: 0,
            up_time: 0,
            truncated: false,
            synthetic: false,
        };
        mt.raw_tracks = InteractionSource::Touch { tracks: vec![t.clone(), t] };
        assert_eq!(describe(&mt), "Multi-touch gesture with 2 fingers from (1,2)");

        let mut key = step(InteractionKind::KeyPress, (0, 0), (0, 0));
        key.start_point = None;
        let press = KeyPress { key_code: 116, device_index: 0, down_time: 0, up_time: 1, key_name: Some("KEY_POWER".into()), truncated: false };
        key.raw_tracks = InteractionSource::Key { press: press.clone() };
        assert_eq!(describe(&key), "Press KEY_POWER");
        key.raw_tracks = InteractionSource::Key { press: KeyPress { key_name: None, key_code: 999, ..press } };
        assert_eq!(describe(&key), "Press key 999");
    }
}
