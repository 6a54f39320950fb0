use crate::event::android_keycode;
use crate::gesture::{micros_to_ms, InteractionKind, InteractionSource, UserInteraction};
use crate::ui::ScreenPoint;

use super::{format_sleep, ScriptFlavor};

/// High-level `input` commands, one per step. Multi-touch cannot be
/// expressed and is left as a comment.
pub fn emit_adb_script(steps: &[UserInteraction], report_id: Option<&str>) -> String {
    let mut out = String::from("#!/system/bin/sh\n");
    out.push_str(&format!("# report: {}\n", report_id.unwrap_or("-")));
    let mut prev_end = None;
    for step in steps {
        if let Some(end) = prev_end {
            let gap = micros_to_ms(step.start_time.saturating_sub(end));
            if gap > 0 {
                out.push_str(&format_sleep(gap));
                out.push('\n');
            }
        }
        prev_end = Some(step.end_time);
        out.push_str(&format!("# step {}: {}\n", step.index, step.description.replace('\n', " ")));
        let a = step.start_point.unwrap_or(ScreenPoint::new(0, 0));
        let b = step.end_point.unwrap_or(a);
        let line = match step.kind {
            InteractionKind::Tap => format!("input tap {} {}", a.x, a.y),
            InteractionKind::Swipe => format!("input swipe {} {} {} {} {}", a.x, a.y, b.x, b.y, step.duration_ms),
            InteractionKind::LongPress => format!("input swipe {} {} {} {} {}", a.x, a.y, a.x, a.y, step.duration_ms),
            InteractionKind::MultiTouch => format!(
                "# multi-touch ({} fingers) omitted; replay it with {}",
                step.finger_count(),
                ScriptFlavor::Sendevent.file_name()
            ),
            InteractionKind::KeyPress => match &step.raw_tracks {
                InteractionSource::Key { press } => match android_keycode(press.key_code) {
                    Some(code) => format!("input keyevent {code}"),
                    None => format!("# key {} has no keyevent equivalent; omitted", press.key_code),
                },
                InteractionSource::Touch { .. } => "# key step without a key press; omitted".to_string(),
            },
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}
