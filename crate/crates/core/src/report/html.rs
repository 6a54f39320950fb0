use std::fmt::Write;

use super::BugReport;
use crate::gesture::UserInteraction;
use crate::replay::ScriptFlavor;
use crate::sensor::SensorTrace;
use crate::ui::ComponentSummary;

/// Where the rendered page should point for attachments and scripts.
pub trait AssetResolver {
    /// URL for an attachment, or `None` to render a placeholder.
    fn attachment(&self, report: &BugReport, name: &str) -> Option<String>;
    fn replay_script(&self, report: &BugReport, flavor: ScriptFlavor) -> String;
}

/// Links relative to the report directory, as written by `report build`.
#[derive(Debug, Clone, Copy, Default)]
pub struct RelativeAssets;

impl AssetResolver for RelativeAssets {
    fn attachment(&self, report: &BugReport, name: &str) -> Option<String> {
        report.attachments.contains_key(name).then(|| name.to_string())
    }

    fn replay_script(&self, _report: &BugReport, flavor: ScriptFlavor) -> String {
        flavor.file_name()
    }
}

pub fn escape_html(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

const STYLE: &str = "body{font-family:sans-serif;max-width:60em;margin:auto;padding:1em}\
img.screenshot{max-width:24em;border:1px solid #888}\
.placeholder{display:inline-block;padding:2em;border:1px dashed #888;color:#666}\
table{border-collapse:collapse}td,th{border:1px solid #ccc;padding:.2em .5em;text-align:left}\
section.step{border-top:1px solid #ccc;margin-top:1em}";

/// Renders the report as one static page. Output depends only on the
/// report and the resolver.
pub fn render_html(report: &BugReport, assets: &dyn AssetResolver) -> String {
    let e = escape_html;
    let mut h = String::new();
    let _ = write!(
        h,
        "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>{}</title>\n<style>{STYLE}</style>\n</head>\n<body>\n",
        e(&report.title)
    );

    let d = &report.device_info;
    let _ = writeln!(h, "<header>\n<h1>{}</h1>", e(&report.title));
    let _ = writeln!(
        h,
        "<dl>\n<dt>Report</dt><dd>{}</dd>\n<dt>App</dt><dd>{}</dd>\n<dt>Device</dt><dd>{} (Android {}, {}x{})</dd>\n<dt>Created</dt><dd>{}</dd>\n</dl>\n</header>",
        e(&report.id),
        e(&report.app_package),
        e(&d.model),
        e(&d.os_version),
        d.screen_width,
        d.screen_height,
        report.created_at.to_rfc3339()
    );

    let _ = writeln!(
        h,
        "<section class=\"annotations\">\n<h2>Expected behavior</h2>\n<p>{}</p>\n<h2>Actual behavior</h2>\n<p>{}</p>\n</section>",
        e(&report.expected_behavior),
        e(&report.actual_behavior)
    );

    let _ = writeln!(h, "<h2>Steps ({})</h2>", report.steps.len());
    for step in &report.steps {
        render_step(&mut h, report, step, assets);
    }

    let _ = writeln!(h, "<section class=\"sensors\">\n<h2>Sensor traces</h2>");
    if report.sensor_traces.is_empty() {
        h.push_str("<p>No sensor data recorded.</p>\n");
    }
    for trace in report.sensor_traces.iter() {
        render_trace(&mut h, trace);
    }
    h.push_str("</section>\n");

    h.push_str("<section class=\"replay\">\n<h2>Replay scripts</h2>\n<ul>\n");
    for flavor in ScriptFlavor::ALL {
        let _ = writeln!(h, "<li><a href=\"{}\">{} script</a></li>", e(&assets.replay_script(report, flavor)), flavor.as_str());
    }
    h.push_str("</ul>\n</section>\n</body>\n</html>\n");
    h
}

fn render_step(h: &mut String, report: &BugReport, step: &UserInteraction, assets: &dyn AssetResolver) {
    let e = escape_html;
    let _ = writeln!(h, "<section class=\"step\" id=\"step-{}\">", step.index);
    let _ = writeln!(h, "<h3>Step {}</h3>", step.index);
    let _ = writeln!(h, "<p class=\"description\">{}</p>", e(&step.description));
    let _ = writeln!(
        h,
        "<p class=\"timing\">{:?}, {} ms, from {} us to {} us</p>",
        step.kind, step.duration_ms, step.start_time, step.end_time
    );
    match step.screenshot_ref.as_deref().and_then(|n| assets.attachment(report, n)) {
        Some(url) => {
            let _ = writeln!(h, "<img class=\"screenshot\" src=\"{}\" alt=\"Screenshot for step {}\">", e(&url), step.index);
        }
        None => {
            let _ = writeln!(h, "<div class=\"placeholder\">No screenshot for step {}</div>", step.index);
        }
    }
    match &step.target {
        Some(t) => component_table(h, "Component", t),
        None => h.push_str("<p class=\"component\">No component identified.</p>\n"),
    }
    if let Some(a) = &step.clickable_ancestor {
        component_table(h, "Clickable ancestor", a);
    }
    if let Some(url) = step.ui_dump_ref.as_deref().and_then(|n| assets.attachment(report, n)) {
        let _ = writeln!(h, "<p><a href=\"{}\">UI hierarchy</a></p>", e(&url));
    }
    h.push_str("</section>\n");
}

fn component_table(h: &mut String, caption: &str, c: &ComponentSummary) {
    let e = escape_html;
    let _ = writeln!(
        h,
        "<table class=\"component\">\n<caption>{caption}</caption>\n\
         <tr><th>class</th><td>{}</td></tr>\n<tr><th>resource id</th><td>{}</td></tr>\n\
         <tr><th>text</th><td>{}</td></tr>\n<tr><th>clickable</th><td>{}</td></tr>\n\
         <tr><th>bounds</th><td>{}</td></tr>\n</table>",
        e(&c.class_name),
        e(&c.resource_id),
        e(&c.text),
        c.clickable,
        c.bounds
    );
}

fn render_trace(h: &mut String, trace: &SensorTrace) {
    let s = trace.summarize();
    let _ = writeln!(
        h,
        "<table class=\"sensor\">\n<caption>{} ({})</caption>\n<tr><th>samples</th><td colspan=\"3\">{}</td></tr>",
        escape_html(trace.kind.name()),
        escape_html(&trace.unit),
        s.count
    );
    if let Some(span) = s.t_span_us {
        let _ = writeln!(h, "<tr><th>span</th><td colspan=\"3\">{} ms</td></tr>", span / 1000);
    }
    if let Some(axes) = &s.axes {
        h.push_str("<tr><th>axis</th><th>min</th><th>max</th><th>mean</th></tr>\n");
        for (i, a) in axes.iter().enumerate() {
            let _ = writeln!(h, "<tr><td>{i}</td><td>{}</td><td>{}</td><td>{}</td></tr>", a.min, a.max, a.mean);
        }
    }
    h.push_str("</table>\n");
}
