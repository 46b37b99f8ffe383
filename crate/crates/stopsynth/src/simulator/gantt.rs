use std::collections::BTreeMap;
use std::fmt::Write;

use crate::geometry::Rational;

use super::ScheduleTrace;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GanttFormat {
    Ascii,
    Svg,
}

pub fn render_gantt(trace: &ScheduleTrace, format: GanttFormat) -> String {
    match format {
        GanttFormat::Ascii => render_ascii(trace, &Rational::one()),
        GanttFormat::Svg => render_svg(trace),
    }
}

/// Processing names mapped to distinct single-character labels.
fn labels(trace: &ScheduleTrace) -> BTreeMap<&str, char> {
    let mut out = BTreeMap::new();
    let mut used = Vec::new();
    for s in &trace.segments {
        if out.contains_key(s.processing.as_str()) {
            continue;
        }
        let c = s
            .processing
            .chars()
            .filter(|c| c.is_alphanumeric())
            .flat_map(|c| [c.to_ascii_uppercase(), c.to_ascii_lowercase()])
            .chain("0123456789".chars())
            .find(|c| !used.contains(c))
            .unwrap_or('#');
        used.push(c);
        out.insert(s.processing.as_str(), c);
    }
    out
}

/// One text row per thread, one column per `quantum` of time showing the
/// processing running at the middle of the cell. `!` marks a deadline miss.
pub fn render_ascii(trace: &ScheduleTrace, quantum: &Rational) -> String {
    let labels = labels(trace);
    let cells = if quantum.signum() > 0 {
        (&trace.horizon / quantum)
            .floor()
            .to_i64()
            .unwrap_or(0)
            .max(0) as usize
    } else {
        0
    };
    let width = trace
        .threads
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(0)
        .max(4);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:width$} | time 0..{} step {}",
        "", trace.horizon, quantum
    );
    let mut ruler = String::new();
    for c in 0..cells {
        ruler.push(if c % 10 == 0 { '|' } else { ' ' });
    }
    let _ = writeln!(out, "{:width$} | {}", "", ruler.trim_end());
    for name in &trace.threads {
        let mut row = vec!['.'; cells];
        for s in trace.segments.iter().filter(|s| &s.thread == name) {
            for (c, cell) in row.iter_mut().enumerate() {
                let mid = quantum * &(&Rational::from(c as i64) + &Rational::from_frac(1, 2));
                if s.start <= mid && mid < s.end {
                    *cell = labels[s.processing.as_str()];
                }
            }
        }
        for m in trace.misses.iter().filter(|m| &m.thread == name) {
            let c = (&m.deadline / quantum).floor().to_i64().unwrap_or(0);
            if let Some(cell) = usize::try_from(c)
                .ok()
                .and_then(|c| row.get_mut(c.min(cells.saturating_sub(1))))
            {
                *cell = '!';
            }
        }
        let _ = writeln!(
            out,
            "{:width$} | {}",
            name,
            row.into_iter().collect::<String>()
        );
    }
    if !labels.is_empty() {
        let legend: Vec<String> = labels.iter().map(|(p, c)| format!("{c}={p}")).collect();
        let _ = writeln!(out, "legend: {}", legend.join(" "));
    }
    for (r, instances) in &trace.latencies {
        if let Some(w) = instances.iter().max_by(|a, b| a.latency.cmp(&b.latency)) {
            let _ = writeln!(
                out,
                "{r}: worst latency {} (from {} to {})",
                w.latency, w.start, w.end
            );
        }
    }
    out
}

const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#9c755f",
];
const ROW: f64 = 28.0;
const LEFT: f64 = 60.0;
const SCALE: f64 = 10.0;

pub fn render_svg(trace: &ScheduleTrace) -> String {
    let colors: BTreeMap<&str, &str> = labels(trace)
        .keys()
        .enumerate()
        .map(|(i, p)| (*p, PALETTE[i % PALETTE.len()]))
        .collect();
    let span = trace.horizon.to_f64().max(0.0);
    let width = LEFT + span * SCALE + 20.0;
    let height = 40.0 + ROW * trace.threads.len() as f64 + 20.0 * trace.latencies.len() as f64;
    let x = |t: &Rational| LEFT + t.to_f64() * SCALE;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" font-family="monospace" font-size="10">"#
    );
    let _ = writeln!(
        out,
        r#"<text x="4" y="14">schedule 0..{}</text>"#,
        trace.horizon
    );
    let mut tick = 0i64;
    while (tick as f64) <= span {
        let tx = LEFT + tick as f64 * SCALE;
        let _ = writeln!(
            out,
            r##"<line x1="{tx:.1}" y1="20" x2="{tx:.1}" y2="{:.1}" stroke="#ddd"/>"##,
            24.0 + ROW * trace.threads.len() as f64
        );
        let _ = writeln!(out, r#"<text x="{tx:.1}" y="18">{tick}</text>"#);
        tick += 10;
    }
    for (i, name) in trace.threads.iter().enumerate() {
        let y = 24.0 + ROW * i as f64;
        let _ = writeln!(out, r#"<text x="4" y="{:.1}">{name}</text>"#, y + 16.0);
        for s in trace.segments.iter().filter(|s| &s.thread == name) {
            let (x0, x1) = (x(&s.start), x(&s.end));
            let _ = writeln!(
                out,
                r##"<rect x="{x0:.1}" y="{:.1}" width="{:.1}" height="20" fill="{}" stroke="#333"><title>{} {}..{}</title></rect>"##,
                y + 2.0,
                x1 - x0,
                colors[s.processing.as_str()],
                s.processing,
                s.start,
                s.end
            );
        }
        for m in trace.misses.iter().filter(|m| &m.thread == name) {
            let mx = x(&m.deadline);
            let _ = writeln!(
                out,
                r#"<line x1="{mx:.1}" y1="{y:.1}" x2="{mx:.1}" y2="{:.1}" stroke="red" stroke-width="2"/>"#,
                y + ROW
            );
        }
    }
    let mut y = 44.0 + ROW * trace.threads.len() as f64;
    for (r, instances) in &trace.latencies {
        if let Some(w) = instances.iter().max_by(|a, b| a.latency.cmp(&b.latency)) {
            let _ = writeln!(
                out,
                r#"<text x="4" y="{y:.1}">{r}: worst latency {} ({}..{})</text>"#,
                w.latency, w.start, w.end
            );
            y += 20.0;
        }
    }
    out.push_str("</svg>\n");
    out
}
