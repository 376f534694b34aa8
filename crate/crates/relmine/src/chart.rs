//! Standalone SVG bar chart for a grouped relevance ranking. Output is a
//! pure function of the report, so rendered bytes are stable across runs.

use crate::relevance::GroupedReport;

const WIDTH: f64 = 900.0;
const LABEL_W: f64 = 280.0;
const VALUE_W: f64 = 70.0;
const BAR_H: f64 = 18.0;
const ROW_H: f64 = 24.0;
const HEADER_H: f64 = 30.0;
const TOP: f64 = 46.0;
const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#9c755f",
];

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

/// Horizontal bars, one per ranked attribute, grouped under category
/// headings. Bars below the threshold render hollow; a dashed rule marks the
/// threshold itself. Inflated entries are flagged in their label.
pub fn relevance_bar_chart(report: &GroupedReport) -> String {
    let rows = report.entry_count();
    let height = TOP
        + report.groups.len() as f64 * HEADER_H
        + rows as f64 * ROW_H
        + 20.0;
    let max_rel = report
        .groups
        .iter()
        .flat_map(|g| g.entries.iter())
        .map(|e| e.relevance)
        .fold(report.threshold, f64::max)
        .max(1e-9);
    let bar_span = WIDTH - LABEL_W - VALUE_W - 20.0;
    let x_of = |v: f64| LABEL_W + bar_span * (v / max_rel);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {WIDTH} {height:.0}\" font-family=\"sans-serif\">\n"
    ));
    svg.push_str(&format!(
        "  <rect width=\"{WIDTH}\" height=\"{height:.0}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"16\" y=\"26\" font-size=\"16\" fill=\"#222\">Attribute relevance \
         (threshold {:.2})</text>\n",
        report.threshold
    ));

    let mut y = TOP;
    for (gi, group) in report.groups.iter().enumerate() {
        let color = PALETTE[gi % PALETTE.len()];
        let label = if group.category.is_empty() {
            "(uncategorized)"
        } else {
            group.category.as_str()
        };
        svg.push_str(&format!(
            "  <text x=\"16\" y=\"{:.1}\" font-size=\"13\" font-weight=\"bold\" \
             fill=\"{color}\">{}</text>\n",
            y + 18.0,
            esc(label)
        ));
        y += HEADER_H;
        for entry in &group.entries {
            let bar_w = (x_of(entry.relevance) - LABEL_W).max(0.0);
            let fill = if entry.above_threshold { color } else { "none" };
            let mid = y + BAR_H / 2.0 + 4.0;
            let mut name = format!("{}. {}", entry.rank, entry.attribute);
            if entry.inflated {
                name.push_str(" [inflated]");
            }
            svg.push_str(&format!(
                "  <text x=\"{:.1}\" y=\"{mid:.1}\" font-size=\"12\" text-anchor=\"end\" \
                 fill=\"#222\">{}</text>\n",
                LABEL_W - 8.0,
                esc(&name)
            ));
            svg.push_str(&format!(
                "  <rect x=\"{LABEL_W}\" y=\"{y:.1}\" width=\"{bar_w:.1}\" height=\"{BAR_H}\" \
                 fill=\"{fill}\" stroke=\"{color}\"/>\n"
            ));
            svg.push_str(&format!(
                "  <text x=\"{:.1}\" y=\"{mid:.1}\" font-size=\"12\" fill=\"#222\">{:.2}</text>\n",
                x_of(entry.relevance) + 6.0,
                entry.relevance
            ));
            y += ROW_H;
        }
    }

    let tx = x_of(report.threshold);
    svg.push_str(&format!(
        "  <line x1=\"{tx:.1}\" y1=\"{:.1}\" x2=\"{tx:.1}\" y2=\"{y:.1}\" stroke=\"#888\" \
         stroke-dasharray=\"4,3\"/>\n",
        TOP - 6.0
    ));
    svg.push_str("</svg>\n");
    svg
}
