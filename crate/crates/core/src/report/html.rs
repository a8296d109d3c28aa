//! Self-contained HTML rendering of a report with inline SVG charts.

use std::fmt::Write as _;

use super::{Block, ReportDocument};
use crate::chart::scene::escape_xml;

const STYLE: &str = "body{font-family:Helvetica,Arial,sans-serif;margin:2em;color:#111}\
h1{font-size:1.6em}h2{font-size:1.25em;border-bottom:1px solid #999;margin-top:1.6em}\
table{border-collapse:collapse;margin:.5em 0}td,th{border:1px solid #ccc;padding:2px 8px;text-align:left}\
th{background:#f0f0f0}.chart svg{max-width:100%;height:auto}.note{color:#555}";

pub fn export_html(doc: &ReportDocument) -> String {
    let meta = &doc.metadata;
    let mut out = String::with_capacity(64 * 1024);
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    let _ = writeln!(out, "<title>Hearing test report {}</title>", escape_xml(&meta.key.to_string()));
    let _ = writeln!(out, "<style>{STYLE}</style>\n</head>\n<body>");
    out.push_str("<h1>Hearing Test Report</h1>\n");
    let _ = writeln!(
        out,
        "<p>Patient: {}<br>Patient ID: {} &#160; Exam date: {}<br>Generated: {}</p>",
        escape_xml(&meta.patient_name),
        escape_xml(&meta.key.patient_id),
        meta.key.exam_date.format("%Y-%m-%d"),
        meta.generated_at.format("%Y-%m-%d %H:%M:%S UTC")
    );
    for section in &doc.sections {
        let _ = writeln!(out, "<section>\n<h2>{}</h2>", escape_xml(&section.title));
        for block in &section.blocks {
            match block {
                Block::KeyValue { caption, rows } => {
                    out.push_str("<table>\n");
                    if let Some(c) = caption {
                        let _ = writeln!(out, "<caption>{}</caption>", escape_xml(c));
                    }
                    for (k, v) in rows {
                        let _ = writeln!(out, "<tr><th>{}</th><td>{}</td></tr>", escape_xml(k), escape_xml(v));
                    }
                    out.push_str("</table>\n");
                }
                Block::Table { caption, header, rows } => {
                    out.push_str("<table>\n");
                    if let Some(c) = caption {
                        let _ = writeln!(out, "<caption>{}</caption>", escape_xml(c));
                    }
                    out.push_str("<tr>");
                    for h in header {
                        let _ = write!(out, "<th>{}</th>", escape_xml(h));
                    }
                    out.push_str("</tr>\n");
                    for r in rows {
                        out.push_str("<tr>");
                        for cell in r {
                            let _ = write!(out, "<td>{}</td>", escape_xml(cell));
                        }
                        out.push_str("</tr>\n");
                    }
                    out.push_str("</table>\n");
                }
                Block::Chart(chart) => {
                    let svg = chart.svg.split_once("?>\n").map_or(chart.svg.as_str(), |(_, rest)| rest);
                    let _ = write!(out, "<div class=\"chart\" data-kind=\"{}\">\n{}</div>\n", chart.kind.slug(), svg);
                }
                Block::Text(t) => {
                    let _ = writeln!(out, "<p class=\"note\">{}</p>", escape_xml(t));
                }
            }
        }
        out.push_str("</section>\n");
    }
    if !doc.not_tested.is_empty() {
        let _ = writeln!(out, "<p class=\"note\">Not tested: {}</p>", escape_xml(&doc.not_tested.join(", ")));
    }
    out.push_str("</body>\n</html>\n");
    out
}
