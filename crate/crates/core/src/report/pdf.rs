//! Minimal PDF 1.7 writer for reports.
//!
//! Output uses the standard Helvetica faces with WinAnsiEncoding and
//! uncompressed content streams, so the text layer is directly searchable.
//! Charts are replayed from their vector scene as path operators. Given the
//! same document the bytes are identical: the only time-dependent value is
//! the report's own generation timestamp.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::fonts::{text_width, win_ansi, wrap};
use super::{Block, ReportDocument};
use crate::chart::scene::{num, Anchor, Color, Node, Scene, Shape, Style};
use crate::chart::ChartDocument;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PageSize {
    #[default]
    A4,
    Letter,
}

impl PageSize {
    /// Width and height in points.
    pub fn dimensions(self) -> (f64, f64) {
        match self {
            PageSize::A4 => (595.28, 841.89),
            PageSize::Letter => (612.0, 792.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PdfOptions {
    pub page_size: PageSize,
}

const MARGIN: f64 = 50.0;
const FOOTER: f64 = 30.0;
const BODY_SIZE: f64 = 9.0;
const LINE: f64 = 13.0;
const LABEL_COLUMN: f64 = 200.0;

/// Encodes `text` as a PDF literal string.
fn pdf_string(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('(');
    for c in text.chars() {
        match win_ansi(c) {
            b'(' => out.push_str("\\("),
            b')' => out.push_str("\\)"),
            b'\\' => out.push_str("\\\\"),
            b @ 32..=126 => out.push(b as char),
            b => {
                let _ = write!(out, "\\{b:03o}");
            }
        }
    }
    out.push(')');
    out
}

fn rgb(c: Color) -> String {
    let (r, g, b) = c.rgb();
    format!(
        "{} {} {}",
        num(f64::from(r) / 255.0),
        num(f64::from(g) / 255.0),
        num(f64::from(b) / 255.0)
    )
}

struct Layout {
    width: f64,
    height: f64,
    pages: Vec<String>,
    ops: String,
    /// Distance of the cursor from the top edge.
    y: f64,
}

impl Layout {
    fn new(options: &PdfOptions) -> Self {
        let (width, height) = options.page_size.dimensions();
        Self { width, height, pages: Vec::new(), ops: String::new(), y: MARGIN }
    }

    fn content_width(&self) -> f64 {
        self.width - 2.0 * MARGIN
    }

    fn new_page(&mut self) {
        self.pages.push(std::mem::take(&mut self.ops));
        self.y = MARGIN;
    }

    fn ensure(&mut self, needed: f64) {
        if self.y + needed > self.height - MARGIN - FOOTER && self.y > MARGIN {
            self.new_page();
        }
    }

    fn text_at(&mut self, x: f64, y_top: f64, text: &str, size: f64, bold: bool, color: Color) {
        let font = if bold { "F2" } else { "F1" };
        let _ = writeln!(
            self.ops,
            "BT /{font} {} Tf {} rg 1 0 0 1 {} {} Tm {} Tj ET",
            num(size),
            rgb(color),
            num(x),
            num(self.height - y_top),
            pdf_string(text)
        );
    }

    /// Writes a line at the cursor and advances it.
    fn line(&mut self, text: &str, size: f64, bold: bool) {
        self.ensure(size + 4.0);
        self.y += size;
        self.text_at(MARGIN, self.y, text, size, bold, Color::Black);
        self.y += 4.0;
    }

    fn rule(&mut self) {
        let y = self.height - self.y;
        let _ = writeln!(
            self.ops,
            "0.5 w 0.5 0.5 0.5 RG {} {} m {} {} l S",
            num(MARGIN),
            num(y),
            num(self.width - MARGIN),
            num(y)
        );
    }

    fn paragraph(&mut self, text: &str) {
        for l in wrap(text, BODY_SIZE, false, self.content_width()) {
            self.ensure(LINE);
            self.y += LINE;
            self.text_at(MARGIN, self.y - 3.0, &l, BODY_SIZE, false, Color::Black);
        }
    }

    fn key_values(&mut self, caption: Option<&str>, rows: &[(String, String)]) {
        if let Some(c) = caption {
            self.ensure(2.0 * LINE);
            self.line(c, 10.0, true);
        }
        let value_width = self.content_width() - LABEL_COLUMN;
        for (label, value) in rows {
            let lines = wrap(value, BODY_SIZE, false, value_width);
            self.ensure(LINE * lines.len().max(1) as f64);
            self.y += LINE;
            self.text_at(MARGIN, self.y - 3.0, label, BODY_SIZE, true, Color::Black);
            for (i, l) in lines.iter().enumerate() {
                if i > 0 {
                    self.y += LINE;
                }
                self.text_at(MARGIN + LABEL_COLUMN, self.y - 3.0, l, BODY_SIZE, false, Color::Black);
            }
        }
        self.y += 6.0;
    }

    fn table(&mut self, caption: Option<&str>, header: &[String], rows: &[Vec<String>]) {
        let size = if header.len() > 6 { 7.5 } else { BODY_SIZE };
        let columns = header.len().max(rows.iter().map(Vec::len).max().unwrap_or(0));
        let mut widths = vec![0.0f64; columns];
        for (i, h) in header.iter().enumerate() {
            widths[i] = widths[i].max(text_width(h, size, true) + 8.0);
        }
        for r in rows {
            for (i, cell) in r.iter().enumerate() {
                widths[i] = widths[i].max(text_width(cell, size, false) + 8.0);
            }
        }
        let total: f64 = widths.iter().sum();
        if total > self.content_width() {
            let k = self.content_width() / total;
            widths.iter_mut().for_each(|w| *w *= k);
        }

        if let Some(c) = caption {
            self.ensure(3.0 * LINE);
            self.line(c, 10.0, true);
        }
        let draw_header = |layout: &mut Layout| {
            layout.y += LINE;
            let mut x = MARGIN;
            for (i, h) in header.iter().enumerate() {
                layout.text_at(x, layout.y - 3.0, h, size, true, Color::Black);
                x += widths[i];
            }
            layout.y += 2.0;
            layout.rule();
        };
        self.ensure(2.0 * LINE);
        draw_header(self);
        for r in rows {
            if self.y + LINE > self.height - MARGIN - FOOTER {
                self.new_page();
                draw_header(self);
            }
            self.y += LINE;
            let mut x = MARGIN;
            for (i, cell) in r.iter().enumerate() {
                self.text_at(x, self.y - 3.0, cell, size, false, Color::Black);
                x += widths[i];
            }
        }
        self.y += 8.0;
    }

    fn chart(&mut self, chart: &ChartDocument) {
        let max_height = (self.height - 2.0 * MARGIN - FOOTER) * 0.55;
        let scale = (self.content_width() / chart.scene.width).min(max_height / chart.scene.height);
        let h = chart.scene.height * scale;
        self.ensure(h + 10.0);
        let x0 = MARGIN + (self.content_width() - chart.scene.width * scale) / 2.0;
        let top = self.height - self.y;
        let _ = writeln!(
            self.ops,
            "q {} 0 0 {} {} {} cm 1 J 1 j",
            num(scale),
            num(-scale),
            num(x0),
            num(top)
        );
        draw_scene(&mut self.ops, &chart.scene);
        self.ops.push_str("Q\n");
        self.y += h + 10.0;
    }

    fn finish(mut self) -> Vec<String> {
        if !self.ops.is_empty() || self.pages.is_empty() {
            self.new_page();
        }
        self.pages
    }
}

fn path_points(ops: &mut String, points: &[(f64, f64)]) {
    for (i, (x, y)) in points.iter().enumerate() {
        let op = if i == 0 { "m" } else { "l" };
        let _ = write!(ops, "{} {} {op} ", num(*x), num(*y));
    }
}

fn paint(style: &Style, closed: bool) -> &'static str {
    match (style.fill.is_some(), style.stroke.is_some()) {
        (true, true) => "B",
        (true, false) => "f",
        (false, true) if closed => "s",
        (false, true) => "S",
        (false, false) => "n",
    }
}

fn draw_node(ops: &mut String, node: &Node) {
    match node {
        Node::Group { children, .. } => children.iter().for_each(|c| draw_node(ops, c)),
        Node::Shape { shape, style } => {
            if let Shape::Text { x, y, text, size, anchor, bold } = shape {
                let width = text_width(text, *size, *bold);
                let x = match anchor {
                    Anchor::Start => *x,
                    Anchor::Middle => x - width / 2.0,
                    Anchor::End => x - width,
                };
                let font = if *bold { "F2" } else { "F1" };
                let _ = writeln!(
                    ops,
                    "BT /{font} {} Tf {} rg 1 0 0 -1 {} {} Tm {} Tj ET",
                    num(*size),
                    rgb(style.fill.unwrap_or(Color::Black)),
                    num(x),
                    num(*y),
                    pdf_string(text)
                );
                return;
            }
            if let Some(c) = style.stroke {
                let pattern: Vec<String> = style.dash.pattern().iter().map(|v| num(*v)).collect();
                let _ = write!(ops, "{} RG {} w [{}] 0 d ", rgb(c), num(style.width), pattern.join(" "));
            }
            if let Some(c) = style.fill {
                let _ = write!(ops, "{} rg ", rgb(c));
            }
            let closed = match shape {
                Shape::Line { x1, y1, x2, y2 } => {
                    path_points(ops, &[(*x1, *y1), (*x2, *y2)]);
                    false
                }
                Shape::Polyline { points } => {
                    path_points(ops, points);
                    false
                }
                Shape::Polygon { points } => {
                    path_points(ops, points);
                    true
                }
                Shape::Rect { x, y, width, height } => {
                    let _ = write!(ops, "{} {} {} {} re ", num(*x), num(*y), num(*width), num(*height));
                    true
                }
                Shape::Circle { cx, cy, r } => {
                    let k = 0.5523 * r;
                    let _ = write!(
                        ops,
                        "{} {} m {} {} {} {} {} {} c {} {} {} {} {} {} c {} {} {} {} {} {} c {} {} {} {} {} {} c ",
                        num(cx + r), num(*cy),
                        num(cx + r), num(cy + k), num(cx + k), num(cy + r), num(*cx), num(cy + r),
                        num(cx - k), num(cy + r), num(cx - r), num(cy + k), num(cx - r), num(*cy),
                        num(cx - r), num(cy - k), num(cx - k), num(cy - r), num(*cx), num(cy - r),
                        num(cx + k), num(cy - r), num(cx + r), num(cy - k), num(cx + r), num(*cy),
                    );
                    true
                }
                Shape::Text { .. } => unreachable!("handled above"),
            };
            let op = paint(style, closed);
            let op = if closed && op != "s" && op != "n" { format!("h {op}") } else { op.to_string() };
            let _ = writeln!(ops, "{op}");
        }
    }
}

fn draw_scene(ops: &mut String, scene: &Scene) {
    for node in &scene.nodes {
        draw_node(ops, node);
    }
}

fn layout(doc: &ReportDocument, options: &PdfOptions) -> Vec<String> {
    let mut l = Layout::new(options);
    l.line("Hearing Test Report", 18.0, true);
    l.y += 4.0;
    let meta = &doc.metadata;
    l.line(&format!("Patient: {}", meta.patient_name), 10.0, false);
    l.line(
        &format!(
            "Patient ID: {}    Exam date: {}",
            meta.key.patient_id,
            meta.key.exam_date.format("%Y-%m-%d")
        ),
        10.0,
        false,
    );
    l.line(
        &format!("Generated: {}", meta.generated_at.format("%Y-%m-%d %H:%M:%S UTC")),
        10.0,
        false,
    );
    l.y += 4.0;
    l.rule();
    l.y += 8.0;

    for section in &doc.sections {
        l.ensure(60.0);
        l.line(&section.title, 14.0, true);
        l.y += 4.0;
        for block in &section.blocks {
            match block {
                Block::KeyValue { caption, rows } => l.key_values(caption.as_deref(), rows),
                Block::Table { caption, header, rows } => l.table(caption.as_deref(), header, rows),
                Block::Chart(c) => l.chart(c),
                Block::Text(t) => {
                    l.paragraph(t);
                    l.y += 4.0;
                }
            }
        }
        l.y += 8.0;
    }
    if !doc.not_tested.is_empty() {
        l.ensure(2.0 * LINE);
        l.paragraph(&format!("Not tested: {}", doc.not_tested.join(", ")));
    }
    l.finish()
}

/// Renders `doc` as a PDF file.
pub fn export_pdf(doc: &ReportDocument, options: &PdfOptions) -> Vec<u8> {
    let (width, height) = options.page_size.dimensions();
    let mut pages = layout(doc, options);
    let total = pages.len();
    for (i, ops) in pages.iter_mut().enumerate() {
        let footer = format!("Page {} of {}", i + 1, total);
        let w = text_width(&footer, 8.0, false);
        let _ = writeln!(
            ops,
            "BT /F1 8 Tf 0.5 0.5 0.5 rg 1 0 0 1 {} {} Tm {} Tj ET",
            num((width - w) / 2.0),
            num(MARGIN / 2.0),
            pdf_string(&footer)
        );
        let _ = writeln!(
            ops,
            "BT /F1 8 Tf 0.5 0.5 0.5 rg 1 0 0 1 {} {} Tm {} Tj ET",
            num(MARGIN),
            num(MARGIN / 2.0),
            pdf_string(&doc.metadata.key.to_string())
        );
    }

    let mut objects: Vec<String> = Vec::new();
    let page_ids: Vec<usize> = (0..total).map(|i| 6 + 2 * i).collect();
    objects.push("<< /Type /Catalog /Pages 2 0 R >>".into());
    objects.push(format!(
        "<< /Type /Pages /Kids [{}] /Count {} >>",
        page_ids.iter().map(|id| format!("{id} 0 R")).collect::<Vec<_>>().join(" "),
        total
    ));
    objects.push("<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica /Encoding /WinAnsiEncoding >>".into());
    objects.push("<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica-Bold /Encoding /WinAnsiEncoding >>".into());
    let date = doc.metadata.generated_at.format("D:%Y%m%d%H%M%SZ").to_string();
    objects.push(format!(
        "<< /Title {} /Producer (audiology-core) /CreationDate {} >>",
        pdf_string(&format!("Hearing test report {}", doc.metadata.key)),
        pdf_string(&date)
    ));
    for (i, ops) in pages.iter().enumerate() {
        objects.push(format!(
            "<< /Type /Page /Parent 2 0 R /MediaBox [0 0 {} {}] /Resources << /Font << /F1 3 0 R /F2 4 0 R >> >> /Contents {} 0 R >>",
            num(width),
            num(height),
            page_ids[i] + 1
        ));
        objects.push(format!("<< /Length {} >>\nstream\n{}endstream", ops.len(), ops));
    }

    let mut out: Vec<u8> = Vec::new();
    out.extend_from_slice(b"%PDF-1.7\n%\xE2\xE3\xCF\xD3\n");
    let mut offsets = Vec::with_capacity(objects.len());
    for (i, body) in objects.iter().enumerate() {
        offsets.push(out.len());
        out.extend_from_slice(format!("{} 0 obj\n{}\nendobj\n", i + 1, body).as_bytes());
    }
    let xref = out.len();
    let mut tail = format!("xref\n0 {}\n0000000000 65535 f \n", objects.len() + 1);
    for off in offsets {
        let _ = writeln!(tail, "{off:010} 00000 n ");
    }
    let _ = write!(
        tail,
        "trailer\n<< /Size {} /Root 1 0 R /Info 5 0 R >>\nstartxref\n{}\n%%EOF\n",
        objects.len() + 1,
        xref
    );
    out.extend_from_slice(tail.as_bytes());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn string_escaping() {
        assert_eq!(pdf_string("a(b)c\\"), "(a\\(b\\)c\\\\)");
        assert_eq!(pdf_string("-10\u{00B0}"), "(-10\\260)");
        assert_eq!(pdf_string("\u{2212}5"), "(-5)");
    }
}
