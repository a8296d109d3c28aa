//! Backend-neutral vector primitives shared by the SVG and PDF writers.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Color {
    Red,
    Blue,
    Black,
    Gray,
    LightGray,
    White,
    Pink,
    LightBlue,
}

impl Color {
    pub fn css(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Blue => "blue",
            Color::Black => "black",
            Color::Gray => "gray",
            Color::LightGray => "lightgray",
            Color::White => "white",
            Color::Pink => "pink",
            Color::LightBlue => "lightblue",
        }
    }

    /// Components in `0..=255`, matching the CSS named colors.
    pub fn rgb(self) -> (u8, u8, u8) {
        match self {
            Color::Red => (255, 0, 0),
            Color::Blue => (0, 0, 255),
            Color::Black => (0, 0, 0),
            Color::Gray => (128, 128, 128),
            Color::LightGray => (211, 211, 211),
            Color::White => (255, 255, 255),
            Color::Pink => (255, 192, 203),
            Color::LightBlue => (173, 216, 230),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dash {
    Solid,
    Dashed,
    Dotted,
}

impl Dash {
    /// Dash pattern in user units, empty for solid lines.
    pub fn pattern(self) -> &'static [f64] {
        match self {
            Dash::Solid => &[],
            Dash::Dashed => &[6.0, 4.0],
            Dash::Dotted => &[2.0, 3.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    Start,
    Middle,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Style {
    pub stroke: Option<Color>,
    pub fill: Option<Color>,
    pub width: f64,
    pub dash: Dash,
}

impl Style {
    pub fn stroke(color: Color, width: f64) -> Self {
        Self {
            stroke: Some(color),
            fill: None,
            width,
            dash: Dash::Solid,
        }
    }

    pub fn fill(color: Color) -> Self {
        Self {
            stroke: None,
            fill: Some(color),
            width: 0.0,
            dash: Dash::Solid,
        }
    }

    pub fn dashed(mut self, dash: Dash) -> Self {
        self.dash = dash;
        self
    }

    pub fn with_fill(mut self, color: Color) -> Self {
        self.fill = Some(color);
        self
    }

    pub fn with_stroke(mut self, color: Color) -> Self {
        self.stroke = Some(color);
        if self.width <= 0.0 {
            self.width = 1.0;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Line { x1: f64, y1: f64, x2: f64, y2: f64 },
    Polyline { points: Vec<(f64, f64)> },
    Polygon { points: Vec<(f64, f64)> },
    Rect { x: f64, y: f64, width: f64, height: f64 },
    Circle { cx: f64, cy: f64, r: f64 },
    Text { x: f64, y: f64, text: String, size: f64, anchor: Anchor, bold: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Shape { shape: Shape, style: Style },
    /// Grouping with SVG attributes; drawing backends other than SVG ignore them.
    Group { attrs: Vec<(String, String)>, children: Vec<Node> },
}

impl Node {
    pub fn shape(shape: Shape, style: Style) -> Self {
        Node::Shape { shape, style }
    }

    pub fn line(x1: f64, y1: f64, x2: f64, y2: f64, style: Style) -> Self {
        Node::shape(Shape::Line { x1, y1, x2, y2 }, style)
    }

    pub fn text(x: f64, y: f64, text: impl Into<String>, size: f64, anchor: Anchor, color: Color) -> Self {
        Node::shape(
            Shape::Text { x, y, text: text.into(), size, anchor, bold: false },
            Style::fill(color),
        )
    }

    pub fn bold_text(x: f64, y: f64, text: impl Into<String>, size: f64, anchor: Anchor) -> Self {
        Node::shape(
            Shape::Text { x, y, text: text.into(), size, anchor, bold: true },
            Style::fill(Color::Black),
        )
    }

    pub fn group(attrs: &[(&str, &str)], children: Vec<Node>) -> Self {
        Node::Group {
            attrs: attrs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            children,
        }
    }
}

/// A fixed-size drawing in screen coordinates (y grows downwards).
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub width: f64,
    pub height: f64,
    pub nodes: Vec<Node>,
}

impl Scene {
    pub fn new(width: f64, height: f64) -> Self {
        let background = Node::shape(
            Shape::Rect { x: 0.0, y: 0.0, width, height },
            Style::fill(Color::White),
        );
        Self { width, height, nodes: vec![background] }
    }

    pub fn push(&mut self, node: Node) {
        self.nodes.push(node);
    }

    pub fn extend(&mut self, nodes: impl IntoIterator<Item = Node>) {
        self.nodes.extend(nodes);
    }

    /// Standalone SVG 1.1 document.
    pub fn to_svg(&self) -> String {
        let mut out = String::with_capacity(16 * 1024);
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"Helvetica, Arial, sans-serif\">",
            w = num(self.width),
            h = num(self.height),
        );
        for node in &self.nodes {
            write_node(&mut out, node, 1);
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Fixed two-decimal formatting without negative zero.
pub(crate) fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    let trimmed = s.trim_end_matches('0').trim_end_matches('.');
    if trimmed == "-0" {
        "0".to_string()
    } else {
        trimmed.to_string()
    }
}

pub(crate) fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn style_attrs(style: &Style) -> String {
    let mut s = String::new();
    match style.fill {
        Some(c) => {
            let _ = write!(s, " fill=\"{}\"", c.css());
        }
        None => s.push_str(" fill=\"none\""),
    }
    if let Some(c) = style.stroke {
        let _ = write!(s, " stroke=\"{}\" stroke-width=\"{}\"", c.css(), num(style.width));
        let pattern = style.dash.pattern();
        if !pattern.is_empty() {
            let parts: Vec<_> = pattern.iter().map(|v| num(*v)).collect();
            let _ = write!(s, " stroke-dasharray=\"{}\"", parts.join(","));
        }
    }
    s
}

fn points_attr(points: &[(f64, f64)]) -> String {
    points
        .iter()
        .map(|(x, y)| format!("{},{}", num(*x), num(*y)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn write_node(out: &mut String, node: &Node, depth: usize) {
    let indent = "  ".repeat(depth);
    match node {
        Node::Group { attrs, children } => {
            out.push_str(&indent);
            out.push_str("<g");
            for (k, v) in attrs {
                let _ = write!(out, " {}=\"{}\"", k, escape_xml(v));
            }
            out.push_str(">\n");
            for child in children {
                write_node(out, child, depth + 1);
            }
            out.push_str(&indent);
            out.push_str("</g>\n");
        }
        Node::Shape { shape, style } => {
            out.push_str(&indent);
            let st = style_attrs(style);
            let _ = match shape {
                Shape::Line { x1, y1, x2, y2 } => writeln!(
                    out,
                    "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"{st}/>",
                    num(*x1),
                    num(*y1),
                    num(*x2),
                    num(*y2)
                ),
                Shape::Polyline { points } => {
                    writeln!(out, "<polyline points=\"{}\"{st}/>", points_attr(points))
                }
                Shape::Polygon { points } => {
                    writeln!(out, "<polygon points=\"{}\"{st}/>", points_attr(points))
                }
                Shape::Rect { x, y, width, height } => writeln!(
                    out,
                    "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"{st}/>",
                    num(*x),
                    num(*y),
                    num(*width),
                    num(*height)
                ),
                Shape::Circle { cx, cy, r } => writeln!(
                    out,
                    "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"{st}/>",
                    num(*cx),
                    num(*cy),
                    num(*r)
                ),
                Shape::Text { x, y, text, size, anchor, bold } => {
                    let anchor = match anchor {
                        Anchor::Start => "start",
                        Anchor::Middle => "middle",
                        Anchor::End => "end",
                    };
                    let weight = if *bold { " font-weight=\"bold\"" } else { "" };
                    writeln!(
                        out,
                        "<text x=\"{}\" y=\"{}\" font-size=\"{}\" text-anchor=\"{anchor}\"{weight}{st}>{}</text>",
                        num(*x),
                        num(*y),
                        num(*size),
                        escape_xml(text)
                    )
                }
            };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_are_compact_and_signless_at_zero() {
        assert_eq!(num(1.0), "1");
        assert_eq!(num(1.25), "1.25");
        assert_eq!(num(-0.001), "0");
        assert_eq!(num(116.666666), "116.67");
        assert_eq!(num(-3.5), "-3.5");
    }

    #[test]
    fn text_is_escaped() {
        let mut scene = Scene::new(10.0, 10.0);
        scene.push(Node::text(1.0, 2.0, "a<b & \"c\"", 8.0, Anchor::Start, Color::Black));
        let svg = scene.to_svg();
        assert!(svg.contains("a&lt;b &amp; &quot;c&quot;"));
    }
}
