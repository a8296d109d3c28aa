//! Audiogram symbol conventions (ANSI S3.6-1996 style).
//!
//! | subtest              | right ear        | left ear         | line   |
//! |----------------------|------------------|------------------|--------|
//! | AC unmasked          | red circle       | blue X           | solid  |
//! | AC masked            | red triangle     | blue square      | solid  |
//! | BC unmasked          | red `<`          | blue `>`         | dashed |
//! | BC masked            | red `[`          | blue `]`         | dashed |
//! | AC aided             | red `A`          | blue `A`         | solid  |
//! | sound field          | red `S`          | blue `S`         | dotted |
//! | loudness discomfort  | red `L`          | blue `U`         | dotted |
//!
//! This table is the only place the mapping is defined; the audiogram
//! renderer and its inventory both read it.

use serde::{Deserialize, Serialize};

use super::scene::{Anchor, Color, Dash, Node, Shape, Style};
use super::ear_color;
use crate::model::{Ear, PureToneCategory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolKind {
    Circle,
    Cross,
    Triangle,
    Square,
    ChevronLeft,
    ChevronRight,
    BracketLeft,
    BracketRight,
    LetterA,
    LetterS,
    LetterL,
    LetterU,
    Dot,
    Bar,
    Rung,
}

impl SymbolKind {
    pub fn slug(self) -> &'static str {
        match self {
            SymbolKind::Circle => "circle",
            SymbolKind::Cross => "cross",
            SymbolKind::Triangle => "triangle",
            SymbolKind::Square => "square",
            SymbolKind::ChevronLeft => "chevron_left",
            SymbolKind::ChevronRight => "chevron_right",
            SymbolKind::BracketLeft => "bracket_left",
            SymbolKind::BracketRight => "bracket_right",
            SymbolKind::LetterA => "letter_a",
            SymbolKind::LetterS => "letter_s",
            SymbolKind::LetterL => "letter_l",
            SymbolKind::LetterU => "letter_u",
            SymbolKind::Dot => "dot",
            SymbolKind::Bar => "bar",
            SymbolKind::Rung => "rung",
        }
    }
}

/// Symbol, color and connecting line for one audiogram series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AudiogramStyle {
    pub symbol: SymbolKind,
    pub color: Color,
    pub line: Dash,
}

pub fn audiogram_style(category: PureToneCategory, ear: Ear) -> AudiogramStyle {
    use PureToneCategory::*;
    let right = ear == Ear::Right;
    let (symbol, line) = match category {
        AcUnmasked => (if right { SymbolKind::Circle } else { SymbolKind::Cross }, Dash::Solid),
        AcMasked => (if right { SymbolKind::Triangle } else { SymbolKind::Square }, Dash::Solid),
        BcUnmasked => (
            if right { SymbolKind::ChevronLeft } else { SymbolKind::ChevronRight },
            Dash::Dashed,
        ),
        BcMasked => (
            if right { SymbolKind::BracketLeft } else { SymbolKind::BracketRight },
            Dash::Dashed,
        ),
        AcAided => (SymbolKind::LetterA, Dash::Solid),
        SoundField => (SymbolKind::LetterS, Dash::Dotted),
        LoudnessLevel => (if right { SymbolKind::LetterL } else { SymbolKind::LetterU }, Dash::Dotted),
    };
    AudiogramStyle {
        symbol,
        color: ear_color(ear),
        line,
    }
}

/// Marker shapes for `kind` centred on `(x, y)`; `size` is the half-extent.
pub fn marker(kind: SymbolKind, x: f64, y: f64, size: f64, color: Color) -> Vec<Node> {
    let stroke = Style::stroke(color, 1.8);
    let s = size;
    let letter = |c: &str| {
        vec![Node::shape(
            Shape::Text {
                x,
                y: y + s * 0.7,
                text: c.to_string(),
                size: s * 2.0,
                anchor: Anchor::Middle,
                bold: true,
            },
            Style::fill(color),
        )]
    };
    match kind {
        SymbolKind::Circle => vec![Node::shape(
            Shape::Circle { cx: x, cy: y, r: s },
            stroke.with_fill(Color::White),
        )],
        SymbolKind::Cross => vec![
            Node::line(x - s, y - s, x + s, y + s, stroke),
            Node::line(x - s, y + s, x + s, y - s, stroke),
        ],
        SymbolKind::Triangle => vec![Node::shape(
            Shape::Polygon {
                points: vec![(x, y - s), (x + s, y + s * 0.8), (x - s, y + s * 0.8)],
            },
            stroke.with_fill(Color::White),
        )],
        SymbolKind::Square => vec![Node::shape(
            Shape::Rect { x: x - s * 0.85, y: y - s * 0.85, width: s * 1.7, height: s * 1.7 },
            stroke.with_fill(Color::White),
        )],
        SymbolKind::ChevronLeft => vec![Node::shape(
            Shape::Polyline { points: vec![(x, y - s), (x - s, y), (x, y + s)] },
            stroke,
        )],
        SymbolKind::ChevronRight => vec![Node::shape(
            Shape::Polyline { points: vec![(x, y - s), (x + s, y), (x, y + s)] },
            stroke,
        )],
        SymbolKind::BracketLeft => vec![Node::shape(
            Shape::Polyline {
                points: vec![(x + s * 0.4, y - s), (x - s * 0.4, y - s), (x - s * 0.4, y + s), (x + s * 0.4, y + s)],
            },
            stroke,
        )],
        SymbolKind::BracketRight => vec![Node::shape(
            Shape::Polyline {
                points: vec![(x - s * 0.4, y - s), (x + s * 0.4, y - s), (x + s * 0.4, y + s), (x - s * 0.4, y + s)],
            },
            stroke,
        )],
        SymbolKind::LetterA => letter("A"),
        SymbolKind::LetterS => letter("S"),
        SymbolKind::LetterL => letter("L"),
        SymbolKind::LetterU => letter("U"),
        SymbolKind::Dot | SymbolKind::Bar | SymbolKind::Rung => vec![Node::shape(
            Shape::Circle { cx: x, cy: y, r: s * 0.5 },
            Style::fill(color),
        )],
    }
}
