//! Deterministic vector charts for every test that has a standard graph.
//!
//! Each renderer returns a [`ChartDocument`]: standalone SVG plus an
//! inventory of the plotted data marks. Every data point is drawn inside a
//! `<g class="point" data-series=".." data-symbol="..">` element, so the
//! inventory can be checked against the markup.

mod audiogram;
mod calorigram;
mod laddergram;
pub mod scene;
mod speech;
pub mod symbols;
mod tympanogram;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use audiogram::{render_audiogram, AudiogramAxes};
pub use calorigram::render_calorigram;
pub use laddergram::render_laddergram;
pub use scene::{Color, Dash, Scene};
pub use speech::render_speech_audiogram;
pub use symbols::SymbolKind;
pub use tympanogram::render_tympanogram;

use crate::aggregate::ExamAggregate;
use crate::model::{Ear, PureToneCategory};
use scene::{Anchor, Node, Shape, Style};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChartError {
    #[error("nothing to plot: {0}")]
    EmptyChart(String),
    #[error("incomplete data: {0}")]
    IncompleteData(String),
    #[error("invalid chart input: {0}")]
    Invalid(String),
}

impl ChartError {
    pub fn code(&self) -> &'static str {
        match self {
            ChartError::EmptyChart(_) => "empty-chart",
            ChartError::IncompleteData(_) => "incomplete-data",
            ChartError::Invalid(_) => "validation-failed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    Audiogram,
    Speech,
    Tympanogram,
    Calorigram,
    Laddergram,
}

impl ChartKind {
    pub const ALL: [ChartKind; 5] = [
        ChartKind::Audiogram,
        ChartKind::Speech,
        ChartKind::Tympanogram,
        ChartKind::Calorigram,
        ChartKind::Laddergram,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            ChartKind::Audiogram => "audiogram",
            ChartKind::Speech => "speech",
            ChartKind::Tympanogram => "tympanogram",
            ChartKind::Calorigram => "calorigram",
            ChartKind::Laddergram => "laddergram",
        }
    }

    pub fn from_slug(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.slug() == s)
    }
}

/// Renders the chart of `kind` from one exam's records.
pub fn render_exam_chart(
    agg: &ExamAggregate,
    kind: ChartKind,
    selection: &AudiogramSelection,
    canvas: Canvas,
) -> Result<ChartDocument, ChartError> {
    let missing = |what: &str| ChartError::IncompleteData(format!("no {what} recorded for this exam"));
    match kind {
        ChartKind::Audiogram => {
            let series: Vec<_> = agg.threshold_series().cloned().collect();
            if series.is_empty() {
                return Err(missing("pure-tone thresholds"));
            }
            render_audiogram(&series, selection, canvas)
        }
        ChartKind::Speech => {
            render_speech_audiogram(&agg.speech.as_ref().ok_or_else(|| missing("speech audiometry"))?.ears, canvas)
        }
        ChartKind::Tympanogram => {
            render_tympanogram(&agg.impedance.as_ref().ok_or_else(|| missing("impedance audiometry"))?.traces, canvas)
        }
        ChartKind::Calorigram => render_calorigram(agg.caloric.as_ref().ok_or_else(|| missing("caloric test"))?, canvas),
        ChartKind::Laddergram => {
            render_laddergram(&agg.ablb.as_ref().ok_or_else(|| missing("loudness balance test"))?.pairs, canvas)
        }
    }
}

/// Pixel size of a chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Canvas {
    pub width: u32,
    pub height: u32,
}

impl Default for Canvas {
    fn default() -> Self {
        Self { width: 800, height: 600 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineStyle {
    None,
    Solid,
    Dashed,
    Dotted,
}

impl From<Dash> for LineStyle {
    fn from(d: Dash) -> Self {
        match d {
            Dash::Solid => LineStyle::Solid,
            Dash::Dashed => LineStyle::Dashed,
            Dash::Dotted => LineStyle::Dotted,
        }
    }
}

/// One plotted series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InventoryEntry {
    pub series_id: String,
    pub symbol: SymbolKind,
    pub color: Color,
    pub point_count: usize,
    /// How consecutive points of the series are joined.
    pub line: LineStyle,
    /// Screen coordinates of each point, in plotting order.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartDocument {
    pub kind: ChartKind,
    pub svg: String,
    pub symbol_inventory: Vec<InventoryEntry>,
    pub width: u32,
    pub height: u32,
    pub scene: Scene,
}

impl ChartDocument {
    fn from_scene(kind: ChartKind, scene: Scene, symbol_inventory: Vec<InventoryEntry>) -> Self {
        Self {
            kind,
            svg: scene.to_svg(),
            width: scene.width.round() as u32,
            height: scene.height.round() as u32,
            symbol_inventory,
            scene,
        }
    }

    pub fn entry(&self, series_id: &str) -> Option<&InventoryEntry> {
        self.symbol_inventory.iter().find(|e| e.series_id == series_id)
    }

    pub fn total_points(&self) -> usize {
        self.symbol_inventory.iter().map(|e| e.point_count).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EarFilter {
    Right,
    Left,
    Both,
}

impl EarFilter {
    pub fn includes(self, ear: Ear) -> bool {
        match self {
            EarFilter::Both => true,
            EarFilter::Right => ear == Ear::Right,
            EarFilter::Left => ear == Ear::Left,
        }
    }
}

/// Which audiogram curves to draw.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AudiogramSelection {
    pub ear_filter: EarFilter,
    pub categories: BTreeSet<PureToneCategory>,
}

impl AudiogramSelection {
    pub fn all() -> Self {
        Self {
            ear_filter: EarFilter::Both,
            categories: PureToneCategory::ALL.into_iter().collect(),
        }
    }

    pub fn new(ear_filter: EarFilter, categories: impl IntoIterator<Item = PureToneCategory>) -> Self {
        Self {
            ear_filter,
            categories: categories.into_iter().collect(),
        }
    }

    pub fn includes(&self, ear: Ear, category: PureToneCategory) -> bool {
        self.ear_filter.includes(ear) && self.categories.contains(&category)
    }
}

pub(crate) fn ear_color(ear: Ear) -> Color {
    match ear {
        Ear::Right => Color::Red,
        Ear::Left => Color::Blue,
    }
}

pub(crate) fn ear_slug(ear: Ear) -> &'static str {
    match ear {
        Ear::Right => "right",
        Ear::Left => "left",
    }
}

/// Rectangular plotting area inside the canvas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PlotArea {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
}

impl PlotArea {
    pub fn with_margins(canvas: Canvas, left: f64, top: f64, right: f64, bottom: f64) -> Self {
        Self {
            left,
            top,
            width: (f64::from(canvas.width) - left - right).max(1.0),
            height: (f64::from(canvas.height) - top - bottom).max(1.0),
        }
    }

    pub fn right(&self) -> f64 {
        self.left + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.top + self.height
    }

    pub fn frame(&self) -> Node {
        Node::shape(
            Shape::Rect { x: self.left, y: self.top, width: self.width, height: self.height },
            Style::stroke(Color::Black, 1.0),
        )
    }
}

/// Linear value-to-pixel mapping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LinearScale {
    pub domain: (f64, f64),
    pub range: (f64, f64),
}

impl LinearScale {
    pub fn map(&self, v: f64) -> f64 {
        let (d0, d1) = self.domain;
        let (r0, r1) = self.range;
        r0 + (v - d0) / (d1 - d0) * (r1 - r0)
    }

    pub fn length(&self, v: f64) -> f64 {
        let (d0, d1) = self.domain;
        let (r0, r1) = self.range;
        v / (d1 - d0) * (r1 - r0)
    }
}

/// Title text centered above the plot.
pub(crate) fn title(canvas: Canvas, text: &str) -> Node {
    Node::bold_text(f64::from(canvas.width) / 2.0, 24.0, text, 16.0, Anchor::Middle)
}

pub(crate) fn grid_line(x1: f64, y1: f64, x2: f64, y2: f64, major: bool) -> Node {
    let style = if major {
        Style::stroke(Color::Gray, 0.6)
    } else {
        Style::stroke(Color::LightGray, 0.5).dashed(Dash::Dashed)
    };
    Node::line(x1, y1, x2, y2, style)
}

/// Data point wrapper recognised by inventory checks.
pub(crate) fn point_group(series_id: &str, symbol: SymbolKind, extra: &[(&str, String)], children: Vec<Node>) -> Node {
    let mut attrs = vec![
        ("class".to_string(), "point".to_string()),
        ("data-series".to_string(), series_id.to_string()),
        ("data-symbol".to_string(), symbol.slug().to_string()),
    ];
    attrs.extend(extra.iter().map(|(k, v)| (k.to_string(), v.clone())));
    Node::Group { attrs, children }
}

pub(crate) fn series_line(series_id: &str, points: Vec<(f64, f64)>, color: Color, dash: Dash) -> Node {
    Node::group(
        &[("class", "series-line"), ("data-series", series_id)],
        vec![Node::shape(
            Shape::Polyline { points },
            Style::stroke(color, 1.5).dashed(dash),
        )],
    )
}

/// Round `v` up to the next multiple of `step`.
pub(crate) fn ceil_to(v: f64, step: f64) -> f64 {
    (v / step).ceil() * step
}

pub(crate) fn floor_to(v: f64, step: f64) -> f64 {
    (v / step).floor() * step
}
