use std::collections::BTreeSet;

use super::scene::{Anchor, Color, Node, Scene, Style};
use super::symbols::{audiogram_style, marker};
use super::*;
use crate::model::{Ear, Frequency, ThresholdSeries, MAX_LEVEL_DB_HL, MIN_LEVEL_DB_HL};
use crate::validate::Validate;

const LOWEST_HZ: f64 = 125.0;
const OCTAVES: f64 = 6.0;

/// Frequency and hearing-level mapping of an audiogram plot.
///
/// The frequency axis is logarithmic (one equal step per octave from 125 Hz
/// to 8 kHz) and the level axis is inverted, -10 dB HL at the top.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AudiogramAxes {
    area: PlotArea,
}

impl AudiogramAxes {
    pub fn for_canvas(canvas: Canvas) -> Self {
        Self {
            area: PlotArea::with_margins(canvas, 70.0, 50.0, 30.0, 110.0),
        }
    }

    pub fn x(&self, frequency: Frequency) -> f64 {
        let octave = (f64::from(frequency.hertz()) / LOWEST_HZ).log2();
        self.area.left + octave * (self.area.width / OCTAVES)
    }

    pub fn y(&self, level_db_hl: i32) -> f64 {
        let span = f64::from(MAX_LEVEL_DB_HL - MIN_LEVEL_DB_HL);
        self.area.top + f64::from(level_db_hl - MIN_LEVEL_DB_HL) / span * self.area.height
    }
}

fn series_id(s: &ThresholdSeries) -> String {
    format!("{}_{}", s.category.slug(), ear_slug(s.ear))
}

fn legend_label(s: &ThresholdSeries) -> String {
    use crate::model::PureToneCategory::*;
    let ear = match s.ear {
        Ear::Right => "R",
        Ear::Left => "L",
    };
    let name = match s.category {
        AcUnmasked => "AC",
        AcMasked => "AC masked",
        BcUnmasked => "BC",
        BcMasked => "BC masked",
        AcAided => "AC aided",
        LoudnessLevel => "Loudness",
        SoundField => "Sound field",
    };
    format!("{ear} {name}")
}

/// Pure-tone audiogram of the series admitted by `selection`.
pub fn render_audiogram(
    series: &[ThresholdSeries],
    selection: &AudiogramSelection,
    canvas: Canvas,
) -> Result<ChartDocument, ChartError> {
    if selection.categories.is_empty() {
        return Err(ChartError::EmptyChart("no audiogram curves selected".into()));
    }
    let mut seen = BTreeSet::new();
    for s in series {
        if !seen.insert((s.category, s.ear)) {
            return Err(ChartError::Invalid(format!("duplicate series {}", series_id(s))));
        }
        if let Some(v) = s.violations().first() {
            return Err(ChartError::Invalid(format!("{}: {v}", series_id(s))));
        }
    }

    let axes = AudiogramAxes::for_canvas(canvas);
    let area = axes.area;
    let mut scene = Scene::new(f64::from(canvas.width), f64::from(canvas.height));
    scene.push(title(canvas, "Pure-tone audiogram"));

    // Grid: one line per standard frequency, one per 10 dB.
    let mut grid = Vec::new();
    for f in Frequency::all() {
        let x = axes.x(f);
        let octave = f.hertz() % 125 == 0 && (f.hertz() / 125).is_power_of_two();
        grid.push(grid_line(x, area.top, x, area.bottom(), octave));
        grid.push(Node::text(x, area.bottom() + 18.0, f.label(), 11.0, Anchor::Middle, Color::Black));
    }
    for level in (MIN_LEVEL_DB_HL..=MAX_LEVEL_DB_HL).step_by(10) {
        let y = axes.y(level);
        grid.push(grid_line(area.left, y, area.right(), y, level == 0 || level % 20 == 0));
        grid.push(Node::text(area.left - 8.0, y + 4.0, level.to_string(), 11.0, Anchor::End, Color::Black));
    }
    scene.push(Node::group(&[("class", "grid")], grid));
    scene.push(area.frame());
    scene.push(Node::text(
        area.left + area.width / 2.0,
        area.bottom() + 38.0,
        "Frequency (Hz)",
        12.0,
        Anchor::Middle,
        Color::Black,
    ));
    scene.push(Node::text(
        14.0,
        area.top - 12.0,
        "dB HL",
        12.0,
        Anchor::Start,
        Color::Black,
    ));

    let mut inventory = Vec::new();
    let mut legend = Vec::new();
    let ordered = crate::model::PureToneCategory::ALL
        .iter()
        .flat_map(|c| Ear::BOTH.iter().map(move |e| (*c, *e)));
    for (category, ear) in ordered {
        let Some(s) = series.iter().find(|s| s.category == category && s.ear == ear) else {
            continue;
        };
        if !selection.includes(ear, category) || s.points.is_empty() {
            continue;
        }
        let style = audiogram_style(category, ear);
        let id = series_id(s);
        let points: Vec<(f64, f64)> = s.points.iter().map(|(f, l)| (axes.x(*f), axes.y(*l))).collect();
        if points.len() > 1 {
            scene.push(series_line(&id, points.clone(), style.color, style.line));
        }
        for ((f, level), (x, y)) in s.points.iter().zip(&points) {
            scene.push(point_group(
                &id,
                style.symbol,
                &[("data-hz", f.hertz().to_string()), ("data-level", level.to_string())],
                marker(style.symbol, *x, *y, 6.0, style.color),
            ));
        }
        legend.push((legend_label(s), style));
        inventory.push(InventoryEntry {
            series_id: id,
            symbol: style.symbol,
            color: style.color,
            point_count: points.len(),
            line: style.line.into(),
            points,
        });
    }

    // Legend below the axis title, seven entries per row.
    let mut legend_nodes = Vec::new();
    let col_width = area.width / 7.0;
    for (i, (label, style)) in legend.iter().enumerate() {
        let x = area.left + (i % 7) as f64 * col_width + 8.0;
        let y = area.bottom() + 62.0 + (i / 7) as f64 * 22.0;
        legend_nodes.push(Node::line(x - 6.0, y, x + 14.0, y, Style::stroke(style.color, 1.2).dashed(style.line)));
        legend_nodes.extend(marker(style.symbol, x + 4.0, y, 5.0, style.color));
        legend_nodes.push(Node::text(x + 20.0, y + 4.0, label.as_str(), 10.0, Anchor::Start, Color::Black));
    }
    scene.push(Node::group(&[("class", "legend")], legend_nodes));

    Ok(ChartDocument::from_scene(ChartKind::Audiogram, scene, inventory))
}
