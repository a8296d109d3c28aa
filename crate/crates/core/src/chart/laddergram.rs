use super::scene::{Anchor, Color, Node, Scene, Shape, Style};
use super::*;
use crate::model::{AblbPair, MAX_LEVEL_DB_HL, MIN_LEVEL_DB_HL};

/// Loudness balance chart: two inverted dB scales joined by one rung per
/// matched pair.
pub fn render_laddergram(pairs: &[AblbPair], canvas: Canvas) -> Result<ChartDocument, ChartError> {
    if pairs.is_empty() {
        return Err(ChartError::EmptyChart("no loudness balance pairs".into()));
    }
    let range = MIN_LEVEL_DB_HL..=MAX_LEVEL_DB_HL;
    if let Some(p) = pairs
        .iter()
        .find(|p| !range.contains(&p.normal_ear_level) || !range.contains(&p.impaired_ear_level))
    {
        return Err(ChartError::Invalid(format!("level out of [-10,120] at {}", p.frequency)));
    }

    let area = PlotArea::with_margins(canvas, 70.0, 70.0, 70.0, 40.0);
    let ys = LinearScale {
        domain: (f64::from(MIN_LEVEL_DB_HL), f64::from(MAX_LEVEL_DB_HL)),
        range: (area.top, area.bottom()),
    };
    let x_normal = area.left + area.width * 0.25;
    let x_impaired = area.left + area.width * 0.75;

    let mut scene = Scene::new(f64::from(canvas.width), f64::from(canvas.height));
    scene.push(title(canvas, "Loudness balance (ABLB)"));
    let mut scales = Vec::new();
    for (x, label) in [(x_normal, "Normal ear"), (x_impaired, "Impaired ear")] {
        scales.push(Node::line(x, area.top, x, area.bottom(), Style::stroke(Color::Black, 1.5)));
        scales.push(Node::bold_text(x, area.top - 16.0, label, 12.0, Anchor::Middle));
        for level in (MIN_LEVEL_DB_HL..=MAX_LEVEL_DB_HL).step_by(10) {
            let y = ys.map(f64::from(level));
            scales.push(Node::line(x - 5.0, y, x + 5.0, y, Style::stroke(Color::Black, 1.0)));
            scales.push(Node::text(x - 10.0, y + 4.0, level.to_string(), 10.0, Anchor::End, Color::Gray));
        }
    }
    scene.push(Node::group(&[("class", "scales")], scales));
    scene.push(Node::text(14.0, area.top - 16.0, "dB HL", 12.0, Anchor::Start, Color::Black));

    let mut points = Vec::new();
    for p in pairs {
        let y1 = ys.map(f64::from(p.normal_ear_level));
        let y2 = ys.map(f64::from(p.impaired_ear_level));
        scene.push(point_group(
            "ablb",
            SymbolKind::Rung,
            &[
                ("data-hz", p.frequency.hertz().to_string()),
                ("data-normal", p.normal_ear_level.to_string()),
                ("data-impaired", p.impaired_ear_level.to_string()),
            ],
            vec![
                Node::line(x_normal, y1, x_impaired, y2, Style::stroke(Color::Black, 1.5)),
                Node::shape(Shape::Circle { cx: x_normal, cy: y1, r: 3.5 }, Style::fill(Color::Black)),
                Node::shape(Shape::Circle { cx: x_impaired, cy: y2, r: 3.5 }, Style::fill(Color::Black)),
                Node::text(x_impaired + 10.0, y2 + 4.0, p.frequency.to_string(), 10.0, Anchor::Start, Color::Black),
            ],
        ));
        points.push((x_normal, y1));
    }
    let inventory = vec![InventoryEntry {
        series_id: "ablb".into(),
        symbol: SymbolKind::Rung,
        color: Color::Black,
        point_count: points.len(),
        line: LineStyle::None,
        points,
    }];
    Ok(ChartDocument::from_scene(ChartKind::Laddergram, scene, inventory))
}
