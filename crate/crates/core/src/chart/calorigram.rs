use super::scene::{Anchor, Color, Node, Scene, Shape, Style};
use super::*;
use crate::metrics::{CaloricDurations, MetricsError};
use crate::model::{CaloricMeasurement, Ear, Temperature};

fn bar_fill(ear: Ear, temperature: Temperature) -> Color {
    match (ear, temperature) {
        (Ear::Right, Temperature::Warm44) => Color::Red,
        (Ear::Right, Temperature::Cool30) => Color::Pink,
        (Ear::Left, Temperature::Warm44) => Color::Blue,
        (Ear::Left, Temperature::Cool30) => Color::LightBlue,
    }
}

/// Horizontal nystagmus-duration bars, grouped by ear.
///
/// A bar's pixel length is its duration times the axis scale.
pub fn render_calorigram(m: &CaloricMeasurement, canvas: Canvas) -> Result<ChartDocument, ChartError> {
    let durations = CaloricDurations::from_measurement(m).map_err(|e| match e {
        MetricsError::IncompleteData(msg) => ChartError::IncompleteData(msg),
        other => ChartError::Invalid(other.to_string()),
    })?;

    let longest = [durations.right_30, durations.right_44, durations.left_30, durations.left_44]
        .into_iter()
        .fold(0.0, f64::max);
    let x_max = ceil_to(longest.max(200.0), 50.0);

    let area = PlotArea::with_margins(canvas, 90.0, 50.0, 40.0, 70.0);
    let xs = LinearScale { domain: (0.0, x_max), range: (area.left, area.right()) };

    let mut scene = Scene::new(f64::from(canvas.width), f64::from(canvas.height));
    scene.push(title(canvas, "Calorigram"));
    let mut grid = Vec::new();
    let mut t = 0.0;
    while t <= x_max + 1e-9 {
        let x = xs.map(t);
        grid.push(grid_line(x, area.top, x, area.bottom(), true));
        grid.push(Node::text(x, area.bottom() + 18.0, format!("{t:.0}"), 11.0, Anchor::Middle, Color::Black));
        t += 50.0;
    }
    scene.push(Node::group(&[("class", "grid")], grid));
    scene.push(area.frame());
    scene.push(Node::text(
        area.left + area.width / 2.0,
        area.bottom() + 40.0,
        "Nystagmus duration (s)",
        12.0,
        Anchor::Middle,
        Color::Black,
    ));

    // Four rows plus a gap row between the ears.
    let row = area.height / 5.0;
    let bar_height = row * 0.6;
    let mut inventory = Vec::new();
    for (ear_index, ear) in Ear::BOTH.into_iter().enumerate() {
        let id = format!("caloric_{}", ear_slug(ear));
        let mut points = Vec::new();
        for (t_index, temperature) in Temperature::BOTH.into_iter().enumerate() {
            let slot = (ear_index * 3 + t_index) as f64;
            let y = area.top + slot * row + (row - bar_height) / 2.0;
            let d = durations.get(ear, temperature);
            let width = xs.length(d);
            let label = format!("{} {}", if ear == Ear::Right { "R" } else { "L" }, temperature.label());
            scene.push(Node::text(area.left - 10.0, y + bar_height / 2.0 + 4.0, label, 12.0, Anchor::End, Color::Black));
            scene.push(point_group(
                &id,
                SymbolKind::Bar,
                &[
                    ("data-temperature", temperature.label().to_string()),
                    ("data-value", super::scene::num(d)),
                ],
                vec![
                    Node::shape(
                        Shape::Rect { x: area.left, y, width, height: bar_height },
                        Style::fill(bar_fill(ear, temperature)).with_stroke(ear_color(ear)),
                    ),
                    Node::text(
                        area.left + width + 6.0,
                        y + bar_height / 2.0 + 4.0,
                        format!("{} s", super::scene::num(d)),
                        11.0,
                        Anchor::Start,
                        Color::Black,
                    ),
                ],
            ));
            points.push((area.left + width, y + bar_height / 2.0));
        }
        inventory.push(InventoryEntry {
            series_id: id,
            symbol: SymbolKind::Bar,
            color: ear_color(ear),
            point_count: points.len(),
            line: LineStyle::None,
            points,
        });
    }
    Ok(ChartDocument::from_scene(ChartKind::Calorigram, scene, inventory))
}
