use super::scene::{Anchor, Color, Dash, Node, Scene, Style};
use super::symbols::marker;
use super::*;
use crate::metrics::peak_pressure;
use crate::model::TympanogramTrace;

/// Compliance versus pressure for each ear, with the peak pressure marked.
pub fn render_tympanogram(traces: &[TympanogramTrace], canvas: Canvas) -> Result<ChartDocument, ChartError> {
    for t in traces {
        if t.samples.windows(2).any(|w| w[1].pressure <= w[0].pressure) {
            return Err(ChartError::Invalid(format!(
                "{} ear pressures not strictly increasing",
                ear_slug(t.ear)
            )));
        }
        if t.samples.iter().any(|s| !(s.compliance >= 0.0 && s.compliance.is_finite())) {
            return Err(ChartError::Invalid(format!("{} ear compliance must be >= 0", ear_slug(t.ear))));
        }
    }
    let plotted: Vec<&TympanogramTrace> = traces.iter().filter(|t| !t.samples.is_empty()).collect();
    if plotted.is_empty() {
        return Err(ChartError::EmptyChart("no tympanogram samples".into()));
    }

    let samples = || plotted.iter().flat_map(|t| t.samples.iter());
    let p_min = samples().map(|s| f64::from(s.pressure)).fold(-400.0, f64::min);
    let p_max = samples().map(|s| f64::from(s.pressure)).fold(200.0, f64::max);
    let x_min = floor_to(p_min, 100.0);
    let x_max = ceil_to(p_max, 100.0);
    let c_max = samples().map(|s| s.compliance).fold(0.0, f64::max);
    let y_max = ceil_to((c_max * 1.15).max(1.0), 0.5);

    let area = PlotArea::with_margins(canvas, 70.0, 50.0, 30.0, 70.0);
    let xs = LinearScale { domain: (x_min, x_max), range: (area.left, area.right()) };
    let ys = LinearScale { domain: (0.0, y_max), range: (area.bottom(), area.top) };

    let mut scene = Scene::new(f64::from(canvas.width), f64::from(canvas.height));
    scene.push(title(canvas, "Tympanogram"));
    let mut grid = Vec::new();
    let mut p = x_min;
    while p <= x_max + 1e-9 {
        let x = xs.map(p);
        grid.push(grid_line(x, area.top, x, area.bottom(), p == 0.0));
        grid.push(Node::text(x, area.bottom() + 18.0, format!("{p:.0}"), 11.0, Anchor::Middle, Color::Black));
        p += 100.0;
    }
    let mut c = 0.0;
    while c <= y_max + 1e-9 {
        let y = ys.map(c);
        grid.push(grid_line(area.left, y, area.right(), y, true));
        grid.push(Node::text(area.left - 8.0, y + 4.0, format!("{c:.1}"), 11.0, Anchor::End, Color::Black));
        c += 0.5;
    }
    scene.push(Node::group(&[("class", "grid")], grid));
    scene.push(area.frame());
    scene.push(Node::text(
        area.left + area.width / 2.0,
        area.bottom() + 40.0,
        "Pressure (daPa)",
        12.0,
        Anchor::Middle,
        Color::Black,
    ));
    scene.push(Node::text(14.0, area.top - 12.0, "Compliance", 12.0, Anchor::Start, Color::Black));

    let mut inventory = Vec::new();
    for (i, t) in plotted.iter().enumerate() {
        let id = format!("tympanogram_{}", ear_slug(t.ear));
        let color = ear_color(t.ear);
        let points: Vec<(f64, f64)> = t
            .samples
            .iter()
            .map(|s| (xs.map(f64::from(s.pressure)), ys.map(s.compliance)))
            .collect();
        if points.len() > 1 {
            scene.push(series_line(&id, points.clone(), color, Dash::Solid));
        }
        for (s, (x, y)) in t.samples.iter().zip(&points) {
            scene.push(point_group(
                &id,
                SymbolKind::Dot,
                &[("data-pressure", s.pressure.to_string())],
                marker(SymbolKind::Dot, *x, *y, 5.0, color),
            ));
        }
        if let Some(peak) = peak_pressure(t) {
            let x = xs.map(f64::from(peak));
            scene.push(Node::group(
                &[("class", "peak"), ("data-series", id.as_str())],
                vec![
                    Node::line(x, area.top, x, area.bottom(), Style::stroke(color, 0.8).dashed(Dash::Dotted)),
                    Node::text(
                        area.right() - 10.0,
                        area.top + 20.0 + i as f64 * 18.0,
                        format!("{} peak {peak} daPa", t.ear.label()),
                        12.0,
                        Anchor::End,
                        color,
                    ),
                ],
            ));
        }
        inventory.push(InventoryEntry {
            series_id: id,
            symbol: SymbolKind::Dot,
            color,
            point_count: points.len(),
            line: LineStyle::Solid,
            points,
        });
    }
    Ok(ChartDocument::from_scene(ChartKind::Tympanogram, scene, inventory))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Ear, TympanogramSample};

    fn trace(ear: Ear, samples: &[(i32, f64)]) -> TympanogramTrace {
        TympanogramTrace {
            ear,
            samples: samples
                .iter()
                .map(|&(pressure, compliance)| TympanogramSample { pressure, compliance })
                .collect(),
            reflexes: vec![],
        }
    }

    #[test]
    fn peak_annotation() {
        let t = trace(Ear::Right, &[(-300, 0.2), (-200, 0.5), (-100, 1.1), (0, 0.7), (100, 0.3)]);
        let doc = render_tympanogram(&[t], Canvas::default()).unwrap();
        assert!(doc.svg.contains("Right peak -100 daPa"), "{}", doc.svg);
    }

    #[test]
    fn symmetric_peak_at_zero() {
        let t = trace(Ear::Left, &[(-200, 0.2), (-100, 0.6), (0, 1.0), (100, 0.6), (200, 0.2)]);
        let doc = render_tympanogram(&[t], Canvas::default()).unwrap();
        assert!(doc.svg.contains("Left peak 0 daPa"));
    }

    #[test]
    fn two_ears_two_curves() {
        let doc = render_tympanogram(
            &[trace(Ear::Right, &[(-100, 0.5), (0, 0.9)]), trace(Ear::Left, &[(-100, 0.4), (0, 0.8)])],
            Canvas::default(),
        )
        .unwrap();
        assert_eq!(doc.symbol_inventory.len(), 2);
        assert_eq!(doc.svg.matches("class=\"series-line\"").count(), 2);
    }

    #[test]
    fn unsorted_samples_rejected() {
        let err = render_tympanogram(&[trace(Ear::Right, &[(0, 0.5), (-100, 0.9)])], Canvas::default()).unwrap_err();
        assert_eq!(err.code(), "validation-failed");
    }

    #[test]
    fn axis_spans_standard_range() {
        let doc = render_tympanogram(&[trace(Ear::Right, &[(-50, 0.5), (50, 0.9)])], Canvas::default()).unwrap();
        assert!(doc.svg.contains(">-400</text>"));
        assert!(doc.svg.contains(">200</text>"));
    }
}
