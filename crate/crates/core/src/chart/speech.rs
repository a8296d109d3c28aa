use super::scene::{Anchor, Color, Dash, Node, Scene, Style};
use super::symbols::marker;
use super::*;
use crate::metrics::speech_reception_threshold;
use crate::model::{Ear, SpeechEarResult};

fn ear_symbol(ear: Ear) -> SymbolKind {
    match ear {
        Ear::Right => SymbolKind::Circle,
        Ear::Left => SymbolKind::Cross,
    }
}

/// Percent-correct versus presentation level, one polyline per ear.
pub fn render_speech_audiogram(ears: &[SpeechEarResult], canvas: Canvas) -> Result<ChartDocument, ChartError> {
    let plotted: Vec<&SpeechEarResult> = ears.iter().filter(|e| !e.trials.is_empty()).collect();
    if plotted.is_empty() {
        return Err(ChartError::EmptyChart("no speech trials".into()));
    }
    for e in &plotted {
        if e.trials.iter().any(|t| !(0.0..=100.0).contains(&t.percent_correct)) {
            return Err(ChartError::Invalid(format!(
                "{} ear percent correct out of [0,100]",
                ear_slug(e.ear)
            )));
        }
    }

    let intensities = plotted.iter().flat_map(|e| e.trials.iter().map(|t| f64::from(t.intensity)));
    let (lo, hi) = intensities.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let x_min = floor_to(lo.min(0.0), 10.0);
    let x_max = ceil_to(hi.max(100.0) + 1.0, 10.0);

    let area = PlotArea::with_margins(canvas, 70.0, 50.0, 30.0, 70.0);
    let xs = LinearScale { domain: (x_min, x_max), range: (area.left, area.right()) };
    let ys = LinearScale { domain: (0.0, 100.0), range: (area.bottom(), area.top) };

    let mut scene = Scene::new(f64::from(canvas.width), f64::from(canvas.height));
    scene.push(title(canvas, "Speech audiogram"));
    let mut grid = Vec::new();
    let mut level = x_min;
    while level <= x_max + 1e-9 {
        let x = xs.map(level);
        grid.push(grid_line(x, area.top, x, area.bottom(), true));
        grid.push(Node::text(x, area.bottom() + 18.0, format!("{level:.0}"), 11.0, Anchor::Middle, Color::Black));
        level += 10.0;
    }
    for pct in (0..=100).step_by(10) {
        let y = ys.map(f64::from(pct));
        grid.push(grid_line(area.left, y, area.right(), y, true));
        grid.push(Node::text(area.left - 8.0, y + 4.0, pct.to_string(), 11.0, Anchor::End, Color::Black));
    }
    scene.push(Node::group(&[("class", "grid")], grid));
    scene.push(area.frame());
    let y50 = ys.map(50.0);
    scene.push(Node::group(
        &[("class", "guide")],
        vec![Node::line(area.left, y50, area.right(), y50, Style::stroke(Color::Black, 1.0).dashed(Dash::Dashed))],
    ));
    scene.push(Node::text(
        area.left + area.width / 2.0,
        area.bottom() + 40.0,
        "Intensity (dB HL)",
        12.0,
        Anchor::Middle,
        Color::Black,
    ));
    scene.push(Node::text(14.0, area.top - 12.0, "% correct", 12.0, Anchor::Start, Color::Black));

    let mut inventory = Vec::new();
    for (i, e) in plotted.iter().enumerate() {
        let id = format!("speech_{}", ear_slug(e.ear));
        let color = ear_color(e.ear);
        let symbol = ear_symbol(e.ear);
        let points: Vec<(f64, f64)> = e
            .trials
            .iter()
            .map(|t| (xs.map(f64::from(t.intensity)), ys.map(t.percent_correct)))
            .collect();
        scene.push(series_line(&id, points.clone(), color, Dash::Solid));
        for (t, (x, y)) in e.trials.iter().zip(&points) {
            scene.push(point_group(
                &id,
                symbol,
                &[("data-intensity", t.intensity.to_string())],
                marker(symbol, *x, *y, 6.0, color),
            ));
        }
        if let Ok(Some(srt)) = speech_reception_threshold(e) {
            scene.push(Node::text(
                area.right() - 10.0,
                area.top + 20.0 + i as f64 * 18.0,
                format!("{} SRT {srt} dB HL", e.ear.label()),
                12.0,
                Anchor::End,
                color,
            ));
        }
        inventory.push(InventoryEntry {
            series_id: id,
            symbol,
            color,
            point_count: points.len(),
            line: LineStyle::Solid,
            points,
        });
    }
    Ok(ChartDocument::from_scene(ChartKind::Speech, scene, inventory))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SpeechTrial;

    fn ear(ear: Ear, trials: &[(i32, f64)]) -> SpeechEarResult {
        SpeechEarResult {
            ear,
            trials: trials
                .iter()
                .map(|&(intensity, percent_correct)| SpeechTrial { intensity, percent_correct })
                .collect(),
            sd_score: None,
            sd_intensity: None,
        }
    }

    #[test]
    fn one_ear_gives_one_polyline() {
        let doc = render_speech_audiogram(&[ear(Ear::Right, &[(20, 10.0), (30, 60.0)])], Canvas::default()).unwrap();
        assert_eq!(doc.symbol_inventory.len(), 1);
        assert_eq!(doc.symbol_inventory[0].point_count, 2);
        assert_eq!(doc.symbol_inventory[0].line, LineStyle::Solid);
        assert!(doc.svg.contains("class=\"guide\""));
        assert!(doc.svg.contains("Right SRT 30 dB HL"));
    }

    #[test]
    fn both_ears_two_polylines() {
        let doc = render_speech_audiogram(
            &[ear(Ear::Right, &[(20, 10.0)]), ear(Ear::Left, &[(25, 40.0), (35, 80.0)])],
            Canvas::default(),
        )
        .unwrap();
        assert_eq!(doc.symbol_inventory.len(), 2);
        assert_eq!(doc.svg.matches("class=\"series-line\"").count(), 2);
    }

    #[test]
    fn no_trials_is_empty_chart() {
        let err = render_speech_audiogram(&[ear(Ear::Right, &[]), ear(Ear::Left, &[])], Canvas::default()).unwrap_err();
        assert_eq!(err.code(), "empty-chart");
        assert!(render_speech_audiogram(&[], Canvas::default()).is_err());
    }

    #[test]
    fn higher_score_is_drawn_higher() {
        let doc = render_speech_audiogram(&[ear(Ear::Left, &[(20, 10.0), (30, 90.0)])], Canvas::default()).unwrap();
        let p = &doc.symbol_inventory[0].points;
        assert!(p[1].1 < p[0].1);
        assert!(p[1].0 > p[0].0);
    }
}
