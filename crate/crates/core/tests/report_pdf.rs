use audiology_core::metrics::{self, format_db, format_percent};
use audiology_core::report::*;
use audiology_core::*;
use chrono::{DateTime, NaiveDate, TimeZone, Utc};

fn key() -> ExamKey {
    ExamKey::new("R-42", NaiveDate::from_ymd_opt(2024, 6, 3).unwrap())
}

fn pinned() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 6, 3, 9, 30, 0).unwrap()
}

fn pdf_text(bytes: &[u8]) -> (usize, String) {
    let doc = lopdf::Document::load_mem(bytes).expect("parseable PDF");
    let pages: Vec<u32> = doc.get_pages().keys().copied().collect();
    let text = doc.extract_text(&pages).expect("text layer");
    (pages.len(), text)
}

#[test]
fn full_exam_has_every_section_and_chart() {
    let doc = build_report(&sample::full_exam(&key()), pinned()).unwrap();
    let titles: Vec<_> = doc.sections.iter().map(|s| s.title.as_str()).collect();
    assert_eq!(titles, SECTION_ORDER.to_vec());
    assert_eq!(doc.chart_count(), 5);
    assert!(doc.not_tested.is_empty());
}

#[test]
fn pdf_text_layer_carries_titles_and_metrics() {
    let agg = sample::full_exam(&key());
    let doc = build_report(&agg, pinned()).unwrap();
    let bytes = export_pdf(&doc, &PdfOptions::default());
    assert!(bytes.starts_with(b"%PDF-1.7"));
    let (pages, text) = pdf_text(&bytes);
    assert!(pages >= 2);
    for title in SECTION_ORDER {
        assert!(text.contains(title), "missing section {title}");
    }
    let m = metrics::exam_metrics(&agg).unwrap();
    let d = m.disability.unwrap();
    let c = m.caloric.unwrap();
    let expected = [
        format_db(d.avg_speech_perception_right),
        format_db(d.avg_speech_perception_left),
        format_percent(d.impairment_right_pct),
        format_percent(d.impairment_left_pct),
        format_percent(d.disability_pct),
        format_percent(c.canal_paresis_pct),
        format_percent(c.directional_preponderance_pct),
        format_percent(m.sisi.unwrap().score_pct),
    ];
    for value in &expected {
        assert!(text.contains(value.as_str()), "missing {value}");
    }
    assert!(text.contains("Hearing disability"));
    assert!(text.contains("35.0%"));
    assert!(text.contains("Jane Smith"));
}

#[test]
fn pinned_timestamp_gives_identical_bytes() {
    let agg = sample::full_exam(&key());
    let a = export_pdf(&build_report(&agg, pinned()).unwrap(), &PdfOptions::default());
    let b = export_pdf(&build_report(&agg, pinned()).unwrap(), &PdfOptions::default());
    assert_eq!(a, b);
    let later = export_pdf(
        &build_report(&agg, pinned() + chrono::Duration::seconds(1)).unwrap(),
        &PdfOptions::default(),
    );
    assert_ne!(a, later);
}

#[test]
fn patient_only_report_fits_on_one_page() {
    let mut agg = ExamAggregate::empty(key());
    agg.patient = Some(sample::patient(&key(), "Ana (Test) O\u{2019}Neil"));
    let doc = build_report(&agg, pinned()).unwrap();
    assert_eq!(doc.sections.len(), 1);
    let (pages, text) = pdf_text(&export_pdf(&doc, &PdfOptions::default()));
    assert_eq!(pages, 1);
    assert!(text.contains("Patient"));
    assert!(text.contains("Ana (Test) O"));
}

#[test]
fn letter_page_size_is_honoured() {
    let doc = build_report(&sample::full_exam(&key()), pinned()).unwrap();
    let bytes = export_pdf(&doc, &PdfOptions { page_size: PageSize::Letter });
    let pdf = lopdf::Document::load_mem(&bytes).unwrap();
    let (_, page) = pdf.get_pages().into_iter().next().unwrap();
    let media = pdf.get_dictionary(page).unwrap().get(b"MediaBox").unwrap().as_array().unwrap().clone();
    assert_eq!(media[2].as_float().unwrap(), 612.0);
    assert_eq!(media[3].as_float().unwrap(), 792.0);
}

#[test]
fn html_export_inlines_charts() {
    let doc = build_report(&sample::full_exam(&key()), pinned()).unwrap();
    let html = export_html(&doc);
    assert_eq!(html.matches("<svg ").count(), 5);
    assert!(!html.contains("<?xml"));
    for title in SECTION_ORDER {
        assert!(html.contains(&format!("<h2>{title}</h2>")));
    }
}
