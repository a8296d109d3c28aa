//! Printable exam reports.
//!
//! [`build_report`] turns an [`ExamAggregate`] into a [`ReportDocument`]:
//! ordered sections of tables, metric values and embedded vector charts.
//! The document can then be exported as PDF ([`export_pdf`]) or as a
//! standalone HTML preview ([`export_html`]). Every number shown comes from
//! [`crate::metrics`]; this module only formats.

mod fonts;
mod html;
mod pdf;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use html::export_html;
pub use pdf::{export_pdf, PageSize, PdfOptions};

use crate::aggregate::ExamAggregate;
use crate::chart::{self, AudiogramSelection, Canvas, ChartDocument};
use crate::metrics::{self, format_db, format_percent};
use crate::model::*;

pub const SECTION_PATIENT: &str = "Patient";
pub const SECTION_PURE_TONE: &str = "Pure-Tone Audiometry";
pub const SECTION_SPECIAL: &str = "Special Tests";
pub const SECTION_TUNING_FORK: &str = "Tuning Fork";
pub const SECTION_SPEECH: &str = "Speech";
pub const SECTION_IMPEDANCE: &str = "Impedance";
pub const SECTION_CALORIC: &str = "Bithermal Caloric";

/// Report sections in print order.
pub const SECTION_ORDER: [&str; 7] = [
    SECTION_PATIENT,
    SECTION_PURE_TONE,
    SECTION_SPECIAL,
    SECTION_TUNING_FORK,
    SECTION_SPEECH,
    SECTION_IMPEDANCE,
    SECTION_CALORIC,
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("incomplete data: {0}")]
    IncompleteData(String),
}

impl ReportError {
    pub fn code(&self) -> &'static str {
        match self {
            ReportError::IncompleteData(_) => "incomplete-data",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub patient_name: String,
    pub key: ExamKey,
    pub generated_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Block {
    KeyValue { caption: Option<String>, rows: Vec<(String, String)> },
    Table { caption: Option<String>, header: Vec<String>, rows: Vec<Vec<String>> },
    Chart(ChartDocument),
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub title: String,
    pub blocks: Vec<Block>,
}

impl Section {
    fn new(title: &str) -> Self {
        Self { title: title.to_string(), blocks: Vec::new() }
    }

    pub fn charts(&self) -> impl Iterator<Item = &ChartDocument> {
        self.blocks.iter().filter_map(|b| match b {
            Block::Chart(c) => Some(c),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportDocument {
    pub metadata: ReportMetadata,
    pub sections: Vec<Section>,
    /// Titles of sections with no recorded data.
    pub not_tested: Vec<String>,
}

impl ReportDocument {
    pub fn section(&self, title: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.title == title)
    }

    pub fn chart_count(&self) -> usize {
        self.sections.iter().map(|s| s.charts().count()).sum()
    }
}

fn kv(caption: Option<&str>, rows: Vec<(String, String)>) -> Block {
    Block::KeyValue { caption: caption.map(str::to_string), rows }
}

fn row(label: impl Into<String>, value: impl Into<String>) -> (String, String) {
    (label.into(), value.into())
}

fn snake_to_words(value: impl Serialize) -> String {
    match serde_json::to_value(value) {
        Ok(serde_json::Value::String(s)) => s.replace('_', " "),
        _ => String::new(),
    }
}

fn chart_or_note(blocks: &mut Vec<Block>, rendered: Result<ChartDocument, chart::ChartError>) {
    match rendered {
        Ok(doc) => blocks.push(Block::Chart(doc)),
        Err(e) => blocks.push(Block::Text(format!("Chart not drawn: {e}"))),
    }
}

fn patient_section(p: &PatientRecord) -> Section {
    let mut s = Section::new(SECTION_PATIENT);
    s.blocks.push(kv(
        None,
        vec![
            row("Patient ID", p.key.patient_id.clone()),
            row("Exam date", p.key.exam_date.format("%Y-%m-%d").to_string()),
            row("Name", p.name.clone()),
            row("Age", p.age.to_string()),
            row("Sex", snake_to_words(p.sex)),
            row("Contact", p.contact.clone()),
            row("Symptoms", p.symptoms.clone()),
            row("Diagnosis", p.diagnosis.clone()),
            row("Prescriptions", p.prescriptions.clone()),
        ],
    ));
    s
}

fn disability_rows(m: &DisabilityMetrics) -> Vec<(String, String)> {
    vec![
        row("Average speech perception (right)", format_db(m.avg_speech_perception_right)),
        row("Average speech perception (left)", format_db(m.avg_speech_perception_left)),
        row("Hearing impairment (right)", format_percent(m.impairment_right_pct)),
        row("Hearing impairment (left)", format_percent(m.impairment_left_pct)),
        row("Hearing disability", format_percent(m.disability_pct)),
    ]
}

fn pure_tone_section(agg: &ExamAggregate) -> Option<Section> {
    let has_thresholds = PureToneCategory::ALL.iter().any(|c| agg.pure_tone(*c).is_some());
    if !has_thresholds && agg.hearing_disability.is_none() {
        return None;
    }
    let mut s = Section::new(SECTION_PURE_TONE);

    let mut header = vec!["Series".to_string()];
    header.extend(Frequency::all().map(|f| f.label()));
    let mut rows = Vec::new();
    for category in PureToneCategory::ALL {
        let Some(rec) = agg.pure_tone(category) else { continue };
        for ear in Ear::BOTH {
            let Some(series) = rec.ear(ear) else { continue };
            let mut r = vec![format!("{} ({})", category.title(), ear.label())];
            r.extend(
                Frequency::all().map(|f| series.level(f).map(|l| l.to_string()).unwrap_or_else(|| "-".into())),
            );
            rows.push(r);
        }
    }
    if !rows.is_empty() {
        s.blocks.push(Block::Table {
            caption: Some("Thresholds (dB HL)".into()),
            header,
            rows,
        });
    }

    let recomputed = agg.ac_unmasked.as_ref().map(metrics::disability_metrics);
    match (&recomputed, &agg.hearing_disability) {
        (Some(Ok(m)), stored) => {
            s.blocks.push(kv(Some("Hearing disability (recomputed)"), disability_rows(m)));
            if let Some(stored) = stored {
                if stored.metrics != *m {
                    s.blocks.push(Block::Text(
                        "The saved hearing disability snapshot differs from the current thresholds; recomputed values are shown."
                            .into(),
                    ));
                    s.blocks.push(kv(Some("Hearing disability (saved snapshot)"), disability_rows(&stored.metrics)));
                }
            }
        }
        (Some(Err(e)), stored) => {
            s.blocks.push(Block::Text(format!(
                "Hearing disability not computed: {e}. Requires 500/1k/2k/3k Hz unmasked air-conduction thresholds in both ears."
            )));
            if let Some(stored) = stored {
                s.blocks.push(kv(Some("Hearing disability (saved snapshot)"), disability_rows(&stored.metrics)));
            }
        }
        (None, Some(stored)) => {
            s.blocks.push(kv(Some("Hearing disability (saved snapshot)"), disability_rows(&stored.metrics)));
        }
        (None, None) => {}
    }

    let series: Vec<ThresholdSeries> = agg.threshold_series().cloned().collect();
    if series.iter().any(|s| !s.points.is_empty()) {
        chart_or_note(
            &mut s.blocks,
            chart::render_audiogram(&series, &AudiogramSelection::all(), Canvas::default()),
        );
    }
    Some(s)
}

fn special_tests_section(agg: &ExamAggregate) -> Option<Section> {
    if agg.ablb.is_none() && agg.sisi.is_none() && agg.tone_decay.is_none() && agg.stenger.is_none() {
        return None;
    }
    let mut s = Section::new(SECTION_SPECIAL);
    if let Some(ablb) = &agg.ablb {
        s.blocks.push(Block::Table {
            caption: Some("Alternate binaural loudness balance".into()),
            header: vec!["Frequency".into(), "Normal ear (dB HL)".into(), "Impaired ear (dB HL)".into()],
            rows: ablb
                .pairs
                .iter()
                .map(|p| vec![p.frequency.to_string(), p.normal_ear_level.to_string(), p.impaired_ear_level.to_string()])
                .collect(),
        });
        if !ablb.pairs.is_empty() {
            chart_or_note(&mut s.blocks, chart::render_laddergram(&ablb.pairs, Canvas::default()));
        }
    }
    if let Some(sisi) = &agg.sisi {
        let score = metrics::sisi_score_pct(sisi.pulses_heard)
            .map(format_percent)
            .unwrap_or_else(|e| e.to_string());
        s.blocks.push(kv(
            Some("Short increment sensitivity index"),
            vec![
                row("Ear", sisi.ear.label()),
                row("Carrier level", format!("{} dB SL", sisi.carrier_level_sl)),
                row("Pulses heard", format!("{} / {}", sisi.pulses_heard, SISI_PULSE_COUNT)),
                row("SISI score", score),
            ],
        ));
    }
    if let Some(decay) = &agg.tone_decay {
        s.blocks.push(Block::Table {
            caption: Some("Tone decay".into()),
            header: vec!["Ear".into(), "Start level (dB SL)".into(), "Seconds heard".into()],
            rows: decay
                .trials
                .iter()
                .map(|t| vec![t.ear.label().into(), t.start_level_sl.to_string(), t.seconds_heard.to_string()])
                .collect(),
        });
    }
    if let Some(st) = &agg.stenger {
        s.blocks.push(kv(
            Some("Stenger"),
            vec![
                row("Tone", st.frequency.to_string()),
                row("Right level", format!("{} dB HL", st.right_level)),
                row("Left level", format!("{} dB HL", st.left_level)),
                row("Heard in", snake_to_words(st.heard_in)),
            ],
        ));
    }
    Some(s)
}

fn tuning_fork_section(t: &TuningForkRecord) -> Section {
    let mut s = Section::new(SECTION_TUNING_FORK);
    s.blocks.push(kv(
        None,
        vec![
            row("Weber", snake_to_words(t.weber)),
            row("Rinne (right)", snake_to_words(t.rinne_right)),
            row("Rinne (left)", snake_to_words(t.rinne_left)),
            row("Schwabach (right)", snake_to_words(t.schwabach_right)),
            row("Schwabach (left)", snake_to_words(t.schwabach_left)),
            row("Absolute bone conduction (right)", snake_to_words(t.abc_right)),
            row("Absolute bone conduction (left)", snake_to_words(t.abc_left)),
            row("Teal", t.teal.clone()),
            row("Gelle (right)", snake_to_words(t.gelle_right)),
            row("Gelle (left)", snake_to_words(t.gelle_left)),
        ],
    ));
    s
}

fn speech_section(rec: &SpeechAudiometryRecord) -> Section {
    let mut s = Section::new(SECTION_SPEECH);
    let rows: Vec<Vec<String>> = rec
        .ears
        .iter()
        .flat_map(|e| {
            e.trials
                .iter()
                .map(move |t| vec![e.ear.label().to_string(), t.intensity.to_string(), t.percent_correct.to_string()])
        })
        .collect();
    if !rows.is_empty() {
        s.blocks.push(Block::Table {
            caption: Some("Speech trials".into()),
            header: vec!["Ear".into(), "Intensity (dB HL)".into(), "Correct (%)".into()],
            rows,
        });
    }
    let mut values = Vec::new();
    for e in &rec.ears {
        let ear = e.ear.label().to_lowercase();
        let srt = match metrics::speech_reception_threshold(e) {
            Ok(Some(v)) => format!("{v} dB HL"),
            Ok(None) => "not reached".to_string(),
            Err(_) => "no trials".to_string(),
        };
        values.push(row(format!("SRT ({ear})"), srt));
        values.push(row(
            format!("SD score ({ear})"),
            e.sd_score.map(format_percent).unwrap_or_else(|| "-".into()),
        ));
        values.push(row(
            format!("SD intensity ({ear})"),
            e.sd_intensity.map(|v| format!("{v} dB HL")).unwrap_or_else(|| "-".into()),
        ));
    }
    if !values.is_empty() {
        s.blocks.push(kv(Some("Speech metrics"), values));
    }
    if rec.ears.iter().any(|e| !e.trials.is_empty()) {
        chart_or_note(&mut s.blocks, chart::render_speech_audiogram(&rec.ears, Canvas::default()));
    }
    s
}

fn impedance_section(rec: &ImpedanceRecord) -> Section {
    let mut s = Section::new(SECTION_IMPEDANCE);
    let rows: Vec<Vec<String>> = rec
        .traces
        .iter()
        .flat_map(|t| {
            t.samples
                .iter()
                .map(move |p| vec![t.ear.label().to_string(), p.pressure.to_string(), p.compliance.to_string()])
        })
        .collect();
    if !rows.is_empty() {
        s.blocks.push(Block::Table {
            caption: Some("Tympanometry".into()),
            header: vec!["Ear".into(), "Pressure (daPa)".into(), "Compliance".into()],
            rows,
        });
    }
    let peaks: Vec<(String, String)> = metrics::peak_pressures(rec)
        .into_iter()
        .map(|p| {
            row(
                format!("Peak pressure ({})", p.ear.label().to_lowercase()),
                p.pressure_dapa.map(|v| format!("{v} daPa")).unwrap_or_else(|| "-".into()),
            )
        })
        .collect();
    if !peaks.is_empty() {
        s.blocks.push(kv(Some("Tympanogram metrics"), peaks));
    }
    let reflexes: Vec<Vec<String>> = rec
        .traces
        .iter()
        .flat_map(|t| {
            t.reflexes.iter().map(|r| {
                vec![
                    r.stimulus_ear.label().to_string(),
                    snake_to_words(r.probe_side),
                    r.frequency.to_string(),
                    format!("{} dB HL", r.level),
                    if r.present { "present" } else { "absent" }.to_string(),
                ]
            })
        })
        .collect();
    if !reflexes.is_empty() {
        s.blocks.push(Block::Table {
            caption: Some("Acoustic reflex".into()),
            header: vec!["Stimulus ear".into(), "Probe".into(), "Frequency".into(), "Level".into(), "Result".into()],
            rows: reflexes,
        });
    }
    if rec.traces.iter().any(|t| !t.samples.is_empty()) {
        chart_or_note(&mut s.blocks, chart::render_tympanogram(&rec.traces, Canvas::default()));
    }
    s
}

fn caloric_section(m: &CaloricMeasurement) -> Section {
    let mut s = Section::new(SECTION_CALORIC);
    s.blocks.push(Block::Table {
        caption: Some("Irrigations".into()),
        header: vec!["Ear".into(), "Water".into(), "Start (s)".into(), "End (s)".into(), "Duration (s)".into()],
        rows: m
            .entries
            .iter()
            .map(|e| {
                let duration = metrics::nystagmus_duration(e.nystagmus_start, e.nystagmus_end)
                    .map(|d| d.to_string())
                    .unwrap_or_else(|_| "invalid".into());
                vec![
                    e.ear.label().into(),
                    e.temperature.label().into(),
                    e.nystagmus_start.to_string(),
                    e.nystagmus_end.to_string(),
                    duration,
                ]
            })
            .collect(),
    });
    match metrics::CaloricMetrics::compute(m) {
        Ok(cm) => s.blocks.push(kv(
            Some("Caloric metrics"),
            vec![
                row("Canal paresis", format_percent(cm.canal_paresis_pct)),
                row("Directional preponderance", format_percent(cm.directional_preponderance_pct)),
            ],
        )),
        Err(e) => s.blocks.push(Block::Text(format!("Caloric metrics not computed: {e}"))),
    }
    chart_or_note(&mut s.blocks, chart::render_calorigram(m, Canvas::default()));
    s
}

/// Assembles the report of one exam. Requires a patient record.
pub fn build_report(agg: &ExamAggregate, generated_at: DateTime<Utc>) -> Result<ReportDocument, ReportError> {
    let patient = agg
        .patient
        .as_ref()
        .ok_or_else(|| ReportError::IncompleteData(format!("exam {} has no patient record", agg.key)))?;

    let candidates: [(&str, Option<Section>); 7] = [
        (SECTION_PATIENT, Some(patient_section(patient))),
        (SECTION_PURE_TONE, pure_tone_section(agg)),
        (SECTION_SPECIAL, special_tests_section(agg)),
        (SECTION_TUNING_FORK, agg.tuning_fork.as_ref().map(tuning_fork_section)),
        (SECTION_SPEECH, agg.speech.as_ref().map(speech_section)),
        (SECTION_IMPEDANCE, agg.impedance.as_ref().map(impedance_section)),
        (SECTION_CALORIC, agg.caloric.as_ref().map(caloric_section)),
    ];
    let mut sections = Vec::new();
    let mut not_tested = Vec::new();
    for (title, section) in candidates {
        match section {
            Some(s) => sections.push(s),
            None => not_tested.push(title.to_string()),
        }
    }
    Ok(ReportDocument {
        metadata: ReportMetadata {
            patient_name: patient.name.clone(),
            key: agg.key.clone(),
            generated_at,
        },
        sections,
        not_tested,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{NaiveDate, TimeZone};

    fn key() -> ExamKey {
        ExamKey::new("P1", NaiveDate::from_ymd_opt(2024, 6, 1).unwrap())
    }

    fn patient() -> PatientRecord {
        PatientRecord {
            key: key(),
            name: "Jane Doe".into(),
            age: 52,
            sex: Sex::Female,
            contact: "555-0100".into(),
            symptoms: "Tinnitus".into(),
            diagnosis: "Presbycusis".into(),
            prescriptions: "Hearing aid trial".into(),
        }
    }

    fn at() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2024, 6, 1, 12, 0, 0).unwrap()
    }

    #[test]
    fn requires_patient() {
        let agg = ExamAggregate::empty(key());
        assert_eq!(build_report(&agg, at()).unwrap_err().code(), "incomplete-data");
    }

    #[test]
    fn patient_and_unmasked_thresholds() {
        let mut agg = ExamAggregate::empty(key());
        agg.patient = Some(patient());
        agg.ac_unmasked = Some(PureToneRecord {
            key: key(),
            category: PureToneCategory::AcUnmasked,
            series: vec![ThresholdSeries::with_points(
                Ear::Right,
                PureToneCategory::AcUnmasked,
                [(Frequency::HZ_500, 30), (Frequency::HZ_1000, 40)],
            )],
        });
        let doc = build_report(&agg, at()).unwrap();
        let titles: Vec<_> = doc.sections.iter().map(|s| s.title.as_str()).collect();
        assert_eq!(titles, vec![SECTION_PATIENT, SECTION_PURE_TONE]);
        assert_eq!(doc.chart_count(), 1);
        assert_eq!(doc.not_tested.len(), 5);
        let pt = doc.section(SECTION_PURE_TONE).unwrap();
        assert!(pt
            .blocks
            .iter()
            .any(|b| matches!(b, Block::Text(t) if t.contains("Requires 500/1k/2k/3k Hz"))));
    }

    #[test]
    fn stored_snapshot_alone_is_reported() {
        let mut agg = ExamAggregate::empty(key());
        agg.patient = Some(patient());
        agg.hearing_disability = Some(HearingDisabilityRecord {
            key: key(),
            metrics: DisabilityMetrics {
                avg_speech_perception_right: 45.0,
                avg_speech_perception_left: 65.0,
                impairment_right_pct: 30.0,
                impairment_left_pct: 60.0,
                disability_pct: 35.0,
            },
        });
        let doc = build_report(&agg, at()).unwrap();
        let pt = doc.section(SECTION_PURE_TONE).unwrap();
        assert_eq!(doc.chart_count(), 0);
        assert!(matches!(&pt.blocks[0], Block::KeyValue { caption: Some(c), .. } if c.contains("saved snapshot")));
    }
}
