//! Invariant checks for every record type.
//!
//! Validation never fails: a record either has no violations or a list in
//! which each broken invariant appears once, tagged with the path of the
//! offending field.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::DomainError;
use crate::model::*;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

pub const LEVEL_OUT_OF_RANGE: &str = "level out of [-10,120]";
pub const NOT_MULTIPLE_OF_FIVE: &str = "not a multiple of 5";

pub trait Validate {
    /// Appends one violation per broken invariant.
    fn collect_violations(&self, out: &mut Vec<Violation>);

    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        self.collect_violations(&mut out);
        out
    }

    fn validate(&self) -> Result<(), DomainError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(DomainError::Invalid(v))
        }
    }

    fn is_valid(&self) -> bool {
        self.violations().is_empty()
    }
}

fn check_level(out: &mut Vec<Violation>, field: String, level: i32) {
    if !(MIN_LEVEL_DB_HL..=MAX_LEVEL_DB_HL).contains(&level) {
        out.push(Violation::new(field, LEVEL_OUT_OF_RANGE));
    }
}

fn check_percent(out: &mut Vec<Violation>, field: String, value: f64) {
    if !(0.0..=100.0).contains(&value) {
        out.push(Violation::new(field, "percent out of [0,100]"));
    }
}

fn check_unique_ears<'a>(out: &mut Vec<Violation>, field: &str, ears: impl Iterator<Item = &'a Ear>) {
    let mut seen = BTreeSet::new();
    for ear in ears {
        if !seen.insert(*ear) {
            out.push(Violation::new(
                field,
                format!("more than one entry for the {} ear", ear.label().to_lowercase()),
            ));
        }
    }
}

impl Validate for ExamKey {
    fn collect_violations(&self, out: &mut Vec<Violation>) {
        if self.patient_id.trim().is_empty() {
            out.push(Violation::new("key.patient_id", "patient id is empty"));
        }
    }
}

impl Validate for PatientRecord {
    fn collect_violations(&self, out: &mut Vec<Violation>) {
        self.key.collect_violations(out);
        if self.age > MAX_AGE_YEARS {
            out.push(Violation::new("age", "age above 150 years"));
        }
    }
}

impl ThresholdSeries {
    fn collect_at(&self, prefix: &str, out: &mut Vec<Violation>) {
        for (freq, level) in &self.points {
            let field = format!("{prefix}points.{}", freq.hertz());
            check_level(out, field.clone(), *level);
            if self.category.is_bone_conduction() && freq.hertz() > MAX_BONE_CONDUCTION_HZ {
                out.push(Violation::new(field, "bone conduction above 4000 Hz"));
            }
        }
    }
}

impl Validate for ThresholdSeries {
    fn collect_violations(&self, out: &mut Vec<Violation>) {
        self.collect_at("", out);
    }
}

impl Validate for PureToneRecord {
    fn collect_violations(&self, out: &mut Vec<Violation>) {
        self.key.collect_violations(out);
        check_unique_ears(out, "series", self.series.iter().map(|s| &s.ear));
        for (i, s) in self.series.iter().enumerate() {
            if s.category != self.category {
                out.push(Violation::new(
                    format!("series[{i}].category"),
                    format!("series category {} in a {} record", s.category.slug(), self.category.slug()),
                ));
            }
            s.collect_at(&format!("series[{i}]."), out);
        }
    }
}

impl Validate for DisabilityMetrics {
    fn collect_violations(&self, out: &mut Vec<Violation>) {
        const MAX_IMPAIRMENT: f64 = 142.5;
        for (field, v) in [
            ("metrics.impairment_right_pct", self.impairment_right_pct),
            ("metrics.impairment_left_pct", self.impairment_left_pct),
        ] {
            if !(0.0..=MAX_IMPAIRMENT).contains(&v) {
                out.push(Violation::new(field, "impairment out of [0,142.5]"));
            }
        }
        for (field, v) in [
            ("metrics.avg_speech_perception_right", self.avg_speech_perception_right),
            ("metrics.avg_speech_perception_left", self.avg_speech_perception_left),
        ] {
            if !v.is_finite() {
                out.push(Violation::new(field, "not a finite number"));
            }
        }
        let lo = self.impairment_right_pct.min(self.impairment_left_pct);
        let hi = self.impairment_right_pct.max(self.impairment_left_pct);
        let d = self.disability_pct;
        if !(d >= lo - 1e-9 && d <= hi + 1e-9) {
            out.push(Violation::new(
                "metrics.disability_pct",
                "disability outside the range of the two ear impairments",
            ));
        }
    }
}

impl Validate for HearingDisabilityRecord {
    fn collect_violations(&self, out: &mut Vec<Violation>) {
        self.key.collect_violations(out);
        self.metrics.collect_violations(out);
    }
}

impl Validate for SpeechAudiometryRecord {
    fn collect_violations(&self, out: &mut Vec<Violation>) {
        self.key.collect_violations(out);
        check_unique_ears(out, "ears", self.ears.iter().map(|e| &e.ear));
        for (i, ear) in self.ears.iter().enumerate() {
            for (j, t) in ear.trials.iter().enumerate() {
                if t.intensity % 5 != 0 {
                    out.push(Violation::new(
                        format!("ears[{i}].trials[{j}].intensity"),
                        NOT_MULTIPLE_OF_FIVE,
                    ));
                }
                check_percent(out, format!("ears[{i}].trials[{j}].percent_correct"), t.percent_correct);
            }
            if let Some(score) = ear.sd_score {
                check_percent(out, format!("ears[{i}].sd_score"), score);
            }
        }
    }
}

impl Validate for ImpedanceRecord {
    fn collect_violations(&self, out: &mut Vec<Violation>) {
        self.key.collect_violations(out);
        check_unique_ears(out, "traces", self.traces.iter().map(|t| &t.ear));
        for (i, trace) in self.traces.iter().enumerate() {
            for (j, s) in trace.samples.iter().enumerate() {
                if !(MIN_PRESSURE_DAPA..=MAX_PRESSURE_DAPA).contains(&s.pressure) {
                    out.push(Violation::new(
                        format!("traces[{i}].samples[{j}].pressure"),
                        "pressure out of [-600,400] daPa",
                    ));
                }
                if !(s.compliance >= 0.0 && s.compliance.is_finite()) {
                    out.push(Violation::new(
                        format!("traces[{i}].samples[{j}].compliance"),
                        "compliance must be a finite value >= 0",
                    ));
                }
                if j > 0 && s.pressure <= trace.samples[j - 1].pressure {
                    out.push(Violation::new(
                        format!("traces[{i}].samples[{j}].pressure"),
                        "pressures not strictly increasing",
                    ));
                }
            }
        }
    }
}

impl Validate for CaloricMeasurement {
    fn collect_violations(&self, out: &mut Vec<Violation>) {
        self.key.collect_violations(out);
        let mut seen = BTreeSet::new();
        for (i, e) in self.entries.iter().enumerate() {
            if !seen.insert((e.ear, e.temperature)) {
                out.push(Violation::new(
                    format!("entries[{i}]"),
                    format!("duplicate {} ear {} entry", e.ear.label().to_lowercase(), e.temperature.label()),
                ));
            }
            for (name, v) in [("nystagmus_start", e.nystagmus_start), ("nystagmus_end", e.nystagmus_end)] {
                if !(v >= 0.0 && v.is_finite()) {
                    out.push(Violation::new(
                        format!("entries[{i}].{name}"),
                        "time must be a finite value >= 0",
                    ));
                }
            }
            if e.nystagmus_end < e.nystagmus_start {
                out.push(Violation::new(
                    format!("entries[{i}].nystagmus_end"),
                    "nystagmus end before start",
                ));
            }
        }
        for ear in Ear::BOTH {
            for temperature in Temperature::BOTH {
                if !seen.contains(&(ear, temperature)) {
                    out.push(Violation::new(
                        "entries",
                        format!("missing {} ear {} entry", ear.label().to_lowercase(), temperature.label()),
                    ));
                }
            }
        }
    }
}

impl Validate for AblbRecord {
    fn collect_violations(&self, out: &mut Vec<Violation>) {
        self.key.collect_violations(out);
        for (i, p) in self.pairs.iter().enumerate() {
            check_level(out, format!("pairs[{i}].normal_ear_level"), p.normal_ear_level);
            check_level(out, format!("pairs[{i}].impaired_ear_level"), p.impaired_ear_level);
        }
    }
}

impl Validate for SisiRecord {
    fn collect_violations(&self, out: &mut Vec<Violation>) {
        self.key.collect_violations(out);
        if self.pulses_heard > SISI_PULSE_COUNT {
            out.push(Violation::new("pulses_heard", "more than 20 pulses heard"));
        }
    }
}

impl Validate for ToneDecayRecord {
    fn collect_violations(&self, out: &mut Vec<Violation>) {
        self.key.collect_violations(out);
        for (i, t) in self.trials.iter().enumerate() {
            if !(0.0..=TONE_DECAY_MAX_SECONDS).contains(&t.seconds_heard) {
                out.push(Violation::new(
                    format!("trials[{i}].seconds_heard"),
                    "seconds heard out of [0,60]",
                ));
            }
        }
    }
}

impl Validate for StengerRecord {
    fn collect_violations(&self, out: &mut Vec<Violation>) {
        self.key.collect_violations(out);
        check_level(out, "right_level".into(), self.right_level);
        check_level(out, "left_level".into(), self.left_level);
    }
}

impl Validate for TuningForkRecord {
    // Enumerated outcomes are closed at the type level.
    fn collect_violations(&self, out: &mut Vec<Violation>) {
        self.key.collect_violations(out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn key() -> ExamKey {
        ExamKey::new("P1", NaiveDate::from_ymd_opt(2024, 3, 1).unwrap())
    }

    fn caloric(entries: &[(Ear, Temperature, f64, f64)]) -> CaloricMeasurement {
        CaloricMeasurement {
            key: key(),
            entries: entries
                .iter()
                .map(|&(ear, temperature, s, e)| CaloricEntry {
                    ear,
                    temperature,
                    nystagmus_start: s,
                    nystagmus_end: e,
                })
                .collect(),
        }
    }

    #[test]
    fn level_above_range_is_reported() {
        let s = ThresholdSeries::with_points(
            Ear::Right,
            PureToneCategory::AcUnmasked,
            [(Frequency::HZ_1000, 130)],
        );
        let v = s.violations();
        assert_eq!(v, vec![Violation::new("points.1000", LEVEL_OUT_OF_RANGE)]);
        let edge = ThresholdSeries::with_points(
            Ear::Right,
            PureToneCategory::AcUnmasked,
            [(Frequency::HZ_500, -10), (Frequency::HZ_1000, 120)],
        );
        assert!(edge.is_valid());
    }

    #[test]
    fn bone_conduction_above_4k_is_reported() {
        let s = ThresholdSeries::with_points(
            Ear::Left,
            PureToneCategory::BcUnmasked,
            [(Frequency::new(6000).unwrap(), 40), (Frequency::HZ_4000, 40)],
        );
        assert_eq!(s.violations().len(), 1);
        let ac = ThresholdSeries { category: PureToneCategory::AcMasked, ..s };
        assert!(ac.is_valid());
    }

    #[test]
    fn complete_caloric_is_valid() {
        let m = caloric(&[
            (Ear::Right, Temperature::Warm44, 0.0, 120.0),
            (Ear::Right, Temperature::Cool30, 0.0, 110.0),
            (Ear::Left, Temperature::Warm44, 0.0, 80.0),
            (Ear::Left, Temperature::Cool30, 0.0, 90.0),
        ]);
        assert!(m.validate().is_ok());
    }

    #[test]
    fn caloric_problems_each_reported_once() {
        let m = caloric(&[
            (Ear::Right, Temperature::Warm44, 50.0, 10.0),
            (Ear::Right, Temperature::Warm44, 0.0, 10.0),
            (Ear::Left, Temperature::Warm44, 0.0, 80.0),
        ]);
        let v = m.violations();
        let messages: Vec<_> = v.iter().map(|v| v.message.as_str()).collect();
        assert_eq!(
            messages,
            vec![
                "nystagmus end before start",
                "duplicate right ear 44C entry",
                "missing right ear 30C entry",
                "missing left ear 30C entry",
            ]
        );
    }

    #[test]
    fn speech_intensity_step() {
        let rec = SpeechAudiometryRecord {
            key: key(),
            ears: vec![SpeechEarResult {
                ear: Ear::Right,
                trials: vec![
                    SpeechTrial { intensity: 35, percent_correct: 40.0 },
                    SpeechTrial { intensity: 37, percent_correct: 60.0 },
                ],
                sd_score: Some(101.0),
                sd_intensity: None,
            }],
        };
        let v = rec.violations();
        assert_eq!(
            v,
            vec![
                Violation::new("ears[0].trials[1].intensity", NOT_MULTIPLE_OF_FIVE),
                Violation::new("ears[0].sd_score", "percent out of [0,100]"),
            ]
        );
    }

    #[test]
    fn tympanogram_ordering_and_range() {
        let rec = ImpedanceRecord {
            key: key(),
            traces: vec![TympanogramTrace {
                ear: Ear::Left,
                samples: vec![
                    TympanogramSample { pressure: -700, compliance: 0.1 },
                    TympanogramSample { pressure: 0, compliance: 1.0 },
                    TympanogramSample { pressure: 0, compliance: -1.0 },
                ],
                reflexes: vec![],
            }],
        };
        let fields: Vec<_> = rec.violations().into_iter().map(|v| v.message).collect();
        assert_eq!(
            fields,
            vec![
                "pressure out of [-600,400] daPa",
                "compliance must be a finite value >= 0",
                "pressures not strictly increasing",
            ]
        );
    }

    #[test]
    fn special_test_bounds() {
        let sisi = SisiRecord { key: key(), ear: Ear::Left, carrier_level_sl: 20, pulses_heard: 21 };
        assert_eq!(sisi.violations().len(), 1);
        let decay = ToneDecayRecord {
            key: key(),
            trials: vec![ToneDecayTrial { ear: Ear::Right, start_level_sl: 5, seconds_heard: 61.0 }],
        };
        assert_eq!(decay.violations().len(), 1);
    }

    #[test]
    fn patient_age_and_id() {
        let p = PatientRecord {
            key: ExamKey::new(" ", key().exam_date),
            name: "A".into(),
            age: 151,
            sex: Sex::Other,
            contact: String::new(),
            symptoms: String::new(),
            diagnosis: String::new(),
            prescriptions: String::new(),
        };
        assert_eq!(p.violations().len(), 2);
    }

    #[test]
    fn disability_snapshot_bounds() {
        let m = DisabilityMetrics {
            avg_speech_perception_right: 45.0,
            avg_speech_perception_left: 65.0,
            impairment_right_pct: 30.0,
            impairment_left_pct: 60.0,
            disability_pct: 70.0,
        };
        assert_eq!(m.violations().len(), 1);
        assert!(DisabilityMetrics { disability_pct: 35.0, ..m }.is_valid());
    }
}
