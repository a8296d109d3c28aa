//! Diagnostic figures computed from stored test data.
//!
//! All functions are pure. Values are full-precision `f64`; rounding for
//! display happens only in [`format_percent`] and [`format_db`].
//!
//! Hearing impairment is not capped at 100%: averages above roughly 91.7 dB
//! yield percentages above 100, up to 142.5% at 120 dB.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregate::ExamAggregate;
use crate::model::*;
use crate::validate::Validate;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("incomplete data: {0}")]
    IncompleteData(String),
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl MetricsError {
    pub fn code(&self) -> &'static str {
        match self {
            MetricsError::IncompleteData(_) => "incomplete-data",
            MetricsError::UndefinedMetric(_) => "undefined-metric",
            MetricsError::Invalid(_) => "validation-failed",
        }
    }
}

/// Frequencies averaged into the speech perception figure.
pub const SPEECH_FREQUENCIES: [Frequency; 4] = [
    Frequency::HZ_500,
    Frequency::HZ_1000,
    Frequency::HZ_2000,
    Frequency::HZ_3000,
];

/// Mean unmasked air-conduction threshold over 500, 1000, 2000 and 3000 Hz.
///
/// The sum of four integers divided by four is exact in `f64`.
pub fn average_speech_perception(series: &ThresholdSeries) -> Result<f64, MetricsError> {
    if series.category != PureToneCategory::AcUnmasked {
        return Err(MetricsError::Invalid(format!(
            "average speech perception uses ac_unmasked thresholds, got {}",
            series.category.slug()
        )));
    }
    let missing: Vec<String> = SPEECH_FREQUENCIES
        .iter()
        .filter(|f| series.level(**f).is_none())
        .map(|f| f.hertz().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(MetricsError::IncompleteData(format!(
            "{} ear thresholds missing at {} Hz",
            series.ear.label().to_lowercase(),
            missing.join(", ")
        )));
    }
    let sum: i64 = SPEECH_FREQUENCIES
        .iter()
        .map(|f| i64::from(series.level(*f).unwrap_or_default()))
        .sum();
    Ok(sum as f64 / 4.0)
}

/// `max((a - 25) * 1.5, 0)` percent.
pub fn hearing_impairment_pct(avg_speech_perception: f64) -> f64 {
    ((avg_speech_perception - 25.0) * 1.5).max(0.0)
}

/// Weighted mean of both ear impairments, the better ear counting five times.
pub fn hearing_disability_pct(right_pct: f64, left_pct: f64) -> f64 {
    let better = right_pct.min(left_pct);
    let worse = right_pct.max(left_pct);
    (better * 5.0 + worse) / 6.0
}

/// Speech perception, impairment and disability from an unmasked
/// air-conduction record holding both ears.
pub fn disability_metrics(ac_unmasked: &PureToneRecord) -> Result<DisabilityMetrics, MetricsError> {
    let series = |ear: Ear| {
        ac_unmasked.ear(ear).ok_or_else(|| {
            MetricsError::IncompleteData(format!(
                "no {} ear air-conduction thresholds",
                ear.label().to_lowercase()
            ))
        })
    };
    let right = average_speech_perception(series(Ear::Right)?)?;
    let left = average_speech_perception(series(Ear::Left)?)?;
    let impairment_right_pct = hearing_impairment_pct(right);
    let impairment_left_pct = hearing_impairment_pct(left);
    Ok(DisabilityMetrics {
        avg_speech_perception_right: right,
        avg_speech_perception_left: left,
        impairment_right_pct,
        impairment_left_pct,
        disability_pct: hearing_disability_pct(impairment_right_pct, impairment_left_pct),
    })
}

pub fn nystagmus_duration(start: f64, end: f64) -> Result<f64, MetricsError> {
    if !(start.is_finite() && end.is_finite()) {
        return Err(MetricsError::Invalid("nystagmus times must be finite".into()));
    }
    if end < start {
        return Err(MetricsError::Invalid(format!(
            "nystagmus end {end} s precedes start {start} s"
        )));
    }
    Ok(end - start)
}

/// Nystagmus duration per ear and irrigation temperature, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaloricDurations {
    pub right_30: f64,
    pub right_44: f64,
    pub left_30: f64,
    pub left_44: f64,
}

impl CaloricDurations {
    pub fn from_measurement(m: &CaloricMeasurement) -> Result<Self, MetricsError> {
        let duration = |ear: Ear, temperature: Temperature| {
            let matching: Vec<_> = m
                .entries
                .iter()
                .filter(|e| e.ear == ear && e.temperature == temperature)
                .collect();
            match matching.as_slice() {
                [e] => nystagmus_duration(e.nystagmus_start, e.nystagmus_end),
                [] => Err(MetricsError::IncompleteData(format!(
                    "no {} ear {} irrigation",
                    ear.label().to_lowercase(),
                    temperature.label()
                ))),
                _ => Err(MetricsError::Invalid(format!(
                    "duplicate {} ear {} irrigation",
                    ear.label().to_lowercase(),
                    temperature.label()
                ))),
            }
        };
        Ok(Self {
            right_30: duration(Ear::Right, Temperature::Cool30)?,
            right_44: duration(Ear::Right, Temperature::Warm44)?,
            left_30: duration(Ear::Left, Temperature::Cool30)?,
            left_44: duration(Ear::Left, Temperature::Warm44)?,
        })
    }

    pub fn get(&self, ear: Ear, temperature: Temperature) -> f64 {
        match (ear, temperature) {
            (Ear::Right, Temperature::Cool30) => self.right_30,
            (Ear::Right, Temperature::Warm44) => self.right_44,
            (Ear::Left, Temperature::Cool30) => self.left_30,
            (Ear::Left, Temperature::Warm44) => self.left_44,
        }
    }

    /// The same measurement with the ears exchanged.
    pub fn swapped_ears(&self) -> Self {
        Self {
            right_30: self.left_30,
            right_44: self.left_44,
            left_30: self.right_30,
            left_44: self.right_44,
        }
    }

    fn total(&self) -> Result<f64, MetricsError> {
        // Summed per ear so that exchanging ears leaves the total bit-identical.
        let total = (self.right_44 + self.right_30) + (self.left_44 + self.left_30);
        if total > 0.0 {
            Ok(total)
        } else {
            Err(MetricsError::UndefinedMetric(
                "total nystagmus duration is zero".into(),
            ))
        }
    }

    /// Positive when the right ear's responses dominate.
    pub fn canal_paresis_pct(&self) -> Result<f64, MetricsError> {
        let total = self.total()?;
        let right = self.right_44 + self.right_30;
        let left = self.left_44 + self.left_30;
        Ok((right - left) / total * 100.0)
    }

    pub fn directional_preponderance_pct(&self) -> Result<f64, MetricsError> {
        let total = self.total()?;
        Ok(((self.right_44 + self.left_30) - (self.left_44 + self.right_30)) / total * 100.0)
    }
}

pub fn canal_paresis_pct(m: &CaloricMeasurement) -> Result<f64, MetricsError> {
    CaloricDurations::from_measurement(m)?.canal_paresis_pct()
}

pub fn directional_preponderance_pct(m: &CaloricMeasurement) -> Result<f64, MetricsError> {
    CaloricDurations::from_measurement(m)?.directional_preponderance_pct()
}

/// Lowest presentation level at which at least half the words were repeated.
///
/// `Ok(None)` when no trial reaches 50%.
pub fn speech_reception_threshold(ear: &SpeechEarResult) -> Result<Option<i32>, MetricsError> {
    if ear.trials.is_empty() {
        return Err(MetricsError::IncompleteData(format!(
            "no speech trials for the {} ear",
            ear.ear.label().to_lowercase()
        )));
    }
    Ok(ear
        .trials
        .iter()
        .filter(|t| t.percent_correct >= 50.0)
        .map(|t| t.intensity)
        .min())
}

pub fn sisi_score_pct(pulses_heard: u32) -> Result<f64, MetricsError> {
    if pulses_heard > SISI_PULSE_COUNT {
        return Err(MetricsError::Invalid(format!(
            "{pulses_heard} pulses heard out of {SISI_PULSE_COUNT}"
        )));
    }
    Ok(f64::from(pulses_heard) / f64::from(SISI_PULSE_COUNT) * 100.0)
}

/// Pressure of maximum compliance; the first sample wins ties.
pub fn peak_pressure(trace: &TympanogramTrace) -> Option<i32> {
    let mut best: Option<&TympanogramSample> = None;
    for s in &trace.samples {
        if best.is_none_or(|b| s.compliance > b.compliance) {
            best = Some(s);
        }
    }
    best.map(|s| s.pressure)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeechMetrics {
    pub ear: Ear,
    pub srt: Option<i32>,
    pub sd_score: Option<f64>,
    pub sd_intensity: Option<i32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakPressure {
    pub ear: Ear,
    pub pressure_dapa: Option<i32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaloricMetrics {
    pub durations: CaloricDurations,
    pub canal_paresis_pct: f64,
    pub directional_preponderance_pct: f64,
}

impl CaloricMetrics {
    pub fn compute(m: &CaloricMeasurement) -> Result<Self, MetricsError> {
        let durations = CaloricDurations::from_measurement(m)?;
        Ok(Self {
            durations,
            canal_paresis_pct: durations.canal_paresis_pct()?,
            directional_preponderance_pct: durations.directional_preponderance_pct()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SisiMetrics {
    pub ear: Ear,
    pub score_pct: f64,
}

/// Every figure computable from one exam.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExamMetrics {
    pub disability: Option<DisabilityMetrics>,
    pub speech: Vec<SpeechMetrics>,
    pub sisi: Option<SisiMetrics>,
    pub peak_pressure: Vec<PeakPressure>,
    pub caloric: Option<CaloricMetrics>,
}

pub fn speech_metrics(rec: &SpeechAudiometryRecord) -> Result<Vec<SpeechMetrics>, MetricsError> {
    rec.ears
        .iter()
        .map(|e| {
            Ok(SpeechMetrics {
                ear: e.ear,
                srt: speech_reception_threshold(e)?,
                sd_score: e.sd_score,
                sd_intensity: e.sd_intensity,
            })
        })
        .collect()
}

pub fn peak_pressures(rec: &ImpedanceRecord) -> Vec<PeakPressure> {
    rec.traces
        .iter()
        .map(|t| PeakPressure {
            ear: t.ear,
            pressure_dapa: peak_pressure(t),
        })
        .collect()
}

/// Computes the metrics of every populated category.
///
/// Fails on the first category whose data is present but insufficient.
pub fn exam_metrics(agg: &ExamAggregate) -> Result<ExamMetrics, MetricsError> {
    Ok(ExamMetrics {
        disability: agg.ac_unmasked.as_ref().map(disability_metrics).transpose()?,
        speech: match &agg.speech {
            Some(rec) => speech_metrics(rec)?,
            None => Vec::new(),
        },
        sisi: agg
            .sisi
            .as_ref()
            .map(|s| {
                Ok::<_, MetricsError>(SisiMetrics {
                    ear: s.ear,
                    score_pct: sisi_score_pct(s.pulses_heard)?,
                })
            })
            .transpose()?,
        peak_pressure: agg.impedance.as_ref().map(peak_pressures).unwrap_or_default(),
        caloric: agg
            .caloric
            .as_ref()
            .map(|m| {
                m.validate().map_err(|e| MetricsError::Invalid(e.to_string()))?;
                CaloricMetrics::compute(m)
            })
            .transpose()?,
    })
}

/// One decimal place with a percent sign, e.g. `35.0%`.
pub fn format_percent(value: f64) -> String {
    format!("{}%", format_one_decimal(value))
}

/// One decimal place with the dB unit, e.g. `45.0 dB`.
pub fn format_db(value: f64) -> String {
    format!("{} dB", format_one_decimal(value))
}

fn format_one_decimal(value: f64) -> String {
    let s = format!("{value:.1}");
    // Avoid printing "-0.0" for tiny negative values.
    if s == "-0.0" {
        "0.0".to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn ac(ear: Ear, points: &[(u32, i32)]) -> ThresholdSeries {
        ThresholdSeries::with_points(
            ear,
            PureToneCategory::AcUnmasked,
            points.iter().map(|&(f, l)| (Frequency::new(f).unwrap(), l)),
        )
    }

    fn key() -> ExamKey {
        ExamKey::new("P", NaiveDate::from_ymd_opt(2024, 1, 1).unwrap())
    }

    fn caloric(r44: f64, r30: f64, l44: f64, l30: f64) -> CaloricMeasurement {
        let e = |ear, temperature, d: f64| CaloricEntry {
            ear,
            temperature,
            nystagmus_start: 40.0,
            nystagmus_end: 40.0 + d,
        };
        CaloricMeasurement {
            key: key(),
            entries: vec![
                e(Ear::Right, Temperature::Warm44, r44),
                e(Ear::Right, Temperature::Cool30, r30),
                e(Ear::Left, Temperature::Warm44, l44),
                e(Ear::Left, Temperature::Cool30, l30),
            ],
        }
    }

    #[test]
    fn speech_perception_examples() {
        let s = ac(Ear::Right, &[(500, 30), (1000, 40), (2000, 50), (3000, 60)]);
        assert_eq!(average_speech_perception(&s).unwrap(), 45.0);
        let flat = ac(Ear::Right, &[(500, 25), (1000, 25), (2000, 25), (3000, 25)]);
        assert_eq!(average_speech_perception(&flat).unwrap(), 25.0);
        let partial = ac(Ear::Left, &[(500, 30), (1000, 40), (2000, 50)]);
        match average_speech_perception(&partial) {
            Err(MetricsError::IncompleteData(msg)) => assert!(msg.contains("3000"), "{msg}"),
            other => panic!("expected incomplete data, got {other:?}"),
        }
    }

    #[test]
    fn speech_perception_needs_unmasked_series() {
        let mut s = ac(Ear::Right, &[(500, 30), (1000, 40), (2000, 50), (3000, 60)]);
        s.category = PureToneCategory::AcMasked;
        assert!(matches!(average_speech_perception(&s), Err(MetricsError::Invalid(_))));
    }

    #[test]
    fn impairment_examples() {
        assert_eq!(hearing_impairment_pct(45.0), 30.0);
        assert_eq!(hearing_impairment_pct(25.0), 0.0);
        assert_eq!(hearing_impairment_pct(10.0), 0.0);
        assert_eq!(hearing_impairment_pct(120.0), 142.5);
    }

    #[test]
    fn disability_examples() {
        assert_eq!(hearing_disability_pct(30.0, 60.0), 35.0);
        assert_eq!(hearing_disability_pct(60.0, 30.0), 35.0);
        assert_eq!(hearing_disability_pct(0.0, 90.0), 15.0);
        assert_eq!(hearing_disability_pct(17.5, 17.5), 17.5);
    }

    #[test]
    fn disability_metrics_needs_both_ears() {
        let rec = PureToneRecord {
            key: key(),
            category: PureToneCategory::AcUnmasked,
            series: vec![ac(Ear::Right, &[(500, 30), (1000, 40), (2000, 50), (3000, 60)])],
        };
        assert!(matches!(disability_metrics(&rec), Err(MetricsError::IncompleteData(_))));
        let mut both = rec.clone();
        both.series.push(ac(Ear::Left, &[(500, 50), (1000, 60), (2000, 70), (3000, 80)]));
        let m = disability_metrics(&both).unwrap();
        assert_eq!(m.avg_speech_perception_left, 65.0);
        assert_eq!(m.impairment_right_pct, 30.0);
        assert_eq!(m.impairment_left_pct, 60.0);
        assert_eq!(m.disability_pct, 35.0);
    }

    #[test]
    fn caloric_examples() {
        let m = caloric(120.0, 110.0, 80.0, 90.0);
        assert!((canal_paresis_pct(&m).unwrap() - 15.0).abs() < 1e-9);
        assert!((directional_preponderance_pct(&m).unwrap() - 5.0).abs() < 1e-9);
        let eq = caloric(90.0, 90.0, 90.0, 90.0);
        assert_eq!(canal_paresis_pct(&eq).unwrap(), 0.0);
        assert_eq!(directional_preponderance_pct(&eq).unwrap(), 0.0);
        let dp = caloric(100.0, 0.0, 0.0, 100.0);
        assert_eq!(directional_preponderance_pct(&dp).unwrap(), 100.0);
        let zero = caloric(0.0, 0.0, 0.0, 0.0);
        assert!(matches!(canal_paresis_pct(&zero), Err(MetricsError::UndefinedMetric(_))));
        assert!(matches!(
            directional_preponderance_pct(&zero),
            Err(MetricsError::UndefinedMetric(_))
        ));
    }

    #[test]
    fn caloric_missing_entry() {
        let mut m = caloric(120.0, 110.0, 80.0, 90.0);
        m.entries.pop();
        let err = canal_paresis_pct(&m).unwrap_err();
        assert_eq!(err.code(), "incomplete-data");
    }

    #[test]
    fn nystagmus_examples() {
        assert_eq!(nystagmus_duration(40.0, 160.0).unwrap(), 120.0);
        assert_eq!(nystagmus_duration(7.5, 7.5).unwrap(), 0.0);
        assert!(matches!(nystagmus_duration(160.0, 40.0), Err(MetricsError::Invalid(_))));
    }

    #[test]
    fn srt_examples() {
        let ear = |trials: &[(i32, f64)]| SpeechEarResult {
            ear: Ear::Right,
            trials: trials
                .iter()
                .map(|&(intensity, percent_correct)| SpeechTrial { intensity, percent_correct })
                .collect(),
            sd_score: None,
            sd_intensity: None,
        };
        assert_eq!(
            speech_reception_threshold(&ear(&[(20, 10.0), (25, 40.0), (30, 55.0), (35, 90.0)])).unwrap(),
            Some(30)
        );
        assert_eq!(speech_reception_threshold(&ear(&[(20, 50.0)])).unwrap(), Some(20));
        assert_eq!(speech_reception_threshold(&ear(&[(20, 10.0), (25, 40.0)])).unwrap(), None);
        assert!(matches!(
            speech_reception_threshold(&ear(&[])),
            Err(MetricsError::IncompleteData(_))
        ));
    }

    #[test]
    fn sisi_examples() {
        assert_eq!(sisi_score_pct(14).unwrap(), 70.0);
        assert_eq!(sisi_score_pct(0).unwrap(), 0.0);
        assert_eq!(sisi_score_pct(20).unwrap(), 100.0);
        assert!(sisi_score_pct(21).is_err());
    }

    #[test]
    fn peak_pressure_first_max() {
        let t = TympanogramTrace {
            ear: Ear::Right,
            samples: [(-200, 0.2), (-100, 0.9), (0, 0.9), (100, 0.1)]
                .iter()
                .map(|&(pressure, compliance)| TympanogramSample { pressure, compliance })
                .collect(),
            reflexes: vec![],
        };
        assert_eq!(peak_pressure(&t), Some(-100));
        assert_eq!(peak_pressure(&TympanogramTrace { samples: vec![], ..t }), None);
    }

    #[test]
    fn display_rounding() {
        assert_eq!(format_percent(35.0), "35.0%");
        assert_eq!(format_percent(100.0 / 3.0), "33.3%");
        assert_eq!(format_percent(-1e-12), "0.0%");
        assert_eq!(format_db(45.25), "45.2 dB");
    }
}
