//! A fully populated example exam, used for demos, documentation and tests.

use crate::aggregate::ExamAggregate;
use crate::metrics::disability_metrics;
use crate::model::*;

pub fn patient(key: &ExamKey, name: &str) -> PatientRecord {
    PatientRecord {
        key: key.clone(),
        name: name.to_string(),
        age: 58,
        sex: Sex::Female,
        contact: "555-0147".into(),
        symptoms: "Gradual hearing loss, tinnitus in the left ear".into(),
        diagnosis: "Bilateral sensorineural hearing loss, worse on the left".into(),
        prescriptions: "Binaural hearing aid trial".into(),
    }
}

fn pure_tone(key: &ExamKey, category: PureToneCategory, right: &[(u32, i32)], left: &[(u32, i32)]) -> PureToneRecord {
    let series = |ear, points: &[(u32, i32)]| {
        ThresholdSeries::with_points(
            ear,
            category,
            points.iter().map(|&(hz, level)| (Frequency::new(hz).expect("standard frequency"), level)),
        )
    };
    PureToneRecord {
        key: key.clone(),
        category,
        series: vec![series(Ear::Right, right), series(Ear::Left, left)],
    }
}

/// Unmasked air conduction averages 45 dB (right) and 65 dB (left) over the
/// speech frequencies, giving 30% and 60% impairment and 35% disability.
pub fn ac_unmasked(key: &ExamKey) -> PureToneRecord {
    pure_tone(
        key,
        PureToneCategory::AcUnmasked,
        &[(250, 25), (500, 30), (1000, 40), (2000, 50), (3000, 60), (4000, 65), (8000, 70)],
        &[(250, 45), (500, 50), (1000, 60), (2000, 70), (3000, 80), (4000, 85), (8000, 90)],
    )
}

fn trace(ear: Ear, peak: i32, height: f64) -> TympanogramTrace {
    let samples = (-400..=200)
        .step_by(50)
        .map(|pressure| {
            let d = f64::from(pressure - peak) / 100.0;
            TympanogramSample { pressure, compliance: 0.2 + height / (1.0 + d * d) }
        })
        .collect();
    TympanogramTrace {
        ear,
        samples,
        reflexes: vec![
            AcousticReflex {
                stimulus_ear: ear,
                probe_side: ProbeSide::Ipsilateral,
                frequency: Frequency::HZ_1000,
                level: 95,
                present: true,
            },
            AcousticReflex {
                stimulus_ear: ear,
                probe_side: ProbeSide::Contralateral,
                frequency: Frequency::HZ_1000,
                level: 100,
                present: ear == Ear::Right,
            },
        ],
    }
}

/// An exam with every one of the 17 categories filled.
pub fn full_exam(key: &ExamKey) -> ExamAggregate {
    let mut agg = ExamAggregate::empty(key.clone());
    agg.patient = Some(patient(key, "Jane Smith"));
    let unmasked = ac_unmasked(key);
    agg.hearing_disability = Some(HearingDisabilityRecord {
        key: key.clone(),
        metrics: disability_metrics(&unmasked).expect("complete thresholds"),
    });
    agg.ac_unmasked = Some(unmasked);
    agg.ac_masked = Some(pure_tone(
        key,
        PureToneCategory::AcMasked,
        &[(1000, 45), (2000, 55)],
        &[(1000, 65), (2000, 75)],
    ));
    agg.bc_unmasked = Some(pure_tone(
        key,
        PureToneCategory::BcUnmasked,
        &[(500, 25), (1000, 35), (2000, 45), (4000, 55)],
        &[(500, 45), (1000, 55), (2000, 65), (4000, 75)],
    ));
    agg.bc_masked = Some(pure_tone(
        key,
        PureToneCategory::BcMasked,
        &[(1000, 40), (2000, 50)],
        &[(1000, 60), (2000, 70)],
    ));
    agg.ac_aided = Some(pure_tone(
        key,
        PureToneCategory::AcAided,
        &[(500, 20), (1000, 25), (2000, 30)],
        &[(500, 30), (1000, 35), (2000, 40)],
    ));
    agg.loudness_level = Some(pure_tone(
        key,
        PureToneCategory::LoudnessLevel,
        &[(500, 100), (1000, 105), (2000, 110)],
        &[(500, 105), (1000, 110), (2000, 115)],
    ));
    agg.sound_field = Some(pure_tone(
        key,
        PureToneCategory::SoundField,
        &[(500, 35), (1000, 40)],
        &[(500, 45), (1000, 50)],
    ));
    agg.ablb = Some(AblbRecord {
        key: key.clone(),
        pairs: vec![
            AblbPair { frequency: Frequency::HZ_1000, normal_ear_level: 20, impaired_ear_level: 60 },
            AblbPair { frequency: Frequency::HZ_1000, normal_ear_level: 40, impaired_ear_level: 70 },
            AblbPair { frequency: Frequency::HZ_1000, normal_ear_level: 60, impaired_ear_level: 80 },
            AblbPair { frequency: Frequency::HZ_1000, normal_ear_level: 80, impaired_ear_level: 90 },
        ],
    });
    agg.sisi = Some(SisiRecord { key: key.clone(), ear: Ear::Left, carrier_level_sl: 20, pulses_heard: 14 });
    agg.tone_decay = Some(ToneDecayRecord {
        key: key.clone(),
        trials: vec![
            ToneDecayTrial { ear: Ear::Right, start_level_sl: 5, seconds_heard: 60.0 },
            ToneDecayTrial { ear: Ear::Left, start_level_sl: 5, seconds_heard: 42.5 },
        ],
    });
    agg.stenger = Some(StengerRecord {
        key: key.clone(),
        frequency: Frequency::HZ_1000,
        right_level: 50,
        left_level: 70,
        heard_in: StengerResponse::Left,
    });
    agg.tuning_fork = Some(TuningForkRecord {
        key: key.clone(),
        weber: WeberResult::LateralizedRight,
        rinne_right: RinneResult::Positive,
        rinne_left: RinneResult::Positive,
        schwabach_right: SchwabachResult::Reduced,
        schwabach_left: SchwabachResult::Reduced,
        abc_right: AbcResult::Reduced,
        abc_left: AbcResult::Reduced,
        teal: "Not performed".into(),
        gelle_right: GelleResult::Positive,
        gelle_left: GelleResult::Positive,
    });
    let trials = |points: &[(i32, f64)]| {
        points.iter().map(|&(intensity, percent_correct)| SpeechTrial { intensity, percent_correct }).collect()
    };
    agg.speech = Some(SpeechAudiometryRecord {
        key: key.clone(),
        ears: vec![
            SpeechEarResult {
                ear: Ear::Right,
                trials: trials(&[(30, 20.0), (40, 45.0), (45, 60.0), (55, 90.0)]),
                sd_score: Some(88.0),
                sd_intensity: Some(80),
            },
            SpeechEarResult {
                ear: Ear::Left,
                trials: trials(&[(50, 10.0), (60, 40.0), (65, 50.0), (75, 80.0)]),
                sd_score: Some(72.0),
                sd_intensity: Some(95),
            },
        ],
    });
    agg.impedance = Some(ImpedanceRecord {
        key: key.clone(),
        traces: vec![trace(Ear::Right, -50, 0.9), trace(Ear::Left, -150, 0.6)],
    });
    let entry = |ear, temperature, start: f64, duration: f64| CaloricEntry {
        ear,
        temperature,
        nystagmus_start: start,
        nystagmus_end: start + duration,
    };
    agg.caloric = Some(CaloricMeasurement {
        key: key.clone(),
        entries: vec![
            entry(Ear::Right, Temperature::Warm44, 25.0, 120.0),
            entry(Ear::Right, Temperature::Cool30, 30.0, 110.0),
            entry(Ear::Left, Temperature::Warm44, 28.0, 80.0),
            entry(Ear::Left, Temperature::Cool30, 32.0, 90.0),
        ],
    });
    agg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate::Validate;
    use chrono::NaiveDate;

    #[test]
    fn full_exam_is_valid_and_complete() {
        let key = ExamKey::new("S-1", NaiveDate::from_ymd_opt(2024, 5, 2).unwrap());
        let agg = full_exam(&key);
        assert_eq!(agg.filled_count(), 17);
        for r in agg.records() {
            assert!(r.is_valid(), "{:?}: {:?}", r.category(), r.violations());
        }
    }
}
