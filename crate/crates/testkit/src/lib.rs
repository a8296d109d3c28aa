//! Generators of valid records for every category, keyed by caller-chosen
//! exam keys.

use audiology_core::metrics::{hearing_disability_pct, hearing_impairment_pct};
use audiology_core::*;
use chrono::NaiveDate;
use proptest::prelude::*;
use proptest::sample::select;

pub fn date() -> impl Strategy<Value = NaiveDate> {
    (2019i32..=2025, 1u32..=12, 1u32..=28).prop_map(|(y, m, d)| NaiveDate::from_ymd_opt(y, m, d).unwrap())
}

/// Keys drawn from a small id pool so that collisions are common.
pub fn exam_key() -> impl Strategy<Value = ExamKey> {
    ("P-[0-9]{1,2}", date()).prop_map(|(id, date)| ExamKey::new(id, date))
}

pub fn ear() -> impl Strategy<Value = Ear> {
    prop_oneof![Just(Ear::Right), Just(Ear::Left)]
}

pub fn frequency() -> impl Strategy<Value = Frequency> {
    select(Frequency::STANDARD_HZ.to_vec()).prop_map(|hz| Frequency::new(hz).unwrap())
}

pub fn level() -> impl Strategy<Value = i32> {
    MIN_LEVEL_DB_HL..=MAX_LEVEL_DB_HL
}

fn text(max: usize) -> impl Strategy<Value = String> {
    prop_oneof![
        4 => proptest::string::string_regex(&format!("[A-Za-z0-9 ,.'-]{{0,{max}}}")).unwrap(),
        1 => proptest::string::string_regex(&format!("\\PC{{0,{max}}}")).unwrap(),
    ]
}

pub fn name() -> impl Strategy<Value = String> {
    prop_oneof![
        4 => select(vec!["John", "Jane", "Ana", "Omar", "Mei", "Ivan", "Zoe"])
            .prop_flat_map(|first| {
                select(vec!["Smith", "Smithers", "Doe", "Okafor", "Garcia", "Li", "Nowak"])
                    .prop_map(move |last| format!("{first} {last}"))
            }),
        1 => text(24),
    ]
}

fn nonneg(max: f64) -> impl Strategy<Value = f64> {
    prop_oneof![0.0..=max, (0..=(max as i32)).prop_map(f64::from)]
}

pub fn patient(key: ExamKey) -> impl Strategy<Value = PatientRecord> {
    (name(), 0..=MAX_AGE_YEARS, select(vec![Sex::Male, Sex::Female, Sex::Other]), text(20), text(60), text(60), text(40))
        .prop_map(move |(name, age, sex, contact, symptoms, diagnosis, prescriptions)| PatientRecord {
            key: key.clone(),
            name,
            age,
            sex,
            contact,
            symptoms,
            diagnosis,
            prescriptions,
        })
}

pub fn threshold_series(ear: Ear, category: PureToneCategory) -> impl Strategy<Value = ThresholdSeries> {
    let freqs: Vec<u32> = Frequency::STANDARD_HZ
        .into_iter()
        .filter(|hz| !category.is_bone_conduction() || *hz <= MAX_BONE_CONDUCTION_HZ)
        .collect();
    prop::collection::btree_map(select(freqs).prop_map(|hz| Frequency::new(hz).unwrap()), level(), 0..=11)
        .prop_map(move |points| ThresholdSeries { ear, category, points })
}

pub fn pure_tone(key: ExamKey, category: PureToneCategory) -> impl Strategy<Value = PureToneRecord> {
    (
        prop::option::of(threshold_series(Ear::Right, category)),
        prop::option::of(threshold_series(Ear::Left, category)),
    )
        .prop_map(move |(r, l)| PureToneRecord {
            key: key.clone(),
            category,
            series: r.into_iter().chain(l).collect(),
        })
}

pub fn hearing_disability(key: ExamKey) -> impl Strategy<Value = HearingDisabilityRecord> {
    (-10.0..=120.0f64, -10.0..=120.0f64).prop_map(move |(ar, al)| {
        let ir = hearing_impairment_pct(ar);
        let il = hearing_impairment_pct(al);
        HearingDisabilityRecord {
            key: key.clone(),
            metrics: DisabilityMetrics {
                avg_speech_perception_right: ar,
                avg_speech_perception_left: al,
                impairment_right_pct: ir,
                impairment_left_pct: il,
                disability_pct: hearing_disability_pct(ir, il),
            },
        }
    })
}

pub fn ablb(key: ExamKey) -> impl Strategy<Value = AblbRecord> {
    prop::collection::vec(
        (frequency(), level(), level()).prop_map(|(frequency, normal_ear_level, impaired_ear_level)| AblbPair {
            frequency,
            normal_ear_level,
            impaired_ear_level,
        }),
        0..8,
    )
    .prop_map(move |pairs| AblbRecord { key: key.clone(), pairs })
}

pub fn sisi(key: ExamKey) -> impl Strategy<Value = SisiRecord> {
    (ear(), 0..=40i32, 0..=SISI_PULSE_COUNT).prop_map(move |(ear, carrier_level_sl, pulses_heard)| SisiRecord {
        key: key.clone(),
        ear,
        carrier_level_sl,
        pulses_heard,
    })
}

pub fn tone_decay(key: ExamKey) -> impl Strategy<Value = ToneDecayRecord> {
    prop::collection::vec(
        (ear(), 0..=40i32, nonneg(TONE_DECAY_MAX_SECONDS)).prop_map(|(ear, start_level_sl, seconds_heard)| {
            ToneDecayTrial { ear, start_level_sl, seconds_heard }
        }),
        0..6,
    )
    .prop_map(move |trials| ToneDecayRecord { key: key.clone(), trials })
}

pub fn stenger(key: ExamKey) -> impl Strategy<Value = StengerRecord> {
    (
        frequency(),
        level(),
        level(),
        select(vec![StengerResponse::Right, StengerResponse::Left, StengerResponse::Neither]),
    )
        .prop_map(move |(frequency, right_level, left_level, heard_in)| StengerRecord {
            key: key.clone(),
            frequency,
            right_level,
            left_level,
            heard_in,
        })
}

pub fn tuning_fork(key: ExamKey) -> impl Strategy<Value = TuningForkRecord> {
    let rinne = || select(vec![RinneResult::Positive, RinneResult::Negative, RinneResult::Equivocal]);
    let schwabach = || select(vec![SchwabachResult::Normal, SchwabachResult::Reduced, SchwabachResult::Lengthened]);
    let abc = || select(vec![AbcResult::Normal, AbcResult::Reduced]);
    let gelle = || select(vec![GelleResult::Positive, GelleResult::Negative]);
    (
        select(vec![WeberResult::Centered, WeberResult::LateralizedRight, WeberResult::LateralizedLeft]),
        (rinne(), rinne()),
        (schwabach(), schwabach()),
        (abc(), abc()),
        text(30),
        (gelle(), gelle()),
    )
        .prop_map(move |(weber, rinne, schwabach, abc, teal, gelle)| TuningForkRecord {
            key: key.clone(),
            weber,
            rinne_right: rinne.0,
            rinne_left: rinne.1,
            schwabach_right: schwabach.0,
            schwabach_left: schwabach.1,
            abc_right: abc.0,
            abc_left: abc.1,
            teal,
            gelle_right: gelle.0,
            gelle_left: gelle.1,
        })
}

pub fn speech_trials(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<SpeechTrial>> {
    prop::collection::vec(
        (-2..=24i32, nonneg(100.0)).prop_map(|(k, percent_correct)| SpeechTrial { intensity: k * 5, percent_correct }),
        len,
    )
}

fn speech_ear(ear: Ear) -> impl Strategy<Value = SpeechEarResult> {
    (speech_trials(0..10), prop::option::of(nonneg(100.0)), prop::option::of(0..=120i32)).prop_map(
        move |(trials, sd_score, sd_intensity)| SpeechEarResult { ear, trials, sd_score, sd_intensity },
    )
}

pub fn speech(key: ExamKey) -> impl Strategy<Value = SpeechAudiometryRecord> {
    (prop::option::of(speech_ear(Ear::Right)), prop::option::of(speech_ear(Ear::Left))).prop_map(move |(r, l)| {
        SpeechAudiometryRecord { key: key.clone(), ears: r.into_iter().chain(l).collect() }
    })
}

fn trace(side: Ear) -> impl Strategy<Value = TympanogramTrace> {
    let samples = prop::collection::btree_map(MIN_PRESSURE_DAPA..=MAX_PRESSURE_DAPA, nonneg(3.0), 0..20)
        .prop_map(|m| m.into_iter().map(|(pressure, compliance)| TympanogramSample { pressure, compliance }).collect());
    let reflex = (ear(), select(vec![ProbeSide::Ipsilateral, ProbeSide::Contralateral]), frequency(), level(), any::<bool>())
        .prop_map(|(stimulus_ear, probe_side, frequency, level, present)| AcousticReflex {
            stimulus_ear,
            probe_side,
            frequency,
            level,
            present,
        });
    (samples, prop::collection::vec(reflex, 0..4)).prop_map(move |(samples, reflexes)| TympanogramTrace {
        ear: side,
        samples,
        reflexes,
    })
}

pub fn impedance(key: ExamKey) -> impl Strategy<Value = ImpedanceRecord> {
    (prop::option::of(trace(Ear::Right)), prop::option::of(trace(Ear::Left))).prop_map(move |(r, l)| {
        ImpedanceRecord { key: key.clone(), traces: r.into_iter().chain(l).collect() }
    })
}

pub fn caloric(key: ExamKey) -> impl Strategy<Value = CaloricMeasurement> {
    let entry = |ear, temperature| {
        (nonneg(90.0), nonneg(300.0)).prop_map(move |(start, duration)| CaloricEntry {
            ear,
            temperature,
            nystagmus_start: start,
            nystagmus_end: start + duration,
        })
    };
    (
        entry(Ear::Right, Temperature::Warm44),
        entry(Ear::Right, Temperature::Cool30),
        entry(Ear::Left, Temperature::Warm44),
        entry(Ear::Left, Temperature::Cool30),
    )
        .prop_map(move |(a, b, c, d)| CaloricMeasurement { key: key.clone(), entries: vec![a, b, c, d] })
}

/// A valid record of `category` under `key`.
pub fn record(key: ExamKey, category: Category) -> BoxedStrategy<Record> {
    if let Some(pt) = category.pure_tone() {
        return pure_tone(key, pt).prop_map(Record::from).boxed();
    }
    match category {
        Category::Patient => patient(key).prop_map(Record::from).boxed(),
        Category::HearingDisability => hearing_disability(key).prop_map(Record::from).boxed(),
        Category::Ablb => ablb(key).prop_map(Record::from).boxed(),
        Category::Sisi => sisi(key).prop_map(Record::from).boxed(),
        Category::ToneDecay => tone_decay(key).prop_map(Record::from).boxed(),
        Category::Stenger => stenger(key).prop_map(Record::from).boxed(),
        Category::TuningFork => tuning_fork(key).prop_map(Record::from).boxed(),
        Category::Speech => speech(key).prop_map(Record::from).boxed(),
        Category::Impedance => impedance(key).prop_map(Record::from).boxed(),
        Category::Caloric => caloric(key).prop_map(Record::from).boxed(),
        _ => unreachable!("pure-tone categories handled above"),
    }
}

pub fn category() -> impl Strategy<Value = Category> {
    select(Category::ALL.to_vec())
}

/// A random key with a random valid record of a random category.
pub fn any_record() -> impl Strategy<Value = Record> {
    (exam_key(), category()).prop_flat_map(|(key, category)| record(key, category))
}

/// An aggregate with a random subset of categories filled.
pub fn aggregate(key: ExamKey) -> impl Strategy<Value = ExamAggregate> {
    let parts: Vec<_> = Category::ALL
        .into_iter()
        .map(|c| prop::option::of(record(key.clone(), c)))
        .collect();
    parts.prop_map(move |records| {
        let mut agg = ExamAggregate::empty(key.clone());
        for r in records.into_iter().flatten() {
            agg.set(r).expect("same key");
        }
        agg
    })
}
