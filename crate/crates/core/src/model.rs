//! Record types for every hearing test the application stores.
//!
//! Every persisted record carries an [`ExamKey`]; per-ear measurements are
//! nested under the keyed record of their test so that one exam maps to at
//! most one row per table.

use std::collections::BTreeMap;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::DomainError;

/// Lowest hearing level accepted on any threshold, in dB HL.
pub const MIN_LEVEL_DB_HL: i32 = -10;
/// Highest hearing level accepted on any threshold, in dB HL.
pub const MAX_LEVEL_DB_HL: i32 = 120;
/// Bone conduction is not tested above this frequency.
pub const MAX_BONE_CONDUCTION_HZ: u32 = 4000;
pub const MAX_AGE_YEARS: u32 = 150;
pub const SISI_PULSE_COUNT: u32 = 20;
pub const TONE_DECAY_MAX_SECONDS: f64 = 60.0;
pub const MIN_PRESSURE_DAPA: i32 = -600;
pub const MAX_PRESSURE_DAPA: i32 = 400;

/// Composite identity shared by every record of one examination.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ExamKey {
    pub patient_id: String,
    pub exam_date: NaiveDate,
}

impl ExamKey {
    pub fn new(patient_id: impl Into<String>, exam_date: NaiveDate) -> Self {
        Self {
            patient_id: patient_id.into(),
            exam_date,
        }
    }

    /// Builds a key from a patient id and an ISO 8601 `YYYY-MM-DD` date.
    pub fn parse(patient_id: &str, exam_date: &str) -> Result<Self, DomainError> {
        if patient_id.trim().is_empty() {
            return Err(DomainError::EmptyPatientId);
        }
        let date = NaiveDate::parse_from_str(exam_date, "%Y-%m-%d")
            .map_err(|_| DomainError::InvalidDate(exam_date.to_string()))?;
        Ok(Self::new(patient_id, date))
    }
}

impl fmt::Display for ExamKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.patient_id, self.exam_date.format("%Y-%m-%d"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ear {
    Right,
    Left,
}

impl Ear {
    pub const BOTH: [Ear; 2] = [Ear::Right, Ear::Left];

    pub fn opposite(self) -> Ear {
        match self {
            Ear::Right => Ear::Left,
            Ear::Left => Ear::Right,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Ear::Right => "Right",
            Ear::Left => "Left",
        }
    }
}

/// A standard audiometric test frequency.
///
/// Only the eleven audiometer steps between 125 Hz and 8 kHz are
/// constructible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Frequency(u32);

impl Frequency {
    pub const STANDARD_HZ: [u32; 11] = [
        125, 250, 500, 750, 1000, 1500, 2000, 3000, 4000, 6000, 8000,
    ];

    pub const HZ_500: Frequency = Frequency(500);
    pub const HZ_1000: Frequency = Frequency(1000);
    pub const HZ_2000: Frequency = Frequency(2000);
    pub const HZ_3000: Frequency = Frequency(3000);
    pub const HZ_4000: Frequency = Frequency(4000);

    pub fn new(hertz: u32) -> Result<Self, DomainError> {
        if Self::STANDARD_HZ.contains(&hertz) {
            Ok(Frequency(hertz))
        } else {
            Err(DomainError::NonStandardFrequency(hertz))
        }
    }

    pub fn hertz(self) -> u32 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = Frequency> {
        Self::STANDARD_HZ.into_iter().map(Frequency)
    }

    /// Short axis label, e.g. `500` or `2k`.
    pub fn label(self) -> String {
        if self.0 >= 1000 {
            if self.0.is_multiple_of(1000) {
                format!("{}k", self.0 / 1000)
            } else {
                format!("{:.1}k", f64::from(self.0) / 1000.0)
            }
        } else {
            self.0.to_string()
        }
    }
}

impl TryFrom<u32> for Frequency {
    type Error = DomainError;

    fn try_from(value: u32) -> Result<Self, Self::Error> {
        Frequency::new(value)
    }
}

impl From<Frequency> for u32 {
    fn from(f: Frequency) -> u32 {
        f.0
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} Hz", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sex {
    Male,
    Female,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatientRecord {
    pub key: ExamKey,
    pub name: String,
    pub age: u32,
    pub sex: Sex,
    pub contact: String,
    pub symptoms: String,
    pub diagnosis: String,
    pub prescriptions: String,
}

/// The seven pure-tone subtests, each stored in its own table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PureToneCategory {
    AcMasked,
    AcUnmasked,
    BcMasked,
    BcUnmasked,
    AcAided,
    LoudnessLevel,
    SoundField,
}

impl PureToneCategory {
    pub const ALL: [PureToneCategory; 7] = [
        PureToneCategory::AcMasked,
        PureToneCategory::AcUnmasked,
        PureToneCategory::BcMasked,
        PureToneCategory::BcUnmasked,
        PureToneCategory::AcAided,
        PureToneCategory::LoudnessLevel,
        PureToneCategory::SoundField,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            PureToneCategory::AcMasked => "ac_masked",
            PureToneCategory::AcUnmasked => "ac_unmasked",
            PureToneCategory::BcMasked => "bc_masked",
            PureToneCategory::BcUnmasked => "bc_unmasked",
            PureToneCategory::AcAided => "ac_aided",
            PureToneCategory::LoudnessLevel => "loudness_level",
            PureToneCategory::SoundField => "sound_field",
        }
    }

    pub fn from_slug(slug: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.slug() == slug)
    }

    pub fn title(self) -> &'static str {
        match self {
            PureToneCategory::AcMasked => "Air conduction (masked)",
            PureToneCategory::AcUnmasked => "Air conduction (unmasked)",
            PureToneCategory::BcMasked => "Bone conduction (masked)",
            PureToneCategory::BcUnmasked => "Bone conduction (unmasked)",
            PureToneCategory::AcAided => "Air conduction (aided)",
            PureToneCategory::LoudnessLevel => "Loudness level",
            PureToneCategory::SoundField => "Sound field",
        }
    }

    pub fn is_bone_conduction(self) -> bool {
        matches!(
            self,
            PureToneCategory::BcMasked | PureToneCategory::BcUnmasked
        )
    }
}

/// Thresholds of one ear for one pure-tone subtest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdSeries {
    pub ear: Ear,
    pub category: PureToneCategory,
    /// Level in dB HL per test frequency.
    pub points: BTreeMap<Frequency, i32>,
}

impl ThresholdSeries {
    pub fn new(ear: Ear, category: PureToneCategory) -> Self {
        Self {
            ear,
            category,
            points: BTreeMap::new(),
        }
    }

    pub fn with_points(
        ear: Ear,
        category: PureToneCategory,
        points: impl IntoIterator<Item = (Frequency, i32)>,
    ) -> Self {
        Self {
            ear,
            category,
            points: points.into_iter().collect(),
        }
    }

    pub fn level(&self, frequency: Frequency) -> Option<i32> {
        self.points.get(&frequency).copied()
    }
}

/// One row of a pure-tone table: the series of both ears for one subtest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PureToneRecord {
    pub key: ExamKey,
    pub category: PureToneCategory,
    pub series: Vec<ThresholdSeries>,
}

impl PureToneRecord {
    pub fn ear(&self, ear: Ear) -> Option<&ThresholdSeries> {
        self.series.iter().find(|s| s.ear == ear)
    }
}

/// Values derived from unmasked air-conduction thresholds, persisted as a
/// snapshot at save time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisabilityMetrics {
    pub avg_speech_perception_right: f64,
    pub avg_speech_perception_left: f64,
    pub impairment_right_pct: f64,
    pub impairment_left_pct: f64,
    pub disability_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HearingDisabilityRecord {
    pub key: ExamKey,
    pub metrics: DisabilityMetrics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeechTrial {
    /// Presentation level in dB HL.
    pub intensity: i32,
    pub percent_correct: f64,
}

/// Speech audiometry results for one ear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeechEarResult {
    pub ear: Ear,
    pub trials: Vec<SpeechTrial>,
    pub sd_score: Option<f64>,
    pub sd_intensity: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeechAudiometryRecord {
    pub key: ExamKey,
    pub ears: Vec<SpeechEarResult>,
}

impl SpeechAudiometryRecord {
    pub fn ear(&self, ear: Ear) -> Option<&SpeechEarResult> {
        self.ears.iter().find(|e| e.ear == ear)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TympanogramSample {
    /// Ear canal pressure in daPa.
    pub pressure: i32,
    /// Compliance in arbitrary units.
    pub compliance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeSide {
    Ipsilateral,
    Contralateral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcousticReflex {
    pub stimulus_ear: Ear,
    pub probe_side: ProbeSide,
    pub frequency: Frequency,
    /// Stimulus level in dB HL.
    pub level: i32,
    pub present: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TympanogramTrace {
    pub ear: Ear,
    pub samples: Vec<TympanogramSample>,
    pub reflexes: Vec<AcousticReflex>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpedanceRecord {
    pub key: ExamKey,
    pub traces: Vec<TympanogramTrace>,
}

impl ImpedanceRecord {
    pub fn ear(&self, ear: Ear) -> Option<&TympanogramTrace> {
        self.traces.iter().find(|t| t.ear == ear)
    }
}

/// Irrigation water temperature of the caloric test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Temperature {
    #[serde(rename = "30C")]
    Cool30,
    #[serde(rename = "44C")]
    Warm44,
}

impl Temperature {
    pub const BOTH: [Temperature; 2] = [Temperature::Cool30, Temperature::Warm44];

    pub fn label(self) -> &'static str {
        match self {
            Temperature::Cool30 => "30C",
            Temperature::Warm44 => "44C",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaloricEntry {
    pub ear: Ear,
    pub temperature: Temperature,
    /// Seconds from the start of irrigation.
    pub nystagmus_start: f64,
    pub nystagmus_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaloricMeasurement {
    pub key: ExamKey,
    pub entries: Vec<CaloricEntry>,
}

impl CaloricMeasurement {
    pub fn entry(&self, ear: Ear, temperature: Temperature) -> Option<&CaloricEntry> {
        self.entries
            .iter()
            .find(|e| e.ear == ear && e.temperature == temperature)
    }
}

/// A level pair judged equally loud in the normal and the impaired ear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AblbPair {
    pub frequency: Frequency,
    pub normal_ear_level: i32,
    pub impaired_ear_level: i32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AblbRecord {
    pub key: ExamKey,
    pub pairs: Vec<AblbPair>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SisiRecord {
    pub key: ExamKey,
    pub ear: Ear,
    /// Carrier tone level in dB SL.
    pub carrier_level_sl: i32,
    pub pulses_heard: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToneDecayTrial {
    pub ear: Ear,
    /// Level in dB SL at which the sustained tone was started.
    pub start_level_sl: i32,
    pub seconds_heard: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToneDecayRecord {
    pub key: ExamKey,
    pub trials: Vec<ToneDecayTrial>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StengerResponse {
    Right,
    Left,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StengerRecord {
    pub key: ExamKey,
    pub frequency: Frequency,
    pub right_level: i32,
    pub left_level: i32,
    pub heard_in: StengerResponse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeberResult {
    Centered,
    LateralizedRight,
    LateralizedLeft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RinneResult {
    Positive,
    Negative,
    Equivocal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchwabachResult {
    Normal,
    Reduced,
    Lengthened,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbcResult {
    Normal,
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GelleResult {
    Positive,
    Negative,
}

/// Tuning fork outcomes. Teal has no fixed vocabulary and is kept as text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TuningForkRecord {
    pub key: ExamKey,
    pub weber: WeberResult,
    pub rinne_right: RinneResult,
    pub rinne_left: RinneResult,
    pub schwabach_right: SchwabachResult,
    pub schwabach_left: SchwabachResult,
    pub abc_right: AbcResult,
    pub abc_left: AbcResult,
    pub teal: String,
    pub gelle_right: GelleResult,
    pub gelle_left: GelleResult,
}
