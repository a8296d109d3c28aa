//! The seventeen record categories and the per-exam container holding one
//! optional record of each.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::DomainError;
use crate::model::*;
use crate::validate::{Validate, Violation};

/// One storage table per category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Patient,
    AcMasked,
    AcUnmasked,
    BcMasked,
    BcUnmasked,
    AcAided,
    LoudnessLevel,
    SoundField,
    HearingDisability,
    Ablb,
    Sisi,
    ToneDecay,
    Stenger,
    TuningFork,
    Speech,
    Impedance,
    Caloric,
}

impl Category {
    pub const ALL: [Category; 17] = [
        Category::Patient,
        Category::AcMasked,
        Category::AcUnmasked,
        Category::BcMasked,
        Category::BcUnmasked,
        Category::AcAided,
        Category::LoudnessLevel,
        Category::SoundField,
        Category::HearingDisability,
        Category::Ablb,
        Category::Sisi,
        Category::ToneDecay,
        Category::Stenger,
        Category::TuningFork,
        Category::Speech,
        Category::Impedance,
        Category::Caloric,
    ];

    pub fn table_name(self) -> &'static str {
        match self {
            Category::Patient => "PatientInfo",
            Category::AcMasked => "PureToneACMsk",
            Category::AcUnmasked => "PureToneACUMsk",
            Category::BcMasked => "PureToneBCMsk",
            Category::BcUnmasked => "PureToneBCUMsk",
            Category::AcAided => "PureToneACAid",
            Category::LoudnessLevel => "PureToneLDL",
            Category::SoundField => "PureToneS",
            Category::HearingDisability => "HearingDisability",
            Category::Ablb => "Ablb",
            Category::Sisi => "Sisi",
            Category::ToneDecay => "ToneDecay",
            Category::Stenger => "Stenger",
            Category::TuningFork => "TuningFork",
            Category::Speech => "SpeechAudiometry",
            Category::Impedance => "ImpedanceAudiometry",
            Category::Caloric => "BithermalCaloric",
        }
    }

    pub fn from_table_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.table_name() == name)
    }

    /// URL path segment, matching the serde name.
    pub fn slug(self) -> &'static str {
        match self {
            Category::Patient => "patient",
            Category::HearingDisability => "hearing_disability",
            Category::Ablb => "ablb",
            Category::Sisi => "sisi",
            Category::ToneDecay => "tone_decay",
            Category::Stenger => "stenger",
            Category::TuningFork => "tuning_fork",
            Category::Speech => "speech",
            Category::Impedance => "impedance",
            Category::Caloric => "caloric",
            other => other.pure_tone().map(PureToneCategory::slug).unwrap_or_default(),
        }
    }

    pub fn from_slug(slug: &str) -> Result<Self, DomainError> {
        Self::ALL
            .into_iter()
            .find(|c| c.slug() == slug)
            .ok_or_else(|| DomainError::UnknownCategory(slug.to_string()))
    }

    pub fn pure_tone(self) -> Option<PureToneCategory> {
        Some(match self {
            Category::AcMasked => PureToneCategory::AcMasked,
            Category::AcUnmasked => PureToneCategory::AcUnmasked,
            Category::BcMasked => PureToneCategory::BcMasked,
            Category::BcUnmasked => PureToneCategory::BcUnmasked,
            Category::AcAided => PureToneCategory::AcAided,
            Category::LoudnessLevel => PureToneCategory::LoudnessLevel,
            Category::SoundField => PureToneCategory::SoundField,
            _ => return None,
        })
    }
}

impl From<PureToneCategory> for Category {
    fn from(c: PureToneCategory) -> Self {
        match c {
            PureToneCategory::AcMasked => Category::AcMasked,
            PureToneCategory::AcUnmasked => Category::AcUnmasked,
            PureToneCategory::BcMasked => Category::BcMasked,
            PureToneCategory::BcUnmasked => Category::BcUnmasked,
            PureToneCategory::AcAided => Category::AcAided,
            PureToneCategory::LoudnessLevel => Category::LoudnessLevel,
            PureToneCategory::SoundField => Category::SoundField,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.table_name())
    }
}

/// Any storable record.
#[derive(Debug, Clone, PartialEq)]
pub enum Record {
    Patient(PatientRecord),
    PureTone(PureToneRecord),
    HearingDisability(HearingDisabilityRecord),
    Ablb(AblbRecord),
    Sisi(SisiRecord),
    ToneDecay(ToneDecayRecord),
    Stenger(StengerRecord),
    TuningFork(TuningForkRecord),
    Speech(SpeechAudiometryRecord),
    Impedance(ImpedanceRecord),
    Caloric(CaloricMeasurement),
}

macro_rules! record_dispatch {
    ($self:expr, $r:ident => $body:expr) => {
        match $self {
            Record::Patient($r) => $body,
            Record::PureTone($r) => $body,
            Record::HearingDisability($r) => $body,
            Record::Ablb($r) => $body,
            Record::Sisi($r) => $body,
            Record::ToneDecay($r) => $body,
            Record::Stenger($r) => $body,
            Record::TuningFork($r) => $body,
            Record::Speech($r) => $body,
            Record::Impedance($r) => $body,
            Record::Caloric($r) => $body,
        }
    };
}

impl Record {
    pub fn key(&self) -> &ExamKey {
        record_dispatch!(self, r => &r.key)
    }

    pub fn category(&self) -> Category {
        match self {
            Record::Patient(_) => Category::Patient,
            Record::PureTone(r) => r.category.into(),
            Record::HearingDisability(_) => Category::HearingDisability,
            Record::Ablb(_) => Category::Ablb,
            Record::Sisi(_) => Category::Sisi,
            Record::ToneDecay(_) => Category::ToneDecay,
            Record::Stenger(_) => Category::Stenger,
            Record::TuningFork(_) => Category::TuningFork,
            Record::Speech(_) => Category::Speech,
            Record::Impedance(_) => Category::Impedance,
            Record::Caloric(_) => Category::Caloric,
        }
    }

    /// Canonical JSON encoding of the inner record.
    pub fn to_json(&self) -> Value {
        record_dispatch!(self, r => serde_json::to_value(r).expect("records always encode"))
    }

    /// Decodes the canonical JSON of a `category` record.
    pub fn from_json(category: Category, value: Value) -> Result<Record, DomainError> {
        fn de<T: serde::de::DeserializeOwned>(category: Category, v: Value) -> Result<T, DomainError> {
            serde_json::from_value(v).map_err(|e| DomainError::Malformed {
                category,
                message: e.to_string(),
            })
        }
        let record = match category {
            Category::Patient => Record::Patient(de(category, value)?),
            Category::HearingDisability => Record::HearingDisability(de(category, value)?),
            Category::Ablb => Record::Ablb(de(category, value)?),
            Category::Sisi => Record::Sisi(de(category, value)?),
            Category::ToneDecay => Record::ToneDecay(de(category, value)?),
            Category::Stenger => Record::Stenger(de(category, value)?),
            Category::TuningFork => Record::TuningFork(de(category, value)?),
            Category::Speech => Record::Speech(de(category, value)?),
            Category::Impedance => Record::Impedance(de(category, value)?),
            Category::Caloric => Record::Caloric(de(category, value)?),
            pure => {
                let r: PureToneRecord = de(category, value)?;
                if Category::from(r.category) != pure {
                    return Err(DomainError::Malformed {
                        category,
                        message: format!("record category {} does not match table", r.category.slug()),
                    });
                }
                Record::PureTone(r)
            }
        };
        Ok(record)
    }
}

impl Validate for Record {
    fn collect_violations(&self, out: &mut Vec<Violation>) {
        record_dispatch!(self, r => r.collect_violations(out))
    }
}

macro_rules! impl_from_record {
    ($($variant:ident($ty:ty)),* $(,)?) => {
        $(impl From<$ty> for Record {
            fn from(r: $ty) -> Self {
                Record::$variant(r)
            }
        })*
    };
}

impl_from_record!(
    Patient(PatientRecord),
    PureTone(PureToneRecord),
    HearingDisability(HearingDisabilityRecord),
    Ablb(AblbRecord),
    Sisi(SisiRecord),
    ToneDecay(ToneDecayRecord),
    Stenger(StengerRecord),
    TuningFork(TuningForkRecord),
    Speech(SpeechAudiometryRecord),
    Impedance(ImpedanceRecord),
    Caloric(CaloricMeasurement),
);

/// All records of one examination, one optional slot per category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExamAggregate {
    pub key: ExamKey,
    pub patient: Option<PatientRecord>,
    pub ac_masked: Option<PureToneRecord>,
    pub ac_unmasked: Option<PureToneRecord>,
    pub bc_masked: Option<PureToneRecord>,
    pub bc_unmasked: Option<PureToneRecord>,
    pub ac_aided: Option<PureToneRecord>,
    pub loudness_level: Option<PureToneRecord>,
    pub sound_field: Option<PureToneRecord>,
    pub hearing_disability: Option<HearingDisabilityRecord>,
    pub ablb: Option<AblbRecord>,
    pub sisi: Option<SisiRecord>,
    pub tone_decay: Option<ToneDecayRecord>,
    pub stenger: Option<StengerRecord>,
    pub tuning_fork: Option<TuningForkRecord>,
    pub speech: Option<SpeechAudiometryRecord>,
    pub impedance: Option<ImpedanceRecord>,
    pub caloric: Option<CaloricMeasurement>,
}

impl ExamAggregate {
    pub fn empty(key: ExamKey) -> Self {
        Self {
            key,
            patient: None,
            ac_masked: None,
            ac_unmasked: None,
            bc_masked: None,
            bc_unmasked: None,
            ac_aided: None,
            loudness_level: None,
            sound_field: None,
            hearing_disability: None,
            ablb: None,
            sisi: None,
            tone_decay: None,
            stenger: None,
            tuning_fork: None,
            speech: None,
            impedance: None,
            caloric: None,
        }
    }

    pub fn pure_tone(&self, category: PureToneCategory) -> Option<&PureToneRecord> {
        match category {
            PureToneCategory::AcMasked => self.ac_masked.as_ref(),
            PureToneCategory::AcUnmasked => self.ac_unmasked.as_ref(),
            PureToneCategory::BcMasked => self.bc_masked.as_ref(),
            PureToneCategory::BcUnmasked => self.bc_unmasked.as_ref(),
            PureToneCategory::AcAided => self.ac_aided.as_ref(),
            PureToneCategory::LoudnessLevel => self.loudness_level.as_ref(),
            PureToneCategory::SoundField => self.sound_field.as_ref(),
        }
    }

    fn pure_tone_slot(&mut self, category: PureToneCategory) -> &mut Option<PureToneRecord> {
        match category {
            PureToneCategory::AcMasked => &mut self.ac_masked,
            PureToneCategory::AcUnmasked => &mut self.ac_unmasked,
            PureToneCategory::BcMasked => &mut self.bc_masked,
            PureToneCategory::BcUnmasked => &mut self.bc_unmasked,
            PureToneCategory::AcAided => &mut self.ac_aided,
            PureToneCategory::LoudnessLevel => &mut self.loudness_level,
            PureToneCategory::SoundField => &mut self.sound_field,
        }
    }

    /// Every threshold series across the seven pure-tone slots.
    pub fn threshold_series(&self) -> impl Iterator<Item = &ThresholdSeries> {
        PureToneCategory::ALL
            .into_iter()
            .filter_map(|c| self.pure_tone(c))
            .flat_map(|r| r.series.iter())
    }

    /// The record in `category`'s slot, if present.
    pub fn get(&self, category: Category) -> Option<Record> {
        match category {
            Category::Patient => self.patient.clone().map(Record::from),
            Category::HearingDisability => self.hearing_disability.clone().map(Record::from),
            Category::Ablb => self.ablb.clone().map(Record::from),
            Category::Sisi => self.sisi.clone().map(Record::from),
            Category::ToneDecay => self.tone_decay.clone().map(Record::from),
            Category::Stenger => self.stenger.clone().map(Record::from),
            Category::TuningFork => self.tuning_fork.clone().map(Record::from),
            Category::Speech => self.speech.clone().map(Record::from),
            Category::Impedance => self.impedance.clone().map(Record::from),
            Category::Caloric => self.caloric.clone().map(Record::from),
            pure => self
                .pure_tone(pure.pure_tone().expect("remaining categories are pure-tone"))
                .cloned()
                .map(Record::from),
        }
    }

    pub fn contains(&self, category: Category) -> bool {
        match category {
            Category::Patient => self.patient.is_some(),
            Category::HearingDisability => self.hearing_disability.is_some(),
            Category::Ablb => self.ablb.is_some(),
            Category::Sisi => self.sisi.is_some(),
            Category::ToneDecay => self.tone_decay.is_some(),
            Category::Stenger => self.stenger.is_some(),
            Category::TuningFork => self.tuning_fork.is_some(),
            Category::Speech => self.speech.is_some(),
            Category::Impedance => self.impedance.is_some(),
            Category::Caloric => self.caloric.is_some(),
            pure => self.pure_tone(pure.pure_tone().expect("pure-tone")).is_some(),
        }
    }

    pub fn filled_categories(&self) -> Vec<Category> {
        Category::ALL.into_iter().filter(|c| self.contains(*c)).collect()
    }

    pub fn filled_count(&self) -> usize {
        self.filled_categories().len()
    }

    pub fn is_empty(&self) -> bool {
        self.filled_count() == 0
    }

    /// All present records, in category order.
    pub fn records(&self) -> Vec<Record> {
        Category::ALL.into_iter().filter_map(|c| self.get(c)).collect()
    }

    /// Places `record` in its slot, replacing any previous value.
    pub fn set(&mut self, record: Record) -> Result<Option<Record>, DomainError> {
        if record.key() != &self.key {
            return Err(DomainError::KeyMismatch {
                expected: self.key.clone(),
                found: record.key().clone(),
            });
        }
        let previous = self.get(record.category());
        match record {
            Record::Patient(r) => self.patient = Some(r),
            Record::PureTone(r) => {
                let category = r.category;
                *self.pure_tone_slot(category) = Some(r)
            }
            Record::HearingDisability(r) => self.hearing_disability = Some(r),
            Record::Ablb(r) => self.ablb = Some(r),
            Record::Sisi(r) => self.sisi = Some(r),
            Record::ToneDecay(r) => self.tone_decay = Some(r),
            Record::Stenger(r) => self.stenger = Some(r),
            Record::TuningFork(r) => self.tuning_fork = Some(r),
            Record::Speech(r) => self.speech = Some(r),
            Record::Impedance(r) => self.impedance = Some(r),
            Record::Caloric(r) => self.caloric = Some(r),
        }
        Ok(previous)
    }

    pub fn remove(&mut self, category: Category) -> Option<Record> {
        let previous = self.get(category);
        match category {
            Category::Patient => self.patient = None,
            Category::HearingDisability => self.hearing_disability = None,
            Category::Ablb => self.ablb = None,
            Category::Sisi => self.sisi = None,
            Category::ToneDecay => self.tone_decay = None,
            Category::Stenger => self.stenger = None,
            Category::TuningFork => self.tuning_fork = None,
            Category::Speech => self.speech = None,
            Category::Impedance => self.impedance = None,
            Category::Caloric => self.caloric = None,
            pure => *self.pure_tone_slot(pure.pure_tone().expect("pure-tone")) = None,
        }
        previous
    }
}

/// Collects the per-test records of one exam into an aggregate.
///
/// Every part must carry `key`; two parts of the same category are rejected.
pub fn exam_aggregate(
    key: ExamKey,
    parts: impl IntoIterator<Item = Record>,
) -> Result<ExamAggregate, DomainError> {
    let mut agg = ExamAggregate::empty(key);
    for part in parts {
        let category = part.category();
        if agg.set(part)?.is_some() {
            return Err(DomainError::DuplicateCategory {
                key: agg.key.clone(),
                category,
            });
        }
    }
    Ok(agg)
}
