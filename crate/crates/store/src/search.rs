use audiology_core::ExamKey;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

const SUMMARY_CHARS: usize = 80;

/// Conjunctive exam filter. Blank strings count as unset.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchCriteria {
    #[serde(default)]
    pub patient_id: Option<String>,
    #[serde(default)]
    pub name_substring: Option<String>,
    #[serde(default)]
    pub date_from: Option<NaiveDate>,
    #[serde(default)]
    pub date_to: Option<NaiveDate>,
}

fn set(s: &Option<String>) -> Option<&str> {
    s.as_deref().filter(|v| !v.trim().is_empty())
}

impl SearchCriteria {
    pub fn is_empty(&self) -> bool {
        set(&self.patient_id).is_none()
            && set(&self.name_substring).is_none()
            && self.date_from.is_none()
            && self.date_to.is_none()
    }

    pub fn matches(&self, key: &ExamKey, patient_name: &str) -> bool {
        if let Some(id) = set(&self.patient_id) {
            if key.patient_id != id {
                return false;
            }
        }
        if let Some(needle) = set(&self.name_substring) {
            if !patient_name.to_lowercase().contains(&needle.to_lowercase()) {
                return false;
            }
        }
        self.date_from.is_none_or(|d| key.exam_date >= d) && self.date_to.is_none_or(|d| key.exam_date <= d)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchHit {
    pub key: ExamKey,
    /// Empty when the exam has no patient record.
    pub patient_name: String,
    pub diagnosis_summary: String,
}

/// The first line of `diagnosis`, shortened to 80 characters.
pub fn summarize(diagnosis: &str) -> String {
    let line = diagnosis.lines().next().unwrap_or("").trim();
    if line.chars().count() <= SUMMARY_CHARS {
        return line.to_string();
    }
    let mut s: String = line.chars().take(SUMMARY_CHARS - 3).collect();
    s.push_str("...");
    s
}

/// Newest exams first, then by patient id.
pub fn sort_hits(hits: &mut [SearchHit]) {
    hits.sort_by(|a, b| {
        b.key
            .exam_date
            .cmp(&a.key.exam_date)
            .then_with(|| a.key.patient_id.cmp(&b.key.patient_id))
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(id: &str, date: &str) -> ExamKey {
        ExamKey::parse(id, date).unwrap()
    }

    #[test]
    fn name_match_is_case_insensitive() {
        let c = SearchCriteria { name_substring: Some("smi".into()), ..Default::default() };
        assert!(c.matches(&key("P1", "2024-01-01"), "John Smith"));
        assert!(!c.matches(&key("P1", "2024-01-01"), "Jane Doe"));
    }

    #[test]
    fn blank_criteria_are_unset() {
        assert!(SearchCriteria::default().is_empty());
        let c = SearchCriteria { patient_id: Some("  ".into()), ..Default::default() };
        assert!(c.is_empty());
    }

    #[test]
    fn date_bounds_are_inclusive() {
        let c = SearchCriteria {
            date_from: NaiveDate::from_ymd_opt(2024, 1, 1),
            date_to: NaiveDate::from_ymd_opt(2024, 1, 31),
            ..Default::default()
        };
        assert!(c.matches(&key("P", "2024-01-01"), ""));
        assert!(c.matches(&key("P", "2024-01-31"), ""));
        assert!(!c.matches(&key("P", "2024-02-01"), ""));
    }

    #[test]
    fn summary_is_truncated() {
        assert_eq!(summarize("Otitis media\nsecond line"), "Otitis media");
        let long = "x".repeat(200);
        assert_eq!(summarize(&long).chars().count(), 80);
        assert!(summarize(&long).ends_with("..."));
    }
}
