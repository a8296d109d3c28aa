use std::collections::BTreeMap;

use audiology_core::*;
use audiology_store::*;
use audiology_testkit as kit;
use proptest::prelude::*;

fn fresh() -> (tempfile::TempDir, Store, StoreKey) {
    let dir = tempfile::tempdir().unwrap();
    let k = StoreKey::random();
    let store = Store::create(dir.path().join("s.db"), &k).unwrap();
    (dir, store, k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// 64 cases x 17 categories = 1088 records per run.
    #[test]
    fn every_category_round_trips(
        records in (kit::exam_key()).prop_flat_map(|key| {
            Category::ALL.map(|c| kit::record(key.clone(), c)).to_vec()
        })
    ) {
        let (dir, store, sk) = fresh();
        for r in &records {
            store.upsert(r.clone()).unwrap();
            let stored = store.get(r.key(), r.category()).unwrap();
            prop_assert_eq!(stored.as_ref(), Some(r));
        }
        let key = records[0].key().clone();
        store.close().unwrap();
        let store = Store::open(dir.path().join("s.db"), &sk).unwrap();
        let agg = store.get_exam(&key).unwrap();
        prop_assert_eq!(agg.filled_count(), 17);
        for r in &records {
            let stored = agg.get(r.category());
            prop_assert_eq!(stored.as_ref(), Some(r));
            prop_assert_eq!(serde_json::to_string(&stored.unwrap().to_json()).unwrap(),
                serde_json::to_string(&r.to_json()).unwrap());
        }
        prop_assert_eq!(store.delete_exam(&key).unwrap(), 17);
        prop_assert_eq!(store.delete_exam(&key).unwrap(), 0);
        prop_assert!(store.get_exam(&key).unwrap().is_empty());
    }

    #[test]
    fn search_equals_brute_force(
        rows in prop::collection::vec(kit::any_record(), 1..40),
        patient_id in prop::option::of("P-[0-9]{1,2}"),
        name in prop::option::of(prop::sample::select(vec!["smi", "SMITH", "j", "an", "zzz", "o"])),
        from in prop::option::of(kit::date()),
        to in prop::option::of(kit::date()),
    ) {
        let (_dir, store, _) = fresh();
        for r in &rows {
            store.upsert(r.clone()).unwrap();
        }
        let criteria = SearchCriteria {
            patient_id,
            name_substring: name.map(str::to_string),
            date_from: from,
            date_to: to,
        };
        if criteria.is_empty() {
            prop_assert!(matches!(store.search(&criteria), Err(StoreError::EmptyCriteria)));
            return Ok(());
        }
        let mut latest: BTreeMap<(Category, ExamKey), Record> = BTreeMap::new();
        for r in &rows {
            latest.insert((r.category(), r.key().clone()), r.clone());
        }
        let mut expected: Vec<(ExamKey, String)> = Vec::new();
        for key in latest.keys().map(|(_, k)| k.clone()).collect::<std::collections::BTreeSet<_>>() {
            let name = match latest.get(&(Category::Patient, key.clone())) {
                Some(Record::Patient(p)) => p.name.clone(),
                _ => String::new(),
            };
            let ok = criteria.patient_id.as_ref().is_none_or(|id| &key.patient_id == id)
                && criteria.name_substring.as_ref().is_none_or(|n| name.to_lowercase().contains(&n.to_lowercase()))
                && from.is_none_or(|d| key.exam_date >= d)
                && to.is_none_or(|d| key.exam_date <= d);
            if ok {
                expected.push((key, name));
            }
        }
        expected.sort_by(|a, b| b.0.exam_date.cmp(&a.0.exam_date).then(a.0.patient_id.cmp(&b.0.patient_id)));
        let got: Vec<(ExamKey, String)> =
            store.search(&criteria).unwrap().into_iter().map(|h| (h.key, h.patient_name)).collect();
        prop_assert_eq!(got, expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn wrong_keys_never_open(bytes in prop::collection::vec(any::<[u8; 32]>(), 8)) {
        let (dir, store, sk) = fresh();
        store.upsert_many(sample::full_exam(&ExamKey::parse("P-1", "2024-01-01").unwrap()).records()).unwrap();
        store.close().unwrap();
        for b in bytes {
            let wrong = StoreKey::from_bytes(b);
            prop_assume!(wrong != sk);
            let err = Store::open(dir.path().join("s.db"), &wrong).unwrap_err();
            prop_assert_eq!(err.code(), "authentication-failure");
        }
        Store::open(dir.path().join("s.db"), &sk).unwrap();
    }
}

#[test]
fn search_examples() {
    let (_dir, store, _) = fresh();
    let k1 = ExamKey::parse("P1", "2024-01-10").unwrap();
    let k2 = ExamKey::parse("P1", "2024-02-10").unwrap();
    let k3 = ExamKey::parse("P2", "2024-02-10").unwrap();
    store.upsert(sample::patient(&k1, "John Smith").into()).unwrap();
    store.upsert(sample::patient(&k2, "John Smith").into()).unwrap();
    store.upsert(sample::patient(&k3, "Mary Jones").into()).unwrap();
    let by_name = store.search(&SearchCriteria { name_substring: Some("smi".into()), ..Default::default() }).unwrap();
    assert_eq!(by_name.iter().map(|h| &h.key).collect::<Vec<_>>(), vec![&k2, &k1]);
    assert!(by_name[0].diagnosis_summary.starts_with("Bilateral"));
    let none = store
        .search(&SearchCriteria {
            date_from: chrono::NaiveDate::from_ymd_opt(2025, 1, 1),
            ..Default::default()
        })
        .unwrap();
    assert!(none.is_empty());
    let both = store
        .search(&SearchCriteria {
            patient_id: Some("P1".into()),
            date_from: chrono::NaiveDate::from_ymd_opt(2024, 2, 1),
            ..Default::default()
        })
        .unwrap();
    assert_eq!(both.iter().map(|h| &h.key).collect::<Vec<_>>(), vec![&k2]);
    let all_feb = store
        .search(&SearchCriteria { date_from: chrono::NaiveDate::from_ymd_opt(2024, 2, 1), ..Default::default() })
        .unwrap();
    assert_eq!(all_feb.iter().map(|h| &h.key).collect::<Vec<_>>(), vec![&k2, &k3]);
}
