use audiology_core::*;
use audiology_testkit::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn generated_records_are_valid_and_round_trip(r in any_record()) {
        prop_assert!(r.is_valid(), "{:?}", r.violations());
        let json = serde_json::to_string(&r.to_json()).unwrap();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        let back = Record::from_json(r.category(), value).unwrap();
        prop_assert_eq!(back, r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn aggregates_hold_their_records(agg in aggregate(ExamKey::parse("P-1", "2024-01-01").unwrap())) {
        prop_assert_eq!(agg.records().len(), agg.filled_count());
    }
}
