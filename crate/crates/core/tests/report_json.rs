use odbr_core::report::{compute_id, from_json, to_json, validate};
use odbr_testkit::{reports, rng};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let r = reports::random_report(&mut rng(seed));
        prop_assert!(validate(&r).is_empty(), "{:?}", validate(&r));
        let text = to_json(&r);
        let back = from_json(&text).unwrap();
        prop_assert_eq!(&back, &r);
        prop_assert_eq!(to_json(&back), text);
        prop_assert_eq!(compute_id(&back), r.id.clone());
    }
}

#[test]
fn unknown_fields_survive() {
    let r = reports::random_report(&mut rng(7));
    let mut v: serde_json::Value = serde_json::from_str(&to_json(&r)).unwrap();
    v["reviewer_notes"] = serde_json::json!({"a": [1, 2]});
    let back = from_json(&v.to_string()).unwrap();
    assert_eq!(back.extra["reviewer_notes"], serde_json::json!({"a": [1, 2]}));
    let again: serde_json::Value = serde_json::from_str(&to_json(&back)).unwrap();
    assert_eq!(again["reviewer_notes"], v["reviewer_notes"]);
}

#[test]
fn id_ignores_the_id_field() {
    let mut r = reports::random_report(&mut rng(3));
    let id = compute_id(&r);
    r.id = "something else".into();
    assert_eq!(compute_id(&r), id);
    assert_eq!(id.len(), 16);
    assert!(id.bytes().all(|b| b.is_ascii_hexdigit() && !b.is_ascii_uppercase()));
    r.title.push('!');
    assert_ne!(compute_id(&r), id);
}
