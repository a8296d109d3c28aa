mod support;

use audiology_core::chart::{render_exam_chart, AudiogramSelection, Canvas, ChartKind, EarFilter};
use audiology_core::metrics::exam_metrics;
use audiology_core::report::{build_report, export_html, export_pdf, PageSize, PdfOptions};
use audiology_core::{sample, Category, ExamAggregate, ExamKey, PureToneCategory, Record};
use audiology_store::SearchCriteria;
use axum::http::{Method, StatusCode};
use chrono::NaiveDate;
use serde_json::json;
use support::{pinned, Harness, PASSWORD, USER};

fn key() -> ExamKey {
    ExamKey::new("P-100", NaiveDate::from_ymd_opt(2024, 2, 14).unwrap())
}

fn exam_uri(key: &ExamKey) -> String {
    format!("/patients/{}/exams/{}", key.patient_id, key.exam_date)
}

async fn put_all(h: &Harness, token: &str, agg: &ExamAggregate) {
    for record in agg.records() {
        let uri = format!("{}/{}", exam_uri(&record.key().clone()), record.category().slug());
        let r = h.put(&uri, token, record.to_json()).await;
        assert_eq!(r.status, StatusCode::OK, "{uri}: {}", r.text());
        assert_eq!(r.json(), record.to_json());
    }
}

#[tokio::test]
async fn health_needs_no_session() {
    let h = Harness::new();
    let r = h.call(Method::GET, "/health", None, None).await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.json()["status"], "ok");
}

#[tokio::test]
async fn protected_routes_reject_missing_or_bad_tokens() {
    let h = Harness::new();
    let uri = exam_uri(&key());
    let r = h.call(Method::GET, &uri, None, None).await;
    assert_eq!(r.status, StatusCode::UNAUTHORIZED);
    assert_eq!(r.json()["code"], "unauthorized");
    let r = h.get(&uri, "not-a-token").await;
    assert_eq!(r.status, StatusCode::UNAUTHORIZED);
}

#[tokio::test]
async fn login_logout_cycle() {
    let h = Harness::new();
    let first = h.register().await;
    let again = h
        .call(Method::POST, "/auth/register", None, Some(json!({ "username": USER, "password": PASSWORD })))
        .await;
    assert_eq!(again.status, StatusCode::CONFLICT);

    let wrong = h
        .call(Method::POST, "/auth/login", None, Some(json!({ "username": USER, "password": "wrong password" })))
        .await;
    assert_eq!(wrong.status, StatusCode::UNAUTHORIZED);
    let unknown = h
        .call(Method::POST, "/auth/login", None, Some(json!({ "username": "nobody", "password": PASSWORD })))
        .await;
    assert_eq!(unknown.status, StatusCode::NOT_FOUND);

    let ok = h
        .call(Method::POST, "/auth/login", None, Some(json!({ "username": USER, "password": PASSWORD })))
        .await;
    assert_eq!(ok.status, StatusCode::OK);
    let second = ok.json()["token"].as_str().unwrap().to_string();
    assert_ne!(first, second);
    assert_eq!(h.get("/auth/session", &second).await.json()["username"], USER);

    let out = h.call(Method::POST, "/auth/logout", Some(&second), None).await;
    assert_eq!(out.status, StatusCode::NO_CONTENT);
    assert_eq!(h.get("/auth/session", &second).await.status, StatusCode::UNAUTHORIZED);
    assert_eq!(h.get("/auth/session", &first).await.status, StatusCode::OK);
}

#[tokio::test]
async fn weak_password_and_malformed_bodies() {
    let h = Harness::new();
    let r = h
        .call(Method::POST, "/auth/register", None, Some(json!({ "username": USER, "password": "short" })))
        .await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.json()["code"], "password-policy");
    let r = h.call(Method::POST, "/auth/register", None, Some(json!({ "username": USER }))).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn second_user_cannot_open_first_users_store() {
    let h = Harness::new();
    h.register().await;
    let r = h
        .call(Method::POST, "/auth/register", None, Some(json!({ "username": "other", "password": "another password" })))
        .await;
    assert_eq!(r.status, StatusCode::CREATED);
    assert_eq!(r.json()["store_access"], false);
    assert!(r.json()["token"].is_null());
    let r = h
        .call(Method::POST, "/auth/login", None, Some(json!({ "username": "other", "password": "another password" })))
        .await;
    assert_eq!(r.status, StatusCode::FORBIDDEN);
    assert_eq!(r.json()["code"], "store-key-mismatch");
}

#[tokio::test]
async fn responses_match_direct_module_calls() {
    let h = Harness::new();
    let token = h.register().await;
    let key = key();
    let agg = sample::full_exam(&key);
    put_all(&h, &token, &agg).await;

    let store = h.state.store().unwrap();
    let stored = store.get_exam(&key).unwrap();
    assert_eq!(stored, agg);

    let uri = exam_uri(&key);
    let r = h.get(&uri, &token).await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.json(), serde_json::to_value(&stored).unwrap());

    for category in Category::ALL {
        let r = h.get(&format!("{uri}/{}", category.slug()), &token).await;
        assert_eq!(r.json(), stored.get(category).unwrap().to_json(), "{category:?}");
    }

    let r = h.get(&format!("{uri}/metrics"), &token).await;
    assert_eq!(r.json(), serde_json::to_value(exam_metrics(&stored).unwrap()).unwrap());

    for kind in ChartKind::ALL {
        let direct = render_exam_chart(&stored, kind, &AudiogramSelection::all(), Canvas::default()).unwrap();
        let r = h.get(&format!("{uri}/charts/{}.svg", kind.slug()), &token).await;
        assert_eq!(r.content_type.as_deref(), Some("image/svg+xml"));
        assert_eq!(r.text(), direct.svg);
        let r = h.get(&format!("{uri}/charts/{}.json", kind.slug()), &token).await;
        let body = r.json();
        assert_eq!(body["svg"], direct.svg);
        assert_eq!(body["symbol_inventory"], serde_json::to_value(&direct.symbol_inventory).unwrap());
    }

    let selection = AudiogramSelection::new(EarFilter::Left, [PureToneCategory::AcUnmasked, PureToneCategory::BcUnmasked]);
    let canvas = Canvas { width: 640, height: 480 };
    let direct = render_exam_chart(&stored, ChartKind::Audiogram, &selection, canvas).unwrap();
    let r = h
        .get(&format!("{uri}/charts/audiogram.svg?ears=left&categories=ac_unmasked,bc_unmasked&width=640&height=480"), &token)
        .await;
    assert_eq!(r.text(), direct.svg);

    let report = build_report(&stored, pinned()).unwrap();
    let r = h.get(&format!("{uri}/report.pdf"), &token).await;
    assert_eq!(r.content_type.as_deref(), Some("application/pdf"));
    assert_eq!(r.body, export_pdf(&report, &PdfOptions::default()));
    let r = h.get(&format!("{uri}/report.pdf?page_size=letter"), &token).await;
    assert_eq!(r.body, export_pdf(&report, &PdfOptions { page_size: PageSize::Letter }));
    let r = h.get(&format!("{uri}/report.html"), &token).await;
    assert_eq!(r.text(), export_html(&report));

    let r = h.get("/search?name_substring=smith", &token).await;
    let direct = store
        .search(&SearchCriteria { name_substring: Some("smith".into()), ..Default::default() })
        .unwrap();
    assert_eq!(r.json(), serde_json::to_value(direct).unwrap());
    assert_eq!(r.json().as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn failed_put_leaves_prior_state_readable() {
    let h = Harness::new();
    let token = h.register().await;
    let key = key();
    let agg = sample::full_exam(&key);
    put_all(&h, &token, &agg).await;
    let uri = exam_uri(&key);
    let before = h.get(&uri, &token).await.json();

    // Out-of-range threshold.
    let mut bad = agg.get(Category::AcUnmasked).unwrap().to_json();
    bad["series"][0]["points"]["500"] = json!(500);
    let r = h.put(&format!("{uri}/ac_unmasked"), &token, bad).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY, "{}", r.text());

    // Structurally broken.
    let r = h.put(&format!("{uri}/caloric"), &token, json!({ "nonsense": true })).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.json()["code"], "malformed-record");

    // Key in the body disagrees with the path.
    let other = ExamKey::new("P-999", key.exam_date);
    let r = h.put(&format!("{uri}/patient"), &token, Record::from(sample::patient(&other, "X")).to_json()).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.json()["code"], "key-mismatch");

    // Pure-tone body under the wrong table.
    let r = h
        .put(&format!("{uri}/bc_masked"), &token, agg.get(Category::AcUnmasked).unwrap().to_json())
        .await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);

    assert_eq!(h.get(&uri, &token).await.json(), before);
}

#[tokio::test]
async fn saving_air_conduction_refreshes_the_disability_snapshot() {
    let h = Harness::new();
    let token = h.register().await;
    let key = key();
    let uri = exam_uri(&key);
    let ac = sample::ac_unmasked(&key);
    let r = h.put(&format!("{uri}/ac_unmasked"), &token, Record::from(ac).to_json()).await;
    assert_eq!(r.status, StatusCode::OK);
    let snap = h.get(&format!("{uri}/hearing_disability"), &token).await.json();
    assert_eq!(snap["metrics"]["impairment_right_pct"], 30.0);
    assert_eq!(snap["metrics"]["impairment_left_pct"], 60.0);
    assert_eq!(snap["metrics"]["disability_pct"], 35.0);
}

#[tokio::test]
async fn missing_things() {
    let h = Harness::new();
    let token = h.register().await;
    let uri = exam_uri(&key());

    let r = h.get(&uri, &token).await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.json(), serde_json::to_value(ExamAggregate::empty(key())).unwrap());

    assert_eq!(h.get(&format!("{uri}/patient"), &token).await.status, StatusCode::NOT_FOUND);
    let r = h.get(&format!("{uri}/no_such_table"), &token).await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    assert_eq!(r.json()["code"], "unknown-category");
    assert_eq!(h.get(&format!("{uri}/metrics"), &token).await.status, StatusCode::NOT_FOUND);
    assert_eq!(h.get(&format!("{uri}/report.pdf"), &token).await.status, StatusCode::NOT_FOUND);
    assert_eq!(h.get("/patients/P-1/exams/2024-13-40", &token).await.status, StatusCode::UNPROCESSABLE_ENTITY);

    let p = Record::from(sample::patient(&key(), "Jane Smith"));
    h.put(&format!("{uri}/patient"), &token, p.to_json()).await;
    let r = h.get(&format!("{uri}/charts/calorigram.svg"), &token).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.json()["code"], "incomplete-data");
    assert_eq!(h.get(&format!("{uri}/charts/pie.svg"), &token).await.status, StatusCode::NOT_FOUND);
    assert_eq!(h.get(&format!("{uri}/charts/audiogram.png"), &token).await.status, StatusCode::NOT_FOUND);
    let r = h.get(&format!("{uri}/charts/audiogram.svg?width=10"), &token).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    let r = h.get(&format!("{uri}/charts/audiogram.svg?ears=middle"), &token).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);

    let r = h.get("/search", &token).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.json()["code"], "validation-failed");
    let r = h.get("/search?date_from=yesterday", &token).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn delete_is_idempotent_over_http() {
    let h = Harness::new();
    let token = h.register().await;
    let key = key();
    put_all(&h, &token, &sample::full_exam(&key)).await;
    let uri = exam_uri(&key);
    let r = h.call(Method::DELETE, &uri, Some(&token), None).await;
    assert_eq!(r.json(), json!({ "rows_removed": 17 }));
    let r = h.call(Method::DELETE, &uri, Some(&token), None).await;
    assert_eq!(r.json(), json!({ "rows_removed": 0 }));
    assert_eq!(h.get(&format!("{uri}/patient"), &token).await.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn root_serves_static_assets_or_placeholder() {
    let h = Harness::new();
    let r = h.call(Method::GET, "/", None, None).await;
    assert_eq!(r.status, StatusCode::OK);
    assert!(r.text().contains("<html"));
    let r = h.call(Method::GET, "/nowhere", None, None).await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    assert_eq!(r.json()["code"], "not-found");

    let assets = tempfile::tempdir().unwrap();
    std::fs::write(assets.path().join("index.html"), "<html>ui</html>").unwrap();
    std::fs::write(assets.path().join("app.js"), "console.log(1)").unwrap();
    let h = Harness::with_static(Some(assets.path().to_path_buf()));
    assert_eq!(h.call(Method::GET, "/", None, None).await.text(), "<html>ui</html>");
    assert_eq!(h.call(Method::GET, "/app.js", None, None).await.text(), "console.log(1)");
    assert_eq!(h.call(Method::GET, "/health", None, None).await.json()["status"], "ok");
}

#[tokio::test]
async fn sessions_expire_after_the_ttl() {
    let h = Harness::new();
    let r = h
        .call(Method::POST, "/auth/register", None, Some(json!({ "username": USER, "password": PASSWORD })))
        .await;
    let expires: chrono::DateTime<chrono::Utc> = serde_json::from_value(r.json()["expires_at"].clone()).unwrap();
    assert_eq!(expires, pinned() + chrono::Duration::hours(12));
}
