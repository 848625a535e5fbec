mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use atmohub_core::api::{capabilities_document, search_query_from_params, AppState};
use atmohub_core::{Catalogue, SimulatedWeb, SystemClock};
use common::{get, get_json, send_json, site, TestServer};
use serde_json::{json, Value};

/// A server over the simulated site with the SST and WFS services harvested.
fn populated(token: Option<&str>) -> TestServer {
    let s = site();
    let mut state = Arc::try_unwrap(s.state).ok().expect("state is not shared yet");
    state.api_token = token.map(str::to_string);
    for url in [common::SST_ENDPOINT, common::WFS_ENDPOINT] {
        state.harvest(url).unwrap();
    }
    TestServer::start(Arc::new(state))
}

fn assert_error(resp: (u16, Value), status: u16, code: &str, locator: Option<&str>) {
    let (got, body) = resp;
    assert_eq!(got, status, "{body}");
    assert_eq!(body["code"], code, "{body}");
    assert_eq!(body["locator"].as_str(), locator, "{body}");
    assert!(body["message"].as_str().is_some_and(|m| !m.is_empty()));
}

#[test]
fn get_capabilities_is_static() {
    let s = site();
    let expected = capabilities_document(&s.state.info);
    let server = TestServer::start(s.state.clone());
    let (status, body) = get(
        &server.url("/csw"),
        &[("service", "CSW"), ("request", "GetCapabilities")],
    );
    assert_eq!(status, 200);
    assert_eq!(body, expected);
    let (_, again) = get(&server.url("/csw"), &[("REQUEST", "getcapabilities")]);
    assert_eq!(again, expected);
    roxmltree::Document::parse(&body).unwrap();
}

#[test]
fn csw_parameter_errors() {
    let server = populated(None);
    let csw = server.url("/csw");
    assert_error(get_json(&csw, &[]), 400, "InvalidParameter", Some("request"));
    assert_error(
        get_json(&csw, &[("request", "Transaction")]),
        501,
        "OperationNotSupported",
        Some("request"),
    );
    assert_error(
        get_json(&csw, &[("service", "WMS"), ("request", "GetRecords")]),
        400,
        "InvalidParameter",
        Some("service"),
    );
    for (key, value, locator) in [
        ("constraint", "title LIKE", "constraint"),
        ("constraintLanguage", "FILTER", "constraintLanguage"),
        ("maxRecords", "1001", "maxRecords"),
        ("maxRecords", "many", "maxRecords"),
        ("startPosition", "0", "startPosition"),
    ] {
        assert_error(
            get_json(&csw, &[("request", "GetRecords"), (key, value)]),
            400,
            "InvalidParameter",
            Some(locator),
        );
    }
    assert_error(
        get_json(&csw, &[("request", "GetRecordById")]),
        400,
        "InvalidParameter",
        Some("id"),
    );
    assert_error(
        get_json(&csw, &[("request", "GetRecordById"), ("id", "424242")]),
        404,
        "NotFound",
        None,
    );
}

#[test]
fn get_records_pages_and_formats() {
    let server = populated(None);
    let csw = server.url("/csw");
    let (_, all) = get_json(&csw, &[("request", "GetRecords"), ("outputFormat", "application/json")]);
    assert_eq!(all["numberOfRecordsMatched"], 3);
    assert_eq!(all["nextRecord"], 0);

    let (_, page) = get_json(
        &csw,
        &[
            ("request", "GetRecords"),
            ("outputFormat", "json"),
            ("startPosition", "2"),
            ("maxRecords", "1"),
        ],
    );
    assert_eq!(page["numberOfRecordsReturned"], 1);
    assert_eq!(page["nextRecord"], 3);
    assert_eq!(page["records"][0], all["records"][1]);

    let (status, xml) = get(
        &csw,
        &[("request", "GetRecords"), ("constraint", "serviceType = 'WFS'")],
    );
    assert_eq!(status, 200);
    let doc = roxmltree::Document::parse(&xml).unwrap();
    let results = doc.descendants().find(|n| n.has_tag_name("SearchResults")).unwrap();
    assert_eq!(results.attribute("numberOfRecordsMatched"), Some("2"));
    assert_eq!(doc.descendants().filter(|n| n.has_tag_name("Record")).count(), 2);

    let id = all["records"][0]["identifier"].as_str().unwrap();
    let (status, record) = get_json(
        &csw,
        &[("request", "GetRecordById"), ("id", id), ("outputFormat", "json")],
    );
    assert_eq!(status, 200);
    assert_eq!(record, all["records"][0]);
    let source = record["source"].as_str().unwrap();
    let references = record["references"].as_str().unwrap();
    assert!(source.to_lowercase().contains("getcapabilities"));
    assert!(!references.to_lowercase().contains("getcapabilities"));
}

#[test]
fn search_endpoint() {
    let server = populated(None);
    let url = server.url("/search");
    let (status, page) = get_json(&url, &[("q", "sea surface"), ("limit", "5")]);
    assert_eq!(status, 200);
    assert_eq!(page["total"], 1);
    let hit = &page["results"][0];
    assert_eq!(hit["title"], "Sea Surface Temperature");
    assert!(hit["thumbnailUrl"].as_str().unwrap().contains("GetMap"));

    let (_, page) = get_json(&url, &[("bbox", "-180,-90,180,90"), ("limit", "1"), ("offset", "1")]);
    assert_eq!(page["offset"], 1);
    assert_eq!(page["results"].as_array().unwrap().len(), 1);

    assert_error(
        get_json(&url, &[("limit", "0")]),
        400,
        "InvalidParameter",
        Some("limit"),
    );
    assert_error(
        get_json(&url, &[("limit", "1001")]),
        400,
        "InvalidParameter",
        Some("limit"),
    );
    assert_error(
        get_json(&url, &[("bbox", "1,2,3")]),
        400,
        "InvalidParameter",
        Some("bbox"),
    );
    assert_error(
        get_json(&url, &[("timeStart", "2001")]),
        400,
        "InvalidParameter",
        Some("timeEnd"),
    );
    assert_error(get_json(&url, &[("cql", "a = ")]), 400, "InvalidParameter", Some("cql"));
}

#[test]
fn search_parameters_are_parsed() {
    let p = |pairs: &[(&str, &str)]| pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    let q = search_query_from_params(&p(&[
        ("formats", "image/png, image/jpeg,"),
        ("srs", "EPSG:4326"),
        ("offset", "4"),
    ]))
    .unwrap();
    assert_eq!(q.formats, Some(vec!["image/png".to_string(), "image/jpeg".to_string()]));
    assert_eq!((q.offset, q.limit), (4, 20));
    assert!(search_query_from_params(&p(&[("offset", "-1")])).is_err());
}

#[test]
fn stats_endpoints() {
    let server = populated(None);
    let (status, countries) = get_json(&server.url("/stats/countries"), &[("k", "3")]);
    assert_eq!(status, 200);
    assert_eq!(countries["requestedK"], 3);
    assert_eq!(countries["k"], 1);
    assert_eq!(countries["fallback"], true);
    let total: u64 = countries["countries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["count"].as_u64().unwrap())
        .sum();
    assert_eq!(total, 2);

    let (_, providers) = get_json(&server.url("/stats/providers"), &[("n", "1")]);
    assert_eq!(providers.as_array().unwrap().len(), 1);
    let (_, de) = get_json(&server.url("/stats/providers"), &[("country", "de")]);
    assert_eq!(de.as_array().unwrap().len(), 1);

    assert_error(
        get_json(&server.url("/stats/providers"), &[("n", "0")]),
        400,
        "InvalidParameter",
        Some("n"),
    );
    assert_error(
        get_json(&server.url("/stats/countries"), &[("k", "0")]),
        400,
        "InvalidParameter",
        Some("k"),
    );
}

#[test]
fn routing_errors() {
    let server = populated(None);
    assert_error(get_json(&server.url("/nope"), &[]), 404, "NotFound", None);
    assert_error(
        get_json(&server.url("/harvest"), &[]),
        501,
        "OperationNotSupported",
        None,
    );
    assert_error(get_json(&server.url("/crawl/unknown-task"), &[]), 404, "NotFound", None);
    assert_error(
        send_json("DELETE", &server.url("/crawl/unknown-task"), &json!(null), None),
        404,
        "NotFound",
        None,
    );
}

#[test]
fn write_operations_need_the_token() {
    let server = populated(Some("s3cret"));
    let body = json!({ "url": common::SST_ENDPOINT });
    assert_error(
        send_json("POST", &server.url("/harvest"), &body, None),
        401,
        "Unauthorized",
        None,
    );
    assert_error(
        send_json("POST", &server.url("/harvest"), &body, Some("wrong")),
        401,
        "Unauthorized",
        None,
    );
    assert_error(
        send_json(
            "POST",
            &server.url("/crawl"),
            &json!({"seedUrls": [common::PORTAL]}),
            None,
        ),
        401,
        "Unauthorized",
        None,
    );
    assert_error(
        get_json(
            &server.url("/csw"),
            &[("request", "Harvest"), ("source", common::SST_ENDPOINT)],
        ),
        401,
        "Unauthorized",
        None,
    );

    let (status, summary) = send_json("POST", &server.url("/harvest"), &body, Some("s3cret"));
    assert_eq!(status, 200, "{summary}");
    assert_eq!(
        (summary["accepted"].as_u64(), summary["layersAdded"].as_u64()),
        (Some(1), Some(0))
    );

    let resp = agent_get_with_token(
        &server.url("/csw"),
        "s3cret",
        &[("request", "Harvest"), ("source", common::WFS_ENDPOINT)],
    );
    assert_eq!(resp.0, 200);
    assert!(
        resp.1.contains("<csw:totalInserted>0</csw:totalInserted>"),
        "{}",
        resp.1
    );
    assert!(resp.1.contains("<csw:totalUpdated>2</csw:totalUpdated>"), "{}", resp.1);
}

fn agent_get_with_token(url: &str, token: &str, query: &[(&str, &str)]) -> (u16, String) {
    let mut req = common::agent()
        .get(url)
        .header("authorization", &format!("Bearer {token}"));
    for (k, v) in query {
        req = req.query(*k, *v);
    }
    let mut resp = req.call().unwrap();
    (resp.status().as_u16(), resp.body_mut().read_to_string().unwrap())
}

#[test]
fn harvest_failures_point_at_the_url() {
    let server = populated(None);
    let post = |url: &str| send_json("POST", &server.url("/harvest"), &json!({ "url": url }), None);
    assert_error(post(common::EXCEPTION_ENDPOINT), 400, "InvalidParameter", Some("url"));
    assert_error(
        post("http://nowhere.example.org/wms"),
        400,
        "InvalidParameter",
        Some("url"),
    );
    assert_error(post("not a url"), 400, "InvalidParameter", Some("url"));
    assert_error(
        send_json("POST", &server.url("/harvest"), &json!({ "link": "x" }), None),
        400,
        "InvalidParameter",
        Some("body"),
    );
    let (status, terrain) = post(common::WCS_ENDPOINT);
    assert_eq!(status, 200);
    assert_eq!(terrain["rejected"], 1);
}

#[test]
fn crawl_task_lifecycle() {
    let server = TestServer::start(site().state);
    let crawl = server.url("/crawl");
    assert_error(
        send_json("POST", &crawl, &json!({}), None),
        400,
        "InvalidParameter",
        Some("keywords"),
    );
    assert_error(
        send_json("POST", &crawl, &json!({"seedUrls": ["ftp://x"]}), None),
        400,
        "InvalidParameter",
        Some("seedUrls"),
    );
    assert_error(
        send_json("POST", &crawl, &json!({"seedUrls": [], "depth": 2}), None),
        400,
        "InvalidParameter",
        Some("body"),
    );

    let (status, task) = send_json(
        "POST",
        &crawl,
        &json!({"seedUrls": [common::PORTAL], "perHostDelayMs": 100}),
        None,
    );
    assert_eq!(status, 202);
    let id = task["taskId"].as_str().unwrap().to_string();
    let status_url = server.url(&format!("/crawl/{id}"));
    let started = Instant::now();
    let done = loop {
        let (_, s) = get_json(&status_url, &[]);
        if s["state"] == "Done" {
            break s;
        }
        assert!(started.elapsed() < Duration::from_secs(30), "{s}");
        std::thread::sleep(Duration::from_millis(10));
    };
    assert_eq!(done["report"]["servicesIngested"], 2);
    assert_eq!(done["spec"]["maxDepth"], 3);

    // Cancelling a finished task leaves it as it was.
    let (status, after) = send_json("DELETE", &status_url, &json!(null), None);
    assert_eq!(status, 200);
    assert_eq!(after, done);
}

#[test]
fn running_crawls_can_be_cancelled() {
    // Real time and a one-second politeness delay keep this crawl busy.
    let clock = Arc::new(SystemClock);
    let web = Arc::new(
        SimulatedWeb::from_manifest(&common::fixture("web/site.toml"))
            .unwrap()
            .with_clock(clock.clone()),
    );
    let state = AppState::new(Arc::new(Catalogue::open_in_memory().unwrap()), web, clock);
    let server = TestServer::start(Arc::new(state));
    let (_, task) = send_json(
        "POST",
        &server.url("/crawl"),
        &json!({"seedUrls": [common::PORTAL], "perHostDelayMs": 1000}),
        None,
    );
    let url = server.url(&format!("/crawl/{}", task["taskId"].as_str().unwrap()));
    std::thread::sleep(Duration::from_millis(200));
    let (status, cancelled) = send_json("DELETE", &url, &json!(null), None);
    assert_eq!(status, 200);
    assert_eq!(cancelled["state"], "Aborted");
    let (_, later) = get_json(&url, &[]);
    assert_eq!(later["state"], "Aborted");
    assert!(later["report"]["pagesVisited"].as_u64().unwrap() < 10);
}
