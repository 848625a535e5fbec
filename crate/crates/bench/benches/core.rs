use std::hint::black_box;

use atmohub_core::capabilities::parse_capabilities;
use atmohub_core::cql::{evaluate, parse_cql, CqlRecord};
use atmohub_core::semantic::{relevance_texts, score_relevance};
use atmohub_core::stats::jenks_breaks;
use atmohub_core::Vocabulary;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use url::Url;

const NESTED_WMS: &[u8] = include_bytes!("../../../fixtures/capabilities/wms-nested-1.3.0.xml");
const WFS: &[u8] = include_bytes!("../../../fixtures/capabilities/wfs-2.0.0.xml");

fn capabilities(c: &mut Criterion) {
    let url = Url::parse("http://bench.example.org/ows?request=GetCapabilities").unwrap();
    let mut group = c.benchmark_group("parse_capabilities");
    for (name, doc) in [("wms-nested-1.3.0", NESTED_WMS), ("wfs-2.0.0", WFS)] {
        group.bench_function(name, |b| b.iter(|| parse_capabilities(black_box(doc), &url).unwrap()));
    }
    group.finish();
}

fn relevance(c: &mut Criterion) {
    let url = Url::parse("http://bench.example.org/ows?request=GetCapabilities").unwrap();
    let (service, layers) = parse_capabilities(NESTED_WMS, &url).unwrap();
    let texts = relevance_texts(&service, &layers);
    let vocab = Vocabulary::builtin();
    c.bench_function("score_relevance", |b| {
        b.iter(|| score_relevance(black_box(&texts), &vocab, 1))
    });
}

fn cql(c: &mut Criterion) {
    let text = "(title LIKE '%Temperature%' OR subject = 'ozone') AND (format = 'image/png' OR format = 'image/jpeg') \
                AND NOT servicetype = 'WCS' AND BBOX(-180, -90, 180, 90)";
    c.bench_function("parse_cql", |b| b.iter(|| parse_cql(black_box(text)).unwrap()));

    let expr = parse_cql(text).unwrap();
    let mut record = CqlRecord::new();
    record
        .set("title", "Sea Surface Temperature")
        .set("servicetype", "WMS")
        .set_list("format", vec!["image/png".into(), "image/gif".into()]);
    c.bench_function("evaluate_cql", |b| b.iter(|| evaluate(black_box(&expr), &record)));
}

fn jenks(c: &mut Criterion) {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let mut group = c.benchmark_group("jenks_breaks");
    for n in [20usize, 100, 250] {
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(1..500) as f64).collect();
        group.bench_with_input(BenchmarkId::new("k6", n), &values, |b, v| {
            b.iter(|| jenks_breaks(black_box(v), 6).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, capabilities, relevance, cql, jenks);
criterion_main!(benches);
