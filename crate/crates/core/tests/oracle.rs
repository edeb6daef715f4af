mod common;

use std::collections::HashSet;

use capsketch::element::aggregate;
use capsketch::mappers::{map_full_range, map_point, MapperConfig, OutputElement};
use capsketch::oracle::{exact_measurement, exact_statistic, zipf_generate, zipf_rank, MeasurementMode, Zipf};
use capsketch::random::Ordinal;
use capsketch::sketches::{DistinctCounter, MaxDistinctSketch};
use capsketch::transforms::{capping_transform, Statistic};
use capsketch::FrequencyDistribution;
use proptest::prelude::*;

use common::{example, rel};

#[test]
fn exact_statistic_examples() {
    let d = example();
    assert_eq!(exact_statistic(&d, &Statistic::Distinct), 13.0);
    assert_eq!(exact_statistic(&d, &Statistic::Cap { t: 5.0 }), 25.0);
    assert_eq!(exact_statistic(&d, &Statistic::Sum), 30.0);
    let sqrt = 10.0 + 2.0 * 5f64.sqrt() + 10f64.sqrt();
    assert!(rel(exact_statistic(&d, &Statistic::Sqrt), sqrt) < 1e-15);
    assert_eq!(exact_statistic(&FrequencyDistribution::new(), &Statistic::Log1p), 0.0);
}

#[test]
fn exact_measurement_examples() {
    let o = |outkey, value| OutputElement { outkey, value };
    let outs = [o(1, 2.0), o(1, 5.0), o(2, 1.0)];
    assert_eq!(exact_measurement(&outs, MeasurementMode::MaxDistinct), 6.0);
    assert_eq!(exact_measurement(&outs, MeasurementMode::Distinct), 2.0);
    assert_eq!(exact_measurement(&outs, MeasurementMode::Threshold(f64::INFINITY)), 2.0);
    assert_eq!(exact_measurement(&outs, MeasurementMode::Threshold(1.5)), 1.0);
    assert_eq!(exact_measurement(&outs, MeasurementMode::Threshold(0.5)), 0.0);
    assert_eq!(exact_measurement(&[], MeasurementMode::Distinct), 0.0);
}

#[test]
fn large_sketches_match_exact_measurements() {
    let cfg = MapperConfig::new(4, 6).unwrap();
    let elements = zipf_generate(2000, 1.2, 250, 3).unwrap();
    let outs: Vec<OutputElement> = elements
        .iter()
        .enumerate()
        .flat_map(|(i, e)| map_full_range(e, Ordinal::from(i as u64), &cfg).unwrap())
        .collect();
    let distinct = exact_measurement(&outs, MeasurementMode::Distinct);
    assert!(distinct <= 1000.0);
    let (mut dc, mut md) = (DistinctCounter::new(10_000, 1).unwrap(), MaxDistinctSketch::new(10_000, 1).unwrap());
    for o in &outs {
        dc.update(o.outkey);
        md.update(o.outkey, o.value).unwrap();
    }
    assert_eq!(dc.estimate(), distinct);
    assert!(rel(md.estimate(), exact_measurement(&outs, MeasurementMode::MaxDistinct)) < 1e-12);
}

#[test]
fn point_distinct_counts_agree() {
    let cfg = MapperConfig::new(50, 2).unwrap().with_threshold(0.3).unwrap();
    let elements = zipf_generate(5000, 1.5, 1000, 8).unwrap();
    let outs: Vec<OutputElement> = elements
        .iter()
        .enumerate()
        .flat_map(|(i, e)| map_point(e, Ordinal::from(i as u64), &cfg).unwrap())
        .collect();
    let hashed: HashSet<u64> = outs.iter().map(|o| o.outkey).collect();
    assert_eq!(exact_measurement(&outs, MeasurementMode::Distinct), hashed.len() as f64);
}

#[test]
fn cap_matches_capping_reconstruction() {
    let d = example();
    for t in [0.5, 1.0, 3.0, 5.0, 7.5, 10.0, 40.0] {
        let c = capping_transform(&Statistic::Cap { t }).unwrap();
        let via: f64 = d.iter().map(|(w, n)| n as f64 * c.evaluate(w)).sum();
        assert!(rel(via, exact_statistic(&d, &Statistic::Cap { t })) < 1e-9, "T={t}");
    }
}

#[test]
fn zipf_top_key_frequency() {
    let (n, alpha, keys) = (100_000usize, 1.5, capsketch::oracle::ZIPF_KEYS);
    let h: f64 = (1..=keys).map(|i| (i as f64).powf(-alpha)).sum();
    let p1 = 1.0 / h;
    let elements = zipf_generate(n, alpha, keys, 17).unwrap();
    let top = elements.iter().filter(|e| zipf_rank(e.key()) == Some(1)).count() as f64;
    let sigma = (n as f64 * p1 * (1.0 - p1)).sqrt();
    assert!((top - n as f64 * p1).abs() < 3.0 * sigma, "top {top} vs {}", n as f64 * p1);
    assert!(elements.iter().all(|e| e.value() == 1.0));
}

#[test]
fn zipf_edges() {
    let sharp = zipf_generate(1000, 2000.0, 100, 1).unwrap();
    assert!(sharp.iter().all(|e| zipf_rank(e.key()) == Some(1)));
    assert_eq!(zipf_generate(500, 1.1, 1000, 4).unwrap(), zipf_generate(500, 1.1, 1000, 4).unwrap());
    assert_ne!(zipf_generate(500, 1.1, 1000, 4).unwrap(), zipf_generate(500, 1.1, 1000, 5).unwrap());
    assert!(Zipf::new(0.0, 10).is_err());
    assert!(Zipf::new(1.0, 0).is_err());
    let d = aggregate(&zipf_generate(1000, 1.1, 50, 2).unwrap());
    assert!(d.distinct() <= 50);
    assert_eq!(d.sum(), 1000.0);
}

proptest! {
    #[test]
    fn cap_reconstruction_on_random_data(
        pairs in proptest::collection::vec((0.01f64..100.0, 1u64..20), 1..10),
        t in 0.01f64..50.0,
    ) {
        let d = FrequencyDistribution::from_counts(pairs).unwrap();
        let c = capping_transform(&Statistic::Cap { t }).unwrap();
        let via: f64 = d.iter().map(|(w, n)| n as f64 * c.evaluate(w)).sum();
        let want = exact_statistic(&d, &Statistic::Cap { t });
        prop_assert!(rel(via, want) < 1e-9, "{} vs {}", via, want);
    }
}
