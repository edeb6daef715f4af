mod common;

use std::collections::HashMap;

use capsketch::random::mix64;
use capsketch::sketches::{outkey_rank, AllThresholdSketch, DistinctCounter, MaxDistinctSketch, SumCounter};
use capsketch::Error;
use proptest::prelude::*;

use common::{example_elements, Moments};

/// A reproducible output stream: `(outkey, value)` over `universe` outkeys.
fn stream(n: usize, universe: u64, seed: u64) -> Vec<(u64, f64)> {
    let mut s = mix64(seed ^ 0x5eed);
    (0..n)
        .map(|_| {
            s = mix64(s);
            let key = s % universe;
            s = mix64(s);
            let v = 0.01 + (s >> 11) as f64 / (1u64 << 53) as f64 * 10.0;
            (key, v)
        })
        .collect()
}

trait Sketch: Sized {
    fn fresh(k: u32, seed: u64) -> Self;
    fn feed(&mut self, outkey: u64, v: f64);
    fn join(&self, other: &Self) -> Self;
    fn bytes(&self) -> Vec<u8>;
}

impl Sketch for DistinctCounter {
    fn fresh(k: u32, seed: u64) -> Self {
        DistinctCounter::new(k, seed).unwrap()
    }
    fn feed(&mut self, outkey: u64, _: f64) {
        self.update(outkey);
    }
    fn join(&self, other: &Self) -> Self {
        self.merge(other).unwrap()
    }
    fn bytes(&self) -> Vec<u8> {
        self.to_bytes()
    }
}

impl Sketch for MaxDistinctSketch {
    fn fresh(k: u32, seed: u64) -> Self {
        MaxDistinctSketch::new(k, seed).unwrap()
    }
    fn feed(&mut self, outkey: u64, v: f64) {
        self.update(outkey, v).unwrap();
    }
    fn join(&self, other: &Self) -> Self {
        self.merge(other).unwrap()
    }
    fn bytes(&self) -> Vec<u8> {
        self.to_bytes()
    }
}

impl Sketch for AllThresholdSketch {
    fn fresh(k: u32, seed: u64) -> Self {
        AllThresholdSketch::new(k, seed).unwrap()
    }
    fn feed(&mut self, outkey: u64, v: f64) {
        self.update(outkey, v).unwrap();
    }
    fn join(&self, other: &Self) -> Self {
        self.merge(other).unwrap()
    }
    fn bytes(&self) -> Vec<u8> {
        self.to_bytes()
    }
}

impl Sketch for SumCounter {
    fn fresh(_: u32, _: u64) -> Self {
        SumCounter::new()
    }
    fn feed(&mut self, _: u64, v: f64) {
        self.add(v).unwrap();
    }
    fn join(&self, other: &Self) -> Self {
        self.merge(other).unwrap()
    }
    fn bytes(&self) -> Vec<u8> {
        self.to_bytes()
    }
}

fn build<S: Sketch>(items: &[(u64, f64)], k: u32, seed: u64) -> S {
    let mut s = S::fresh(k, seed);
    for &(key, v) in items {
        s.feed(key, v);
    }
    s
}

/// Splits `items` into a random number of random parts, sketches each part
/// and merges the parts in a random tree order.
fn partitioned<S: Sketch>(items: &[(u64, f64)], k: u32, seed: u64, nonce: u64) -> S {
    let mut s = mix64(nonce);
    let parts = 2 + (s % 7) as usize;
    let mut sketches: Vec<S> = (0..parts).map(|_| S::fresh(k, seed)).collect();
    for &(key, v) in items {
        s = mix64(s);
        sketches[(s % parts as u64) as usize].feed(key, v);
    }
    while sketches.len() > 1 {
        s = mix64(s);
        let i = (s % sketches.len() as u64) as usize;
        let a = sketches.swap_remove(i);
        s = mix64(s);
        let j = (s % sketches.len() as u64) as usize;
        sketches[j] = if s & 1 == 0 { a.join(&sketches[j]) } else { sketches[j].join(&a) };
    }
    sketches.pop().unwrap()
}

fn check_partitions<S: Sketch>(name: &str) {
    let items = stream(100_000, 30_000, 1);
    let whole: S = build(&items, 64, 9);
    for nonce in 0..50 {
        let merged: S = partitioned(&items, 64, 9, nonce);
        assert!(merged.bytes() == whole.bytes(), "{name}: partition {nonce}");
    }
}

#[test]
fn merge_of_random_partitions_is_single_pass() {
    check_partitions::<DistinctCounter>("distinct");
    check_partitions::<MaxDistinctSketch>("max-distinct");
    check_partitions::<AllThresholdSketch>("all-threshold");
    check_partitions::<SumCounter>("sum");
}

fn merge_laws<S: Sketch>(a: &[(u64, f64)], b: &[(u64, f64)], c: &[(u64, f64)]) -> std::result::Result<(), TestCaseError> {
    let (sa, sb, sc): (S, S, S) = (build(a, 8, 3), build(b, 8, 3), build(c, 8, 3));
    prop_assert_eq!(sa.join(&sb).bytes(), sb.join(&sa).bytes());
    prop_assert_eq!(sa.join(&sb).join(&sc).bytes(), sa.join(&sb.join(&sc)).bytes());
    prop_assert_eq!(sa.join(&sa).bytes(), sa.bytes());
    // Overlapping content is absorbed.
    let ab: S = build(&[a, b].concat(), 8, 3);
    prop_assert_eq!(ab.join(&sb).bytes(), ab.bytes());
    Ok(())
}

fn items() -> impl Strategy<Value = Vec<(u64, f64)>> {
    proptest::collection::vec((0u64..40, 0.01f64..10.0), 0..60)
}

proptest! {
    #[test]
    fn merge_laws_hold(a in items(), b in items(), c in items()) {
        merge_laws::<DistinctCounter>(&a, &b, &c)?;
        merge_laws::<MaxDistinctSketch>(&a, &b, &c)?;
        merge_laws::<AllThresholdSketch>(&a, &b, &c)?;
    }

    #[test]
    fn sum_merge_is_associative(a in items(), b in items(), c in items()) {
        let (sa, sb, sc): (SumCounter, SumCounter, SumCounter) = (build(&a, 2, 0), build(&b, 2, 0), build(&c, 2, 0));
        prop_assert_eq!(sa.join(&sb), sb.join(&sa));
        prop_assert_eq!(sa.join(&sb).join(&sc), sa.join(&sb.join(&sc)));
    }

    #[test]
    fn at_estimate_is_monotone(a in items(), t1 in 0.0f64..12.0, dt in 0.0f64..12.0) {
        let s: AllThresholdSketch = build(&a, 5, 11);
        prop_assert!(s.estimate(t1) <= s.estimate(t1 + dt));
    }

    #[test]
    fn md_estimate_grows_with_values(a in items(), pick in any::<prop::sample::Index>(), bump in 0.0f64..20.0) {
        prop_assume!(!a.is_empty());
        let mut s: MaxDistinctSketch = build(&a, 5, 11);
        let before = s.estimate();
        let (key, v) = a[pick.index(a.len())];
        s.update(key, v + bump).unwrap();
        prop_assert!(s.estimate() >= before);
    }

    #[test]
    fn at_matches_brute_force_retention(a in proptest::collection::vec((0u64..200, 0.01f64..10.0), 0..300)) {
        let k = 6;
        let s: AllThresholdSketch = build(&a, k, 2);
        let mut min_y: HashMap<u64, f64> = HashMap::new();
        for &(key, y) in &a {
            let e = min_y.entry(key).or_insert(y);
            *e = e.min(y);
        }
        let rank = |key: u64| outkey_rank(key, 2);
        let mut want: Vec<(u64, f64)> = min_y
            .iter()
            .filter(|&(&key, &y)| {
                min_y.iter().filter(|&(&o, &yo)| o != key && yo <= y && rank(o) < rank(key)).count() < k as usize
            })
            .map(|(&key, &y)| (key, y))
            .collect();
        want.sort_by(|x, y| x.0.cmp(&y.0));
        let mut got: Vec<(u64, f64)> = s.entries().iter().map(|e| (e.outkey, e.y)).collect();
        got.sort_by(|x, y| x.0.cmp(&y.0));
        prop_assert_eq!(got, want);
        // Below k keys the estimate is the exact count.
        for t in [0.5, 2.0, 5.0, 10.0] {
            let exact = min_y.values().filter(|&&y| y <= t).count();
            if exact < k as usize {
                prop_assert_eq!(s.estimate(t), exact as f64);
            }
        }
    }

    #[test]
    fn serialization_round_trips(a in items()) {
        let dc: DistinctCounter = build(&a, 8, 5);
        prop_assert_eq!(&DistinctCounter::from_bytes(&dc.to_bytes()).unwrap(), &dc);
        let md: MaxDistinctSketch = build(&a, 8, 5);
        prop_assert_eq!(&MaxDistinctSketch::from_bytes(&md.to_bytes()).unwrap(), &md);
        let at: AllThresholdSketch = build(&a, 8, 5);
        prop_assert_eq!(&AllThresholdSketch::from_bytes(&at.to_bytes()).unwrap(), &at);
        let sum: SumCounter = build(&a, 8, 5);
        prop_assert_eq!(SumCounter::from_bytes(&sum.to_bytes()).unwrap(), sum);
    }
}

#[test]
fn distinct_examples() {
    let mut dc = DistinctCounter::new(100, 0).unwrap();
    for key in [1, 2, 3, 4, 5, 3, 1] {
        dc.update(key);
    }
    assert_eq!(dc.estimate(), 5.0);
    assert!(dc.is_exact());

    let (n, k) = (10_000u64, 100);
    let mut m = Moments::default();
    for trial in 0..200 {
        let mut dc = DistinctCounter::new(k, trial).unwrap();
        for key in 0..n {
            dc.update(key);
        }
        m.push(dc.estimate());
    }
    let sigma = n as f64 / 98f64.sqrt();
    assert!((m.mean() - n as f64).abs() < 3.0 * sigma);
    assert!(m.z(n as f64) < 4.0, "mean {}", m.mean());
}

#[test]
fn max_distinct_examples() {
    let mut md = MaxDistinctSketch::new(3, 0).unwrap();
    for (key, v) in [(1, 3.0), (1, 7.0), (2, 2.0)] {
        md.update(key, v).unwrap();
    }
    assert_eq!(md.estimate(), 9.0);

    let (n, k) = (10_000u64, 100);
    let (mut plain, mut weighted) = (Moments::default(), Moments::default());
    let mut total = 0.0;
    for trial in 0..200 {
        let mut md = MaxDistinctSketch::new(k, 1000 + trial).unwrap();
        total = 0.0;
        for key in 0..n {
            let m = 1.0 + (mix64(key ^ 0xabc) >> 11) as f64 / (1u64 << 53) as f64;
            total += m;
            md.update(key, m).unwrap();
        }
        plain.push(md.estimate());
        weighted.push(md.estimate_weighted());
    }
    let sigma = total / 98f64.sqrt();
    assert!((plain.mean() - total).abs() < 3.0 * sigma, "plain {}", plain.mean());
    assert!((weighted.mean() - total).abs() < 3.0 * sigma, "weighted {}", weighted.mean());
    assert!(weighted.z(total) < 4.0, "weighted {} vs {total}", weighted.mean());
}

#[test]
fn unit_values_reduce_to_distinct_count() {
    for (n, k) in [(30u64, 64u32), (5000, 64)] {
        let mut dc = DistinctCounter::new(k, 4).unwrap();
        let mut md = MaxDistinctSketch::new(k, 4).unwrap();
        for key in 0..n {
            dc.update(key);
            md.update(key, 1.0).unwrap();
        }
        let dc_keys: Vec<u64> = dc.entries().iter().map(|e| e.outkey).collect();
        let md_keys: Vec<u64> = md.entries().iter().map(|e| e.outkey).collect();
        assert_eq!(dc_keys, md_keys);
        assert!((md.estimate_weighted() - dc.estimate()).abs() < 1e-9 * dc.estimate());
        if n < k as u64 {
            assert_eq!(md.estimate(), dc.estimate());
        }
    }
}

#[test]
fn all_threshold_edges_and_staircase() {
    let k = 100;
    let mut m2 = Moments::default();
    for trial in 0..100 {
        let mut at = AllThresholdSketch::new(k, trial).unwrap();
        let mut dc = DistinctCounter::new(k, trial).unwrap();
        for key in 0..100u64 {
            at.update(key, 1.0).unwrap();
            dc.update(key);
        }
        for key in 100..10_100u64 {
            at.update(key, 2.0).unwrap();
            dc.update(key);
        }
        assert_eq!(at.estimate(0.5), 0.0);
        // All 100 keys at y = 1 are retained. With c = k the estimator is
        // used, since k retained keys is also what any larger set leaves.
        assert_eq!(at.entries().iter().filter(|e| e.y <= 1.0).count(), 100);
        let sigma1 = 100.0 / 98f64.sqrt();
        assert!((at.estimate(1.0) - 100.0).abs() < 3.0 * sigma1);
        let mut small = AllThresholdSketch::new(k, trial).unwrap();
        for key in 1..100u64 {
            small.update(key, 1.0).unwrap();
        }
        for key in 100..10_100u64 {
            small.update(key, 2.0).unwrap();
        }
        assert_eq!(small.estimate(1.0), 99.0);
        assert_eq!(at.estimate(3.0), dc.estimate());
        m2.push(at.estimate(2.0));
        if trial == 0 {
            let sigma = 10_100.0 / 98f64.sqrt();
            assert!((at.estimate(2.0) - 10_100.0).abs() < 3.0 * sigma);
        }
    }
    assert!(m2.z(10_100.0) < 4.0, "mean {}", m2.mean());
}

#[test]
fn sum_examples() {
    let mut s = SumCounter::new();
    assert_eq!(s.value(), 0.0);
    for e in example_elements() {
        s.add(e.value()).unwrap();
    }
    assert_eq!(s.value(), 30.0);

    let (mut a, mut b) = (SumCounter::new(), SumCounter::new());
    a.add(12.0).unwrap();
    b.add(18.0).unwrap();
    assert_eq!(a.merge(&b).unwrap().value(), 30.0);

    let mut big = SumCounter::new();
    big.add(5e18).unwrap();
    assert_eq!(big.add(5e18), Err(Error::Overflow));
    assert!(SumCounter::new().add(-1.0).is_err());
}

#[test]
fn incompatible_and_corrupt_sketches() {
    let a = DistinctCounter::new(8, 1).unwrap();
    assert!(matches!(a.merge(&DistinctCounter::new(9, 1).unwrap()), Err(Error::Incompatible(_))));
    assert!(matches!(a.merge(&DistinctCounter::new(8, 2).unwrap()), Err(Error::Incompatible(_))));
    let md = MaxDistinctSketch::new(8, 1).unwrap();
    assert!(matches!(md.merge(&MaxDistinctSketch::new(8, 2).unwrap()), Err(Error::Incompatible(_))));
    let at = AllThresholdSketch::new(8, 1).unwrap();
    assert!(matches!(at.merge(&AllThresholdSketch::new(4, 1).unwrap()), Err(Error::Incompatible(_))));

    let full: DistinctCounter = build(&stream(100, 50, 3), 8, 1);
    let bytes = full.to_bytes();
    assert!(matches!(DistinctCounter::from_bytes(&bytes[..bytes.len() - 1]), Err(Error::Decode(_))));
    assert!(matches!(MaxDistinctSketch::from_bytes(&bytes), Err(Error::Decode(_))));
    let mut bad = bytes.clone();
    bad[0] ^= 0xff;
    assert!(matches!(DistinctCounter::from_bytes(&bad), Err(Error::Decode(_))));
}
