use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sst::config::{expand_preset, PresetId, ScenarioConfig};
use sst::graphgen::SocialGraph;
use sst::metrics::{
    duration_series, files_per_user, files_per_user_until, non_friend_upload_series, pearson, read_download_records,
    sat_correlations, traffic_split, write_download_records, write_durations, DownloadRecord,
};
use sst::protocol::{read_transfer_log, write_transfer_log, TransferKind};
use sst::runner::simulate;

fn rec(peer: u32, req: u64, done: u64) -> DownloadRecord {
    DownloadRecord {
        peer_id: peer,
        item_id: 0,
        request_time: req,
        completion_time: done,
        bytes_from_friends: 0,
        bytes_from_non_friends: 1,
        bytes_from_broadcast_cache: 0,
        was_prefetch: false,
    }
}

#[test]
fn pearson_against_exact_integer_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x: Vec<i64> = (0..20).map(|_| rng.random_range(-50..50)).collect();
    let y: Vec<i64> = x.iter().map(|&v| 3 * v + rng.random_range(-40..40)).collect();
    let n = 20i128;
    let sx: i128 = x.iter().map(|&v| v as i128).sum();
    let sy: i128 = y.iter().map(|&v| v as i128).sum();
    let sxx: i128 = x.iter().map(|&v| (v * v) as i128).sum();
    let syy: i128 = y.iter().map(|&v| (v * v) as i128).sum();
    let sxy: i128 = x.iter().zip(&y).map(|(&a, &b)| (a * b) as i128).sum();
    let num = (n * sxy - sx * sy) as f64;
    let den = (((n * sxx - sx * sx) as f64) * ((n * syy - sy * sy) as f64)).sqrt();
    let want = num / den;
    let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
    let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
    let got = pearson(&xf, &yf).unwrap();
    assert!((got - want).abs() < 1e-12, "{got} vs {want}");
}

#[test]
fn pearson_undefined_cases() {
    assert_eq!(pearson(&[1.0, 2.0], &[1.0]), None);
    assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), None);
    let g = SocialGraph::path(3);
    let same: Vec<_> = (0..3).map(|p| rec(p, 0, 40)).collect();
    assert_eq!(sat_correlations(&same, &g), (None, None));
}

proptest! {
    #[test]
    fn pearson_symmetric_and_affine_invariant(
        pts in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 3..40),
        scale in 0.1f64..10.0,
        shift in -100.0f64..100.0,
    ) {
        let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
        if let Some(r) = pearson(&x, &y) {
            prop_assert!((-1.0..=1.0).contains(&r));
            prop_assert!((pearson(&y, &x).unwrap() - r).abs() < 1e-9);
            let xs: Vec<f64> = x.iter().map(|v| v * scale + shift).collect();
            prop_assert!((pearson(&xs, &y).unwrap() - r).abs() < 1e-6);
        }
    }
}

#[test]
fn duration_buckets_match_spreadsheet_recount() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut records = Vec::new();
    for i in 0..50 {
        let req = rng.random_range(0..20_000);
        let done = req + rng.random_range(0..5000);
        let mut r = rec(i % 7, req, done);
        r.was_prefetch = i % 9 == 0;
        records.push(r);
    }
    let width = 3600;
    // Bucket k holds completions in (k·w, (k+1)·w]; time 0 goes to bucket 0.
    let mut sums: BTreeMap<u64, (u64, u64)> = BTreeMap::new();
    for r in records.iter().filter(|r| !r.was_prefetch) {
        let k = if r.completion_time == 0 { 0 } else { (r.completion_time + width - 1) / width - 1 };
        let e = sums.entry(k).or_default();
        e.0 += r.completion_time - r.request_time;
        e.1 += 1;
    }
    let series = duration_series(&records, width);
    assert_eq!(series.len() as u64, sums.keys().max().unwrap() + 1);
    for (k, p) in series.iter().enumerate() {
        assert_eq!(p.bucket_end_time, (k as u64 + 1) * width);
        match sums.get(&(k as u64)) {
            Some(&(s, c)) => {
                assert_eq!(p.completed_count, c);
                assert_eq!(p.mean_duration_seconds, Some(s as f64 / c as f64));
            }
            None => assert_eq!((p.completed_count, p.mean_duration_seconds), (0, None)),
        }
    }
}

#[test]
fn empty_bucket_written_as_nan() {
    let series = duration_series(&[rec(0, 0, 10), rec(0, 7300, 7400)], 3600);
    let mut out = Vec::new();
    write_durations(&series, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().nth(2), Some("7200,nan,0"));
}

fn desk_world() -> sst::simcore::World {
    let mut c = expand_preset(PresetId::C, &ScenarioConfig::default());
    c.node_count = 200;
    c.duration_s = 4 * 3600;
    c.wait_mean_s = 1800.0;
    simulate(&c).unwrap()
}

#[test]
fn series_recomputed_from_persisted_log_and_records() {
    let w = desk_world();
    let mut buf = Vec::new();
    write_transfer_log(&w.log, &mut buf).unwrap();
    let log = read_transfer_log(buf.as_slice()).unwrap();
    assert_eq!(log, w.log);

    // Filter-and-sum replay of the non-friend series.
    let series = non_friend_upload_series(&log, 3600);
    let mut per_bucket = vec![0u64; series.len()];
    for r in &log {
        if r.kind != TransferKind::Broadcast && !r.friend {
            per_bucket[((r.time.max(1) - 1) / 3600) as usize] += r.bytes;
        }
    }
    assert_eq!(series.iter().map(|p| p.non_friend_bytes).collect::<Vec<_>>(), per_bucket);
    assert!(per_bucket.iter().sum::<u64>() > 0);

    let (friend, non_friend, sat) = traffic_split(&log);
    assert_eq!(friend + non_friend + sat, log.iter().map(|r| r.bytes).sum::<u64>());
    assert_eq!(non_friend, per_bucket.iter().sum::<u64>());

    let mut buf = Vec::new();
    write_download_records(&w.records, &mut buf).unwrap();
    let records = read_download_records(buf.as_slice()).unwrap();
    assert_eq!(records, w.records);
}

#[test]
fn files_per_user_recount() {
    assert_eq!(files_per_user(&[], 10), 0.0);
    let w = desk_world();
    let users = w.user_count();
    let mut tally = vec![0u64; users];
    for r in w.records.iter().filter(|r| !r.was_prefetch) {
        tally[r.peer_id as usize] += 1;
    }
    let want = tally.iter().sum::<u64>() as f64 / users as f64;
    assert_eq!(files_per_user(&w.records, users), want);
    let series = files_per_user_until(&w.records, users, 3600, Some(w.config.duration_s));
    assert_eq!(series.len(), 4);
    assert_eq!(series.last().unwrap().1, want);
    assert!(series.windows(2).all(|p| p[0].1 <= p[1].1));
}

#[test]
fn all_buddy_swarm_has_no_non_friend_bytes() {
    let w = desk_world();
    let friends_only: Vec<_> = w.log.iter().filter(|r| r.friend).cloned().collect();
    assert!(non_friend_upload_series(&friends_only, 3600).iter().all(|p| p.non_friend_bytes == 0));
}
