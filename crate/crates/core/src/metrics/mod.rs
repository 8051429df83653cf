//! Statistics over completed downloads and the transfer log, plus the CSV
//! files they are published as.

mod csvout;

pub use csvout::{
    read_download_records, write_correlations, write_download_records, write_durations, write_files_per_user,
    write_graph_props, write_nonfriend, write_pnsn, CorrelationRow, PnsnRow,
};

use crate::graphgen::SocialGraph;
use crate::protocol::{ItemId, PeerId, TransferRecord};

/// One finished download.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DownloadRecord {
    pub peer_id: PeerId,
    pub item_id: ItemId,
    pub request_time: u64,
    pub completion_time: u64,
    pub bytes_from_friends: u64,
    pub bytes_from_non_friends: u64,
    pub bytes_from_broadcast_cache: u64,
    pub was_prefetch: bool,
}

impl DownloadRecord {
    pub fn duration(&self) -> u64 {
        self.completion_time - self.request_time
    }

    pub fn total_bytes(&self) -> u64 {
        self.bytes_from_friends + self.bytes_from_non_friends + self.bytes_from_broadcast_cache
    }
}

/// One fixed-width time bucket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSeriesPoint {
    pub bucket_end_time: u64,
    /// `None` when nothing completed in the bucket.
    pub mean_duration_seconds: Option<f64>,
    pub non_friend_bytes: u64,
    pub completed_count: u64,
}

/// Buckets are right-closed: `(k·w, (k+1)·w]`, with time 0 in the first.
pub fn bucket_of(t: u64, width: u64) -> usize {
    (t.saturating_sub(1) / width) as usize
}

fn empty_series(buckets: usize, width: u64) -> Vec<TimeSeriesPoint> {
    (0..buckets)
        .map(|k| TimeSeriesPoint {
            bucket_end_time: (k as u64 + 1) * width,
            mean_duration_seconds: None,
            non_friend_bytes: 0,
            completed_count: 0,
        })
        .collect()
}

fn bucket_count(last: Option<u64>, horizon: Option<u64>, width: u64) -> usize {
    let by_data = last.map_or(0, |t| bucket_of(t, width) + 1);
    let by_horizon = horizon.map_or(0, |h| h.div_ceil(width) as usize);
    by_data.max(by_horizon)
}

/// Mean duration of the user downloads completed in each bucket. Series
/// runs to the last completion, or to `horizon` when given.
pub fn duration_series_until(records: &[DownloadRecord], width: u64, horizon: Option<u64>) -> Vec<TimeSeriesPoint> {
    let users: Vec<&DownloadRecord> = records.iter().filter(|r| !r.was_prefetch).collect();
    let last = users.iter().map(|r| r.completion_time).max();
    let mut out = empty_series(bucket_count(last, horizon, width), width);
    let mut sums = vec![0u64; out.len()];
    for r in users {
        let b = bucket_of(r.completion_time, width);
        if b < out.len() {
            sums[b] += r.duration();
            out[b].completed_count += 1;
        }
    }
    for (p, s) in out.iter_mut().zip(sums) {
        if p.completed_count > 0 {
            p.mean_duration_seconds = Some(s as f64 / p.completed_count as f64);
        }
    }
    out
}

pub fn duration_series(records: &[DownloadRecord], width: u64) -> Vec<TimeSeriesPoint> {
    duration_series_until(records, width, None)
}

/// Unicast bytes between non-buddies per bucket.
pub fn non_friend_upload_series_until(log: &[TransferRecord], width: u64, horizon: Option<u64>) -> Vec<TimeSeriesPoint> {
    let last = log.iter().map(|r| r.time).max();
    let mut out = empty_series(bucket_count(last, horizon, width), width);
    for r in log {
        if r.is_unicast() && !r.friend {
            let b = bucket_of(r.time, width);
            if b < out.len() {
                out[b].non_friend_bytes += r.bytes;
            }
        }
    }
    out
}

pub fn non_friend_upload_series(log: &[TransferRecord], width: u64) -> Vec<TimeSeriesPoint> {
    non_friend_upload_series_until(log, width, None)
}

/// Cumulative mean number of completed user downloads per peer at the end
/// of each bucket.
pub fn files_per_user_until(
    records: &[DownloadRecord],
    peers: usize,
    width: u64,
    horizon: Option<u64>,
) -> Vec<(u64, f64)> {
    let users: Vec<&DownloadRecord> = records.iter().filter(|r| !r.was_prefetch).collect();
    let last = users.iter().map(|r| r.completion_time).max();
    let n = bucket_count(last, horizon, width);
    let mut per_bucket = vec![0u64; n];
    for r in users {
        let b = bucket_of(r.completion_time, width);
        if b < n {
            per_bucket[b] += 1;
        }
    }
    let mut acc = 0u64;
    per_bucket
        .into_iter()
        .enumerate()
        .map(|(k, c)| {
            acc += c;
            let mean = if peers == 0 { 0.0 } else { acc as f64 / peers as f64 };
            ((k as u64 + 1) * width, mean)
        })
        .collect()
}

/// Final mean number of completed user downloads per peer.
pub fn files_per_user(records: &[DownloadRecord], peers: usize) -> f64 {
    if peers == 0 {
        return 0.0;
    }
    records.iter().filter(|r| !r.was_prefetch).count() as f64 / peers as f64
}

/// Product-moment correlation. `None` when lengths differ, fewer than two
/// points exist or either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Correlation of download duration with the downloader's sat flag and with
/// its number of sat-enabled buddies, over user downloads of graph nodes.
pub fn sat_correlations(records: &[DownloadRecord], graph: &SocialGraph) -> (Option<f64>, Option<f64>) {
    let mut d = Vec::new();
    let mut flag = Vec::new();
    let mut friends = Vec::new();
    for r in records {
        let p = r.peer_id as usize;
        if r.was_prefetch || p >= graph.node_count() {
            continue;
        }
        d.push(r.duration() as f64);
        flag.push(if graph.is_sat_enabled(p) { 1.0 } else { 0.0 });
        friends.push(graph.sat_neighbor_count(p) as f64);
    }
    (pearson(&d, &flag), pearson(&d, &friends))
}

/// Bytes delivered by origin: friend unicast, non-friend unicast, broadcast.
pub fn traffic_split(log: &[TransferRecord]) -> (u64, u64, u64) {
    let mut out = (0, 0, 0);
    for r in log {
        if !r.is_unicast() {
            out.2 += r.bytes;
        } else if r.friend {
            out.0 += r.bytes;
        } else {
            out.1 += r.bytes;
        }
    }
    out
}

/// Mean duration over all user downloads, `None` without any.
pub fn mean_duration(records: &[DownloadRecord]) -> Option<f64> {
    let d: Vec<f64> = records
        .iter()
        .filter(|r| !r.was_prefetch)
        .map(|r| r.duration() as f64)
        .collect();
    (!d.is_empty()).then(|| d.iter().sum::<f64>() / d.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(peer: u32, req: u64, done: u64) -> DownloadRecord {
        DownloadRecord {
            peer_id: peer,
            item_id: 0,
            request_time: req,
            completion_time: done,
            bytes_from_friends: 0,
            bytes_from_non_friends: 10,
            bytes_from_broadcast_cache: 0,
            was_prefetch: false,
        }
    }

    #[test]
    fn durations_basic() {
        assert!(duration_series(&[], 3600).is_empty());
        let s = duration_series(&[rec(0, 0, 100)], 3600);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].mean_duration_seconds, Some(100.0));
        assert_eq!(s[0].completed_count, 1);
    }

    #[test]
    fn empty_buckets_are_marked() {
        let s = duration_series(&[rec(0, 0, 100), rec(1, 7000, 7300)], 3600);
        assert_eq!(s.len(), 3);
        assert_eq!(s[1].mean_duration_seconds, None);
        assert_eq!(s[1].completed_count, 0);
        assert_eq!(s[2].bucket_end_time, 10800);
    }

    #[test]
    fn bucket_edges_are_right_closed() {
        assert_eq!(bucket_of(0, 60), 0);
        assert_eq!(bucket_of(60, 60), 0);
        assert_eq!(bucket_of(61, 60), 1);
    }

    #[test]
    fn files_per_user_arithmetic() {
        assert_eq!(files_per_user(&[], 10), 0.0);
        let recs: Vec<_> = (0..30).map(|i| rec(i % 10, 0, 10)).collect();
        assert_eq!(files_per_user(&recs, 10), 3.0);
        let series = files_per_user_until(&recs, 10, 3600, Some(7200));
        assert_eq!(series, vec![(3600, 3.0), (7200, 3.0)]);
    }

    #[test]
    fn pearson_extremes() {
        let x = [1.0, 2.0, 4.0, 7.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&x, &[2.0; 4]), None);
        assert_eq!(pearson(&[1.0], &[1.0]), None);
    }

    #[test]
    fn sat_peers_faster_gives_negative_flag_correlation() {
        let mut g = SocialGraph::path(4);
        g.set_sat_enabled(0, true);
        g.set_sat_enabled(2, true);
        let recs = vec![rec(0, 0, 10), rec(1, 0, 100), rec(2, 0, 20), rec(3, 0, 90)];
        let (flag, _) = sat_correlations(&recs, &g);
        assert!(flag.unwrap() < 0.0);
        let same: Vec<_> = (0..4).map(|p| rec(p, 0, 50)).collect();
        assert_eq!(sat_correlations(&same, &g), (None, None));
    }
}
