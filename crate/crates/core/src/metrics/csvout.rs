use std::io::{Read, Write};

use super::{DownloadRecord, TimeSeriesPoint};
use crate::graphgen::GraphProperties;

fn num(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => x.to_string(),
        _ => "nan".to_string(),
    }
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

pub fn write_durations<W: Write>(series: &[TimeSeriesPoint], out: W) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(["bucket_end_s", "mean_duration_s", "completed_count"])?;
    for p in series {
        w.write_record([
            p.bucket_end_time.to_string(),
            num(p.mean_duration_seconds),
            p.completed_count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_nonfriend<W: Write>(series: &[TimeSeriesPoint], out: W) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(["bucket_end_s", "non_friend_bytes"])?;
    for p in series {
        w.write_record([p.bucket_end_time.to_string(), p.non_friend_bytes.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_files_per_user<W: Write>(series: &[(u64, f64)], out: W) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(["bucket_end_s", "mean_files"])?;
    for (t, m) in series {
        w.write_record([t.to_string(), m.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRow {
    pub mi_model: String,
    pub corr_sat_flag: Option<f64>,
    pub corr_sat_friend_count: Option<f64>,
}

pub fn write_correlations<W: Write>(rows: &[CorrelationRow], out: W) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(["mi_model", "corr_sat_flag", "corr_sat_friend_count"])?;
    for r in rows {
        w.write_record([r.mi_model.clone(), num(r.corr_sat_flag), num(r.corr_sat_friend_count)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_graph_props<W: Write>(rows: &[(String, GraphProperties)], out: W) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record([
        "model",
        "nodes",
        "edges",
        "avg_degree",
        "diameter",
        "avg_clustering",
        "avg_path_len",
        "triangles",
    ])?;
    for (model, p) in rows {
        w.write_record([
            model.clone(),
            p.nodes.to_string(),
            p.edge_count.to_string(),
            p.average_degree.to_string(),
            p.diameter.to_string(),
            p.average_clustering_coefficient.to_string(),
            p.average_path_length.to_string(),
            p.total_triangles.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PnsnRow {
    pub model: String,
    /// Sat ratio or node count, depending on the sweep.
    pub ratio_or_nodes: f64,
    pub p_nsn: f64,
}

pub fn write_pnsn<W: Write>(rows: &[PnsnRow], out: W) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(["model", "ratio_or_nodes", "p_nsn"])?;
    for r in rows {
        w.write_record([r.model.clone(), r.ratio_or_nodes.to_string(), num(Some(r.p_nsn))])?;
    }
    w.flush()?;
    Ok(())
}

const DOWNLOAD_HEADER: [&str; 8] = [
    "peer",
    "item",
    "request_time",
    "completion_time",
    "bytes_from_friends",
    "bytes_from_non_friends",
    "bytes_from_broadcast_cache",
    "was_prefetch",
];

pub fn write_download_records<W: Write>(records: &[DownloadRecord], out: W) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(DOWNLOAD_HEADER)?;
    for r in records {
        w.write_record([
            r.peer_id.to_string(),
            r.item_id.to_string(),
            r.request_time.to_string(),
            r.completion_time.to_string(),
            r.bytes_from_friends.to_string(),
            r.bytes_from_non_friends.to_string(),
            r.bytes_from_broadcast_cache.to_string(),
            u8::from(r.was_prefetch).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_download_records<R: Read>(input: R) -> Result<Vec<DownloadRecord>, String> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().ne(DOWNLOAD_HEADER) {
        return Err("unexpected downloads header".into());
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| e.to_string())?;
        let field = |k: usize| -> Result<u64, String> {
            row.get(k)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| format!("row {}: bad field {}", i + 1, DOWNLOAD_HEADER[k]))
        };
        out.push(DownloadRecord {
            peer_id: field(0)? as u32,
            item_id: field(1)? as u32,
            request_time: field(2)?,
            completion_time: field(3)?,
            bytes_from_friends: field(4)?,
            bytes_from_non_friends: field(5)?,
            bytes_from_broadcast_cache: field(6)?,
            was_prefetch: field(7)? == 1,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_sentinel() {
        let mut buf = Vec::new();
        let rows = vec![CorrelationRow {
            mi_model: "MI1".into(),
            corr_sat_flag: None,
            corr_sat_friend_count: Some(-0.25),
        }];
        write_correlations(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "mi_model,corr_sat_flag,corr_sat_friend_count\nMI1,nan,-0.25\n"
        );
    }

    #[test]
    fn downloads_round_trip() {
        let recs = vec![DownloadRecord {
            peer_id: 4,
            item_id: 7,
            request_time: 60,
            completion_time: 600,
            bytes_from_friends: 1,
            bytes_from_non_friends: 2,
            bytes_from_broadcast_cache: 3,
            was_prefetch: true,
        }];
        let mut buf = Vec::new();
        write_download_records(&recs, &mut buf).unwrap();
        assert_eq!(read_download_records(buf.as_slice()).unwrap(), recs);
    }
}
