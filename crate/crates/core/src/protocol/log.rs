use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use super::{ItemId, PeerId};

/// Why a transfer happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransferKind {
    /// Piece-for-piece trade (or free seeding when credits are disabled).
    Reciprocal,
    /// Piece paid for with one credit.
    Credit,
    /// Free service from a helping buddy.
    Buddy,
    /// Satellite delivery.
    Broadcast,
    /// Idle-time fetch from a buddy.
    Prefetch,
}

impl TransferKind {
    pub const ALL: [TransferKind; 5] = [
        TransferKind::Reciprocal,
        TransferKind::Credit,
        TransferKind::Buddy,
        TransferKind::Broadcast,
        TransferKind::Prefetch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TransferKind::Reciprocal => "reciprocal",
            TransferKind::Credit => "credit",
            TransferKind::Buddy => "buddy",
            TransferKind::Broadcast => "broadcast",
            TransferKind::Prefetch => "prefetch",
        }
    }
}

impl fmt::Display for TransferKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransferKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        TransferKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown transfer kind `{s}`"))
    }
}

/// Pieces moved from one sender to one receiver for one item during one
/// step. A broadcast record covers every piece a sat peer captured from one
/// transmission and leaves `pieces` empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferRecord {
    /// Seconds since simulation start (end of the step that delivered it).
    pub time: u64,
    /// `None` for the satellite.
    pub from: Option<PeerId>,
    pub to: PeerId,
    pub item: ItemId,
    /// Piece ids in delivery order; empty for broadcast captures.
    pub pieces: Vec<u32>,
    pub count: u32,
    pub bytes: u64,
    pub kind: TransferKind,
    /// Sender and receiver are buddies.
    pub friend: bool,
}

impl TransferRecord {
    pub fn is_unicast(&self) -> bool {
        self.kind != TransferKind::Broadcast
    }
}

pub const LOG_HEADER: &str = "time,from,to,item,pieces,count,bytes,kind,friend";

pub fn write_transfer_log<W: Write>(records: &[TransferRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{LOG_HEADER}")?;
    let mut pieces = String::new();
    for r in records {
        pieces.clear();
        for (i, p) in r.pieces.iter().enumerate() {
            if i > 0 {
                pieces.push(';');
            }
            pieces.push_str(&p.to_string());
        }
        match r.from {
            Some(p) => write!(out, "{},{p},", r.time)?,
            None => write!(out, "{},sat,", r.time)?,
        }
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.to,
            r.item,
            pieces,
            r.count,
            r.bytes,
            r.kind,
            u8::from(r.friend)
        )?;
    }
    Ok(())
}

pub fn read_transfer_log<R: BufRead>(input: R) -> Result<Vec<TransferRecord>, String> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if i == 0 {
            if line != LOG_HEADER {
                return Err(format!("unexpected header `{line}`"));
            }
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(format!("line {}: expected 9 fields", i + 1));
        }
        let bad = |what: &str| format!("line {}: bad {what}", i + 1);
        let pieces = if f[4].is_empty() {
            Vec::new()
        } else {
            f[4].split(';')
                .map(|p| p.parse().map_err(|_| bad("pieces")))
                .collect::<Result<_, _>>()?
        };
        out.push(TransferRecord {
            time: f[0].parse().map_err(|_| bad("time"))?,
            from: if f[1] == "sat" {
                None
            } else {
                Some(f[1].parse().map_err(|_| bad("from"))?)
            },
            to: f[2].parse().map_err(|_| bad("to"))?,
            item: f[3].parse().map_err(|_| bad("item"))?,
            pieces,
            count: f[5].parse().map_err(|_| bad("count"))?,
            bytes: f[6].parse().map_err(|_| bad("bytes"))?,
            kind: f[7].parse().map_err(|_| bad("kind"))?,
            friend: f[8] == "1",
        });
    }
    Ok(out)
}
