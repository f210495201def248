//! Trace export and loading.
//!
//! CSV: a directory holding `meta.json`, `tracks.csv` and `agents.csv`, with
//! fixed headers even when there are no rows. JSON lines: one file whose
//! first line is `{"meta":{...}}` followed by one
//! `{"frame":N,"tracks":[...],"agents":[...]}` line per frame.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::run::{AgentRecord, RunMeta, RunTrace, TrackRecord, SCHEMA_VERSION};
use crate::error::{Error, Result};

pub const TRACK_COLUMNS: [&str; 13] = [
    "frame",
    "track_id",
    "label",
    "truth",
    "x",
    "y",
    "vx",
    "vy",
    "score",
    "status",
    "trust_mean",
    "trust_precision",
    "n_psm",
];

pub const AGENT_COLUMNS: [&str; 8] = [
    "frame",
    "agent_id",
    "compromised",
    "n_detections",
    "local_tracks",
    "trust_mean",
    "trust_precision",
    "n_psm",
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceFormat {
    #[default]
    Csv,
    Jsonl,
}

impl FromStr for TraceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(TraceFormat::Csv),
            "jsonl" | "json-lines" | "ndjson" => Ok(TraceFormat::Jsonl),
            other => Err(Error::InvalidParameter(format!("unknown trace format {other:?}"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaLine {
    meta: RunMeta,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameLine {
    frame: u64,
    tracks: Vec<TrackRecord>,
    agents: Vec<AgentRecord>,
}

fn write_csv<T: Serialize>(path: &Path, columns: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(columns)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path, columns: &[&str]) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != columns {
        return Err(Error::Trace(format!("{} has columns {header:?}, expected {columns:?}", path.display())));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Writes `trace` at `path` and returns the files created.
pub fn emit_trace(trace: &RunTrace, format: TraceFormat, path: &Path) -> Result<Vec<PathBuf>> {
    match format {
        TraceFormat::Csv => {
            fs::create_dir_all(path)?;
            let meta = path.join("meta.json");
            let tracks = path.join("tracks.csv");
            let agents = path.join("agents.csv");
            fs::write(&meta, serde_json::to_string_pretty(&trace.meta)? + "\n")?;
            write_csv(&tracks, &TRACK_COLUMNS, &trace.tracks)?;
            write_csv(&agents, &AGENT_COLUMNS, &trace.agents)?;
            Ok(vec![meta, tracks, agents])
        }
        TraceFormat::Jsonl => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            let mut w = BufWriter::new(File::create(path)?);
            serde_json::to_writer(&mut w, &MetaLine { meta: trace.meta.clone() })?;
            writeln!(w)?;
            for frame in 0..trace.meta.n_frames {
                let line = FrameLine {
                    frame,
                    tracks: trace.tracks_at(frame).cloned().collect(),
                    agents: trace.agents_at(frame).cloned().collect(),
                };
                serde_json::to_writer(&mut w, &line)?;
                writeln!(w)?;
            }
            w.flush()?;
            Ok(vec![path.to_path_buf()])
        }
    }
}

fn check_version(meta: &RunMeta) -> Result<()> {
    if meta.schema_version != SCHEMA_VERSION {
        return Err(Error::Trace(format!(
            "schema version {} is not supported (expected {SCHEMA_VERSION})",
            meta.schema_version
        )));
    }
    Ok(())
}

/// Reads a trace written by [`emit_trace`].
pub fn load_trace(format: TraceFormat, path: &Path) -> Result<RunTrace> {
    match format {
        TraceFormat::Csv => {
            let meta: RunMeta = serde_json::from_str(&fs::read_to_string(path.join("meta.json"))?)?;
            check_version(&meta)?;
            let tracks = read_csv(&path.join("tracks.csv"), &TRACK_COLUMNS)?;
            let agents = read_csv(&path.join("agents.csv"), &AGENT_COLUMNS)?;
            Ok(RunTrace { meta, tracks, agents })
        }
        TraceFormat::Jsonl => {
            let mut lines = BufReader::new(File::open(path)?).lines();
            let first = lines.next().ok_or_else(|| Error::Trace("empty trace file".into()))??;
            let MetaLine { meta } = serde_json::from_str(&first)
                .map_err(|e| Error::Trace(format!("first line must be the meta record: {e}")))?;
            check_version(&meta)?;
            let mut trace = RunTrace { meta, tracks: Vec::new(), agents: Vec::new() };
            let mut expected = 0;
            for line in lines {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let FrameLine { frame, tracks, agents } = serde_json::from_str(&line)?;
                if frame != expected {
                    return Err(Error::Trace(format!("frame {frame} out of order, expected {expected}")));
                }
                expected += 1;
                trace.tracks.extend(tracks);
                trace.agents.extend(agents);
            }
            if expected != trace.meta.n_frames {
                return Err(Error::Trace(format!("found {expected} frames, meta says {}", trace.meta.n_frames)));
            }
            Ok(trace)
        }
    }
}
