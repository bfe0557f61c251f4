//! Trace files: one JSON-encoded event per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use santa_scenario::TraceEvent;

#[derive(Debug, Error)]
pub enum JsonlError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Parse { line: usize, source: serde_json::Error },
}

pub fn write_events(path: &Path, events: &[TraceEvent]) -> Result<(), JsonlError> {
    let mut out = BufWriter::new(File::create(path)?);
    for ev in events {
        serde_json::to_writer(&mut out, ev).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a trace back. Blank lines are tolerated; anything else must be a
/// complete event record.
pub fn read_events(path: &Path) -> Result<Vec<TraceEvent>, JsonlError> {
    let reader = BufReader::new(File::open(path)?);
    let mut events = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let ev = serde_json::from_str(&line).map_err(|source| JsonlError::Parse { line: i + 1, source })?;
        events.push(ev);
    }
    Ok(events)
}
