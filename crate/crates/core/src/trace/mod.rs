//! Line-oriented request traces: `<inst_gap> <R|W> <address>` per line,
//! `#` starts a comment.

mod synth;

use std::fmt::Write as _;
use std::path::Path;

pub use synth::{synth_trace, SynthParams};

use crate::error::TraceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TraceEntry {
    /// Non-memory instructions executed before this request.
    pub inst_gap: u64,
    pub is_write: bool,
    pub phys_addr: u64,
}

fn parse_number(s: &str) -> Option<u64> {
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => s.parse().ok(),
    }
}

fn parse_line(text: &str, line: usize) -> Result<Option<TraceEntry>, TraceError> {
    let text = text.split('#').next().unwrap_or_default().trim();
    if text.is_empty() {
        return Ok(None);
    }
    let malformed = |reason: String| TraceError::Malformed { line, reason };
    let fields: Vec<&str> = text.split_whitespace().collect();
    let [gap, op, addr] = fields[..] else {
        return Err(malformed(format!("expected `<inst_gap> <R|W> <address>`, found {} fields", fields.len())));
    };
    let inst_gap = gap.parse().map_err(|_| malformed(format!("bad instruction gap `{gap}`")))?;
    let is_write = match op {
        "R" | "r" => false,
        "W" | "w" => true,
        _ => return Err(malformed(format!("expected R or W, found `{op}`"))),
    };
    let phys_addr = parse_number(addr).ok_or_else(|| malformed(format!("bad address `{addr}`")))?;
    Ok(Some(TraceEntry { inst_gap, is_write, phys_addr }))
}

fn parse_numbered(text: &str) -> Result<Vec<(usize, TraceEntry)>, TraceError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if let Some(e) = parse_line(line, i + 1)? {
            out.push((i + 1, e));
        }
    }
    Ok(out)
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceEntry>, TraceError> {
    Ok(parse_numbered(text)?.into_iter().map(|(_, e)| e).collect())
}

/// Parses `text` and checks every address against `capacity` bytes.
pub fn load_trace(text: &str, capacity: u64) -> Result<Vec<TraceEntry>, TraceError> {
    parse_numbered(text)?
        .into_iter()
        .map(|(line, e)| match e.phys_addr < capacity {
            true => Ok(e),
            false => Err(TraceError::OutOfCapacity { line, addr: e.phys_addr, capacity }),
        })
        .collect()
}

pub fn read_trace_file(path: &Path, capacity: u64) -> Result<Vec<TraceEntry>, TraceError> {
    load_trace(&std::fs::read_to_string(path)?, capacity)
}

/// Writes entries in the trace format, each line of `header` as a comment.
pub fn render_trace(entries: &[TraceEntry], header: &str) -> String {
    let mut out = String::with_capacity(entries.len() * 16 + header.len());
    for line in header.lines() {
        let _ = writeln!(out, "# {line}");
    }
    for e in entries {
        let op = if e.is_write { 'W' } else { 'R' };
        let _ = writeln!(out, "{} {op} {:#x}", e.inst_gap, e.phys_addr);
    }
    out
}
