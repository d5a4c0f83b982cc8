//! Line-delimited JSON reports and their aligned-table rendering.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::score::Pattern;
use crate::search::MeasureHit;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub round: Option<usize>,
    pub rank: usize,
    pub w1: String,
    pub w2: Option<String>,
    pub size1: usize,
    pub size2: Option<usize>,
    /// 0 for dense, 1 for sparse.
    pub direction: u8,
    pub k_w: u64,
    pub n_w: u64,
    /// Expected edge count over the pattern's pairs.
    pub expected: f64,
    pub ic: f64,
    pub dl: f64,
    pub si: f64,
    pub convention: String,
}

impl PatternRecord {
    pub fn from_pattern(p: &Pattern, rank: usize, round: Option<usize>) -> Self {
        PatternRecord {
            round,
            rank,
            w1: p.w1.to_string(),
            w2: p.w2.as_ref().map(|w| w.to_string()),
            size1: p.ext1.len(),
            size2: p.ext2.as_ref().map(|e| e.len()),
            direction: p.direction.indicator(),
            k_w: p.k_w,
            n_w: p.n_w,
            expected: p.expected(),
            ic: p.ic,
            dl: p.dl,
            si: p.si,
            convention: p.counting.as_str().to_string(),
        }
    }
}

/// Records for a ranked list, ranks starting at 1.
pub fn pattern_records(patterns: &[Pattern], round: Option<usize>) -> Vec<PatternRecord> {
    patterns
        .iter()
        .enumerate()
        .map(|(i, p)| PatternRecord::from_pattern(p, i + 1, round))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureRecord {
    pub measure: String,
    pub rank: usize,
    pub w: String,
    pub size: u64,
    pub k_w: u64,
    pub inter_edges: u64,
    /// A number, or the string `"inf"`.
    pub value: Value,
}

impl MeasureRecord {
    pub fn from_hit(measure: &str, hit: &MeasureHit, rank: usize) -> Self {
        MeasureRecord {
            measure: measure.to_string(),
            rank,
            w: hit.description.to_string(),
            size: hit.counts.size,
            k_w: hit.counts.inside,
            inter_edges: hit.counts.inter,
            value: encode_score(hit.value),
        }
    }

    pub fn numeric_value(&self) -> Option<f64> {
        decode_score(&self.value)
    }
}

/// JSON has no infinities, so they travel as strings.
pub fn encode_score(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else if x > 0.0 {
        Value::from("inf")
    } else if x < 0.0 {
        Value::from("-inf")
    } else {
        Value::from("nan")
    }
}

pub fn decode_score(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) if s == "inf" => Some(f64::INFINITY),
        Value::String(s) if s == "-inf" => Some(f64::NEG_INFINITY),
        _ => None,
    }
}

pub fn write_jsonl<T: Serialize>(records: &[T], mut out: impl Write) -> Result<()> {
    for r in records {
        let line = serde_json::to_string(r)?;
        writeln!(out, "{line}").map_err(|e| Error::io("<output>", e))?;
    }
    Ok(())
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(input: impl BufRead) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<input>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            file: "<report>".into(),
            line: i + 1,
            msg: e.to_string(),
        })?);
    }
    Ok(out)
}

fn aligned(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<String>| -> String {
        let mut s = String::new();
        for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            s.push_str(c);
            s.extend(std::iter::repeat_n(' ', w - c.chars().count()));
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(header.iter().map(|h| h.to_string()).collect());
    for r in rows {
        out.push_str(&line(r.clone()));
    }
    out
}

pub fn pattern_table(records: &[PatternRecord]) -> String {
    let with_round = records.iter().any(|r| r.round.is_some());
    let mut header = vec!["rank", "W1", "W2", "|e(W1)|", "|e(W2)|", "I", "k_W", "n_W", "p_W*n_W", "IC", "DL", "SI"];
    if with_round {
        header.insert(0, "round");
    }
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            let mut row = vec![
                r.rank.to_string(),
                r.w1.clone(),
                r.w2.clone().unwrap_or_else(|| "-".into()),
                r.size1.to_string(),
                r.size2.map_or("-".into(), |s| s.to_string()),
                r.direction.to_string(),
                r.k_w.to_string(),
                r.n_w.to_string(),
                format!("{:.3}", r.expected),
                format!("{:.3}", r.ic),
                format!("{:.2}", r.dl),
                format!("{:.3}", r.si),
            ];
            if with_round {
                row.insert(0, r.round.map_or("-".into(), |x| x.to_string()));
            }
            row
        })
        .collect();
    aligned(&header, &rows)
}

pub fn measure_table(records: &[MeasureRecord]) -> String {
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            vec![
                r.measure.clone(),
                r.rank.to_string(),
                r.w.clone(),
                r.size.to_string(),
                r.k_w.to_string(),
                r.inter_edges.to_string(),
                match r.numeric_value() {
                    Some(x) if x.is_finite() => format!("{x:.4}"),
                    Some(x) => format!("{x}"),
                    None => r.value.to_string(),
                },
            ]
        })
        .collect();
    aligned(&["measure", "rank", "W", "|e(W)|", "k_W", "inter", "value"], &rows)
}
