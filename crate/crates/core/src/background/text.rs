//! Plain-text model files.
//!
//! ```text
//! densub-model v1
//! n 4
//! directed false
//! prior degree
//! base logistic 1
//! v <row> <col|-> <bin>        one line per vertex
//! gamma <a> <b> <value>        nonzero entries only
//! update <lambda> <label as JSON string>
//! a <vertex ids>
//! b <vertex ids>
//! ```
//!
//! Floats are written in shortest round-trip form, so a model survives a
//! save/load cycle bit for bit. Lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use super::{Base, BackgroundModel, PatternUpdate, Prior};
use crate::error::{Error, Result};
use crate::graph::{VertexId, VertexSet};

const MAGIC: &str = "densub-model v1";

fn bad(line: usize, msg: &str) -> Error {
    Error::ModelFormat(format!("line {line}: {msg}"))
}

fn field<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, key: &str) -> Result<(usize, String)> {
    let (l, line) = lines
        .next()
        .ok_or_else(|| Error::ModelFormat(format!("missing `{key}` line")))?;
    let rest = line
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| bad(l, &format!("expected `{key}`")))?;
    Ok((l, rest.to_string()))
}

impl BackgroundModel {
    /// Serialise; each entry of `comments` becomes a `#` line after the header.
    pub fn to_text(&self, comments: &[String]) -> String {
        let mut s = String::new();
        s.push_str(MAGIC);
        s.push('\n');
        for c in comments {
            for line in c.lines() {
                let _ = writeln!(s, "# {line}");
            }
        }
        let _ = writeln!(s, "n {}", self.n);
        let _ = writeln!(s, "directed {}", self.directed);
        match &self.prior {
            Prior::Density => s.push_str("prior density\n"),
            Prior::Degree => s.push_str("prior degree\n"),
            Prior::Blocks {
                attributes,
                with_degrees,
            } => {
                let names = serde_json::to_string(attributes).expect("strings serialise");
                let deg = if *with_degrees { "with-degrees" } else { "no-degrees" };
                let _ = writeln!(s, "prior blocks {deg} {names}");
            }
        }
        match &self.base {
            Base::Uniform(p) => {
                let _ = writeln!(s, "base uniform {p:?}");
            }
            Base::Logistic {
                row,
                col,
                bin,
                bins,
                gamma,
            } => {
                let _ = writeln!(s, "base logistic {bins}");
                for u in 0..self.n {
                    match col {
                        Some(c) => {
                            let _ = writeln!(s, "v {:?} {:?} {}", row[u], c[u], bin[u]);
                        }
                        None => {
                            let _ = writeln!(s, "v {:?} - {}", row[u], bin[u]);
                        }
                    }
                }
                for a in 0..*bins {
                    for b in 0..*bins {
                        let x = gamma[a * bins + b];
                        if x != 0.0 {
                            let _ = writeln!(s, "gamma {a} {b} {x:?}");
                        }
                    }
                }
            }
        }
        for up in &self.updates {
            let label = serde_json::to_string(&up.label).expect("strings serialise");
            let _ = writeln!(s, "update {:?} {label}", up.lambda);
            for (tag, set) in [("a", &up.a), ("b", &up.b)] {
                s.push_str(tag);
                for id in set.ids() {
                    let _ = write!(s, " {id}");
                }
                s.push('\n');
            }
        }
        s
    }

    pub fn save(&self, path: impl AsRef<Path>, comments: &[String]) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text(comments)).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<BackgroundModel> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<BackgroundModel> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .peekable();

        match lines.next() {
            Some((_, MAGIC)) => {}
            Some((l, other)) => return Err(bad(l, &format!("unknown header `{other}`"))),
            None => return Err(Error::ModelFormat("empty file".into())),
        }
        let (l, n) = field(&mut lines, "n")?;
        let n: usize = n.parse().map_err(|_| bad(l, "bad vertex count"))?;
        let (l, directed) = field(&mut lines, "directed")?;
        let directed: bool = directed.parse().map_err(|_| bad(l, "bad directed flag"))?;
        let (l, prior) = field(&mut lines, "prior")?;
        let prior = match prior.as_str() {
            "density" => Prior::Density,
            "degree" => Prior::Degree,
            p => {
                let rest = p.strip_prefix("blocks ").ok_or_else(|| bad(l, "unknown prior"))?;
                let (deg, names) = rest.split_once(' ').ok_or_else(|| bad(l, "bad block prior"))?;
                let with_degrees = match deg {
                    "with-degrees" => true,
                    "no-degrees" => false,
                    _ => return Err(bad(l, "bad block prior")),
                };
                let attributes: Vec<String> =
                    serde_json::from_str(names).map_err(|_| bad(l, "bad attribute list"))?;
                Prior::Blocks {
                    attributes,
                    with_degrees,
                }
            }
        };
        let (l, base) = field(&mut lines, "base")?;
        let base = if let Some(p) = base.strip_prefix("uniform ") {
            Base::Uniform(p.parse().map_err(|_| bad(l, "bad density"))?)
        } else if let Some(b) = base.strip_prefix("logistic ") {
            let bins: usize = b.parse().map_err(|_| bad(l, "bad bin count"))?;
            let mut row = Vec::with_capacity(n);
            let mut col = Vec::with_capacity(n);
            let mut bin = Vec::with_capacity(n);
            let mut has_col = None;
            for _ in 0..n {
                let (l, v) = field(&mut lines, "v")?;
                let parts: Vec<&str> = v.split(' ').collect();
                if parts.len() != 3 {
                    return Err(bad(l, "vertex line needs three fields"));
                }
                row.push(parts[0].parse::<f64>().map_err(|_| bad(l, "bad multiplier"))?);
                let c = parts[1] != "-";
                if *has_col.get_or_insert(c) != c {
                    return Err(bad(l, "mixed column multipliers"));
                }
                if c {
                    col.push(parts[1].parse::<f64>().map_err(|_| bad(l, "bad multiplier"))?);
                }
                let b: u32 = parts[2].parse().map_err(|_| bad(l, "bad bin"))?;
                if b as usize >= bins {
                    return Err(bad(l, "bin out of range"));
                }
                bin.push(b);
            }
            if has_col == Some(true) && !directed || has_col == Some(false) && directed && n > 0 {
                return Err(Error::ModelFormat("column multipliers must match directedness".into()));
            }
            let mut gamma = vec![0.0; bins * bins];
            while let Some(&(l, line)) = lines.peek() {
                let Some(rest) = line.strip_prefix("gamma ") else { break };
                lines.next();
                let parts: Vec<&str> = rest.split(' ').collect();
                if parts.len() != 3 {
                    return Err(bad(l, "gamma line needs three fields"));
                }
                let a: usize = parts[0].parse().map_err(|_| bad(l, "bad bin"))?;
                let b: usize = parts[1].parse().map_err(|_| bad(l, "bad bin"))?;
                if a >= bins || b >= bins {
                    return Err(bad(l, "bin out of range"));
                }
                gamma[a * bins + b] = parts[2].parse().map_err(|_| bad(l, "bad block multiplier"))?;
            }
            Base::Logistic {
                row,
                col: directed.then_some(col),
                bin,
                bins,
                gamma,
            }
        } else {
            return Err(bad(l, "unknown base"));
        };

        let mut updates = Vec::new();
        let ids = |l: usize, s: &str| -> Result<VertexSet> {
            let mut v = Vec::new();
            for tok in s.split_whitespace() {
                let id: VertexId = tok.parse().map_err(|_| bad(l, "bad vertex id"))?;
                if id as usize >= n {
                    return Err(bad(l, "vertex id out of range"));
                }
                v.push(id);
            }
            Ok(VertexSet::from_ids(n, v))
        };
        while let Some((l, line)) = lines.next() {
            let rest = line
                .strip_prefix("update ")
                .ok_or_else(|| bad(l, "expected `update`"))?;
            let (lambda, label) = rest.split_once(' ').ok_or_else(|| bad(l, "bad update line"))?;
            let lambda: f64 = lambda.parse().map_err(|_| bad(l, "bad tilt"))?;
            let label: String = serde_json::from_str(label).map_err(|_| bad(l, "bad label"))?;
            let mut sets = Vec::new();
            for tag in ["a", "b"] {
                let (l, line) = lines
                    .next()
                    .ok_or_else(|| Error::ModelFormat(format!("missing `{tag}` line")))?;
                let rest = if line == tag {
                    ""
                } else {
                    line.strip_prefix(tag)
                        .and_then(|r| r.strip_prefix(' '))
                        .ok_or_else(|| bad(l, &format!("expected `{tag}`")))?
                };
                sets.push(ids(l, rest)?);
            }
            let b = sets.pop().expect("two sets");
            let a = sets.pop().expect("two sets");
            updates.push(PatternUpdate { lambda, label, a, b });
        }
        Ok(BackgroundModel::assemble(n, directed, prior, base, updates))
    }
}
