//! Selectors, conjunctive descriptions and their extensions.
//!
//! Canonical text form, used by every report:
//!
//! ```text
//! description := "⊤" | selector { "∧" selector }
//! selector    := token "=" token | token "∈[" number "," number "]"
//! token       := bare | '"' { char | '\' char } '"'
//! ```
//!
//! A bare token is any non-empty run of characters other than whitespace and
//! `= ∈ ∧ [ ] , " \`; anything else is written quoted. Numbers use Rust's
//! shortest round-trip `f64` formatting, so parsing a rendered description
//! yields bit-identical interval bounds. `⊤` is the empty description.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::graph::{AttributeKind, AttributeValues, AttributedGraph, VertexSet};

#[derive(Clone, Debug)]
pub enum Condition {
    /// `a(v) = value`; `code` indexes the column's domain.
    Equals { code: u32, value: Arc<str> },
    /// Closed interval `a(v) ∈ [lo, hi]`.
    Interval { lo: f64, hi: f64 },
}

/// Atomic predicate on one attribute.
#[derive(Clone, Debug)]
pub struct Selector {
    attr: usize,
    name: Arc<str>,
    cond: Condition,
}

impl Selector {
    pub fn equals(g: &AttributedGraph, attribute: &str, value: &str) -> Result<Selector> {
        let (attr, col) = g
            .attribute(attribute)
            .ok_or_else(|| Error::UnknownAttribute(attribute.to_string()))?;
        match col.values() {
            AttributeValues::Nominal { domain, .. } => {
                let code = domain.iter().position(|d| d == value).ok_or_else(|| {
                    Error::InvalidArgument(format!("`{value}` is not a value of `{attribute}`"))
                })?;
                Ok(Selector {
                    attr,
                    name: attribute.into(),
                    cond: Condition::Equals {
                        code: code as u32,
                        value: value.into(),
                    },
                })
            }
            AttributeValues::Numeric(_) => Err(Error::KindMismatch {
                name: attribute.to_string(),
                actual: "numeric",
                expected: "nominal",
            }),
        }
    }

    pub fn interval(g: &AttributedGraph, attribute: &str, lo: f64, hi: f64) -> Result<Selector> {
        let (attr, col) = g
            .attribute(attribute)
            .ok_or_else(|| Error::UnknownAttribute(attribute.to_string()))?;
        if col.kind() != AttributeKind::Numeric {
            return Err(Error::KindMismatch {
                name: attribute.to_string(),
                actual: "nominal",
                expected: "numeric",
            });
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument(format!(
                "interval [{lo}, {hi}] must be finite with lo < hi"
            )));
        }
        Ok(Selector {
            attr,
            name: attribute.into(),
            cond: Condition::Interval { lo, hi },
        })
    }

    /// Column index in the graph the selector was built against.
    pub fn attribute_index(&self) -> usize {
        self.attr
    }

    pub fn attribute(&self) -> &str {
        &self.name
    }

    pub fn condition(&self) -> &Condition {
        &self.cond
    }

    pub fn extension(&self, g: &AttributedGraph) -> Result<VertexSet> {
        let col = match g.attributes().get(self.attr) {
            Some(c) if c.name() == &*self.name => c,
            _ => g
                .attribute(&self.name)
                .ok_or_else(|| Error::UnknownAttribute(self.name.to_string()))?
                .1,
        };
        let mut bits = FixedBitSet::with_capacity(g.n());
        match (&self.cond, col.values()) {
            (Condition::Equals { value, .. }, AttributeValues::Nominal { codes, domain }) => {
                // resolve by value so selectors survive a reload with a different domain order
                if let Some(code) = domain.iter().position(|d| d == &**value) {
                    for (v, c) in codes.iter().enumerate() {
                        if *c == Some(code as u32) {
                            bits.insert(v);
                        }
                    }
                }
            }
            (Condition::Interval { lo, hi }, AttributeValues::Numeric(vals)) => {
                for (v, x) in vals.iter().enumerate() {
                    if matches!(x, Some(x) if *lo <= *x && *x <= *hi) {
                        bits.insert(v);
                    }
                }
            }
            (Condition::Equals { .. }, _) => {
                return Err(Error::KindMismatch {
                    name: self.name.to_string(),
                    actual: "numeric",
                    expected: "nominal",
                })
            }
            (Condition::Interval { .. }, _) => {
                return Err(Error::KindMismatch {
                    name: self.name.to_string(),
                    actual: "nominal",
                    expected: "numeric",
                })
            }
        }
        Ok(VertexSet::from_bits(bits))
    }
}

impl PartialEq for Selector {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Selector {}

impl Hash for Selector {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.attr.hash(state);
        match &self.cond {
            Condition::Equals { code, .. } => (0u8, *code).hash(state),
            Condition::Interval { lo, hi } => (1u8, lo.to_bits(), hi.to_bits()).hash(state),
        }
    }
}

impl PartialOrd for Selector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Selector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.attr.cmp(&other.attr).then_with(|| match (&self.cond, &other.cond) {
            (Condition::Equals { code: a, .. }, Condition::Equals { code: b, .. }) => a.cmp(b),
            (Condition::Interval { lo: a, hi: b }, Condition::Interval { lo: c, hi: d }) => {
                a.total_cmp(c).then_with(|| b.total_cmp(d))
            }
            (Condition::Equals { .. }, Condition::Interval { .. }) => Ordering::Less,
            (Condition::Interval { .. }, Condition::Equals { .. }) => Ordering::Greater,
        })
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_token(f, &self.name)?;
        match &self.cond {
            Condition::Equals { value, .. } => {
                f.write_str("=")?;
                write_token(f, value)
            }
            Condition::Interval { lo, hi } => write!(f, "∈[{lo:?},{hi:?}]"),
        }
    }
}

fn is_reserved(c: char) -> bool {
    c.is_whitespace() || matches!(c, '=' | '∈' | '∧' | '[' | ']' | ',' | '"' | '\\')
}

fn write_token(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    if !s.is_empty() && !s.chars().any(is_reserved) && s != "⊤" {
        return f.write_str(s);
    }
    f.write_str("\"")?;
    for c in s.chars() {
        if c == '"' || c == '\\' {
            f.write_str("\\")?;
        }
        write!(f, "{c}")?;
    }
    f.write_str("\"")
}

/// Conjunction of selectors, kept in canonical (attribute) order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Description {
    selectors: Vec<Selector>,
}

impl Description {
    /// The empty conjunction; its extension is every vertex.
    pub fn empty() -> Self {
        Description::default()
    }

    /// At most one selector per attribute.
    pub fn from_selectors(selectors: Vec<Selector>) -> Result<Self> {
        let mut d = Description::empty();
        for s in selectors {
            d = d.refine(&s)?;
        }
        Ok(d)
    }

    /// Skips the one-selector-per-attribute rule. Contradictory conjunctions
    /// such as `b=1 ∧ b=0` then simply have an empty extension.
    pub fn new_unchecked(mut selectors: Vec<Selector>) -> Self {
        selectors.sort();
        selectors.dedup();
        Description { selectors }
    }

    pub fn selectors(&self) -> &[Selector] {
        &self.selectors
    }

    pub fn len(&self) -> usize {
        self.selectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selectors.is_empty()
    }

    pub fn constrains(&self, attr: usize) -> bool {
        self.selectors.iter().any(|s| s.attr == attr)
    }

    /// `self ∧ s`. Rejected when the attribute is already constrained.
    pub fn refine(&self, s: &Selector) -> Result<Description> {
        if self.constrains(s.attr) {
            return Err(Error::AttributeAlreadyConstrained(s.name.to_string()));
        }
        let pos = self.selectors.partition_point(|x| x < s);
        let mut selectors = Vec::with_capacity(self.selectors.len() + 1);
        selectors.extend_from_slice(&self.selectors[..pos]);
        selectors.push(s.clone());
        selectors.extend_from_slice(&self.selectors[pos..]);
        Ok(Description { selectors })
    }

    pub fn extension(&self, g: &AttributedGraph) -> Result<VertexSet> {
        let mut ext = g.full_set();
        for s in &self.selectors {
            ext = ext.intersection(&s.extension(g)?);
        }
        Ok(ext)
    }

    /// True when some attribute appears in both descriptions with different
    /// selectors.
    pub fn shares_attribute_with_different_value(&self, other: &Description) -> bool {
        self.selectors.iter().any(|a| {
            other
                .selectors
                .iter()
                .any(|b| a.attr == b.attr && a != b)
        })
    }

    /// Parses the canonical text form and resolves it against `g`.
    pub fn parse(text: &str, g: &AttributedGraph) -> Result<Description> {
        let parsed = Parser::new(text).description()?;
        let mut selectors = Vec::with_capacity(parsed.len());
        for p in parsed {
            selectors.push(match p.cond {
                RawCondition::Equals(v) => Selector::equals(g, &p.name, &v)?,
                RawCondition::Interval(lo, hi) => Selector::interval(g, &p.name, lo, hi)?,
            });
        }
        Description::from_selectors(selectors)
    }
}

impl fmt::Display for Description {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.selectors.is_empty() {
            return f.write_str("⊤");
        }
        for (i, s) in self.selectors.iter().enumerate() {
            if i > 0 {
                f.write_str(" ∧ ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

enum RawCondition {
    Equals(String),
    Interval(f64, f64),
}

struct RawSelector {
    name: String,
    cond: RawCondition,
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { text, pos: 0 }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn eat(&mut self, lit: &str) -> bool {
        if self.rest().starts_with(lit) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    fn description(&mut self) -> Result<Vec<RawSelector>> {
        self.skip_ws();
        if self.eat("⊤") {
            self.skip_ws();
            return if self.rest().is_empty() {
                Ok(Vec::new())
            } else {
                self.err("trailing input after ⊤")
            };
        }
        let mut out = vec![self.selector()?];
        loop {
            self.skip_ws();
            if self.rest().is_empty() {
                return Ok(out);
            }
            if !self.eat("∧") {
                return self.err("expected `∧`");
            }
            self.skip_ws();
            out.push(self.selector()?);
        }
    }

    fn selector(&mut self) -> Result<RawSelector> {
        let name = self.token()?;
        if self.eat("=") {
            let value = self.token()?;
            Ok(RawSelector {
                name,
                cond: RawCondition::Equals(value),
            })
        } else if self.eat("∈[") {
            let lo = self.number(',')?;
            let hi = self.number(']')?;
            Ok(RawSelector {
                name,
                cond: RawCondition::Interval(lo, hi),
            })
        } else {
            self.err("expected `=` or `∈[`")
        }
    }

    fn number(&mut self, terminator: char) -> Result<f64> {
        let Some(end) = self.rest().find(terminator) else {
            return self.err(format!("expected `{terminator}`"));
        };
        let raw = self.rest()[..end].trim();
        match raw.parse::<f64>() {
            Ok(x) => {
                self.pos += end + terminator.len_utf8();
                Ok(x)
            }
            Err(_) => self.err(format!("bad number `{raw}`")),
        }
    }

    fn token(&mut self) -> Result<String> {
        if self.eat("\"") {
            let mut out = String::new();
            let mut chars = self.rest().char_indices();
            while let Some((i, c)) = chars.next() {
                match c {
                    '"' => {
                        self.pos += i + 1;
                        return Ok(out);
                    }
                    '\\' => match chars.next() {
                        Some((_, e)) => out.push(e),
                        None => break,
                    },
                    c => out.push(c),
                }
            }
            return self.err("unterminated quoted token");
        }
        let len = self
            .rest()
            .char_indices()
            .find(|&(_, c)| is_reserved(c))
            .map(|(i, _)| i)
            .unwrap_or(self.rest().len());
        if len == 0 {
            return self.err("expected a name or value");
        }
        let tok = self.rest()[..len].to_string();
        self.pos += len;
        Ok(tok)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SelectorConfig {
    /// Number of equal-frequency bins per numeric attribute (at least 2).
    pub numeric_bins: usize,
}

impl Default for SelectorConfig {
    fn default() -> Self {
        SelectorConfig { numeric_bins: 6 }
    }
}

/// Builds the selector space: one equality selector per nominal value, and
/// every `[q_i, q_j]`, `i < j`, over the equal-frequency boundaries of each
/// numeric attribute. Selectors covering nothing or every vertex are dropped.
pub fn generate_selectors(g: &AttributedGraph, cfg: &SelectorConfig) -> Result<Vec<Selector>> {
    if cfg.numeric_bins < 2 {
        return Err(Error::InvalidArgument("numeric_bins must be at least 2".into()));
    }
    let n = g.n();
    let mut out = Vec::new();
    for (attr, col) in g.attributes().iter().enumerate() {
        let name: Arc<str> = col.name().into();
        let mut candidates = Vec::new();
        match col.values() {
            AttributeValues::Nominal { domain, .. } => {
                for (code, value) in domain.iter().enumerate() {
                    candidates.push(Selector {
                        attr,
                        name: name.clone(),
                        cond: Condition::Equals {
                            code: code as u32,
                            value: value.as_str().into(),
                        },
                    });
                }
            }
            AttributeValues::Numeric(vals) => {
                let mut present: Vec<f64> = vals.iter().flatten().copied().collect();
                present.sort_by(f64::total_cmp);
                let mut bounds: Vec<f64> = (0..=cfg.numeric_bins)
                    .filter_map(|i| quantile(&present, i as f64 / cfg.numeric_bins as f64))
                    .collect();
                bounds.dedup();
                for i in 0..bounds.len() {
                    for j in i + 1..bounds.len() {
                        candidates.push(Selector {
                            attr,
                            name: name.clone(),
                            cond: Condition::Interval {
                                lo: bounds[i],
                                hi: bounds[j],
                            },
                        });
                    }
                }
            }
        }
        let before = out.len();
        for s in candidates {
            let size = s.extension(g)?.len();
            if size > 0 && size < n {
                out.push(s);
            }
        }
        if out.len() == before {
            log::warn!("attribute `{}` yields no informative selector", col.name());
        }
    }
    Ok(out)
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}
