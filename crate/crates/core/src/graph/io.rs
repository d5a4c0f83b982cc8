//! Edge-list and attribute-table ingestion, plus the canonical writer.
//!
//! Edge file: one edge per line, two whitespace-separated vertex labels,
//! `#` comment lines and blank lines ignored.
//!
//! Attribute file: delimited table with a header row and one id column.
//! Header cells may carry a `:nominal` or `:numeric` suffix to pin the
//! column kind; otherwise a column is numeric when every present value
//! parses as a finite number and at least one is not an integer literal.
//! Integer-coded columns (years, dorm ids, 0/1 flags) stay nominal.
//! Empty cells are missing values.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{AttributeColumn, AttributeKind, AttributeValues, AttributedGraph, VertexId};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct LoadOptions {
    pub directed: bool,
    pub delimiter: u8,
    /// Name of the id column; the first column when `None`.
    pub id_column: Option<String>,
    pub force_nominal: Vec<String>,
    pub force_numeric: Vec<String>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            directed: false,
            delimiter: b',',
            id_column: None,
            force_nominal: Vec::new(),
            force_numeric: Vec::new(),
        }
    }
}

pub fn load_graph(
    edge_path: impl AsRef<Path>,
    attr_path: impl AsRef<Path>,
    options: &LoadOptions,
) -> Result<AttributedGraph> {
    let (labels, attributes) = read_attributes(attr_path.as_ref(), options)?;
    let index: HashMap<&str, VertexId> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i as VertexId))
        .collect();
    let edges = read_edges(edge_path.as_ref(), &index)?;
    AttributedGraph::with_labels(labels.clone(), &edges, options.directed, attributes)
}

fn read_edges(path: &Path, index: &HashMap<&str, VertexId>) -> Result<Vec<(VertexId, VertexId)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut edges = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let (Some(u), Some(v), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(Error::Parse {
                file: path.display().to_string(),
                line: lineno + 1,
                msg: "expected exactly two vertex labels".into(),
            });
        };
        let lookup = |l: &str| {
            index
                .get(l)
                .copied()
                .ok_or_else(|| Error::UnknownVertex(l.to_string()))
        };
        edges.push((lookup(u)?, lookup(v)?));
    }
    Ok(edges)
}

fn read_attributes(path: &Path, options: &LoadOptions) -> Result<(Vec<String>, Vec<AttributeColumn>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .flexible(true)
        .from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let id_col = match &options.id_column {
        None => 0,
        Some(name) => header
            .iter()
            .position(|h| strip_kind(h).0 == name)
            .ok_or_else(|| Error::UnknownAttribute(name.clone()))?,
    };
    let mut labels = Vec::new();
    let mut cells: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                row: row + 2,
                got: record.len(),
                expected: header.len(),
            });
        }
        for (j, field) in record.iter().enumerate() {
            if j == id_col {
                labels.push(field.trim().to_string());
            } else {
                cells[j].push(field.trim().to_string());
            }
        }
    }
    let mut seen = HashMap::with_capacity(labels.len());
    for l in &labels {
        if seen.insert(l.as_str(), ()).is_some() {
            return Err(Error::DuplicateVertex(l.clone()));
        }
    }

    let mut attributes = Vec::new();
    for (j, raw_name) in header.iter().enumerate() {
        if j == id_col {
            continue;
        }
        let (name, pinned) = strip_kind(raw_name);
        let kind = if options.force_nominal.iter().any(|n| n == name) {
            AttributeKind::Nominal
        } else if options.force_numeric.iter().any(|n| n == name) {
            AttributeKind::Numeric
        } else {
            pinned.unwrap_or_else(|| infer_kind(&cells[j]))
        };
        attributes.push(build_column(name, kind, &cells[j])?);
    }
    Ok((labels, attributes))
}

fn strip_kind(header: &str) -> (&str, Option<AttributeKind>) {
    if let Some(name) = header.strip_suffix(":nominal") {
        (name, Some(AttributeKind::Nominal))
    } else if let Some(name) = header.strip_suffix(":numeric") {
        (name, Some(AttributeKind::Numeric))
    } else {
        (header, None)
    }
}

fn infer_kind(cells: &[String]) -> AttributeKind {
    let present: Vec<&String> = cells.iter().filter(|c| !c.is_empty()).collect();
    let all_numbers = !present.is_empty()
        && present
            .iter()
            .all(|c| c.parse::<f64>().map(f64::is_finite).unwrap_or(false));
    let any_fractional = present.iter().any(|c| c.parse::<i64>().is_err());
    if all_numbers && any_fractional {
        AttributeKind::Numeric
    } else {
        AttributeKind::Nominal
    }
}

fn build_column(name: &str, kind: AttributeKind, cells: &[String]) -> Result<AttributeColumn> {
    match kind {
        AttributeKind::Nominal => {
            let values: Vec<Option<&str>> = cells
                .iter()
                .map(|c| (!c.is_empty()).then_some(c.as_str()))
                .collect();
            Ok(AttributeColumn::nominal(name, &values))
        }
        AttributeKind::Numeric => {
            let values = cells
                .iter()
                .map(|c| {
                    if c.is_empty() {
                        Ok(None)
                    } else {
                        c.parse::<f64>().map(Some).map_err(|_| {
                            Error::InvalidArgument(format!(
                                "numeric attribute `{name}` has non-numeric value `{c}`"
                            ))
                        })
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            AttributeColumn::numeric(name, values)
        }
    }
}

/// Writes the graph in the formats `load_graph` reads. Column kinds are
/// pinned in the header so a reload reproduces them exactly.
pub fn write_graph(
    g: &AttributedGraph,
    edge_path: impl AsRef<Path>,
    attr_path: impl AsRef<Path>,
) -> Result<()> {
    let edge_path = edge_path.as_ref();
    let file = File::create(edge_path).map_err(|e| Error::io(edge_path, e))?;
    let mut out = BufWriter::new(file);
    for (u, v) in g.edges() {
        writeln!(out, "{} {}", g.label(u), g.label(v)).map_err(|e| Error::io(edge_path, e))?;
    }
    out.flush().map_err(|e| Error::io(edge_path, e))?;

    let attr_path = attr_path.as_ref();
    let mut w = csv::Writer::from_path(attr_path)?;
    let mut header = vec!["id".to_string()];
    header.extend(
        g.attributes()
            .iter()
            .map(|c| format!("{}:{}", c.name(), c.kind().as_str())),
    );
    w.write_record(&header)?;
    for v in 0..g.n() {
        let mut row = vec![g.labels()[v].clone()];
        for col in g.attributes() {
            row.push(match col.values() {
                AttributeValues::Numeric(vals) => vals[v].map(|x| format!("{x:?}")).unwrap_or_default(),
                AttributeValues::Nominal { .. } => col.display_value(v).unwrap_or_default(),
            });
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(attr_path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn smallest_graph() {
        let dir = tempfile::tempdir().unwrap();
        let e = write(dir.path(), "e.txt", "0 1\n");
        let a = write(dir.path(), "a.csv", "id,x\n0,p\n1,q\n");
        let g = load_graph(&e, &a, &LoadOptions::default()).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn example_attribute_table_kinds() {
        let dir = tempfile::tempdir().unwrap();
        let body = "v,a,b,c,d\n\
            0,3.5,1,0,1\n1,2.6,1,0,0\n2,3.8,1,1,1\n3,3.2,1,0,1\n4,1.8,1,0,1\n\
            5,1.2,0,0,0\n6,5.4,0,1,0\n7,0.9,1,1,0\n8,6.7,0,1,0\n9,2.3,0,1,1\n10,3.1,0,1,0\n";
        let a = write(dir.path(), "a.csv", body);
        let e = write(dir.path(), "e.txt", "# comment\n0 1\n\n2 3\n");
        let g = load_graph(&e, &a, &LoadOptions::default()).unwrap();
        assert_eq!(g.n(), 11);
        let kinds: Vec<_> = g.attributes().iter().map(|c| (c.name(), c.kind())).collect();
        assert_eq!(
            kinds,
            vec![
                ("a", AttributeKind::Numeric),
                ("b", AttributeKind::Nominal),
                ("c", AttributeKind::Nominal),
                ("d", AttributeKind::Nominal),
            ]
        );
    }

    #[test]
    fn labels_are_reindexed() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.tsv", "name\tscore\nalice\t1.5\nbob\t\ncarol\t2\n");
        let e = write(dir.path(), "e.txt", "carol\talice\n");
        let opts = LoadOptions {
            delimiter: b'\t',
            ..Default::default()
        };
        let g = load_graph(&e, &a, &opts).unwrap();
        assert_eq!(g.labels(), &["alice", "bob", "carol"]);
        assert!(g.has_edge(0, 2));
        match g.attributes()[0].values() {
            AttributeValues::Numeric(v) => assert_eq!(v, &[Some(1.5), None, Some(2.0)]),
            _ => panic!("score should be numeric"),
        }
    }

    #[test]
    fn id_column_by_name_and_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", "year,id\n2008,x\n2009,y\n");
        let e = write(dir.path(), "e.txt", "x y\n");
        let opts = LoadOptions {
            id_column: Some("id".into()),
            force_numeric: vec!["year".into()],
            ..Default::default()
        };
        let g = load_graph(&e, &a, &opts).unwrap();
        assert_eq!(g.attributes()[0].kind(), AttributeKind::Numeric);
        assert_eq!(g.labels(), &["x", "y"]);
    }

    #[test]
    fn load_errors() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", "id,x\n0,a\n1,b\n2,c\n3,d\n");
        let cases = [
            ("3 3\n", "self-loop"),
            ("0 1\n1 0\n", "duplicate"),
            ("0 9\n", "unknown"),
            ("0 1 2\n", "two"),
        ];
        for (body, needle) in cases {
            let e = write(dir.path(), "e.txt", body);
            let err = load_graph(&e, &a, &LoadOptions::default()).unwrap_err();
            assert!(err.to_string().contains(needle), "{err}");
        }
        let ragged = write(dir.path(), "r.csv", "id,x,y\n0,a,b\n1,c\n");
        let e = write(dir.path(), "e.txt", "0 1\n");
        assert!(matches!(
            load_graph(&e, &ragged, &LoadOptions::default()),
            Err(Error::RaggedRow { row: 3, got: 2, expected: 3 })
        ));
        let dup = write(dir.path(), "d.csv", "id,x\n0,a\n0,b\n");
        assert!(matches!(
            load_graph(&e, &dup, &LoadOptions::default()),
            Err(Error::DuplicateVertex(_))
        ));
    }

    #[test]
    fn writer_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let attrs = vec![
            AttributeColumn::numeric("w", vec![Some(1.0), None, Some(1e-7)]).unwrap(),
            AttributeColumn::nominal("tag", &[Some("3.5"), Some("a b"), None]),
        ];
        let g = AttributedGraph::with_labels(
            vec!["u".into(), "v".into(), "w".into()],
            &[(0, 2), (1, 2)],
            false,
            attrs,
        )
        .unwrap();
        let e = dir.path().join("e.txt");
        let a = dir.path().join("a.csv");
        write_graph(&g, &e, &a).unwrap();
        let back = load_graph(&e, &a, &LoadOptions::default()).unwrap();
        assert_eq!(back.labels(), g.labels());
        assert_eq!(back.attributes(), g.attributes());
        assert_eq!(back.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
    }
}
