//! Run configuration shared by the command-line front end: prior and mode
//! specifications and `key=value` config files.

use std::fmt;
use std::str::FromStr;

use crate::background::{fit_block_prior, fit_degree_prior, fit_density_prior, observed_density};
use crate::background::{BackgroundModel, FitOptions, FitReport};
use crate::error::{Error, Result};
use crate::graph::AttributedGraph;

/// `degree`, `density`, `density:<p>`, or `blocks:<attr>[,<attr>...][+degree]`.
#[derive(Clone, Debug, PartialEq)]
pub enum PriorSpec {
    Degree,
    /// `None` uses the observed density.
    Density(Option<f64>),
    Blocks { attributes: Vec<String>, with_degrees: bool },
}

impl FromStr for PriorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown prior `{s}`"));
        match s {
            "degree" => return Ok(PriorSpec::Degree),
            "density" => return Ok(PriorSpec::Density(None)),
            _ => {}
        }
        if let Some(p) = s.strip_prefix("density:") {
            let p: f64 = p.parse().map_err(|_| bad())?;
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidArgument(format!("density must lie in (0,1), got {p}")));
            }
            return Ok(PriorSpec::Density(Some(p)));
        }
        let rest = s.strip_prefix("blocks:").ok_or_else(bad)?;
        let (names, with_degrees) = match rest.strip_suffix("+degree") {
            Some(r) => (r, true),
            None => (rest, false),
        };
        let attributes: Vec<String> = names.split(',').map(|a| a.trim().to_string()).collect();
        if attributes.iter().any(|a| a.is_empty()) {
            return Err(bad());
        }
        Ok(PriorSpec::Blocks {
            attributes,
            with_degrees,
        })
    }
}

impl fmt::Display for PriorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PriorSpec::Degree => f.write_str("degree"),
            PriorSpec::Density(None) => f.write_str("density"),
            PriorSpec::Density(Some(p)) => write!(f, "density:{p}"),
            PriorSpec::Blocks {
                attributes,
                with_degrees,
            } => {
                write!(f, "blocks:{}", attributes.join(","))?;
                if *with_degrees {
                    f.write_str("+degree")?;
                }
                Ok(())
            }
        }
    }
}

impl PriorSpec {
    /// Fit the prior; the report is `None` for closed-form priors.
    pub fn fit(&self, g: &AttributedGraph, opts: &FitOptions) -> Result<(BackgroundModel, Option<FitReport>)> {
        match self {
            PriorSpec::Degree => fit_degree_prior(g, opts).map(|(m, r)| (m, Some(r))),
            PriorSpec::Density(p) => {
                let p = p.unwrap_or_else(|| observed_density(g));
                Ok((fit_density_prior(g, p)?, None))
            }
            PriorSpec::Blocks {
                attributes,
                with_degrees,
            } => {
                let names: Vec<&str> = attributes.iter().map(String::as_str).collect();
                fit_block_prior(g, &names, *with_degrees, opts).map(|(m, r)| (m, Some(r)))
            }
        }
    }
}

/// `single`, `bi`, or `iterate:<rounds>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Single,
    Bi,
    Iterate(usize),
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Mode::Single),
            "bi" => Ok(Mode::Bi),
            _ => {
                let r = s
                    .strip_prefix("iterate:")
                    .and_then(|r| r.parse::<usize>().ok())
                    .filter(|&r| r > 0)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown mode `{s}`")))?;
                Ok(Mode::Iterate(r))
            }
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Single => f.write_str("single"),
            Mode::Bi => f.write_str("bi"),
            Mode::Iterate(r) => write!(f, "iterate:{r}"),
        }
    }
}

/// Parse `key = value` lines. Blank lines and `#` comments are skipped; keys
/// may use `-` or `_` interchangeably and are returned with `-`.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            file: "<config>".into(),
            line: i + 1,
            msg: "expected key=value".into(),
        })?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(Error::Parse {
                file: "<config>".into(),
                line: i + 1,
                msg: "empty key".into(),
            });
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;

    #[test]
    fn prior_specs() {
        assert_eq!("degree".parse::<PriorSpec>().unwrap(), PriorSpec::Degree);
        assert_eq!("density:0.01".parse::<PriorSpec>().unwrap(), PriorSpec::Density(Some(0.01)));
        assert_eq!(
            "blocks:year,country+degree".parse::<PriorSpec>().unwrap(),
            PriorSpec::Blocks {
                attributes: vec!["year".into(), "country".into()],
                with_degrees: true
            }
        );
        for s in ["degree", "density", "density:0.5", "blocks:a", "blocks:a,b+degree"] {
            assert_eq!(s.parse::<PriorSpec>().unwrap().to_string(), s);
        }
        for s in ["", "blocks:", "blocks:a,,b", "density:x", "density:1", "density:0", "uniform"] {
            assert!(s.parse::<PriorSpec>().is_err(), "{s}");
        }
    }

    #[test]
    fn observed_density_prior() {
        let g = path(5);
        let (m, r) = PriorSpec::Density(None).fit(&g, &FitOptions::default()).unwrap();
        assert!(r.is_none());
        assert!((m.edge_probability(0, 4).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn modes() {
        assert_eq!("single".parse::<Mode>().unwrap(), Mode::Single);
        assert_eq!("iterate:4".parse::<Mode>().unwrap(), Mode::Iterate(4));
        assert!("iterate:0".parse::<Mode>().is_err());
        assert!("iterate".parse::<Mode>().is_err());
        assert_eq!(Mode::Iterate(3).to_string(), "iterate:3");
    }

    #[test]
    fn config_lines() {
        let c = parse_config("# run\nbeam_width = 20\n\nprior=degree\n").unwrap();
        assert_eq!(c, vec![("beam-width".into(), "20".into()), ("prior".into(), "degree".into())]);
        assert!(parse_config("oops").is_err());
        assert!(parse_config("=3").is_err());
    }
}
