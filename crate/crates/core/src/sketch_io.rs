//! Text files of released sketches.
//!
//! ```text
//! #! mechanism=rr B=3 K=4 family_seed=42 p_star=0.75
//! # any other line starting with '#' is a comment
//! alice<TAB>2,0,2,2
//! bob<TAB>0,0,2,2
//! ```
//!
//! The first `#!` line carries what a reader needs to estimate: the
//! mechanism, `B`, `K`, the hash family seed, and `p_star` (randomized
//! response) or `scale` (Laplace). Each data line is one user: an id, a tab,
//! then comma-separated values. Lines without a tab get their 0-based row
//! number as id. Laplace values use shortest round-trip decimals.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::estimation::{estimate_laplace, estimate_minhash, estimate_rr, Method, SimilarityEstimate};
use crate::privacy::{PrivateSketchLap, PrivateSketchRr};
use crate::sketching::Sketch;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SketchHeader {
    pub mechanism: Method,
    pub buckets: u32,
    pub num_functions: usize,
    pub family_seed: Option<u64>,
    pub keep_probability: Option<f64>,
    pub scale: Option<f64>,
}

impl SketchHeader {
    fn render(&self) -> String {
        let mut line = format!(
            "#! mechanism={} B={} K={}",
            self.mechanism, self.buckets, self.num_functions
        );
        if let Some(seed) = self.family_seed {
            let _ = write!(line, " family_seed={seed}");
        }
        if let Some(p) = self.keep_probability {
            let _ = write!(line, " p_star={p}");
        }
        if let Some(s) = self.scale {
            let _ = write!(line, " scale={s}");
        }
        line
    }

    fn parse(line: &str) -> Result<Self> {
        let body = line.trim_start_matches("#!").trim();
        let mut mechanism = None;
        let mut buckets = None;
        let mut num_functions = None;
        let mut header = SketchHeader {
            mechanism: Method::MinHash,
            buckets: 2,
            num_functions: 0,
            family_seed: None,
            keep_probability: None,
            scale: None,
        };
        for field in body.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("header field {field:?} is not key=value")))?;
            let bad = || Error::Format(format!("bad header value {field:?}"));
            match key {
                "mechanism" => mechanism = Some(value.parse::<Method>()?),
                "B" => buckets = Some(value.parse().map_err(|_| bad())?),
                "K" => num_functions = Some(value.parse().map_err(|_| bad())?),
                "family_seed" => header.family_seed = Some(value.parse().map_err(|_| bad())?),
                "p_star" => header.keep_probability = Some(value.parse().map_err(|_| bad())?),
                "scale" => header.scale = Some(value.parse().map_err(|_| bad())?),
                _ => {}
            }
        }
        let missing = |what: &str| Error::Format(format!("sketch header lacks {what}"));
        header.mechanism = mechanism.ok_or_else(|| missing("mechanism"))?;
        header.buckets = buckets.ok_or_else(|| missing("B"))?;
        header.num_functions = num_functions.ok_or_else(|| missing("K"))?;
        match header.mechanism {
            Method::Rr if header.keep_probability.is_none() => return Err(missing("p_star")),
            Method::Laplace if header.scale.is_none() => return Err(missing("scale")),
            _ => {}
        }
        Ok(header)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReleasedSketch {
    MinHash(Sketch),
    Rr(PrivateSketchRr),
    Laplace(PrivateSketchLap),
}

impl ReleasedSketch {
    fn to_text(&self) -> String {
        match self {
            ReleasedSketch::MinHash(s) => s.to_text(),
            ReleasedSketch::Rr(s) => s.to_text(),
            ReleasedSketch::Laplace(s) => s.to_text(),
        }
    }

    fn len(&self) -> usize {
        match self {
            ReleasedSketch::MinHash(s) => s.len(),
            ReleasedSketch::Rr(s) => s.len(),
            ReleasedSketch::Laplace(s) => s.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SketchFile {
    pub header: SketchHeader,
    pub rows: Vec<(String, ReleasedSketch)>,
}

impl SketchFile {
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", self.header.render())?;
        for (id, sketch) in &self.rows {
            writeln!(out, "{id}\t{}", sketch.to_text())?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let mut header = None;
        let mut rows = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let at = |e: Error| Error::Format(format!("line {}: {e}", lineno + 1));
            if line.starts_with("#!") && header.is_none() {
                header = Some(SketchHeader::parse(&line).map_err(at)?);
                continue;
            }
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let h: &SketchHeader = header
                .as_ref()
                .ok_or_else(|| Error::Format("sketch file has no '#!' header line".into()))?;
            let (id, values) = match line.split_once('\t') {
                Some((id, values)) => (id.to_string(), values),
                None => (rows.len().to_string(), line.as_str()),
            };
            let sketch = match h.mechanism {
                Method::MinHash => ReleasedSketch::MinHash(Sketch::from_text(values, h.buckets).map_err(at)?),
                Method::Rr => ReleasedSketch::Rr(PrivateSketchRr::from_text(values, h.buckets).map_err(at)?),
                Method::Laplace => ReleasedSketch::Laplace(PrivateSketchLap::from_text(values).map_err(at)?),
            };
            if sketch.len() != h.num_functions {
                return Err(at(Error::LengthMismatch {
                    left: sketch.len(),
                    right: h.num_functions,
                }));
            }
            rows.push((id, sketch));
        }
        let header = header.ok_or_else(|| Error::Format("sketch file has no '#!' header line".into()))?;
        Ok(SketchFile { header, rows })
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read(std::io::BufReader::new(file))
    }
}

/// Checks that two files were released under the same family and mechanism.
pub fn check_compatible(a: &SketchHeader, b: &SketchHeader) -> Result<()> {
    if a != b {
        return Err(Error::Format(format!(
            "sketch files disagree on their release parameters: {:?} vs {:?}",
            a.render(),
            b.render()
        )));
    }
    Ok(())
}

/// Estimates the similarity of two released sketches under `header`.
pub fn estimate_released(
    header: &SketchHeader,
    x: &ReleasedSketch,
    y: &ReleasedSketch,
) -> Result<SimilarityEstimate> {
    match (x, y) {
        (ReleasedSketch::MinHash(a), ReleasedSketch::MinHash(b)) => estimate_minhash(a, b, header.buckets),
        (ReleasedSketch::Rr(a), ReleasedSketch::Rr(b)) => {
            let p = header.keep_probability.ok_or(Error::ZeroBudget)?;
            estimate_rr(a, b, header.buckets, p)
        }
        (ReleasedSketch::Laplace(a), ReleasedSketch::Laplace(b)) => {
            let scale = header
                .scale
                .ok_or_else(|| Error::Format("missing Laplace scale".into()))?;
            estimate_laplace(a, b, header.buckets, scale)
        }
        _ => Err(Error::Format("cannot compare sketches of different mechanisms".into())),
    }
}
