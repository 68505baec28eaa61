use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::SamplingGrid;
use crate::indicators::IndicatorField;

/// A reconstruction as a set of grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionMask {
    grid: SamplingGrid,
    values: Vec<bool>,
    source: String,
    /// Absolute cutoff the mask was cut at, if it came from a field.
    cutoff: Option<f64>,
}

impl ReconstructionMask {
    pub fn new(grid: SamplingGrid, values: Vec<bool>, source: &str, cutoff: Option<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "mask has {} values for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        if source.is_empty() || source.contains(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!("invalid mask source '{source}'")));
        }
        Ok(Self {
            grid,
            values,
            source: source.to_string(),
            cutoff,
        })
    }

    pub fn grid(&self) -> &SamplingGrid {
        &self.grid
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn cutoff(&self) -> Option<f64> {
        self.cutoff
    }

    pub fn count(&self) -> usize {
        self.values.iter().filter(|v| **v).count()
    }

    /// `QIMK1` text: a header with grid, source, cutoff and extra tags, then
    /// one row of `0`/`1` per grid row, `y_min` first.
    pub fn to_text(&self, tags: &BTreeMap<String, String>) -> String {
        let g = &self.grid;
        let mut out = format!(
            "QIMK1 source={} nx={} ny={} x_min={:e} x_max={:e} y_min={:e} y_max={:e}",
            self.source, g.nx, g.ny, g.x_min, g.x_max, g.y_min, g.y_max
        );
        if let Some(c) = self.cutoff {
            out.push_str(&format!(" cutoff={c:e}"));
        }
        for (k, v) in tags {
            out.push_str(&format!(" t.{k}={v}"));
        }
        out.push('\n');
        for row in self.values.chunks(g.nx) {
            out.extend(row.iter().map(|b| if *b { '1' } else { '0' }));
            out.push('\n');
        }
        out
    }

    /// Parses `QIMK1` text; returns the mask and its extra tags.
    pub fn from_text(text: &str) -> Result<(Self, BTreeMap<String, String>)> {
        let bad = |m: &str| Error::Format(format!("mask file: {m}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty"))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("QIMK1") {
            return Err(bad("expected QIMK1 header"));
        }
        let mut h = BTreeMap::new();
        let mut tags = BTreeMap::new();
        for p in parts {
            let (k, v) = p.split_once('=').ok_or_else(|| bad("malformed header field"))?;
            match k.strip_prefix("t.") {
                Some(t) => {
                    tags.insert(t.to_string(), v.to_string());
                }
                None => {
                    h.insert(k, v);
                }
            }
        }
        let get = |k: &str| h.get(k).copied().ok_or_else(|| bad(&format!("missing '{k}'")));
        let num = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| bad(&format!("invalid '{k}'"))) };
        let int = |k: &str| -> Result<usize> { get(k)?.parse().map_err(|_| bad(&format!("invalid '{k}'"))) };
        let grid = SamplingGrid::new(
            [num("x_min")?, num("x_max")?, num("y_min")?, num("y_max")?],
            int("nx")?,
            int("ny")?,
        )?;
        let cutoff = match h.get("cutoff") {
            Some(_) => Some(num("cutoff")?),
            None => None,
        };
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.ny {
            let row = lines.next().ok_or_else(|| bad("truncated"))?;
            if row.len() != grid.nx {
                return Err(bad("row length mismatch"));
            }
            for c in row.chars() {
                values.push(match c {
                    '1' => true,
                    '0' => false,
                    _ => return Err(bad("expected 0 or 1")),
                });
            }
        }
        Ok((Self::new(grid, values, get("source")?, cutoff)?, tags))
    }
}

/// `{z : field(z) ≥ q·max field}`.
pub fn threshold(field: &IndicatorField, q: f64) -> Result<ReconstructionMask> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidArgument(format!("q must lie in (0, 1), got {q}")));
    }
    let (lo, hi) = (field.min(), field.max());
    if !(hi > lo) {
        return Err(Error::InvalidArgument(format!(
            "no contrast: {} field is constant at {hi:e}",
            field.method()
        )));
    }
    let c = q * hi;
    let values = field.values().iter().map(|v| *v >= c).collect();
    ReconstructionMask::new(field.grid().clone(), values, field.method().tag(), Some(c))
}
