use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::SamplingGrid;

/// Which reconstruction produced a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Lsm,
    FactorizationPicard,
    FactorizationRegularized,
    Dsm,
    OsmOneWave,
    OsmMultiWave,
    SingularSources,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Lsm,
        Method::FactorizationPicard,
        Method::FactorizationRegularized,
        Method::Dsm,
        Method::OsmOneWave,
        Method::OsmMultiWave,
        Method::SingularSources,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Method::Lsm => "lsm",
            Method::FactorizationPicard => "factorization-picard",
            Method::FactorizationRegularized => "factorization-regularized",
            Method::Dsm => "dsm",
            Method::OsmOneWave => "osm-one-wave",
            Method::OsmMultiWave => "osm-multi-wave",
            Method::SingularSources => "singular-sources",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| Error::Format(format!("unknown method tag '{s}'")))
    }
}

/// Values of an indicator on a sampling grid, row-major with row 0 at
/// `y_min`. Larger values mean "more inside".
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorField {
    grid: SamplingGrid,
    values: Vec<f64>,
    method: Method,
    parameters: BTreeMap<String, String>,
    /// The raw quantity blows up outside and the field is its reciprocal.
    inverted: bool,
}

impl IndicatorField {
    pub fn new(grid: SamplingGrid, values: Vec<f64>, method: Method, inverted: bool) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "indicator values must be finite and non-negative, found {v}"
            )));
        }
        Ok(Self {
            grid,
            values,
            method,
            parameters: BTreeMap::new(),
            inverted,
        })
    }

    /// Records a parameter. Keys and values must not contain whitespace or `=`
    /// in the key.
    pub fn with_parameter(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.set_parameter(key, value);
        self
    }

    pub fn set_parameter(&mut self, key: &str, value: impl fmt::Display) {
        let value = value.to_string();
        assert!(
            !key.is_empty() && !key.contains(|c: char| c.is_whitespace() || c == '='),
            "invalid parameter key '{key}'"
        );
        assert!(
            !value.contains(char::is_whitespace),
            "invalid parameter value '{value}'"
        );
        self.parameters.insert(key.to_string(), value);
    }

    pub fn grid(&self) -> &SamplingGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn parameters(&self) -> &BTreeMap<String, String> {
        &self.parameters
    }

    pub fn parameter(&self, key: &str) -> Option<&str> {
        self.parameters.get(key).map(String::as_str)
    }

    pub fn inverted(&self) -> bool {
        self.inverted
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.grid.nx + ix]
    }

    /// Index of the largest value (first one on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        best
    }

    /// Serialises to the `QIIF1` text format:
    ///
    /// ```text
    /// QIIF1 method=<tag> nx=<int> ny=<int> x_min=<f> x_max=<f> y_min=<f> y_max=<f> inverted=<0|1> [p.<key>=<value> ...]
    /// <ny lines of nx comma-separated values, row 0 = y_min>
    /// ```
    pub fn to_text(&self) -> String {
        let g = &self.grid;
        let mut out = format!(
            "QIIF1 method={} nx={} ny={} x_min={:e} x_max={:e} y_min={:e} y_max={:e} inverted={}",
            self.method,
            g.nx,
            g.ny,
            g.x_min,
            g.x_max,
            g.y_min,
            g.y_max,
            u8::from(self.inverted)
        );
        for (k, v) in &self.parameters {
            out.push_str(&format!(" p.{k}={v}"));
        }
        out.push('\n');
        for row in self.values.chunks(g.nx) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let err = |m: String| Error::Format(m);
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| err("empty field file".into()))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("QIIF1") {
            return Err(err("expected QIIF1 header".into()));
        }
        let mut fields = BTreeMap::new();
        let mut parameters = BTreeMap::new();
        for p in parts {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| err(format!("malformed header field '{p}'")))?;
            match k.strip_prefix("p.") {
                Some(name) => parameters.insert(name.to_string(), v.to_string()),
                None => fields.insert(k, v.to_string()),
            };
        }
        let get = |k: &str| fields.get(k).ok_or_else(|| err(format!("missing header field '{k}'")));
        let float = |k: &str| -> Result<f64> {
            get(k)?
                .parse()
                .map_err(|_| err(format!("bad number in header field '{k}'")))
        };
        let int = |k: &str| -> Result<usize> {
            get(k)?
                .parse()
                .map_err(|_| err(format!("bad integer in header field '{k}'")))
        };
        let method: Method = get("method")?.parse()?;
        let grid = SamplingGrid::new(
            [float("x_min")?, float("x_max")?, float("y_min")?, float("y_max")?],
            int("nx")?,
            int("ny")?,
        )
        .map_err(|e| err(e.to_string()))?;
        let inverted = match get("inverted")?.as_str() {
            "0" => false,
            "1" => true,
            other => return Err(err(format!("bad inverted flag '{other}'"))),
        };
        let mut values = Vec::with_capacity(grid.len());
        for (r, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| err(format!("bad value in row {r}")))?;
            if row.len() != grid.nx {
                return Err(err(format!("row {r} has {} values, expected {}", row.len(), grid.nx)));
            }
            values.extend(row);
        }
        if values.len() != grid.len() {
            return Err(err(format!("expected {} rows", grid.ny)));
        }
        let mut f = IndicatorField::new(grid, values, method, inverted).map_err(|e| err(e.to_string()))?;
        f.parameters = parameters;
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> IndicatorField {
        let grid = SamplingGrid::new([-1.0, 1.0, -2.0, 2.0], 3, 2).unwrap();
        IndicatorField::new(grid, vec![0.0, 1.5, 1e-300, 2.0 / 3.0, 7.0, 0.1], Method::Dsm, false)
            .unwrap()
            .with_parameter("alpha", 1e-8)
            .with_parameter("aperture", "full")
    }

    #[test]
    fn text_round_trip() {
        let f = sample();
        let back = IndicatorField::from_text(&f.to_text()).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.parameter("alpha"), Some("0.00000001"));
    }

    #[test]
    fn rejects_bad_values() {
        let grid = SamplingGrid::new([-1.0, 1.0, -1.0, 1.0], 2, 2).unwrap();
        assert!(IndicatorField::new(grid.clone(), vec![0.0; 3], Method::Lsm, true).is_err());
        assert!(IndicatorField::new(grid.clone(), vec![0.0, -1.0, 0.0, 0.0], Method::Lsm, true).is_err());
        assert!(IndicatorField::new(grid, vec![0.0, f64::NAN, 0.0, 0.0], Method::Lsm, true).is_err());
    }

    #[test]
    fn rejects_malformed_text() {
        let text = sample().to_text();
        assert!(IndicatorField::from_text(&text.replace("QIIF1", "QIFF1")).is_err());
        assert!(IndicatorField::from_text(&text.replace("method=dsm", "method=nope")).is_err());
        let truncated: String = text.lines().take(2).map(|l| format!("{l}\n")).collect();
        assert!(IndicatorField::from_text(&truncated).is_err());
    }

    #[test]
    fn method_tags_parse() {
        for m in Method::ALL {
            assert_eq!(m.tag().parse::<Method>().unwrap(), m);
        }
    }

    #[test]
    fn argmax_and_extremes() {
        let f = sample();
        assert_eq!(f.argmax(), 4);
        assert_eq!(f.max(), 7.0);
        assert_eq!(f.min(), 0.0);
        assert_eq!(f.value(1, 1), 7.0);
    }
}
