use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::farfield_op::Regularization;
use crate::geometry::{Aperture, BoundaryCurve, NeedleSpec, Obstacle, Point, RigidMotion, SamplingGrid, Shape};
use crate::indicators::{Cutoff, NoResponseParams, SingularSourcesParams};

fn default_directions() -> usize {
    64
}

fn default_aperture() -> Aperture {
    Aperture::Full
}

fn default_nodes() -> usize {
    128
}

fn default_q() -> f64 {
    0.5
}

fn default_output() -> PathBuf {
    PathBuf::from("run")
}

/// One obstacle component: a catalogue shape rotated by `angle` and moved to
/// `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentConfig {
    pub shape: Shape,
    #[serde(default)]
    pub center: [f64; 2],
    #[serde(default)]
    pub angle: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// `[x_min, x_max, y_min, y_max]`.
    #[serde(default = "GridConfig::default_bbox")]
    pub bbox: [f64; 4],
    #[serde(default = "GridConfig::default_size")]
    pub nx: usize,
    #[serde(default = "GridConfig::default_size")]
    pub ny: usize,
}

impl GridConfig {
    fn default_bbox() -> [f64; 4] {
        [-2.0, 2.0, -2.0, 2.0]
    }

    fn default_size() -> usize {
        64
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            bbox: Self::default_bbox(),
            nx: Self::default_size(),
            ny: Self::default_size(),
        }
    }
}

/// `regularization = { fixed = 1e-8 }` or `regularization = "morozov"`; the
/// Morozov level is the configured noise level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegularizationConfig {
    Fixed(f64),
    Morozov,
}

impl Default for RegularizationConfig {
    fn default() -> Self {
        RegularizationConfig::Fixed(1e-8)
    }
}

impl RegularizationConfig {
    pub fn resolve(&self, noise: f64) -> Regularization {
        match self {
            RegularizationConfig::Fixed(a) => Regularization::Fixed(*a),
            RegularizationConfig::Morozov => Regularization::Morozov(noise),
        }
    }
}

/// `truncation = "auto"` or `truncation = { fixed = 20 }`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TruncationConfig {
    #[default]
    Auto,
    Fixed(usize),
}

fn default_domain_radius() -> f64 {
    1.2
}

fn default_centers() -> usize {
    9
}

fn default_tau_min() -> f64 {
    2.0
}

fn default_tau_max() -> f64 {
    12.0
}

fn default_tau_count() -> usize {
    21
}

fn default_omegas() -> usize {
    8
}

fn default_cauchy_radius() -> f64 {
    3.0
}

fn default_cauchy_nodes() -> usize {
    512
}

fn default_two_means() -> Cutoff {
    Cutoff::TwoMeans
}

fn default_singular() -> SingularSourcesParams {
    SingularSourcesParams::default()
}

/// One reconstruction method and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MethodConfig {
    Lsm {
        #[serde(default)]
        regularization: RegularizationConfig,
    },
    FactorizationPicard {
        #[serde(default)]
        truncation: TruncationConfig,
    },
    FactorizationRegularized {
        #[serde(default)]
        regularization: RegularizationConfig,
    },
    Dsm {},
    OsmOneWave {
        #[serde(default)]
        incidence: usize,
    },
    OsmMultiWave {},
    SingularSources {
        #[serde(default = "default_singular")]
        params: SingularSourcesParams,
    },
    /// Disc test domains of radius `domain_radius` centred on a
    /// `centers × centers` lattice over the grid box.
    NoResponse {
        #[serde(default)]
        incidence: usize,
        #[serde(default = "default_domain_radius")]
        domain_radius: f64,
        #[serde(default = "default_centers")]
        centers: usize,
        #[serde(default)]
        params: NoResponseParams,
        #[serde(default = "default_two_means")]
        cutoff: Cutoff,
    },
    /// Cauchy data on a circle of radius `radius` about the origin for the
    /// plane wave at `incidence_angle`.
    Enclosure {
        #[serde(default = "default_tau_min")]
        tau_min: f64,
        #[serde(default = "default_tau_max")]
        tau_max: f64,
        #[serde(default = "default_tau_count")]
        tau_count: usize,
        #[serde(default = "default_omegas")]
        omegas: usize,
        #[serde(default = "default_cauchy_radius")]
        radius: f64,
        #[serde(default = "default_cauchy_nodes")]
        nodes: usize,
        #[serde(default)]
        incidence_angle: f64,
    },
}

impl MethodConfig {
    /// File stem of the method's artifacts.
    pub fn tag(&self) -> &'static str {
        match self {
            MethodConfig::Lsm { .. } => "lsm",
            MethodConfig::FactorizationPicard { .. } => "factorization-picard",
            MethodConfig::FactorizationRegularized { .. } => "factorization-regularized",
            MethodConfig::Dsm {} => "dsm",
            MethodConfig::OsmOneWave { .. } => "osm-one-wave",
            MethodConfig::OsmMultiWave {} => "osm-multi-wave",
            MethodConfig::SingularSources { .. } => "singular-sources",
            MethodConfig::NoResponse { .. } => "no-response",
            MethodConfig::Enclosure { .. } => "enclosure",
        }
    }
}

/// A complete experiment: obstacle, data synthesis, methods, grid and
/// output. Parsing fills in every default, so the serialized form is
/// explicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Wavenumber.
    pub k: f64,
    /// Incidence and observation direction count.
    #[serde(default = "default_directions")]
    pub directions: usize,
    #[serde(default = "default_aperture")]
    pub aperture: Aperture,
    /// Relative noise level `δ`.
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
    /// Boundary nodes per component for the forward solver.
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    /// Threshold fraction: mask = `{field ≥ q·max}`.
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub grid: GridConfig,
    pub obstacle: Vec<ComponentConfig>,
    pub methods: Vec<MethodConfig>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    /// Parses and validates a TOML config.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical TOML with every default written out.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(config_err(format!("k must be positive, got {}", self.k)));
        }
        if self.directions < 4 || !self.directions.is_multiple_of(2) {
            return Err(config_err(format!(
                "directions must be even and at least 4, got {}",
                self.directions
            )));
        }
        if let Aperture::Arc { start, end } = self.aperture {
            if !(start.is_finite() && end.is_finite() && end > start) {
                return Err(config_err(format!("invalid aperture arc [{start}, {end}]")));
            }
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(config_err(format!("noise must be non-negative, got {}", self.noise)));
        }
        if self.nodes < 16 {
            return Err(config_err(format!(
                "at least 16 boundary nodes needed, got {}",
                self.nodes
            )));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(config_err(format!("q must lie in (0, 1), got {}", self.q)));
        }
        self.sampling_grid()?;
        if self.obstacle.is_empty() {
            return Err(config_err("obstacle needs at least one component"));
        }
        for c in &self.obstacle {
            if matches!(c.shape, Shape::Polygon { .. }) {
                return Err(config_err(
                    "polygon obstacles have no smooth boundary for the forward solver",
                ));
            }
        }
        self.obstacle()?;
        if self.methods.is_empty() {
            return Err(config_err("no methods selected"));
        }
        for m in &self.methods {
            self.validate_method(m)?;
        }
        let mut tags: Vec<&str> = self.methods.iter().map(|m| m.tag()).collect();
        tags.sort_unstable();
        if tags.windows(2).any(|w| w[0] == w[1]) {
            return Err(config_err("each method may be selected once"));
        }
        Ok(())
    }

    fn validate_method(&self, m: &MethodConfig) -> Result<()> {
        let reg = |r: &RegularizationConfig| match r {
            RegularizationConfig::Fixed(a) if !(a.is_finite() && *a > 0.0) => {
                Err(config_err(format!("{}: alpha must be positive, got {a}", m.tag())))
            }
            RegularizationConfig::Morozov if self.noise <= 0.0 => Err(config_err(format!(
                "{}: the discrepancy principle needs a positive noise level",
                m.tag()
            ))),
            _ => Ok(()),
        };
        match m {
            MethodConfig::Lsm { regularization } | MethodConfig::FactorizationRegularized { regularization } => {
                reg(regularization)
            }
            MethodConfig::FactorizationPicard {
                truncation: TruncationConfig::Fixed(0),
            } => Err(config_err("factorization-picard: truncation must be positive")),
            MethodConfig::OsmOneWave { incidence } | MethodConfig::NoResponse { incidence, .. }
                if *incidence >= self.directions =>
            {
                Err(config_err(format!(
                    "{}: incidence index {incidence} out of range",
                    m.tag()
                )))
            }
            MethodConfig::NoResponse {
                domain_radius, centers, ..
            } if !(*domain_radius > 0.0) || *centers == 0 => {
                Err(config_err("no-response: domain_radius and centers must be positive"))
            }
            MethodConfig::Enclosure {
                tau_min,
                tau_max,
                tau_count,
                omegas,
                radius,
                nodes,
                ..
            } => {
                if !(*tau_min > 0.0 && tau_max > tau_min) || *tau_count < 4 {
                    return Err(config_err("enclosure: need 0 < tau_min < tau_max and tau_count ≥ 4"));
                }
                if *omegas == 0 || !(*radius > 0.0) || *nodes < 64 {
                    return Err(config_err(
                        "enclosure: omegas, radius must be positive and nodes at least 64",
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn obstacle(&self) -> Result<Obstacle> {
        let curves = self
            .obstacle
            .iter()
            .map(|c| BoundaryCurve::new(c.shape.clone(), RigidMotion::new(c.angle, Point::from(c.center))))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| config_err(e.to_string()))?;
        Obstacle::new(curves).map_err(|e| config_err(e.to_string()))
    }

    pub fn sampling_grid(&self) -> Result<SamplingGrid> {
        SamplingGrid::new(self.grid.bbox, self.grid.nx, self.grid.ny).map_err(|e| config_err(e.to_string()))
    }

    /// Needle parameters of a singular-sources selection, if any.
    pub fn needle(&self) -> Option<NeedleSpec> {
        self.methods.iter().find_map(|m| match m {
            MethodConfig::SingularSources { params } => Some(params.domain),
            _ => None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
k = 2.0

[[obstacle]]
shape = { type = "circle", radius = 1.0 }

[[methods]]
method = "lsm"

[[methods]]
method = "dsm"
"#;

    #[test]
    fn defaults_are_explicit_after_parse() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.directions, 64);
        assert_eq!(cfg.grid, GridConfig::default());
        let text = cfg.to_toml();
        assert!(text.contains("directions = 64"));
        assert!(text.contains("[methods.regularization]\nfixed = "), "{text}");
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = format!("{MINIMAL}\ncolour = 3\n");
        assert!(matches!(ExperimentConfig::from_toml(&bad), Err(Error::Config(_))));
        let bad_method = MINIMAL.replace("method = \"dsm\"", "method = \"dsm\"\nalpha = 1.0");
        assert!(ExperimentConfig::from_toml(&bad_method).is_err());
    }

    #[test]
    fn invalid_shape_tag_is_config_error() {
        let bad = MINIMAL.replace("circle", "blob");
        let err = ExperimentConfig::from_toml(&bad).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn semantic_checks() {
        let morozov = MINIMAL.replace("method = \"lsm\"", "method = \"lsm\"\nregularization = \"morozov\"");
        assert!(ExperimentConfig::from_toml(&morozov).is_err());
        assert!(ExperimentConfig::from_toml(&format!("noise = 0.02\n{morozov}")).is_ok());
        let poly = MINIMAL.replace(
            "{ type = \"circle\", radius = 1.0 }",
            "{ type = \"polygon\", vertices = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]] }",
        );
        assert!(ExperimentConfig::from_toml(&poly).is_err());
        let twice = format!("{MINIMAL}\n[[methods]]\nmethod = \"dsm\"\n");
        assert!(ExperimentConfig::from_toml(&twice).is_err());
        assert!(ExperimentConfig::from_toml(&format!("q = 1.0\n{MINIMAL}")).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::from_toml(MINIMAL).unwrap();
        let mut b = a.clone();
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
