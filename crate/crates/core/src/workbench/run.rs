use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::farfield_op::{assemble, spectral_decompose, SpectralSystem};
use crate::forward::io::{read_cauchy, read_farfield, write_cauchy, write_farfield};
use crate::forward::{add_noise, synthesize_cauchy, synthesize_disc, synthesize_multistatic, CauchyData, FarFieldData};
use crate::geometry::{make_direction_set, BoundaryCurve, Direction, Point, Shape, TestDomain};
use crate::indicators::{
    dsm_w1, enclosure, factorization_picard, factorization_regularized, lsm, no_response, osm_w2, singular_sources,
    tau_grid, IndicatorField, OsmMode,
};
use crate::specialfun::WaveContext;

use super::config::{ExperimentConfig, MethodConfig, TruncationConfig};
use super::heatmap::export_heatmap;
use super::mask::{threshold, ReconstructionMask};
use super::metrics::{contrast, jaccard};

/// Environment variable that relocates relative output directories.
pub const OUTPUT_ROOT_VAR: &str = "QIMAGING_OUT";

pub const FARFIELD_FILE: &str = "farfield.qiff";
pub const CAUCHY_FILE: &str = "cauchy.qicd";
pub const CONFIG_FILE: &str = "config.toml";
pub const METRICS_FILE: &str = "metrics.toml";
pub const LOG_FILE: &str = "run.log";

/// Synthesized inputs of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentData {
    pub farfield: FarFieldData,
    /// Present when the enclosure method is selected.
    pub cauchy: Option<CauchyData>,
}

/// Output of one method: an indicator field (absent for the geometric
/// methods), its mask, and free-form notes for the log.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutput {
    pub tag: &'static str,
    pub field: Option<IndicatorField>,
    pub mask: ReconstructionMask,
    pub notes: Vec<(String, String)>,
}

fn enclosure_settings(cfg: &ExperimentConfig) -> Option<&MethodConfig> {
    cfg.methods.iter().find(|m| matches!(m, MethodConfig::Enclosure { .. }))
}

/// Far-field matrix (with noise) and, if needed, Cauchy data.
pub fn synthesize(cfg: &ExperimentConfig) -> Result<ExperimentData> {
    let ctx = WaveContext::new(cfg.k)?;
    let obstacle = cfg.obstacle()?;
    let set = make_direction_set(cfg.directions, cfg.aperture)?;
    let clean = match cfg.obstacle.as_slice() {
        [c] => match c.shape {
            Shape::Circle { radius } => synthesize_disc(radius, Point::from(c.center), &ctx, &set, &set)?,
            _ => synthesize_multistatic(&obstacle, &ctx, &set, &set, cfg.nodes)?,
        },
        _ => synthesize_multistatic(&obstacle, &ctx, &set, &set, cfg.nodes)?,
    };
    let farfield = if cfg.noise > 0.0 {
        add_noise(&clean, cfg.noise, cfg.seed)?
    } else {
        clean
    };
    let cauchy = match enclosure_settings(cfg) {
        Some(MethodConfig::Enclosure {
            radius,
            nodes,
            incidence_angle,
            ..
        }) => Some(synthesize_cauchy(
            Some(&obstacle),
            &ctx,
            Direction::from_angle(*incidence_angle),
            *radius,
            *nodes,
            cfg.nodes,
        )?),
        _ => None,
    };
    Ok(ExperimentData { farfield, cauchy })
}

/// Runs every configured method on the data.
pub fn reconstruct(cfg: &ExperimentConfig, data: &ExperimentData) -> Result<Vec<MethodOutput>> {
    let grid = cfg.sampling_grid()?;
    let ff = &data.farfield;
    let mut system: Option<SpectralSystem> = None;
    let mut spectral = || -> Result<SpectralSystem> {
        if system.is_none() {
            system = Some(spectral_decompose(&assemble(ff)?)?);
        }
        Ok(system.clone().expect("decomposed above"))
    };
    let mut out = Vec::with_capacity(cfg.methods.len());
    for m in &cfg.methods {
        let tag = m.tag();
        let from_field = |field: IndicatorField| -> Result<MethodOutput> {
            let mask = threshold(&field, cfg.q)?;
            Ok(MethodOutput {
                tag,
                field: Some(field),
                mask,
                notes: Vec::new(),
            })
        };
        let result = match m {
            MethodConfig::Lsm { regularization } => {
                from_field(lsm(&spectral()?, &grid, regularization.resolve(cfg.noise))?)?
            }
            MethodConfig::FactorizationRegularized { regularization } => from_field(factorization_regularized(
                &spectral()?,
                &grid,
                regularization.resolve(cfg.noise),
            )?)?,
            MethodConfig::FactorizationPicard { truncation } => {
                let nt = match truncation {
                    TruncationConfig::Auto => None,
                    TruncationConfig::Fixed(n) => Some(*n),
                };
                from_field(factorization_picard(&spectral()?, &grid, nt)?)?
            }
            MethodConfig::Dsm {} => from_field(dsm_w1(ff, &grid)?)?,
            MethodConfig::OsmOneWave { incidence } => from_field(osm_w2(ff, OsmMode::OneWave(*incidence), &grid)?)?,
            MethodConfig::OsmMultiWave {} => from_field(osm_w2(ff, OsmMode::MultiWave, &grid)?)?,
            MethodConfig::SingularSources { params } => from_field(singular_sources(ff, &grid, params)?)?,
            MethodConfig::NoResponse {
                incidence,
                domain_radius,
                centers,
                params,
                cutoff,
            } => {
                let domains = lattice_domains(cfg, *domain_radius, *centers)?;
                let column = ff.matrix.column(*incidence).into_owned();
                let r = no_response(&column, &ff.observation, &ff.ctx()?, &domains, params, *cutoff)?;
                let mask = ReconstructionMask::new(grid.clone(), r.mask(&domains, &grid), tag, Some(r.cutoff))?;
                let positive = r.positive.iter().filter(|p| **p).count();
                MethodOutput {
                    tag,
                    field: None,
                    mask,
                    notes: vec![
                        ("domains".into(), domains.len().to_string()),
                        ("positive".into(), positive.to_string()),
                        ("cutoff".into(), format!("{:e}", r.cutoff)),
                    ],
                }
            }
            MethodConfig::Enclosure {
                tau_min,
                tau_max,
                tau_count,
                omegas,
                ..
            } => {
                let cauchy = data
                    .cauchy
                    .as_ref()
                    .ok_or_else(|| Error::InvalidArgument("enclosure needs Cauchy data".into()))?;
                let dirs: Vec<Direction> = (0..*omegas)
                    .map(|j| Direction::from_angle(std::f64::consts::TAU * j as f64 / *omegas as f64))
                    .collect();
                let est = enclosure(cauchy, &dirs, &tau_grid(*tau_min, *tau_max, *tau_count))?;
                let mask = ReconstructionMask::new(grid.clone(), est.half_plane_mask(&grid), tag, None)?;
                let mut notes = Vec::new();
                for d in &est.directions {
                    let value = match (d.support, d.r_squared) {
                        (Some(h), Some(r2)) => format!("{h:e}:{r2:e}"),
                        _ => d.diagnostic.clone().unwrap_or_default().replace(' ', "_"),
                    };
                    notes.push((format!("omega:{:.6}", d.omega.angle()), value));
                }
                MethodOutput {
                    tag,
                    field: None,
                    mask,
                    notes,
                }
            }
        };
        out.push(result);
    }
    Ok(out)
}

/// Disc test domains centred on a `n × n` lattice of cell centres over the
/// grid box.
fn lattice_domains(cfg: &ExperimentConfig, radius: f64, n: usize) -> Result<Vec<TestDomain>> {
    let [x0, x1, y0, y1] = cfg.grid.bbox;
    let mut out = Vec::with_capacity(n * n);
    for iy in 0..n {
        for ix in 0..n {
            let c = Point::new(
                x0 + (ix as f64 + 0.5) * (x1 - x0) / n as f64,
                y0 + (iy as f64 + 0.5) * (y1 - y0) / n as f64,
            );
            out.push(TestDomain::from_curve(BoundaryCurve::circle(c, radius)?, 128)?);
        }
    }
    Ok(out)
}

/// Scores per method: Jaccard of the mask and, for fields, the contrast.
pub fn evaluate(cfg: &ExperimentConfig, outputs: &[MethodOutput]) -> Result<toml::Table> {
    let obstacle = cfg.obstacle()?;
    let mut table = toml::Table::new();
    for o in outputs {
        let mut t = toml::Table::new();
        t.insert("jaccard".into(), jaccard(&o.mask, &obstacle)?.into());
        t.insert("mask_points".into(), (o.mask.count() as i64).into());
        if let Some(c) = o.mask.cutoff() {
            t.insert("cutoff".into(), c.into());
        }
        if let Some(f) = &o.field {
            let c = contrast(f, &obstacle)?;
            // infinite contrast is not representable in every TOML reader
            t.insert("contrast".into(), if c.is_finite() { c } else { f64::MAX }.into());
        }
        table.insert(o.tag.into(), t.into());
    }
    Ok(table)
}

fn metrics_text(cfg: &ExperimentConfig, metrics: &toml::Table) -> String {
    format!(
        "# config={}\n{}",
        cfg.hash(),
        toml::to_string(metrics).expect("metrics serialize")
    )
}

fn stamp_header(text: &str, hash: &str) -> String {
    match text.split_once('\n') {
        Some((head, body)) => format!("{head} config={hash}\n{body}"),
        None => format!("{text} config={hash}"),
    }
}

/// Config hash recorded in an artifact, if any.
pub fn stamped_hash(text: &str) -> Option<String> {
    text.lines().take(3).find_map(|line| {
        line.split_whitespace().find_map(|tok| {
            ["config=", "p.config=", "t.config="]
                .iter()
                .find_map(|p| tok.strip_prefix(p))
                .map(str::to_string)
        })
    })
}

fn check_hash(name: &str, text: &str, expected: &str) -> Result<()> {
    match stamped_hash(text) {
        Some(h) if h == expected => Ok(()),
        Some(h) => Err(Error::Config(format!(
            "{name} was produced by config {h}, not the current config {expected}"
        ))),
        None => Err(Error::Config(format!("{name} carries no config hash"))),
    }
}

/// Files of a run directory, keyed by relative path.
pub type Artifacts = BTreeMap<PathBuf, Vec<u8>>;

pub fn data_artifacts(cfg: &ExperimentConfig, data: &ExperimentData) -> Artifacts {
    let hash = cfg.hash();
    let mut files = Artifacts::new();
    files.insert(CONFIG_FILE.into(), cfg.to_toml().into_bytes());
    files.insert(
        FARFIELD_FILE.into(),
        stamp_header(&write_farfield(&data.farfield), &hash).into_bytes(),
    );
    if let Some(c) = &data.cauchy {
        files.insert(CAUCHY_FILE.into(), stamp_header(&write_cauchy(c), &hash).into_bytes());
    }
    files
}

pub fn output_artifacts(cfg: &ExperimentConfig, outputs: &[MethodOutput]) -> Artifacts {
    let hash = cfg.hash();
    let mut tags = BTreeMap::new();
    tags.insert("config".to_string(), hash.clone());
    let mut files = Artifacts::new();
    for o in outputs {
        if let Some(f) = &o.field {
            let f = f.clone().with_parameter("config", &hash);
            files.insert(
                PathBuf::from("fields").join(format!("{}.qiif", o.tag)),
                f.to_text().into_bytes(),
            );
            files.insert(
                PathBuf::from("heatmaps").join(format!("{}.pgm", o.tag)),
                export_heatmap(&f, &[format!("config={hash}"), format!("method={}", o.tag)]),
            );
        }
        files.insert(
            PathBuf::from("masks").join(format!("{}.qimk", o.tag)),
            o.mask.to_text(&tags).into_bytes(),
        );
    }
    files
}

fn log_text(cfg: &ExperimentConfig, data: &ExperimentData, outputs: &[MethodOutput], metrics: &toml::Table) -> String {
    let ff = &data.farfield;
    let mut log = format!(
        "config={}\ndata provenance={} k={:e} directions={} noise={:e} seed={}\n",
        cfg.hash(),
        ff.provenance.tag(),
        ff.k,
        ff.observation.len(),
        ff.noise_level,
        ff.seed
    );
    for o in outputs {
        log.push_str(&format!("method {} mask_points={}", o.tag, o.mask.count()));
        if let Some(f) = &o.field {
            for (k, v) in f.parameters() {
                log.push_str(&format!(" {k}={v}"));
            }
        }
        for (k, v) in &o.notes {
            log.push_str(&format!(" {k}={v}"));
        }
        if let Some(toml::Value::Table(t)) = metrics.get(o.tag) {
            if let Some(j) = t.get("jaccard").and_then(|v| v.as_float()) {
                log.push_str(&format!(" jaccard={j:.6}"));
            }
        }
        log.push('\n');
    }
    log
}

/// Everything `run` writes.
pub fn run_artifacts(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let data = synthesize(cfg)?;
    let outputs = reconstruct(cfg, &data)?;
    let metrics = evaluate(cfg, &outputs)?;
    let mut files = data_artifacts(cfg, &data);
    files.extend(output_artifacts(cfg, &outputs));
    files.insert(METRICS_FILE.into(), metrics_text(cfg, &metrics).into_bytes());
    files.insert(LOG_FILE.into(), log_text(cfg, &data, &outputs, &metrics).into_bytes());
    Ok(files)
}

/// Output directory: relative paths are taken under `root` when given.
pub fn output_dir(cfg: &ExperimentConfig, root: Option<&Path>) -> PathBuf {
    match root {
        Some(r) if cfg.output.is_relative() => r.join(&cfg.output),
        _ => cfg.output.clone(),
    }
}

/// Writes one file through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes files into `dir`, each atomically.
pub fn write_files(dir: &Path, files: &Artifacts) -> Result<()> {
    for (rel, bytes) in files {
        write_atomic(&dir.join(rel), bytes)?;
    }
    Ok(())
}

/// Writes a complete tree: files go to a staging directory that replaces
/// `dir` once everything is on disk.
pub fn write_tree(dir: &Path, files: &Artifacts) -> Result<()> {
    let parent = dir
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(parent)?;
    let name = dir
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("invalid output directory {}", dir.display())))?;
    let staging = parent.join(format!(".{}.staging", name.to_string_lossy()));
    if staging.exists() {
        fs::remove_dir_all(&staging)?;
    }
    if let Err(e) = write_files(&staging, files) {
        let _ = fs::remove_dir_all(&staging);
        return Err(e);
    }
    if dir.exists() {
        fs::remove_dir_all(dir)?;
    }
    fs::rename(&staging, dir)?;
    Ok(())
}

/// Full pipeline into the config's output directory.
pub fn run(cfg: &ExperimentConfig, root: Option<&Path>) -> Result<PathBuf> {
    let files = run_artifacts(cfg)?;
    let dir = output_dir(cfg, root);
    write_tree(&dir, &files)?;
    Ok(dir)
}

/// Synthesizes data and the resolved config into the output directory.
pub fn run_synthesize(cfg: &ExperimentConfig, root: Option<&Path>) -> Result<PathBuf> {
    let data = synthesize(cfg)?;
    let dir = output_dir(cfg, root);
    write_files(&dir, &data_artifacts(cfg, &data))?;
    Ok(dir)
}

fn read_checked(dir: &Path, name: &str, hash: &str) -> Result<String> {
    let path = dir.join(name);
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    check_hash(name, &text, hash)?;
    Ok(text)
}

/// Loads data written by [`run_synthesize`] for this config.
pub fn load_data(cfg: &ExperimentConfig, dir: &Path) -> Result<ExperimentData> {
    let hash = cfg.hash();
    let farfield = read_farfield(&read_checked(dir, FARFIELD_FILE, &hash)?)?;
    let cauchy = match enclosure_settings(cfg) {
        Some(_) => Some(read_cauchy(&read_checked(dir, CAUCHY_FILE, &hash)?)?),
        None => None,
    };
    Ok(ExperimentData { farfield, cauchy })
}

/// Reconstructs from stored data; writes fields, masks and heatmaps.
pub fn run_reconstruct(cfg: &ExperimentConfig, root: Option<&Path>) -> Result<PathBuf> {
    let dir = output_dir(cfg, root);
    let data = load_data(cfg, &dir)?;
    let outputs = reconstruct(cfg, &data)?;
    write_files(&dir, &output_artifacts(cfg, &outputs))?;
    Ok(dir)
}

/// Scores stored masks and fields; writes the metrics file.
pub fn run_metrics(cfg: &ExperimentConfig, root: Option<&Path>) -> Result<PathBuf> {
    let dir = output_dir(cfg, root);
    let hash = cfg.hash();
    let mut outputs = Vec::new();
    for m in &cfg.methods {
        let tag = m.tag();
        let mask_name = format!("masks/{tag}.qimk");
        let (mask, _) = ReconstructionMask::from_text(&read_checked(&dir, &mask_name, &hash)?)?;
        let field_name = format!("fields/{tag}.qiif");
        let field = if dir.join(&field_name).exists() {
            Some(IndicatorField::from_text(&read_checked(&dir, &field_name, &hash)?)?)
        } else {
            None
        };
        outputs.push(MethodOutput {
            tag,
            field,
            mask,
            notes: Vec::new(),
        });
    }
    let metrics = evaluate(cfg, &outputs)?;
    write_atomic(&dir.join(METRICS_FILE), metrics_text(cfg, &metrics).as_bytes())?;
    Ok(dir)
}

/// Converts a stored field file to a PGM next to it (or at `out`).
pub fn run_heatmap(field_path: &Path, out: Option<&Path>) -> Result<PathBuf> {
    let text = fs::read_to_string(field_path)?;
    let field = IndicatorField::from_text(&text)?;
    let mut comments = Vec::new();
    if let Some(h) = stamped_hash(&text) {
        comments.push(format!("config={h}"));
    }
    comments.push(format!("method={}", field.method()));
    let target = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| field_path.with_extension("pgm"));
    write_atomic(&target, &export_heatmap(&field, &comments))?;
    Ok(target)
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    /// Fixed Tikhonov `α` of every regularized method.
    Alpha,
    /// Noise level.
    Delta,
    /// Direction count.
    Directions,
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(SweepParameter::Alpha),
            "delta" => Ok(SweepParameter::Delta),
            "n" | "directions" => Ok(SweepParameter::Directions),
            _ => Err(Error::Config(format!(
                "unknown sweep parameter '{s}' (alpha, delta, n)"
            ))),
        }
    }
}

impl SweepParameter {
    fn name(&self) -> &'static str {
        match self {
            SweepParameter::Alpha => "alpha",
            SweepParameter::Delta => "delta",
            SweepParameter::Directions => "n",
        }
    }

    /// The config with this parameter set to `value`.
    pub fn apply(&self, cfg: &ExperimentConfig, value: f64) -> Result<ExperimentConfig> {
        use super::config::RegularizationConfig;
        let mut c = cfg.clone();
        match self {
            SweepParameter::Alpha => {
                for m in &mut c.methods {
                    if let MethodConfig::Lsm { regularization }
                    | MethodConfig::FactorizationRegularized { regularization } = m
                    {
                        *regularization = RegularizationConfig::Fixed(value);
                    }
                }
            }
            SweepParameter::Delta => c.noise = value,
            SweepParameter::Directions => {
                if value.fract() != 0.0 || value < 0.0 {
                    return Err(Error::Config(format!(
                        "direction count must be an integer, got {value}"
                    )));
                }
                c.directions = value as usize;
            }
        }
        c.validate()?;
        Ok(c)
    }
}

/// Runs the pipeline once per value and tabulates Jaccard indices.
pub fn sweep_table(cfg: &ExperimentConfig, param: SweepParameter, values: &[f64]) -> Result<String> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    let tags: Vec<&str> = cfg.methods.iter().map(|m| m.tag()).collect();
    let mut out = format!("# config={}\n{}", cfg.hash(), param.name());
    for t in &tags {
        out.push_str(&format!(",{t}"));
    }
    out.push('\n');
    for v in values {
        let c = param.apply(cfg, *v)?;
        let data = synthesize(&c)?;
        let metrics = evaluate(&c, &reconstruct(&c, &data)?)?;
        out.push_str(&format!("{v:e}"));
        for t in &tags {
            let j = metrics
                .get(*t)
                .and_then(|m| m.get("jaccard"))
                .and_then(|j| j.as_float())
                .unwrap_or(f64::NAN);
            out.push_str(&format!(",{j:.6}"));
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn run_sweep(
    cfg: &ExperimentConfig,
    root: Option<&Path>,
    param: SweepParameter,
    values: &[f64],
) -> Result<PathBuf> {
    let table = sweep_table(cfg, param, values)?;
    let path = output_dir(cfg, root).join(format!("sweep-{}.csv", param.name()));
    write_atomic(&path, table.as_bytes())?;
    Ok(path)
}
