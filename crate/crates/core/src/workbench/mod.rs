//! Experiment orchestration: configs, data synthesis, reconstruction runs,
//! thresholding, metrics and artifact files.
//!
//! A run directory holds:
//!
//! ```text
//! config.toml            resolved config; its SHA-256 is the run's config hash
//! farfield.qiff          far-field data
//! cauchy.qicd            Cauchy data (enclosure only)
//! fields/<method>.qiif   indicator fields
//! masks/<method>.qimk    thresholded reconstructions
//! heatmaps/<method>.pgm  8-bit graymaps of the fields
//! metrics.toml           Jaccard index and contrast per method
//! run.log
//! ```

mod config;
mod heatmap;
mod mask;
mod metrics;
mod run;

pub use config::{ComponentConfig, ExperimentConfig, GridConfig, MethodConfig, RegularizationConfig, TruncationConfig};
pub use heatmap::export_heatmap;
pub use mask::{threshold, ReconstructionMask};
pub use metrics::{
    blowup_fit, contrast, field_blowup, jaccard, jaccard_sets, median, rasterize, BlowupFit, BlowupLaw, Side,
};
pub use run::{
    data_artifacts, evaluate, load_data, output_artifacts, output_dir, reconstruct, run, run_artifacts, run_heatmap,
    run_metrics, run_reconstruct, run_sweep, run_synthesize, stamped_hash, sweep_table, synthesize, write_atomic,
    write_files, write_tree, Artifacts, ExperimentData, MethodOutput, SweepParameter, CAUCHY_FILE, CONFIG_FILE,
    FARFIELD_FILE, LOG_FILE, METRICS_FILE, OUTPUT_ROOT_VAR,
};
