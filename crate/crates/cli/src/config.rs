//! Command-line surface. Every pipeline convention is a flag with the
//! documented default, so runs are reproducible from the invocation alone.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::AppError;

/// Default ΔE histogram bin width; ten bins resolve the 0..5 region.
pub const DEFAULT_BIN_WIDTH: f64 = 0.5;

#[derive(Debug, Parser)]
#[command(
    name = "tone-audit",
    version,
    about = "Audit skin-tone distributions of image corpora grouped by identity labels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Measure per-image skin tone for every manifest entry.
    Measure(MeasureArgs),
    /// Aggregate a results file into per-identity and per-category reports.
    Aggregate(AggregateArgs),
    /// Compare two results files: percent changes and significance tests.
    Compare(CompareArgs),
    /// Emit the 2-sigma convex hull of (L, h) points per model tag.
    Hull(HullArgs),
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// Manifest CSV: image_path,identity_id,model_tag,mask_path,seed
    #[arg(long)]
    pub manifest: PathBuf,
    /// Taxonomy CSV; defaults to the bundled identity list
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    /// Output directory for results.csv
    #[arg(long)]
    pub out: PathBuf,
    /// Number of clusters for tone extraction
    #[arg(long, default_value_t = tone_audit::tonemetrics::DEFAULT_K)]
    pub k: usize,
    /// Clustering seed used when a manifest row has none
    #[arg(long, default_value_t = tone_audit::tonemetrics::DEFAULT_SEED)]
    pub seed: u64,
    /// Minimum skin coverage for an image to be retained
    #[arg(long = "coverage-min", default_value_t = tone_audit::skinmask::DEFAULT_COVERAGE_MIN)]
    pub coverage_min: f64,
    /// Warn when a (model tag, identity) group has fewer images than this
    #[arg(long = "min-group", default_value_t = tone_audit::corpus::DEFAULT_MIN_GROUP)]
    pub min_group: usize,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// Results CSV produced by `measure`
    #[arg(long)]
    pub results: PathBuf,
    /// Taxonomy CSV; defaults to the bundled identity list
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    /// Output directory for the report files
    #[arg(long)]
    pub out: PathBuf,
    /// Tones with L at or below this are dark
    #[arg(long = "l-threshold", default_value_t = tone_audit::aggregate::DEFAULT_L_THRESHOLD)]
    pub l_threshold: f64,
    /// Tones with hue at or below this are reddish
    #[arg(long = "h-threshold", default_value_t = tone_audit::aggregate::DEFAULT_H_THRESHOLD)]
    pub h_threshold: f64,
    /// Per-image color differences below this count as near-indistinguishable
    #[arg(long = "de-threshold", default_value_t = tone_audit::aggregate::DEFAULT_DE_THRESHOLD)]
    pub de_threshold: f64,
    /// Bin width of the ΔE histogram
    #[arg(long = "bin-width", default_value_t = DEFAULT_BIN_WIDTH)]
    pub bin_width: f64,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Baseline results CSV (the "old" corpus)
    #[arg(long = "results-a")]
    pub results_a: PathBuf,
    /// Comparison results CSV (the "new" corpus)
    #[arg(long = "results-b")]
    pub results_b: PathBuf,
    /// Taxonomy CSV; defaults to the bundled identity list
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    /// Output directory for the comparison reports
    #[arg(long)]
    pub out: PathBuf,
    /// Threshold for the ΔE perceptibility fraction
    #[arg(long = "de-threshold", default_value_t = tone_audit::aggregate::DEFAULT_DE_THRESHOLD)]
    pub de_threshold: f64,
}

#[derive(Debug, Args)]
pub struct HullArgs {
    /// Results CSV produced by `measure`
    #[arg(long)]
    pub results: PathBuf,
    /// Output directory for hull.csv / hull.txt
    #[arg(long)]
    pub out: PathBuf,
}

fn positive(name: &str, v: f64) -> Result<(), AppError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(AppError::Validation(format!("{name} must be positive, got {v}")))
    }
}

impl MeasureArgs {
    pub fn validate(&self) -> Result<(), AppError> {
        if self.k == 0 {
            return Err(AppError::Validation("--k must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.coverage_min) {
            return Err(AppError::Validation(format!(
                "--coverage-min must be within [0, 1], got {}",
                self.coverage_min
            )));
        }
        Ok(())
    }
}

impl AggregateArgs {
    pub fn validate(&self) -> Result<(), AppError> {
        positive("--l-threshold", self.l_threshold)?;
        positive("--h-threshold", self.h_threshold)?;
        positive("--de-threshold", self.de_threshold)?;
        positive("--bin-width", self.bin_width)
    }
}

impl CompareArgs {
    pub fn validate(&self) -> Result<(), AppError> {
        positive("--de-threshold", self.de_threshold)
    }
}
