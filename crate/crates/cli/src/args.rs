use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "biplot-motion",
    version,
    about = "Animated PCA biplots across the ordered levels of a categorical variable"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fixed variable frame: one PCA on all rows; samples move, variable
    /// vectors stay put.
    Moveplot(MoveplotArgs),
    /// Dynamic frame: one PCA per level, with optional manual reflection of
    /// chosen levels.
    Moveplot2(Moveplot2Args),
    /// Dynamic frame aligned by generalized Procrustes analysis to a
    /// consensus or to a supplied target.
    Moveplot3(Moveplot3Args),
    /// Runs the moveplot3 alignment and writes only the comparison measures.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Column holding the ordered levels (e.g. year).
    #[arg(long)]
    pub time_var: String,
    /// Column holding the group labels used for colours and hulls.
    #[arg(long)]
    pub group_var: String,
    /// Explicit level order, comma separated. Default: numeric or date order
    /// when every level parses as one, else order of first appearance.
    #[arg(long, value_delimiter = ',')]
    pub level_order: Option<Vec<String>>,
    /// Scale every variable to unit variance before the PCA.
    #[arg(long, default_value_t = true, num_args = 0..=1, default_missing_value = "true", action = ArgAction::Set)]
    pub scaled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// One SVG per frame, written into the --out directory.
    Svg,
    Gif,
    Json,
    /// One static sheet with a panel per level.
    Facet,
}

#[derive(Debug, Args)]
pub struct DisplayArgs {
    /// Animate between levels. Defaults to false (a static facet sheet),
    /// unlike the interactive original whose default is to animate.
    #[arg(long = "move", default_value_t = false, num_args = 0..=1, default_missing_value = "true", action = ArgAction::Set)]
    pub animate: bool,
    /// Draw a convex hull around each group.
    #[arg(long, default_value_t = true, num_args = 0..=1, default_missing_value = "true", action = ArgAction::Set)]
    pub hulls: bool,
    /// Keep fading copies of earlier levels; requires --hulls=false.
    #[arg(long, default_value_t = false, num_args = 0..=1, default_missing_value = "true", action = ArgAction::Set)]
    pub shadow: bool,
    /// Opacity factor per level step for shadows, in (0, 1).
    #[arg(long, default_value_t = 0.6)]
    pub shadow_decay: f64,
    /// Length multiplier for the variable vectors.
    #[arg(long, default_value_t = 1.0)]
    pub scale_var: f64,
    /// Frames held at each level.
    #[arg(long, default_value_t = 10)]
    pub pause_frames: usize,
    /// Frames between two levels, endpoints included.
    #[arg(long, default_value_t = 30)]
    pub transition_frames: usize,
    #[arg(long, default_value_t = 20.0)]
    pub fps: f64,
    /// Output format. Default: gif with --move, facet without.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output path (a directory for --format svg).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file overriding rendering settings.
    #[arg(long)]
    pub style: Option<PathBuf>,
    /// Panels per row of a facet sheet.
    #[arg(long, default_value_t = 4)]
    pub facet_cols: usize,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    /// CSV with the same columns to align every level to, instead of the
    /// GPA consensus. Its time column, if any, is ignored.
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Matrix that drives the alignment: samples or variables.
    #[arg(long, default_value = "samples")]
    pub align_on: String,
    /// GPA stops once the residual sum of squares drops by less than this.
    #[arg(long, default_value_t = 1e-10)]
    pub gpa_tol: f64,
    #[arg(long, default_value_t = 100)]
    pub gpa_max_iter: usize,
    /// Standardize every level with statistics of the whole dataset.
    #[arg(long, default_value_t = false, num_args = 0..=1, default_missing_value = "true", action = ArgAction::Set)]
    pub global_standardize: bool,
}

#[derive(Debug, Args)]
pub struct MoveplotArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub display: DisplayArgs,
}

#[derive(Debug, Args)]
pub struct Moveplot2Args {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub display: DisplayArgs,
    /// Levels to reflect, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub align_time: Vec<String>,
    /// Axis to mirror the --align-time levels about: x, y or xy.
    #[arg(long)]
    pub reflect: Option<String>,
}

#[derive(Debug, Args)]
pub struct Moveplot3Args {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub display: DisplayArgs,
    #[command(flatten)]
    pub align: AlignArgs,
    /// Also write the comparison measures next to the main output.
    #[arg(long, default_value_t = false, num_args = 0..=1, default_missing_value = "true", action = ArgAction::Set)]
    pub emit_eval: bool,
    /// With --emit-eval, also draw the fit and bias charts.
    #[arg(long, default_value_t = false, num_args = 0..=1, default_missing_value = "true", action = ArgAction::Set)]
    pub charts: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub align: AlignArgs,
    /// Path prefix of the written files (PREFIX.csv, PREFIX.json).
    #[arg(long, default_value = "evaluation")]
    pub out: PathBuf,
    /// Also draw the fit and bias charts (PREFIX_fit.svg, PREFIX_bias.svg).
    #[arg(long, default_value_t = false, num_args = 0..=1, default_missing_value = "true", action = ArgAction::Set)]
    pub charts: bool,
    /// JSON file overriding rendering settings of the charts.
    #[arg(long)]
    pub style: Option<PathBuf>,
}
