use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use biplot_motion::align::{align_series, reflect_at_levels, AlignConfig, AlignOn, AlignmentResult, Axis, TargetKind};
use biplot_motion::anim::{build_timeline, keyframes, shadow_trails, FrameMode, FrameSequence, TimelineOptions};
use biplot_motion::data::{ingest_block, ingest_csv, slice_by_time, Dataset, TimeSlice};
use biplot_motion::eval::{evaluate_series, EvaluationReport};
use biplot_motion::pca::{global_pca, pca_biplot, per_slice_pca, project_slices, BiplotState, SliceStandardization};
use biplot_motion::render::{
    encode_gif, export_frames_json, render_facet_frames, render_measure_charts, render_sequence_svg, RenderStyle,
};
use biplot_motion::{Error, ErrorKind};

use crate::args::{AlignArgs, Command, DisplayArgs, Format, InputArgs};

/// A library error together with the flag it is attributed to.
#[derive(Debug, thiserror::Error)]
#[error("{}{error}", flag.map(|f| format!("{f}: ")).unwrap_or_default())]
pub struct CliError {
    pub flag: Option<&'static str>,
    pub error: Error,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self.error.kind() {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Numeric => 4,
            ErrorKind::Io => 5,
        }
    }
}

impl From<Error> for CliError {
    fn from(error: Error) -> Self {
        CliError { flag: None, error }
    }
}

trait Flagged<T> {
    fn flag(self, flag: &'static str) -> Result<T, CliError>;
}

impl<T> Flagged<T> for biplot_motion::Result<T> {
    fn flag(self, flag: &'static str) -> Result<T, CliError> {
        self.map_err(|error| CliError { flag: Some(flag), error })
    }
}

fn config(flag: &'static str, msg: impl Into<String>) -> CliError {
    CliError {
        flag: Some(flag),
        error: Error::Config(msg.into()),
    }
}

/// One file (or directory of files) to write once every stage succeeded.
enum Artifact {
    File(PathBuf, Vec<u8>),
    Dir(PathBuf, Vec<(String, Vec<u8>)>),
}

impl Artifact {
    fn path(&self) -> &Path {
        match self {
            Artifact::File(p, _) | Artifact::Dir(p, _) => p,
        }
    }
}

/// Writes every artifact; on failure removes whatever this run created.
fn write_all(artifacts: &[Artifact]) -> Result<(), CliError> {
    let mut created: Vec<PathBuf> = Vec::new();
    let mut result = Ok(());
    for a in artifacts {
        let step = match a {
            Artifact::File(path, bytes) => fs::write(path, bytes)
                .map(|_| created.push(path.clone()))
                .map_err(|e| Error::io(path, e)),
            Artifact::Dir(dir, files) => {
                let fresh = !dir.exists();
                fs::create_dir_all(dir).map_err(|e| Error::io(dir, e)).and_then(|_| {
                    if fresh {
                        created.push(dir.clone());
                    }
                    for (name, bytes) in files {
                        let path = dir.join(name);
                        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
                        if !fresh {
                            created.push(path);
                        }
                    }
                    Ok(())
                })
            }
        };
        if let Err(e) = step {
            result = Err(CliError { flag: Some("--out"), error: e });
            break;
        }
    }
    if result.is_err() {
        for path in created.iter().rev() {
            let _ = if path.is_dir() { fs::remove_dir_all(path) } else { fs::remove_file(path) };
        }
    }
    result
}

struct Loaded {
    data: Dataset,
    slices: Vec<TimeSlice>,
}

fn load(input: &InputArgs) -> Result<Loaded, CliError> {
    let flag = |e: &Error| match e {
        Error::MissingColumn(c) if *c == input.time_var => "--time-var",
        Error::MissingColumn(_) => "--group-var",
        Error::LevelOrder(_) | Error::EmptyLevel(_) if input.level_order.is_some() => "--level-order",
        _ => "--input",
    };
    let data = ingest_csv(
        &input.input,
        &input.time_var,
        Some(&input.group_var),
        input.level_order.as_deref(),
    )
    .map_err(|e| CliError { flag: Some(flag(&e)), error: e })?;
    let slices = slice_by_time(&data).flag("--input")?;
    Ok(Loaded { data, slices })
}

fn check_display(d: &DisplayArgs) -> Result<(), CliError> {
    if d.shadow && d.hulls {
        return Err(config("--shadow", "shadows are only available with --hulls=false"));
    }
    if d.shadow && !(d.shadow_decay > 0.0 && d.shadow_decay < 1.0) {
        return Err(config("--shadow-decay", format!("must lie in (0, 1), got {}", d.shadow_decay)));
    }
    if !(d.scale_var > 0.0 && d.scale_var.is_finite()) {
        return Err(config("--scale-var", format!("must be positive, got {}", d.scale_var)));
    }
    if !(d.fps > 0.0 && d.fps.is_finite()) {
        return Err(config("--fps", format!("must be positive, got {}", d.fps)));
    }
    if d.pause_frames == 0 {
        return Err(config("--pause-frames", "at least one pause frame is required"));
    }
    if d.facet_cols == 0 {
        return Err(config("--facet-cols", "at least one column is required"));
    }
    if d.animate && d.format == Some(Format::Facet) {
        return Err(config("--format", "a facet sheet is static; use --move=false"));
    }
    Ok(())
}

fn check_align(a: &AlignArgs) -> Result<AlignConfig, CliError> {
    let on: AlignOn = a.align_on.parse().flag("--align-on")?;
    if !(a.gpa_tol > 0.0 && a.gpa_tol.is_finite()) {
        return Err(config("--gpa-tol", format!("must be positive, got {}", a.gpa_tol)));
    }
    if a.gpa_max_iter == 0 {
        return Err(config("--gpa-max-iter", "at least one iteration is required"));
    }
    Ok(AlignConfig {
        on,
        tol: a.gpa_tol,
        max_iter: a.gpa_max_iter,
    })
}

fn load_style(path: Option<&Path>) -> Result<RenderStyle, CliError> {
    let style = match path {
        Some(p) => RenderStyle::from_json_file(p).flag("--style")?,
        None => RenderStyle::default(),
    };
    style.validate().flag("--style")?;
    Ok(style)
}

fn aligned_states(
    input: &InputArgs,
    loaded: &Loaded,
    align: &AlignArgs,
    cfg: &AlignConfig,
) -> Result<(Vec<BiplotState>, AlignmentResult), CliError> {
    let mode = if align.global_standardize {
        SliceStandardization::Global
    } else {
        SliceStandardization::WithinSlice
    };
    let states = per_slice_pca(&loaded.data, &loaded.slices, input.scaled, mode).flag("--input")?;
    let target = match &align.target {
        None => None,
        Some(path) => {
            let block = ingest_block(path, &input.time_var, Some(&input.group_var)).flag("--target")?;
            if block.variable_names != loaded.data.variable_names() {
                return Err(CliError {
                    flag: Some("--target"),
                    error: Error::Shape(format!(
                        "target variables {:?} differ from input variables {:?}",
                        block.variable_names,
                        loaded.data.variable_names()
                    )),
                });
            }
            Some(
                pca_biplot(&block.numeric, input.scaled, "target", &block.variable_names, &block.groups)
                    .flag("--target")?,
            )
        }
    };
    let result = align_series(&states, target.as_ref(), cfg).flag("--input")?;
    Ok((states, result))
}

/// Everything the run summary reports.
struct Report<'a> {
    command: &'a str,
    input: &'a InputArgs,
    loaded: &'a Loaded,
    states: &'a [BiplotState],
    fixed: bool,
    reflection: Option<String>,
    alignment: Option<&'a AlignmentResult>,
    evaluation: Option<&'a EvaluationReport>,
    outputs: Vec<PathBuf>,
}

fn print_run_summary(r: &Report) -> String {
    let d = &r.loaded.data;
    let mut s = String::new();
    let _ = writeln!(s, "{}: {}", r.command, r.input.input.display());
    let _ = writeln!(
        s,
        "data: n={} p={} T={} groups={}",
        d.n(),
        d.p(),
        r.loaded.slices.len(),
        d.groups().len()
    );
    let counts: Vec<String> = r.loaded.slices.iter().map(|t| format!("{}={}", t.level, t.count())).collect();
    let _ = writeln!(s, "slices ({}): {}", r.loaded.slices.len(), counts.join(" "));
    if r.fixed {
        let ev = r.states[0].explained_variance;
        let _ = writeln!(
            s,
            "explained variance (global PCA): PC1 {:.1}% PC2 {:.1}%",
            100.0 * ev[0],
            100.0 * ev[1]
        );
    } else {
        let _ = writeln!(s, "explained variance per slice (PC1 / PC2):");
        for st in r.states {
            let ev = st.explained_variance;
            let _ = writeln!(s, "  {}: {:.1}% / {:.1}%", st.level, 100.0 * ev[0], 100.0 * ev[1]);
        }
    }
    if let Some(refl) = &r.reflection {
        let _ = writeln!(s, "reflection: {refl}");
    }
    if let Some(a) = r.alignment {
        match a.target {
            TargetKind::Consensus => {
                let _ = writeln!(
                    s,
                    "GPA: consensus target, {} iterations, final RSS {:.6e}{}",
                    a.iterations,
                    a.final_rss,
                    if a.converged { "" } else { " (not converged)" }
                );
            }
            TargetKind::Supplied => {
                let _ = writeln!(s, "alignment: supplied target, final RSS {:.6e}", a.final_rss);
            }
        }
    }
    for p in &r.outputs {
        let _ = writeln!(s, "wrote: {}", p.display());
    }
    if let Some(e) = r.evaluation {
        s.push('\n');
        s.push_str(&e.to_table());
    }
    s
}

fn timeline_options(d: &DisplayArgs) -> TimelineOptions {
    TimelineOptions {
        pause_frames: d.pause_frames,
        transition_frames: d.transition_frames,
        fps: d.fps,
        scale_var: d.scale_var,
        hulls: d.hulls,
    }
}

fn default_out(command: &str, format: Format) -> PathBuf {
    match format {
        Format::Svg => PathBuf::from(format!("{command}_frames")),
        Format::Gif => PathBuf::from(format!("{command}.gif")),
        Format::Json => PathBuf::from(format!("{command}.json")),
        Format::Facet => PathBuf::from(format!("{command}.svg")),
    }
}

/// Path prefix for files written next to `out`: `out` without extension.
fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.with_extension("");
    let mut name = stem.into_os_string();
    name.push(suffix);
    PathBuf::from(name)
}

fn render(
    command: &str,
    states: &[BiplotState],
    mode: FrameMode,
    display: &DisplayArgs,
    style: &RenderStyle,
) -> Result<(Artifact, usize), CliError> {
    let format = display
        .format
        .unwrap_or(if display.animate { Format::Gif } else { Format::Facet });
    let out = display.out.clone().unwrap_or_else(|| default_out(command, format));
    let opts = timeline_options(display);
    let mut seq: FrameSequence = if display.animate {
        build_timeline(states, mode, &opts).flag("--move")?
    } else {
        keyframes(states, mode, &opts)?
    };
    if display.shadow {
        seq = shadow_trails(&seq, display.shadow_decay).flag("--shadow")?;
    }
    let artifact = match format {
        Format::Facet => Artifact::File(out, render_facet_frames(&seq, style, display.facet_cols)?.into_bytes()),
        Format::Gif => Artifact::File(out, encode_gif(&seq, style)?),
        Format::Json => Artifact::File(out, export_frames_json(&seq)?.into_bytes()),
        Format::Svg => {
            let docs = render_sequence_svg(&seq, style)?;
            let width = docs.len().to_string().len().max(4);
            Artifact::Dir(
                out,
                docs.into_iter()
                    .enumerate()
                    .map(|(i, d)| (format!("frame_{i:0width$}.svg"), d.into_bytes()))
                    .collect(),
            )
        }
    };
    Ok((artifact, seq.len()))
}

fn evaluation_artifacts(
    report: &EvaluationReport,
    prefix: &Path,
    charts: bool,
    style: &RenderStyle,
) -> Result<Vec<Artifact>, CliError> {
    let mut out = vec![
        Artifact::File(sibling(prefix, ".csv"), report.to_csv()?.into_bytes()),
        Artifact::File(sibling(prefix, ".json"), report.to_json()?.into_bytes()),
    ];
    if charts {
        let (fit, bias) = render_measure_charts(report, style).flag("--charts")?;
        out.push(Artifact::File(sibling(prefix, "_fit.svg"), fit.into_bytes()));
        out.push(Artifact::File(sibling(prefix, "_bias.svg"), bias.into_bytes()));
    }
    Ok(out)
}

/// Runs one subcommand to completion and returns the run summary.
pub fn run(command: &Command) -> Result<String, CliError> {
    match command {
        Command::Moveplot(a) => {
            check_display(&a.display)?;
            let style = load_style(a.display.style.as_deref())?;
            let loaded = load(&a.input)?;
            let global = global_pca(&loaded.data, a.input.scaled, "all").flag("--input")?;
            let states = project_slices(&global, &loaded.slices)?;
            let (artifact, _) = render("moveplot", &states, FrameMode::Fixed, &a.display, &style)?;
            let artifacts = vec![artifact];
            write_all(&artifacts)?;
            Ok(print_run_summary(&Report {
                command: "moveplot",
                input: &a.input,
                loaded: &loaded,
                states: &states,
                fixed: true,
                reflection: None,
                alignment: None,
                evaluation: None,
                outputs: artifacts.iter().map(|x| x.path().to_owned()).collect(),
            }))
        }
        Command::Moveplot2(a) => {
            check_display(&a.display)?;
            let axis: Option<Axis> = a.reflect.as_deref().map(str::parse).transpose().flag("--reflect")?;
            if axis.is_some() && a.align_time.is_empty() {
                return Err(config("--align-time", "--reflect needs the levels to reflect"));
            }
            if axis.is_none() && !a.align_time.is_empty() {
                return Err(config("--reflect", "--align-time needs an axis (x, y or xy)"));
            }
            let style = load_style(a.display.style.as_deref())?;
            let loaded = load(&a.input)?;
            let mut states = per_slice_pca(&loaded.data, &loaded.slices, a.input.scaled, SliceStandardization::WithinSlice)
                .flag("--input")?;
            let mut reflection = None;
            if let Some(axis) = axis {
                states = reflect_at_levels(&states, &a.align_time, axis).flag("--align-time")?;
                reflection = Some(format!("{axis} at {}", a.align_time.join(", ")));
            }
            let (artifact, _) = render("moveplot2", &states, FrameMode::Dynamic, &a.display, &style)?;
            let artifacts = vec![artifact];
            write_all(&artifacts)?;
            Ok(print_run_summary(&Report {
                command: "moveplot2",
                input: &a.input,
                loaded: &loaded,
                states: &states,
                fixed: false,
                reflection,
                alignment: None,
                evaluation: None,
                outputs: artifacts.iter().map(|x| x.path().to_owned()).collect(),
            }))
        }
        Command::Moveplot3(a) => {
            check_display(&a.display)?;
            let cfg = check_align(&a.align)?;
            if a.charts && !a.emit_eval {
                return Err(config("--charts", "charts are written with --emit-eval"));
            }
            let style = load_style(a.display.style.as_deref())?;
            let loaded = load(&a.input)?;
            let (states, alignment) = aligned_states(&a.input, &loaded, &a.align, &cfg)?;
            let report = evaluate_series(&alignment)?;
            let (artifact, _) = render(
                "moveplot3",
                &alignment.aligned_states,
                FrameMode::Dynamic,
                &a.display,
                &style,
            )?;
            let prefix = sibling(artifact.path(), "_eval");
            let mut artifacts = vec![artifact];
            if a.emit_eval {
                artifacts.extend(evaluation_artifacts(&report, &prefix, a.charts, &style)?);
            }
            write_all(&artifacts)?;
            Ok(print_run_summary(&Report {
                command: "moveplot3",
                input: &a.input,
                loaded: &loaded,
                states: &states,
                fixed: false,
                reflection: None,
                alignment: Some(&alignment),
                evaluation: Some(&report),
                outputs: artifacts.iter().map(|x| x.path().to_owned()).collect(),
            }))
        }
        Command::Evaluate(a) => {
            let cfg = check_align(&a.align)?;
            let style = load_style(a.style.as_deref())?;
            let loaded = load(&a.input)?;
            let (states, alignment) = aligned_states(&a.input, &loaded, &a.align, &cfg)?;
            let report = evaluate_series(&alignment)?;
            // `sibling` strips an extension, so keep a dotted prefix intact.
            let prefix = PathBuf::from(format!("{}.x", a.out.display()));
            let artifacts = evaluation_artifacts(&report, &prefix, a.charts, &style)?;
            write_all(&artifacts)?;
            Ok(print_run_summary(&Report {
                command: "evaluate",
                input: &a.input,
                loaded: &loaded,
                states: &states,
                fixed: false,
                reflection: None,
                alignment: Some(&alignment),
                evaluation: Some(&report),
                outputs: artifacts.iter().map(|x| x.path().to_owned()).collect(),
            }))
        }
    }
}
