//! Frame timeline: pauses at every biplot state, linear transitions between
//! successive states, per-group convex hulls and optional shadow trails.

use std::collections::HashMap;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::pca::BiplotState;

pub type Point = [f64; 2];

/// Opacity below which a shadow is no longer drawn.
pub const SHADOW_CUTOFF: f64 = 0.02;

/// `(1 − u)·a + u·b`, elementwise. Exact at `u = 0` and `u = 1`.
pub fn linear_ease(a: &DMatrix<f64>, b: &DMatrix<f64>, u: f64) -> Result<DMatrix<f64>> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!(
            "cannot interpolate {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(a.zip_map(b, |x, y| ease(x, y, u)))
}

#[inline]
fn ease(a: f64, b: f64, u: f64) -> f64 {
    (1.0 - u) * a + u * b
}

fn ease_point(a: &Point, b: &Point, u: f64) -> Point {
    [ease(a[0], b[0], u), ease(a[1], b[1], u)]
}

/// Either a proper polygon or the points themselves, for groups too small
/// or too flat to enclose.
#[derive(Debug, Clone, PartialEq)]
pub enum HullShape {
    /// Counter-clockwise vertices, no collinear or interior points.
    Polygon(Vec<Point>),
    /// Fewer than three points, or all collinear: draw the points.
    Points(Vec<Point>),
}

impl HullShape {
    pub fn is_passthrough(&self) -> bool {
        matches!(self, HullShape::Points(_))
    }

    pub fn vertices(&self) -> &[Point] {
        match self {
            HullShape::Polygon(v) | HullShape::Points(v) => v,
        }
    }
}

fn cross(o: &Point, a: &Point, b: &Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain.
pub fn convex_hull(points: &[Point]) -> HullShape {
    if points.len() < 3 {
        return HullShape::Points(points.to_vec());
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();

    let mut hull: Vec<Point> = Vec::with_capacity(pts.len() + 1);
    for p in pts.iter() {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    let lower = hull.len() + 1;
    for p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    hull.pop();

    if hull.len() < 3 {
        HullShape::Points(points.to_vec())
    } else {
        HullShape::Polygon(hull)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameMode {
    /// Variable vectors stay at the first state's coordinates.
    Fixed,
    /// Variable vectors are interpolated along with the samples.
    Dynamic,
}

impl FromStr for FrameMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(FrameMode::Fixed),
            "dynamic" => Ok(FrameMode::Dynamic),
            other => Err(Error::Config(format!("unknown frame mode `{other}`"))),
        }
    }
}

impl FrameMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FrameMode::Fixed => "fixed",
            FrameMode::Dynamic => "dynamic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimelineOptions {
    pub pause_frames: usize,
    pub transition_frames: usize,
    pub fps: f64,
    /// Multiplier for variable vectors.
    pub scale_var: f64,
    pub hulls: bool,
}

impl Default for TimelineOptions {
    fn default() -> Self {
        TimelineOptions {
            pause_frames: 10,
            transition_frames: 30,
            fps: 20.0,
            scale_var: 1.0,
            hulls: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Phase {
    Pause { level: String },
    Transition { from: String, to: String, u: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupHull {
    /// Index into the sequence's group names.
    pub group: usize,
    pub shape: HullShape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Shadow {
    pub level: String,
    pub opacity: f64,
    pub samples: Vec<Point>,
    pub groups: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub index: usize,
    /// Seconds since the first frame.
    pub clock: f64,
    pub phase: Phase,
    /// State the frame belongs to: the paused state, or the departing state
    /// of a transition.
    pub state_index: usize,
    pub samples: Vec<Point>,
    /// Group index of every sample.
    pub sample_groups: Vec<usize>,
    /// Variable vectors after multiplication by `scale_var`.
    pub vectors: Vec<Point>,
    pub hulls: Option<Vec<GroupHull>>,
    pub shadows: Vec<Shadow>,
    pub group_names: Arc<Vec<String>>,
    pub variable_names: Arc<Vec<String>>,
}

impl Frame {
    pub fn level_label(&self) -> String {
        match &self.phase {
            Phase::Pause { level } => level.clone(),
            Phase::Transition { from, to, .. } => format!("{from} → {to}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    pub frames: Vec<Frame>,
    pub fps: f64,
    /// Levels of the states covered, in order.
    pub levels: Vec<String>,
    pub mode: FrameMode,
    pub hulls: bool,
    pub group_names: Arc<Vec<String>>,
    pub variable_names: Arc<Vec<String>>,
}

impl FrameSequence {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Samples of one state in canonical order (group index, then within-group
/// ordinal), with their group indices and matching keys.
struct Keyed {
    samples: Vec<Point>,
    groups: Vec<usize>,
    keys: Vec<(usize, usize)>,
}

fn keyed(state: &BiplotState, group_index: &HashMap<String, usize>) -> Keyed {
    let keys: Vec<(usize, usize)> = state
        .row_keys()
        .into_iter()
        .map(|(g, o)| (group_index[&g], o))
        .collect();
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by_key(|&i| keys[i]);
    Keyed {
        samples: order
            .iter()
            .map(|&i| [state.samples[(i, 0)], state.samples[(i, 1)]])
            .collect(),
        groups: order.iter().map(|&i| keys[i].0).collect(),
        keys: order.iter().map(|&i| keys[i]).collect(),
    }
}

fn scaled_vectors(v: &DMatrix<f64>, scale_var: f64) -> Vec<Point> {
    (0..v.nrows())
        .map(|j| [v[(j, 0)] * scale_var, v[(j, 1)] * scale_var])
        .collect()
}

fn hulls_for(samples: &[Point], groups: &[usize], n_groups: usize) -> Vec<GroupHull> {
    let mut by_group: Vec<Vec<Point>> = vec![Vec::new(); n_groups];
    for (p, &g) in samples.iter().zip(groups) {
        by_group[g].push(*p);
    }
    by_group
        .into_iter()
        .enumerate()
        .filter(|(_, pts)| !pts.is_empty())
        .map(|(group, pts)| GroupHull {
            group,
            shape: convex_hull(&pts),
        })
        .collect()
}

/// Pairs the samples of two states for interpolation. Matching layouts pair
/// row by row; otherwise each group's points are cycled up to the larger of
/// the two counts (a group missing on one side stays where it is).
fn pair_samples(a: &Keyed, b: &Keyed, n_groups: usize) -> (Vec<Point>, Vec<Point>, Vec<usize>) {
    if a.keys == b.keys {
        return (a.samples.clone(), b.samples.clone(), a.groups.clone());
    }
    let split = |k: &Keyed| {
        let mut out: Vec<Vec<Point>> = vec![Vec::new(); n_groups];
        for (p, &g) in k.samples.iter().zip(&k.groups) {
            out[g].push(*p);
        }
        out
    };
    let (ga, gb) = (split(a), split(b));
    let (mut from, mut to, mut groups) = (Vec::new(), Vec::new(), Vec::new());
    for g in 0..n_groups {
        let (pa, pb) = (&ga[g], &gb[g]);
        let (pa, pb) = match (pa.is_empty(), pb.is_empty()) {
            (true, true) => continue,
            (true, false) => (pb, pb),
            (false, true) => (pa, pa),
            (false, false) => (pa, pb),
        };
        for i in 0..pa.len().max(pb.len()) {
            from.push(pa[i % pa.len()]);
            to.push(pb[i % pb.len()]);
            groups.push(g);
        }
    }
    (from, to, groups)
}

/// Interpolation parameter of transition frame `j` out of `count`: the
/// endpoints are included, so the first transition frame repeats the
/// departing state and the last one the arriving state.
pub fn transition_u(j: usize, count: usize) -> f64 {
    if count <= 1 {
        0.5
    } else {
        j as f64 / (count - 1) as f64
    }
}

/// Builds `P` pause frames per state and `F` transition frames between
/// successive states, `T·P + (T−1)·F` frames in total.
pub fn build_timeline(
    states: &[BiplotState],
    mode: FrameMode,
    opts: &TimelineOptions,
) -> Result<FrameSequence> {
    if states.len() < 2 {
        return Err(Error::Config(format!(
            "a timeline needs at least 2 states, got {}",
            states.len()
        )));
    }
    build(states, mode, opts, true)
}

/// One pause frame per state, in order, sharing group indices; used for
/// faceted output. Accepts a single state.
pub fn keyframes(states: &[BiplotState], mode: FrameMode, opts: &TimelineOptions) -> Result<FrameSequence> {
    if states.is_empty() {
        return Err(Error::Config("no states to draw".into()));
    }
    let opts = TimelineOptions {
        pause_frames: 1,
        transition_frames: 0,
        ..*opts
    };
    build(states, mode, &opts, false)
}

fn build(
    states: &[BiplotState],
    mode: FrameMode,
    opts: &TimelineOptions,
    transitions: bool,
) -> Result<FrameSequence> {
    if opts.pause_frames < 1 {
        return Err(Error::Config("at least one pause frame per state is required".into()));
    }
    if !(opts.fps > 0.0) {
        return Err(Error::Config(format!("fps must be positive, got {}", opts.fps)));
    }
    if !(opts.scale_var > 0.0) || !opts.scale_var.is_finite() {
        return Err(Error::Config(format!(
            "scale_var must be a positive number, got {}",
            opts.scale_var
        )));
    }
    let variable_names = Arc::clone(&states[0].variable_names);
    if states.iter().any(|s| s.variable_names != variable_names) {
        return Err(Error::Shape("states carry different variables".into()));
    }

    let mut group_names: Vec<String> = Vec::new();
    let mut group_index = HashMap::new();
    for s in states {
        for g in &s.groups {
            if !group_index.contains_key(g) {
                group_index.insert(g.clone(), group_names.len());
                group_names.push(g.clone());
            }
        }
    }
    let group_names = Arc::new(group_names);
    let n_groups = group_names.len();
    let keyed_states: Vec<Keyed> = states.iter().map(|s| keyed(s, &group_index)).collect();

    if mode == FrameMode::Dynamic && transitions {
        for w in states.windows(2).zip(keyed_states.windows(2)) {
            let (s, k) = w;
            if k[0].keys != k[1].keys {
                return Err(Error::Unbalanced {
                    levels: vec![s[0].level.clone(), s[1].level.clone()],
                });
            }
        }
    }

    let fixed_vectors = scaled_vectors(&states[0].variables, opts.scale_var);
    let vectors_of = |i: usize| match mode {
        FrameMode::Fixed => fixed_vectors.clone(),
        FrameMode::Dynamic => scaled_vectors(&states[i].variables, opts.scale_var),
    };

    let mut frames = Vec::new();
    let mut push = |phase: Phase, state_index: usize, samples: Vec<Point>, groups: Vec<usize>, vectors: Vec<Point>| {
        let index = frames.len();
        let hulls = opts.hulls.then(|| hulls_for(&samples, &groups, n_groups));
        frames.push(Frame {
            index,
            clock: index as f64 / opts.fps,
            phase,
            state_index,
            samples,
            sample_groups: groups,
            vectors,
            hulls,
            shadows: Vec::new(),
            group_names: Arc::clone(&group_names),
            variable_names: Arc::clone(&variable_names),
        });
    };

    for (t, state) in states.iter().enumerate() {
        let here = &keyed_states[t];
        let vectors = vectors_of(t);
        for _ in 0..opts.pause_frames {
            push(
                Phase::Pause {
                    level: state.level.clone(),
                },
                t,
                here.samples.clone(),
                here.groups.clone(),
                vectors.clone(),
            );
        }
        if !transitions || t + 1 == states.len() {
            continue;
        }
        let next = &keyed_states[t + 1];
        let (from, to, groups) = pair_samples(here, next, n_groups);
        let next_vectors = vectors_of(t + 1);
        for j in 0..opts.transition_frames {
            let u = transition_u(j, opts.transition_frames);
            let samples = from.iter().zip(&to).map(|(a, b)| ease_point(a, b, u)).collect();
            let vecs = match mode {
                FrameMode::Fixed => fixed_vectors.clone(),
                FrameMode::Dynamic => vectors
                    .iter()
                    .zip(&next_vectors)
                    .map(|(a, b)| ease_point(a, b, u))
                    .collect(),
            };
            push(
                Phase::Transition {
                    from: state.level.clone(),
                    to: states[t + 1].level.clone(),
                    u,
                },
                t,
                samples,
                groups.clone(),
                vecs,
            );
        }
    }

    Ok(FrameSequence {
        frames,
        fps: opts.fps,
        levels: states.iter().map(|s| s.level.clone()).collect(),
        mode,
        hulls: opts.hulls,
        group_names,
        variable_names,
    })
}

/// Adds faded copies of every earlier state's sample positions to each
/// frame. A state `a` steps back is drawn at opacity `decay^a` and dropped
/// once that falls below [`SHADOW_CUTOFF`].
pub fn shadow_trails(seq: &FrameSequence, decay: f64) -> Result<FrameSequence> {
    if seq.hulls {
        return Err(Error::Config("shadows are only available without hulls".into()));
    }
    if !(decay > 0.0 && decay < 1.0) {
        return Err(Error::Config(format!("shadow decay must lie in (0, 1), got {decay}")));
    }
    let mut pauses: Vec<Option<&Frame>> = vec![None; seq.levels.len()];
    for f in &seq.frames {
        if let Phase::Pause { .. } = f.phase {
            pauses[f.state_index].get_or_insert(f);
        }
    }
    let mut out = seq.clone();
    for frame in &mut out.frames {
        frame.shadows = (0..frame.state_index)
            .filter_map(|j| {
                let opacity = decay.powi((frame.state_index - j) as i32);
                if opacity < SHADOW_CUTOFF {
                    return None;
                }
                let src = pauses[j]?;
                Some(Shadow {
                    level: seq.levels[j].clone(),
                    opacity,
                    samples: src.samples.clone(),
                    groups: src.sample_groups.clone(),
                })
            })
            .collect();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_and_endpoints() {
        let a = DMatrix::from_row_slice(1, 2, &[0.0, 0.0]);
        let b = DMatrix::from_row_slice(1, 2, &[2.0, 4.0]);
        assert_eq!(linear_ease(&a, &b, 0.5).unwrap().as_slice(), &[1.0, 2.0]);
        let a = DMatrix::from_row_slice(1, 2, &[0.1, -3.7]);
        let b = DMatrix::from_row_slice(1, 2, &[1.3, 2.9]);
        assert_eq!(linear_ease(&a, &b, 0.0).unwrap(), a);
        assert_eq!(linear_ease(&a, &b, 1.0).unwrap(), b);
    }

    #[test]
    fn constant_rate() {
        let a = DMatrix::from_row_slice(1, 2, &[0.0, 1.0]);
        let b = DMatrix::from_row_slice(1, 2, &[4.0, -3.0]);
        let p: Vec<_> = [0.25, 0.5, 0.75]
            .iter()
            .map(|&u| linear_ease(&a, &b, u).unwrap())
            .collect();
        assert!(((&p[1] - &p[0]) - (&p[2] - &p[1])).norm() < 1e-15);
    }

    #[test]
    fn shape_mismatch() {
        let a = DMatrix::<f64>::zeros(2, 2);
        let b = DMatrix::<f64>::zeros(3, 2);
        assert!(matches!(linear_ease(&a, &b, 0.5), Err(Error::Shape(_))));
    }

    #[test]
    fn square_with_center() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]];
        match convex_hull(&pts) {
            HullShape::Polygon(v) => {
                assert_eq!(v, vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn small_or_flat_groups_pass_through() {
        assert!(convex_hull(&[[0.0, 0.0], [1.0, 1.0]]).is_passthrough());
        assert!(convex_hull(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]).is_passthrough());
        assert!(convex_hull(&[[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]]).is_passthrough());
        assert!(convex_hull(&[]).is_passthrough());
    }

    #[test]
    fn collinear_edge_points_are_not_vertices() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]];
        assert_eq!(convex_hull(&pts).vertices().len(), 4);
    }

    #[test]
    fn transition_parameter_spans_unit_interval() {
        assert_eq!(transition_u(0, 30), 0.0);
        assert_eq!(transition_u(29, 30), 1.0);
        assert_eq!(transition_u(0, 1), 0.5);
    }
}
