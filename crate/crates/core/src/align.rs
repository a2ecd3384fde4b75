//! Removing admissible differences (translation, rotation, reflection and
//! isotropic scaling) between per-level biplot configurations.
//!
//! Two paths are provided: manual reflection of chosen levels
//! ([`reflect_at_levels`]) and automated alignment by Generalized Procrustes
//! analysis ([`align_series`]), either to the evolving consensus or to a
//! fixed, user-supplied target.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, Matrix2, RowVector2, SymmetricEigen};

use crate::error::{Error, Result};
use crate::pca::BiplotState;

/// Mirror axis for manual sign correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Reflect about the x-axis: negate second coordinates.
    X,
    /// Reflect about the y-axis: negate first coordinates.
    Y,
    /// Reflect about both axes.
    XY,
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "xy" | "yx" => Ok(Axis::XY),
            other => Err(Error::UnknownAxis(other.to_owned())),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::XY => "xy",
        })
    }
}

impl Axis {
    fn negates(self) -> [bool; 2] {
        match self {
            Axis::X => [false, true],
            Axis::Y => [true, false],
            Axis::XY => [true, true],
        }
    }
}

fn negate_columns(m: &DMatrix<f64>, which: [bool; 2]) -> DMatrix<f64> {
    let mut out = m.clone();
    for (k, flip) in which.iter().enumerate() {
        if *flip {
            out.column_mut(k).neg_mut();
        }
    }
    out
}

/// Mirrors both sample and variable coordinates of a state.
pub fn apply_reflection(state: &BiplotState, axis: Axis) -> BiplotState {
    let which = axis.negates();
    BiplotState {
        samples: negate_columns(&state.samples, which),
        variables: Arc::new(negate_columns(&state.variables, which)),
        ..state.clone()
    }
}

/// Reflects the states at the listed levels; every other state is returned
/// untouched.
pub fn reflect_at_levels(
    states: &[BiplotState],
    align_time: &[String],
    axis: Axis,
) -> Result<Vec<BiplotState>> {
    for level in align_time {
        if !states.iter().any(|s| &s.level == level) {
            return Err(Error::UnknownLevel {
                level: level.clone(),
                valid: states.iter().map(|s| s.level.clone()).collect(),
            });
        }
    }
    Ok(states
        .iter()
        .map(|s| {
            if align_time.contains(&s.level) {
                apply_reflection(s, axis)
            } else {
                s.clone()
            }
        })
        .collect())
}

/// `x ↦ scale · x · rotation + translation`, acting on row vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityTransform {
    /// Orthogonal; determinant +1 (rotation) or −1 (reflection).
    pub rotation: Matrix2<f64>,
    pub scale: f64,
    pub translation: RowVector2<f64>,
}

impl SimilarityTransform {
    pub fn identity() -> Self {
        SimilarityTransform {
            rotation: Matrix2::identity(),
            scale: 1.0,
            translation: RowVector2::zeros(),
        }
    }

    /// Applies the full transform to every row of an m × 2 configuration.
    pub fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.transform_rows(x, true)
    }

    /// Applies rotation and scale only (for direction vectors).
    pub fn apply_linear(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.transform_rows(x, false)
    }

    fn transform_rows(&self, x: &DMatrix<f64>, translate: bool) -> DMatrix<f64> {
        let q = &self.rotation;
        let mut out = DMatrix::zeros(x.nrows(), 2);
        for i in 0..x.nrows() {
            let (a, b) = (x[(i, 0)], x[(i, 1)]);
            for k in 0..2 {
                let mut v = self.scale * (a * q[(0, k)] + b * q[(1, k)]);
                if translate {
                    v += self.translation[k];
                }
                out[(i, k)] = v;
            }
        }
        out
    }

    pub fn determinant(&self) -> f64 {
        self.rotation.determinant()
    }

    /// ‖QᵀQ − I‖_F.
    pub fn orthogonality_error(&self) -> f64 {
        (self.rotation.transpose() * self.rotation - Matrix2::identity()).norm()
    }
}

fn check_config(x: &DMatrix<f64>, what: &str) -> Result<()> {
    if x.ncols() != 2 {
        return Err(Error::Shape(format!("{what} has {} columns, expected 2", x.ncols())));
    }
    if x.nrows() < 2 {
        return Err(Error::DegenerateConfiguration(format!(
            "{what} has {} rows, at least 2 are needed",
            x.nrows()
        )));
    }
    Ok(())
}

pub(crate) fn centroid(x: &DMatrix<f64>) -> RowVector2<f64> {
    let m = x.nrows() as f64;
    RowVector2::new(x.column(0).sum() / m, x.column(1).sum() / m)
}

pub(crate) fn centered(x: &DMatrix<f64>) -> DMatrix<f64> {
    let c = centroid(x);
    let mut out = x.clone();
    for mut row in out.row_iter_mut() {
        row[0] -= c[0];
        row[1] -= c[1];
    }
    out
}

/// `Aᵀ B` for two m × 2 matrices.
fn cross_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Matrix2<f64> {
    let mut m = Matrix2::zeros();
    for i in 0..a.nrows() {
        for r in 0..2 {
            for c in 0..2 {
                m[(r, c)] += a[(i, r)] * b[(i, c)];
            }
        }
    }
    m
}

/// Orthogonal factor and trace of singular values maximizing tr(Qᵀ M).
fn polar_rotation(m: &Matrix2<f64>) -> (Matrix2<f64>, f64) {
    let svd = m.svd(true, true);
    let u = svd.u.expect("2×2 SVD computes U");
    let w_t = svd.v_t.expect("2×2 SVD computes Vᵀ");
    (u * w_t, svd.singular_values.sum())
}

/// Least-squares similarity transform taking `source` onto `target`
/// (rows matched). Reflections are permitted; `allow_scale = false` fixes
/// the scale at 1.
pub fn orthogonal_procrustes(
    source: &DMatrix<f64>,
    target: &DMatrix<f64>,
    allow_scale: bool,
) -> Result<SimilarityTransform> {
    check_config(source, "source")?;
    check_config(target, "target")?;
    if source.nrows() != target.nrows() {
        return Err(Error::Shape(format!(
            "source has {} rows, target {}",
            source.nrows(),
            target.nrows()
        )));
    }
    let (cs, ct) = (centroid(source), centroid(target));
    let a = centered(source);
    let b = centered(target);
    let ss_a = a.norm_squared();
    if ss_a == 0.0 || ss_a <= 1e-24 * source.norm_squared() {
        return Err(Error::DegenerateConfiguration(
            "source configuration has zero variance".into(),
        ));
    }
    let (rotation, trace) = polar_rotation(&cross_product(&a, &b));
    let scale = if allow_scale {
        let s = trace / ss_a;
        if !(s > 0.0) {
            return Err(Error::DegenerateConfiguration(
                "target configuration has zero variance".into(),
            ));
        }
        s
    } else {
        1.0
    };
    let translation = ct - scale * (cs * rotation);
    Ok(SimilarityTransform {
        rotation,
        scale,
        translation,
    })
}

/// Outcome of [`gpa_consensus`].
#[derive(Debug, Clone, PartialEq)]
pub struct GpaResult {
    /// Input configurations after their transforms, centered.
    pub aligned: Vec<DMatrix<f64>>,
    pub transforms: Vec<SimilarityTransform>,
    /// Mean of the aligned configurations.
    pub consensus: DMatrix<f64>,
    pub iterations: usize,
    /// Σᵢ ‖Aᵢ − consensus‖²_F after each iteration.
    pub rss_history: Vec<f64>,
    pub converged: bool,
}

impl GpaResult {
    pub fn final_rss(&self) -> f64 {
        self.rss_history.last().copied().unwrap_or(0.0)
    }
}

fn mean_config(configs: &[DMatrix<f64>]) -> DMatrix<f64> {
    let mut sum = DMatrix::zeros(configs[0].nrows(), 2);
    for c in configs {
        sum += c;
    }
    sum / configs.len() as f64
}

fn residual_ss(configs: &[DMatrix<f64>], consensus: &DMatrix<f64>) -> f64 {
    configs.iter().map(|c| (c - consensus).norm_squared()).sum()
}

/// Generalized Procrustes analysis with reflections and per-configuration
/// isotropic scaling.
///
/// Configurations are centered, the consensus starts as their arithmetic
/// mean after rotation onto a reference configuration, and each iteration rotates every configuration onto the consensus,
/// rescales them all, and recomputes the consensus. Scales are chosen
/// optimally under the constraint that the total sum of squares of the
/// ensemble is preserved, which rules out the trivial collapse to zero.
/// Iteration stops once the residual sum of squares decreases by less than
/// `tol`, or after `max_iter` iterations with `converged = false`.
pub fn gpa_consensus(configs: &[DMatrix<f64>], tol: f64, max_iter: usize) -> Result<GpaResult> {
    if configs.len() < 2 {
        return Err(Error::Shape(format!(
            "GPA needs at least 2 configurations, got {}",
            configs.len()
        )));
    }
    let m = configs[0].nrows();
    for (i, c) in configs.iter().enumerate() {
        check_config(c, &format!("configuration {i}"))?;
        if c.nrows() != m {
            return Err(Error::Shape(format!(
                "configuration {i} has {} rows, configuration 0 has {m}",
                c.nrows()
            )));
        }
    }
    let k = configs.len();
    let centroids: Vec<RowVector2<f64>> = configs.iter().map(centroid).collect();
    let work: Vec<DMatrix<f64>> = configs.iter().map(centered).collect();
    for (i, w) in work.iter().enumerate() {
        if w.norm_squared() == 0.0 {
            return Err(Error::DegenerateConfiguration(format!(
                "configuration {i} has zero variance"
            )));
        }
    }
    let total_ss: f64 = work.iter().map(|w| w.norm_squared()).sum();

    // ALS reaches local minima on some ensembles. The first start is the
    // exact optimum of the rotation-and-scaling problem over reflection
    // patterns; every configuration then also takes a turn as the reference
    // of a plain start, and the best run is kept.
    let mut starts = vec![spectral_orientations(&work)];
    for reference in 0..k {
        starts.push(
            (0..k)
                .map(|i| {
                    if i == reference {
                        Matrix2::identity()
                    } else {
                        polar_rotation(&cross_product(&work[i], &work[reference])).0
                    }
                })
                .collect(),
        );
    }
    let mut best: Option<GpaRun> = None;
    for start in starts {
        let run = gpa_run(&work, start, total_ss, tol, max_iter);
        let better = match &best {
            None => true,
            Some(b) => run.final_rss() < b.final_rss() - 1e-12 * total_ss,
        };
        if better {
            best = Some(run);
        }
    }
    let GpaRun {
        aligned,
        mut rotations,
        scales,
        mut consensus,
        iterations,
        rss_history,
        converged,
    } = best.expect("at least two configurations");
    if !converged {
        log::warn!("GPA stopped after {iterations} iterations without converging");
    }

    // The consensus is only defined up to a common orthogonal transform.
    // Pick the one that keeps the aligned ensemble closest to the input, so
    // an already aligned ensemble is left where it is.
    let mut gauge = Matrix2::zeros();
    for (y, x) in aligned.iter().zip(&work) {
        gauge += cross_product(y, x);
    }
    let (gauge, _) = polar_rotation(&gauge);
    let g = to_dmatrix(&gauge);
    let aligned: Vec<DMatrix<f64>> = aligned.iter().map(|y| y * &g).collect();
    consensus = &consensus * &g;
    for r in rotations.iter_mut() {
        *r *= gauge;
    }

    let transforms = (0..k)
        .map(|i| SimilarityTransform {
            rotation: rotations[i],
            scale: scales[i],
            translation: -(scales[i] * (centroids[i] * rotations[i])),
        })
        .collect();
    Ok(GpaResult {
        aligned,
        transforms,
        consensus,
        iterations,
        rss_history,
        converged,
    })
}

struct GpaRun {
    aligned: Vec<DMatrix<f64>>,
    rotations: Vec<Matrix2<f64>>,
    scales: Vec<f64>,
    consensus: DMatrix<f64>,
    iterations: usize,
    rss_history: Vec<f64>,
    converged: bool,
}

impl GpaRun {
    fn final_rss(&self) -> f64 {
        self.rss_history.last().copied().unwrap_or(f64::INFINITY)
    }
}

/// One ALS run over centered configurations, started from the mean after
/// applying `start` to each of them.
fn gpa_run(centered: &[DMatrix<f64>], start: Vec<Matrix2<f64>>, total_ss: f64, tol: f64, max_iter: usize) -> GpaRun {
    let k = centered.len();
    let mut work: Vec<DMatrix<f64>> = centered.iter().zip(&start).map(|(c, q)| c * to_dmatrix(q)).collect();
    let mut rotations = start;
    let mut scales = vec![1.0; k];
    let mut consensus = mean_config(&work);

    let mut rss_history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;

        for (i, w) in work.iter_mut().enumerate() {
            let (q, _) = polar_rotation(&cross_product(w, &consensus));
            *w = &*w * to_dmatrix(&q);
            rotations[i] *= q;
        }

        let betas = optimal_scales(&work, total_ss);
        for (i, beta) in betas.into_iter().enumerate() {
            if beta < 0.0 {
                rotations[i] = -rotations[i];
            }
            work[i] *= beta;
            scales[i] *= beta.abs();
        }

        consensus = mean_config(&work);
        let rss = residual_ss(&work, &consensus);
        let done = rss_history
            .last()
            .is_some_and(|&prev: &f64| prev - rss < tol);
        rss_history.push(rss);
        if done {
            converged = true;
            break;
        }
    }
    GpaRun {
        aligned: work,
        rotations,
        scales,
        consensus,
        iterations,
        rss_history,
        converged,
    }
}

fn to_dmatrix(q: &Matrix2<f64>) -> DMatrix<f64> {
    DMatrix::from_iterator(2, 2, q.iter().copied())
}

/// Orientations maximizing ‖Σ cᵢ zᵢ‖² over unit-norm complex weights c,
/// where zᵢ is configuration i read as a complex vector (x + iy) and
/// normalized. A rotation multiplies zᵢ by a unit complex number and a
/// reflection conjugates it, so for a fixed reflection pattern the optimum
/// is the leading eigenvector of the Hermitian matrix Hᵢⱼ = zᵢᴴ zⱼ. Patterns
/// are enumerated exhaustively for small ensembles and improved by single
/// flips otherwise.
fn spectral_orientations(centered: &[DMatrix<f64>]) -> Vec<Matrix2<f64>> {
    const EXHAUSTIVE_LIMIT: usize = 12;
    let k = centered.len();
    let unit: Vec<DMatrix<f64>> = centered.iter().map(|c| c / c.norm()).collect();
    let mut best_pattern = vec![false; k];
    let (mut best_value, mut best_vec) = hermitian_leading(&unit, &best_pattern);
    if k <= EXHAUSTIVE_LIMIT {
        for bits in 1..(1usize << (k - 1)) {
            let pattern: Vec<bool> = (0..k).map(|i| i > 0 && bits >> (i - 1) & 1 == 1).collect();
            let (value, vec) = hermitian_leading(&unit, &pattern);
            if value > best_value + 1e-14 {
                (best_value, best_vec, best_pattern) = (value, vec, pattern);
            }
        }
    } else {
        let mut improved = true;
        while improved {
            improved = false;
            for i in 1..k {
                let mut pattern = best_pattern.clone();
                pattern[i] = !pattern[i];
                let (value, vec) = hermitian_leading(&unit, &pattern);
                if value > best_value + 1e-14 {
                    (best_value, best_vec, best_pattern) = (value, vec, pattern);
                    improved = true;
                }
            }
        }
    }
    (0..k)
        .map(|i| {
            let (re, im) = (best_vec[i], best_vec[k + i]);
            let r = re.hypot(im);
            let (c, s) = if r > 0.0 { (re / r, im / r) } else { (1.0, 0.0) };
            // Row convention: (x, y)·[[c, s], [−s, c]] multiplies x + iy by c + is.
            let rotation = Matrix2::new(c, s, -s, c);
            if best_pattern[i] {
                Matrix2::new(1.0, 0.0, 0.0, -1.0) * rotation
            } else {
                rotation
            }
        })
        .collect()
}

/// Leading eigenpair of H = A + iB (conjugating the configurations flagged
/// in `conjugate`) through its real embedding [[A, −B], [B, A]]; the
/// eigenvector is returned as (Re c, Im c) stacked.
fn hermitian_leading(unit: &[DMatrix<f64>], conjugate: &[bool]) -> (f64, Vec<f64>) {
    let k = unit.len();
    let sign = |i: usize| if conjugate[i] { -1.0 } else { 1.0 };
    let mut embed = DMatrix::zeros(2 * k, 2 * k);
    for i in 0..k {
        for j in 0..k {
            // zᵢᴴ zⱼ with z = x + i·σy.
            let (mut re, mut im) = (0.0, 0.0);
            for r in 0..unit[i].nrows() {
                let (xi, yi) = (unit[i][(r, 0)], sign(i) * unit[i][(r, 1)]);
                let (xj, yj) = (unit[j][(r, 0)], sign(j) * unit[j][(r, 1)]);
                re += xi * xj + yi * yj;
                im += xi * yj - yi * xj;
            }
            embed[(i, j)] = re;
            embed[(k + i, k + j)] = re;
            embed[(i, k + j)] = -im;
            embed[(k + i, j)] = im;
        }
    }
    let eig = SymmetricEigen::new(embed);
    let top = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > eig.eigenvalues[best] { i } else { best });
    (eig.eigenvalues[top], eig.eigenvectors.column(top).iter().copied().collect())
}

/// Scale factors βᵢ maximizing ‖Σ βᵢ Xᵢ‖² subject to Σ βᵢ² ‖Xᵢ‖² = total_ss:
/// βᵢ = sqrt(total_ss / ‖Xᵢ‖²) φᵢ with φ the leading eigenvector of the
/// normalized inner-product matrix.
fn optimal_scales(configs: &[DMatrix<f64>], total_ss: f64) -> Vec<f64> {
    let k = configs.len();
    let norms: Vec<f64> = configs.iter().map(|c| c.norm()).collect();
    let phi = DMatrix::from_fn(k, k, |i, j| {
        configs[i].dot(&configs[j]) / (norms[i] * norms[j])
    });
    let eig = SymmetricEigen::new(phi);
    let top = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > eig.eigenvalues[best] { i } else { best });
    let mut vec: Vec<f64> = eig.eigenvectors.column(top).iter().copied().collect();
    if vec.iter().sum::<f64>() < 0.0 {
        vec.iter_mut().for_each(|v| *v = -*v);
    }
    vec.iter()
        .zip(&norms)
        .map(|(f, n)| (total_ss).sqrt() / n * f)
        .collect()
}

/// Which matrix drives the alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlignOn {
    /// Sample coordinates, rows matched by (group, within-group ordinal).
    #[default]
    Samples,
    /// Variable coordinates, rows matched by variable.
    Variables,
}

impl FromStr for AlignOn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "samples" => Ok(AlignOn::Samples),
            "variables" => Ok(AlignOn::Variables),
            other => Err(Error::Config(format!(
                "unknown alignment target `{other}` (expected samples or variables)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignConfig {
    pub on: AlignOn,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            on: AlignOn::Samples,
            tol: 1e-10,
            max_iter: 100,
        }
    }
}

/// What the states were aligned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    Consensus,
    Supplied,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentResult {
    pub aligned_states: Vec<BiplotState>,
    /// One per state.
    pub transforms: Vec<SimilarityTransform>,
    /// Alignment configuration of each state after its transform, rows in
    /// matched order.
    pub aligned_configs: Vec<DMatrix<f64>>,
    /// GPA consensus, or the supplied target's configuration unchanged.
    pub consensus: DMatrix<f64>,
    pub target: TargetKind,
    pub iterations: usize,
    pub rss_history: Vec<f64>,
    pub final_rss: f64,
    pub converged: bool,
}

impl AlignmentResult {
    pub fn levels(&self) -> Vec<String> {
        self.aligned_states.iter().map(|s| s.level.clone()).collect()
    }
}

/// Row order that sorts a state's samples by (group, within-group ordinal).
fn matched_order(state: &BiplotState) -> (Vec<(String, usize)>, Vec<usize>) {
    let keys = state.row_keys();
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let sorted = idx.iter().map(|&i| keys[i].clone()).collect();
    (sorted, idx)
}

fn alignment_configs(
    states: &[BiplotState],
    target: Option<&BiplotState>,
    on: AlignOn,
) -> Result<(Vec<DMatrix<f64>>, Option<DMatrix<f64>>)> {
    match on {
        AlignOn::Samples => {
            let (reference, _) = matched_order(&states[0]);
            let mut offending = Vec::new();
            let mut configs = Vec::with_capacity(states.len());
            for s in states {
                let (keys, order) = matched_order(s);
                if keys != reference {
                    offending.push(s.level.clone());
                }
                configs.push(s.samples.select_rows(&order));
            }
            if !offending.is_empty() {
                // Report every level that disagrees with the majority layout.
                let mut counts: HashMap<Vec<(String, usize)>, Vec<String>> = HashMap::new();
                for s in states {
                    counts.entry(matched_order(s).0).or_default().push(s.level.clone());
                }
                let majority = counts
                    .values()
                    .max_by_key(|v| v.len())
                    .cloned()
                    .unwrap_or_default();
                let levels = states
                    .iter()
                    .map(|s| s.level.clone())
                    .filter(|l| !majority.contains(l))
                    .collect();
                return Err(Error::Unbalanced { levels });
            }
            let target = target
                .map(|t| {
                    let (keys, order) = matched_order(t);
                    if keys != reference {
                        return Err(Error::Shape(format!(
                            "target rows do not match the time slices ({} target rows, {} per slice)",
                            t.n(),
                            reference.len()
                        )));
                    }
                    Ok(t.samples.select_rows(&order))
                })
                .transpose()?;
            Ok((configs, target))
        }
        AlignOn::Variables => {
            let names = &states[0].variable_names;
            for s in states {
                if s.variable_names != *names {
                    return Err(Error::Shape(format!(
                        "level `{}` has different variables",
                        s.level
                    )));
                }
            }
            if let Some(t) = target {
                if t.variable_names != *names {
                    return Err(Error::Shape("target has different variables".into()));
                }
            }
            Ok((
                states.iter().map(|s| (*s.variables).clone()).collect(),
                target.map(|t| (*t.variables).clone()),
            ))
        }
    }
}

/// Aligns a series of per-level biplots.
///
/// Without a target, GPA runs over all levels and the consensus becomes the
/// target. With a target, each level is aligned to it once and the target
/// never moves. The transform found for a level is applied to its samples
/// (with translation) and its variable vectors (rotation and scale only).
pub fn align_series(
    states: &[BiplotState],
    target: Option<&BiplotState>,
    config: &AlignConfig,
) -> Result<AlignmentResult> {
    if states.is_empty() {
        return Err(Error::Shape("no states to align".into()));
    }
    let (configs, target_config) = alignment_configs(states, target, config.on)?;

    let (transforms, aligned_configs, consensus, kind, iterations, rss_history, converged) =
        match target_config {
            None => {
                let gpa = gpa_consensus(&configs, config.tol, config.max_iter)?;
                (
                    gpa.transforms,
                    gpa.aligned,
                    gpa.consensus,
                    TargetKind::Consensus,
                    gpa.iterations,
                    gpa.rss_history,
                    gpa.converged,
                )
            }
            Some(target) => {
                let transforms = configs
                    .iter()
                    .map(|c| orthogonal_procrustes(c, &target, true))
                    .collect::<Result<Vec<_>>>()?;
                let aligned: Vec<DMatrix<f64>> = configs
                    .iter()
                    .zip(&transforms)
                    .map(|(c, t)| t.apply(c))
                    .collect();
                let rss = residual_ss(&aligned, &target);
                (
                    transforms,
                    aligned,
                    target,
                    TargetKind::Supplied,
                    1,
                    vec![rss],
                    true,
                )
            }
        };

    let aligned_states = states
        .iter()
        .zip(&transforms)
        .map(|(s, t)| {
            let samples = match config.on {
                AlignOn::Samples => t.apply(&s.samples),
                AlignOn::Variables => t.apply_linear(&s.samples),
            };
            BiplotState {
                samples,
                variables: Arc::new(t.apply_linear(&s.variables)),
                ..s.clone()
            }
        })
        .collect();
    let final_rss = rss_history.last().copied().unwrap_or(0.0);
    Ok(AlignmentResult {
        aligned_states,
        transforms,
        aligned_configs,
        consensus,
        target: kind,
        iterations,
        rss_history,
        final_rss,
        converged,
    })
}
