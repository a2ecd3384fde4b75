//! Two-dimensional PCA biplots: one global decomposition (fixed variable
//! frame) or one decomposition per time slice (dynamic frame).
//!
//! Samples are placed in principal coordinates (first two columns of `UD`)
//! and variables in standard coordinates (first two columns of `V`), from the
//! SVD `X = U D Vᵀ` of the standardized data matrix.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::data::{Dataset, TimeSlice};
use crate::error::{Error, Result};

/// Centering (always) and scaling (optional) applied before the SVD.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizationStats {
    pub means: Vec<f64>,
    /// Sample standard deviations (n − 1 denominator); all ones when not scaled.
    pub scales: Vec<f64>,
    pub scaled: bool,
}

impl StandardizationStats {
    /// Applies these statistics to `x` without recomputing them.
    pub fn apply(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.means.len() {
            return Err(Error::Shape(format!(
                "{} columns against statistics for {}",
                x.ncols(),
                self.means.len()
            )));
        }
        let mut out = x.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            for v in col.iter_mut() {
                *v = (*v - self.means[j]) / self.scales[j];
            }
        }
        Ok(out)
    }
}

/// Column-centers `x` and, when `scaled`, divides each column by its sample
/// standard deviation. A zero-variance column cannot be scaled; the error
/// carries the column index as text (callers with names substitute them).
pub fn standardize(x: &DMatrix<f64>, scaled: bool) -> Result<(DMatrix<f64>, StandardizationStats)> {
    standardize_named(x, scaled, None)
}

fn standardize_named(
    x: &DMatrix<f64>,
    scaled: bool,
    names: Option<&[String]>,
) -> Result<(DMatrix<f64>, StandardizationStats)> {
    let (n, p) = x.shape();
    if n < 2 {
        return Err(Error::Shape(format!("standardization needs at least 2 rows, got {n}")));
    }
    let mut means = Vec::with_capacity(p);
    let mut scales = Vec::with_capacity(p);
    for (j, col) in x.column_iter().enumerate() {
        let mean = col.sum() / n as f64;
        let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
        let sd = (ss / (n - 1) as f64).sqrt();
        if scaled && (sd == 0.0 || sd <= 1e-12 * mean.abs()) {
            let name = names
                .and_then(|n| n.get(j).cloned())
                .unwrap_or_else(|| format!("#{}", j + 1));
            return Err(Error::DegenerateColumn(name));
        }
        means.push(mean);
        scales.push(if scaled { sd } else { 1.0 });
    }
    let stats = StandardizationStats {
        means,
        scales,
        scaled,
    };
    let out = stats.apply(x)?;
    Ok((out, stats))
}

/// Rank-2 part of an SVD after the sign convention has been applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// n × 2 principal coordinates.
    pub scores: DMatrix<f64>,
    /// p × 2 standard coordinates.
    pub loadings: DMatrix<f64>,
    /// Full singular spectrum, non-increasing.
    pub singular_values: Vec<f64>,
}

impl Decomposition {
    pub fn explained_variance(&self) -> [f64; 2] {
        let total: f64 = self.singular_values.iter().map(|d| d * d).sum();
        [
            self.singular_values[0].powi(2) / total,
            self.singular_values[1].powi(2) / total,
        ]
    }
}

/// SVD of an already standardized matrix, truncated to two components.
pub fn decompose(x_std: &DMatrix<f64>) -> Result<Decomposition> {
    let (n, p) = x_std.shape();
    if n < 2 || p < 2 {
        return Err(Error::RankDeficient {
            rank: n.min(p).min(1),
            level: None,
        });
    }
    let (w, v) = jacobi_svd(x_std);
    let norms: Vec<f64> = (0..p).map(|k| w.column(k).norm()).collect();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let d: Vec<f64> = order.iter().take(n.min(p)).map(|&k| norms[k]).collect();

    let tol = n.max(p) as f64 * f64::EPSILON * d[0];
    let rank = d.iter().filter(|&&s| s > tol).count();
    if rank < 2 {
        return Err(Error::RankDeficient { rank, level: None });
    }

    let mut scores = DMatrix::zeros(n, 2);
    let mut loadings = DMatrix::zeros(p, 2);
    for (k, &src) in order.iter().take(2).enumerate() {
        scores.set_column(k, &w.column(src));
        loadings.set_column(k, &v.column(src));
    }
    apply_sign_convention(&mut scores, &mut loadings);
    Ok(Decomposition {
        scores,
        loadings,
        singular_values: d,
    })
}

/// One-sided Jacobi SVD: returns `W = X V` with mutually orthogonal
/// columns (their norms are the singular values, unsorted) and orthogonal
/// `V`. Used instead of bidiagonal QR, which loses accuracy on some
/// rank-deficient wide blocks.
fn jacobi_svd(x: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let p = x.ncols();
    let mut w = x.clone();
    let mut v = DMatrix::identity(p, p);
    for _ in 0..80 {
        let mut rotated = false;
        for i in 0..p {
            for j in i + 1..p {
                let alpha = w.column(i).norm_squared();
                let beta = w.column(j).norm_squared();
                let gamma = w.column(i).dot(&w.column(j));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut w, &mut v] {
                    for r in 0..m.nrows() {
                        let (a, b) = (m[(r, i)], m[(r, j)]);
                        m[(r, i)] = c * a - s * b;
                        m[(r, j)] = s * a + c * b;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (w, v)
}

/// Flips each component so that the loading with the largest magnitude is
/// positive. Magnitudes within a relative 1e-9 of the maximum count as tied
/// and the lowest variable index wins, so rounding noise cannot decide
/// exact ties such as the two-variable correlation case. Idempotent.
pub fn apply_sign_convention(scores: &mut DMatrix<f64>, loadings: &mut DMatrix<f64>) {
    for k in 0..loadings.ncols() {
        let col = loadings.column(k);
        let max = col.amax();
        let best = (0..col.len())
            .find(|&j| col[j].abs() >= max * (1.0 - TIE_TOLERANCE))
            .unwrap_or(0);
        if col[best] < 0.0 {
            loadings.column_mut(k).neg_mut();
            scores.column_mut(k).neg_mut();
        }
    }
}

const TIE_TOLERANCE: f64 = 1e-9;

/// One time level's biplot: sample and variable coordinates plus labels.
#[derive(Debug, Clone, PartialEq)]
pub struct BiplotState {
    pub level: String,
    /// n_t × 2 sample coordinates.
    pub samples: DMatrix<f64>,
    /// p × 2 variable coordinates. Shared between states of a fixed frame.
    pub variables: Arc<DMatrix<f64>>,
    pub variable_names: Arc<Vec<String>>,
    /// Group label of each sample row.
    pub groups: Vec<String>,
    pub explained_variance: [f64; 2],
    /// Full singular spectrum of the decomposition the state came from.
    pub singular_values: Arc<Vec<f64>>,
}

impl BiplotState {
    pub fn n(&self) -> usize {
        self.samples.nrows()
    }

    pub fn p(&self) -> usize {
        self.variables.nrows()
    }

    /// Matching key of every sample row: (group, ordinal within the group).
    pub fn row_keys(&self) -> Vec<(String, usize)> {
        let mut seen: std::collections::HashMap<&str, usize> = Default::default();
        self.groups
            .iter()
            .map(|g| {
                let c = seen.entry(g.as_str()).or_insert(0);
                *c += 1;
                (g.clone(), *c - 1)
            })
            .collect()
    }
}

/// PCA biplot of one data block.
pub fn pca_biplot(
    x: &DMatrix<f64>,
    scaled: bool,
    level: &str,
    variable_names: &[String],
    groups: &[String],
) -> Result<BiplotState> {
    let (n, p) = x.shape();
    if variable_names.len() != p || groups.len() != n {
        return Err(Error::Shape(format!(
            "{n}×{p} block with {} names and {} group labels",
            variable_names.len(),
            groups.len()
        )));
    }
    if p < 2 {
        return Err(Error::TooFewVariables(p));
    }
    if n < 3 {
        return Err(Error::UndersizedSlice {
            level: level.to_owned(),
            count: n,
        });
    }
    let (x_std, _) = standardize_named(x, scaled, Some(variable_names))?;
    state_from_standardized(&x_std, level, variable_names, groups)
}

fn state_from_standardized(
    x_std: &DMatrix<f64>,
    level: &str,
    variable_names: &[String],
    groups: &[String],
) -> Result<BiplotState> {
    let dec = decompose(x_std).map_err(|e| match e {
        Error::RankDeficient { rank, .. } => Error::RankDeficient {
            rank,
            level: Some(level.to_owned()),
        },
        other => other,
    })?;
    let explained_variance = dec.explained_variance();
    Ok(BiplotState {
        level: level.to_owned(),
        samples: dec.scores,
        variables: Arc::new(dec.loadings),
        variable_names: Arc::new(variable_names.to_vec()),
        groups: groups.to_vec(),
        explained_variance,
        singular_values: Arc::new(dec.singular_values),
    })
}

/// PCA over every row of the dataset; the state is labelled with `level`.
pub fn global_pca(d: &Dataset, scaled: bool, level: &str) -> Result<BiplotState> {
    pca_biplot(
        d.numeric(),
        scaled,
        level,
        d.variable_names(),
        d.group_labels(),
    )
}

/// Slices the rows of a global biplot by time level. Every returned state
/// shares the global variable coordinates.
pub fn project_slices(global: &BiplotState, slices: &[TimeSlice]) -> Result<Vec<BiplotState>> {
    let n = global.n();
    slices
        .iter()
        .map(|s| {
            if let Some(&bad) = s.row_indices.iter().find(|&&i| i >= n) {
                return Err(Error::Internal(format!(
                    "row {bad} of level `{}` outside the {n}-row global biplot",
                    s.level
                )));
            }
            Ok(BiplotState {
                level: s.level.clone(),
                samples: global.samples.select_rows(&s.row_indices),
                variables: Arc::clone(&global.variables),
                variable_names: Arc::clone(&global.variable_names),
                groups: s.row_indices.iter().map(|&i| global.groups[i].clone()).collect(),
                explained_variance: global.explained_variance,
                singular_values: Arc::clone(&global.singular_values),
            })
        })
        .collect()
}

/// How each slice is standardized before its own decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SliceStandardization {
    /// Center (and scale) with the slice's own statistics.
    #[default]
    WithinSlice,
    /// Reuse statistics computed on the full dataset.
    Global,
}

/// Independent PCA per time slice. Output order follows `slices`.
pub fn per_slice_pca(
    d: &Dataset,
    slices: &[TimeSlice],
    scaled: bool,
    mode: SliceStandardization,
) -> Result<Vec<BiplotState>> {
    if let Some(s) = slices.iter().find(|s| s.count() < 3) {
        return Err(Error::UndersizedSlice {
            level: s.level.clone(),
            count: s.count(),
        });
    }
    let global_stats = match mode {
        SliceStandardization::Global => {
            Some(standardize_named(d.numeric(), scaled, Some(d.variable_names()))?.1)
        }
        SliceStandardization::WithinSlice => None,
    };
    slices
        .par_iter()
        .map(|s| {
            let block = d.rows(&s.row_indices);
            let groups = d.groups_of(&s.row_indices);
            match &global_stats {
                None => pca_biplot(&block, scaled, &s.level, d.variable_names(), &groups),
                Some(stats) => {
                    let x_std = stats.apply(&block)?;
                    state_from_standardized(&x_std, &s.level, d.variable_names(), &groups)
                }
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(p: usize) -> Vec<String> {
        (1..=p).map(|j| format!("v{j}")).collect()
    }

    #[test]
    fn standardize_symmetric_column() {
        let x = DMatrix::from_column_slice(3, 2, &[1.0, 2.0, 3.0, 10.0, 20.0, 60.0]);
        let (z, stats) = standardize(&x, true).unwrap();
        assert_eq!(z.column(0).as_slice(), &[-1.0, 0.0, 1.0]);
        assert_eq!(stats.means[0], 2.0);
        assert_eq!(stats.scales[0], 1.0);
        let sd: f64 = (z.column(1).iter().map(|v| v * v).sum::<f64>() / 2.0).sqrt();
        assert!((sd - 1.0).abs() < 1e-14);
    }

    #[test]
    fn standardize_unscaled_only_centers() {
        let x = DMatrix::from_column_slice(3, 2, &[1.0, 5.0, 3.0, 4.0, 4.0, 4.0]);
        let (z, stats) = standardize(&x, false).unwrap();
        assert_eq!(z.column(0).as_slice(), &[-2.0, 2.0, 0.0]);
        assert_eq!(z.column(1).as_slice(), &[0.0, 0.0, 0.0]);
        assert!(!stats.scaled);
    }

    #[test]
    fn constant_column_cannot_be_scaled() {
        let x = DMatrix::from_column_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 4.0, 4.0]);
        assert!(matches!(standardize(&x, true), Err(Error::DegenerateColumn(ref c)) if c == "#2"));
        let err = pca_biplot(&x, true, "t", &names(2), &vec!["g".into(); 3]).unwrap_err();
        assert!(matches!(err, Error::DegenerateColumn(ref c) if c == "v2"));
    }

    #[test]
    fn axis_aligned_data() {
        let x = DMatrix::from_row_slice(4, 2, &[2.0, 0.0, -2.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
        let s = pca_biplot(&x, false, "t", &names(2), &vec!["g".into(); 4]).unwrap();
        assert!((s.variables.as_ref() - DMatrix::<f64>::identity(2, 2)).norm() < 1e-12);
        let z0: Vec<f64> = s.samples.column(0).iter().copied().collect();
        for (a, b) in z0.iter().zip([2.0, -2.0, 0.0, 0.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((s.explained_variance[0] - 0.8).abs() < 1e-12);
        assert!((s.explained_variance[1] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn rank_one_data_is_rejected() {
        let x = DMatrix::from_row_slice(4, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, -1.0, -2.0, -3.0, 0.5, 1.0, 1.5]);
        let err = pca_biplot(&x, false, "t", &names(3), &vec!["g".into(); 4]).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { rank: 1, .. }), "{err}");
    }

    #[test]
    fn sign_convention_is_idempotent() {
        let x = DMatrix::from_row_slice(5, 3, &[
            0.3, -1.2, 2.0, 1.1, 0.4, -0.7, -0.5, 0.9, 0.1, 2.2, -0.3, 0.8, -1.0, 1.7, -0.4,
        ]);
        let s = pca_biplot(&x, true, "t", &names(3), &vec!["g".into(); 5]).unwrap();
        let mut z = s.samples.clone();
        let mut v = (*s.variables).clone();
        apply_sign_convention(&mut z, &mut v);
        assert_eq!(z, s.samples);
        assert_eq!(&v, s.variables.as_ref());
    }

    #[test]
    fn row_keys_count_within_group() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let groups: Vec<String> = ["a", "b", "a"].iter().map(|s| s.to_string()).collect();
        let s = pca_biplot(&x, false, "t", &names(2), &groups).unwrap();
        assert_eq!(
            s.row_keys(),
            vec![("a".into(), 0), ("b".into(), 0), ("a".into(), 1)]
        );
    }
}
