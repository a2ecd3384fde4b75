//! Shared fixtures and independent oracles for the integration tests.
//!
//! Nothing here calls into the code paths it is used to check: PCA is
//! checked against an eigendecomposition of XᵀX, Procrustes fits against a
//! closed-form angle parameterization or an exhaustive angle grid, hulls
//! against an O(m³) edge test.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use biplot_motion::anim::Point;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, n: usize, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |_, _| rng.random_range(-3.0..3.0))
}

/// Random similarity transform: rotation (optionally mirrored), scale in
/// [0.2, 5], translation in [−10, 10]².
pub struct RandomSimilarity {
    pub theta: f64,
    pub reflect: bool,
    pub scale: f64,
    pub shift: [f64; 2],
}

impl RandomSimilarity {
    pub fn sample(rng: &mut impl Rng) -> Self {
        RandomSimilarity {
            theta: rng.random_range(0.0..TAU),
            reflect: rng.random_bool(0.5),
            scale: rng.random_range(0.2..5.0),
            shift: [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)],
        }
    }

    pub fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let (c, s) = (self.theta.cos(), self.theta.sin());
        DMatrix::from_fn(x.nrows(), 2, |i, j| {
            let (a, b) = (x[(i, 0)], if self.reflect { -x[(i, 1)] } else { x[(i, 1)] });
            let rotated = if j == 0 { a * c - b * s } else { a * s + b * c };
            self.scale * rotated + self.shift[j]
        })
    }
}

pub fn center(x: &DMatrix<f64>) -> DMatrix<f64> {
    let m = x.nrows() as f64;
    let means: Vec<f64> = (0..x.ncols()).map(|j| x.column(j).sum() / m).collect();
    DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] - means[j])
}

// ---------------------------------------------------------------------------
// PCA oracle: eigendecomposition of the cross-product matrix.
// ---------------------------------------------------------------------------

pub struct PcaOracle {
    pub x_std: DMatrix<f64>,
    pub scores: DMatrix<f64>,
    pub loadings: DMatrix<f64>,
    /// Eigenvalues of XᵀX (squared singular values), descending.
    pub eigenvalues: Vec<f64>,
}

pub fn pca_oracle(x: &DMatrix<f64>, scaled: bool) -> PcaOracle {
    let (n, p) = x.shape();
    let mut x_std = center(x);
    if scaled {
        for j in 0..p {
            let sd = (x_std.column(j).iter().map(|v| v * v).sum::<f64>() / (n - 1) as f64).sqrt();
            for i in 0..n {
                x_std[(i, j)] /= sd;
            }
        }
    }
    let eig = SymmetricEigen::new(x_std.transpose() * &x_std);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut loadings = DMatrix::zeros(p, 2);
    for k in 0..2 {
        let col = eig.eigenvectors.column(order[k]);
        // Largest |entry| positive; entries within a relative 1e-9 of the
        // largest are tied and the lowest index wins.
        let max = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let best = (0..p).find(|&j| col[j].abs() >= max * (1.0 - 1e-9)).unwrap();
        let sign = if col[best] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..p {
            loadings[(j, k)] = sign * col[j];
        }
    }
    let scores = &x_std * &loadings;
    PcaOracle {
        x_std,
        scores,
        loadings,
        eigenvalues: order.iter().map(|&k| eig.eigenvalues[k].max(0.0)).collect(),
    }
}

// ---------------------------------------------------------------------------
// 2-D orthogonal fits by angle.
// ---------------------------------------------------------------------------

/// Row-vector orthogonal matrix: rotation by θ, or rotation followed by a
/// mirror when `reflect`.
pub fn orthogonal(theta: f64, reflect: bool) -> [[f64; 2]; 2] {
    let (c, s) = (theta.cos(), theta.sin());
    if reflect {
        [[c, s], [s, -c]]
    } else {
        [[c, s], [-s, c]]
    }
}

pub fn times(x: &DMatrix<f64>, q: &[[f64; 2]; 2]) -> DMatrix<f64> {
    DMatrix::from_fn(x.nrows(), 2, |i, j| x[(i, 0)] * q[0][j] + x[(i, 1)] * q[1][j])
}

/// Best orthogonal Q (either determinant) maximizing tr((Y Q)ᵀ T), found by
/// the closed-form optimal angle of each family.
pub fn best_orthogonal(y: &DMatrix<f64>, t: &DMatrix<f64>) -> [[f64; 2]; 2] {
    let mut m = [[0.0; 2]; 2];
    for i in 0..y.nrows() {
        for a in 0..2 {
            for b in 0..2 {
                m[a][b] += y[(i, a)] * t[(i, b)];
            }
        }
    }
    // tr(Qᵀ M) for Q = [[c, s], [−s, c]] is c(M00 + M11) + s(M01 − M10);
    // for Q = [[c, s], [s, −c]] it is c(M00 − M11) + s(M01 + M10).
    let (rc, rs) = (m[0][0] + m[1][1], m[0][1] - m[1][0]);
    let (fc, fs) = (m[0][0] - m[1][1], m[0][1] + m[1][0]);
    if rc.hypot(rs) >= fc.hypot(fs) {
        orthogonal(rs.atan2(rc), false)
    } else {
        orthogonal(fs.atan2(fc), true)
    }
}

// ---------------------------------------------------------------------------
// GPA oracle: alternating least squares over angles and scale weights with
// random restarts.
// ---------------------------------------------------------------------------

fn leading_eigenvector(phi: &DMatrix<f64>, start: &[f64]) -> (f64, Vec<f64>) {
    let k = phi.nrows();
    // Shift so every eigenvalue is non-negative; |Φ_ij| ≤ 1.
    let shifted = phi + DMatrix::identity(k, k) * k as f64;
    let mut v = nalgebra::DVector::from_column_slice(start);
    v /= v.norm();
    for _ in 0..5000 {
        let mut w = &shifted * &v;
        w /= w.norm();
        let done = (&w - &v).norm() < 1e-15;
        v = w;
        if done {
            break;
        }
    }
    let lambda = (v.transpose() * phi * &v)[(0, 0)];
    (lambda, v.iter().copied().collect())
}

/// Minimum GPA residual sum of squares (reflections, isotropic scaling with
/// the total sum of squares preserved), best over `restarts` random starts.
///
/// With unit-norm centered configurations Yᵢ and weights φ (|φ| = 1) the
/// residual is S·(1 − φᵀΦφ/K), Φᵢⱼ = ⟨Yᵢ, Yⱼ⟩, so the oracle maximizes
/// φᵀΦφ alternately over each Yᵢ's orientation and over φ.
pub fn gpa_oracle_rss(configs: &[DMatrix<f64>], restarts: usize, rng: &mut impl Rng) -> f64 {
    let k = configs.len();
    let centered: Vec<DMatrix<f64>> = configs.iter().map(center).collect();
    let total: f64 = centered.iter().map(|c| c.norm_squared()).sum();
    let unit: Vec<DMatrix<f64>> = centered.iter().map(|c| c / c.norm()).collect();

    let mut best = f64::INFINITY;
    for _ in 0..restarts {
        let mut ys: Vec<DMatrix<f64>> = unit
            .iter()
            .map(|u| times(u, &orthogonal(rng.random_range(0.0..TAU), rng.random_bool(0.5))))
            .collect();
        let mut phi_vec = vec![1.0; k];
        let mut last = f64::NEG_INFINITY;
        for _ in 0..20_000 {
            let phi = DMatrix::from_fn(k, k, |i, j| ys[i].dot(&ys[j]));
            let (lambda, v) = leading_eigenvector(&phi, &phi_vec);
            phi_vec = v;
            for i in 0..k {
                let mut target = DMatrix::zeros(ys[i].nrows(), 2);
                for j in 0..k {
                    if j != i {
                        target += &ys[j] * phi_vec[j];
                    }
                }
                if phi_vec[i] < 0.0 {
                    target = -target;
                }
                let q = best_orthogonal(&ys[i], &target);
                ys[i] = times(&ys[i], &q);
            }
            if lambda - last < 1e-15 {
                break;
            }
            last = lambda;
        }
        let phi = DMatrix::from_fn(k, k, |i, j| ys[i].dot(&ys[j]));
        let (lambda, _) = leading_eigenvector(&phi, &phi_vec);
        best = best.min(total * (1.0 - lambda / k as f64));
    }
    best
}

// ---------------------------------------------------------------------------
// Evaluation oracle: exhaustive angle grid.
// ---------------------------------------------------------------------------

pub struct GridMeasures {
    pub ps: f64,
    pub cc: f64,
    pub amb: f64,
    pub mb: f64,
    pub rmsb: f64,
}

/// Aligns `config` to `target` by trying every angle on a grid of the given
/// step, both determinants, with the least-squares scale for each, then
/// computes the five measures from their definitions.
pub fn grid_measures(config: &DMatrix<f64>, target: &DMatrix<f64>, step: f64) -> GridMeasures {
    let xc = center(config);
    let tc = center(target);
    let m = target.nrows() as f64;
    let t_mean = [target.column(0).sum() / m, target.column(1).sum() / m];
    let ss_x = xc.norm_squared();

    let steps = (TAU / step).ceil() as usize;
    let mut best = (f64::INFINITY, 0.0, false, 0.0);
    for reflect in [false, true] {
        for k in 0..steps {
            let theta = k as f64 * step;
            let q = orthogonal(theta, reflect);
            let mut inner = 0.0;
            for i in 0..xc.nrows() {
                let y0 = xc[(i, 0)] * q[0][0] + xc[(i, 1)] * q[1][0];
                let y1 = xc[(i, 0)] * q[0][1] + xc[(i, 1)] * q[1][1];
                inner += y0 * tc[(i, 0)] + y1 * tc[(i, 1)];
            }
            let s = (inner / ss_x).max(0.0);
            let resid = s * s * ss_x - 2.0 * s * inner + tc.norm_squared();
            if resid < best.0 {
                best = (resid, theta, reflect, s);
            }
        }
    }
    let (_, theta, reflect, s) = best;
    let rotated = times(&xc, &orthogonal(theta, reflect));
    let aligned = DMatrix::from_fn(xc.nrows(), 2, |i, j| s * rotated[(i, j)] + t_mean[j]);
    let d: Vec<f64> = (0..xc.nrows())
        .flat_map(|i| [aligned[(i, 0)] - target[(i, 0)], aligned[(i, 1)] - target[(i, 1)]])
        .collect();
    let count = d.len() as f64;
    let ac = center(&aligned);
    GridMeasures {
        ps: d.iter().map(|v| v * v).sum::<f64>() / tc.norm_squared(),
        cc: ac.dot(&tc) / (ac.norm() * tc.norm()),
        amb: d.iter().map(|v| v.abs()).sum::<f64>() / count,
        mb: d.iter().sum::<f64>() / count,
        rmsb: (d.iter().map(|v| v * v).sum::<f64>() / count).sqrt(),
    }
}

// ---------------------------------------------------------------------------
// Hull oracle.
// ---------------------------------------------------------------------------

fn cross(o: &Point, a: &Point, b: &Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Vertices of the convex hull by testing every ordered pair as a candidate
/// counter-clockwise edge. Collinear boundary points are not vertices.
/// Exact for inputs whose cross products are exactly representable.
pub fn brute_force_hull(points: &[Point]) -> BTreeSet<(u64, u64)> {
    let mut out = BTreeSet::new();
    let n = points.len();
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (&points[i], &points[j]);
            if a == b {
                continue;
            }
            let is_edge = points.iter().all(|p| {
                let c = cross(a, b, p);
                if c > 0.0 {
                    return true;
                }
                if c < 0.0 {
                    return false;
                }
                // Collinear: must lie on the closed segment a–b.
                let t = (p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1]);
                let len = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
                (0.0..=len).contains(&t)
            });
            if is_edge {
                out.insert(key(a));
                out.insert(key(b));
            }
        }
    }
    out
}

pub fn key(p: &Point) -> (u64, u64) {
    (p[0].to_bits(), p[1].to_bits())
}

/// Even-odd point-in-polygon, with points on the boundary counted inside.
pub fn inside_or_on(poly: &[Point], p: &Point) -> bool {
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (&poly[i], &poly[(i + 1) % n]);
        if cross(a, b, p).abs() <= 1e-9 * (1.0 + p[0].abs() + p[1].abs()) {
            let t = (p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1]);
            let len = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
            if t >= -1e-12 && t <= len + 1e-12 {
                return true;
            }
        }
    }
    poly.iter().enumerate().all(|(i, a)| cross(a, &poly[(i + 1) % n], p) >= -1e-9)
}
