//! Orthonormal frames, null spaces, the complex structure, and the spectral
//! Kähler-angle split of the horizontal space into `D1 ⊕ D2`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};

use crate::error::GeometryError;

/// Orthonormal columns in `R^m`; may be empty.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    basis: DMatrix<f64>,
}

impl Frame {
    pub fn empty(ambient_dim: usize) -> Frame {
        Frame {
            basis: DMatrix::zeros(ambient_dim, 0),
        }
    }

    pub fn identity(ambient_dim: usize) -> Frame {
        Frame {
            basis: DMatrix::identity(ambient_dim, ambient_dim),
        }
    }

    /// Wraps columns that are already orthonormal (checked to 1e-10).
    pub fn from_orthonormal(basis: DMatrix<f64>) -> Result<Frame, GeometryError> {
        let k = basis.ncols();
        let gram = basis.transpose() * &basis;
        let err = (gram - DMatrix::identity(k, k)).norm();
        if err > 1e-10 {
            return Err(GeometryError::Shape(format!(
                "columns are not orthonormal (Gram residual {err:.3e})"
            )));
        }
        Ok(Frame { basis })
    }

    /// Orthonormal basis of the column span; columns with relative singular
    /// value below `1e-10` are dropped.
    pub fn span_of(columns: &DMatrix<f64>) -> Frame {
        orthonormal_range(columns, 1e-10)
    }

    /// Orthonormal basis of the span of the given vectors.
    pub fn span_of_vectors(ambient_dim: usize, vectors: &[DVector<f64>]) -> Frame {
        if vectors.is_empty() {
            return Frame::empty(ambient_dim);
        }
        Frame::span_of(&DMatrix::from_columns(vectors))
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.dim() == 0
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn column(&self, i: usize) -> DVector<f64> {
        self.basis.column(i).into_owned()
    }

    pub fn columns(&self) -> impl Iterator<Item = DVector<f64>> + '_ {
        (0..self.dim()).map(|i| self.column(i))
    }

    /// Orthogonal projector `B·Bᵀ`.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// Same subspace, basis rotated by the orthogonal `k×k` matrix `q`.
    pub fn rotated(&self, q: &DMatrix<f64>) -> Frame {
        Frame {
            basis: &self.basis * q,
        }
    }
}

fn to_faer(a: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Thin SVD with columns sorted by descending singular value. faer does
/// the factorization: nalgebra's SVD has returned inconsistent factors on
/// exactly rank-deficient inputs that arise here (e.g. `ω` restricted to
/// a fiber).
fn sorted_svd(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>, DMatrix<f64>) {
    let svd = to_faer(a).thin_svd().expect("SVD converges");
    let (u, v) = (svd.U(), svd.V());
    let s: Vec<f64> = svd.S().column_vector().iter().copied().collect();
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let sv = order.iter().map(|&i| s[i]).collect();
    let u = DMatrix::from_fn(a.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let v = DMatrix::from_fn(a.ncols(), order.len(), |r, c| v[(r, order[c])]);
    (sv, u, v)
}

/// Singular values, descending.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut s = to_faer(a).singular_values().expect("SVD converges");
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

fn orthonormal_range(a: &DMatrix<f64>, tol_rel: f64) -> Frame {
    let m = a.nrows();
    if a.ncols() == 0 || m == 0 {
        return Frame::empty(m);
    }
    let (sv, u, _) = sorted_svd(a);
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax <= f64::MIN_POSITIVE {
        return Frame::empty(m);
    }
    let rank = sv.iter().take_while(|&&s| s > tol_rel * smax).count();
    Frame {
        basis: u.columns(0, rank).into_owned(),
    }
}

/// Null space of an `r×m` matrix and its numerical rank.
pub fn null_space(a: &DMatrix<f64>, tol_rel: f64) -> (Frame, usize) {
    let m = a.ncols();
    if m == 0 {
        return (Frame::empty(0), 0);
    }
    if a.nrows() == 0 {
        return (Frame::identity(m), 0);
    }
    // Pad to square so the SVD returns a full right basis.
    let padded = if a.nrows() < m {
        let mut p = DMatrix::zeros(m, m);
        p.view_mut((0, 0), (a.nrows(), m)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let (sv, _, v) = sorted_svd(&padded);
    let smax = sv[0];
    let rank = if smax <= f64::MIN_POSITIVE {
        0
    } else {
        sv.iter().take_while(|&&s| s > tol_rel * smax).count()
    };
    (
        Frame {
            basis: v.columns(rank, m - rank).into_owned(),
        },
        rank,
    )
}

/// Orthonormal basis of `ker(jac)`. Fails when `jac` loses row rank.
pub fn vertical_space(jac: &DMatrix<f64>, tol_rank: f64) -> Result<Frame, GeometryError> {
    let (frame, rank) = null_space(jac, tol_rank);
    if rank < jac.nrows() {
        return Err(GeometryError::RankDeficient {
            rank,
            expected: jac.nrows(),
        });
    }
    Ok(frame)
}

/// Orthogonal complement of `vertical` in `R^m`.
pub fn horizontal_space(vertical: &Frame) -> Frame {
    if vertical.is_empty() {
        return Frame::identity(vertical.ambient_dim());
    }
    // singular values of an orthonormal Bᵀ are exactly 1
    null_space(&vertical.basis().transpose(), 0.5).0
}

/// `‖(Jac·H)ᵀ(Jac·H) − I‖_F`.
pub fn submersion_residual(jac: &DMatrix<f64>, horizontal: &Frame) -> f64 {
    let jh = jac * horizontal.basis();
    let k = horizontal.dim();
    (jh.transpose() * jh - DMatrix::identity(k, k)).norm()
}

/// A constant orthogonal operator `J` with `J² = −I`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexStructure {
    j: DMatrix<f64>,
}

impl ComplexStructure {
    pub fn new(j: DMatrix<f64>) -> Result<ComplexStructure, GeometryError> {
        if !j.is_square() {
            return Err(GeometryError::InvalidComplexStructure(format!(
                "matrix is {}×{}",
                j.nrows(),
                j.ncols()
            )));
        }
        let m = j.nrows();
        let id = DMatrix::<f64>::identity(m, m);
        let orth = (j.transpose() * &j - &id).norm();
        if orth > 1e-10 {
            return Err(GeometryError::InvalidComplexStructure(format!(
                "JᵀJ − I has norm {orth:.3e}"
            )));
        }
        let sq = (&j * &j + &id).norm();
        if sq > 1e-10 {
            return Err(GeometryError::InvalidComplexStructure(format!(
                "J² + I has norm {sq:.3e}"
            )));
        }
        Ok(ComplexStructure { j })
    }

    /// `J e_{2i−1} = e_{2i}`, `J e_{2i} = −e_{2i−1}` (1-based).
    pub fn standard(m: usize) -> Result<ComplexStructure, GeometryError> {
        if !m.is_multiple_of(2) {
            return Err(GeometryError::InvalidComplexStructure(format!(
                "dimension {m} is odd"
            )));
        }
        let mut j = DMatrix::zeros(m, m);
        for i in (0..m).step_by(2) {
            j[(i + 1, i)] = 1.0;
            j[(i, i + 1)] = -1.0;
        }
        Ok(ComplexStructure { j })
    }

    /// Skips validation. Used for negative controls with a corrupted `J`.
    pub fn from_matrix_unchecked(j: DMatrix<f64>) -> ComplexStructure {
        ComplexStructure { j }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.j
    }

    pub fn dim(&self) -> usize {
        self.j.nrows()
    }

    /// Plain-text form: `m` lines of `m` reals, row-major.
    pub fn parse_text(text: &str) -> Result<ComplexStructure, GeometryError> {
        let rows: Vec<Vec<f64>> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.split_whitespace()
                    .map(|w| {
                        w.parse::<f64>().map_err(|_| {
                            GeometryError::InvalidComplexStructure(format!("bad number `{w}`"))
                        })
                    })
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        let m = rows.len();
        if m == 0 || rows.iter().any(|r| r.len() != m) {
            return Err(GeometryError::InvalidComplexStructure(
                "expected a square matrix, one row per line".into(),
            ));
        }
        ComplexStructure::new(DMatrix::from_fn(m, m, |i, k| rows[i][k]))
    }
}

/// Eigen-decomposition of `−(Π_H J Π_H)²` on the horizontal space.
#[derive(Clone, Debug)]
pub struct AngleSpectrum {
    /// Singular values of `Hᵀ J H`, descending, clamped to `[0, 1]`:
    /// cosines of the Kähler angles.
    pub cosines: Vec<f64>,
    /// `cosines²`, the eigenvalues of `MᵀM`.
    pub sigma_sq: Vec<f64>,
    /// Eigenvectors lifted to `R^m`, one column per eigenvalue.
    pub frame: Frame,
}

/// Spectrum of the compressed complex structure on the horizontal space.
///
/// With `M = HᵀJH` (skew), `−M² = MᵀM`; its eigenvectors are the right
/// singular vectors of `M`, taken from the SVD of `M` so that small cosines
/// keep full absolute precision.
pub fn kaehler_angle_spectrum(horizontal: &Frame, j: &ComplexStructure) -> AngleSpectrum {
    let k = horizontal.dim();
    let m = horizontal.ambient_dim();
    if k == 0 {
        return AngleSpectrum {
            cosines: Vec::new(),
            sigma_sq: Vec::new(),
            frame: Frame::empty(m),
        };
    }
    let h = horizontal.basis();
    let compressed = h.transpose() * j.matrix() * h;
    let (sv, _, v) = sorted_svd(&compressed);
    let cosines: Vec<f64> = sv.iter().map(|s| s.clamp(0.0, 1.0)).collect();
    AngleSpectrum {
        sigma_sq: cosines.iter().map(|c| c * c).collect(),
        cosines,
        frame: Frame { basis: h * v },
    }
}

/// Result of splitting the horizontal space into `D1 ⊕ D2`.
#[derive(Clone, Debug)]
pub struct SlantSplit {
    pub d1: Frame,
    pub d2: Frame,
    /// Common slant angle on `D2`; absent when `D2` is empty or carries
    /// more than one Kähler angle.
    pub theta: Option<f64>,
    pub multiple_angles: bool,
    /// Spread of `σ²` over the `D2` cluster.
    pub cluster_width: f64,
}

/// `D1` collects eigenvalues with `|σ² − 1| ≤ tol_cluster`; the rest form
/// `D2`, which must be a single cluster of width `≤ tol_cluster`. A cluster
/// with `σ² ≤ tol_cluster` reports `θ = π/2` exactly.
pub fn split_d1_d2(spec: &AngleSpectrum, tol_cluster: f64) -> SlantSplit {
    let m = spec.frame.ambient_dim();
    let (d1_idx, d2_idx): (Vec<usize>, Vec<usize>) =
        (0..spec.sigma_sq.len()).partition(|&i| (spec.sigma_sq[i] - 1.0).abs() <= tol_cluster);
    let pick = |idx: &[usize]| {
        if idx.is_empty() {
            Frame::empty(m)
        } else {
            Frame {
                basis: DMatrix::from_columns(
                    &idx.iter().map(|&i| spec.frame.basis.column(i)).collect::<Vec<_>>(),
                ),
            }
        }
    };
    let d1 = pick(&d1_idx);
    let d2 = pick(&d2_idx);
    if d2_idx.is_empty() {
        return SlantSplit {
            d1,
            d2,
            theta: None,
            multiple_angles: false,
            cluster_width: 0.0,
        };
    }
    let sq: Vec<f64> = d2_idx.iter().map(|&i| spec.sigma_sq[i]).collect();
    let lo = sq.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sq.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = hi - lo;
    if width > tol_cluster {
        return SlantSplit {
            d1,
            d2,
            theta: None,
            multiple_angles: true,
            cluster_width: width,
        };
    }
    let mean_sq = sq.iter().sum::<f64>() / sq.len() as f64;
    let theta = if mean_sq <= tol_cluster {
        FRAC_PI_2
    } else {
        let mean_cos = d2_idx.iter().map(|&i| spec.cosines[i]).sum::<f64>() / d2_idx.len() as f64;
        mean_cos.clamp(0.0, 1.0).acos()
    };
    SlantSplit {
        d1,
        d2,
        theta: Some(theta),
        multiple_angles: false,
        cluster_width: width,
    }
}

/// Cosines of the principal angles between two subspaces, descending.
pub fn principal_angles(a: &Frame, b: &Frame) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let prod = a.basis().transpose() * b.basis();
    singular_values(&prod).into_iter().map(|s| s.clamp(0.0, 1.0)).collect()
}

/// Largest principal-angle sine between equal-dimensional subspaces; 0 iff
/// they coincide. Dimension mismatch reports 1.
pub fn subspace_distance(a: &Frame, b: &Frame) -> f64 {
    if a.dim() != b.dim() {
        return 1.0;
    }
    if a.is_empty() {
        return 0.0;
    }
    // sines straight from the residual of b against a; going through the
    // cosines would cost half the digits near coincidence
    let resid = b.basis() - a.basis() * (a.basis().transpose() * b.basis());
    singular_values(&resid).first().copied().unwrap_or(0.0).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn e(m: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(m);
        v[i] = 1.0;
        v
    }

    fn rows(m: usize, rows: &[Vec<(usize, f64)>]) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(rows.len(), m);
        for (r, entries) in rows.iter().enumerate() {
            for &(c, v) in entries {
                a[(r, c)] = v;
            }
        }
        a
    }

    fn ex43_jacobian(alpha: f64) -> DMatrix<f64> {
        rows(
            6,
            &[
                vec![(0, 1.0)],
                vec![(2, alpha.sin()), (4, -alpha.cos())],
                vec![(5, 1.0)],
                vec![(1, 1.0)],
            ],
        )
    }

    fn ex44_jacobian() -> DMatrix<f64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        rows(8, &[vec![(3, 1.0)], vec![(2, 1.0)], vec![(4, s), (7, -s)], vec![(5, 1.0)]])
    }

    #[test]
    fn vertical_space_of_six_to_four_example() {
        let a = 0.7_f64;
        let v = vertical_space(&ex43_jacobian(a), 1e-8).unwrap();
        assert_eq!(v.dim(), 2);
        let expected = Frame::span_of_vectors(6, &[a.cos() * e(6, 2) + a.sin() * e(6, 4), e(6, 3)]);
        for c in principal_angles(&v, &expected) {
            assert_relative_eq!(c, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn vertical_space_of_identity_is_empty() {
        let v = vertical_space(&DMatrix::identity(2, 2), 1e-8).unwrap();
        assert!(v.is_empty());
        let h = horizontal_space(&v);
        assert_eq!(h.basis(), &DMatrix::<f64>::identity(2, 2));
    }

    #[test]
    fn radial_kernel_and_complement() {
        let jac = rows(4, &[vec![(0, 1.0)]]);
        let v = vertical_space(&jac, 1e-8).unwrap();
        assert_eq!(v.dim(), 3);
        assert!((jac * v.basis()).norm() < 1e-14);
        let h = horizontal_space(&v);
        assert_eq!(h.dim(), 1);
        assert_relative_eq!(h.column(0)[0].abs(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let jac = rows(3, &[vec![(0, 1.0)], vec![(0, 2.0)]]);
        assert!(matches!(
            vertical_space(&jac, 1e-8),
            Err(GeometryError::RankDeficient { rank: 1, expected: 2 })
        ));
    }

    #[test]
    fn horizontal_space_of_eight_to_four_example() {
        let v = vertical_space(&ex44_jacobian(), 1e-8).unwrap();
        let h = horizontal_space(&v);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expected = Frame::span_of_vectors(
            8,
            &[e(8, 2), e(8, 3), e(8, 5), s * (e(8, 4) - e(8, 7))],
        );
        assert_eq!(h.dim(), 4);
        assert!(subspace_distance(&h, &expected) < 1e-12);
    }

    #[test]
    fn submersion_residual_of_scaled_projection() {
        let jac = rows(2, &[vec![(0, 2.0)]]);
        let h = horizontal_space(&vertical_space(&jac, 1e-8).unwrap());
        assert_relative_eq!(submersion_residual(&jac, &h), 3.0, epsilon = 1e-14);
    }

    #[test]
    fn standard_structure_squares_to_minus_identity() {
        let j = ComplexStructure::standard(6).unwrap();
        let jm = j.matrix();
        assert_eq!(jm * e(6, 0), e(6, 1));
        assert_eq!(jm * e(6, 1), -e(6, 0));
        assert!(ComplexStructure::standard(5).is_err());
    }

    #[test]
    fn complex_structure_validation() {
        assert!(ComplexStructure::new(DMatrix::identity(2, 2)).is_err());
        let j = ComplexStructure::parse_text("0 -1\n1 0\n").unwrap();
        assert_eq!(j, ComplexStructure::standard(2).unwrap());
        assert!(ComplexStructure::parse_text("0 -1\n1\n").is_err());
        assert!(ComplexStructure::parse_text("0 x\n1 0\n").is_err());
    }

    #[test]
    fn whole_space_is_j_invariant() {
        let j = ComplexStructure::standard(4).unwrap();
        let spec = kaehler_angle_spectrum(&Frame::identity(4), &j);
        for s in &spec.sigma_sq {
            assert_relative_eq!(*s, 1.0, epsilon = 1e-14);
        }
        let split = split_d1_d2(&spec, 1e-6);
        assert_eq!(split.d1.dim(), 4);
        assert!(split.d2.is_empty());
        assert!(split.theta.is_none());
        assert!(!split.multiple_angles);
    }

    #[test]
    fn six_to_four_example_split() {
        let a = 0.7_f64;
        let j = ComplexStructure::standard(6).unwrap();
        let h = horizontal_space(&vertical_space(&ex43_jacobian(a), 1e-8).unwrap());
        let spec = kaehler_angle_spectrum(&h, &j);
        let c2 = a.cos().powi(2);
        let expected = [1.0, 1.0, c2, c2];
        for (s, x) in spec.sigma_sq.iter().zip(expected) {
            assert_relative_eq!(*s, x, epsilon = 1e-14);
        }
        let split = split_d1_d2(&spec, 1e-6);
        assert_eq!((split.d1.dim(), split.d2.dim()), (2, 2));
        assert_relative_eq!(split.theta.unwrap(), a, epsilon = 1e-12);
    }

    #[test]
    fn two_distinct_angles_are_flagged() {
        // span{e1, cos a e2 + sin a e3} ⊕ span{e5, cos b e6 + sin b e7} in R^8
        let (a, b) = (0.3_f64, 0.9_f64);
        let j = ComplexStructure::standard(8).unwrap();
        let h = Frame::span_of_vectors(
            8,
            &[e(8, 0), a.cos() * e(8, 1) + a.sin() * e(8, 2), e(8, 4), b.cos() * e(8, 5) + b.sin() * e(8, 6)],
        );
        let split = split_d1_d2(&kaehler_angle_spectrum(&h, &j), 1e-6);
        assert!(split.multiple_angles);
        assert!(split.theta.is_none());
        assert_eq!(split.d2.dim(), 4);
    }

    #[test]
    fn right_angle_cluster_snaps_to_half_pi() {
        let j = ComplexStructure::standard(4).unwrap();
        let h = Frame::span_of_vectors(4, &[e(4, 0), e(4, 2)]);
        let split = split_d1_d2(&kaehler_angle_spectrum(&h, &j), 1e-6);
        assert_eq!(split.theta, Some(FRAC_PI_2));
        assert!(split.d1.is_empty());
    }

    #[test]
    fn principal_angles_basic_cases() {
        let a = Frame::span_of_vectors(4, &[e(4, 0), e(4, 1)]);
        let b = Frame::span_of_vectors(4, &[e(4, 2), e(4, 3)]);
        for c in principal_angles(&a, &a) {
            assert_relative_eq!(c, 1.0, epsilon = 1e-15);
        }
        for c in principal_angles(&a, &b) {
            assert!(c.abs() < 1e-15);
        }
        assert!(principal_angles(&a, &Frame::empty(4)).is_empty());
    }

    #[test]
    fn span_of_drops_dependent_columns() {
        let f = Frame::span_of_vectors(3, &[e(3, 0), 2.0 * e(3, 0), e(3, 1)]);
        assert_eq!(f.dim(), 2);
    }

    #[test]
    fn range_of_exact_rank_one_input() {
        // ω on a fiber of |x| at a sampled point; every column is a multiple
        // of the radial direction
        let a = DMatrix::from_column_slice(
            4,
            3,
            &[
                -0.020171269727679797,
                -0.0005999473692599464,
                0.01755382412659734,
                0.011025660870693732,
                0.6772383202780662,
                0.02014287420168203,
                -0.5893591492478057,
                -0.3701799712577212,
                -0.16459737950721126,
                -0.0048955651357397816,
                0.1432390469502055,
                0.08996929351259729,
            ],
        );
        let r = Frame::span_of(&a);
        assert_eq!(r.dim(), 1);
        let resid = &a - r.projector() * &a;
        assert!(resid.norm() < 1e-14);
        let sv = singular_values(&a);
        assert_relative_eq!(sv[0], a.norm(), epsilon = 1e-14);
    }
}