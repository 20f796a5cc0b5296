//! Small dense linear algebra helpers used across the crate.
//!
//! Everything here is a thin wrapper over nalgebra decompositions with the
//! numeric conventions fixed in one place: rank decisions use singular
//! values with a relative cutoff, matrix norms are spectral norms unless
//! stated otherwise.
//!
//! All SVDs are taken in the tall orientation (transposing wide inputs
//! first): the factorization of wide matrices can come back inconsistent
//! (orthogonal factors that do not reproduce the matrix), while the tall
//! path is accurate.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Numeric tolerances used by rank and stability decisions.
///
/// The defaults are the crate-wide convention; campaign configs may
/// override them.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Singular values below `rank_rel * sigma_max` count as zero.
    pub rank_rel: f64,
    /// Margin at the unit circle for the Schur stability test.
    pub stability_margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_rel: 1e-10,
            stability_margin: 1e-10,
        }
    }
}

/// Numerical rank and extreme singular values of a matrix.
#[derive(Debug, Clone, Copy)]
pub struct RankInfo {
    pub rank: usize,
    pub sigma_max: f64,
    pub sigma_min: f64,
}

/// Singular values of the tall orientation of a matrix.
fn tall_singular_values(m: &DMatrix<f64>) -> nalgebra::DVector<f64> {
    if m.nrows() >= m.ncols() {
        m.singular_values()
    } else {
        m.transpose().singular_values()
    }
}

/// Rank via singular values with a relative cutoff.
pub fn rank_info(m: &DMatrix<f64>, rel_tol: f64) -> RankInfo {
    if m.nrows() == 0 || m.ncols() == 0 {
        return RankInfo {
            rank: 0,
            sigma_max: 0.0,
            sigma_min: 0.0,
        };
    }
    let sv = tall_singular_values(m);
    let sigma_max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let sigma_min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let cutoff = rel_tol * sigma_max;
    let rank = sv.iter().filter(|&&s| s > cutoff).count();
    RankInfo {
        rank,
        sigma_max,
        sigma_min,
    }
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    tall_singular_values(m)
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max)
}

/// Spectral radius (largest eigenvalue modulus).
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    assert_eq!(
        m.nrows(),
        m.ncols(),
        "spectral radius needs a square matrix"
    );
    m.complex_eigenvalues()
        .iter()
        .map(|l| l.norm())
        .fold(0.0_f64, f64::max)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = nalgebra::linalg::SymmetricEigen::new(m.clone());
    sym.eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Largest eigenvalue of a symmetric matrix.
pub fn max_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = nalgebra::linalg::SymmetricEigen::new(m.clone());
    sym.eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Checks symmetry up to `tol` and positive definiteness of the smallest
/// eigenvalue.
pub fn is_symmetric_positive_definite(m: &DMatrix<f64>, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let asym = (m - m.transpose()).norm();
    if asym > tol * (1.0 + m.norm()) {
        return false;
    }
    min_symmetric_eigenvalue(&(0.5 * (m + m.transpose()))) > 0.0
}

/// Minimum-norm least-squares solution of `a * x = b` via the SVD
/// pseudo-inverse. Returns the solution together with the Frobenius norm of
/// the residual `a * x - b`.
pub fn min_norm_lstsq(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "lstsq: lhs has {} rows, rhs has {}",
            a.nrows(),
            b.nrows()
        )));
    }
    let x = if a.nrows() >= a.ncols() {
        let svd = a.clone().svd(true, true);
        let sigma_max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
        let eps = 1e-12 * sigma_max.max(f64::MIN_POSITIVE);
        svd.solve(b, eps)
            .map_err(|e| Error::IllConditioned(format!("SVD solve failed: {e}")))?
    } else {
        // pinv(A) = pinv(A')' with the factorization done tall
        let svd = a.transpose().svd(true, true);
        let sigma_max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
        let eps = 1e-12 * sigma_max.max(f64::MIN_POSITIVE);
        let pinv_tall = svd
            .pseudo_inverse(eps)
            .map_err(|e| Error::IllConditioned(format!("SVD pseudo-inverse failed: {e}")))?;
        pinv_tall.transpose() * b
    };
    let residual = (a * &x - b).norm();
    Ok((x, residual))
}

/// Vector variant of [`min_norm_lstsq`].
pub fn min_norm_lstsq_vec(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let bm = DMatrix::from_column_slice(b.len(), 1, b.as_slice());
    let (x, residual) = min_norm_lstsq(a, &bm)?;
    Ok((DVector::from_column_slice(x.as_slice()), residual))
}

/// Solves `(I - A) x = rhs` column by column through an LU factorization.
pub fn solve_i_minus_a(a: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n || rhs.nrows() != n {
        return Err(Error::DimensionMismatch(
            "solve_i_minus_a: A must be square and rhs row-compatible".into(),
        ));
    }
    let i_minus_a = DMatrix::identity(n, n) - a;
    i_minus_a
        .lu()
        .solve(rhs)
        .ok_or_else(|| Error::IllConditioned("I - A is numerically singular".into()))
}

/// Stacks two matrices with equal column counts vertically.
pub fn vstack(top: &DMatrix<f64>, bottom: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(
        top.ncols(),
        bottom.ncols(),
        "vstack requires equal column counts"
    );
    let mut out = DMatrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.view_mut((0, 0), (top.nrows(), top.ncols()))
        .copy_from(top);
    out.view_mut((top.nrows(), 0), (bottom.nrows(), bottom.ncols()))
        .copy_from(bottom);
    out
}
