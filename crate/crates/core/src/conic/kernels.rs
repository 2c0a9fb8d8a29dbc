//! Shared symmetric-matrix kernels: symmetric vectorization, Cholesky
//! factorization with a positive-definiteness flag, and extreme eigenvalues.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance for symmetry checks.
pub const SYMMETRY_TOL: f64 = 1e-12;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Checks that `m` is square and symmetric within `SYMMETRY_TOL` relative to
/// its largest entry.
pub fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "expected square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.amax().max(1.0);
    let mut worst = 0.0f64;
    for j in 0..m.ncols() {
        for i in (j + 1)..m.nrows() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if worst > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric {
            asymmetry: worst,
            tolerance: SYMMETRY_TOL * scale,
        });
    }
    Ok(())
}

/// Length of the symmetric vectorization of a `side x side` matrix.
pub const fn svec_len(side: usize) -> usize {
    side * (side + 1) / 2
}

/// Inverse of [`svec_len`]; `None` if `len` is not triangular.
pub fn side_from_svec_len(len: usize) -> Option<usize> {
    let side = ((((8 * len + 1) as f64).sqrt() - 1.0) / 2.0).round() as usize;
    (svec_len(side) == len).then_some(side)
}

/// Symmetric vectorization: stacks the lower triangle column by column with
/// off-diagonal entries scaled by sqrt(2), so that
/// `svec(A) . svec(B) = A \bullet B`.
pub fn svec(m: &DMatrix<f64>) -> Result<DVector<f64>> {
    check_symmetric(m)?;
    let d = m.nrows();
    let mut out = DVector::zeros(svec_len(d));
    let mut k = 0;
    for j in 0..d {
        out[k] = m[(j, j)];
        k += 1;
        for i in (j + 1)..d {
            out[k] = SQRT_2 * 0.5 * (m[(i, j)] + m[(j, i)]);
            k += 1;
        }
    }
    Ok(out)
}

/// Inverse of [`svec`].
pub fn smat(v: &DVector<f64>) -> Result<DMatrix<f64>> {
    let side = side_from_svec_len(v.len()).ok_or_else(|| {
        Error::Dimension(format!("svec length {} is not triangular", v.len()))
    })?;
    let mut m = DMatrix::zeros(side, side);
    let mut k = 0;
    for j in 0..side {
        m[(j, j)] = v[k];
        k += 1;
        for i in (j + 1)..side {
            let val = v[k] / SQRT_2;
            m[(i, j)] = val;
            m[(j, i)] = val;
            k += 1;
        }
    }
    Ok(m)
}

/// Position of entry `(i, j)`, `i >= j`, inside the svec layout for `side`.
pub fn svec_index(side: usize, i: usize, j: usize) -> usize {
    debug_assert!(i >= j && i < side);
    // column j starts after sum_{k<j} (side - k) = j(2*side - j + 1)/2 entries
    j * (2 * side - j + 1) / 2 + (i - j)
}

/// Cholesky factorization of a symmetric positive definite matrix.
///
/// Returns `Ok(Some(L))` with `L` lower triangular and `L L^T = M`, or
/// `Ok(None)` when a pivot falls below `1e-12 * max(diag)`, i.e. the matrix is
/// not positive definite within the pivot tolerance.
pub fn factor_spd(m: &DMatrix<f64>) -> Result<Option<DMatrix<f64>>> {
    check_symmetric(m)?;
    let d = m.nrows();
    let max_diag = (0..d).map(|i| m[(i, i)]).fold(0.0f64, f64::max);
    let pivot_tol = 1e-12 * max_diag;
    let mut l = DMatrix::zeros(d, d);
    for j in 0..d {
        let mut pivot = m[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if pivot <= pivot_tol || !pivot.is_finite() {
            return Ok(None);
        }
        let ljj = pivot.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..d {
            let mut acc = m[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = acc / ljj;
        }
    }
    Ok(Some(l))
}

/// Solves `L L^T x = rhs` given the lower factor from [`factor_spd`].
pub fn solve_with_factor(l: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    let d = l.nrows();
    let mut x = rhs.clone();
    for i in 0..d {
        for k in 0..i {
            x[i] -= l[(i, k)] * x[k];
        }
        x[i] /= l[(i, i)];
    }
    for i in (0..d).rev() {
        for k in (i + 1)..d {
            x[i] -= l[(k, i)] * x[k];
        }
        x[i] /= l[(i, i)];
    }
    x
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    check_symmetric(m)?;
    if m.nrows() == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    let eig = m.clone().symmetric_eigenvalues();
    Ok(eig.min())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn mat(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, cols, data)
    }

    #[test]
    fn svec_identity_2x2() {
        let v = svec(&DMatrix::identity(2, 2)).unwrap();
        assert_eq!(v.as_slice(), &[1.0, 0.0, 1.0]);
    }

    #[test]
    fn svec_offdiag_scales_by_sqrt2() {
        let v = svec(&mat(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        assert_relative_eq!(v[1], SQRT_2, max_relative = 1e-15);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[2], 0.0);
    }

    #[test]
    fn smat_inverts_svec() {
        let m = smat(&DVector::from_vec(vec![1.0, 0.0, 1.0])).unwrap();
        assert_eq!(m, DMatrix::identity(2, 2));
        let m = smat(&DVector::from_vec(vec![0.0, SQRT_2, 0.0])).unwrap();
        assert_relative_eq!(m[(0, 1)], 1.0, max_relative = 1e-15);
    }

    #[test]
    fn svec_rejects_asymmetric() {
        assert!(svec(&mat(2, 2, &[1.0, 2.0, 3.0, 4.0])).is_err());
    }

    #[test]
    fn smat_rejects_non_triangular_length() {
        assert!(smat(&DVector::from_vec(vec![1.0, 2.0])).is_err());
    }

    #[test]
    fn svec_index_matches_layout() {
        let d = 4;
        let mut m = DMatrix::zeros(d, d);
        let mut label = 1.0;
        for j in 0..d {
            for i in j..d {
                m[(i, j)] = label;
                m[(j, i)] = label;
                label += 1.0;
            }
        }
        let v = svec(&m).unwrap();
        let mut label = 1.0;
        for j in 0..d {
            for i in j..d {
                let expected = if i == j { label } else { SQRT_2 * label };
                assert_relative_eq!(v[svec_index(d, i, j)], expected, max_relative = 1e-15);
                label += 1.0;
            }
        }
    }

    #[test]
    fn factor_spd_identity() {
        let l = factor_spd(&DMatrix::identity(3, 3)).unwrap().unwrap();
        assert_eq!(l, DMatrix::identity(3, 3));
    }

    #[test]
    fn factor_spd_hand_example() {
        let l = factor_spd(&mat(2, 2, &[4.0, 2.0, 2.0, 5.0])).unwrap().unwrap();
        let expect = mat(2, 2, &[2.0, 0.0, 1.0, 2.0]);
        assert_relative_eq!(l, expect, max_relative = 1e-14);
    }

    #[test]
    fn factor_spd_flags_indefinite() {
        // eigenvalues 5 and -1: componentwise bounds do not imply definiteness
        assert!(factor_spd(&mat(2, 2, &[2.0, 3.0, 3.0, 2.0])).unwrap().is_none());
    }

    #[test]
    fn min_eigenvalue_known_values() {
        assert_relative_eq!(min_eigenvalue(&DMatrix::identity(2, 2)).unwrap(), 1.0);
        assert_relative_eq!(
            min_eigenvalue(&mat(2, 2, &[2.0, 3.0, 3.0, 2.0])).unwrap(),
            -1.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn solve_with_factor_roundtrip() {
        let m = mat(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let l = factor_spd(&m).unwrap().unwrap();
        let rhs = DVector::from_vec(vec![1.0, -2.0, 3.0]);
        let x = solve_with_factor(&l, &rhs);
        assert_relative_eq!(&m * &x, rhs, epsilon = 1e-12);
    }

    fn random_symmetric(side: usize, seed: u64) -> DMatrix<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut m = DMatrix::zeros(side, side);
        for j in 0..side {
            for i in j..side {
                let v = rng.random_range(-2.0..2.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    #[test]
    fn svec_isometry_side_3() {
        for seed in 0..20 {
            let a = random_symmetric(3, seed);
            let b = random_symmetric(3, seed + 1000);
            let dot = svec(&a).unwrap().dot(&svec(&b).unwrap());
            let frob = (a.transpose() * &b).trace();
            assert_relative_eq!(dot, frob, epsilon = 1e-12 * a.norm() * b.norm());
        }
    }

    #[test]
    fn factor_cross_checks_min_eigenvalue() {
        // lambda_min >= 0 iff the shifted factorization succeeds
        for seed in 0..40 {
            let m = random_symmetric(4, seed);
            let lam = min_eigenvalue(&m).unwrap();
            let shift = 1e-12 * m.trace().abs();
            let shifted = &m + DMatrix::identity(4, 4) * shift;
            let pd = factor_spd(&shifted).unwrap().is_some();
            if lam > 1e-9 * m.norm() {
                assert!(pd, "seed {seed}: lambda_min {lam} but factorization failed");
            }
            if lam < -1e-9 * m.norm() {
                assert!(!pd, "seed {seed}: lambda_min {lam} but factorization succeeded");
            }
        }
    }

    proptest! {
        #[test]
        fn svec_smat_roundtrip(side in 1usize..8, seed in 0u64..500) {
            let m = random_symmetric(side, seed);
            let back = smat(&svec(&m).unwrap()).unwrap();
            let err = (&back - &m).amax();
            prop_assert!(err <= 1e-14 * m.amax().max(1.0));
        }

        #[test]
        fn svec_isometry_up_to_side_10(side in 1usize..11, seed in 0u64..200) {
            let a = random_symmetric(side, seed);
            let b = random_symmetric(side, seed ^ 0xdead_beef);
            let dot = svec(&a).unwrap().dot(&svec(&b).unwrap());
            let frob = (a.transpose() * &b).trace();
            prop_assert!((dot - frob).abs() <= 1e-12 * a.norm() * b.norm());
        }
    }
}
