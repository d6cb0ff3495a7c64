//! Dense complex linear algebra used by every other module.
//!
//! Matrices are plain `nalgebra::DMatrix<Complex64>`. The functions here add
//! the validation the physics layer relies on (squareness, Hermiticity,
//! finiteness) and the two solvers nalgebra does not ship: Sylvester
//! equations and Hermitian null spaces.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Relative Hermiticity tolerance: `max|m - m^dag| <= HERMITIAN_REL_TOL * max|m_ij|`.
pub const HERMITIAN_REL_TOL: f64 = 1e-12;

/// Default relative tolerance for [`null_space`].
pub const NULL_SPACE_REL_TOL: f64 = 1e-9;

const EIGEN_MAX_ITER: usize = 10_000;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Largest entry modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Largest entry modulus of `a - b`.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn ensure_finite(m: &ComplexMatrix, what: &'static str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { what })
    }
}

pub fn ensure_square(m: &ComplexMatrix) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

/// Maximum Hermiticity residual `max|m - m^dag|`.
pub fn hermitian_residual(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Checks Hermiticity within `HERMITIAN_REL_TOL * max|entry|` and returns the
/// exactly symmetrized matrix `(m + m^dag) / 2`.
pub fn hermitian_part(m: &ComplexMatrix, what: &'static str) -> Result<ComplexMatrix> {
    ensure_square(m)?;
    ensure_finite(m, what)?;
    let residual = hermitian_residual(m);
    let tolerance = HERMITIAN_REL_TOL * max_abs(m);
    if residual > tolerance {
        return Err(Error::NotHermitian {
            what,
            residual,
            tolerance,
        });
    }
    Ok((m + m.adjoint()) * cr(0.5))
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: ComplexMatrix,
}

pub fn hermitian_eigensystem(m: &ComplexMatrix) -> Result<Eigensystem> {
    let h = hermitian_part(m, "matrix")?;
    let n = h.nrows();
    if n == 0 {
        return Ok(Eigensystem {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::NumericalFailure("Hermitian eigensolver did not converge".into()))?;

    let mut order: Vec<usize> = (0..n).collect();
    // Ties are broken by index so identical inputs give identical outputs.
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .total_cmp(&eig.eigenvalues[b])
            .then(a.cmp(&b))
    });
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure(
            "non-finite eigenvalue from Hermitian eigensolver".into(),
        ));
    }
    Ok(Eigensystem { values, vectors })
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let h = hermitian_part(m, "matrix")?;
    if h.nrows() == 0 {
        return Ok(Vec::new());
    }
    let mut values: Vec<f64> = h
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect::<Vec<_>>();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure(
            "non-finite eigenvalue from Hermitian eigensolver".into(),
        ));
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

pub fn min_hermitian_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?.first().copied().unwrap_or(0.0))
}

/// Eigenvalues of a general square matrix (complex Schur form).
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    ensure_square(m)?;
    ensure_finite(m, "matrix")?;
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::NumericalFailure("Schur decomposition did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Matrix exponential by Padé scaling and squaring.
pub fn expm(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_square(m)?;
    ensure_finite(m, "matrix")?;
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    let e = m.exp();
    if e.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NumericalFailure("matrix exponential overflowed".into()));
    }
    Ok(e)
}

/// Solves `p X + X q = -r` for `X`.
///
/// Fails with [`Error::Resonant`] when some eigenvalue of `p` is (numerically)
/// the negative of an eigenvalue of `q`, in which case the solution is not
/// unique.
pub fn solve_sylvester(
    p: &ComplexMatrix,
    q: &ComplexMatrix,
    r: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    ensure_square(p)?;
    ensure_square(q)?;
    ensure_finite(p, "p")?;
    ensure_finite(q, "q")?;
    ensure_finite(r, "r")?;
    let (m, k) = (p.nrows(), q.nrows());
    if r.shape() != (m, k) {
        return Err(Error::DimensionMismatch(format!(
            "r is {}x{}, expected {m}x{k}",
            r.nrows(),
            r.ncols()
        )));
    }

    let scale = p.norm().max(q.norm());
    let q_eigs = eigenvalues(q)?;
    let gap = eigenvalues(p)?
        .iter()
        .flat_map(|lp| q_eigs.iter().map(move |lq| (lp + lq).norm()))
        .fold(f64::INFINITY, f64::min);
    if !(gap > 1e-12 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::Resonant { gap });
    }

    // Column-major vectorization: (I_k (x) p + q^T (x) I_m) vec(X) = -vec(r).
    let dim = m * k;
    let mut op = ComplexMatrix::zeros(dim, dim);
    for col in 0..k {
        for i in 0..m {
            for j in 0..m {
                op[(col * m + i, col * m + j)] += p[(i, j)];
            }
        }
        for other in 0..k {
            let coeff = q[(other, col)];
            if coeff != Complex64::new(0.0, 0.0) {
                for i in 0..m {
                    op[(col * m + i, other * m + i)] += coeff;
                }
            }
        }
    }
    let rhs = ComplexVector::from_iterator(dim, r.iter().map(|z| -z));
    let lu = op.clone().lu();
    let mut x = lu
        .solve(&rhs)
        .ok_or(Error::Resonant { gap })?;
    // One step of iterative refinement.
    let resid = &rhs - &op * &x;
    if let Some(dx) = lu.solve(&resid) {
        x += dx;
    }
    let sol = ComplexMatrix::from_column_slice(m, k, x.as_slice());

    let residual = (p * &sol + &sol * q + r).norm();
    if !residual.is_finite() || residual > 1e-10 * r.norm() {
        return Err(Error::NumericalFailure(format!(
            "Sylvester residual {residual:.3e} too large"
        )));
    }
    Ok(sol)
}

/// Orthonormal basis (as columns) of `{v : |m v| <= tol |m|}` for a Hermitian
/// positive semidefinite `m`. Returns a matrix with zero columns when the
/// null space is trivial.
pub fn null_space(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eigensystem(m)?;
    let n = m.nrows();
    let spectral = eig.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let keep: Vec<usize> = (0..n)
        .filter(|&k| eig.values[k].abs() <= tol * spectral)
        .collect();
    let mut basis = ComplexMatrix::zeros(n, keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        basis.set_column(dst, &eig.vectors.column(src));
    }
    Ok(basis)
}

/// `diag(values)` as a complex matrix.
pub fn real_diag(values: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        values.len(),
        values.iter().map(|&v| cr(v)),
    ))
}

/// `[[a, b], [c, d]]` from four equally sized square blocks.
pub fn block2x2(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    cc: &ComplexMatrix,
    d: &ComplexMatrix,
) -> ComplexMatrix {
    let n = a.nrows();
    let mut out = ComplexMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((0, n), (n, n)).copy_from(b);
    out.view_mut((n, 0), (n, n)).copy_from(cc);
    out.view_mut((n, n), (n, n)).copy_from(d);
    out
}

/// Extracts block `(bi, bj)` of size `n` from a `2n x 2n` matrix.
pub fn block(m: &ComplexMatrix, n: usize, bi: usize, bj: usize) -> ComplexMatrix {
    m.view((bi * n, bj * n), (n, n)).into_owned()
}

/// `<x| m |x>` (real part; exact for Hermitian `m`).
pub fn expectation(m: &ComplexMatrix, x: &ComplexVector) -> f64 {
    x.dotc(&(m * x)).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn from_rows(rows: &[&[Complex64]]) -> ComplexMatrix {
        let n = rows.len();
        let m = rows[0].len();
        ComplexMatrix::from_fn(n, m, |i, j| rows[i][j])
    }

    /// Taylor series with scaling and squaring, summed to convergence.
    /// Independent of the Padé route used by `expm`.
    fn expm_taylor(m: &ComplexMatrix) -> ComplexMatrix {
        let n = m.nrows();
        let norm = m.norm();
        let squarings = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as u32
        } else {
            0
        };
        let scaled = m * cr(0.5_f64.powi(squarings as i32));
        let mut term = ComplexMatrix::identity(n, n);
        let mut sum = term.clone();
        for k in 1..60 {
            term = &term * &scaled * cr(1.0 / k as f64);
            sum += &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        sum
    }

    fn spectral_norm(m: &ComplexMatrix) -> f64 {
        m.clone().svd(false, false).singular_values.max()
    }

    #[test]
    fn eigensystem_of_diagonal_is_sorted() {
        let eig = hermitian_eigensystem(&real_diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(eig.values.len(), 3);
        for (got, want) in eig.values.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        assert!((eig.vectors[(1, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = from_rows(&[&[cr(0.0), cr(1.0)], &[cr(1.0), cr(0.0)]]);
        let vals = hermitian_eigenvalues(&x).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigensystem_rejects_bad_input() {
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            hermitian_eigensystem(&rect),
            Err(Error::NotSquare { .. })
        ));
        let skew = from_rows(&[&[cr(0.0), cr(1.0)], &[cr(-1.0), cr(0.0)]]);
        assert!(matches!(
            hermitian_eigensystem(&skew),
            Err(Error::NotHermitian { .. })
        ));
        let nan = from_rows(&[&[cr(f64::NAN), cr(0.0)], &[cr(0.0), cr(0.0)]]);
        assert!(matches!(
            hermitian_eigenvalues(&nan),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn expm_trivial_cases() {
        let z = ComplexMatrix::zeros(3, 3);
        assert_eq!(expm(&z).unwrap(), ComplexMatrix::identity(3, 3));

        let d = real_diag(&[0.3, -1.7]);
        let e = expm(&d).unwrap();
        assert!((e[(0, 0)].re - 0.3_f64.exp()).abs() < 1e-14);
        assert!((e[(1, 1)].re - (-1.7_f64).exp()).abs() < 1e-14);
        assert!(e[(0, 1)].norm() < 1e-15);

        let nil = from_rows(&[&[cr(0.0), cr(1.0)], &[cr(0.0), cr(0.0)]]);
        let e = expm(&nil).unwrap();
        let want = from_rows(&[&[cr(1.0), cr(1.0)], &[cr(0.0), cr(1.0)]]);
        assert!(max_abs_diff(&e, &want) < 1e-15);

        assert!(matches!(
            expm(&ComplexMatrix::zeros(2, 1)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn expm_matches_taylor_oracle_up_to_norm_50() {
        // Skew-Hermitian plus a modest Hermitian part keeps e^m well scaled
        // even at norm 50, so relative error is meaningful.
        let mut seed = 0x2545F4914F6CDD1D_u64;
        let mut next = || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed as f64 / u64::MAX as f64) - 0.5
        };
        for &target in &[0.1, 1.0, 5.0, 20.0, 50.0] {
            let g = ComplexMatrix::from_fn(4, 4, |_, _| c(next(), next()));
            let anti = (&g - g.adjoint()) * cr(0.5);
            let herm = (&g + g.adjoint()) * cr(0.05);
            let mut m = anti + herm;
            let scale = target / spectral_norm(&m);
            m *= cr(scale);
            let got = expm(&m).unwrap();
            let want = expm_taylor(&m);
            let rel = spectral_norm(&(&got - &want)) / spectral_norm(&want);
            assert!(rel < 1e-12, "norm {target}: relative error {rel:e}");
        }
    }

    #[test]
    fn sylvester_scalar_like_case() {
        let p = -ComplexMatrix::identity(2, 2);
        let x = solve_sylvester(&p, &p, &ComplexMatrix::identity(2, 2)).unwrap();
        assert!(max_abs_diff(&x, &(ComplexMatrix::identity(2, 2) * cr(0.5))) < 1e-14);
    }

    #[test]
    fn sylvester_detects_resonance() {
        let p = real_diag(&[1.0, -3.0]);
        let q = real_diag(&[-1.0, -2.0]);
        let r = ComplexMatrix::identity(2, 2);
        assert!(matches!(
            solve_sylvester(&p, &q, &r),
            Err(Error::Resonant { .. })
        ));
    }

    #[test]
    fn null_space_examples() {
        let basis = null_space(&real_diag(&[1.0, 1.0, 0.0, 0.0]), NULL_SPACE_REL_TOL).unwrap();
        assert_eq!(basis.ncols(), 2);
        for k in 0..2 {
            let col = basis.column(k);
            assert!(col[0].norm() < 1e-14 && col[1].norm() < 1e-14);
        }
        let none = null_space(&ComplexMatrix::identity(3, 3), NULL_SPACE_REL_TOL).unwrap();
        assert_eq!(none.ncols(), 0);
    }

    fn hermitian_strategy(n: usize) -> impl Strategy<Value = ComplexMatrix> {
        prop::collection::vec(-2.0_f64..2.0, 2 * n * n).prop_map(move |v| {
            let g = ComplexMatrix::from_fn(n, n, |i, j| c(v[2 * (i * n + j)], v[2 * (i * n + j) + 1]));
            (&g + g.adjoint()) * cr(0.5)
        })
    }

    fn general_strategy(n: usize, bound: f64) -> impl Strategy<Value = ComplexMatrix> {
        prop::collection::vec(-bound..bound, 2 * n * n).prop_map(move |v| {
            ComplexMatrix::from_fn(n, n, |i, j| c(v[2 * (i * n + j)], v[2 * (i * n + j) + 1]))
        })
    }

    proptest! {
        #[test]
        fn eigensystem_reconstructs(m in hermitian_strategy(5)) {
            let eig = hermitian_eigensystem(&m).unwrap();
            let lam = real_diag(&eig.values);
            let recon = &eig.vectors * lam * eig.vectors.adjoint();
            let rel = (&recon - &m).norm() / m.norm().max(1e-300);
            prop_assert!(rel < 1e-10);
            let gram = eig.vectors.adjoint() * &eig.vectors;
            prop_assert!(max_abs_diff(&gram, &ComplexMatrix::identity(5, 5)) < 1e-12);
            for w in eig.values.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
            // m v_k = lambda_k v_k
            let tol = 1e-10 * max_abs(&m) * 5.0;
            for k in 0..5 {
                let v = eig.vectors.column(k).into_owned();
                let resid = (&m * &v - &v * cr(eig.values[k])).camax();
                prop_assert!(resid <= tol.max(1e-14));
            }
        }

        #[test]
        fn expm_inverse_identity(m in general_strategy(4, 2.0)) {
            let scale = 20.0_f64.min(m.norm()) / m.norm().max(1e-300);
            let m = &m * cr(scale);
            let prod = expm(&m).unwrap() * expm(&(-&m)).unwrap();
            prop_assert!(max_abs_diff(&prod, &ComplexMatrix::identity(4, 4)) < 1e-10 * prod.norm().max(1.0));
        }

        #[test]
        fn expm_commuting_sum(m in general_strategy(3, 1.0), s in -1.5_f64..1.5, t in -1.5_f64..1.5) {
            let lhs = expm(&(&m * cr(s))).unwrap() * expm(&(&m * cr(t))).unwrap();
            let rhs = expm(&(&m * cr(s + t))).unwrap();
            prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-10 * rhs.norm().max(1.0));
        }

        #[test]
        fn sylvester_residual(p in general_strategy(3, 1.0), q in general_strategy(2, 1.0), r in general_strategy(3, 1.0)) {
            // Shift to a stable pair so the operator is nonresonant.
            let p = p - ComplexMatrix::identity(3, 3) * cr(4.0);
            let q = q - ComplexMatrix::identity(2, 2) * cr(4.0);
            let r = r.columns(0, 2).into_owned();
            let x = solve_sylvester(&p, &q, &r).unwrap();
            let resid = (&p * &x + &x * &q + &r).norm();
            prop_assert!(resid <= 1e-10 * r.norm());
        }

        #[test]
        fn null_space_orthonormal(v in prop::collection::vec(-1.0_f64..1.0, 8), rank in 0usize..4) {
            // Random rank-deficient PSD matrix G G^dag with G 4 x rank.
            let g = ComplexMatrix::from_fn(4, rank, |i, j| c(v[(i + 4 * j) % 8] + 0.3 * j as f64, v[(3 * i + j) % 8]));
            let m = &g * g.adjoint();
            let basis = null_space(&m, NULL_SPACE_REL_TOL).unwrap();
            let gram = basis.adjoint() * &basis;
            prop_assert!(max_abs_diff(&gram, &ComplexMatrix::identity(basis.ncols(), basis.ncols())) < 1e-12);
            prop_assert!(basis.ncols() >= 4 - rank);
            if basis.ncols() > 0 {
                prop_assert!((&m * &basis).norm() <= 1e-8 * m.norm().max(1e-300) * 4.0);
            }
        }
    }
}
