//! Zero-mean Gaussian states of `n` bosonic modes at the covariance level.
//!
//! Operators are ordered as `(a_1, ..., a_n, a_1^dag, ..., a_n^dag)`. With
//! `alpha_ij = <a_i a_j>` and `beta_ij = <a_i a_j^dag>` the symmetrically
//! ordered covariance is
//!
//! ```text
//! V = [[beta, alpha], [alpha*, beta^T]] - 1/2
//! ```
//!
//! and a Hermitian `V` describes a state iff `V + Sigma/2 >= 0`, where
//! `Sigma = diag(+1, ..., +1, -1, ..., -1)` holds the canonical commutators.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matkit::{
    block, block2x2, c, cr, ensure_finite, hermitian_part, max_abs, min_hermitian_eigenvalue,
    real_diag, ComplexMatrix,
};

/// Absolute tolerance on the lowest eigenvalue of `V + Sigma/2`.
///
/// Pure states sit exactly on the boundary of the physical set.
pub const TOL_PHYS: f64 = 1e-10;

/// Second moments `alpha = <a a>` (symmetric) and `beta = <a a^dag>` (Hermitian).
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceBlocks {
    pub alpha: ComplexMatrix,
    pub beta: ComplexMatrix,
}

impl CovarianceBlocks {
    pub fn modes(&self) -> usize {
        self.alpha.nrows()
    }
}

/// `Sigma = diag(+1 (n times), -1 (n times))`.
pub fn sigma(n: usize) -> ComplexMatrix {
    let mut d = vec![1.0; n];
    d.extend(std::iter::repeat_n(-1.0, n));
    real_diag(&d)
}

/// Hermitian `2n x 2n` symmetric-ordered covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceV {
    v: ComplexMatrix,
    n: usize,
}

/// Outcome of the physicality check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physicality {
    pub physical: bool,
    /// Lowest eigenvalue of `V + Sigma/2`.
    pub min_eig: f64,
}

impl CovarianceV {
    /// Wraps a `2n x 2n` Hermitian matrix. The block structure is checked;
    /// physicality is not (see [`CovarianceV::is_physical`]).
    pub fn new(v: ComplexMatrix) -> Result<Self> {
        let v = hermitian_part(&v, "covariance")?;
        let dim = v.nrows();
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::DimensionMismatch(format!(
                "covariance must be 2n x 2n with n >= 1, got {dim}x{dim}"
            )));
        }
        let n = dim / 2;
        let out = Self { v, n };
        // (alpha*, beta^T) blocks must mirror (beta, alpha).
        let tol = 1e-12 * max_abs(&out.v).max(1.0);
        let alpha = block(&out.v, n, 0, 1);
        let beta_shift = block(&out.v, n, 0, 0);
        let lower_left = block(&out.v, n, 1, 0);
        let lower_right = block(&out.v, n, 1, 1);
        let mismatch = crate::matkit::max_abs_diff(&lower_left, &alpha.map(|z| z.conj()))
            .max(crate::matkit::max_abs_diff(
                &lower_right,
                &beta_shift.transpose(),
            ))
            .max(crate::matkit::max_abs_diff(&alpha, &alpha.transpose()));
        if mismatch > tol {
            return Err(Error::DimensionMismatch(format!(
                "covariance violates the [[beta, alpha], [alpha*, beta^T]] block structure (residual {mismatch:.3e})"
            )));
        }
        Ok(out)
    }

    /// Builds `V` from `alpha` (symmetric) and `beta` (Hermitian).
    pub fn from_blocks(alpha: &ComplexMatrix, beta: &ComplexMatrix) -> Result<Self> {
        let n = alpha.nrows();
        if alpha.shape() != (n, n) || beta.shape() != (n, n) || n == 0 {
            return Err(Error::DimensionMismatch(format!(
                "alpha {:?} and beta {:?} must both be n x n with n >= 1",
                alpha.shape(),
                beta.shape()
            )));
        }
        ensure_finite(alpha, "alpha")?;
        let beta = hermitian_part(beta, "beta")?;
        let sym_resid = crate::matkit::max_abs_diff(alpha, &alpha.transpose());
        if sym_resid > 1e-12 * max_abs(alpha).max(1.0) {
            return Err(Error::DimensionMismatch(format!(
                "alpha is not symmetric (residual {sym_resid:.3e})"
            )));
        }
        let alpha = (alpha + alpha.transpose()) * cr(0.5);
        let half = ComplexMatrix::identity(2 * n, 2 * n) * cr(0.5);
        let v = block2x2(&beta, &alpha, &alpha.map(|z| z.conj()), &beta.transpose()) - half;
        Ok(Self { v, n })
    }

    /// Trusted constructor for matrices produced by the flow; only Hermitizes.
    pub(crate) fn from_raw(v: ComplexMatrix) -> Self {
        let n = v.nrows() / 2;
        let v = (&v + v.adjoint()) * cr(0.5);
        Self { v, n }
    }

    pub fn from_covariance_blocks(blocks: &CovarianceBlocks) -> Result<Self> {
        Self::from_blocks(&blocks.alpha, &blocks.beta)
    }

    /// Vacuum: `beta = I`, `alpha = 0`, so `V = I/2`.
    pub fn vacuum(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionMismatch("mode count must be >= 1".into()));
        }
        Ok(Self {
            v: ComplexMatrix::identity(2 * n, 2 * n) * cr(0.5),
            n,
        })
    }

    /// Separable pure two-mode state with single-mode parameters `omega1`,
    /// `omega2`: `alpha = diag(-Omega_i / (1 - |Omega_i|^2))`,
    /// `beta = diag(1 / (1 - |Omega_i|^2))`.
    pub fn pure_product(omega1: Complex64, omega2: Complex64) -> Result<Self> {
        let mut alpha = ComplexMatrix::zeros(2, 2);
        let mut beta = ComplexMatrix::zeros(2, 2);
        for (i, om) in [omega1, omega2].into_iter().enumerate() {
            let x = om.norm_sqr();
            if !(om.norm() < 1.0) {
                return Err(Error::NotNormalizable { norm: om.norm() });
            }
            alpha[(i, i)] = -om / (1.0 - x);
            beta[(i, i)] = cr(1.0 / (1.0 - x));
        }
        Self::from_blocks(&alpha, &beta)
    }

    /// General pure Gaussian state with wave function proportional to
    /// `exp(-1/2 zbar^T Omega zbar)` for complex symmetric `Omega` with
    /// operator norm below one: `alpha = -Omega (1 - Omega* Omega)^-1`,
    /// `beta = (1 - Omega Omega*)^-1`.
    pub fn pure(omega: &ComplexMatrix) -> Result<Self> {
        let n = omega.nrows();
        if omega.shape() != (n, n) || n == 0 {
            return Err(Error::DimensionMismatch(format!(
                "Omega must be square, got {:?}",
                omega.shape()
            )));
        }
        ensure_finite(omega, "Omega")?;
        let sym_resid = crate::matkit::max_abs_diff(omega, &omega.transpose());
        if sym_resid > 1e-12 * max_abs(omega).max(1.0) {
            return Err(Error::DimensionMismatch(format!(
                "Omega is not symmetric (residual {sym_resid:.3e})"
            )));
        }
        let norm = omega.clone().svd(false, false).singular_values.max();
        if !(norm < 1.0) {
            return Err(Error::NotNormalizable { norm });
        }
        let id = ComplexMatrix::identity(n, n);
        let conj = omega.map(|z| z.conj());
        let inv_left = (&id - &conj * omega)
            .try_inverse()
            .ok_or_else(|| Error::NumericalFailure("1 - Omega* Omega is singular".into()))?;
        let inv_right = (&id - omega * &conj)
            .try_inverse()
            .ok_or_else(|| Error::NumericalFailure("1 - Omega Omega* is singular".into()))?;
        let alpha = -(omega * inv_left);
        let alpha = (&alpha + alpha.transpose()) * cr(0.5);
        let beta = (&inv_right + inv_right.adjoint()) * cr(0.5);
        Self::from_blocks(&alpha, &beta)
    }

    /// Product of thermal states: `beta = diag(1 + nbar_i)`, `alpha = 0`.
    pub fn thermal(mean_occupations: &[f64]) -> Result<Self> {
        let n = mean_occupations.len();
        if n == 0 {
            return Err(Error::DimensionMismatch("mode count must be >= 1".into()));
        }
        for &nbar in mean_occupations {
            if !nbar.is_finite() || nbar < 0.0 {
                return Err(Error::NegativeOccupation(nbar));
            }
        }
        let mut d: Vec<f64> = mean_occupations.iter().map(|&x| 0.5 + x).collect();
        d.extend(mean_occupations.iter().map(|&x| 0.5 + x));
        Ok(Self {
            v: real_diag(&d),
            n,
        })
    }

    pub fn modes(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.v
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.v
    }

    /// `alpha = <a_i a_j>`.
    pub fn alpha(&self) -> ComplexMatrix {
        block(&self.v, self.n, 0, 1)
    }

    /// `beta = <a_i a_j^dag>`.
    pub fn beta(&self) -> ComplexMatrix {
        block(&self.v, self.n, 0, 0) + ComplexMatrix::identity(self.n, self.n) * cr(0.5)
    }

    pub fn blocks(&self) -> CovarianceBlocks {
        CovarianceBlocks {
            alpha: self.alpha(),
            beta: self.beta(),
        }
    }

    /// `V + Sigma/2`, the matrix of `<a_mu a_nu^dag>`.
    pub fn plus_half_sigma(&self) -> ComplexMatrix {
        &self.v + sigma(self.n) * cr(0.5)
    }

    /// Physical iff the lowest eigenvalue of `V + Sigma/2` is `>= -TOL_PHYS`.
    pub fn is_physical(&self) -> Result<Physicality> {
        self.is_physical_with(TOL_PHYS)
    }

    pub fn is_physical_with(&self, tol: f64) -> Result<Physicality> {
        let min_eig = min_hermitian_eigenvalue(&self.plus_half_sigma())?;
        Ok(Physicality {
            physical: min_eig >= -tol,
            min_eig,
        })
    }

    /// Time reversal: `alpha -> alpha*`, `beta -> beta^T`.
    pub fn full_transpose(&self) -> Self {
        Self {
            v: self.v.map(|z| z.conj()),
            n: self.n,
        }
    }
}

/// Mean occupation `1 / (e^{omega/T} - 1)` of a mode at frequency `omega`.
pub fn bose_occupation(omega: f64, temperature: f64) -> f64 {
    1.0 / ((omega / temperature).exp_m1())
}

/// Small helper for tests and config code: `alpha`, `beta` as scalars on the diagonal.
pub fn diag_blocks(alpha: &[Complex64], beta: &[f64]) -> CovarianceBlocks {
    let n = alpha.len();
    let mut a = ComplexMatrix::zeros(n, n);
    let mut b = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = alpha[i];
        b[(i, i)] = c(beta[i], 0.0);
    }
    CovarianceBlocks { alpha: a, beta: b }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkit::{max_abs_diff, null_space, NULL_SPACE_REL_TOL};
    use proptest::prelude::*;

    #[test]
    fn vacuum_is_half_identity() {
        let v1 = CovarianceV::vacuum(1).unwrap();
        assert_eq!(v1.matrix(), &(ComplexMatrix::identity(2, 2) * cr(0.5)));
        let v2 = CovarianceV::vacuum(2).unwrap();
        assert_eq!(v2.matrix(), &(ComplexMatrix::identity(4, 4) * cr(0.5)));
        let p = v2.is_physical().unwrap();
        assert!(p.physical);
        assert!(p.min_eig.abs() < 1e-15);
        assert!(CovarianceV::vacuum(0).is_err());
    }

    #[test]
    fn pure_product_values() {
        assert_eq!(
            CovarianceV::pure_product(cr(0.0), cr(0.0)).unwrap(),
            CovarianceV::vacuum(2).unwrap()
        );
        let s = CovarianceV::pure_product(cr(0.5), cr(0.0)).unwrap();
        assert!((s.alpha()[(0, 0)] - cr(-2.0 / 3.0)).norm() < 1e-15);
        assert!((s.beta()[(0, 0)] - cr(4.0 / 3.0)).norm() < 1e-15);
        assert!(s.alpha()[(1, 1)].norm() < 1e-15);
        assert!((s.beta()[(1, 1)] - cr(1.0)).norm() < 1e-15);
        assert!(matches!(
            CovarianceV::pure_product(cr(1.0), cr(0.0)),
            Err(Error::NotNormalizable { .. })
        ));
        assert!(matches!(
            CovarianceV::pure_product(cr(0.1), c(0.8, 0.7)),
            Err(Error::NotNormalizable { .. })
        ));
    }

    #[test]
    fn pure_general_agrees_with_product() {
        let mut om = ComplexMatrix::zeros(2, 2);
        om[(0, 0)] = c(0.3, -0.2);
        om[(1, 1)] = c(-0.1, 0.5);
        let a = CovarianceV::pure(&om).unwrap();
        let b = CovarianceV::pure_product(c(0.3, -0.2), c(-0.1, 0.5)).unwrap();
        assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-14);
    }

    #[test]
    fn thermal_values() {
        assert_eq!(
            CovarianceV::thermal(&[0.0, 0.0]).unwrap(),
            CovarianceV::vacuum(2).unwrap()
        );
        let t = CovarianceV::thermal(&[1.0, 1.0]).unwrap();
        assert_eq!(t.matrix(), &real_diag(&[1.5, 1.5, 1.5, 1.5]));
        assert_eq!(t.beta(), real_diag(&[2.0, 2.0]));
        assert!(t.is_physical().unwrap().physical);
        assert!(matches!(
            CovarianceV::thermal(&[1.0, -0.1]),
            Err(Error::NegativeOccupation(_))
        ));
    }

    #[test]
    fn unphysical_covariance_detected() {
        let v = CovarianceV::new(ComplexMatrix::identity(4, 4) * cr(-0.25)).unwrap();
        let p = v.is_physical().unwrap();
        assert!(!p.physical);
        assert!(p.min_eig < 0.0);
    }

    #[test]
    fn new_rejects_bad_shapes() {
        assert!(CovarianceV::new(ComplexMatrix::identity(3, 3)).is_err());
        let mut m = ComplexMatrix::identity(4, 4) * cr(0.5);
        m[(0, 1)] = cr(0.3);
        m[(1, 0)] = cr(0.3);
        // beta^T block not updated: inconsistent structure
        assert!(CovarianceV::new(m).is_err());
    }

    #[test]
    fn bose_occupation_matches_ratio() {
        // e^{omega/T} = eta/sigma  =>  nbar = sigma/(eta - sigma)
        let (eta, sig, omega) = (1.0, 0.5, 0.1);
        let temp = omega / (eta / sig as f64).ln();
        assert!((bose_occupation(omega, temp) - sig / (eta - sig)).abs() < 1e-12);
    }

    fn omega_strategy() -> impl Strategy<Value = Complex64> {
        (0.0_f64..0.98, 0.0_f64..std::f64::consts::TAU)
            .prop_map(|(r, phi)| Complex64::from_polar(r, phi))
    }

    proptest! {
        #[test]
        fn pure_product_is_physical_with_two_dim_null_space(o1 in omega_strategy(), o2 in omega_strategy()) {
            let v = CovarianceV::pure_product(o1, o2).unwrap();
            let p = v.is_physical().unwrap();
            prop_assert!(p.physical && p.min_eig >= -1e-10);
            let ns = null_space(&v.plus_half_sigma(), NULL_SPACE_REL_TOL).unwrap();
            prop_assert_eq!(ns.ncols(), 2);
        }

        #[test]
        fn full_transpose_preserves_physicality(o1 in omega_strategy(), o2 in omega_strategy(), n1 in 0.0_f64..3.0) {
            let v = CovarianceV::pure_product(o1, o2).unwrap();
            let t = v.full_transpose();
            prop_assert!(t.is_physical().unwrap().physical);
            prop_assert!(max_abs_diff(&t.alpha(), &v.alpha().map(|z| z.conj())) < 1e-15);
            prop_assert!(max_abs_diff(&t.beta(), &v.beta().transpose()) < 1e-15);
            let th = CovarianceV::thermal(&[n1, 0.5]).unwrap();
            prop_assert!(th.full_transpose().is_physical().unwrap().physical);
        }
    }
}
