//! Partial transposition, PPT verdicts and the entanglement-generation
//! witness for two-mode Gaussian states.
//!
//! Transposing mode 1 exchanges `a_1` and `a_1^dag`, i.e. conjugates `V` with
//! the permutation `T` swapping entries 1 and 3. A two-mode Gaussian state is
//! entangled iff `T V T + Sigma/2` has a negative eigenvalue.
//!
//! For a separable initial state and a unit vector `psi` in the null space of
//! `V~(0) + Sigma/2`, `Q(t) = <psi| V~(t) + Sigma/2 |psi>` starts at zero, so
//! `dQ/dt(0) < 0` certifies entanglement for small `t > 0`. With
//! `psi~ = T psi` and `Sigma~ = T Sigma T`,
//!
//! ```text
//! dQ/dt(0) = (lhs - rhs) / 2,   lhs = 2 <psi~|B|psi~>,   rhs = <psi~|A^dag Sigma~ + Sigma~ A|psi~>.
//! ```

use num_complex::Complex64;

use crate::collective::{two_mode_covariance, ModeMoments};
use crate::dynamics::{check_cp, drift_diffusion, BathSpec, CpPolicy, PROPAGATION_PHYS_TOL};
use crate::error::{Error, Result};
use crate::gaussian_state::{sigma, CovarianceV};
use crate::matkit::{
    cr, expectation, hermitian_eigensystem, hermitian_eigenvalues, null_space, ComplexMatrix,
    ComplexVector, NULL_SPACE_REL_TOL,
};

/// Below this magnitude the lowest PT eigenvalue is reported as boundary.
pub const TOL_ENT: f64 = 1e-10;

/// Maximum residual `|(V~(0) + Sigma/2) psi|` for a witness vector.
pub const NULL_VECTOR_TOL: f64 = 1e-8;

/// Permutation exchanging `a_1` and `a_1^dag`.
pub fn pt_matrix() -> ComplexMatrix {
    let mut t = ComplexMatrix::zeros(4, 4);
    t[(0, 2)] = cr(1.0);
    t[(2, 0)] = cr(1.0);
    t[(1, 1)] = cr(1.0);
    t[(3, 3)] = cr(1.0);
    t
}

fn require_two_modes(v: &CovarianceV) -> Result<()> {
    if v.modes() == 2 {
        Ok(())
    } else {
        Err(Error::WrongModeCount {
            expected: 2,
            got: v.modes(),
        })
    }
}

/// `V~ = T V T`.
pub fn partial_transpose(v: &CovarianceV) -> Result<CovarianceV> {
    require_two_modes(v)?;
    let t = pt_matrix();
    CovarianceV::new(&t * v.matrix() * &t)
}

/// `V~ + Sigma/2`.
pub fn pt_plus_half_sigma(v: &CovarianceV) -> Result<ComplexMatrix> {
    Ok(partial_transpose(v)?.plus_half_sigma())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PptVerdict {
    Entangled,
    Separable,
    /// `|min_eig| <= tol`: at the separability boundary within resolution.
    Boundary,
}

impl std::fmt::Display for PptVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PptVerdict::Entangled => "entangled",
            PptVerdict::Separable => "separable",
            PptVerdict::Boundary => "boundary",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PptReport {
    pub verdict: PptVerdict,
    /// Lowest eigenvalue of `V~ + Sigma/2`.
    pub min_eig: f64,
}

impl PptReport {
    pub fn entangled(&self) -> bool {
        self.verdict == PptVerdict::Entangled
    }
}

/// PPT test with the default tolerance [`TOL_ENT`].
pub fn ppt_test(v: &CovarianceV) -> Result<PptReport> {
    ppt_test_with(v, TOL_ENT)
}

pub fn ppt_test_with(v: &CovarianceV, tol: f64) -> Result<PptReport> {
    require_two_modes(v)?;
    let phys = v.is_physical_with(PROPAGATION_PHYS_TOL)?;
    if !phys.physical {
        return Err(Error::NonPhysicalInput {
            min_eig: phys.min_eig,
        });
    }
    Ok(classify(min_pt_eigenvalue(v)?, tol))
}

/// Lowest eigenvalue of `V~ + Sigma/2`, without any physicality check.
pub fn min_pt_eigenvalue(v: &CovarianceV) -> Result<f64> {
    Ok(hermitian_eigenvalues(&pt_plus_half_sigma(v)?)?[0])
}

pub fn classify(min_eig: f64, tol: f64) -> PptReport {
    let verdict = if min_eig < -tol {
        PptVerdict::Entangled
    } else if min_eig > tol {
        PptVerdict::Separable
    } else {
        PptVerdict::Boundary
    };
    PptReport { verdict, min_eig }
}

/// Orthonormal basis of the null space of `V~(0) + Sigma/2`.
pub fn initial_null_basis(v0: &CovarianceV) -> Result<ComplexMatrix> {
    require_two_modes(v0)?;
    let phys = v0.is_physical_with(PROPAGATION_PHYS_TOL)?;
    if !phys.physical {
        return Err(Error::NonPhysicalInput {
            min_eig: phys.min_eig,
        });
    }
    let basis = null_space(&pt_plus_half_sigma(v0)?, NULL_SPACE_REL_TOL)?;
    if basis.ncols() == 0 {
        return Err(Error::EmptyNullSpace);
    }
    Ok(basis)
}

/// The null vector whose `(a_1^dag, a_2^dag)` components are `(a, b)`; for a
/// pure product state this is `(a Omega_1*, b Omega_2, a, b)`. Needs a
/// two-dimensional null space whose last two components are independent.
pub fn witness_vector(v0: &CovarianceV, a: Complex64, b: Complex64) -> Result<ComplexVector> {
    let basis = initial_null_basis(v0)?;
    if basis.ncols() != 2 {
        return Err(Error::DomainError(format!(
            "witness vector from (a, b) needs a 2-dimensional null space, found {}",
            basis.ncols()
        )));
    }
    let tail = basis.view((2, 0), (2, 2)).into_owned();
    let coeffs = tail
        .lu()
        .solve(&ComplexVector::from_vec(vec![a, b]))
        .ok_or_else(|| {
            Error::DomainError("null space does not fix the (a, b) components".into())
        })?;
    Ok(&basis * coeffs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport {
    /// `dQ/dt` at `t = 0` for the normalized vector, from the covariance flow.
    pub q_derivative: f64,
    /// Normalized witness vector.
    pub psi: ComplexVector,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs < rhs`: entanglement is generated as soon as `t > 0`.
    pub verdict: bool,
}

struct WitnessParts {
    /// `T (A^dag V0 + V0 A + B) T`: derivative of `V~ + Sigma/2` at `t = 0`.
    derivative: ComplexMatrix,
    b: ComplexMatrix,
    /// `A^dag Sigma~ + Sigma~ A`.
    drift_sigma: ComplexMatrix,
}

fn witness_parts(v0: &CovarianceV, bath: &BathSpec, policy: CpPolicy) -> Result<WitnessParts> {
    require_two_modes(v0)?;
    if bath.modes() != 2 {
        return Err(Error::WrongModeCount {
            expected: 2,
            got: bath.modes(),
        });
    }
    let cp = check_cp(bath)?;
    if !cp.cp && policy == CpPolicy::Enforce {
        return Err(Error::NotCp { min_eig: cp.min_eig });
    }
    let flow = drift_diffusion(bath);
    let t = pt_matrix();
    let sigma_t = &t * sigma(2) * &t;
    let rhs = flow.rhs(v0.matrix());
    Ok(WitnessParts {
        derivative: &t * rhs * &t,
        drift_sigma: flow.a.adjoint() * &sigma_t + &sigma_t * &flow.a,
        b: flow.b,
    })
}

fn report(parts: &WitnessParts, psi: ComplexVector) -> WitnessReport {
    let t = pt_matrix();
    let psi_t = &t * &psi;
    let lhs = 2.0 * expectation(&parts.b, &psi_t);
    let rhs = expectation(&parts.drift_sigma, &psi_t);
    WitnessReport {
        q_derivative: expectation(&parts.derivative, &psi),
        psi,
        lhs,
        rhs,
        verdict: lhs < rhs,
    }
}

/// Evaluates the witness for a given vector (normalized internally).
pub fn generation_witness(
    v0: &CovarianceV,
    bath: &BathSpec,
    psi: &ComplexVector,
    policy: CpPolicy,
) -> Result<WitnessReport> {
    if psi.len() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "witness vector has {} components, expected 4",
            psi.len()
        )));
    }
    let norm = psi.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::DomainError("witness vector must be nonzero".into()));
    }
    let psi = psi / cr(norm);
    let m = pt_plus_half_sigma(v0)?;
    let residual = (&m * &psi).norm();
    if residual > NULL_VECTOR_TOL * m.norm().max(1.0) {
        return Err(Error::NotNullVector { residual });
    }
    let parts = witness_parts(v0, bath, policy)?;
    Ok(report(&parts, psi))
}

/// The witness vector minimizing `dQ/dt(0)` over the whole null space: the
/// lowest eigenvector of the derivative compressed onto the null space.
pub fn best_witness(v0: &CovarianceV, bath: &BathSpec, policy: CpPolicy) -> Result<WitnessReport> {
    let basis = initial_null_basis(v0)?;
    let parts = witness_parts(v0, bath, policy)?;
    let compressed = basis.adjoint() * &parts.derivative * &basis;
    let compressed = (&compressed + compressed.adjoint()) * cr(0.5);
    let eig = hermitian_eigensystem(&compressed)?;
    let psi = &basis * eig.vectors.column(0);
    let psi = &psi / cr(psi.norm());
    Ok(report(&parts, psi))
}

/// Generation condition for two vacua and `psi = (0, 0, 1, 1)/sqrt(2)`:
/// `sigma_11 + sigma_22 < Re(lambda_12 + lambda_21)`.
pub fn vacuum_condition(bath: &BathSpec) -> Result<bool> {
    if bath.modes() != 2 {
        return Err(Error::WrongModeCount {
            expected: 2,
            got: bath.modes(),
        });
    }
    let s = bath.sigma();
    let l = bath.lambda();
    Ok((s[(0, 0)] + s[(1, 1)]).re < (l[(0, 1)] + l[(1, 0)]).re)
}

/// Spectrum of `V~_inf + Sigma/2` for the collective-bath equilibrium, with
/// the closed form `beta_inf -+ sqrt(Delta_pm)/2 - 1/2`,
/// `Delta_pm = 1 + 2|alpha|^2 +- |alpha| sqrt(1 + |alpha|^2)`, evaluated for
/// comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticSpectrum {
    /// Ascending, from the numerical eigensolver. Authoritative.
    pub eigenvalues: [f64; 4],
    /// Ascending, from the closed form above.
    pub closed_form: [f64; 4],
    /// `max |eigenvalues - closed_form|`.
    pub closed_form_mismatch: f64,
}

impl AsymptoticSpectrum {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }
}

pub fn asymptotic_pt_eigenvalues(alpha_inf: Complex64, beta_inf: f64) -> Result<AsymptoticSpectrum> {
    if !(beta_inf >= 1.0) || !beta_inf.is_finite() || !alpha_inf.norm().is_finite() {
        return Err(Error::DomainError(format!(
            "asymptotic spectrum needs beta_inf >= 1 and finite alpha_inf (got {beta_inf}, {alpha_inf})"
        )));
    }
    let v = two_mode_covariance(
        ModeMoments {
            alpha: alpha_inf,
            beta: beta_inf,
        },
        beta_inf,
    )?;
    let numeric = hermitian_eigenvalues(&pt_plus_half_sigma(&v)?)?;
    let eigenvalues = [numeric[0], numeric[1], numeric[2], numeric[3]];

    let x = alpha_inf.norm();
    let root = (1.0 + x * x).sqrt();
    let mut closed_form = [0.0; 4];
    let mut k = 0;
    for outer in [1.0, -1.0] {
        for inner in [1.0, -1.0] {
            let delta: f64 = 1.0 + 2.0 * x * x + inner * x * root;
            closed_form[k] = beta_inf + outer * delta.max(0.0).sqrt() / 2.0 - 0.5;
            k += 1;
        }
    }
    closed_form.sort_by(f64::total_cmp);
    let closed_form_mismatch = eigenvalues
        .iter()
        .zip(closed_form.iter())
        .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));
    Ok(AsymptoticSpectrum {
        eigenvalues,
        closed_form,
        closed_form_mismatch,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdReport {
    /// `4 eta^2 sigma^2 [(eta - sigma)^2 + omega^2] / (eta^2 - sigma^2)^2`:
    /// the equilibrium is entangled iff `|lambda|^2` exceeds this.
    pub lambda_sq_min: f64,
    /// CP bound `eta sigma` on `|lambda|^2`.
    pub cp_max: f64,
    /// Some CP bath with these `(eta, sigma, omega)` has an entangled equilibrium.
    pub feasible: bool,
}

pub fn asymptotic_threshold(eta: f64, sigma: f64, omega: f64) -> Result<ThresholdReport> {
    if !(eta > sigma) {
        return Err(Error::DomainError(format!(
            "no equilibrium unless eta > sigma (got eta = {eta}, sigma = {sigma})"
        )));
    }
    if !(sigma > 0.0) || !(omega >= 0.0) || !eta.is_finite() || !omega.is_finite() {
        return Err(Error::DomainError(format!(
            "threshold needs sigma > 0 and omega >= 0 (got sigma = {sigma}, omega = {omega})"
        )));
    }
    let gap = eta - sigma;
    let lambda_sq_min = 4.0 * eta * eta * sigma * sigma * (gap * gap + omega * omega)
        / (eta * eta - sigma * sigma).powi(2);
    let cp_max = eta * sigma;
    Ok(ThresholdReport {
        lambda_sq_min,
        cp_max,
        feasible: lambda_sq_min < cp_max,
    })
}
