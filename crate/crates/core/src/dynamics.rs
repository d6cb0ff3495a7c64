//! Quasi-free Markovian dynamics at the covariance level.
//!
//! A bath is specified by the Hamiltonian matrix `omega` and the dissipative
//! coefficient matrices `eta`, `sigma`, `lambda`. The covariance obeys
//!
//! ```text
//! dV/dt = A^dag V + V A + B
//! ```
//!
//! with drift `A` and diffusion `B` assembled in [`drift_diffusion`]. The
//! dynamics is completely positive iff the Kossakowski matrix
//! `[[eta, lambda^dag], [lambda, sigma]]` is positive semidefinite.

use crate::error::{Error, Result};
use crate::gaussian_state::CovarianceV;
use crate::matkit::{
    block2x2, c, cr, eigenvalues, ensure_finite, expm, hermitian_eigenvalues, hermitian_part,
    solve_sylvester, ComplexMatrix,
};

/// Relative tolerance of the CP check: `min eig(C) >= -CP_REL_TOL * |C|`.
pub const CP_REL_TOL: f64 = 1e-12;

/// Drift eigenvalues must satisfy `Re < -STABILITY_TOL` for an equilibrium.
pub const STABILITY_TOL: f64 = 1e-12;

/// Tolerance used when propagation checks that its input is physical.
pub const PROPAGATION_PHYS_TOL: f64 = 1e-8;

/// Bath coefficients for `n` modes (rates in inverse time units).
#[derive(Debug, Clone, PartialEq)]
pub struct BathSpec {
    omega: ComplexMatrix,
    eta: ComplexMatrix,
    sigma: ComplexMatrix,
    lambda: ComplexMatrix,
}

impl BathSpec {
    /// Validates shapes and Hermiticity; `omega` must also be positive
    /// semidefinite.
    pub fn new(
        omega: ComplexMatrix,
        eta: ComplexMatrix,
        sigma: ComplexMatrix,
        lambda: ComplexMatrix,
    ) -> Result<Self> {
        let n = omega.nrows();
        for (name, m) in [
            ("omega", &omega),
            ("eta", &eta),
            ("sigma", &sigma),
            ("lambda", &lambda),
        ] {
            if m.shape() != (n, n) || n == 0 {
                return Err(Error::DimensionMismatch(format!(
                    "{name} is {}x{}, expected {n}x{n} with n >= 1",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        ensure_finite(&lambda, "lambda")?;
        let omega = hermitian_part(&omega, "omega")?;
        let eta = hermitian_part(&eta, "eta")?;
        let sigma = hermitian_part(&sigma, "sigma")?;
        let omega_min = hermitian_eigenvalues(&omega)?[0];
        let omega_scale = omega.norm();
        if omega_min < -1e-12 * omega_scale {
            return Err(Error::DomainError(format!(
                "omega must be positive semidefinite (min eigenvalue {omega_min:.3e})"
            )));
        }
        Ok(Self {
            omega,
            eta,
            sigma,
            lambda,
        })
    }

    /// All coefficients zero: the identity dynamics.
    pub fn zero(n: usize) -> Self {
        let z = ComplexMatrix::zeros(n, n);
        Self {
            omega: z.clone(),
            eta: z.clone(),
            sigma: z.clone(),
            lambda: z,
        }
    }

    pub fn modes(&self) -> usize {
        self.omega.nrows()
    }

    pub fn omega(&self) -> &ComplexMatrix {
        &self.omega
    }

    pub fn eta(&self) -> &ComplexMatrix {
        &self.eta
    }

    pub fn sigma(&self) -> &ComplexMatrix {
        &self.sigma
    }

    pub fn lambda(&self) -> &ComplexMatrix {
        &self.lambda
    }

    /// `(lambda + lambda^T) / 2`.
    pub fn lambda_symmetric(&self) -> ComplexMatrix {
        (&self.lambda + self.lambda.transpose()) * cr(0.5)
    }

    /// `(lambda - lambda^T) / 2`.
    pub fn lambda_antisymmetric(&self) -> ComplexMatrix {
        (&self.lambda - self.lambda.transpose()) * cr(0.5)
    }
}

/// `C = [[eta, lambda^dag], [lambda, sigma]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KossakowskiMatrix {
    pub c: ComplexMatrix,
}

pub fn kossakowski(bath: &BathSpec) -> Result<KossakowskiMatrix> {
    let eta = hermitian_part(&bath.eta, "eta")?;
    let sigma = hermitian_part(&bath.sigma, "sigma")?;
    Ok(KossakowskiMatrix {
        c: block2x2(&eta, &bath.lambda.adjoint(), &bath.lambda, &sigma),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpReport {
    pub cp: bool,
    /// Lowest eigenvalue of the Kossakowski matrix.
    pub min_eig: f64,
}

/// Complete positivity: `C >= 0` up to `CP_REL_TOL * |C|`.
pub fn check_cp(bath: &BathSpec) -> Result<CpReport> {
    let k = kossakowski(bath)?;
    let eigs = hermitian_eigenvalues(&k.c)?;
    let min_eig = eigs[0];
    let scale = eigs.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    Ok(CpReport {
        cp: min_eig >= -CP_REL_TOL * scale,
        min_eig,
    })
}

/// Drift `A` and diffusion `B` of the covariance flow.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftDiffusion {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
}

impl DriftDiffusion {
    /// `A^dag V + V A + B`.
    pub fn rhs(&self, v: &ComplexMatrix) -> ComplexMatrix {
        self.a.adjoint() * v + v * &self.a + &self.b
    }
}

/// ```text
/// A = 1/2 [[sigma* - eta + 2i omega, -2 lambda_A*], [-2 lambda_A, sigma - eta* - 2i omega*]]
/// B = 1/2 [[sigma* + eta,            -2 lambda_S*], [-2 lambda_S, sigma + eta*]]
/// ```
pub fn drift_diffusion(bath: &BathSpec) -> DriftDiffusion {
    let i2 = c(0.0, 2.0);
    let conj = |m: &ComplexMatrix| m.map(|z| z.conj());
    let ls = bath.lambda_symmetric();
    let la = bath.lambda_antisymmetric();
    let half = cr(0.5);
    let a = block2x2(
        &(conj(&bath.sigma) - &bath.eta + &bath.omega * i2),
        &(conj(&la) * cr(-2.0)),
        &(&la * cr(-2.0)),
        &(&bath.sigma - conj(&bath.eta) - conj(&bath.omega) * i2),
    ) * half;
    let b = block2x2(
        &(conj(&bath.sigma) + &bath.eta),
        &(conj(&ls) * cr(-2.0)),
        &(&ls * cr(-2.0)),
        &(&bath.sigma + conj(&bath.eta)),
    ) * half;
    let b = (&b + b.adjoint()) * half;
    DriftDiffusion { a, b }
}

/// Whether a non-CP bath may be evolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CpPolicy {
    #[default]
    Enforce,
    /// Evolve anyway; outputs are flagged as not certified.
    Allow,
}

/// Propagation over a fixed time `t`: `V(t) = Phi^dag V(0) Phi + W`.
#[derive(Debug, Clone)]
pub struct Transfer {
    /// `e^{tA}`.
    pub phi: ComplexMatrix,
    /// `int_0^t e^{s A^dag} B e^{s A} ds`.
    pub w: ComplexMatrix,
}

impl Transfer {
    pub fn apply(&self, v: &ComplexMatrix) -> ComplexMatrix {
        let out = self.phi.adjoint() * v * &self.phi + &self.w;
        (&out + out.adjoint()) * cr(0.5)
    }
}

/// Samples of a covariance trajectory.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CovarianceV>,
    /// False when the bath failed the CP check and was evolved under
    /// [`CpPolicy::Allow`].
    pub certified: bool,
}

/// Exact covariance propagator for a fixed bath.
#[derive(Debug, Clone)]
pub struct Propagator {
    modes: usize,
    flow: DriftDiffusion,
    cp: CpReport,
}

impl Propagator {
    pub fn new(bath: &BathSpec, policy: CpPolicy) -> Result<Self> {
        let cp = check_cp(bath)?;
        if !cp.cp && policy == CpPolicy::Enforce {
            return Err(Error::NotCp { min_eig: cp.min_eig });
        }
        Ok(Self {
            modes: bath.modes(),
            flow: drift_diffusion(bath),
            cp,
        })
    }

    pub fn flow(&self) -> &DriftDiffusion {
        &self.flow
    }

    pub fn cp_report(&self) -> CpReport {
        self.cp
    }

    pub fn certified(&self) -> bool {
        self.cp.cp
    }

    /// Transfer data for elapsed time `t >= 0`.
    ///
    /// A short step `h = t / 2^k` with `|h M| <= 1/2` is exponentiated through
    /// the augmented matrix `M = [[A^dag, B], [0, -A]]`, whose upper-right block
    /// `F` gives `W(h) = F e^{hA}`; the step is then doubled `k` times via
    /// `W(2h) = W(h) + Phi(h)^dag W(h) Phi(h)`. Doubling keeps every
    /// intermediate bounded, unlike exponentiating `tM` in one go.
    pub fn transfer(&self, t: f64) -> Result<Transfer> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::NegativeTime(t));
        }
        let dim = 2 * self.modes;
        if t == 0.0 {
            return Ok(Transfer {
                phi: ComplexMatrix::identity(dim, dim),
                w: ComplexMatrix::zeros(dim, dim),
            });
        }
        let a = &self.flow.a;
        let zero = ComplexMatrix::zeros(dim, dim);
        let aug = block2x2(&a.adjoint(), &self.flow.b, &zero, &(-a));
        let norm = aug.norm();
        let mut doublings = 0u32;
        while norm * t / 2f64.powi(doublings as i32) > 0.5 && doublings < 1000 {
            doublings += 1;
        }
        let h = t / 2f64.powi(doublings as i32);
        let e = expm(&(&aug * cr(h)))?;
        let mut phi = expm(&(a * cr(h)))?;
        let f = e.view((0, dim), (dim, dim)).into_owned();
        let mut w = f * &phi;
        w = (&w + w.adjoint()) * cr(0.5);
        for _ in 0..doublings {
            let next = &w + phi.adjoint() * &w * &phi;
            w = (&next + next.adjoint()) * cr(0.5);
            phi = &phi * &phi;
        }
        Ok(Transfer { phi, w })
    }

    fn check_input(&self, v0: &CovarianceV) -> Result<()> {
        if v0.modes() != self.modes {
            return Err(Error::WrongModeCount {
                expected: self.modes,
                got: v0.modes(),
            });
        }
        let p = v0.is_physical_with(PROPAGATION_PHYS_TOL)?;
        if !p.physical {
            return Err(Error::NonPhysicalInput { min_eig: p.min_eig });
        }
        Ok(())
    }

    /// `V(t) = e^{tA^dag} V0 e^{tA} + int_0^t e^{sA^dag} B e^{sA} ds`.
    pub fn propagate(&self, v0: &CovarianceV, t: f64) -> Result<CovarianceV> {
        self.check_input(v0)?;
        if t == 0.0 {
            return Ok(v0.clone());
        }
        let tr = self.transfer(t)?;
        Ok(CovarianceV::from_raw(tr.apply(v0.matrix())))
    }

    /// Samples at `0, dt, 2dt, ...` up to `t_max` (with `t_max` itself appended
    /// if it is not a multiple of `dt`), each obtained from the previous one.
    pub fn trajectory(&self, v0: &CovarianceV, t_max: f64, dt: f64) -> Result<Trajectory> {
        self.check_input(v0)?;
        if !(t_max >= 0.0) || !t_max.is_finite() {
            return Err(Error::NegativeTime(t_max));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::DomainError(format!("time step must be positive, got {dt}")));
        }
        let full_steps = (t_max / dt * (1.0 + 1e-12)).floor() as usize;
        let step = self.transfer(dt)?;
        let mut times = Vec::with_capacity(full_steps + 2);
        let mut states = Vec::with_capacity(full_steps + 2);
        times.push(0.0);
        states.push(v0.clone());
        let mut current = v0.matrix().clone();
        for k in 1..=full_steps {
            current = step.apply(&current);
            times.push(k as f64 * dt);
            states.push(CovarianceV::from_raw(current.clone()));
        }
        let reached = full_steps as f64 * dt;
        if t_max - reached > 1e-12 * t_max.max(1.0) {
            let last = self.transfer(t_max - reached)?;
            current = last.apply(&current);
            times.push(t_max);
            states.push(CovarianceV::from_raw(current));
        }
        Ok(Trajectory {
            times,
            states,
            certified: self.certified(),
        })
    }

    /// Unique stationary covariance `A^dag V + V A + B = 0`.
    pub fn steady_state(&self) -> Result<CovarianceV> {
        let max_re = eigenvalues(&self.flow.a)?
            .iter()
            .fold(f64::NEG_INFINITY, |acc, z| acc.max(z.re));
        if !(max_re < -STABILITY_TOL) {
            return Err(Error::Unstable { max_re });
        }
        let v = solve_sylvester(&self.flow.a.adjoint(), &self.flow.a, &self.flow.b)?;
        Ok(CovarianceV::from_raw(v))
    }
}

/// Exact propagation of `v0` for time `t` under a CP bath.
pub fn propagate_exact(v0: &CovarianceV, bath: &BathSpec, t: f64) -> Result<CovarianceV> {
    Propagator::new(bath, CpPolicy::Enforce)?.propagate(v0, t)
}

/// Stepped trajectory under a CP bath.
pub fn propagate_steps(
    v0: &CovarianceV,
    bath: &BathSpec,
    t_max: f64,
    dt: f64,
) -> Result<Trajectory> {
    Propagator::new(bath, CpPolicy::Enforce)?.trajectory(v0, t_max, dt)
}

/// Equilibrium covariance of a CP bath with strictly stable drift.
pub fn steady_state(bath: &BathSpec) -> Result<CovarianceV> {
    Propagator::new(bath, CpPolicy::Enforce)?.steady_state()
}
