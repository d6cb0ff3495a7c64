//! Two modes coupled to a bath through their symmetric combination only.
//!
//! With `J = [[1, 1], [1, 1]]` the bath has `eta_hat = eta J`,
//! `sigma_hat = sigma J`, `lambda_hat = lambda J`, and a Hamiltonian acting on
//! `A = (a_1 + a_2)/sqrt(2)` alone. The antisymmetric mode
//! `B = (a_1 - a_2)/sqrt(2)` is left untouched, so the dynamics reduces to a
//! single damped, squeezed oscillator with closed-form moments
//!
//! ```text
//! alpha(t) = e^{-2(eta - sigma + i omega) t} (alpha_0 - alpha_inf) + alpha_inf
//! beta(t)  = e^{-2(eta - sigma) t} (beta_0 - beta_inf) + beta_inf
//! alpha_inf = lambda* (sigma - eta + i omega) / ((eta - sigma)^2 + omega^2)
//! beta_inf  = eta / (eta - sigma)
//! ```

use num_complex::Complex64;

use crate::dynamics::BathSpec;
use crate::error::{Error, Result};
use crate::gaussian_state::CovarianceV;
use crate::matkit::{c, cr, ComplexMatrix};

/// Parameters of the collective bath. `omega` is the frequency of the
/// symmetric mode `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectiveBath {
    pub eta: f64,
    pub sigma: f64,
    pub omega: f64,
    pub lambda: Complex64,
}

/// Second moments of a single mode: `alpha = <A A>`, `beta = <A A^dag>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeMoments {
    pub alpha: Complex64,
    pub beta: f64,
}

impl CollectiveBath {
    pub fn new(eta: f64, sigma: f64, omega: f64, lambda: Complex64) -> Result<Self> {
        if !(eta >= 0.0 && sigma >= 0.0 && omega >= 0.0)
            || !eta.is_finite()
            || !sigma.is_finite()
            || !omega.is_finite()
            || !lambda.re.is_finite()
            || !lambda.im.is_finite()
        {
            return Err(Error::DomainError(format!(
                "collective bath needs finite eta, sigma, omega >= 0 (got {eta}, {sigma}, {omega})"
            )));
        }
        Ok(Self {
            eta,
            sigma,
            omega,
            lambda,
        })
    }

    /// Completely positive iff `|lambda|^2 <= eta sigma`.
    pub fn is_cp(&self) -> bool {
        self.lambda.norm_sqr() <= self.eta * self.sigma * (1.0 + 1e-12)
    }

    /// Two-mode bath. The Hamiltonian matrix is `(omega/2) J`, which makes
    /// `omega` the frequency of the symmetric mode.
    pub fn two_mode_bath(&self) -> BathSpec {
        let j = ComplexMatrix::from_element(2, 2, cr(1.0));
        BathSpec::new(
            &j * cr(self.omega / 2.0),
            &j * cr(self.eta),
            &j * cr(self.sigma),
            &j * self.lambda,
        )
        .expect("collective bath matrices are Hermitian by construction")
    }

    /// The equivalent one-mode bath acting on `A` alone.
    pub fn collective_mode_bath(&self) -> BathSpec {
        let one = |z: Complex64| ComplexMatrix::from_element(1, 1, z);
        BathSpec::new(
            one(cr(self.omega)),
            one(cr(2.0 * self.eta)),
            one(cr(2.0 * self.sigma)),
            one(2.0 * self.lambda),
        )
        .expect("scalar bath is Hermitian by construction")
    }

    /// Decay rate `2(eta - sigma)` of the symmetric-mode moments.
    pub fn relaxation_rate(&self) -> f64 {
        2.0 * (self.eta - self.sigma)
    }

    /// Complex rate `2(eta - sigma + i omega)` of `alpha`.
    pub fn alpha_rate(&self) -> Complex64 {
        c(2.0 * (self.eta - self.sigma), 2.0 * self.omega)
    }

    /// Equilibrium moments; an equilibrium exists only for `eta > sigma`.
    pub fn equilibrium(&self) -> Result<ModeMoments> {
        if !(self.eta > self.sigma) {
            return Err(Error::DomainError(format!(
                "no equilibrium: eta = {} must exceed sigma = {}",
                self.eta, self.sigma
            )));
        }
        let gap = self.eta - self.sigma;
        let denom = gap * gap + self.omega * self.omega;
        Ok(ModeMoments {
            alpha: self.lambda.conj() * c(self.sigma - self.eta, self.omega) / denom,
            beta: self.eta / gap,
        })
    }

    /// Closed-form symmetric-mode moments at time `t`.
    pub fn moments_at(&self, initial: ModeMoments, t: f64) -> Result<ModeMoments> {
        let eq = self.equilibrium()?;
        let decay_beta = (-self.relaxation_rate() * t).exp();
        let decay_alpha = (-self.alpha_rate() * t).exp();
        Ok(ModeMoments {
            alpha: decay_alpha * (initial.alpha - eq.alpha) + eq.alpha,
            beta: decay_beta * (initial.beta - eq.beta) + eq.beta,
        })
    }

    /// Two-mode state with `<A A^dag> = beta_0`, `<A A> = 0` and
    /// `<B B^dag> = beta_inf`; separable and mixed for `beta_0 >= 1`.
    pub fn mixed_initial_state(&self, beta0: f64) -> Result<CovarianceV> {
        let eq = self.equilibrium()?;
        two_mode_covariance(
            ModeMoments {
                alpha: cr(0.0),
                beta: beta0,
            },
            eq.beta,
        )
    }

    /// Asymptotic two-mode covariance with `<B B^dag> = beta_inf`.
    pub fn asymptotic_covariance(&self) -> Result<CovarianceV> {
        let eq = self.equilibrium()?;
        two_mode_covariance(eq, eq.beta)
    }
}

/// Two-mode covariance for symmetric-mode moments `collective` and an
/// antisymmetric mode with `<B B^dag> = b_mode_beta`, `<B B> = 0`:
/// `alpha_hat = alpha/2 J`, `beta_hat = 1/2 [[beta + b, beta - b], [beta - b, beta + b]]`.
pub fn two_mode_covariance(collective: ModeMoments, b_mode_beta: f64) -> Result<CovarianceV> {
    let alpha = ComplexMatrix::from_element(2, 2, collective.alpha * 0.5);
    let sum = 0.5 * (collective.beta + b_mode_beta);
    let diff = 0.5 * (collective.beta - b_mode_beta);
    let beta = ComplexMatrix::from_row_slice(2, 2, &[cr(sum), cr(diff), cr(diff), cr(sum)]);
    CovarianceV::from_blocks(&alpha, &beta)
}

/// Moments of `A = (a_1 + a_2)/sqrt(2)` in a two-mode covariance.
pub fn collective_mode_moments(v: &CovarianceV) -> Result<ModeMoments> {
    if v.modes() != 2 {
        return Err(Error::WrongModeCount {
            expected: 2,
            got: v.modes(),
        });
    }
    let alpha = v.alpha();
    let beta = v.beta();
    let sum = |m: &ComplexMatrix| m.iter().fold(cr(0.0), |acc, z| acc + z) * 0.5;
    Ok(ModeMoments {
        alpha: sum(&alpha),
        beta: sum(&beta).re,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{check_cp, propagate_exact, steady_state};

    fn scenario() -> CollectiveBath {
        CollectiveBath::new(1.0, 0.5, 0.1, cr(0.7)).unwrap()
    }

    #[test]
    fn equilibrium_values() {
        let eq = scenario().equilibrium().unwrap();
        assert!((eq.beta - 2.0).abs() < 1e-15);
        let want = c(0.7 * -0.5 / 0.26, 0.7 * 0.1 / 0.26);
        assert!((eq.alpha - want).norm() < 1e-14);
        assert!((eq.alpha - c(-1.346_153_846_153_846, 0.269_230_769_230_769)).norm() < 1e-12);
        assert!(CollectiveBath::new(1.0, 1.0, 0.1, cr(0.5))
            .unwrap()
            .equilibrium()
            .is_err());
    }

    #[test]
    fn one_mode_steady_state_matches_closed_form() {
        let b = scenario();
        let v = steady_state(&b.collective_mode_bath()).unwrap();
        let eq = b.equilibrium().unwrap();
        assert!((v.beta()[(0, 0)].re - eq.beta).abs() < 1e-12);
        assert!((v.alpha()[(0, 0)] - eq.alpha).norm() < 1e-12);
    }

    #[test]
    fn cp_matches_kossakowski() {
        for (lam, want) in [(0.7, true), (0.5_f64.sqrt(), true), (0.8, false)] {
            let b = CollectiveBath::new(1.0, 0.5, 0.1, c(0.0, lam)).unwrap();
            assert_eq!(b.is_cp(), want);
            assert_eq!(check_cp(&b.two_mode_bath()).unwrap().cp, want);
        }
    }

    #[test]
    fn two_mode_flow_follows_closed_form() {
        let b = CollectiveBath::new(1.0, 0.5, 0.1, Complex64::from_polar(0.7, 0.4)).unwrap();
        let v0 = b.mixed_initial_state(1.0).unwrap();
        let initial = collective_mode_moments(&v0).unwrap();
        assert!((initial.beta - 1.0).abs() < 1e-15);
        for &t in &[0.3, 2.0, 5.0] {
            let vt = propagate_exact(&v0, &b.two_mode_bath(), t).unwrap();
            let got = collective_mode_moments(&vt).unwrap();
            let want = b.moments_at(initial, t).unwrap();
            assert!((got.beta - want.beta).abs() < 1e-12, "t={t}");
            assert!((got.alpha - want.alpha).norm() < 1e-12, "t={t}");
        }
        // beta(2) - beta_inf = e^{-2} (beta_0 - beta_inf) at rate 2(eta - sigma) = 1
        let vt = propagate_exact(&v0, &b.two_mode_bath(), 2.0).unwrap();
        let dev = collective_mode_moments(&vt).unwrap().beta - 2.0;
        assert!((dev - (-2.0_f64).exp() * (1.0 - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn initial_state_is_physical_and_separable_shape() {
        let b = scenario();
        let v0 = b.mixed_initial_state(1.0).unwrap();
        assert!(v0.is_physical().unwrap().physical);
        assert!(b.mixed_initial_state(0.5).unwrap().is_physical().unwrap().min_eig < 0.0);
    }
}
