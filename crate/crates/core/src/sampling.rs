//! Seeded random baths and states for property tests, benches and the oracle comparison.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dynamics::BathSpec;
use crate::matkit::{cr, ComplexMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = gaussian_matrix(rng, n, n);
    (&g + g.adjoint()) * cr(0.5)
}

/// Random two-mode CP bath: Kossakowski matrix `D G G^dag D` with the largest
/// eigenvalue of `G G^dag` scaled to at most `max_rate`, `D = diag(1, 1, s, s)`
/// and `s` in `[0.3, 0.8)` to keep pumping weaker than damping. The Hamiltonian
/// is positive semidefinite with norm below `max_rate / 2`.
pub fn random_cp_bath<R: Rng>(rng: &mut R, max_rate: f64) -> BathSpec {
    let g = gaussian_matrix(rng, 4, 4);
    let mut c = &g * g.adjoint();
    let top = c.clone().symmetric_eigenvalues().max();
    c *= cr(max_rate * rng.random_range(0.3..1.0) / top);
    let s = rng.random_range(0.3..0.8);
    for i in 0..4 {
        for j in 0..4 {
            let w = if i >= 2 { s } else { 1.0 } * if j >= 2 { s } else { 1.0 };
            c[(i, j)] *= w;
        }
    }
    let h = gaussian_matrix(rng, 2, 2);
    let mut omega = &h * h.adjoint();
    let on = omega.norm();
    omega *= cr(0.5 * max_rate * rng.random_range(0.0..1.0) / on);
    let herm = |m: ComplexMatrix| (&m + m.adjoint()) * cr(0.5);
    BathSpec::new(
        herm(omega),
        herm(c.view((0, 0), (2, 2)).into_owned()),
        herm(c.view((2, 2), (2, 2)).into_owned()),
        c.view((2, 0), (2, 2)).into_owned(),
    )
    .expect("Gram construction yields a valid bath")
}

/// Random symmetric `Omega` with operator norm `max_norm * u`, `u` uniform in `[0, 1)`.
pub fn random_omega<R: Rng>(rng: &mut R, n: usize, max_norm: f64) -> ComplexMatrix {
    let g = gaussian_matrix(rng, n, n);
    let sym = (&g + g.transpose()) * cr(0.5);
    let norm = sym.clone().svd(false, false).singular_values.max();
    sym * cr(max_norm * rng.random_range(0.0..1.0) / norm)
}
