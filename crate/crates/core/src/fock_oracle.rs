//! Brute-force reference: the two-mode density matrix in a truncated Fock
//! basis, evolved under the full Lindblad generator.
//!
//! Basis states `|n1, n2>` with `0 <= n_i <= N` are indexed `n1 (N + 1) + n2`.
//! Every operator product is formed from the truncated ladder matrices, so the
//! generator preserves the trace exactly; the truncation only shows up as
//! population piling up in the top level, which is guarded.
//!
//! The generator is kept in structured form,
//! `L(rho) = K rho + rho K^dag + sum_k g_k X_k rho Y_k`, with `K` sparse and
//! `X_k`, `Y_k` single ladder operators, which costs `O(d^2)` per application.

use num_complex::Complex64;

use crate::dynamics::BathSpec;
use crate::error::{Error, Result};
use crate::gaussian_state::CovarianceBlocks;
use crate::matkit::{cr, hermitian_eigenvalues, hermitian_residual, ComplexMatrix};

/// Largest allowed population of the top Fock level of either mode.
pub const LEAK_LIMIT: f64 = 1e-4;

/// Default RK4 step.
pub const DEFAULT_DT: f64 = 1e-3;

/// `to_dense` refuses cutoffs above this.
pub const MAX_DENSE_CUTOFF: usize = 5;

const TRACE_TOL: f64 = 1e-10;
const POSITIVITY_TOL: f64 = 1e-8;

fn check_cutoff(cutoff: usize) -> Result<()> {
    if cutoff < 2 {
        Err(Error::CutoffTooSmall(cutoff))
    } else {
        Ok(())
    }
}

fn occupations(cutoff: usize, index: usize) -> (usize, usize) {
    (index / (cutoff + 1), index % (cutoff + 1))
}

/// One of `a_1, a_2, a_1^dag, a_2^dag`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub const fn lower(mode: usize) -> Self {
        Self { mode, dagger: false }
    }

    pub const fn raise(mode: usize) -> Self {
        Self { mode, dagger: true }
    }

    fn adjoint(self) -> Self {
        Self {
            mode: self.mode,
            dagger: !self.dagger,
        }
    }

    /// Row structure: `op[i, i + offset] = weight[i]` and nothing else.
    fn rows(self, cutoff: usize) -> Shift {
        let dim = (cutoff + 1) * (cutoff + 1);
        let stride = if self.mode == 0 { cutoff + 1 } else { 1 } as isize;
        let weight = (0..dim)
            .map(|i| {
                let (n1, n2) = occupations(cutoff, i);
                let n = if self.mode == 0 { n1 } else { n2 };
                match (self.dagger, n) {
                    (false, n) if n < cutoff => ((n + 1) as f64).sqrt(),
                    (true, n) if n >= 1 => (n as f64).sqrt(),
                    _ => 0.0,
                }
            })
            .collect();
        Shift {
            offset: if self.dagger { -stride } else { stride },
            weight,
        }
    }

    /// Column structure: `op[j + offset, j] = weight[j]`.
    fn columns(self, cutoff: usize) -> Shift {
        self.adjoint().rows(cutoff)
    }

    pub fn matrix(self, cutoff: usize) -> ComplexMatrix {
        let s = self.rows(cutoff);
        let dim = s.weight.len();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (i, &w) in s.weight.iter().enumerate() {
            if w != 0.0 {
                m[(i, (i as isize + s.offset) as usize)] = cr(w);
            }
        }
        m
    }
}

#[derive(Debug, Clone)]
struct Shift {
    offset: isize,
    /// Zero wherever the target index would leave the truncated space.
    weight: Vec<f64>,
}

#[derive(Debug, Clone)]
struct Jump {
    coeff: Complex64,
    left: Shift,
    right: Shift,
}

#[derive(Debug, Clone)]
struct SparseRows {
    start: Vec<usize>,
    col: Vec<usize>,
    val: Vec<Complex64>,
}

impl SparseRows {
    fn from_dense(m: &ComplexMatrix) -> Self {
        let mut start = vec![0];
        let mut col = Vec::new();
        let mut val = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                if z != Complex64::new(0.0, 0.0) {
                    col.push(j);
                    val.push(z);
                }
            }
            start.push(col.len());
        }
        Self { start, col, val }
    }
}

/// Lindblad generator on the truncated two-mode Fock space.
#[derive(Debug, Clone)]
pub struct FockGenerator {
    cutoff: usize,
    dim: usize,
    k: SparseRows,
    jumps: Vec<Jump>,
}

/// Builds the generator of the master equation whose second moments follow
/// `dV/dt = A^dag V + V A + B` for the same bath.
pub fn build_generator(bath: &BathSpec, cutoff: usize) -> Result<FockGenerator> {
    check_cutoff(cutoff)?;
    if bath.modes() != 2 {
        return Err(Error::WrongModeCount {
            expected: 2,
            got: bath.modes(),
        });
    }
    let dim = (cutoff + 1) * (cutoff + 1);
    let lower = [Ladder::lower(0), Ladder::lower(1)];
    let raise = [Ladder::raise(0), Ladder::raise(1)];
    let a: Vec<ComplexMatrix> = lower.iter().map(|l| l.matrix(cutoff)).collect();
    let ad: Vec<ComplexMatrix> = raise.iter().map(|l| l.matrix(cutoff)).collect();

    let (om, eta, sig, lam) = (bath.omega(), bath.eta(), bath.sigma(), bath.lambda());
    let zero = Complex64::new(0.0, 0.0);

    // Each dissipative term is g (X rho Y - Y X rho / 2 - rho Y X / 2).
    let mut terms: Vec<(Complex64, Ladder, Ladder)> = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            terms.push((eta[(i, j)], lower[j], raise[i]));
            terms.push((sig[(i, j)], raise[j], lower[i]));
            terms.push((lam[(i, j)], lower[j], lower[i]));
            terms.push((lam[(j, i)].conj(), raise[j], raise[i]));
        }
    }
    terms.retain(|t| t.0 != zero);

    let op = |l: Ladder| if l.dagger { &ad[l.mode] } else { &a[l.mode] };
    let mut h = ComplexMatrix::zeros(dim, dim);
    for i in 0..2 {
        for j in 0..2 {
            if om[(i, j)] != zero {
                h += (&ad[i] * &a[j] + &a[j] * &ad[i]) * (om[(i, j)] * 0.5);
            }
        }
    }
    let mut k = h * Complex64::new(0.0, -1.0);
    for &(g, x, y) in &terms {
        k -= op(y) * op(x) * (g * 0.5);
    }

    let jumps = terms
        .iter()
        .map(|&(coeff, x, y)| Jump {
            coeff,
            left: x.rows(cutoff),
            right: y.columns(cutoff),
        })
        .collect();
    Ok(FockGenerator {
        cutoff,
        dim,
        k: SparseRows::from_dense(&k),
        jumps,
    })
}

impl FockGenerator {
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `out = L(rho)` for row-major `dim x dim` buffers; `scratch` has the same size.
    fn apply_into(&self, rho: &[Complex64], out: &mut [Complex64], scratch: &mut [Complex64]) {
        let d = self.dim;
        scratch.fill(Complex64::new(0.0, 0.0));
        for i in 0..d {
            let row = &mut scratch[i * d..(i + 1) * d];
            for p in self.k.start[i]..self.k.start[i + 1] {
                let (kc, kv) = (self.k.col[p], self.k.val[p]);
                let src = &rho[kc * d..(kc + 1) * d];
                for (o, s) in row.iter_mut().zip(src) {
                    *o += kv * s;
                }
            }
        }
        // K rho + rho K^dag = P + P^dag for Hermitian rho.
        for i in 0..d {
            for j in 0..d {
                out[i * d + j] = scratch[i * d + j] + scratch[j * d + i].conj();
            }
        }
        for jump in &self.jumps {
            let (lo, ro) = (jump.left.offset, jump.right.offset);
            let j_lo = (-ro).max(0) as usize;
            let j_hi = (d as isize - ro.max(0)) as usize;
            for i in 0..d {
                let xw = jump.left.weight[i];
                if xw == 0.0 {
                    continue;
                }
                let r = (i as isize + lo) as usize;
                let g = jump.coeff * xw;
                let s_lo = r * d + (j_lo as isize + ro) as usize;
                let src = &rho[s_lo..s_lo + (j_hi - j_lo)];
                let dst = &mut out[i * d + j_lo..i * d + j_hi];
                let w = &jump.right.weight[j_lo..j_hi];
                for ((o, s), &yw) in dst.iter_mut().zip(src).zip(w) {
                    *o += g * (s * yw);
                }
            }
        }
    }

    /// `L(rho)` as a matrix; `rho` must be Hermitian.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "density matrix is {}x{}, generator acts on dimension {}",
                rho.nrows(),
                rho.ncols(),
                self.dim
            )));
        }
        let input = to_row_major(rho);
        let mut out = vec![Complex64::new(0.0, 0.0); input.len()];
        let mut scratch = out.clone();
        self.apply_into(&input, &mut out, &mut scratch);
        Ok(from_row_major(self.dim, &out))
    }

    /// Superoperator acting on row-major `vec(rho)`. Built column by column
    /// from Hermitian basis elements, so only small cutoffs are allowed.
    pub fn to_dense(&self) -> Result<ComplexMatrix> {
        if self.cutoff > MAX_DENSE_CUTOFF {
            return Err(Error::DomainError(format!(
                "dense superoperator limited to cutoff {MAX_DENSE_CUTOFF}, got {}",
                self.cutoff
            )));
        }
        let d = self.dim;
        let n = d * d;
        let mut sup = ComplexMatrix::zeros(n, n);
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = out.clone();
        let mut basis = vec![Complex64::new(0.0, 0.0); n];
        let mut image = |basis: &[Complex64]| {
            self.apply_into(basis, &mut out, &mut scratch);
            out.clone()
        };
        // L is linear over the complex numbers only on the full space, so
        // recover L(E_kl) from the Hermitian combinations E_kl + E_lk and
        // i (E_kl - E_lk).
        for k in 0..d {
            for l in k..d {
                basis.fill(Complex64::new(0.0, 0.0));
                if k == l {
                    basis[k * d + k] = cr(1.0);
                    let img = image(&basis);
                    for (r, z) in img.into_iter().enumerate() {
                        sup[(r, k * d + k)] = z;
                    }
                    continue;
                }
                basis[k * d + l] = cr(1.0);
                basis[l * d + k] = cr(1.0);
                let sym = image(&basis);
                basis[k * d + l] = Complex64::new(0.0, 1.0);
                basis[l * d + k] = Complex64::new(0.0, -1.0);
                let anti = image(&basis);
                let i = Complex64::new(0.0, 1.0);
                for r in 0..n {
                    // E_kl = (S - i A')/2 with S = E_kl + E_lk, A' = i(E_kl - E_lk).
                    sup[(r, k * d + l)] = (sym[r] - i * anti[r]) * 0.5;
                    sup[(r, l * d + k)] = (sym[r] + i * anti[r]) * 0.5;
                }
            }
        }
        Ok(sup)
    }
}

fn to_row_major(m: &ComplexMatrix) -> Vec<Complex64> {
    m.transpose().as_slice().to_vec()
}

fn from_row_major(dim: usize, data: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(dim, dim, data)
}

/// Two-mode density matrix on `{|n1, n2> : n_i <= cutoff}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensityMatrix {
    cutoff: usize,
    rho: ComplexMatrix,
}

impl FockDensityMatrix {
    /// Checks shape, Hermiticity, unit trace and positivity.
    pub fn new(cutoff: usize, rho: ComplexMatrix) -> Result<Self> {
        check_cutoff(cutoff)?;
        let dim = (cutoff + 1) * (cutoff + 1);
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "cutoff {cutoff} needs a {dim}x{dim} density matrix, got {}x{}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let s = Self { cutoff, rho };
        s.validate()?;
        Ok(s)
    }

    pub fn vacuum(cutoff: usize) -> Result<Self> {
        check_cutoff(cutoff)?;
        let dim = (cutoff + 1) * (cutoff + 1);
        let mut rho = ComplexMatrix::zeros(dim, dim);
        rho[(0, 0)] = cr(1.0);
        Ok(Self { cutoff, rho })
    }

    /// Product of geometric occupation distributions, renormalized after truncation.
    pub fn thermal(cutoff: usize, mean_occupations: [f64; 2]) -> Result<Self> {
        check_cutoff(cutoff)?;
        for &n in &mean_occupations {
            if !(n >= 0.0) || !n.is_finite() {
                return Err(Error::NegativeOccupation(n));
            }
        }
        let marginal = |nbar: f64| -> Vec<f64> {
            let q = nbar / (1.0 + nbar);
            let mut p: Vec<f64> = (0..=cutoff).map(|n| q.powi(n as i32)).collect();
            let total: f64 = p.iter().sum();
            p.iter_mut().for_each(|x| *x /= total);
            p
        };
        let (p1, p2) = (marginal(mean_occupations[0]), marginal(mean_occupations[1]));
        let dim = (cutoff + 1) * (cutoff + 1);
        let mut rho = ComplexMatrix::zeros(dim, dim);
        for i in 0..dim {
            let (n1, n2) = occupations(cutoff, i);
            rho[(i, i)] = cr(p1[n1] * p2[n2]);
        }
        Ok(Self { cutoff, rho })
    }

    /// Pure Gaussian state with amplitudes `<n1, n2|psi>` proportional to the
    /// Taylor coefficients of `exp(-z Omega z / 2)` times `sqrt(n1! n2!)`,
    /// truncated and renormalized. Its moments are those of
    /// [`crate::gaussian_state::CovarianceV::pure`] for the same `Omega`.
    pub fn pure_gaussian(cutoff: usize, omega: &ComplexMatrix) -> Result<Self> {
        check_cutoff(cutoff)?;
        if omega.shape() != (2, 2) {
            return Err(Error::DimensionMismatch(format!(
                "Omega must be 2x2, got {}x{}",
                omega.nrows(),
                omega.ncols()
            )));
        }
        if (omega[(0, 1)] - omega[(1, 0)]).norm() > 1e-12 * omega.norm().max(1.0) {
            return Err(Error::DomainError("Omega must be symmetric".into()));
        }
        let op_norm = omega.clone().svd(false, false).singular_values.max();
        if !(op_norm < 1.0) {
            return Err(Error::NotNormalizable { norm: op_norm });
        }
        let ln_fact: Vec<f64> = std::iter::once(0.0)
            .chain((1..=cutoff).scan(0.0, |acc, k| {
                *acc += (k as f64).ln();
                Some(*acc)
            }))
            .collect();
        let z11 = omega[(0, 0)] * -0.5;
        let z12 = -omega[(0, 1)];
        let z22 = omega[(1, 1)] * -0.5;
        let dim = (cutoff + 1) * (cutoff + 1);
        let mut amp = vec![Complex64::new(0.0, 0.0); dim];
        for (idx, slot) in amp.iter_mut().enumerate() {
            let (m, n) = occupations(cutoff, idx);
            let mut acc = Complex64::new(0.0, 0.0);
            // m = 2 k1 + q, n = 2 k2 + q
            for q in 0..=m.min(n) {
                if (m - q) % 2 != 0 || (n - q) % 2 != 0 {
                    continue;
                }
                let (k1, k2) = ((m - q) / 2, (n - q) / 2);
                let scale = (0.5 * (ln_fact[m] + ln_fact[n]) - ln_fact[k1] - ln_fact[q] - ln_fact[k2]).exp();
                acc += z11.powi(k1 as i32) * z12.powi(q as i32) * z22.powi(k2 as i32) * scale;
            }
            *slot = acc;
        }
        let norm = amp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let psi = nalgebra::DVector::from_vec(amp) / cr(norm);
        let rho = &psi * psi.adjoint();
        Ok(Self { cutoff, rho })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.diagonal().iter().map(|z| z.re).sum()
    }

    /// Largest population of the top level `n_i = cutoff` over both modes.
    pub fn top_population(&self) -> f64 {
        top_population(self.cutoff, |i| self.rho[(i, i)].re)
    }

    /// Trace `1 +- 1e-10`, Hermitian, eigenvalues `>= -1e-8`.
    pub fn validate(&self) -> Result<()> {
        let res = hermitian_residual(&self.rho);
        if res > 1e-12 {
            return Err(Error::NotHermitian {
                what: "density matrix",
                residual: res,
                tolerance: 1e-12,
            });
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::DomainError(format!("density matrix trace is {tr}")));
        }
        let min = hermitian_eigenvalues(&self.rho)?[0];
        if min < -POSITIVITY_TOL {
            return Err(Error::DomainError(format!(
                "density matrix has eigenvalue {min}"
            )));
        }
        Ok(())
    }
}

fn top_population(cutoff: usize, diag: impl Fn(usize) -> f64) -> f64 {
    let dim = (cutoff + 1) * (cutoff + 1);
    let (mut p1, mut p2) = (0.0, 0.0);
    for i in 0..dim {
        let (n1, n2) = occupations(cutoff, i);
        if n1 == cutoff {
            p1 += diag(i);
        }
        if n2 == cutoff {
            p2 += diag(i);
        }
    }
    f64::max(p1, p2)
}

/// RK4 integration of the master equation up to time `t`, with step at most `dt`.
pub fn evolve_rho(
    rho0: &FockDensityMatrix,
    bath: &BathSpec,
    t: f64,
    dt: f64,
) -> Result<FockDensityMatrix> {
    let generator = build_generator(bath, rho0.cutoff)?;
    evolve_with(&generator, rho0, t, dt)
}

/// As [`evolve_rho`] with a prebuilt generator.
pub fn evolve_with(
    generator: &FockGenerator,
    rho0: &FockDensityMatrix,
    t: f64,
    dt: f64,
) -> Result<FockDensityMatrix> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::NegativeTime(t));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::DomainError(format!("step must be positive, got {dt}")));
    }
    if generator.cutoff != rho0.cutoff {
        return Err(Error::DimensionMismatch(format!(
            "generator cutoff {} differs from state cutoff {}",
            generator.cutoff, rho0.cutoff
        )));
    }
    let tr = rho0.trace();
    if (tr - 1.0).abs() > TRACE_TOL || hermitian_residual(&rho0.rho) > 1e-12 {
        return Err(Error::DomainError(
            "initial density matrix must be Hermitian with unit trace".into(),
        ));
    }
    let d = generator.dim;
    let cutoff = generator.cutoff;
    let steps = (t / dt).ceil() as usize;
    let h = if steps == 0 { 0.0 } else { t / steps as f64 };

    let mut rho = to_row_major(&rho0.rho);
    let zero = Complex64::new(0.0, 0.0);
    let n = d * d;
    let (mut k, mut acc, mut stage, mut scratch) =
        (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    for _ in 0..steps {
        // acc collects k1 + 2 k2 + 2 k3 + k4.
        generator.apply_into(&rho, &mut k, &mut scratch);
        acc.copy_from_slice(&k);
        for (w, c) in [(0.5, 2.0), (0.5, 2.0), (1.0, 1.0)] {
            for ((s, r), kk) in stage.iter_mut().zip(&rho).zip(&k) {
                *s = r + kk * (w * h);
            }
            generator.apply_into(&stage, &mut k, &mut scratch);
            for (a, kk) in acc.iter_mut().zip(&k) {
                *a += kk * c;
            }
        }
        for (r, a) in rho.iter_mut().zip(&acc) {
            *r += a * (h / 6.0);
        }
        for i in 0..d {
            rho[i * d + i].im = 0.0;
            for j in i + 1..d {
                let avg = (rho[i * d + j] + rho[j * d + i].conj()) * 0.5;
                rho[i * d + j] = avg;
                rho[j * d + i] = avg.conj();
            }
        }
        let top = top_population(cutoff, |i| rho[i * d + i].re);
        if top > LEAK_LIMIT {
            return Err(Error::TruncationLeak {
                population: top,
                limit: LEAK_LIMIT,
            });
        }
    }
    Ok(FockDensityMatrix {
        cutoff,
        rho: from_row_major(d, &rho),
    })
}

/// `alpha_ij = Tr[a_i a_j rho]`, `beta_ij = Tr[a_i a_j^dag rho]` with truncated operators.
pub fn extract_moments(rho: &FockDensityMatrix) -> CovarianceBlocks {
    let cutoff = rho.cutoff;
    let a = [Ladder::lower(0).matrix(cutoff), Ladder::lower(1).matrix(cutoff)];
    let ad = [Ladder::raise(0).matrix(cutoff), Ladder::raise(1).matrix(cutoff)];
    let a_rho: Vec<ComplexMatrix> = a.iter().map(|x| x * &rho.rho).collect();
    let ad_rho: Vec<ComplexMatrix> = ad.iter().map(|x| x * &rho.rho).collect();
    // Tr[X Y rho] = sum_ij X_ij (Y rho)_ji
    let tr = |x: &ComplexMatrix, y_rho: &ComplexMatrix| x.transpose().component_mul(y_rho).sum();
    let mut alpha = ComplexMatrix::zeros(2, 2);
    let mut beta = ComplexMatrix::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            alpha[(i, j)] = tr(&a[i], &a_rho[j]);
            beta[(i, j)] = tr(&a[i], &ad_rho[j]);
        }
    }
    CovarianceBlocks { alpha, beta }
}

/// `rho^{T_1}[(n1, n2), (m1, m2)] = rho[(m1, n2), (n1, m2)]`.
pub fn partial_transpose_mode1(rho: &FockDensityMatrix) -> ComplexMatrix {
    let cutoff = rho.cutoff;
    let dim = (cutoff + 1) * (cutoff + 1);
    let idx = |a: usize, b: usize| a * (cutoff + 1) + b;
    ComplexMatrix::from_fn(dim, dim, |r, c| {
        let (n1, n2) = occupations(cutoff, r);
        let (m1, m2) = occupations(cutoff, c);
        rho.rho[(idx(m1, n2), idx(n1, m2))]
    })
}

/// Sum of the magnitudes of the negative eigenvalues of `rho^{T_1}`.
pub fn negativity(rho: &FockDensityMatrix) -> Result<f64> {
    let eigs = hermitian_eigenvalues(&partial_transpose_mode1(rho))?;
    Ok(eigs.iter().filter(|&&x| x < 0.0).map(|x| -x).sum())
}
