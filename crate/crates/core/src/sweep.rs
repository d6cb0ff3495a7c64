//! One-parameter scans of the collective bath: CP flag, initial generation
//! rate and the asymptotic PT spectrum.

use std::str::FromStr;

use num_complex::Complex64;

use crate::collective::CollectiveBath;
use crate::dynamics::CpPolicy;
use crate::entanglement::{
    asymptotic_pt_eigenvalues, best_witness, classify, generation_witness, TOL_ENT,
};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::gaussian_state::CovarianceV;
use crate::matkit::ComplexVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// `|lambda|` at fixed phase.
    LambdaAbs,
    Eta,
    Sigma,
    Omega,
}

impl SweepParam {
    pub const NAMES: [&'static str; 4] = ["lambda_abs", "eta", "sigma", "omega"];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::LambdaAbs => "lambda_abs",
            SweepParam::Eta => "eta",
            SweepParam::Sigma => "sigma",
            SweepParam::Omega => "omega",
        }
    }

    fn apply(self, base: &CollectiveBath, value: f64) -> Result<CollectiveBath> {
        let b = *base;
        match self {
            SweepParam::LambdaAbs => {
                if !(value >= 0.0) {
                    return Err(Error::DomainError(format!("|lambda| must be >= 0, got {value}")));
                }
                let phase = if b.lambda.norm() > 0.0 { b.lambda.arg() } else { 0.0 };
                CollectiveBath::new(b.eta, b.sigma, b.omega, Complex64::from_polar(value, phase))
            }
            SweepParam::Eta => CollectiveBath::new(value, b.sigma, b.omega, b.lambda),
            SweepParam::Sigma => CollectiveBath::new(b.eta, value, b.omega, b.lambda),
            SweepParam::Omega => CollectiveBath::new(b.eta, b.sigma, value, b.lambda),
        }
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda_abs" => Ok(SweepParam::LambdaAbs),
            "eta" => Ok(SweepParam::Eta),
            "sigma" => Ok(SweepParam::Sigma),
            "omega" => Ok(SweepParam::Omega),
            other => Err(Error::DomainError(format!(
                "unknown sweep parameter `{other}` (expected one of {})",
                SweepParam::NAMES.join(", ")
            ))),
        }
    }
}

/// `start:stop:count`, evenly spaced and inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl RangeSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    self.stop
                } else {
                    self.start + step * k as f64
                }
            })
            .collect()
    }
}

impl FromStr for RangeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::DomainError(format!("range `{s}` is not start:stop:count"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if count == 0 || !start.is_finite() || !stop.is_finite() {
            return Err(bad());
        }
        Ok(RangeSpec { start, stop, count })
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: CollectiveBath,
    /// Initial state for the generation rate.
    pub initial: CovarianceV,
    /// Witness vector; `None` minimizes over the null space.
    pub psi: Option<ComplexVector>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub param_value: f64,
    pub cp_ok: bool,
    /// `dQ/dt(0)`, NaN where the witness does not apply.
    pub dq0: f64,
    /// Lowest PT eigenvalue of the equilibrium, NaN without equilibrium.
    pub steady_min_pt_eig: f64,
    pub steady_entangled: bool,
}

pub const CSV_HEADER: &str = "param_value,cp_ok,dq0,steady_min_pt_eig,steady_entangled";

fn evaluate(spec: &SweepSpec, bath: &CollectiveBath, value: f64) -> SweepRow {
    let two_mode = bath.two_mode_bath();
    let dq0 = match &spec.psi {
        Some(psi) => generation_witness(&spec.initial, &two_mode, psi, CpPolicy::Allow),
        None => best_witness(&spec.initial, &two_mode, CpPolicy::Allow),
    }
    .map(|r| r.q_derivative)
    .unwrap_or(f64::NAN);
    let min_eig = bath
        .equilibrium()
        .and_then(|eq| asymptotic_pt_eigenvalues(eq.alpha, eq.beta))
        .map(|s| s.min())
        .unwrap_or(f64::NAN);
    SweepRow {
        param_value: value,
        cp_ok: bath.is_cp(),
        dq0,
        steady_min_pt_eig: min_eig,
        steady_entangled: min_eig.is_finite() && classify(min_eig, TOL_ENT).entangled(),
    }
}

/// Rows in parameter order regardless of `exec`.
pub fn run_sweep(
    spec: &SweepSpec,
    param: SweepParam,
    range: &RangeSpec,
    exec: Exec,
) -> Result<Vec<SweepRow>> {
    let baths = range
        .values()
        .into_iter()
        .map(|v| param.apply(&spec.base, v).map(|b| (v, b)))
        .collect::<Result<Vec<_>>>()?;
    Ok(exec.map(&baths, |(v, b)| evaluate(spec, b, *v)))
}
