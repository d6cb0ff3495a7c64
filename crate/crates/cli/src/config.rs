//! JSON run configuration.
//!
//! Complex numbers are `[re, im]` pairs (a bare number is read as real);
//! matrices are arrays of rows. Example:
//!
//! ```json
//! {
//!   "modes": 2,
//!   "bath": {
//!     "eta":    [[1, 0], [0, 2]],
//!     "sigma":  [[1, 0], [0, 0.1]],
//!     "lambda": [[0, 1.2], [0, 0]]
//!   },
//!   "initial_state": { "kind": "vacuum" },
//!   "time": { "t_max": 0.5, "dt": 0.01 }
//! }
//! ```
//!
//! `bath` may instead be `{"collective": {"eta", "sigma", "omega", "lambda"}}`.
//! `initial_state.kind` is one of `vacuum`, `pure` (`omega1`, `omega2`),
//! `thermal` (`occupations`), `blocks` (`alpha`, `beta`) or
//! `collective_mixed` (`beta0`, requires a collective bath).

use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use bathent::collective::CollectiveBath;
use bathent::dynamics::BathSpec;
use bathent::gaussian_state::CovarianceV;
use bathent::matkit::ComplexMatrix;

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum ComplexRepr {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexRepr> for Complex64 {
    fn from(z: ComplexRepr) -> Self {
        match z {
            ComplexRepr::Real(re) => Complex64::new(re, 0.0),
            ComplexRepr::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

type MatrixRepr = Vec<Vec<ComplexRepr>>;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollectiveRepr {
    pub eta: f64,
    pub sigma: f64,
    #[serde(default)]
    pub omega: f64,
    #[serde(default = "zero")]
    pub lambda: ComplexRepr,
}

fn zero() -> ComplexRepr {
    ComplexRepr::Real(0.0)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathRepr {
    pub omega: Option<MatrixRepr>,
    pub eta: Option<MatrixRepr>,
    pub sigma: Option<MatrixRepr>,
    pub lambda: Option<MatrixRepr>,
    pub collective: Option<CollectiveRepr>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialRepr {
    Vacuum,
    Pure {
        omega1: ComplexRepr,
        omega2: ComplexRepr,
    },
    Thermal {
        occupations: Vec<f64>,
    },
    Blocks {
        alpha: MatrixRepr,
        beta: MatrixRepr,
    },
    CollectiveMixed {
        beta0: f64,
    },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeRepr {
    pub t_max: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessRepr {
    pub a: ComplexRepr,
    pub b: ComplexRepr,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleRepr {
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    #[serde(default = "default_oracle_dt")]
    pub dt: f64,
}

fn default_cutoff() -> usize {
    15
}

fn default_oracle_dt() -> f64 {
    bathent::fock_oracle::DEFAULT_DT
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default = "two")]
    pub modes: usize,
    pub bath: BathRepr,
    #[serde(default = "vacuum")]
    pub initial_state: InitialRepr,
    pub time: Option<TimeRepr>,
    #[serde(default)]
    pub allow_non_cp: bool,
    pub witness: Option<WitnessRepr>,
    pub oracle: Option<OracleRepr>,
}

fn two() -> usize {
    2
}

fn vacuum() -> InitialRepr {
    InitialRepr::Vacuum
}

/// Validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub modes: usize,
    pub bath: BathSpec,
    pub collective: Option<CollectiveBath>,
    pub initial: CovarianceV,
    pub initial_repr: InitialRepr,
    pub time: Option<TimeRepr>,
    pub allow_non_cp: bool,
    pub witness: Option<(Complex64, Complex64)>,
    pub oracle: OracleRepr,
}

#[derive(Debug)]
pub enum ConfigError {
    Invalid(String),
    /// The initial state refers to an equilibrium the bath does not have.
    NoEquilibrium(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Invalid(msg) | ConfigError::NoEquilibrium(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

fn matrix(rows: &MatrixRepr, n: usize, what: &str) -> Result<ComplexMatrix, ConfigError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(err(format!("`{what}` must be {n}x{n}")));
    }
    Ok(ComplexMatrix::from_fn(n, n, |i, j| rows[i][j].into()))
}

fn optional_matrix(
    rows: &Option<MatrixRepr>,
    n: usize,
    what: &str,
) -> Result<ComplexMatrix, ConfigError> {
    match rows {
        Some(r) => matrix(r, n, what),
        None => Ok(ComplexMatrix::zeros(n, n)),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| err(format!("invalid config: {e}")))?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawConfig) -> Result<Self, ConfigError> {
        let n = raw.modes;
        if n == 0 {
            return Err(err("`modes` must be at least 1"));
        }
        let b = &raw.bath;
        let explicit = b.omega.is_some() || b.eta.is_some() || b.sigma.is_some() || b.lambda.is_some();
        let (bath, collective) = match (&b.collective, explicit) {
            (Some(_), true) => {
                return Err(err("bath: give either `collective` or explicit matrices, not both"))
            }
            (Some(c), false) => {
                if n != 2 {
                    return Err(err("a collective bath needs `modes` = 2"));
                }
                let cb = CollectiveBath::new(c.eta, c.sigma, c.omega, c.lambda.into())
                    .map_err(|e| err(format!("bath: {e}")))?;
                (cb.two_mode_bath(), Some(cb))
            }
            (None, _) => {
                let bath = BathSpec::new(
                    optional_matrix(&b.omega, n, "bath.omega")?,
                    optional_matrix(&b.eta, n, "bath.eta")?,
                    optional_matrix(&b.sigma, n, "bath.sigma")?,
                    optional_matrix(&b.lambda, n, "bath.lambda")?,
                )
                .map_err(|e| err(format!("bath: {e}")))?;
                (bath, None)
            }
        };

        let initial = match &raw.initial_state {
            InitialRepr::Vacuum => CovarianceV::vacuum(n),
            InitialRepr::Pure { omega1, omega2 } => {
                if n != 2 {
                    return Err(err("`pure` initial state needs `modes` = 2"));
                }
                CovarianceV::pure_product((*omega1).into(), (*omega2).into())
            }
            InitialRepr::Thermal { occupations } => {
                if occupations.len() != n {
                    return Err(err(format!("`occupations` needs {n} entries")));
                }
                CovarianceV::thermal(occupations)
            }
            InitialRepr::Blocks { alpha, beta } => {
                CovarianceV::from_blocks(&matrix(alpha, n, "alpha")?, &matrix(beta, n, "beta")?)
            }
            InitialRepr::CollectiveMixed { beta0 } => match &collective {
                Some(cb) if cb.eta <= cb.sigma => {
                    return Err(ConfigError::NoEquilibrium(format!(
                        "`collective_mixed` needs an equilibrium, but eta = {} does not exceed sigma = {}",
                        cb.eta, cb.sigma
                    )))
                }
                Some(cb) => cb.mixed_initial_state(*beta0),
                None => return Err(err("`collective_mixed` needs a collective bath")),
            },
        }
        .map_err(|e| err(format!("initial_state: {e}")))?;
        let phys = initial
            .is_physical()
            .map_err(|e| err(format!("initial_state: {e}")))?;
        if !phys.physical {
            return Err(err(format!(
                "initial_state is not physical (min eigenvalue of V + Sigma/2 is {:e})",
                phys.min_eig
            )));
        }

        if let Some(t) = raw.time {
            if !(t.t_max >= 0.0 && t.dt > 0.0 && t.t_max.is_finite() && t.dt.is_finite()) {
                return Err(err("time: need t_max >= 0 and dt > 0"));
            }
        }
        let oracle = raw.oracle.unwrap_or(OracleRepr {
            cutoff: default_cutoff(),
            dt: default_oracle_dt(),
        });
        if !(oracle.dt > 0.0) {
            return Err(err("oracle.dt must be positive"));
        }

        Ok(RunConfig {
            modes: n,
            bath,
            collective,
            initial,
            initial_repr: raw.initial_state,
            time: raw.time,
            allow_non_cp: raw.allow_non_cp,
            witness: raw.witness.map(|w| (w.a.into(), w.b.into())),
            oracle,
        })
    }
}
