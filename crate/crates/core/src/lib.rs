//! Gaussian two-mode states coupled to a common quadratic bath: covariance
//! dynamics, entanglement generation and a truncated Fock-space reference.

pub mod collective;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod exec;
pub mod fock_oracle;
pub mod gaussian_state;
pub mod matkit;
pub mod sampling;
pub mod sweep;

pub use collective::{CollectiveBath, ModeMoments};
pub use dynamics::{
    check_cp, drift_diffusion, kossakowski, propagate_exact, propagate_steps, steady_state,
    BathSpec, CpPolicy, DriftDiffusion, Propagator, Trajectory,
};
pub use entanglement::{
    asymptotic_pt_eigenvalues, asymptotic_threshold, best_witness, generation_witness,
    initial_null_basis, partial_transpose, ppt_test, vacuum_condition, PptReport, PptVerdict,
    WitnessReport,
};
pub use error::{Error, Result};
pub use exec::Exec;
pub use fock_oracle::{build_generator, evolve_rho, extract_moments, negativity, FockDensityMatrix};
pub use gaussian_state::{CovarianceBlocks, CovarianceV};
