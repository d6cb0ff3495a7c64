use std::path::Path;

use num_complex::Complex64;

use bathent::collective::{two_mode_covariance, ModeMoments};
use bathent::dynamics::{check_cp, steady_state, CpPolicy, Propagator};
use bathent::entanglement::{
    asymptotic_pt_eigenvalues, asymptotic_threshold, best_witness, classify, generation_witness,
    initial_null_basis, min_pt_eigenvalue, pt_plus_half_sigma, witness_vector, WitnessReport,
    TOL_ENT,
};
use bathent::error::Error;
use bathent::exec::Exec;
use bathent::fock_oracle::{build_generator, evolve_with, extract_moments, negativity, FockDensityMatrix};
use bathent::gaussian_state::CovarianceV;
use bathent::matkit::{hermitian_eigenvalues, max_abs_diff, ComplexMatrix, ComplexVector};
use bathent::sweep::{run_sweep, RangeSpec, SweepParam, SweepSpec, CSV_HEADER};

use crate::config::{InitialRepr, RunConfig};
use crate::output::{num, Csv};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Usage = 1,
    NotCp = 2,
    Negative = 3,
    Inapplicable = 4,
    Unstable = 5,
    OracleDisagreement = 6,
}

/// Negativity above this counts as entangled in the oracle comparison.
pub const NEGATIVITY_THRESHOLD: f64 = 1e-6;

/// Default bound on the Gaussian vs Fock moment deviation.
pub const ORACLE_TOL: f64 = 1e-3;

pub type Outcome = Result<Exit, (Exit, String)>;

fn fail(code: Exit, msg: impl Into<String>) -> (Exit, String) {
    (code, msg.into())
}

fn core_failure(e: Error) -> (Exit, String) {
    let code = match e {
        Error::NotCp { .. } => Exit::NotCp,
        Error::Unstable { .. } => Exit::Unstable,
        Error::EmptyNullSpace => Exit::Inapplicable,
        Error::TruncationLeak { .. } => Exit::OracleDisagreement,
        _ => Exit::Usage,
    };
    (code, e.to_string())
}

fn require_two_modes(cfg: &RunConfig, verb: &str) -> Result<(), (Exit, String)> {
    if cfg.modes == 2 {
        Ok(())
    } else {
        Err(fail(Exit::Usage, format!("{verb} needs a two-mode configuration")))
    }
}

fn policy(cfg: &RunConfig, allow_non_cp: bool) -> CpPolicy {
    if cfg.allow_non_cp || allow_non_cp {
        CpPolicy::Allow
    } else {
        CpPolicy::Enforce
    }
}

fn enforce_cp(cfg: &RunConfig, policy: CpPolicy) -> Result<(), (Exit, String)> {
    let cp = check_cp(&cfg.bath).map_err(core_failure)?;
    if !cp.cp && policy == CpPolicy::Enforce {
        return Err(fail(
            Exit::NotCp,
            format!(
                "bath is not completely positive (min Kossakowski eigenvalue {}); pass --allow-non-cp to proceed",
                num(cp.min_eig)
            ),
        ));
    }
    if !cp.cp {
        println!("warning: bath is not completely positive; results are uncertified");
    }
    Ok(())
}

fn complex(z: Complex64) -> String {
    format!("{}{:+.16e}i", num(z.re), z.im)
}

fn print_matrix(name: &str, m: &ComplexMatrix) {
    println!("{name}:");
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| complex(m[(i, j)])).collect();
        println!("  [{}]", row.join(", "));
    }
}

fn print_vector(name: &str, v: &ComplexVector) {
    let entries: Vec<String> = v.iter().map(|&z| complex(z)).collect();
    println!("{name}: [{}]", entries.join(", "));
}

pub fn check_cp_cmd(cfg: &RunConfig) -> Outcome {
    let report = check_cp(&cfg.bath).map_err(core_failure)?;
    println!("min Kossakowski eigenvalue: {}", num(report.min_eig));
    println!("completely positive: {}", report.cp);
    Ok(if report.cp { Exit::Ok } else { Exit::NotCp })
}

pub fn evolve_cmd(cfg: &RunConfig, output: &Path, allow_non_cp: bool, tol: f64) -> Outcome {
    require_two_modes(cfg, "evolve")?;
    let time = cfg
        .time
        .ok_or_else(|| fail(Exit::Usage, "evolve needs a `time` section"))?;
    let policy = policy(cfg, allow_non_cp);
    enforce_cp(cfg, policy)?;
    let prop = Propagator::new(&cfg.bath, policy).map_err(core_failure)?;
    let traj = prop
        .trajectory(&cfg.initial, time.t_max, time.dt)
        .map_err(core_failure)?;

    let mut header = vec!["t".to_string()];
    for part in ["re", "im"] {
        for i in 1..=4 {
            for j in 1..=4 {
                header.push(format!("{part}_V{i}{j}"));
            }
        }
    }
    header.push("min_pt_eig".into());
    header.push("entangled".into());
    let mut csv = Csv::new(&header);
    let mut first_entangled = None;
    for (&t, v) in traj.times.iter().zip(&traj.states) {
        let m = v.matrix();
        let mut row = vec![num(t)];
        row.extend(m.transpose().iter().map(|z| num(z.re)));
        row.extend(m.transpose().iter().map(|z| num(z.im)));
        let min_eig = min_pt_eigenvalue(v).map_err(core_failure)?;
        let entangled = classify(min_eig, tol).entangled();
        if entangled && first_entangled.is_none() {
            first_entangled = Some(t);
        }
        row.push(num(min_eig));
        row.push(entangled.to_string());
        csv.row(&row);
    }
    csv.write_atomic(output)
        .map_err(|e| fail(Exit::Usage, format!("cannot write {}: {e}", output.display())))?;
    println!("samples: {}", traj.times.len());
    match first_entangled {
        Some(t) => println!("first entangled sample: t = {}", num(t)),
        None => println!("first entangled sample: none"),
    }
    println!("wrote {}", output.display());
    Ok(Exit::Ok)
}

fn print_witness(label: &str, w: &WitnessReport, tol: f64) -> bool {
    let detected = -w.q_derivative > tol;
    println!("{label}:");
    print_vector("  psi", &w.psi);
    println!("  lhs = 2<psi~|B|psi~>: {}", num(w.lhs));
    println!("  rhs = <psi~|A^dag Sigma~ + Sigma~ A|psi~>: {}", num(w.rhs));
    println!("  dQ/dt(0): {}", num(w.q_derivative));
    println!("  generation detected: {detected}");
    detected
}

pub fn witness_cmd(cfg: &RunConfig, allow_non_cp: bool, tol: f64) -> Outcome {
    require_two_modes(cfg, "witness")?;
    let policy = policy(cfg, allow_non_cp);
    enforce_cp(cfg, policy)?;
    let basis = match initial_null_basis(&cfg.initial) {
        Ok(b) => b,
        Err(Error::EmptyNullSpace) => {
            return Err(fail(
                Exit::Inapplicable,
                "initial state lies strictly inside the separable set (no null direction of \
                 V~(0) + Sigma/2), so the witness does not apply; use `evolve` to follow the \
                 PT spectrum instead",
            ))
        }
        Err(e) => return Err(core_failure(e)),
    };
    println!("null-space dimension: {}", basis.ncols());
    for k in 0..basis.ncols() {
        print_vector(&format!("null vector {}", k + 1), &basis.column(k).into_owned());
    }

    let best = best_witness(&cfg.initial, &cfg.bath, policy).map_err(core_failure)?;
    let best_detected = print_witness("best vector over the null space", &best, tol);

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (a, b) = cfg.witness.unwrap_or((Complex64::new(s, 0.0), Complex64::new(s, 0.0)));
    let chosen = witness_vector(&cfg.initial, a, b)
        .and_then(|psi| generation_witness(&cfg.initial, &cfg.bath, &psi, policy));
    let detected = match (chosen, cfg.witness.is_some()) {
        (Ok(w), configured) => {
            let label = if configured { "configured vector" } else { "symmetric vector (a = b = 1/sqrt 2)" };
            let d = print_witness(label, &w, tol);
            if configured {
                d
            } else {
                best_detected
            }
        }
        (Err(e), true) => return Err(fail(Exit::Inapplicable, format!("configured witness vector: {e}"))),
        (Err(_), false) => best_detected,
    };
    println!("verdict: {}", if detected { "entanglement generated" } else { "not detected" });
    Ok(if detected { Exit::Ok } else { Exit::Negative })
}

fn print_verdict(min_eig: f64, tol: f64) -> Exit {
    let report = classify(min_eig, tol);
    println!("verdict: {}", report.verdict);
    if report.entangled() {
        Exit::Ok
    } else {
        Exit::Negative
    }
}

pub fn steady_cmd(cfg: &RunConfig, allow_non_cp: bool, tol: f64) -> Outcome {
    require_two_modes(cfg, "steady")?;
    let policy = policy(cfg, allow_non_cp);
    enforce_cp(cfg, policy)?;
    if let Some(cb) = &cfg.collective {
        // The antisymmetric mode is decoupled, so the two-mode flow has no
        // unique steady state; solve the collective sector and put the
        // other mode at the same occupation.
        let sector = steady_state(&cb.collective_mode_bath()).map_err(core_failure)?;
        let eq = ModeMoments {
            alpha: sector.alpha()[(0, 0)],
            beta: sector.beta()[(0, 0)].re,
        };
        let v = two_mode_covariance(eq, eq.beta).map_err(core_failure)?;
        println!("collective mode: alpha_inf = {}, beta_inf = {}", complex(eq.alpha), num(eq.beta));
        print_matrix("V_inf", v.matrix());
        let spec = asymptotic_pt_eigenvalues(eq.alpha, eq.beta).map_err(core_failure)?;
        let list = |xs: &[f64; 4]| xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(", ");
        println!("PT spectrum of V_inf + Sigma/2: [{}]", list(&spec.eigenvalues));
        println!("closed-form spectrum: [{}] (max deviation {})", list(&spec.closed_form), num(spec.closed_form_mismatch));
        let th = asymptotic_threshold(cb.eta, cb.sigma, cb.omega).map_err(core_failure)?;
        println!("|lambda|^2: {}", num(cb.lambda.norm_sqr()));
        println!("entanglement threshold |lambda|^2 >: {}", num(th.lambda_sq_min));
        println!("CP bound |lambda|^2 <=: {}", num(th.cp_max));
        println!("threshold reachable within CP: {}", th.feasible);
        return Ok(print_verdict(spec.min(), tol));
    }
    let v: CovarianceV = steady_state(&cfg.bath).map_err(core_failure)?;
    print_matrix("V_inf", v.matrix());
    let eigs = hermitian_eigenvalues(&pt_plus_half_sigma(&v).map_err(core_failure)?).map_err(core_failure)?;
    let list: Vec<String> = eigs.iter().map(|&x| num(x)).collect();
    println!("PT spectrum of V_inf + Sigma/2: [{}]", list.join(", "));
    Ok(print_verdict(eigs[0], tol))
}

pub fn sweep_cmd(cfg: &RunConfig, param: &str, range: &str, output: &Path) -> Outcome {
    let base = cfg
        .collective
        .ok_or_else(|| fail(Exit::Usage, "sweep needs a collective bath"))?;
    let param: SweepParam = param.parse().map_err(|e: Error| fail(Exit::Usage, e.to_string()))?;
    let range: RangeSpec = range.parse().map_err(|e: Error| fail(Exit::Usage, e.to_string()))?;
    let psi = match cfg.witness {
        Some((a, b)) => Some(
            witness_vector(&cfg.initial, a, b)
                .map_err(|e| fail(Exit::Inapplicable, format!("configured witness vector: {e}")))?,
        ),
        None => None,
    };
    let spec = SweepSpec {
        base,
        initial: cfg.initial.clone(),
        psi,
    };
    let rows = run_sweep(&spec, param, &range, Exec::default()).map_err(core_failure)?;
    let header: Vec<String> = CSV_HEADER.split(',').map(String::from).collect();
    let mut csv = Csv::new(&header);
    for r in &rows {
        csv.row(&[
            num(r.param_value),
            r.cp_ok.to_string(),
            num(r.dq0),
            num(r.steady_min_pt_eig),
            r.steady_entangled.to_string(),
        ]);
    }
    csv.write_atomic(output)
        .map_err(|e| fail(Exit::Usage, format!("cannot write {}: {e}", output.display())))?;
    println!("sweep {}: {} rows", param.name(), rows.len());
    println!("wrote {}", output.display());
    Ok(Exit::Ok)
}

fn fock_initial(cfg: &RunConfig, cutoff: usize) -> Result<FockDensityMatrix, (Exit, String)> {
    let state = match &cfg.initial_repr {
        InitialRepr::Vacuum => FockDensityMatrix::vacuum(cutoff),
        InitialRepr::Pure { omega1, omega2 } => {
            let mut omega = ComplexMatrix::zeros(2, 2);
            omega[(0, 0)] = (*omega1).into();
            omega[(1, 1)] = (*omega2).into();
            FockDensityMatrix::pure_gaussian(cutoff, &omega)
        }
        InitialRepr::Thermal { occupations } => {
            FockDensityMatrix::thermal(cutoff, [occupations[0], occupations[1]])
        }
        _ => {
            return Err(fail(
                Exit::Usage,
                "oracle-compare supports vacuum, pure and thermal initial states",
            ))
        }
    };
    state.map_err(core_failure)
}

pub fn oracle_compare_cmd(
    cfg: &RunConfig,
    cutoff: Option<usize>,
    allow_non_cp: bool,
    tol: Option<f64>,
) -> Outcome {
    require_two_modes(cfg, "oracle-compare")?;
    let time = cfg
        .time
        .ok_or_else(|| fail(Exit::Usage, "oracle-compare needs a `time` section"))?;
    let policy = policy(cfg, allow_non_cp);
    enforce_cp(cfg, policy)?;
    let cutoff = cutoff.unwrap_or(cfg.oracle.cutoff);
    let tol = tol.unwrap_or(ORACLE_TOL);
    let generator = build_generator(&cfg.bath, cutoff).map_err(core_failure)?;
    let mut rho = fock_initial(cfg, cutoff)?;
    let traj = Propagator::new(&cfg.bath, policy)
        .and_then(|p| p.trajectory(&cfg.initial, time.t_max, time.dt))
        .map_err(core_failure)?;

    println!("cutoff: {cutoff}, Fock step: {}", num(cfg.oracle.dt));
    let mut worst: f64 = 0.0;
    let mut disagreements = 0;
    let mut t_prev = 0.0;
    for (&t, gauss) in traj.times.iter().zip(&traj.states) {
        rho = match evolve_with(&generator, &rho, t - t_prev, cfg.oracle.dt) {
            Ok(r) => r,
            Err(e @ Error::TruncationLeak { .. }) => {
                return Err(fail(
                    Exit::OracleDisagreement,
                    format!("{e} before t = {}; raise the cutoff or shorten the run", num(t)),
                ))
            }
            Err(e) => return Err(core_failure(e)),
        };
        t_prev = t;
        let fock = CovarianceV::from_covariance_blocks(&extract_moments(&rho)).map_err(core_failure)?;
        let dev = max_abs_diff(gauss.matrix(), fock.matrix());
        worst = worst.max(dev);
        let min_eig = min_pt_eigenvalue(gauss).map_err(core_failure)?;
        let ppt = classify(min_eig, TOL_ENT).entangled();
        let neg = negativity(&rho).map_err(core_failure)?;
        let agree = ppt == (neg > NEGATIVITY_THRESHOLD);
        disagreements += (!agree) as usize;
        println!(
            "t = {}: moment deviation {}, PT min eig {}, negativity {}, agree {agree}",
            num(t),
            num(dev),
            num(min_eig),
            num(neg)
        );
    }
    println!("max moment deviation: {} (bound {})", num(worst), num(tol));
    println!("verdict disagreements: {disagreements} of {}", traj.times.len());
    Ok(if worst <= tol && disagreements == 0 {
        Exit::Ok
    } else {
        Exit::OracleDisagreement
    })
}
