use std::fs;
use std::path::{Path, PathBuf};

use lyapnorm::bounds::{
    build_ledger, cauchy_trials, check_integer_sequences, check_t_properties, CauchySuiteReport, CauchyTrialConfig,
    DeltaSequence, SequenceReport, TPropertyReport,
};
use lyapnorm::io::{load_model, reference_model, to_sorted_json, write_atomic, HamiltonianSource, Model, ModelFile};
use lyapnorm::normalform::NormalFormRecord;
use lyapnorm::orbit::{
    amplitude_for_modulus, oscillator_frequencies, realify, reality_defect, trajectory_csv, validate_orbit,
    OrbitValidation,
};
use lyapnorm::poly::{parse_polynomial, PolydiskGeometry};
use lyapnorm::resonance::{gamma_lower_bound, GammaBound, DEFAULT_VERIFY_UP_TO};
use lyapnorm::{Error, Mode, NormalizeOptions};
use serde::{Deserialize, Serialize};

use crate::{CertifyArgs, ConvertArgs, ModelArgs, NormalizeArgs, NormalizeOpts, OrbitArgs, VerifyArgs};

/// Largest relative homological residual accepted by `normalize`.
const RESIDUAL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("validation failed: {0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Validation(_) => 3,
            CliError::Lib(e) => match e {
                Error::Resonance { .. } | Error::AmbiguousResonance { .. } => 2,
                Error::Structure(_) => 3,
                Error::Degenerate(_) => 4,
                Error::Divergence { .. } => 5,
                _ => 1,
            },
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn with_radii(mut model: Model, radii: &Option<Vec<f64>>) -> CliResult<Model> {
    if let Some(r) = radii {
        if r.len() != model.spectrum.n() {
            return Err(CliError::Config(format!(
                "--radii has {} entries for {} degrees of freedom",
                r.len(),
                model.spectrum.n()
            )));
        }
        model.radii = Some(r.clone());
    }
    Ok(model)
}

fn open_model(args: &ModelArgs) -> CliResult<(Model, PolydiskGeometry)> {
    let model = with_radii(load_model(&args.input, args.mode)?, &args.radii)?;
    let geom = model.geometry()?;
    Ok((model, geom))
}

fn options(opts: &NormalizeOpts) -> CliResult<NormalizeOptions> {
    if !(opts.prune >= 0.0 && opts.prune < 1.0) {
        return Err(CliError::Config(format!("--prune must lie in [0, 1), got {}", opts.prune)));
    }
    Ok(NormalizeOptions {
        trunc_order: opts.trunc,
        prune: opts.prune,
    })
}

fn out_dir(dir: &Path) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(Error::from)?;
    Ok(dir.to_path_buf())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    write_atomic(path, to_sorted_json(value)?.as_bytes())?;
    Ok(())
}

pub fn normalize(args: &NormalizeArgs) -> CliResult<()> {
    let (model, geom) = open_model(&args.model)?;
    let order = args.opts.order as usize;
    let nf = lyapnorm::normalize(&model.hamiltonian, &model.spectrum, order, options(&args.opts)?)?;
    let dir = out_dir(&args.model.out)?;
    write_json(&dir.join("normalform.json"), &NormalFormRecord::from(&nf))?;

    let st = &nf.state;
    println!("mode {}  order {}  trunc {}", nf.mode.as_str(), order, st.trunc_order());
    println!("{:>3}  {:>12}  {:>12}  {:>12}", "r", "residual", "|Z_r|", "|chi_r|");
    let mut worst = 0.0f64;
    for r in 1..=order {
        let res = st.homological_residual(r, &geom);
        worst = worst.max(res);
        println!(
            "{r:>3}  {res:>12.3e}  {:>12.5e}  {:>12.5e}",
            st.z[r - 1].norm_at_scale(&geom, 1.0),
            st.chi[r - 1].norm_at_scale(&geom, 1.0)
        );
    }
    st.check_splitting()?;
    if worst.is_nan() || worst > RESIDUAL_TOLERANCE {
        return Err(CliError::Validation(format!(
            "homological residual {worst:e} exceeds {RESIDUAL_TOLERANCE:e}"
        )));
    }
    Ok(())
}

pub fn certify(args: &CertifyArgs) -> CliResult<()> {
    let dseq = DeltaSequence::new(args.d)?;
    let (model, geom) = open_model(&args.model)?;
    let order = args.opts.order as usize;
    let ledger = build_ledger(
        &model.hamiltonian,
        &model.spectrum,
        &geom,
        &dseq,
        order,
        options(&args.opts)?,
        args.t_path,
    )?;
    let dir = out_dir(&args.model.out)?;
    write_atomic(&dir.join("ledger.csv"), ledger.to_csv().as_bytes())?;
    write_json(&dir.join("certificate.json"), &ledger)?;

    println!(
        "E {:.6e}  h {:.6e}  gamma {:.6e}  C {:.6e}  d {}",
        ledger.e, ledger.h, ledger.gamma, ledger.c, ledger.d
    );
    println!("{:>3}  {:>12}  {:>12}  {:>9}  {:>12}  {:>12}  {:>9}  pass", "r", "|chi_r|", "bound", "ratio", "|Z_r|", "bound", "ratio");
    for row in &ledger.rows {
        println!(
            "{:>3}  {:>12.5e}  {:>12.5e}  {:>9.3e}  {:>12.5e}  {:>12.5e}  {:>9.3e}  {}",
            row.r,
            row.actual_chi,
            row.bound_chi,
            row.ratio_chi(),
            row.actual_z,
            row.bound_z,
            row.ratio_z(),
            if row.pass { "yes" } else { "NO" }
        );
    }
    let tail_failures = ledger.tail.iter().filter(|t| !t.pass).count();
    println!("tail rows {}  failing {}", ledger.tail.len(), tail_failures);
    if let Some(c) = &ledger.certificate {
        println!(
            "beta {:.6e}  beta_theory {:.6e}  G {:.6e}  rho {:.6e}",
            c.beta, c.beta_theory, c.g, c.rho
        );
    }
    if ledger.overflow {
        eprintln!("warning: some bounds overflowed to +inf");
    }
    let failing: Vec<usize> = ledger.rows.iter().filter(|r| !r.pass).map(|r| r.r).collect();
    if !failing.is_empty() || tail_failures > 0 {
        return Err(CliError::Validation(format!(
            "bound violated at orders {failing:?}, {tail_failures} tail rows"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct OrbitSummary {
    amplitude: f64,
    dt: f64,
    mode: Mode,
    monotone: bool,
    runs: Vec<OrbitValidation>,
}

pub fn orbit(args: &OrbitArgs) -> CliResult<()> {
    if !(args.dt > 0.0 && args.dt.is_finite()) {
        return Err(CliError::Config(format!("--dt must be positive, got {}", args.dt)));
    }
    if args.store_every == 0 {
        return Err(CliError::Config("--store-every must be at least 1".into()));
    }
    let (model, geom) = open_model(&args.model)?;
    let top = args.opts.order as usize;
    let from = args.from_order.map_or(top, |o| o as usize);
    if from == 0 || from > top {
        return Err(CliError::Config(format!("--from-order must lie in 1..={top}, got {from}")));
    }
    let opts = options(&args.opts)?;

    let mut runs = Vec::new();
    println!("{:>3}  {:>12}  {:>12}  {:>12}  {:>10}", "k", "residual", "period", "drift", "aperiodic");
    for k in from..=top {
        let nf = lyapnorm::normalize(&model.hamiltonian, &model.spectrum, k, opts)?;
        let xi = amplitude_for_modulus(&nf, args.amplitude)?;
        let v = validate_orbit(&model.hamiltonian, &nf, &geom, xi, args.dt, args.store_every)?;
        println!(
            "{k:>3}  {:>12.5e}  {:>12}  {:>12.3e}  {:>10}",
            v.residual,
            v.period.map_or("-".to_string(), |p| format!("{p:.6}")),
            v.energy_drift,
            v.aperiodic
        );
        runs.push(v);
    }
    let monotone = runs.windows(2).all(|w| w[1].residual <= w[0].residual);
    let dir = out_dir(&args.model.out)?;
    if let Some(traj) = runs.last().and_then(|v| v.trajectory.as_ref()) {
        write_atomic(&dir.join("orbit.csv"), trajectory_csv(traj).as_bytes())?;
    }
    write_json(
        &dir.join("orbit_summary.json"),
        &OrbitSummary {
            amplitude: args.amplitude,
            dt: args.dt,
            mode: model.spectrum.mode,
            monotone,
            runs,
        },
    )?;
    if from < top && !monotone {
        eprintln!("warning: the residual is not monotone over the sweep");
    }
    Ok(())
}

#[derive(Serialize)]
struct GammaCheck {
    bound: GammaBound,
    holds: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    gamma: GammaCheck,
    cauchy: Option<CauchySuiteReport>,
    t_properties: TPropertyReport,
    sequences: SequenceReport,
    violations: usize,
}

/// Largest `s` of the exhaustive T checks.
const T_CHECK_S_MAX: usize = 7;

pub fn verify(args: &VerifyArgs) -> CliResult<()> {
    let dseq = DeltaSequence::new(args.d)?;
    let model = match &args.input {
        Some(p) => load_model(p, args.mode)?,
        None => {
            let mut m = reference_model();
            if let Some(mode) = args.mode {
                m.spectrum.mode = mode;
            }
            m
        }
    };
    let model = with_radii(model, &args.radii)?;
    let geom = model.geometry()?;
    let mut spec = model.spectrum.clone();

    let bound = gamma_lower_bound(&spec, DEFAULT_VERIFY_UP_TO)?;
    let gamma_holds = bound.min_ratio >= bound.gamma;
    println!(
        "gamma {:.10}  min ratio {:.10} at k = {:?}  |k| <= {}  {}",
        bound.gamma,
        bound.min_ratio,
        bound.min_ratio_k,
        bound.verified_up_to,
        if gamma_holds { "ok" } else { "VIOLATED" }
    );
    spec.gamma = Some(bound.gamma);
    spec.gamma_verified_up_to = bound.verified_up_to;

    let cauchy = if args.trials == 0 {
        eprintln!("warning: --trials 0, the Cauchy suite is vacuous");
        None
    } else {
        let config = CauchyTrialConfig {
            trials: args.trials,
            seed: args.seed,
            ..CauchyTrialConfig::default()
        };
        let rep = cauchy_trials(&spec, &geom, &config)?;
        println!("cauchy trials {}  seed {}  violations {}", rep.trials, rep.seed, rep.violations);
        for s in &rep.summaries {
            println!(
                "  {:<20} violations {:>3}  worst ratio {:.4}  min slack {:.4e}",
                s.name, s.violations, s.worst_ratio, s.min_slack
            );
        }
        Some(rep)
    };

    let t_properties = check_t_properties(&dseq, T_CHECK_S_MAX)?;
    println!(
        "T properties s <= {}  monotone {}  product {}  violations {}",
        T_CHECK_S_MAX,
        t_properties.checked_monotone,
        t_properties.checked_product,
        t_properties.violations.len()
    );
    let sequences = check_integer_sequences(25, 20);
    println!("integer sequences checked {}  failures {}", sequences.checked, sequences.failures.len());

    let violations = usize::from(!gamma_holds)
        + cauchy.as_ref().map_or(0, |c| c.violations)
        + t_properties.violations.len()
        + sequences.failures.len();
    let dir = out_dir(&args.out)?;
    write_json(
        &dir.join("verify.json"),
        &VerifyReport {
            gamma: GammaCheck {
                bound,
                holds: gamma_holds,
            },
            cauchy,
            t_properties,
            sequences,
            violations,
        },
    )?;
    if violations > 0 {
        return Err(CliError::Validation(format!("{violations} inequalities violated")));
    }
    Ok(())
}

/// A Hamiltonian in real canonical variables: `q_l` in the `x` slots, `p_l` in the `y` slots.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RealModelFile {
    hamiltonian: String,
    #[serde(default)]
    n: Option<usize>,
    #[serde(default)]
    mode: Option<Mode>,
    #[serde(default)]
    radii: Option<Vec<f64>>,
}

pub fn convert(args: &ConvertArgs) -> CliResult<()> {
    let src = fs::read_to_string(&args.input).map_err(Error::from)?;
    let real: RealModelFile = serde_json::from_str(&src).map_err(Error::from)?;
    let h_qp = parse_polynomial(&real.hamiltonian, real.n)?;
    let omega = oscillator_frequencies(&h_qp)?;
    let h_xy = realify(&h_qp)?.to_polynomial();
    let file = ModelFile {
        lambda: omega.iter().map(|&w| [0.0, w]).collect(),
        mode: args.mode.or(real.mode),
        hamiltonian: HamiltonianSource::Json(h_xy.clone()),
        radii: real.radii,
    };
    let model = file.clone().into_model(None)?;
    let dir = out_dir(&args.out)?;
    write_json(&dir.join("model.json"), &file)?;
    println!(
        "n {}  omega {:?}  terms {}  reality defect {:.3e}",
        model.spectrum.n(),
        omega,
        h_xy.len(),
        reality_defect(&h_xy)
    );
    Ok(())
}
