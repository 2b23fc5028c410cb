//! Numerical check of the generalized Cauchy estimates for Lie derivatives,
//! evaluated with actual polydisk norms.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{lie_derivative, ExponentPair, PolydiskGeometry, Polynomial};
use crate::resonance::{classify_index, subspace_of, DivisorClass, Spectrum, SubspaceTag};

/// The four inequalities, in the order they are reported.
pub const CAUCHY_CHECKS: [&str; 4] = ["generating_function", "lie_derivative", "natural_projection", "normal_form"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; non-negative when the inequality holds.
    pub slack: f64,
}

impl CauchyCheck {
    fn new(name: &str, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            slack: rhs - lhs,
        }
    }

    pub fn holds(&self) -> bool {
        self.slack >= 0.0
    }

    /// `lhs / rhs`, 0 when both vanish.
    pub fn ratio(&self) -> f64 {
        if self.lhs == 0.0 {
            0.0
        } else {
            self.lhs / self.rhs
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyReport {
    pub delta_prime: f64,
    pub delta_dblprime: f64,
    pub delta: f64,
    pub checks: Vec<CauchyCheck>,
}

impl CauchyReport {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(CauchyCheck::holds)
    }
}

fn class_part(p: &Polynomial, spec: &Spectrum, keep: impl Fn(DivisorClass) -> bool) -> Polynomial {
    p.filter(|e, _| keep(classify_index(e, spec.mode)))
}

/// Evaluates both sides of the four estimates for `chi` in W, a generic `f`
/// and `z` in normal form, with `psi = L_{H0} chi`.
///
/// Needs `spec.gamma` and `0 <= max(delta', delta'') < delta <= 1/2`.
#[allow(clippy::too_many_arguments)]
pub fn verify_cauchy(
    chi: &Polynomial,
    f: &Polynomial,
    z: &Polynomial,
    spec: &Spectrum,
    geom: &PolydiskGeometry,
    delta_prime: f64,
    delta_dblprime: f64,
    delta: f64,
) -> Result<CauchyReport> {
    let n = spec.n();
    for (what, p) in [("chi", chi), ("f", f), ("Z", z)] {
        if p.n() != n {
            return Err(Error::DimensionMismatch { left: p.n(), right: n });
        }
        if p.degree().is_some_and(|d| d > 0) && p.min_degree() == Some(0) {
            return Err(Error::InvalidInput(format!("{what} has a constant term")));
        }
    }
    if geom.n() != n {
        return Err(Error::DimensionMismatch { left: geom.n(), right: n });
    }
    if !(delta_prime >= 0.0 && delta_dblprime >= 0.0 && delta_prime.max(delta_dblprime) < delta && delta <= 0.5) {
        return Err(Error::InvalidInput(format!(
            "need 0 <= max(delta', delta'') < delta <= 1/2, got ({delta_prime}, {delta_dblprime}, {delta})"
        )));
    }
    let gamma = spec
        .gamma
        .ok_or_else(|| Error::Estimate("the spectrum carries no certified gamma".into()))?;
    for (e, _) in chi.terms() {
        if subspace_of(e, spec)? != SubspaceTag::WPart {
            return Err(Error::Structure(format!("chi contains the normal-form monomial {e}")));
        }
    }
    for (e, _) in z.terms() {
        if subspace_of(e, spec)? != SubspaceTag::ZPart {
            return Err(Error::Structure(format!("Z contains the non-normal monomial {e}")));
        }
    }

    let lam = geom.lambda();
    let h0 = Polynomial::diagonal_quadratic(&spec.lambda);
    let psi = lie_derivative(&h0, chi)?;
    let norm = |p: &Polynomial, d: f64| p.norm_at_scale(geom, 1.0 - d);
    let chi_p = norm(chi, delta_prime);
    let psi_p = norm(&psi, delta_prime);
    let f_pp = norm(f, delta_dblprime);
    let z_pp = norm(z, delta_dblprime);
    let (dd1, dd2) = (delta - delta_prime, delta - delta_dblprime);

    let lf = lie_derivative(chi, f)?;
    let chi_nat = class_part(chi, spec, |c| c == DivisorClass::Natural);
    let f_flat = class_part(f, spec, |c| c == DivisorClass::Flat);
    let nat_proj = class_part(&lie_derivative(&chi_nat, &f_flat)?, spec, |c| c == DivisorClass::Natural);
    let z_sn = class_part(z, spec, |c| c != DivisorClass::Flat);
    let lz = lie_derivative(chi, &z_sn)?;

    let checks = vec![
        CauchyCheck::new(CAUCHY_CHECKS[0], chi_p, psi_p / gamma),
        CauchyCheck::new(CAUCHY_CHECKS[1], norm(&lf, delta), chi_p * f_pp / (dd1 * dd2 * lam * lam)),
        CauchyCheck::new(CAUCHY_CHECKS[2], norm(&nat_proj, delta), 4.0 * chi_p * f_pp / (dd2 * lam * lam)),
        CauchyCheck::new(CAUCHY_CHECKS[3], norm(&lz, delta), psi_p * z_pp / (dd2 * gamma * lam * lam)),
    ];
    Ok(CauchyReport {
        delta_prime,
        delta_dblprime,
        delta,
        checks,
    })
}

/// Settings of the randomized suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyTrialConfig {
    pub trials: usize,
    pub seed: u64,
    pub min_degree: usize,
    pub max_degree: usize,
    pub deltas: Vec<f64>,
    pub delta_prime: f64,
    pub delta_dblprime: f64,
    /// Probability that an admissible monomial receives a coefficient.
    pub density: f64,
}

impl Default for CauchyTrialConfig {
    fn default() -> Self {
        Self {
            trials: 200,
            seed: 0,
            min_degree: 3,
            max_degree: 6,
            deltas: vec![0.1, 0.25, 0.5],
            delta_prime: 0.0,
            delta_dblprime: 0.0,
            density: 0.5,
        }
    }
}

/// Per-inequality summary over the suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub violations: usize,
    pub worst_ratio: f64,
    pub min_slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchySuiteReport {
    pub trials: usize,
    pub seed: u64,
    pub violations: usize,
    pub summaries: Vec<CheckSummary>,
}

fn random_coeff(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn random_poly(
    n: usize,
    degree: usize,
    density: f64,
    rng: &mut ChaCha8Rng,
    admissible: impl Fn(&ExponentPair) -> bool,
) -> Polynomial {
    let pool: Vec<ExponentPair> = ExponentPair::all_of_degree(n, degree).into_iter().filter(|e| admissible(e)).collect();
    let mut p = Polynomial::zero(n);
    for e in &pool {
        if rng.random_bool(density) {
            p.add_term(e.clone(), random_coeff(rng));
        }
    }
    if p.is_zero() && !pool.is_empty() {
        let e = pool[rng.random_range(0..pool.len())].clone();
        p.add_term(e, random_coeff(rng));
    }
    p
}

/// Runs `config.trials` random instances through [`verify_cauchy`].
///
/// Each trial draws degrees for `chi`, `f`, `Z` and a `delta` from the list,
/// and fills random complex coefficients on W, on all monomials, and on Z.
pub fn cauchy_trials(spec: &Spectrum, geom: &PolydiskGeometry, config: &CauchyTrialConfig) -> Result<CauchySuiteReport> {
    if config.min_degree < 3 || config.max_degree < config.min_degree {
        return Err(Error::InvalidInput(format!(
            "trial degrees must satisfy 3 <= min <= max, got {}..={}",
            config.min_degree, config.max_degree
        )));
    }
    if config.deltas.is_empty() {
        return Err(Error::InvalidInput("no delta values to test".into()));
    }
    let mut master = ChaCha8Rng::seed_from_u64(config.seed);
    let seeds: Vec<u64> = (0..config.trials).map(|_| master.random()).collect();
    let n = spec.n();
    let reports: Vec<CauchyReport> = seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut deg = || rng.random_range(config.min_degree..=config.max_degree);
            let (dc, df, dz) = (deg(), deg(), deg());
            let delta = config.deltas[rng.random_range(0..config.deltas.len())];
            let in_w = |e: &ExponentPair| matches!(subspace_of(e, spec), Ok(SubspaceTag::WPart));
            let in_z = |e: &ExponentPair| matches!(subspace_of(e, spec), Ok(SubspaceTag::ZPart));
            let chi = random_poly(n, dc, config.density, &mut rng, in_w);
            let f = random_poly(n, df, config.density, &mut rng, |_| true);
            let z = random_poly(n, dz, config.density, &mut rng, in_z);
            verify_cauchy(&chi, &f, &z, spec, geom, config.delta_prime, config.delta_dblprime, delta)
        })
        .collect::<Result<_>>()?;

    let summaries: Vec<CheckSummary> = CAUCHY_CHECKS
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let checks = reports.iter().map(|r| &r.checks[i]);
            CheckSummary {
                name: name.to_string(),
                violations: checks.clone().filter(|c| !c.holds()).count(),
                worst_ratio: checks.clone().map(CauchyCheck::ratio).fold(0.0, f64::max),
                min_slack: checks.map(|c| c.slack).fold(f64::INFINITY, f64::min),
            }
        })
        .collect();
    Ok(CauchySuiteReport {
        trials: config.trials,
        seed: config.seed,
        violations: reports.iter().filter(|r| !r.holds()).count(),
        summaries,
    })
}
