//! Acceptance suite: one line per criterion, non-zero exit when any fails.
//!
//! Every criterion runs on the reference model M: `lambda = (i, i sqrt 2)`,
//! `H_3 = (x1 + y1)^2 (x2 + y2)`, unit radii, `d = 0.25`, seed 0.

use std::f64::consts::{E as EULER, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use lyapnorm::bounds::{
    build_ledger, cauchy_trials, chi_norms, constant_c, fit_certificate, majorize_input, mu, CauchyTrialConfig,
    DeltaSequence, MuTable, TPath, T_PROPERTY_TOLERANCE,
};
use lyapnorm::io::reference_model;
use lyapnorm::normalform::oracle_normalize;
use lyapnorm::orbit::{amplitude_for_modulus, validate_orbit};
use lyapnorm::poly::{poisson_bracket, ExponentPair};
use lyapnorm::resonance::gamma_lower_bound;
use lyapnorm::{normalize, GradedSeries, Mode, NormalizeOptions, Polynomial, Spectrum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const D: f64 = 0.25;
const SEED: u64 = 0;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() <= limit_s, || {
        format!("runtime {:.2} s exceeds {limit_s} s", elapsed.as_secs_f64())
    })
}

fn i(v: f64) -> Complex64 {
    Complex64::new(0.0, v)
}

fn l1(p: &Polynomial) -> f64 {
    p.terms().fold(0.0, |acc, (_, c)| acc + c.norm())
}

/// `|a - b|` relative to the largest coefficient of either polynomial.
fn deviation(a: &Polynomial, b: &Polynomial) -> f64 {
    let scale = a.max_abs_coeff().max(b.max_abs_coeff());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).max_abs_coeff() / scale
    }
}

fn homological_exactness() -> Outcome {
    let t0 = Instant::now();
    let m = reference_model();
    let nf = normalize(&m.hamiltonian, &m.spectrum, 6, NormalizeOptions::default()).map_err(|e| e.to_string())?;
    let h0 = Polynomial::diagonal_quadratic(&m.spectrum.lambda);
    // H^(r-1)_r from the direct Lie-series pipeline
    let oracle = oracle_normalize(&m.hamiltonian, &m.spectrum, 6, 10).map_err(|e| e.to_string())?;
    let mut ham = GradedSeries::new(2, 10);
    for (_, p) in m.hamiltonian.parts() {
        ham.add_polynomial(p);
    }
    let mut worst = 0.0f64;
    for r in 1..=6 {
        let psi = ham.part_or_zero(r + 2);
        let chi = &nf.state.chi[r - 1];
        let z = &nf.state.z[r - 1];
        // L_{H0} chi = {chi, H0}
        let lhs = &poisson_bracket(chi, &h0).unwrap() + z;
        let res = l1(&(&lhs - &psi));
        let rel = if l1(&psi) > 0.0 { res / l1(&psi) } else { res };
        worst = worst.max(rel);
        ensure(res <= 1e-12 * l1(&psi), || format!("r = {r}: residual {res:e} vs |psi| {:e}", l1(&psi)))?;
        ham = lyapnorm::normalform::oracle_transform(&ham, &oracle.chi[r - 1], 10).map_err(|e| e.to_string())?;
    }
    within(t0.elapsed(), 10.0)?;
    Ok(format!("worst relative residual {worst:.2e}"))
}

fn random_cubic(n: usize, rng: &mut ChaCha8Rng) -> Polynomial {
    let mut p = Polynomial::zero(n);
    for e in ExponentPair::all_of_degree(n, 3) {
        if rng.random_bool(0.5) {
            p.add_term(e, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        }
    }
    p
}

fn compare_with_oracle(h: &GradedSeries, spec: &Spectrum, order: usize) -> Result<f64, String> {
    let trunc = order + 4;
    let nf = normalize(h, spec, order, NormalizeOptions::default()).map_err(|e| e.to_string())?;
    let or = oracle_normalize(h, spec, order, trunc).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for r in 0..order {
        worst = worst.max(deviation(&nf.state.z[r], &or.z[r]));
        worst = worst.max(deviation(&nf.state.chi[r], &or.chi[r]));
    }
    let full = nf.state.hamiltonian();
    for deg in 2..=trunc {
        worst = worst.max(deviation(&full.part_or_zero(deg), &or.hamiltonian.part_or_zero(deg)));
    }
    Ok(worst)
}

fn oracle_equivalence() -> Outcome {
    let t0 = Instant::now();
    let m = reference_model();
    let mut worst = compare_with_oracle(&m.hamiltonian, &m.spectrum, 6)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let spectra = [
        vec![i(1.0), i(2f64.sqrt())],
        vec![i(1.0), i(2f64.sqrt()), i(5f64.sqrt())],
    ];
    for trial in 0..20 {
        let lambda = &spectra[trial % 2];
        let n = lambda.len();
        let order = rng.random_range(2..=6);
        let spec = Spectrum::new(lambda.clone(), Mode::LyapunovManifold).unwrap();
        let mut h = GradedSeries::new(n, 3);
        h.add_polynomial(&Polynomial::diagonal_quadratic(lambda));
        h.add_polynomial(&random_cubic(n, &mut rng));
        let dev = compare_with_oracle(&h, &spec, order)?;
        ensure(dev <= 1e-11, || format!("trial {trial} (n = {n}, order {order}): deviation {dev:e}"))?;
        worst = worst.max(dev);
    }
    ensure(worst <= 1e-11, || format!("model M deviation {worst:e}"))?;
    within(t0.elapsed(), 60.0)?;
    Ok(format!("M + 20 random cubics, max deviation {worst:.2e}"))
}

fn normal_form_structure() -> Outcome {
    let m = reference_model();
    let nf = normalize(&m.hamiltonian, &m.spectrum, 6, NormalizeOptions::default()).map_err(|e| e.to_string())?;
    let sum = nf.state.normal_part();
    let mut checked = 0;
    for (e, _) in sum.terms() {
        let (j, k) = (e.j(), e.k());
        let transverse: u16 = j[1..].iter().chain(&k[1..]).sum();
        let pure = transverse == 0 && j[0] == k[0];
        ensure(pure || transverse >= 2, || format!("monomial {e} is neither (x1 y1)^m nor transverse of degree >= 2"))?;
        ensure(transverse != 1, || format!("natural monomial {e} survived"))?;
        checked += 1;
    }
    Ok(format!("{checked} monomials of Z_1 + ... + Z_6 checked"))
}

/// Every `k` with `|k| <= limit` in the sharp set and the natural sets of
/// transverse norm `1..=max_transverse`.
fn nonflat_indices(n: usize, limit: i64, max_transverse: i64) -> Vec<Vec<i64>> {
    fn tails(dim: usize, budget: i64) -> Vec<Vec<i64>> {
        if dim == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for v in -budget..=budget {
            for mut rest in tails(dim - 1, budget - v.abs()) {
                rest.insert(0, v);
                out.push(rest);
            }
        }
        out
    }
    let mut out = Vec::new();
    for tail in tails(n - 1, max_transverse) {
        let t: i64 = tail.iter().map(|v| v.abs()).sum();
        for k1 in -(limit - t)..=(limit - t) {
            if t == 0 && k1 == 0 {
                continue;
            }
            let mut k = vec![k1];
            k.extend(&tail);
            out.push(k);
        }
    }
    out
}

fn brute_force_gamma(lambda: Vec<Complex64>, mode: Mode, max_transverse: i64) -> Result<(f64, usize), String> {
    let spec = Spectrum::new(lambda.clone(), mode).map_err(|e| e.to_string())?;
    let gamma = gamma_lower_bound(&spec, 200).map_err(|e| e.to_string())?.gamma;
    ensure(gamma > 0.0, || format!("gamma = {gamma}"))?;
    let ks = nonflat_indices(lambda.len(), 200, max_transverse);
    for k in &ks {
        let pairing: Complex64 = k.iter().zip(&lambda).map(|(&a, &l)| l * a as f64).sum();
        let norm: i64 = k.iter().map(|v| v.abs()).sum();
        ensure(pairing.norm() >= norm as f64 * gamma, || {
            format!("k = {k:?}: |<k, lambda>| = {:e} < {norm} gamma", pairing.norm())
        })?;
    }
    Ok((gamma, ks.len()))
}

fn small_divisors() -> Outcome {
    let t0 = Instant::now();
    let (g, n1) = brute_force_gamma(vec![i(1.0), i(2f64.sqrt())], Mode::LyapunovManifold, 1)?;
    // theta = sqrt 2, N = 4, delta = sqrt 2 - 1
    let expected = (2f64.sqrt() - 1.0) / 4.0;
    ensure((g - expected).abs() <= 1e-12, || format!("gamma {g} differs from (sqrt 2 - 1)/4 = {expected}"))?;
    ensure((g - 0.103553).abs() <= 1e-6, || format!("gamma {g} differs from 0.103553"))?;
    let (gh, n2) = brute_force_gamma(vec![Complex64::new(1.0, 0.0), i(1.0)], Mode::LyapunovManifold, 1)?;
    let (g3, n3) = brute_force_gamma(vec![i(1.0), i(2f64.sqrt()), i(5f64.sqrt())], Mode::ExtendedCenter, 2)?;
    within(t0.elapsed(), 5.0)?;
    Ok(format!(
        "gamma {g:.10} ({n1} indices), mixed {gh:.4} ({n2}), thm2 n=3 {g3:.4} ({n3})"
    ))
}

fn cauchy_estimates() -> Outcome {
    let m = reference_model();
    let mut spec = m.spectrum.clone();
    spec.certify_gamma(200).map_err(|e| e.to_string())?;
    let config = CauchyTrialConfig {
        trials: 200,
        seed: SEED,
        min_degree: 3,
        max_degree: 6,
        deltas: vec![0.1, 0.25, 0.5],
        delta_prime: 0.0,
        delta_dblprime: 0.0,
        ..CauchyTrialConfig::default()
    };
    let rep = cauchy_trials(&spec, &m.geometry().unwrap(), &config).map_err(|e| e.to_string())?;
    ensure(rep.violations == 0, || format!("{} violating trials", rep.violations))?;
    let worst = rep.summaries.iter().map(|s| format!("{} {:.3}", s.name, s.worst_ratio)).collect::<Vec<_>>();
    Ok(format!("200 trials, 0 violations; worst ratios {}", worst.join(", ")))
}

fn norm_ledger() -> Outcome {
    let m = reference_model();
    let geom = m.geometry().unwrap();
    let dseq = DeltaSequence::new(D).unwrap();
    let ledger = build_ledger(&m.hamiltonian, &m.spectrum, &geom, &dseq, 6, NormalizeOptions::default(), TPath::Closed)
        .map_err(|e| e.to_string())?;
    let nf = normalize(&m.hamiltonian, &m.spectrum, 6, NormalizeOptions::default()).map_err(|e| e.to_string())?;

    // E = ||(x1 + y1)^2 (x2 + y2)||_1 = 4 * 2, no higher orders so h = 0
    let (e, h) = (8.0, 0.0);
    let gamma = (2f64.sqrt() - 1.0) / 4.0;
    let c = h + 4.0 * EULER * EULER * e / gamma;
    ensure((ledger.c - c).abs() <= 1e-9 * c, || format!("C = {} differs from {c}", ledger.c))?;
    let b = 6.0 * D / (PI * PI);
    let step = |r: usize| if r == 0 { 1.0 } else { b / (r * r) as f64 };
    let delta = |r: usize| (1..=r).map(|j| b / (j * j) as f64).sum::<f64>();

    let mut worst = 0.0f64;
    for r in 1..=6 {
        let scale = 1.0 - delta(r - 1);
        let chi = l1(&nf.state.chi[r - 1].map_coeffs(|e, c| c * scale.powi(e.degree() as i32)));
        let z = l1(&nf.state.z[r - 1].map_coeffs(|e, c| c * scale.powi(e.degree() as i32)));
        let mu = mu(r - 1, r).to_string().parse::<f64>().unwrap();
        let t = (16.0 / (b * b)).powi(r as i32 - 1);
        let bound_chi = mu * t * c.powi(r as i32 - 1) * e / gamma;
        let bound_z = mu * t * c.powi(r as i32 - 1) * e / step(r - 1);
        ensure(chi <= bound_chi && z <= bound_z, || {
            format!("r = {r}: chi {chi:e} / {bound_chi:e}, Z {z:e} / {bound_z:e}")
        })?;
        let row = &ledger.rows[r - 1];
        ensure((row.actual_chi - chi).abs() <= 1e-12 * chi.max(1.0), || format!("ledger chi norm at r = {r}"))?;
        ensure((row.bound_chi - bound_chi).abs() <= 1e-9 * bound_chi, || format!("ledger chi bound at r = {r}"))?;
        ensure(row.pass, || format!("ledger row {r} fails"))?;
        worst = worst.max(chi / bound_chi).max(z / bound_z);
    }
    ensure(ledger.tail_pass(), || "a transformed-Hamiltonian bound fails".into())?;
    Ok(format!("C = {c:.2}, rows 1..6 pass, worst ratio {worst:.2e}"))
}

/// `T_{r,s}` by brute force over sorted multisets of `{1..r}`.
fn t_brute(r: usize, s: usize, b: f64) -> f64 {
    if r == 0 {
        return 1.0;
    }
    let budget = 4f64.powi(s as i32 - 1) / (s * s) as f64;
    // (smallest next element, slots left, product, value)
    let mut stack = vec![(1usize, 2 * (s - 1), 1.0f64, 1.0f64)];
    let mut best = 0.0f64;
    while let Some((from, left, prod, value)) = stack.pop() {
        for j in from..=r {
            let p = prod * j as f64;
            if p > budget * (1.0 + 1e-12) {
                break;
            }
            let v = value * (j * j) as f64 / b;
            best = best.max(v);
            if left > 1 {
                stack.push((j, left - 1, p, v));
            }
        }
    }
    best
}

fn combinatorics() -> Outcome {
    let b = 6.0 * D / (PI * PI);
    let step = |r: usize| b / (r * r) as f64;
    let dseq = DeltaSequence::new(D).unwrap();
    let mut count = 0;
    for s in 1..=7 {
        for rp in 0..s {
            for r in 0..=rp {
                let lhs = t_brute(r, s, b);
                let rhs = t_brute(rp, s, b);
                ensure(lhs <= rhs * (1.0 + T_PROPERTY_TOLERANCE), || format!("T({r},{s}) > T({rp},{s})"))?;
                if r >= 1 {
                    let lhs = t_brute(r - 1, r, b) * t_brute(rp, s, b) / (step(r) * step(r));
                    let rhs = t_brute(rp, r + s, b);
                    ensure(lhs <= rhs * (1.0 + T_PROPERTY_TOLERANCE), || {
                        format!("T({},{r}) T({rp},{s}) / d_{r}^2 = {lhs:e} > T({rp},{}) = {rhs:e}", r - 1, r + s)
                    })?;
                }
                let lib = lyapnorm::bounds::t_definition(r, s, &dseq).map_err(|e| e.to_string())?;
                ensure((lib - t_brute(r, s, b)).abs() <= 1e-12 * lib, || format!("library T({r},{s}) = {lib}"))?;
                count += 1;
            }
        }
    }

    let table = MuTable::new(25, 25);
    let as_u128 = |v: &num_bigint::BigUint| v.to_string().parse::<u128>().unwrap();
    for s in 1..=25 {
        ensure(as_u128(table.get(0, s).unwrap()) == 1, || format!("mu(0,{s}) != 1"))?;
    }
    ensure(as_u128(table.get(1, 2).unwrap()) == 2, || "mu(1,2) != 2".into())?;
    let diag: Vec<u128> = (1..=6).map(|r| as_u128(table.get(r - 1, r).unwrap())).collect();
    for r in 1..=25 {
        for s in 0..=r {
            ensure(table.get(r, s) == table.get(r - 1, s), || format!("mu({r},{s}) != mu({},{s})", r - 1))?;
        }
        ensure(as_u128(table.get(r - 1, r).unwrap()) <= 4u128.pow(r as u32 - 1), || format!("mu({},{r}) > 4^{}", r - 1, r - 1))?;
    }

    // nu_r = binom(2r - 2, r - 1) / r
    let binom = |n: u128, k: u128| (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1));
    let nu = lyapnorm::bounds::catalan_table(20);
    for (r, v) in nu.iter().enumerate().skip(1) {
        let closed = binom(2 * r as u128 - 2, r as u128 - 1) / r as u128;
        ensure(as_u128(v) == closed, || format!("nu_{r} = {v} vs {closed}"))?;
        ensure(closed <= 4u128.pow(r as u32 - 1), || format!("nu_{r} > 4^{}", r - 1))?;
    }
    ensure(as_u128(&nu[4]) == 5, || "nu_4 != 5".into())?;
    Ok(format!("{count} (r, r', s) triples; mu diagonal {diag:?}; Catalan r <= 20"))
}

fn orbit_validation() -> Outcome {
    let t0 = Instant::now();
    let m = reference_model();
    let geom = m.geometry().unwrap();
    let mut residuals = Vec::new();
    let mut worst_drift = 0.0f64;
    for k in 2..=6 {
        let nf = normalize(&m.hamiltonian, &m.spectrum, k, NormalizeOptions::default()).map_err(|e| e.to_string())?;
        let xi = amplitude_for_modulus(&nf, 0.01).map_err(|e| e.to_string())?;
        let v = validate_orbit(&m.hamiltonian, &nf, &geom, xi, 1e-3, usize::MAX).map_err(|e| e.to_string())?;
        ensure((v.initial_state[0].norm() - 0.01).abs() <= 1e-14, || format!("|x1(0)| = {}", v.initial_state[0].norm()))?;
        let period = v.period.ok_or("the orbit is not periodic")?;
        ensure((period - 2.0 * PI / v.a1.im.abs()).abs() <= 1e-12 * period, || format!("period {period}"))?;
        residuals.push(v.residual);
        worst_drift = worst_drift.max(v.energy_drift);
    }
    ensure(residuals.windows(2).all(|w| w[1] <= w[0]), || format!("residuals not monotone: {residuals:?}"))?;
    let last = *residuals.last().unwrap();
    ensure(last <= 1e-6, || format!("order-6 residual {last:e}"))?;
    ensure(worst_drift <= 1e-9, || format!("energy drift {worst_drift:e}"))?;
    within(t0.elapsed(), 30.0)?;
    let list = residuals.iter().map(|r| format!("{r:.1e}")).collect::<Vec<_>>().join(" ");
    Ok(format!("residuals k=2..6: {list}; drift {worst_drift:.1e}"))
}

fn fitted(order: usize) -> Result<lyapnorm::bounds::Certificate, String> {
    let m = reference_model();
    let geom = m.geometry().unwrap();
    let dseq = DeltaSequence::new(D).unwrap();
    let nf = normalize(&m.hamiltonian, &m.spectrum, order, NormalizeOptions::default()).map_err(|e| e.to_string())?;
    let maj = majorize_input(&m.hamiltonian, &geom).map_err(|e| e.to_string())?;
    let gamma = gamma_lower_bound(&m.spectrum, 200).map_err(|e| e.to_string())?.gamma;
    let c = constant_c(maj.h, maj.e, gamma, geom.lambda());
    let norms = chi_norms(&nf.state.chi, &geom, D);
    let cert = fit_certificate(&norms, &dseq, c, geom.lambda(), 0.1).map_err(|e| e.to_string())?;

    let g = norms[0];
    let beta = norms.iter().enumerate().skip(1).map(|(r, &v)| (v / g).powf(1.0 / r as f64)).fold(0.0, f64::max);
    ensure((cert.beta - beta).abs() <= 1e-12 * beta, || format!("beta {} vs {beta}", cert.beta))?;
    let rho = cert.rho;
    ensure(rho > 0.0 && rho * beta < 1.0, || format!("rho = {rho}"))?;
    ensure(g * rho.powi(3) / (1.0 - beta * rho) <= 0.1 * geom.lambda() * (1.0 + 1e-12), || "rho violates the margin".into())?;
    Ok(cert)
}

fn convergence_certificate() -> Outcome {
    let c6 = fitted(6)?;
    let c12 = fitted(12)?;
    let c24 = fitted(24)?;
    for c in [&c12, &c24] {
        ensure(c.beta.is_finite() && c.beta <= c.beta_theory, || format!("beta {} > beta_th {}", c.beta, c.beta_theory))?;
    }
    let change = (c24.beta - c12.beta).abs() / c12.beta;
    println!(
        "      info: beta 6 -> 12 changes by {:.1}% ({:.3} -> {:.3}), before the geometric regime",
        100.0 * (c12.beta - c6.beta).abs() / c6.beta,
        c6.beta,
        c12.beta
    );
    ensure(change <= 0.2, || format!("beta 12 -> 24 changes by {:.1}%", 100.0 * change))?;
    Ok(format!(
        "beta {:.3} (12) -> {:.3} (24), change {:.1}%, beta_th {:.3e}, rho {:.3e}",
        c12.beta,
        c24.beta,
        100.0 * change,
        c24.beta_theory,
        c24.rho
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("homological exactness", homological_exactness),
        ("oracle equivalence", oracle_equivalence),
        ("normal-form structure", normal_form_structure),
        ("small-divisor brute force", small_divisors),
        ("Cauchy estimates", cauchy_estimates),
        ("norm ledger", norm_ledger),
        ("combinatorial sequences", combinatorics),
        ("orbit validation", orbit_validation),
        ("convergence certificate", convergence_certificate),
    ];
    let mut failed = 0;
    for (idx, (name, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {} {name}: {detail} ({secs:.2} s)", idx + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {} {name}: {why} ({secs:.2} s)", idx + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
