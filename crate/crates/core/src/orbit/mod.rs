//! Lyapounov orbits: manifold dynamics of a normal form, synthesis in the
//! original variables, and validation by direct integration.

mod integrate;
mod manifold;
mod realify;

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use integrate::{integrate, Trajectory, VectorField, DIVERGENCE_FACTOR, MAX_STEPS};
pub use manifold::{
    check_invariant_manifold, evaluate_coordinates, extract_gamma, frequency, synthesize_orbit, ManifoldDynamics,
    ManifoldOrbit, OrbitSample, PERIODIC_TOLERANCE,
};
pub use realify::{complexify_state, decomplexify_state, derealify, oscillator_frequencies, reality_defect, realify};

use crate::error::{Error, Result};
use crate::normalform::NormalFormResult;
use crate::poly::{GradedSeries, PolydiskGeometry};

/// Outcome of integrating the original system from a synthesized initial state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitValidation {
    pub order: usize,
    pub amplitude: f64,
    pub a1: Complex64,
    /// Integration horizon: the period, or `1 / |a_1|` for a non-periodic flow.
    pub horizon: f64,
    pub period: Option<f64>,
    pub aperiodic: bool,
    pub dt: f64,
    /// `|z_integrated(T) - z_synthesized(T)|`.
    pub residual: f64,
    pub energy_drift: f64,
    pub initial_state: Vec<Complex64>,
    #[serde(skip)]
    pub trajectory: Option<Trajectory>,
}

/// Starts the manifold orbit with `xi0 = eta0 = amplitude`, integrates the
/// original Hamiltonian `h` over one period and compares with the synthesized orbit.
pub fn validate_orbit(
    h: &GradedSeries,
    nf: &NormalFormResult,
    geom: &PolydiskGeometry,
    amplitude: f64,
    dt: f64,
    store_every: usize,
) -> Result<OrbitValidation> {
    let md = extract_gamma(nf)?;
    let a = Complex64::new(amplitude, 0.0);
    let orbit = ManifoldOrbit::new(nf, &md, a, a)?;
    let period = orbit.period();
    let horizon = period.unwrap_or_else(|| if orbit.a1.norm() > 0.0 { 1.0 / orbit.a1.norm() } else { 1.0 });
    let z0 = orbit.state(0.0);
    let traj = integrate(h, &z0, horizon, dt, store_every, geom.lambda())?;
    let residual = manifold::distance(traj.final_state(), &orbit.state(horizon));
    Ok(OrbitValidation {
        order: nf.state.r,
        amplitude,
        a1: orbit.a1,
        horizon,
        period,
        aperiodic: period.is_none(),
        dt,
        residual,
        energy_drift: traj.energy_drift,
        initial_state: z0,
        trajectory: Some(traj),
    })
}

/// Normalized amplitude `xi0 = eta0` whose orbit starts with `|x_1(0)| = modulus`.
pub fn amplitude_for_modulus(nf: &NormalFormResult, modulus: f64) -> Result<f64> {
    if !(modulus >= 0.0 && modulus.is_finite()) {
        return Err(Error::InvalidInput(format!("modulus must be finite and non-negative, got {modulus}")));
    }
    if modulus == 0.0 {
        return Ok(0.0);
    }
    let md = extract_gamma(nf)?;
    let mut xi = modulus;
    for _ in 0..100 {
        let a = Complex64::new(xi, 0.0);
        let x1 = ManifoldOrbit::new(nf, &md, a, a)?.state(0.0)[0].norm();
        if !(x1 > 0.0 && x1.is_finite()) {
            return Err(Error::InvalidInput(format!("amplitude {xi} leaves the domain of the transformation")));
        }
        let next = xi * modulus / x1;
        if (next - xi).abs() <= 1e-15 * xi {
            return Ok(next);
        }
        xi = next;
    }
    Err(Error::InvalidInput(format!("no amplitude reaches |x1(0)| = {modulus}")))
}

/// CSV with `t`, real and imaginary parts of every coordinate, and `H`.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let dim = traj.states.first().map_or(0, Vec::len);
    let n = dim / 2;
    let mut out = String::from("t");
    for (prefix, count) in [("x", n), ("y", n)] {
        for l in 1..=count {
            let _ = write!(out, ",re_{prefix}{l},im_{prefix}{l}");
        }
    }
    out.push_str(",re_H,im_H\n");
    for ((t, z), e) in traj.times.iter().zip(&traj.states).zip(&traj.energies) {
        let _ = write!(out, "{t:e}");
        for v in z {
            let _ = write!(out, ",{:e},{:e}", v.re, v.im);
        }
        let _ = writeln!(out, ",{:e},{:e}", e.re, e.im);
    }
    out
}
