//! Dynamics on the Lyapounov manifold `x_2 = ... = y_n = 0` of a normal form.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normalform::{compose_coordinates, NormalFormResult};
use crate::poly::{GradedSeries, Polynomial};
use crate::resonance::Mode;

/// Relative size of `Re a_1` below which the flow counts as periodic.
pub const PERIODIC_TOLERANCE: f64 = 1e-12;

/// `Gamma(zeta) = sum_j z_j zeta^j` on the manifold, with `zeta = x_1 y_1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifoldDynamics {
    /// `j -> z_j`, the coefficient of `(x_1 y_1)^j`, `j >= 2`.
    pub gamma_coeffs: BTreeMap<usize, Complex64>,
    pub lambda1: Complex64,
    pub mode: Mode,
}

/// Collects the `(x_1 y_1)^j` coefficients of the normal-form terms.
pub fn extract_gamma(nf: &NormalFormResult) -> Result<ManifoldDynamics> {
    if nf.mode == Mode::Birkhoff {
        return Err(Error::InvalidInput(
            "manifold dynamics need a Lyapounov or extended-center normal form".into(),
        ));
    }
    let mut gamma_coeffs = BTreeMap::new();
    for (m, z) in nf.state.z.iter().enumerate() {
        for (e, &c) in z.terms() {
            if e.transverse_degree() != 0 {
                continue;
            }
            if !e.is_symmetric() {
                return Err(Error::Structure(format!("Z_{} carries the non-kernel monomial {e}", m + 1)));
            }
            *gamma_coeffs.entry(e.j()[0] as usize).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
    }
    gamma_coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
    Ok(ManifoldDynamics {
        gamma_coeffs,
        lambda1: nf.spectrum.lambda[0],
        mode: nf.mode,
    })
}

/// `a_1(zeta) = lambda_1 + Gamma'(zeta)`.
pub fn frequency(md: &ManifoldDynamics, zeta: Complex64) -> Complex64 {
    md.gamma_coeffs
        .iter()
        .fold(md.lambda1, |acc, (&j, &c)| acc + c * j as f64 * zeta.powu(j as u32 - 1))
}

/// Checks that no monomial of `H0 + Z_1 + ... + Z_r` has transverse degree 1,
/// so the transverse components of the normalized vector field vanish on the manifold.
pub fn check_invariant_manifold(nf: &NormalFormResult) -> Result<()> {
    for (m, z) in nf.state.z.iter().enumerate() {
        if let Some((e, _)) = z.terms().find(|(e, _)| e.transverse_degree() == 1) {
            return Err(Error::Structure(format!(
                "Z_{} contains {e}, which is linear in the transverse variables",
                m + 1
            )));
        }
    }
    Ok(())
}

/// Samples of a trajectory in the original coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitSample {
    pub times: Vec<f64>,
    /// `x_1..x_n, y_1..y_n` at each time.
    pub states: Vec<Vec<Complex64>>,
    /// `2 pi / |Im a_1|`, absent for a hyperbolic or degenerate flow.
    pub period_estimate: Option<f64>,
    /// `|states[0] - states[last]|`.
    pub residual: f64,
    pub aperiodic: bool,
}

pub(crate) fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).norm_sqr()).sum::<f64>().sqrt()
}

/// Evaluates coordinate series at a normalized point.
pub fn evaluate_coordinates(coords: &[GradedSeries], x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
    coords.iter().map(|c| c.to_polynomial().evaluate(x, y)).collect()
}

/// The manifold orbit through `x_1 = xi0`, `y_1 = eta0` in normalized variables.
pub struct ManifoldOrbit {
    pub xi0: Complex64,
    pub eta0: Complex64,
    pub a1: Complex64,
    n: usize,
    coords: Vec<Polynomial>,
}

impl ManifoldOrbit {
    pub fn new(nf: &NormalFormResult, md: &ManifoldDynamics, xi0: Complex64, eta0: Complex64) -> Result<Self> {
        let n = nf.state.n();
        let coords = compose_coordinates(n, &nf.state.chi, nf.state.trunc_order())?
            .iter()
            .map(GradedSeries::to_polynomial)
            .collect();
        Ok(Self {
            xi0,
            eta0,
            a1: frequency(md, xi0 * eta0),
            n,
            coords,
        })
    }

    pub fn is_periodic(&self) -> bool {
        self.a1.re.abs() <= PERIODIC_TOLERANCE * self.a1.norm() && self.a1.im != 0.0
    }

    pub fn period(&self) -> Option<f64> {
        self.is_periodic().then(|| 2.0 * PI / self.a1.im.abs())
    }

    /// Normalized coordinates at time `t`.
    pub fn normalized_state(&self, t: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut x = vec![Complex64::new(0.0, 0.0); self.n];
        let mut y = x.clone();
        x[0] = self.xi0 * (self.a1 * t).exp();
        y[0] = self.eta0 * (-self.a1 * t).exp();
        (x, y)
    }

    /// Original coordinates at time `t`.
    pub fn state(&self, t: f64) -> Vec<Complex64> {
        let (x, y) = self.normalized_state(t);
        self.coords.iter().map(|c| c.evaluate(&x, &y)).collect()
    }
}

/// Samples the orbit at `nsamples` equally spaced times over one period, or
/// over `1 / |a_1|` when the flow is not periodic.
pub fn synthesize_orbit(
    nf: &NormalFormResult,
    md: &ManifoldDynamics,
    xi0: Complex64,
    eta0: Complex64,
    nsamples: usize,
) -> Result<OrbitSample> {
    if nsamples < 2 {
        return Err(Error::InvalidInput("an orbit sample needs at least two points".into()));
    }
    let orbit = ManifoldOrbit::new(nf, md, xi0, eta0)?;
    let period = orbit.period();
    let span = period.unwrap_or_else(|| if orbit.a1.norm() > 0.0 { 1.0 / orbit.a1.norm() } else { 1.0 });
    let times: Vec<f64> = (0..nsamples).map(|i| span * i as f64 / (nsamples - 1) as f64).collect();
    let states: Vec<Vec<Complex64>> = times.iter().map(|&t| orbit.state(t)).collect();
    let residual = distance(&states[0], states.last().unwrap());
    Ok(OrbitSample {
        times,
        states,
        period_estimate: period,
        residual,
        aperiodic: period.is_none(),
    })
}
