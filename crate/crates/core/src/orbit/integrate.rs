//! Fixed-step fourth-order Runge-Kutta for `x' = dH/dy`, `y' = -dH/dx`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{GradedSeries, Polynomial};

/// Largest accepted `T / dt`.
pub const MAX_STEPS: f64 = 1e7;

/// Divergence threshold as a multiple of `Lambda`.
pub const DIVERGENCE_FACTOR: f64 = 1e3;

/// Hamiltonian vector field with precomputed partial derivatives.
pub struct VectorField {
    n: usize,
    hamiltonian: Polynomial,
    dx: Vec<Polynomial>,
    dy: Vec<Polynomial>,
}

impl VectorField {
    pub fn new(h: &Polynomial) -> Self {
        let n = h.n();
        Self {
            n,
            hamiltonian: h.clone(),
            dx: (0..n).map(|l| h.partial_x(l)).collect(),
            dy: (0..n).map(|l| h.partial_y(l)).collect(),
        }
    }

    pub fn energy(&self, z: &[Complex64]) -> Complex64 {
        self.hamiltonian.evaluate(&z[..self.n], &z[self.n..])
    }

    pub fn eval(&self, z: &[Complex64], out: &mut [Complex64]) {
        let (x, y) = z.split_at(self.n);
        for l in 0..self.n {
            out[l] = self.dy[l].evaluate(x, y);
            out[self.n + l] = -self.dx[l].evaluate(x, y);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
    pub energies: Vec<Complex64>,
    /// `|H(z(T)) - H(z(0))|`.
    pub energy_drift: f64,
    pub steps: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &[Complex64] {
        self.states.last().unwrap()
    }
}

/// Integrates from `z0` up to `t_end` with step `dt`; the last step is shortened
/// to land on `t_end`. Every `store_every`-th step is recorded, plus the endpoints.
///
/// Aborts when `max |z_i|` exceeds `DIVERGENCE_FACTOR * lambda`.
pub fn integrate(h: &GradedSeries, z0: &[Complex64], t_end: f64, dt: f64, store_every: usize, lambda: f64) -> Result<Trajectory> {
    let n = h.n();
    if z0.len() != 2 * n {
        return Err(Error::DimensionMismatch {
            left: z0.len(),
            right: 2 * n,
        });
    }
    if !(dt > 0.0 && dt.is_finite() && t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidInput(format!("need dt > 0 and T >= 0, got dt = {dt}, T = {t_end}")));
    }
    if t_end / dt > MAX_STEPS {
        return Err(Error::SizeGuard(format!(
            "T / dt = {:e} exceeds the step limit {MAX_STEPS:e}",
            t_end / dt
        )));
    }
    let field = VectorField::new(&h.to_polynomial());
    let limit = DIVERGENCE_FACTOR * lambda;
    let store_every = store_every.max(1);
    let dim = 2 * n;
    let zero = Complex64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![zero; dim], vec![zero; dim], vec![zero; dim], vec![zero; dim], vec![zero; dim]);

    let mut z = z0.to_vec();
    let mut t = 0.0;
    let e0 = field.energy(&z);
    let mut out = Trajectory {
        times: vec![0.0],
        states: vec![z.clone()],
        energies: vec![e0],
        energy_drift: 0.0,
        steps: 0,
    };
    let full_steps = (t_end / dt).floor() as usize;
    let remainder = t_end - full_steps as f64 * dt;
    let total = full_steps + usize::from(remainder > dt * 1e-9);
    for step in 0..total {
        let h_step = if step < full_steps { dt } else { remainder };
        field.eval(&z, &mut k1);
        for i in 0..dim {
            tmp[i] = z[i] + k1[i] * (0.5 * h_step);
        }
        field.eval(&tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = z[i] + k2[i] * (0.5 * h_step);
        }
        field.eval(&tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = z[i] + k3[i] * h_step;
        }
        field.eval(&tmp, &mut k4);
        for i in 0..dim {
            z[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h_step / 6.0);
        }
        t = if step + 1 == total { t_end } else { t + h_step };
        out.steps += 1;
        if z.iter().any(|v| !v.is_finite() || v.norm() > limit) {
            return Err(Error::Divergence { time: t });
        }
        if (step + 1) % store_every == 0 || step + 1 == total {
            out.times.push(t);
            out.states.push(z.clone());
            out.energies.push(field.energy(&z));
        }
    }
    out.energy_drift = (field.energy(&z) - e0).norm();
    Ok(out)
}
