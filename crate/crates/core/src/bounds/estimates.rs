//! Input majorant `(E, h)`, the constant `C`, and the recursive norm bounds
//! for generating functions, normal-form terms and transformed Hamiltonians.
//!
//! Indices `r, s` follow the order grading: order `s` is literal degree `s + 2`.

use std::f64::consts::E as EULER;

use serde::{Deserialize, Serialize};

use super::sequences::{t_value, DeltaSequence, MuTable, TPath};
use crate::error::{Error, Result};
use crate::poly::{GradedSeries, PolydiskGeometry};

/// `C = h + 4 e^2 E / (gamma Lambda^2)`.
pub fn constant_c(h: f64, e: f64, gamma: f64, lambda: f64) -> f64 {
    h + 4.0 * EULER * EULER * e / (gamma * lambda * lambda)
}

/// Constants with `||H_s||_1 <= h^(s-1) E` for every order `s >= 1` present.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputMajorant {
    pub e: f64,
    pub h: f64,
    /// `(s, ||H_s||_1)` for each order present.
    pub norms: Vec<(usize, f64)>,
    /// No perturbation at all; `E` is the smallest positive double.
    pub degenerate: bool,
}

/// Fits `E` and `h` to the polydisk norms of the degree `>= 3` parts of `h`.
///
/// `E = ||H_1||_1` when non-zero, else the first non-zero norm; then
/// `h = max_{s >= 2} (||H_s||_1 / E)^(1/(s-1))`.
pub fn majorize_input(h: &GradedSeries, geom: &PolydiskGeometry) -> Result<InputMajorant> {
    if h.n() != geom.n() {
        return Err(Error::DimensionMismatch {
            left: h.n(),
            right: geom.n(),
        });
    }
    let norms: Vec<(usize, f64)> = h
        .parts()
        .filter(|(d, _)| *d >= 3)
        .map(|(d, p)| (d - 2, p.norm_at_scale(geom, 1.0)))
        .filter(|(_, v)| *v > 0.0)
        .collect();
    let Some(&(s0, first)) = norms.first() else {
        return Ok(InputMajorant {
            e: f64::MIN_POSITIVE,
            h: 0.0,
            norms,
            degenerate: true,
        });
    };
    let e = if s0 == 1 { first } else { norms.iter().map(|x| x.1).fold(f64::INFINITY, f64::min) };
    let h_val = norms
        .iter()
        .filter(|(s, _)| *s >= 2)
        .map(|&(s, v)| (v / e).powf(1.0 / (s - 1) as f64))
        .fold(0.0, f64::max);
    Ok(InputMajorant {
        e,
        h: h_val,
        norms,
        degenerate: false,
    })
}

/// Everything the recursive bounds depend on besides the indices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerInputs {
    pub e: f64,
    pub h: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub c: f64,
}

impl LedgerInputs {
    pub fn new(e: f64, h: f64, gamma: f64, lambda: f64) -> Result<Self> {
        if !(e > 0.0 && h >= 0.0 && gamma > 0.0 && lambda > 0.0) {
            return Err(Error::InvalidInput(format!(
                "bound inputs need E > 0, h >= 0, gamma > 0, Lambda > 0 (got {e}, {h}, {gamma}, {lambda})"
            )));
        }
        Ok(Self {
            e,
            h,
            gamma,
            lambda,
            c: constant_c(h, e, gamma, lambda),
        })
    }
}

/// Bounds on `H^(r)_s` for one `s > r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub s: usize,
    pub mu: f64,
    pub t: f64,
    pub t_path: TPath,
    /// On `||H^(r)_s||` over the polydisk shrunk by `1 - delta_r`.
    pub bound_h: f64,
    /// On the sharp plus natural part of `H^(r)_s`.
    pub bound_hsharp: f64,
}

/// Bounds produced at order `r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma3Bounds {
    pub r: usize,
    /// `mu_{r-1,r}`, `T_{r-1,r}` and the path that produced it (absent for `r = 0`).
    pub mu: Option<f64>,
    pub t: Option<f64>,
    pub t_path: Option<TPath>,
    /// On `||chi_r||` over the polydisk shrunk by `1 - delta_{r-1}`.
    pub bound_chi: Option<f64>,
    pub bound_z: Option<f64>,
    pub bound_zsharp: Option<f64>,
    pub tail: Vec<TailBound>,
    /// Some bound overflowed to infinity.
    pub overflow: bool,
}

/// Evaluates the recursive bounds for order `r` and tail orders `r < s <= s_max`.
pub fn lemma3_bounds(
    r: usize,
    s_max: usize,
    inputs: &LedgerInputs,
    dseq: &DeltaSequence,
    mu: &MuTable,
    path: TPath,
) -> Result<Lemma3Bounds> {
    if s_max > mu.max_s() || r > mu.max_r() {
        return Err(Error::InvalidInput(format!(
            "mu table covers r <= {}, s <= {}; requested r = {r}, s = {s_max}",
            mu.max_r(),
            mu.max_s()
        )));
    }
    let LedgerInputs { e, gamma, c, .. } = *inputs;
    let mut out = Lemma3Bounds {
        r,
        mu: None,
        t: None,
        t_path: None,
        bound_chi: None,
        bound_z: None,
        bound_zsharp: None,
        tail: Vec::new(),
        overflow: false,
    };
    if r >= 1 {
        let m = mu.get_f64(r - 1, r).unwrap();
        let (t, tp) = t_value(r - 1, r, dseq, path)?;
        let common = m * t * c.powi((r - 1) as i32) * e;
        out.mu = Some(m);
        out.t = Some(t);
        out.t_path = Some(tp);
        out.bound_chi = Some(common / gamma);
        out.bound_z = Some(common / dseq.step(r - 1));
        out.bound_zsharp = Some(common);
    }
    for s in (r + 1)..=s_max {
        let m = mu.get_f64(r, s).unwrap();
        let (t, tp) = t_value(r, s, dseq, path)?;
        let common = m * t * c.powi((s - 1) as i32) * e;
        out.tail.push(TailBound {
            s,
            mu: m,
            t,
            t_path: tp,
            bound_h: common / dseq.step(r),
            bound_hsharp: common,
        });
    }
    let finite = |v: f64| v.is_finite();
    out.overflow = ![out.bound_chi, out.bound_z, out.bound_zsharp].iter().flatten().all(|&v| finite(v))
        || !out.tail.iter().all(|t| finite(t.bound_h) && finite(t.bound_hsharp));
    Ok(out)
}
