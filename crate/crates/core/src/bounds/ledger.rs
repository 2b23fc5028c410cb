//! Per-order comparison of actual norms against the recursive bounds, and
//! the geometric fit `||chi_r|| <= beta^(r-1) G` with its convergence radius.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::estimates::{lemma3_bounds, majorize_input, LedgerInputs};
use super::sequences::{t_bound, DeltaSequence, MuTable, TPath};
use crate::error::{Error, Result};
use crate::normalform::{normalize_history, NormalizationState, NormalizeOptions};
use crate::poly::{GradedSeries, PolydiskGeometry, Polynomial};
use crate::resonance::{classify_index, gamma_lower_bound, DivisorClass, Mode, Spectrum, DEFAULT_VERIFY_UP_TO};

/// Default fraction of `Lambda` allowed for the coordinate displacement.
pub const DEFAULT_MARGIN: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub r: usize,
    /// `d_{r-1}` and `delta_{r-1}`.
    pub d_prev: f64,
    pub delta_prev: f64,
    pub mu: String,
    pub t: f64,
    pub t_path: TPath,
    pub actual_chi: f64,
    pub bound_chi: f64,
    pub actual_z: f64,
    pub bound_z: f64,
    pub actual_zsharp: f64,
    pub bound_zsharp: f64,
    pub pass: bool,
}

impl LedgerRow {
    pub fn ratio_chi(&self) -> f64 {
        self.actual_chi / self.bound_chi
    }

    pub fn ratio_z(&self) -> f64 {
        self.actual_z / self.bound_z
    }
}

/// Transformed Hamiltonian `H^(r)_s` against its bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub r: usize,
    pub s: usize,
    pub t_path: TPath,
    pub actual_h: f64,
    pub bound_h: f64,
    pub actual_hsharp: f64,
    pub bound_hsharp: f64,
    pub pass: bool,
}

/// Fitted geometric majorant and the radius it implies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub beta: f64,
    pub g: f64,
    pub beta_theory: f64,
    pub rho: f64,
    pub margin: f64,
    pub orders: usize,
    pub beta_within_theory: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundLedger {
    pub e: f64,
    pub h: f64,
    pub gamma: f64,
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    pub c: f64,
    pub d: f64,
    pub b: f64,
    pub t_path: TPath,
    pub rows: Vec<LedgerRow>,
    pub tail: Vec<TailRow>,
    pub certificate: Option<Certificate>,
    pub overflow: bool,
}

impl BoundLedger {
    /// Every generating-function and normal-form row passes.
    pub fn rows_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn tail_pass(&self) -> bool {
        self.tail.iter().all(|r| r.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,actual_chi,bound_chi,ratio,mu,T_path,pass,actual_Z,bound_Z,ratio_Z,T\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{:e},{:e},{:e},{},{},{},{:e},{:e},{:e},{:e}",
                row.r,
                row.actual_chi,
                row.bound_chi,
                row.ratio_chi(),
                row.mu,
                row.t_path.as_str(),
                row.pass,
                row.actual_z,
                row.bound_z,
                row.ratio_z(),
                row.t
            );
        }
        out
    }
}

fn non_flat(p: &Polynomial, mode: Mode) -> Polynomial {
    p.filter(|e, _| classify_index(e, mode) != DivisorClass::Flat)
}

/// Gamma stored on the spectrum, or computed; undefined in Birkhoff mode.
pub fn ledger_gamma(spec: &Spectrum) -> Result<f64> {
    if spec.mode == Mode::Birkhoff {
        return Err(Error::Estimate("the small-divisor constant is only defined in the Melnikov modes".into()));
    }
    match spec.gamma {
        Some(g) => Ok(g),
        None => Ok(gamma_lower_bound(spec, DEFAULT_VERIFY_UP_TO)?.gamma),
    }
}

/// Normalizes `h` to `order` and compares every computed norm with its bound.
pub fn build_ledger(
    h: &GradedSeries,
    spec: &Spectrum,
    geom: &PolydiskGeometry,
    dseq: &DeltaSequence,
    order: usize,
    opts: NormalizeOptions,
    path: TPath,
) -> Result<BoundLedger> {
    let states = normalize_history(h, spec, order, opts)?;
    ledger_from_states(h, &states, geom, dseq, path)
}

/// Ledger for a precomputed sequence of states `H^(0), ..., H^(order)`.
pub fn ledger_from_states(
    h: &GradedSeries,
    states: &[NormalizationState],
    geom: &PolydiskGeometry,
    dseq: &DeltaSequence,
    path: TPath,
) -> Result<BoundLedger> {
    let last = states.last().ok_or_else(|| Error::InvalidInput("no normalization states".into()))?;
    let spec = &last.spectrum;
    let gamma = ledger_gamma(spec)?;
    let maj = majorize_input(h, geom)?;
    if maj.degenerate {
        return Err(Error::Degenerate("the Hamiltonian has no perturbation; E cannot be fitted".into()));
    }
    let inputs = LedgerInputs::new(maj.e, maj.h, gamma, geom.lambda())?;
    let order = last.r;
    let s_max = last.trunc_order().saturating_sub(2);
    let mu = MuTable::new(order, s_max);
    let mode = spec.mode;
    let mut overflow = false;

    let mut rows = Vec::new();
    let mut tail = Vec::new();
    for (r, st) in states.iter().enumerate() {
        let b = lemma3_bounds(r, s_max, &inputs, dseq, &mu, path)?;
        overflow |= b.overflow;
        if r >= 1 {
            let scale = 1.0 - dseq.delta(r - 1);
            let chi = &last.chi[r - 1];
            let z = &last.z[r - 1];
            let actual_chi = chi.norm_at_scale(geom, scale);
            let actual_z = z.norm_at_scale(geom, scale);
            let actual_zsharp = non_flat(z, mode).norm_at_scale(geom, scale);
            let (bound_chi, bound_z, bound_zsharp) = (b.bound_chi.unwrap(), b.bound_z.unwrap(), b.bound_zsharp.unwrap());
            rows.push(LedgerRow {
                r,
                d_prev: dseq.step(r - 1),
                delta_prev: dseq.delta(r - 1),
                mu: mu.get(r - 1, r).unwrap().to_string(),
                t: b.t.unwrap(),
                t_path: b.t_path.unwrap(),
                actual_chi,
                bound_chi,
                actual_z,
                bound_z,
                actual_zsharp,
                bound_zsharp,
                pass: actual_chi <= bound_chi && actual_z <= bound_z && actual_zsharp <= bound_zsharp,
            });
        }
        let scale = 1.0 - dseq.delta(r);
        for tb in &b.tail {
            let part = st.tail.part_or_zero(tb.s + 2);
            let actual_h = part.norm_at_scale(geom, scale);
            let actual_hsharp = non_flat(&part, mode).norm_at_scale(geom, scale);
            tail.push(TailRow {
                r,
                s: tb.s,
                t_path: tb.t_path,
                actual_h,
                bound_h: tb.bound_h,
                actual_hsharp,
                bound_hsharp: tb.bound_hsharp,
                pass: actual_h <= tb.bound_h && actual_hsharp <= tb.bound_hsharp,
            });
        }
    }

    let certificate = if order >= 3 {
        let norms = chi_norms(&last.chi, geom, dseq.d());
        Some(fit_certificate(&norms, dseq, inputs.c, geom.lambda(), DEFAULT_MARGIN)?)
    } else {
        None
    };

    Ok(BoundLedger {
        e: maj.e,
        h: maj.h,
        gamma,
        lambda: geom.lambda(),
        c: inputs.c,
        d: dseq.d(),
        b: dseq.b(),
        t_path: path,
        rows,
        tail,
        certificate,
        overflow,
    })
}

/// `||chi_r||` on the polydisk shrunk by `1 - d`.
pub fn chi_norms(chis: &[Polynomial], geom: &PolydiskGeometry, d: f64) -> Vec<f64> {
    chis.iter().map(|c| c.norm_at_scale(geom, 1.0 - d)).collect()
}

/// Fits `||chi_r|| <= beta^(r-1) G` with `G = ||chi_1||` and finds the
/// largest `rho < 1/beta` with `G rho^3 / (1 - beta rho) <= margin * Lambda`,
/// the sum of `G beta^(r-1) rho^(r+2)` over all orders.
///
/// When `chi_1` vanishes, `G` is the first non-zero norm.
pub fn fit_certificate(norms: &[f64], dseq: &DeltaSequence, c: f64, lambda: f64, margin: f64) -> Result<Certificate> {
    if norms.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "the geometric fit needs at least 3 orders, got {}",
            norms.len()
        )));
    }
    if !(margin > 0.0 && lambda > 0.0) {
        return Err(Error::InvalidInput("margin and Lambda must be positive".into()));
    }
    let g = if norms[0] > 0.0 {
        norms[0]
    } else {
        norms
            .iter()
            .copied()
            .find(|&v| v > 0.0)
            .ok_or_else(|| Error::Degenerate("every generating function vanishes".into()))?
    };
    let beta = norms
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &v)| (v / g).powf(1.0 / i as f64))
        .fold(0.0, f64::max);
    let beta_theory = 4.0 * t_bound(2, dseq.b()) * c;
    let target = margin * lambda;
    let displacement = |rho: f64| g * rho.powi(3) / (1.0 - beta * rho);
    let rho = if beta == 0.0 {
        (target / g).cbrt()
    } else {
        let (mut lo, mut hi) = (0.0, 1.0 / beta);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if displacement(mid) <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    Ok(Certificate {
        beta,
        g,
        beta_theory,
        rho,
        margin,
        orders: norms.len(),
        beta_within_theory: beta.is_finite() && beta <= beta_theory,
    })
}
