//! Order-by-order normalization with Lie series.
//!
//! Degrees here are literal polynomial degrees; the order-`r` generating
//! function `chi_r` and normal-form term `Z_r` are homogeneous of degree `r + 2`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::poly::{lie_derivative_truncated, lie_series_apply, GradedSeries, PolydiskGeometry, Polynomial};
use crate::resonance::{divisor, subspace_of, Mode, Spectrum, SubspaceTag, RESONANCE_TOLERANCE};

/// Tolerance for the quadratic part matching `sum lambda_l x_l y_l`.
pub const DIAGONAL_TOLERANCE: f64 = 1e-12;

/// Splits `psi` into its Z projection and solves `L_{H0} chi = psi_W` on W.
///
/// Returns `(chi, z)` with `chi_jk = psi_jk / <j - k, lambda>` on W monomials.
pub fn solve_homological(psi: &Polynomial, spec: &Spectrum) -> Result<(Polynomial, Polynomial)> {
    if psi.n() != spec.n() {
        return Err(Error::DimensionMismatch {
            left: psi.n(),
            right: spec.n(),
        });
    }
    if !psi.is_homogeneous() {
        return Err(Error::InvalidInput("homological equation needs a homogeneous right-hand side".into()));
    }
    let mut chi = Polynomial::zero(psi.n());
    let mut z = Polynomial::zero(psi.n());
    let scale = spec.max_abs();
    for (e, &c) in psi.terms() {
        match subspace_of(e, spec)? {
            SubspaceTag::ZPart => z.add_term(e.clone(), c),
            SubspaceTag::WPart => {
                let div = divisor(e, spec);
                let diff = e.difference();
                let k_norm: u64 = diff.iter().map(|v| v.unsigned_abs()).sum();
                if div.norm() <= RESONANCE_TOLERANCE * scale * k_norm.max(1) as f64 {
                    return Err(Error::Resonance {
                        k: diff,
                        magnitude: div.norm(),
                    });
                }
                chi.add_term(e.clone(), c / div);
            }
        }
    }
    Ok((chi, z))
}

/// Hamiltonian after `r` normalization steps:
/// `H0 + Z_1 + ... + Z_r + tail`, where the tail holds degrees `> r + 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizationState {
    pub r: usize,
    pub spectrum: Spectrum,
    pub h0: Polynomial,
    pub z: Vec<Polynomial>,
    pub chi: Vec<Polynomial>,
    /// Right-hand sides `H^(m-1)` at degree `m + 2` that produced `Z_m`, `chi_m`.
    pub psi: Vec<Polynomial>,
    pub tail: GradedSeries,
    pub prune: f64,
}

impl NormalizationState {
    /// Starts from a Hamiltonian whose quadratic part is `sum lambda_l x_l y_l`.
    pub fn new(h: &GradedSeries, spectrum: &Spectrum, trunc_order: usize, prune: f64) -> Result<Self> {
        spectrum.validate()?;
        if h.n() != spectrum.n() {
            return Err(Error::DimensionMismatch {
                left: h.n(),
                right: spectrum.n(),
            });
        }
        if trunc_order < 3 {
            return Err(Error::InvalidInput(format!("truncation order {trunc_order} is below 3")));
        }
        if let Some(d) = h.degrees().find(|&d| d < 2) {
            return Err(Error::InvalidInput(format!(
                "Hamiltonian has terms of degree {d}; the equilibrium must sit at the origin"
            )));
        }
        let h0 = Polynomial::diagonal_quadratic(&spectrum.lambda);
        let off = &h.part_or_zero(2) - &h0;
        let tol = DIAGONAL_TOLERANCE * spectrum.max_abs().max(1.0);
        if off.max_abs_coeff() > tol {
            let (e, c) = off
                .terms()
                .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                .map(|(e, c)| (e.clone(), *c))
                .unwrap();
            return Err(Error::NonDiagonalQuadratic(format!(
                "coefficient of {e} deviates by {:e} from sum lambda_l x_l y_l",
                c.norm()
            )));
        }
        let mut tail = GradedSeries::new(h.n(), trunc_order);
        for (d, p) in h.parts() {
            if d >= 3 {
                tail.add_polynomial(p);
            }
        }
        Ok(Self {
            r: 0,
            spectrum: spectrum.clone(),
            h0,
            z: Vec::new(),
            chi: Vec::new(),
            psi: Vec::new(),
            tail,
            prune,
        })
    }

    pub fn n(&self) -> usize {
        self.h0.n()
    }

    pub fn trunc_order(&self) -> usize {
        self.tail.trunc_order()
    }

    /// The full transformed Hamiltonian `H^(r)` as a series.
    pub fn hamiltonian(&self) -> GradedSeries {
        let mut h = GradedSeries::new(self.n(), self.trunc_order());
        h.add_polynomial(&self.h0);
        for z in &self.z {
            h.add_polynomial(z);
        }
        for (_, p) in self.tail.parts() {
            h.add_polynomial(p);
        }
        h
    }

    /// `Z_1 + ... + Z_r`.
    pub fn normal_part(&self) -> Polynomial {
        let mut out = Polynomial::zero(self.n());
        for z in &self.z {
            out += z;
        }
        out
    }

    /// `||L_{H0} chi_m + Z_m - psi_m|| / ||psi_m||` on the given polydisk (1-based `m`).
    pub fn homological_residual(&self, m: usize, geom: &PolydiskGeometry) -> f64 {
        let (chi, z, psi) = (&self.chi[m - 1], &self.z[m - 1], &self.psi[m - 1]);
        let lhs = &lie_derivative_truncated(&self.h0, chi, usize::MAX) + z;
        let resid = (&lhs - psi).norm_at_scale(geom, 1.0);
        let scale = psi.norm_at_scale(geom, 1.0);
        if scale == 0.0 {
            resid
        } else {
            resid / scale
        }
    }

    /// Checks that every `Z_m` lies in Z and every `chi_m` in W.
    pub fn check_splitting(&self) -> Result<()> {
        for (m, (z, chi)) in self.z.iter().zip(&self.chi).enumerate() {
            for (e, _) in z.terms() {
                if subspace_of(e, &self.spectrum)? != SubspaceTag::ZPart {
                    return Err(Error::Structure(format!("Z_{} carries W monomial {e}", m + 1)));
                }
            }
            for (e, _) in chi.terms() {
                if subspace_of(e, &self.spectrum)? != SubspaceTag::WPart {
                    return Err(Error::Structure(format!("chi_{} carries Z monomial {e}", m + 1)));
                }
            }
        }
        Ok(())
    }
}

/// `L_chi^p f / p!` for `p = 0, 1, ...` until the degree passes `trunc`.
fn lie_powers(chi: &Polynomial, f: &Polynomial, trunc: usize) -> Vec<Polynomial> {
    let mut out = vec![f.clone()];
    let mut p = 0usize;
    loop {
        let last = out.last().unwrap();
        if last.is_zero() {
            break;
        }
        p += 1;
        let next = lie_derivative_truncated(chi, last, trunc).scale_real(1.0 / p as f64);
        out.push(next);
    }
    out
}

fn nth_or_zero(v: &[Polynomial], p: usize, n: usize) -> Polynomial {
    v.get(p).cloned().unwrap_or_else(|| Polynomial::zero(n))
}

/// One normalization step: solves for `chi_r`, `Z_r` and rebuilds the tail
/// with the two-branch recursion that collects `exp(L_chi_r) H^(r-1)` by degree.
///
/// With `q` the order index (degree `q + 2`) and `q = s r + m`, `0 <= m < r`:
///
/// * `m > 0`: `H_q = L^s Z_m / s! + sum_{p<s} L^p H_{(s-p) r + m} / p!`
/// * `m = 0`: `H_q = L^(s-1) (Z_r / s + (s-1)/s H_r) / (s-1)! + sum_{p<s-1} L^p H_{(s-p) r} / p!`
pub fn normalize_step(state: &NormalizationState) -> Result<NormalizationState> {
    let n = state.n();
    let r = state.r + 1;
    let trunc = state.trunc_order();
    let psi = state.tail.part_or_zero(r + 2);
    let (chi, z_r) = solve_homological(&psi, &state.spectrum)?;
    let max_q = trunc.saturating_sub(2);

    let old = |q: usize| state.tail.part_or_zero(q + 2);
    // powers of L_chi applied to each old tail piece, indexed by order q
    let mut old_powers: BTreeMap<usize, Vec<Polynomial>> = BTreeMap::new();
    for q in (r + 1)..=max_q {
        old_powers.insert(q, lie_powers(&chi, &old(q), trunc));
    }
    let z_powers: Vec<Vec<Polynomial>> = state.z.iter().map(|z| lie_powers(&chi, z, trunc)).collect();

    let mut tail = GradedSeries::new(n, trunc);
    for q in (r + 1)..=max_q {
        let s = q / r;
        let m = q % r;
        let mut acc = Polynomial::zero(n);
        if m != 0 {
            acc += &nth_or_zero(&z_powers[m - 1], s, n);
            for p in 0..s {
                acc += &nth_or_zero(&old_powers[&((s - p) * r + m)], p, n);
            }
        } else {
            let sf = s as f64;
            let mix = &z_r.scale_real(1.0 / sf) + &psi.scale_real((sf - 1.0) / sf);
            let mut term = mix;
            for i in 1..s {
                term = lie_derivative_truncated(&chi, &term, trunc).scale_real(1.0 / i as f64);
            }
            acc += &term;
            for p in 0..s.saturating_sub(1) {
                acc += &nth_or_zero(&old_powers[&((s - p) * r)], p, n);
            }
        }
        let acc = acc.homogeneous_part(q + 2).prune(state.prune);
        tail.set_part(q + 2, acc);
    }
    tail.mark_truncated(state.tail.is_truncated() || !chi.is_zero());

    let mut next = state.clone();
    next.r = r;
    next.z.push(z_r);
    next.chi.push(chi);
    next.psi.push(psi);
    next.tail = tail;
    Ok(next)
}

/// Provenance recorded with every normal form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub input_hash: String,
    pub order: usize,
    pub trunc_order: usize,
    pub prune: f64,
    pub resonance_tolerance: f64,
    pub diagonal_tolerance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalFormResult {
    pub state: NormalizationState,
    pub mode: Mode,
    pub spectrum: Spectrum,
    pub provenance: Provenance,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizeOptions {
    /// Literal truncation degree; defaults to `order + 4`.
    pub trunc_order: Option<usize>,
    /// Relative pruning threshold on tail coefficients; 0 keeps every non-zero term.
    pub prune: f64,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        Self {
            trunc_order: None,
            prune: 0.0,
        }
    }
}

fn checked_trunc(order: usize, opts: NormalizeOptions) -> Result<usize> {
    let trunc = opts.trunc_order.unwrap_or(order + 4);
    if trunc < order + 2 {
        return Err(Error::InvalidInput(format!(
            "truncation order {trunc} cannot hold order {order} (needs degree {})",
            order + 2
        )));
    }
    Ok(trunc)
}

/// SHA-256 over the JSON form of the input Hamiltonian and spectrum.
pub fn input_hash(h: &GradedSeries, spec: &Spectrum) -> String {
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(&h.to_polynomial()).unwrap_or_default());
    hasher.update(serde_json::to_vec(&spec.lambda).unwrap_or_default());
    hasher.update(spec.mode.as_str().as_bytes());
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Normalizes `h` up to order `order` (last `Z` of degree `order + 2`).
pub fn normalize(h: &GradedSeries, spec: &Spectrum, order: usize, opts: NormalizeOptions) -> Result<NormalFormResult> {
    let trunc = checked_trunc(order, opts)?;
    let mut state = NormalizationState::new(h, spec, trunc, opts.prune)?;
    for _ in 0..order {
        state = normalize_step(&state)?;
    }
    Ok(NormalFormResult {
        provenance: Provenance {
            input_hash: input_hash(h, spec),
            order,
            trunc_order: trunc,
            prune: opts.prune,
            resonance_tolerance: RESONANCE_TOLERANCE,
            diagonal_tolerance: DIAGONAL_TOLERANCE,
        },
        mode: spec.mode,
        spectrum: spec.clone(),
        state,
    })
}

/// Every intermediate state `H^(0), ..., H^(order)`.
pub fn normalize_history(
    h: &GradedSeries,
    spec: &Spectrum,
    order: usize,
    opts: NormalizeOptions,
) -> Result<Vec<NormalizationState>> {
    let trunc = checked_trunc(order, opts)?;
    let mut states = vec![NormalizationState::new(h, spec, trunc, opts.prune)?];
    for _ in 0..order {
        let next = normalize_step(states.last().unwrap())?;
        states.push(next);
    }
    Ok(states)
}

/// `exp(L_chi) H` computed directly from the Lie series, without the
/// degree bookkeeping of [`normalize_step`].
pub fn oracle_transform(h: &GradedSeries, chi: &Polynomial, trunc_order: usize) -> Result<GradedSeries> {
    lie_series_apply(chi, h, trunc_order)
}

/// Output of [`oracle_normalize`].
#[derive(Clone, Debug)]
pub struct OracleNormalForm {
    pub z: Vec<Polynomial>,
    pub chi: Vec<Polynomial>,
    pub hamiltonian: GradedSeries,
}

/// Normalization by repeated direct transformation `H <- exp(L_chi_r) H`.
pub fn oracle_normalize(h: &GradedSeries, spec: &Spectrum, order: usize, trunc_order: usize) -> Result<OracleNormalForm> {
    let mut ham = GradedSeries::new(h.n(), trunc_order);
    for (_, p) in h.parts() {
        ham.add_polynomial(p);
    }
    let mut z = Vec::new();
    let mut chis = Vec::new();
    for r in 1..=order {
        let (chi, zr) = solve_homological(&ham.part_or_zero(r + 2), spec)?;
        ham = oracle_transform(&ham, &chi, trunc_order)?;
        z.push(zr);
        chis.push(chi);
    }
    Ok(OracleNormalForm {
        z,
        chi: chis,
        hamiltonian: ham,
    })
}

/// Series for the original coordinates `x^(0)_l, y^(0)_l` as functions of the
/// normalized ones: the coordinate function is pushed through
/// `exp(L_chi_1)`, then `exp(L_chi_2)`, and so on.
///
/// Output order is `x_1..x_n, y_1..y_n`.
pub fn compose_coordinates(n: usize, chis: &[Polynomial], trunc_order: usize) -> Result<Vec<GradedSeries>> {
    let mut out = Vec::with_capacity(2 * n);
    for v in 0..2 * n {
        let coord = if v < n {
            Polynomial::coordinate_x(n, v)
        } else {
            Polynomial::coordinate_y(n, v - n)
        };
        let mut f = GradedSeries::from_polynomial(&coord, trunc_order);
        for chi in chis {
            f = lie_series_apply(chi, &f, trunc_order)?;
        }
        out.push(f);
    }
    Ok(out)
}

/// Serialized form of a [`NormalFormResult`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormalFormRecord {
    pub mode: Mode,
    pub spectrum: Spectrum,
    pub order: usize,
    pub trunc_order: usize,
    pub h0: Polynomial,
    pub z: Vec<Polynomial>,
    pub chi: Vec<Polynomial>,
    pub psi: Vec<Polynomial>,
    /// Tail parts keyed by literal degree.
    pub tail: BTreeMap<String, Polynomial>,
    pub tail_truncated: bool,
    pub provenance: Provenance,
}

impl From<&NormalFormResult> for NormalFormRecord {
    fn from(nf: &NormalFormResult) -> Self {
        let st = &nf.state;
        Self {
            mode: nf.mode,
            spectrum: nf.spectrum.clone(),
            order: st.r,
            trunc_order: st.trunc_order(),
            h0: st.h0.clone(),
            z: st.z.clone(),
            chi: st.chi.clone(),
            psi: st.psi.clone(),
            tail: st.tail.parts().map(|(d, p)| (d.to_string(), p.clone())).collect(),
            tail_truncated: st.tail.is_truncated(),
            provenance: nf.provenance.clone(),
        }
    }
}

impl TryFrom<NormalFormRecord> for NormalFormResult {
    type Error = Error;

    fn try_from(rec: NormalFormRecord) -> Result<Self> {
        let n = rec.h0.n();
        let mut tail = GradedSeries::new(n, rec.trunc_order);
        for (d, p) in &rec.tail {
            let d: usize = d
                .parse()
                .map_err(|_| Error::InvalidInput(format!("tail key '{d}' is not a degree")))?;
            if !(p.is_homogeneous() && p.degree() == Some(d)) {
                return Err(Error::InvalidInput(format!("tail part {d} is not homogeneous of degree {d}")));
            }
            tail.add_polynomial(p);
        }
        if rec.z.len() != rec.order || rec.chi.len() != rec.order || rec.psi.len() != rec.order {
            return Err(Error::InvalidInput("z/chi/psi lists must have one entry per order".into()));
        }
        tail.mark_truncated(rec.tail_truncated);
        Ok(Self {
            state: NormalizationState {
                r: rec.order,
                spectrum: rec.spectrum.clone(),
                h0: rec.h0,
                z: rec.z,
                chi: rec.chi,
                psi: rec.psi,
                tail,
                prune: rec.provenance.prune,
            },
            mode: rec.mode,
            spectrum: rec.spectrum,
            provenance: rec.provenance,
        })
    }
}
