//! Divisor classes, the Z/W splitting of monomials, and the small-divisor
//! constant `gamma` with `|<k, lambda>| >= |k| gamma` on the non-flat indices.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::ExponentPair;

/// Relative tolerance used to call a divisor zero.
pub const RESONANCE_TOLERANCE: f64 = 1e-10;

/// Default `|k|` range scanned when certifying `gamma`.
pub const DEFAULT_VERIFY_UP_TO: usize = 200;

/// Which normal form is being built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// First Melnikov condition only; `Gamma` depends on `x1 y1` alone.
    #[serde(rename = "thm1")]
    LyapunovManifold,
    /// First and second Melnikov conditions; `Gamma` may carry `(x1 y1)^j x_v y_v`.
    #[serde(rename = "thm2")]
    ExtendedCenter,
    /// Plain projection on the kernel of `L_{H0}`.
    #[serde(rename = "birkhoff")]
    Birkhoff,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::LyapunovManifold => "thm1",
            Mode::ExtendedCenter => "thm2",
            Mode::Birkhoff => "birkhoff",
        }
    }

    /// Largest transverse degree counted as `Natural`.
    fn natural_limit(self) -> usize {
        match self {
            Mode::LyapunovManifold => 1,
            Mode::ExtendedCenter => 2,
            Mode::Birkhoff => 0,
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thm1" => Ok(Mode::LyapunovManifold),
            "thm2" => Ok(Mode::ExtendedCenter),
            "birkhoff" => Ok(Mode::Birkhoff),
            other => Err(Error::InvalidInput(format!(
                "unknown mode '{other}' (expected thm1, thm2 or birkhoff)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DivisorClass {
    Sharp,
    Natural,
    Flat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SubspaceTag {
    ZPart,
    WPart,
}

/// Eigenvalues of the quadratic part together with the normal-form mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub lambda: Vec<Complex64>,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub gamma_verified_up_to: usize,
}

impl Spectrum {
    pub fn new(lambda: Vec<Complex64>, mode: Mode) -> Result<Self> {
        let s = Self {
            lambda,
            mode,
            gamma: None,
            gamma_verified_up_to: 0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda.is_empty() {
            return Err(Error::InvalidInput("spectrum has no eigenvalues".into()));
        }
        if self.lambda.iter().any(|l| !(l.re.is_finite() && l.im.is_finite())) {
            return Err(Error::InvalidInput("non-finite eigenvalue".into()));
        }
        if self.lambda[0].norm() == 0.0 {
            return Err(Error::InvalidInput("lambda_1 must be non-zero".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    pub fn max_abs(&self) -> f64 {
        self.lambda.iter().map(|l| l.norm()).fold(0.0, f64::max)
    }

    /// `<k, lambda>` for an integer vector.
    pub fn pairing(&self, k: &[i64]) -> Complex64 {
        k.iter().zip(&self.lambda).map(|(&a, &l)| l * a as f64).sum()
    }

    /// Runs [`gamma_lower_bound`] and stores the result.
    pub fn certify_gamma(&mut self, verify_up_to: usize) -> Result<GammaBound> {
        let g = gamma_lower_bound(self, verify_up_to)?;
        self.gamma = Some(g.gamma);
        self.gamma_verified_up_to = g.verified_up_to;
        Ok(g)
    }

    fn tolerance(&self, k_norm: usize) -> f64 {
        RESONANCE_TOLERANCE * self.max_abs() * k_norm.max(1) as f64
    }
}

pub fn classify_index(e: &ExponentPair, mode: Mode) -> DivisorClass {
    if mode == Mode::Birkhoff {
        return DivisorClass::Sharp;
    }
    classify_transverse(e.transverse_degree(), mode)
}

fn classify_transverse(m: usize, mode: Mode) -> DivisorClass {
    match m {
        0 => DivisorClass::Sharp,
        m if m <= mode.natural_limit() => DivisorClass::Natural,
        _ => DivisorClass::Flat,
    }
}

/// `<j - k, lambda>`, the eigenvalue of `L_{H0}` on `x^j y^k`.
pub fn divisor(e: &ExponentPair, spec: &Spectrum) -> Complex64 {
    debug_assert_eq!(e.n(), spec.n());
    spec.pairing(&e.difference())
}

/// Decides whether `x^j y^k` belongs to the normal-form space Z or to W.
///
/// In the two Melnikov modes kernel membership is decided from the exponents
/// alone; only Birkhoff mode compares divisors against a tolerance.
pub fn subspace_of(e: &ExponentPair, spec: &Spectrum) -> Result<SubspaceTag> {
    use DivisorClass::*;
    use SubspaceTag::*;
    Ok(match spec.mode {
        Mode::LyapunovManifold => match classify_index(e, spec.mode) {
            Sharp if e.is_symmetric() => ZPart,
            Flat => ZPart,
            _ => WPart,
        },
        Mode::ExtendedCenter => match classify_index(e, spec.mode) {
            Sharp | Natural if e.is_symmetric() => ZPart,
            Flat => ZPart,
            _ => WPart,
        },
        Mode::Birkhoff => {
            if e.is_symmetric() {
                return Ok(ZPart);
            }
            let diff = e.difference();
            let mag = spec.pairing(&diff).norm();
            let k_norm = diff.iter().map(|v| v.unsigned_abs() as usize).sum();
            let tol = spec.tolerance(k_norm);
            if mag == 0.0 {
                ZPart
            } else if mag < tol {
                return Err(Error::AmbiguousResonance {
                    k: diff,
                    magnitude: mag,
                    tolerance: tol,
                });
            } else {
                WPart
            }
        }
    })
}

/// Where `gamma` came from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GammaSource {
    /// The constructive value `min(delta / N, |lambda_1| / 2)` passed the scan.
    Constructive,
    /// The constructive value failed the scan and was replaced by 99% of the
    /// smallest observed ratio.
    Empirical,
}

/// Result of [`gamma_lower_bound`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaBound {
    pub gamma: f64,
    pub constructive_gamma: f64,
    pub theta: f64,
    pub cutoff: usize,
    pub delta: f64,
    pub source: GammaSource,
    pub verified_up_to: usize,
    /// Smallest `|<k, lambda>| / |k|` over the scanned indices.
    pub min_ratio: f64,
    pub min_ratio_k: Vec<i64>,
}

/// All vectors in `Z^dim` whose l1 norm is exactly `m`.
fn vectors_with_norm(dim: usize, m: usize) -> Vec<Vec<i64>> {
    fn rec(dim: usize, m: usize, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if prefix.len() == dim {
            if m == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        if prefix.len() + 1 == dim {
            let vals: &[i64] = if m == 0 { &[0] } else { &[m as i64, -(m as i64)] };
            for &v in vals {
                prefix.push(v);
                out.push(prefix.clone());
                prefix.pop();
            }
            return;
        }
        for a in 0..=m {
            let signs: &[i64] = if a == 0 { &[1] } else { &[1, -1] };
            for &s in signs {
                prefix.push(s * a as i64);
                rec(dim, m - a, prefix, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    if dim == 0 {
        if m == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(dim, m, &mut Vec::new(), &mut out);
    out
}

/// Calls `visit(k, |k|)` for every non-zero `k` in the sharp and natural sets with `|k| <= limit`.
fn for_each_nonflat(mode: Mode, n: usize, limit: usize, mut visit: impl FnMut(&[i64], usize, DivisorClass)) {
    let mut k = vec![0i64; n];
    for k1 in 1..=limit as i64 {
        for s in [1, -1] {
            k[0] = s * k1;
            visit(&k, k1 as usize, DivisorClass::Sharp);
        }
    }
    for m in 1..=mode.natural_limit() {
        for tail in vectors_with_norm(n - 1, m) {
            k[1..].copy_from_slice(&tail);
            if m > limit {
                continue;
            }
            let span = (limit - m) as i64;
            for k1 in -span..=span {
                k[0] = k1;
                visit(&k, k1.unsigned_abs() as usize + m, DivisorClass::Natural);
            }
        }
    }
}

/// Constructs `gamma` with `|<k, lambda>| >= |k| gamma` on the sharp and natural
/// index sets, then scans every such `k` with `|k| <= verify_up_to`.
///
/// The constructive value uses `theta = max |lambda_v|` (plus `|2 lambda_v|` and
/// `|lambda_v +- lambda_v'|` in the extended mode), the cutoff
/// `N = ceil(1 + 2 theta)`, `delta = min |<k, lambda>|` over natural `k` with
/// `|k| <= N`, and `gamma = min(delta / N, |lambda_1| / 2)`. If the scan finds
/// a smaller ratio the result is lowered to 99% of it and tagged empirical.
pub fn gamma_lower_bound(spec: &Spectrum, verify_up_to: usize) -> Result<GammaBound> {
    spec.validate()?;
    if spec.mode == Mode::Birkhoff {
        return Err(Error::InvalidInput(
            "the small-divisor constant is defined for the thm1/thm2 index sets only".into(),
        ));
    }
    let n = spec.n();
    let lam = &spec.lambda;
    let mut theta = lam[1..].iter().map(|l| l.norm()).fold(0.0, f64::max);
    if spec.mode == Mode::ExtendedCenter {
        for a in 1..n {
            theta = theta.max((lam[a] * 2.0).norm());
            for b in (a + 1)..n {
                theta = theta.max((lam[a] + lam[b]).norm()).max((lam[a] - lam[b]).norm());
            }
        }
    }
    let cutoff = (1.0 + 2.0 * theta).ceil() as usize;

    let mut resonance: Option<(Vec<i64>, f64)> = None;
    let mut delta = f64::INFINITY;
    for_each_nonflat(spec.mode, n, cutoff, |k, _, class| {
        if class == DivisorClass::Natural {
            delta = delta.min(spec.pairing(k).norm());
        }
    });
    let constructive = (delta / cutoff as f64).min(lam[0].norm() / 2.0);

    let mut min_ratio = f64::INFINITY;
    let mut min_ratio_k = Vec::new();
    let limit = verify_up_to.max(cutoff);
    for_each_nonflat(spec.mode, n, limit, |k, norm, _| {
        let mag = spec.pairing(k).norm();
        if resonance.is_none() && mag <= spec.tolerance(norm) {
            resonance = Some((k.to_vec(), mag));
        }
        let ratio = mag / norm as f64;
        if ratio < min_ratio {
            min_ratio = ratio;
            min_ratio_k = k.to_vec();
        }
    });
    if let Some((k, magnitude)) = resonance {
        return Err(Error::Resonance { k, magnitude });
    }
    let (gamma, source) = if constructive <= min_ratio {
        (constructive, GammaSource::Constructive)
    } else {
        (0.99 * min_ratio, GammaSource::Empirical)
    };
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Estimate(format!("non-positive small-divisor constant {gamma}")));
    }
    Ok(GammaBound {
        gamma,
        constructive_gamma: constructive,
        theta,
        cutoff,
        delta,
        source,
        verified_up_to: limit,
        min_ratio,
        min_ratio_k,
    })
}
