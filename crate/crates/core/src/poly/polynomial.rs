use std::collections::BTreeMap;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::exponent::{ExponentPair, MAX_DEGREE};
use super::geometry::PolydiskGeometry;
use crate::error::{Error, Result};

/// Sparse polynomial in `x_1..x_n, y_1..y_n` with complex coefficients.
///
/// No stored coefficient is exactly zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolynomialJson", into = "PolynomialJson")]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<ExponentPair, Complex64>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: Complex64) -> Self {
        Self::monomial(ExponentPair::zero(n), c)
    }

    pub fn monomial(e: ExponentPair, c: Complex64) -> Self {
        let mut p = Self::zero(e.n());
        p.add_term(e, c);
        p
    }

    /// The coordinate function `x_l` (zero based).
    pub fn coordinate_x(n: usize, l: usize) -> Self {
        let mut exps = vec![0u16; 2 * n];
        exps[l] = 1;
        Self::monomial(ExponentPair::from_raw(exps.into()), Complex64::new(1.0, 0.0))
    }

    /// The coordinate function `y_l` (zero based).
    pub fn coordinate_y(n: usize, l: usize) -> Self {
        let mut exps = vec![0u16; 2 * n];
        exps[n + l] = 1;
        Self::monomial(ExponentPair::from_raw(exps.into()), Complex64::new(1.0, 0.0))
    }

    /// `H_0 = sum_l lambda_l x_l y_l`.
    pub fn diagonal_quadratic(lambda: &[Complex64]) -> Self {
        let n = lambda.len();
        let mut p = Self::zero(n);
        for (l, &c) in lambda.iter().enumerate() {
            let mut exps = vec![0u16; 2 * n];
            exps[l] = 1;
            exps[n + l] = 1;
            p.add_term(ExponentPair::from_raw(exps.into()), c);
        }
        p
    }

    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (ExponentPair, Complex64)>,
    {
        let mut p = Self::zero(n);
        for (e, c) in terms {
            if e.n() != n {
                return Err(Error::DimensionMismatch {
                    left: n,
                    right: e.n(),
                });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExponentPair, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &ExponentPair) -> Complex64 {
        self.terms.get(e).copied().unwrap_or_default()
    }

    /// Adds `c` to the coefficient of `e`, dropping the term if it cancels exactly.
    pub fn add_term(&mut self, e: ExponentPair, c: Complex64) {
        debug_assert_eq!(e.n(), self.n);
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = *o.get() + c;
                if sum == Complex64::new(0.0, 0.0) {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    /// Highest total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(ExponentPair::degree).max()
    }

    pub fn min_degree(&self) -> Option<usize> {
        self.terms.keys().map(ExponentPair::degree).min()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.degree() == self.min_degree()
    }

    pub fn homogeneous_part(&self, degree: usize) -> Self {
        self.filter(|e, _| e.degree() == degree)
    }

    /// Drops every term of degree above `max_degree`.
    pub fn truncate(&self, max_degree: usize) -> Self {
        self.filter(|e, _| e.degree() <= max_degree)
    }

    pub fn filter<F>(&self, mut keep: F) -> Self
    where
        F: FnMut(&ExponentPair, &Complex64) -> bool,
    {
        Self {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(e, c)| keep(e, c))
                .map(|(e, c)| (e.clone(), *c))
                .collect(),
        }
    }

    pub fn map_coeffs<F>(&self, mut f: F) -> Self
    where
        F: FnMut(&ExponentPair, Complex64) -> Complex64,
    {
        let mut out = Self::zero(self.n);
        for (e, &c) in &self.terms {
            out.add_term(e.clone(), f(e, c));
        }
        out
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        self.map_coeffs(|_, c| c * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.map_coeffs(|_, c| c * factor)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Removes terms with `|c| < eps * max|c|`. `eps = 0` keeps everything.
    pub fn prune(&self, eps: f64) -> Self {
        if eps <= 0.0 {
            return self.clone();
        }
        let cut = eps * self.max_abs_coeff();
        self.filter(|_, c| c.norm() >= cut)
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.mul_truncated(other, usize::MAX))
    }

    /// Product keeping only terms of degree `<= max_degree`.
    pub fn mul_truncated(&self, other: &Self, max_degree: usize) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut out = Self::zero(self.n);
        for (a, &ca) in &self.terms {
            let da = a.degree();
            for (b, &cb) in &other.terms {
                if da + b.degree() > max_degree.min(MAX_DEGREE) {
                    continue;
                }
                let exps: Box<[u16]> = a.raw().iter().zip(b.raw()).map(|(x, y)| x + y).collect();
                out.add_term(ExponentPair::from_raw(exps), ca * cb);
            }
        }
        out
    }

    /// Partial derivative with respect to `x_l` (zero based).
    pub fn partial_x(&self, l: usize) -> Self {
        self.partial(l)
    }

    /// Partial derivative with respect to `y_l` (zero based).
    pub fn partial_y(&self, l: usize) -> Self {
        self.partial(self.n + l)
    }

    fn partial(&self, slot: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (e, &c) in &self.terms {
            let p = e.raw()[slot];
            if p == 0 {
                continue;
            }
            let mut exps: Box<[u16]> = e.raw().into();
            exps[slot] -= 1;
            out.add_term(ExponentPair::from_raw(exps), c * p as f64);
        }
        out
    }

    /// Evaluates at the point `(x, y)`.
    pub fn evaluate(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, &c) in &self.terms {
            let mut m = c;
            for (l, (&a, &b)) in e.j().iter().zip(e.k()).enumerate() {
                if a > 0 {
                    m *= x[l].powu(a as u32);
                }
                if b > 0 {
                    m *= y[l].powu(b as u32);
                }
            }
            acc += m;
        }
        acc
    }

    /// Weighted l1 norm `sum |f_jk| ((1 - delta) R)^(j + k)`.
    pub fn polydisk_norm(&self, geom: &PolydiskGeometry, delta: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::InvalidInput(format!(
                "domain restriction delta = {delta} outside [0, 1)"
            )));
        }
        Ok(self.norm_at_scale(geom, 1.0 - delta))
    }

    /// Weighted l1 norm on the polydisk of radii `scale * R`.
    pub fn norm_at_scale(&self, geom: &PolydiskGeometry, scale: f64) -> f64 {
        assert_eq!(geom.n(), self.n, "geometry dimension mismatch");
        let radii = geom.radii();
        self.terms
            .iter()
            .map(|(e, c)| {
                let w: f64 = e
                    .j()
                    .iter()
                    .zip(e.k())
                    .zip(radii)
                    .map(|((&a, &b), &r)| (scale * r).powi(a as i32 + b as i32))
                    .product();
                c.norm() * w
            })
            .fold(0.0, |acc, v| acc + v)
    }
}

/// `{f, g} = sum_l (df/dx_l dg/dy_l - df/dy_l dg/dx_l)`.
pub fn poisson_bracket(f: &Polynomial, g: &Polynomial) -> Result<Polynomial> {
    f.check_dim(g)?;
    Ok(bracket_truncated(f, g, usize::MAX))
}

/// `L_chi f = {f, chi}`.
pub fn lie_derivative(chi: &Polynomial, f: &Polynomial) -> Result<Polynomial> {
    poisson_bracket(f, chi)
}

/// Poisson bracket keeping only output terms of degree `<= max_degree`.
pub(crate) fn bracket_truncated(f: &Polynomial, g: &Polynomial, max_degree: usize) -> Polynomial {
    let n = f.n;
    let mut out = Polynomial::zero(n);
    for (a, &ca) in &f.terms {
        let da = a.degree();
        for (b, &cb) in &g.terms {
            let db = b.degree();
            if da + db < 2 || da + db - 2 > max_degree {
                continue;
            }
            let (ra, rb) = (a.raw(), b.raw());
            let prod = ca * cb;
            for l in 0..n {
                let w = ra[l] as i64 * rb[n + l] as i64 - ra[n + l] as i64 * rb[l] as i64;
                if w == 0 {
                    continue;
                }
                let mut exps: Box<[u16]> = ra.iter().zip(rb).map(|(x, y)| x + y).collect();
                exps[l] -= 1;
                exps[n + l] -= 1;
                out.add_term(ExponentPair::from_raw(exps), prod * w as f64);
            }
        }
    }
    out
}

impl Add<&Polynomial> for &Polynomial {
    type Output = Polynomial;

    /// Panics on dimension mismatch; use [`Polynomial::try_add`] for a checked sum.
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.try_add(rhs).expect("dimension mismatch")
    }
}

impl Sub<&Polynomial> for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.try_add(&-rhs).expect("dimension mismatch")
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        self.scale_real(-1.0)
    }
}

impl Mul<&Polynomial> for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.try_mul(rhs).expect("dimension mismatch")
    }
}

impl AddAssign<&Polynomial> for Polynomial {
    fn add_assign(&mut self, rhs: &Polynomial) {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        for (e, &c) in &rhs.terms {
            self.add_term(e.clone(), c);
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    j: Vec<u16>,
    k: Vec<u16>,
    c: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct PolynomialJson {
    n: usize,
    terms: Vec<TermJson>,
}

impl TryFrom<PolynomialJson> for Polynomial {
    type Error = Error;

    fn try_from(raw: PolynomialJson) -> Result<Self> {
        let mut p = Polynomial::zero(raw.n);
        for (i, t) in raw.terms.into_iter().enumerate() {
            if t.j.len() != raw.n || t.k.len() != raw.n {
                return Err(Error::InvalidInput(format!(
                    "terms[{i}]: exponent vectors must have length n = {}",
                    raw.n
                )));
            }
            if !t.c.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidInput(format!("terms[{i}].c: non-finite coefficient")));
            }
            p.add_term(ExponentPair::new(&t.j, &t.k)?, Complex64::new(t.c[0], t.c[1]));
        }
        Ok(p)
    }
}

impl From<Polynomial> for PolynomialJson {
    fn from(p: Polynomial) -> Self {
        PolynomialJson {
            n: p.n,
            terms: p
                .terms
                .into_iter()
                .map(|(e, c)| TermJson {
                    j: e.j().to_vec(),
                    k: e.k().to_vec(),
                    c: [c.re, c.im],
                })
                .collect(),
        }
    }
}
