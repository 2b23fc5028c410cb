use std::collections::BTreeMap;

use num_complex::Complex64;

use super::exponent::ExponentPair;
use super::polynomial::{bracket_truncated, Polynomial};
use crate::error::{Error, Result};

/// A power series stored as homogeneous parts keyed by literal degree, cut at
/// `trunc_order`.
///
/// `truncated` records whether any term above `trunc_order` was discarded.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedSeries {
    n: usize,
    parts: BTreeMap<usize, Polynomial>,
    trunc_order: usize,
    truncated: bool,
}

impl GradedSeries {
    pub fn new(n: usize, trunc_order: usize) -> Self {
        Self {
            n,
            parts: BTreeMap::new(),
            trunc_order,
            truncated: false,
        }
    }

    /// Splits `p` by degree; terms above `trunc_order` are dropped and flagged.
    pub fn from_polynomial(p: &Polynomial, trunc_order: usize) -> Self {
        let mut s = Self::new(p.n(), trunc_order);
        s.add_polynomial(p);
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn trunc_order(&self) -> usize {
        self.trunc_order
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub(crate) fn mark_truncated(&mut self, flag: bool) {
        self.truncated |= flag;
    }

    pub fn part(&self, degree: usize) -> Option<&Polynomial> {
        self.parts.get(&degree)
    }

    /// The part of the given degree, or zero.
    pub fn part_or_zero(&self, degree: usize) -> Polynomial {
        self.parts
            .get(&degree)
            .cloned()
            .unwrap_or_else(|| Polynomial::zero(self.n))
    }

    pub fn parts(&self) -> impl Iterator<Item = (usize, &Polynomial)> {
        self.parts.iter().map(|(&d, p)| (d, p))
    }

    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        self.parts.keys().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    /// Adds an arbitrary polynomial, splitting it over degrees.
    pub fn add_polynomial(&mut self, p: &Polynomial) {
        assert_eq!(p.n(), self.n, "dimension mismatch");
        for (e, &c) in p.terms() {
            self.add_term(e.clone(), c);
        }
    }

    pub fn add_term(&mut self, e: ExponentPair, c: Complex64) {
        let d = e.degree();
        if d > self.trunc_order {
            self.truncated = true;
            return;
        }
        let part = self.parts.entry(d).or_insert_with(|| Polynomial::zero(self.n));
        part.add_term(e, c);
        if part.is_zero() {
            self.parts.remove(&d);
        }
    }

    /// Replaces the part of degree `d`; `p` must be homogeneous of degree `d` or zero.
    pub fn set_part(&mut self, d: usize, p: Polynomial) {
        assert!(
            p.is_zero() || (p.is_homogeneous() && p.degree() == Some(d)),
            "part of degree {d} is not homogeneous of that degree"
        );
        if d > self.trunc_order {
            if !p.is_zero() {
                self.truncated = true;
            }
            return;
        }
        if p.is_zero() {
            self.parts.remove(&d);
        } else {
            self.parts.insert(d, p);
        }
    }

    pub fn to_polynomial(&self) -> Polynomial {
        let mut out = Polynomial::zero(self.n);
        for p in self.parts.values() {
            out += p;
        }
        out
    }

    /// Sum of two series; the result keeps the smaller truncation order.
    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let mut out = Self::new(self.n, self.trunc_order.min(other.trunc_order));
        out.truncated = self.truncated || other.truncated;
        for p in self.parts.values().chain(other.parts.values()) {
            out.add_polynomial(p);
        }
        Ok(out)
    }

    pub fn prune(&self, eps: f64) -> Self {
        let mut out = self.clone();
        for (&d, p) in &self.parts {
            out.set_part(d, p.prune(eps));
        }
        out
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.parts.values().map(Polynomial::max_abs_coeff).fold(0.0, f64::max)
    }
}

/// Applies `L_chi` and drops output terms above `max_degree`.
pub(crate) fn lie_derivative_truncated(chi: &Polynomial, f: &Polynomial, max_degree: usize) -> Polynomial {
    bracket_truncated(f, chi, max_degree)
}

/// `exp(L_chi) f = sum_s L_chi^s f / s!`, cut at `trunc_order` (and at `f`'s own order).
///
/// `chi` must have no terms of degree below 3, so every application of
/// `L_chi` raises the degree and the sum is finite.
pub fn lie_series_apply(chi: &Polynomial, f: &GradedSeries, trunc_order: usize) -> Result<GradedSeries> {
    if chi.n() != f.n() {
        return Err(Error::DimensionMismatch {
            left: chi.n(),
            right: f.n(),
        });
    }
    if let Some(d) = chi.min_degree() {
        if d < 3 {
            return Err(Error::LowDegreeGenerator(d));
        }
    }
    let trunc = trunc_order.min(f.trunc_order());
    let mut out = GradedSeries::new(f.n(), trunc);
    out.truncated = f.truncated || f.degrees().any(|d| d > trunc);
    for (d, part) in f.parts() {
        if d > trunc {
            continue;
        }
        let mut term = part.clone();
        let mut s = 0usize;
        let chi_degree = chi.degree().unwrap_or(0);
        while !term.is_zero() {
            out.add_polynomial(&term);
            if chi_degree > 0 && term.degree().unwrap_or(0) + chi_degree - 2 > trunc {
                out.truncated = true;
            }
            s += 1;
            term = lie_derivative_truncated(chi, &term, trunc).scale_real(1.0 / s as f64);
        }
    }
    Ok(out)
}

/// Substitutes series for the variables of `f`: `images` holds the images of
/// `x_1..x_n` followed by `y_1..y_n`. Terms above `trunc_order` are dropped.
pub fn substitute(f: &Polynomial, images: &[GradedSeries], trunc_order: usize) -> Result<GradedSeries> {
    if images.len() != 2 * f.n() {
        return Err(Error::DimensionMismatch {
            left: 2 * f.n(),
            right: images.len(),
        });
    }
    let m = images.first().map_or(f.n(), GradedSeries::n);
    if images.iter().any(|s| s.n() != m) {
        return Err(Error::InvalidInput("substitution images differ in dimension".into()));
    }
    let flat: Vec<Polynomial> = images.iter().map(|s| s.to_polynomial().truncate(trunc_order)).collect();
    // powers[v][e] = flat[v]^e, filled lazily
    let mut powers: Vec<Vec<Polynomial>> = vec![vec![Polynomial::constant(m, Complex64::new(1.0, 0.0))]; flat.len()];
    let mut out = GradedSeries::new(m, trunc_order);
    for (e, &c) in f.terms() {
        let mut term = Polynomial::constant(m, c);
        for (v, &p) in e.raw().iter().enumerate() {
            let p = p as usize;
            if p == 0 {
                continue;
            }
            while powers[v].len() <= p {
                let next = powers[v].last().unwrap().mul_truncated(&flat[v], trunc_order);
                powers[v].push(next);
            }
            term = term.mul_truncated(&powers[v][p], trunc_order);
        }
        out.add_polynomial(&term);
    }
    Ok(out)
}
