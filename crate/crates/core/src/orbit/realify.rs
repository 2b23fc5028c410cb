//! Complex canonical variables for a real oscillator Hamiltonian.
//!
//! `x = (q - i p) / sqrt 2`, `y = (p - i q) / sqrt 2`, so that
//! `omega (q^2 + p^2) / 2` becomes `i omega x y` and `{x, y} = 1`.
//! Polynomials in `(q, p)` reuse the x slots for `q` and the y slots for `p`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::{substitute, ExponentPair, GradedSeries, Polynomial};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn linear(n: usize, x_coef: (usize, Complex64), y_coef: (usize, Complex64)) -> Polynomial {
    let mut p = Polynomial::coordinate_x(n, x_coef.0).scale(x_coef.1);
    p += &Polynomial::coordinate_y(n, y_coef.0).scale(y_coef.1);
    p
}

fn images(n: usize, trunc: usize, f: impl Fn(usize) -> (Polynomial, Polynomial)) -> Vec<GradedSeries> {
    let pairs: Vec<_> = (0..n).map(f).collect();
    pairs
        .iter()
        .map(|p| &p.0)
        .chain(pairs.iter().map(|p| &p.1))
        .map(|p| GradedSeries::from_polynomial(p, trunc))
        .collect()
}

/// Frequencies `omega_j` of a quadratic part `sum omega_j (q_j^2 + p_j^2) / 2`.
pub fn oscillator_frequencies(h: &Polynomial) -> Result<Vec<f64>> {
    let n = h.n();
    let quad = h.homogeneous_part(2);
    let scale = quad.max_abs_coeff().max(1.0);
    let mut omega = Vec::with_capacity(n);
    let mut expected = Polynomial::zero(n);
    for l in 0..n {
        let mut j = vec![0u16; n];
        j[l] = 2;
        let qq = ExponentPair::new(&j, &vec![0; n])?;
        let pp = ExponentPair::new(&vec![0; n], &j)?;
        let w = 2.0 * quad.coeff(&qq).re;
        if w.is_nan() || w <= 0.0 {
            return Err(Error::NonDiagonalQuadratic(format!(
                "the q{}^2 coefficient does not describe a positive oscillator",
                l + 1
            )));
        }
        expected.add_term(qq, Complex64::new(w / 2.0, 0.0));
        expected.add_term(pp, Complex64::new(w / 2.0, 0.0));
        omega.push(w);
    }
    if (&quad - &expected).max_abs_coeff() > 1e-12 * scale {
        return Err(Error::NonDiagonalQuadratic(
            "the quadratic part is not a sum of oscillators omega (q^2 + p^2) / 2".into(),
        ));
    }
    Ok(omega)
}

/// Rewrites `H(q, p)` in the complex variables `(x, y)`.
pub fn realify(h_qp: &Polynomial) -> Result<GradedSeries> {
    oscillator_frequencies(h_qp)?;
    let n = h_qp.n();
    let trunc = h_qp.degree().unwrap_or(0).max(2);
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    // q = (x + i y) / sqrt 2, p = (y + i x) / sqrt 2
    let imgs = images(n, trunc, |l| (linear(n, (l, s), (l, I * s)), linear(n, (l, I * s), (l, s))));
    substitute(h_qp, &imgs, trunc)
}

/// Rewrites `F(x, y)` back in `(q, p)`.
pub fn derealify(f_xy: &Polynomial) -> Result<Polynomial> {
    let n = f_xy.n();
    let trunc = f_xy.degree().unwrap_or(0).max(1);
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    // x = (q - i p) / sqrt 2, y = (p - i q) / sqrt 2
    let imgs = images(n, trunc, |l| (linear(n, (l, s), (l, -I * s)), linear(n, (l, -I * s), (l, s))));
    Ok(substitute(f_xy, &imgs, trunc)?.to_polynomial())
}

/// `(q, p) -> (x, y)` for a state vector laid out as `[q.., p..]`.
pub fn complexify_state(qp: &[Complex64]) -> Vec<Complex64> {
    let n = qp.len() / 2;
    let (q, p) = qp.split_at(n);
    let x = q.iter().zip(p).map(|(&q, &p)| (q - I * p) * FRAC_1_SQRT_2);
    let y = q.iter().zip(p).map(|(&q, &p)| (p - I * q) * FRAC_1_SQRT_2);
    x.chain(y).collect()
}

/// `(x, y) -> (q, p)`.
pub fn decomplexify_state(xy: &[Complex64]) -> Vec<Complex64> {
    let n = xy.len() / 2;
    let (x, y) = xy.split_at(n);
    let q = x.iter().zip(y).map(|(&x, &y)| (x + I * y) * FRAC_1_SQRT_2);
    let p = x.iter().zip(y).map(|(&x, &y)| (y + I * x) * FRAC_1_SQRT_2);
    q.chain(p).collect()
}

/// Largest violation of `c_{jk} = conj(c_{kj}) i^{|j|+|k|}`, the pairing that a
/// Hamiltonian real on real phase space satisfies in complex variables.
pub fn reality_defect(f_xy: &Polynomial) -> f64 {
    f_xy.terms()
        .map(|(e, &c)| {
            let swapped = ExponentPair::new(e.k(), e.j()).expect("swapping keeps the degree");
            let paired = f_xy.coeff(&swapped).conj() * I.powu(e.degree() as u32);
            (c - paired).norm()
        })
        .fold(0.0, f64::max)
}
