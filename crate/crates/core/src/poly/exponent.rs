use std::fmt;

use crate::error::{Error, Result};

/// Largest total degree a monomial may carry.
pub const MAX_DEGREE: usize = 64;

/// Exponents `(j, k)` of the monomial `x^j y^k` in `2n` canonical variables.
///
/// Stored as one contiguous slice `[j_1..j_n, k_1..k_n]`; the derived ordering
/// is lexicographic on that slice, which gives every polynomial a stable term
/// order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentPair {
    exps: Box<[u16]>,
}

impl ExponentPair {
    pub fn new(j: &[u16], k: &[u16]) -> Result<Self> {
        if j.len() != k.len() {
            return Err(Error::DimensionMismatch {
                left: j.len(),
                right: k.len(),
            });
        }
        let degree: usize = j.iter().chain(k).map(|&e| e as usize).sum();
        if degree > MAX_DEGREE {
            return Err(Error::InvalidInput(format!(
                "monomial degree {degree} exceeds the maximum {MAX_DEGREE}"
            )));
        }
        Ok(Self::from_raw(j.iter().chain(k).copied().collect()))
    }

    /// The constant monomial in dimension `n`.
    pub fn zero(n: usize) -> Self {
        Self::from_raw(vec![0; 2 * n].into_boxed_slice())
    }

    pub(crate) fn from_raw(exps: Box<[u16]>) -> Self {
        debug_assert!(exps.len().is_multiple_of(2));
        Self { exps }
    }

    pub(crate) fn raw(&self) -> &[u16] {
        &self.exps
    }

    pub fn n(&self) -> usize {
        self.exps.len() / 2
    }

    /// Exponents of `x_1..x_n`.
    pub fn j(&self) -> &[u16] {
        &self.exps[..self.n()]
    }

    /// Exponents of `y_1..y_n`.
    pub fn k(&self) -> &[u16] {
        &self.exps[self.n()..]
    }

    pub fn degree(&self) -> usize {
        self.exps.iter().map(|&e| e as usize).sum()
    }

    /// `j - k` as a signed vector; the divisor of this monomial is `<j - k, lambda>`.
    pub fn difference(&self) -> Vec<i64> {
        self.j()
            .iter()
            .zip(self.k())
            .map(|(&a, &b)| a as i64 - b as i64)
            .collect()
    }

    /// `j + k`, the vector the divisor classes are defined on.
    pub fn sum(&self) -> Vec<i64> {
        self.j()
            .iter()
            .zip(self.k())
            .map(|(&a, &b)| a as i64 + b as i64)
            .collect()
    }

    /// Every exponent pair of total degree `d` in `n` degrees of freedom.
    pub fn all_of_degree(n: usize, d: usize) -> Vec<Self> {
        fn fill(slots: &mut [u16], at: usize, left: usize, out: &mut Vec<ExponentPair>) {
            if at + 1 == slots.len() {
                slots[at] = left as u16;
                out.push(ExponentPair::from_raw(slots.to_vec().into_boxed_slice()));
                return;
            }
            for v in (0..=left).rev() {
                slots[at] = v as u16;
                fill(slots, at + 1, left - v, out);
            }
        }
        let mut out = Vec::new();
        if n == 0 || d > MAX_DEGREE {
            return out;
        }
        fill(&mut vec![0u16; 2 * n], 0, d, &mut out);
        out
    }

    /// True when `j == k`, i.e. the monomial is a product of `x_l y_l` factors.
    pub fn is_symmetric(&self) -> bool {
        self.j() == self.k()
    }

    /// Number of powers carried by the non-distinguished variables `x_2..x_n, y_2..y_n`.
    pub fn transverse_degree(&self) -> usize {
        let n = self.n();
        (1..n)
            .map(|l| self.exps[l] as usize + self.exps[n + l] as usize)
            .sum()
    }
}

impl fmt::Debug for ExponentPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.j(), self.k())
    }
}

/// Writes the monomial as `x1^2 y3`, or `1` for the constant monomial.
impl fmt::Display for ExponentPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, exps) in [("x", self.j()), ("y", self.k())] {
            for (l, &e) in exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if !first {
                    f.write_str(" ")?;
                }
                first = false;
                write!(f, "{name}{}", l + 1)?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}
