//! Text literal for polynomials: `(re,im) x1^a1 ... y1^b1 ...` terms joined by `+`.
//! The coefficient may also be a real number or omitted (meaning 1).
//!
//! ```text
//! (1,0) x1^2 x2 + (2,0) x1 y1 x2 + (0.5,-1) y2^3
//! x1 y1 + -0.5 x2^3
//! ```
//!
//! A bare `0` (or an empty string) is the zero polynomial.

use std::fmt;

use num_complex::Complex64;

use super::exponent::ExponentPair;
use super::polynomial::Polynomial;
use crate::error::{Error, Result};

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.terms().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:?},{:?})", c.re, c.im)?;
            if e.degree() > 0 {
                write!(f, " {e}")?;
            }
        }
        Ok(())
    }
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn error(&self, message: impl Into<String>) -> Error {
        let before = &self.src[..self.pos];
        let line = before.matches('\n').count() + 1;
        let column = before.rfind('\n').map_or(self.pos, |i| self.pos - i - 1) + 1;
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(ch) = self.peek() {
            if ch.is_whitespace() {
                self.pos += ch.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, want: char) -> Result<()> {
        self.skip_ws();
        match self.peek() {
            Some(ch) if ch == want => {
                self.pos += 1;
                Ok(())
            }
            Some(ch) => Err(self.error(format!("expected '{want}', found '{ch}'"))),
            None => Err(self.error(format!("expected '{want}', found end of input"))),
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while let Some(ch) = self.peek() {
            if pred(ch) {
                self.pos += ch.len_utf8();
            } else {
                break;
            }
        }
        &self.src[start..self.pos]
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let tok = self.take_while(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '+'));
        tok.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.error(format!("invalid number '{tok}'")))
    }

    fn integer(&mut self, what: &str) -> Result<usize> {
        let tok = self.take_while(|c| c.is_ascii_digit());
        tok.parse::<usize>()
            .map_err(|_| self.error(format!("expected {what}")))
    }
}

/// `(is_y, variable index, exponent)`.
type Factor = (bool, usize, u16);

/// Parses the text literal. With `n = None` the dimension is the largest variable index used.
pub fn parse_polynomial(src: &str, n: Option<usize>) -> Result<Polynomial> {
    let mut cur = Cursor { src, pos: 0 };
    cur.skip_ws();
    let mut raw: Vec<(Vec<Factor>, Complex64)> = Vec::new();
    let rest = src[cur.pos..].trim();
    if !(rest.is_empty() || rest == "0") {
        loop {
            cur.skip_ws();
            let coeff = match cur.peek() {
                Some('(') => {
                    cur.expect('(')?;
                    let re = cur.number()?;
                    cur.expect(',')?;
                    let im = cur.number()?;
                    cur.expect(')')?;
                    Complex64::new(re, im)
                }
                Some(ch) if ch.is_ascii_digit() || matches!(ch, '.' | '-') => Complex64::new(cur.number()?, 0.0),
                Some('x' | 'y') => Complex64::new(1.0, 0.0),
                Some(ch) => return Err(cur.error(format!("expected a coefficient or variable, found '{ch}'"))),
                None => return Err(cur.error("expected a term, found end of input")),
            };
            let mut factors = Vec::new();
            loop {
                cur.skip_ws();
                let is_x = match cur.peek() {
                    Some('x') => true,
                    Some('y') => false,
                    _ => break,
                };
                cur.pos += 1;
                let idx = cur.integer("variable index")?;
                if idx == 0 {
                    return Err(cur.error("variable indices start at 1"));
                }
                let mut exp = 1usize;
                cur.skip_ws();
                if cur.peek() == Some('^') {
                    cur.pos += 1;
                    cur.skip_ws();
                    exp = cur.integer("exponent")?;
                }
                let exp = u16::try_from(exp).map_err(|_| cur.error("exponent too large"))?;
                factors.push((is_x, idx - 1, exp));
            }
            raw.push((factors, coeff));
            cur.skip_ws();
            match cur.peek() {
                None => break,
                Some('+') => cur.pos += 1,
                Some(ch) => return Err(cur.error(format!("expected '+' or end of input, found '{ch}'"))),
            }
        }
    }
    let used = raw
        .iter()
        .flat_map(|(f, _)| f.iter().map(|&(_, l, _)| l + 1))
        .max()
        .unwrap_or(0);
    let n = match n {
        Some(n) if used > n => {
            return Err(Error::InvalidInput(format!(
                "variable index {used} exceeds dimension {n}"
            )))
        }
        Some(n) => n,
        None => used.max(1),
    };
    let mut p = Polynomial::zero(n);
    for (factors, c) in raw {
        let mut j = vec![0u16; n];
        let mut k = vec![0u16; n];
        for (is_x, l, e) in factors {
            let slot = if is_x { &mut j[l] } else { &mut k[l] };
            *slot = slot.saturating_add(e);
        }
        p.add_term(ExponentPair::new(&j, &k)?, c);
    }
    Ok(p)
}

impl std::str::FromStr for Polynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_polynomial(s, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let p = parse_polynomial("(1,0) x1^2 x2 + (2,0) x1 y1 x2 + (0.5,-1) y2^3", None).unwrap();
        assert_eq!(p.n(), 2);
        assert_eq!(p.len(), 3);
        let e = ExponentPair::new(&[1, 1], &[1, 0]).unwrap();
        assert_eq!(p.coeff(&e), Complex64::new(2.0, 0.0));
        let again: Polynomial = p.to_string().parse().unwrap();
        assert_eq!(again, p);
    }

    #[test]
    fn implicit_and_real_coefficients() {
        let p = parse_polynomial("x1 y1 + -0.5 x2^3 + 2", None).unwrap();
        let q = parse_polynomial("(1,0) x1 y1 + (-0.5,0) x2^3 + (2,0)", None).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn constants_and_zero() {
        assert!(parse_polynomial("0", Some(2)).unwrap().is_zero());
        assert!(parse_polynomial("  ", Some(2)).unwrap().is_zero());
        let c = parse_polynomial("(3,1)", Some(1)).unwrap();
        assert_eq!(c, Polynomial::constant(1, Complex64::new(3.0, 1.0)));
        assert_eq!(Polynomial::zero(1).to_string(), "0");
    }

    #[test]
    fn diagnostics_carry_position() {
        match parse_polynomial("(1,0) x1 +\n (2,z) y1", None) {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 2);
                assert!(column >= 4);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_polynomial("(1,0) x0", None).is_err());
        assert!(parse_polynomial("(1,0) x3", Some(2)).is_err());
    }
}
