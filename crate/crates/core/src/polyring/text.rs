//! Canonical text form: `3/2*x_1_1^2*y_2_1 - 1/4`, terms in descending order
//! under the polynomial's monomial order.

use std::fmt;

use num_traits::{One, Signed};

use super::{Monomial, MonomialOrder, PolyError, Polynomial, VarKind, VariableId};
use crate::exactmath::{parse_rational, Rational};

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms().iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", m.display(self.dim()))?;
            } else {
                write!(f, "{mag}*{}", m.display(self.dim()))?;
            }
        }
        Ok(())
    }
}

fn parse_variable(tok: &str, dim: usize) -> Result<VariableId, PolyError> {
    let bad = || PolyError::Parse(format!("bad variable {tok:?}"));
    let mut parts = tok.split('_');
    let kind = match parts.next() {
        Some("x") => VarKind::X,
        Some("y") => VarKind::Y,
        _ => return Err(bad()),
    };
    let row: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    let col: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    if parts.next().is_some() {
        return Err(bad());
    }
    let v = VariableId { kind, row, col };
    if !v.in_range(dim) {
        return Err(PolyError::UnknownVariable(tok.to_string(), dim));
    }
    Ok(v)
}

fn parse_factor(tok: &str, dim: usize, nvars: usize) -> Result<(Rational, Monomial), PolyError> {
    let (base, exp) = match tok.split_once('^') {
        Some((b, e)) => {
            let e: u32 = e
                .trim()
                .parse()
                .map_err(|_| PolyError::Parse(format!("bad exponent in {tok:?}")))?;
            (b.trim(), e)
        }
        None => (tok, 1),
    };
    if base.starts_with(['x', 'y']) {
        let v = parse_variable(base, dim)?;
        Ok((Rational::one(), Monomial::var(v.index(dim), nvars, exp)))
    } else {
        let r = parse_rational(base).map_err(|e| PolyError::Parse(e.to_string()))?;
        Ok((num_traits::pow(r, exp as usize), Monomial::one(nvars)))
    }
}

impl Polynomial {
    /// Parses the canonical text form for the ring of dimension `dim`.
    pub fn parse(s: &str, dim: usize, order: MonomialOrder) -> Result<Self, PolyError> {
        let nvars = 2 * dim * dim;
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(PolyError::Parse("empty polynomial".into()));
        }
        let mut terms = Vec::new();
        let mut rest = compact.as_str();
        while !rest.is_empty() {
            let (sign, body) = match rest.as_bytes()[0] {
                b'-' => (-1, &rest[1..]),
                b'+' => (1, &rest[1..]),
                _ => (1, rest),
            };
            // A term ends at the next '+' or '-' that is not part of an exponent
            // or a rational's sign right after '*', '/' or '^'.
            let bytes = body.as_bytes();
            let mut end = bytes.len();
            for (i, &b) in bytes.iter().enumerate() {
                if (b == b'+' || b == b'-') && i > 0 && !matches!(bytes[i - 1], b'*' | b'/' | b'^') {
                    end = i;
                    break;
                }
            }
            let term = &body[..end];
            if term.is_empty() {
                return Err(PolyError::Parse(format!("dangling sign in {s:?}")));
            }
            let mut coeff = Rational::from_integer(sign.into());
            let mut mono = Monomial::one(nvars);
            for factor in term.split('*') {
                if factor.is_empty() {
                    return Err(PolyError::Parse(format!("empty factor in {term:?}")));
                }
                let (c, m) = parse_factor(factor, dim, nvars)?;
                coeff *= c;
                mono = mono.mul(&m);
            }
            terms.push((mono, coeff));
            rest = &body[end..];
        }
        Ok(Polynomial::from_terms(dim, order, terms))
    }
}
