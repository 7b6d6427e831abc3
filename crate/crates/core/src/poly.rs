//! Dense univariate polynomials over a [`FieldDescriptor`].

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{FieldDescriptor, Scalar};

/// Coefficients are stored lowest degree first with no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    field: FieldDescriptor,
    coeffs: Vec<Scalar>,
}

impl Poly {
    pub fn new(field: FieldDescriptor, mut coeffs: Vec<Scalar>) -> Result<Self> {
        if let Some(c) = coeffs.iter().find(|c| c.field() != field) {
            return Err(Error::FieldMismatch(field.to_string(), c.field().to_string()));
        }
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Ok(Poly { field, coeffs })
    }

    pub fn from_ints(field: FieldDescriptor, coeffs: &[i64]) -> Self {
        Poly::new(field, coeffs.iter().map(|&c| Scalar::from_i64(field, c)).collect())
            .expect("coefficients share the field")
    }

    pub fn zero(field: FieldDescriptor) -> Self {
        Poly { field, coeffs: Vec::new() }
    }

    pub fn one(field: FieldDescriptor) -> Self {
        Poly { field, coeffs: vec![Scalar::one(field)] }
    }

    /// The monic linear polynomial x - a.
    pub fn linear(a: &Scalar) -> Self {
        Poly { field: a.field(), coeffs: vec![-a, Scalar::one(a.field())] }
    }

    pub fn field(&self) -> FieldDescriptor {
        self.field
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    /// Degree, with -1 for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, i: usize) -> Scalar {
        self.coeffs.get(i).cloned().unwrap_or_else(|| Scalar::zero(self.field))
    }

    pub fn leading(&self) -> Option<&Scalar> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        let mut acc = Scalar::zero(self.field);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let coeffs = (0..n).map(|i| &self.coeff(i) + &o.coeff(i)).collect();
        Poly::new(self.field, coeffs).expect("same field")
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let coeffs = (0..n).map(|i| &self.coeff(i) - &o.coeff(i)).collect();
        Poly::new(self.field, coeffs).expect("same field")
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero(self.field);
        }
        let mut out = vec![Scalar::zero(self.field); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] = &out[i + j] + &(a * b);
                }
            }
        }
        Poly::new(self.field, out).expect("same field")
    }

    pub fn scale(&self, c: &Scalar) -> Poly {
        Poly::new(self.field, self.coeffs.iter().map(|a| a * c).collect()).expect("same field")
    }

    pub fn pow(&self, e: u32) -> Poly {
        (0..e).fold(Poly::one(self.field), |acc, _| acc.mul(self))
    }

    /// Quotient and remainder.
    pub fn div_rem(&self, d: &Poly) -> Result<(Poly, Poly)> {
        let lead = d.leading().ok_or(Error::DivisionByZero)?;
        let lead_inv = lead.inv()?;
        let mut rem = self.coeffs.clone();
        let dl = d.coeffs.len();
        if rem.len() < dl {
            return Ok((Poly::zero(self.field), self.clone()));
        }
        let mut q = vec![Scalar::zero(self.field); rem.len() - dl + 1];
        for k in (0..q.len()).rev() {
            let c = &rem[k + dl - 1] * &lead_inv;
            if c.is_zero() {
                continue;
            }
            for (j, dj) in d.coeffs.iter().enumerate() {
                rem[k + j] = &rem[k + j] - &(&c * dj);
            }
            q[k] = c;
        }
        Ok((Poly::new(self.field, q)?, Poly::new(self.field, rem)?))
    }

    /// Exact quotient; fails if the division leaves a remainder.
    pub fn exact_div(&self, d: &Poly) -> Result<Poly> {
        let (q, r) = self.div_rem(d)?;
        if !r.is_zero() {
            return Err(Error::Precondition("polynomial division is not exact".into()));
        }
        Ok(q)
    }

    /// Render with a chosen variable name, highest degree first.
    pub fn display_with(&self, var: &str) -> String {
        if self.coeffs.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (e, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let cs = c.to_string();
            let compound = cs[1..].contains(['+', '-']);
            let mut term = String::new();
            if e == 0 {
                term = if compound { format!("({cs})") } else { cs };
            } else {
                if c.is_one() {
                } else if (-c).is_one() {
                    term.push('-');
                } else if compound {
                    term.push_str(&format!("({cs})*"));
                } else {
                    term.push_str(&cs);
                    term.push('*');
                }
                term.push_str(var);
                if e > 1 {
                    term.push_str(&format!("^{e}"));
                }
            }
            if !out.is_empty() && !term.starts_with('-') {
                out.push('+');
            }
            out.push_str(&term);
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with("x"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_and_display() {
        let q = FieldDescriptor::Rational;
        let a = Poly::from_ints(q, &[-1, 0, 0, 1]);
        let b = Poly::from_ints(q, &[-1, 1]);
        let (quo, rem) = a.div_rem(&b).unwrap();
        assert!(rem.is_zero());
        assert_eq!(quo.to_string(), "x^2+x+1");
        assert_eq!(Poly::from_ints(q, &[1, -6, 1]).display_with("λ"), "λ^2-6*λ+1");
    }
}
