//! Bivariate integer polynomials, just enough for rank-style invariants.
//!
//! Coefficients are `i64` keyed by exponent pairs; arithmetic keeps the term
//! map normalized (no explicit zero coefficients), so structural equality is
//! polynomial equality.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// A polynomial in two commuting variables x and y over ℤ.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BivarPoly {
    terms: BTreeMap<(u32, u32), i64>,
}

impl BivarPoly {
    pub fn zero() -> Self {
        BivarPoly::default()
    }

    pub fn one() -> Self {
        BivarPoly::monomial(0, 0, 1)
    }

    /// c·xᵃ·yᵇ
    pub fn monomial(x_exp: u32, y_exp: u32, coeff: i64) -> Self {
        let mut terms = BTreeMap::new();
        if coeff != 0 {
            terms.insert((x_exp, y_exp), coeff);
        }
        BivarPoly { terms }
    }

    pub fn x() -> Self {
        BivarPoly::monomial(1, 0, 1)
    }

    pub fn y() -> Self {
        BivarPoly::monomial(0, 1, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, x_exp: u32, y_exp: u32) -> i64 {
        self.terms.get(&(x_exp, y_exp)).copied().unwrap_or(0)
    }

    /// Terms in (x exponent, y exponent) order with nonzero coefficients.
    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), i64)> + '_ {
        self.terms.iter().map(|(&k, &v)| (k, v))
    }

    pub fn pow(&self, mut exp: u32) -> Self {
        let mut base = self.clone();
        let mut acc = BivarPoly::one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            exp >>= 1;
        }
        acc
    }

    /// Evaluate at integer arguments (small cases; overflow panics in debug).
    pub fn eval(&self, x: i64, y: i64) -> i64 {
        self.terms
            .iter()
            .map(|(&(a, b), &c)| c * x.pow(a) * y.pow(b))
            .sum()
    }

    fn insert_term(&mut self, key: (u32, u32), delta: i64) {
        let entry = self.terms.entry(key).or_insert(0);
        *entry += delta;
        if *entry == 0 {
            self.terms.remove(&key);
        }
    }
}

impl Add for &BivarPoly {
    type Output = BivarPoly;
    fn add(self, rhs: &BivarPoly) -> BivarPoly {
        let mut out = self.clone();
        for (&key, &coeff) in &rhs.terms {
            out.insert_term(key, coeff);
        }
        out
    }
}

impl Sub for &BivarPoly {
    type Output = BivarPoly;
    fn sub(self, rhs: &BivarPoly) -> BivarPoly {
        let mut out = self.clone();
        for (&key, &coeff) in &rhs.terms {
            out.insert_term(key, -coeff);
        }
        out
    }
}

impl Neg for &BivarPoly {
    type Output = BivarPoly;
    fn neg(self) -> BivarPoly {
        BivarPoly {
            terms: self.terms.iter().map(|(&k, &v)| (k, -v)).collect(),
        }
    }
}

impl Mul for &BivarPoly {
    type Output = BivarPoly;
    fn mul(self, rhs: &BivarPoly) -> BivarPoly {
        let mut out = BivarPoly::zero();
        for (&(a1, b1), &c1) in &self.terms {
            for (&(a2, b2), &c2) in &rhs.terms {
                out.insert_term((a1 + a2, b1 + b2), c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for BivarPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        // Total x-degree descending, then y ascending — the customary
        // reading order for rank polynomials.
        let mut keys: Vec<(u32, u32)> = self.terms.keys().copied().collect();
        keys.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        for (i, key) in keys.iter().enumerate() {
            let coeff = self.terms[key];
            if i == 0 {
                if coeff < 0 {
                    f.write_str("-")?;
                }
            } else if coeff < 0 {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            let mag = coeff.unsigned_abs();
            let (a, b) = *key;
            if mag != 1 || (a == 0 && b == 0) {
                write!(f, "{}", mag)?;
            }
            match a {
                0 => {}
                1 => f.write_str("x")?,
                _ => write!(f, "x^{}", a)?,
            }
            match b {
                0 => {}
                1 => f.write_str("y")?,
                _ => write!(f, "y^{}", b)?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_normalizes_zero_terms() {
        let p = BivarPoly::x();
        let q = &p - &p;
        assert!(q.is_zero());
        assert_eq!(q, BivarPoly::zero());
    }

    #[test]
    fn multiplication_matches_expansion() {
        // (x + y)² = x² + 2xy + y²
        let s = &BivarPoly::x() + &BivarPoly::y();
        let sq = &s * &s;
        assert_eq!(sq.coeff(2, 0), 1);
        assert_eq!(sq.coeff(1, 1), 2);
        assert_eq!(sq.coeff(0, 2), 1);
        assert_eq!(sq.terms().count(), 3);
        assert_eq!(sq, s.pow(2));
    }

    #[test]
    fn eval_agrees_with_terms() {
        let p = &BivarPoly::monomial(2, 1, 3) - &BivarPoly::monomial(0, 0, 5);
        assert_eq!(p.eval(2, 3), 3 * 4 * 3 - 5);
    }

    #[test]
    fn display_reads_high_degree_first() {
        // x³ + x² + x + y  (a cycle's rank polynomial shape)
        let p = &(&(&BivarPoly::monomial(3, 0, 1) + &BivarPoly::monomial(2, 0, 1))
            + &BivarPoly::x())
            + &BivarPoly::y();
        assert_eq!(p.to_string(), "x^3 + x^2 + x + y");
        assert_eq!(BivarPoly::zero().to_string(), "0");
        assert_eq!(BivarPoly::monomial(0, 0, -7).to_string(), "-7");
        assert_eq!(BivarPoly::monomial(1, 2, -1).to_string(), "-xy^2");
    }
}
